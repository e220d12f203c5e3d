import pytest

from beamforming.error_handler import ConfigError
from experiments.config import ExperimentConfig, build_config, read_config_file


def write_config(tmp_path, text):
    path = tmp_path / "sweep.cfg"
    path.write_text(text, encoding="utf-8")
    return path


def test_read_config_file_parses_pairs_and_comments(tmp_path):
    path = write_config(
        tmp_path,
        "# varredura padrão\n"
        "NTX=8\n"
        "k=2\n"
        "eps=0.1\n"
        "snr=0,5,10\n"
        "methods=sca,zf\n"
        "max_iter=30\n",
    )
    values = read_config_file(path)
    assert values["ntx"] == "8", "keys are lowercased"
    assert values["snr"] == "0,5,10"
    assert "# varredura padrão" not in values


def test_build_config_converts_file_values(tmp_path):
    path = write_config(tmp_path, "ntx=8\nk=2\nsnr=0,5,10\nmethods=SCA,zf\nmax_iter=30\ntheoretical=false\n")
    cfg = build_config(read_config_file(path))
    assert cfg.n_tx == 8 and cfg.k_pairs == 2
    assert cfg.snr_db_list == (0.0, 5.0, 10.0)
    assert cfg.methods == ("sca", "zf")
    assert cfg.sca.max_iter == 30
    assert cfg.theoretical is False


def test_cli_overrides_win_over_file(tmp_path):
    path = write_config(tmp_path, "ntx=8\nk=2\ntrials=50\n")
    cfg = build_config(read_config_file(path), {"trials": 3, "k": None, "eps": 0.2})
    assert cfg.trials == 3
    assert cfg.k_pairs == 2, "None overrides are ignored"
    assert cfg.eps == 0.2


def test_defaults_and_power_convention():
    cfg = build_config()
    assert cfg == ExperimentConfig()
    assert cfg.noise_variance == 1.0
    assert cfg.power_for(10.0) == pytest.approx(10.0)
    assert cfg.power_for(0.0) == pytest.approx(1.0)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="bandwidth"):
        build_config({"bandwidth": "20"})


def test_unconvertible_value_rejected():
    with pytest.raises(ConfigError, match="trials"):
        build_config({"trials": "many"})


def test_rule_violations_rejected():
    with pytest.raises(ConfigError, match="ntx"):
        build_config({"ntx": "2", "k": "3"})
    with pytest.raises(ConfigError, match="eps"):
        build_config({"eps": "-0.5"})
    with pytest.raises(ConfigError, match="methods"):
        build_config({"methods": "sca,mrt"})
    with pytest.raises(ConfigError):
        build_config({"solver_tol": "0"})


def test_invalid_sca_parameters_become_config_errors():
    with pytest.raises(ConfigError):
        build_config({"max_iter": "0"})


def test_missing_file_is_config_error(tmp_path):
    with pytest.raises(ConfigError, match="não encontrado"):
        read_config_file(tmp_path / "absent.cfg")
