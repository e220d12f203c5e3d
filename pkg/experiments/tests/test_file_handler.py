import math

import pandas as pd

from experiments.file_handler import SCHEMA_COLUMNS, read_results, render_csv, write_csv


def sample_table():
    return pd.DataFrame(
        [
            [10.0, "zf", "lb_ssr", 1.0 / 3.0, 0.25, 5, 0],
            [10.0, "zf", "practical_ssr", 2.0, math.nan, 1, 0],
        ],
        columns=SCHEMA_COLUMNS,
    )


def test_csv_format_is_fixed(tmp_path):
    path, error = write_csv(sample_table(), tmp_path / "out" / "sweep.csv")
    assert error is None
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    lines = raw.decode("utf-8").split("\n")
    assert lines[0] == "snr_db,method,metric,mean,stddev,trials,failures"
    assert lines[1] == "10,zf,lb_ssr,0.333333333,0.25,5,0", "9 significant digits"
    assert lines[2] == "10,zf,practical_ssr,2,nan,1,0"
    assert lines[3] == "", "file ends with a single newline"


def test_render_matches_written_file(tmp_path):
    table = sample_table()
    path, _ = write_csv(table, tmp_path / "sweep.csv")
    assert path.read_text(encoding="utf-8") == render_csv(table)


def test_write_failure_returns_message(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory", encoding="utf-8")
    path, error = write_csv(sample_table(), blocker / "sweep.csv")
    assert path is None
    assert error.startswith("Erro ao salvar CSV")


def test_read_results(tmp_path):
    path, _ = write_csv(sample_table(), tmp_path / "sweep.csv")
    df, error = read_results(path)
    assert error is None
    assert list(df.columns) == SCHEMA_COLUMNS
    assert math.isnan(df.loc[1, "stddev"])

    df, error = read_results(tmp_path / "missing.csv")
    assert df is None and "Erro ao ler" in error
