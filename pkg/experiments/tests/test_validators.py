import math

from experiments.validators import (
    validate_dimensions,
    validate_eps,
    validate_methods,
    validate_positive_float,
    validate_positive_int,
    validate_selection_mode,
    validate_snr_list,
)


def test_positive_int_rules():
    assert validate_positive_int(3, "trials") == (True, "")
    ok, msg = validate_positive_int(0, "trials")
    assert not ok and "trials" in msg
    assert not validate_positive_int(True, "trials")[0], "bool must not pass as int"
    assert not validate_positive_int(2.0, "trials")[0]


def test_dimensions_require_enough_antennas():
    assert validate_dimensions(4, 4)[0]
    ok, msg = validate_dimensions(2, 3)
    assert not ok and "ntx" in msg
    assert not validate_dimensions(0, 1)[0]


def test_eps_must_be_finite_and_non_negative():
    assert validate_eps(0.0)[0]
    assert validate_eps(0.8)[0]
    assert not validate_eps(-0.1)[0]
    assert not validate_eps(math.inf)[0]
    assert not validate_eps("0.1")[0]


def test_snr_list():
    assert validate_snr_list((0.0, 5, 10.0))[0]
    assert not validate_snr_list(())[0]
    assert not validate_snr_list((1.0, math.nan))[0]


def test_methods():
    assert validate_methods(("sca", "zf"))[0]
    assert not validate_methods(())[0]
    ok, msg = validate_methods(("sca", "mrt"))
    assert not ok and "mrt" in msg
    assert not validate_methods(("zf", "zf"))[0]


def test_selection_and_positive_float():
    assert validate_selection_mode("heuristic")[0]
    assert not validate_selection_mode("greedy")[0]
    assert validate_positive_float(1e-7, "solver_tol")[0]
    assert not validate_positive_float(0.0, "solver_tol")[0]
