import importlib

import pytest

from beamforming.utils import RngStream
from experiments.selftest import check_lower_bound_below_practical, check_waterfill_kkt, check_zf_nulling, selftest

# experiments/__init__ rebinds `experiments.selftest` to the function; fetch the module itself.
selftest_module = importlib.import_module("experiments.selftest")


def only(monkeypatch, *names):
    checks = tuple(c for c in selftest_module.CHECKS if c[0] in names)
    monkeypatch.setattr(selftest_module, "CHECKS", checks)


def test_waterfill_check_passes_without_fault():
    passed, detail = check_waterfill_kkt(RngStream(1), {})
    assert passed, detail


@pytest.mark.parametrize("shortfall, expected", [(1e-8, True), (1e-3, False)])
def test_bound_check_tolerates_relative_rounding(monkeypatch, shortfall, expected):
    monkeypatch.setattr(selftest_module, "ssr_lower_bound", lambda cs, bf: 5.0)
    monkeypatch.setattr(selftest_module, "ssr_exact", lambda *args, **kwargs: 5.0 - shortfall)
    passed, detail = check_lower_bound_below_practical(RngStream(2), {})
    assert passed is expected, detail


def test_corrupted_waterfill_is_reported_by_name(monkeypatch):
    only(monkeypatch, "zf.nulling", "zf.waterfill_kkt")
    report = selftest(fault="waterfill")
    assert not report.passed
    assert report.failed_names == ["zf.waterfill_kkt"]
    failing = [c for c in report.checks if not c.passed][0]
    assert "KKT" in failing.detail


def test_crashing_check_counts_as_failure(monkeypatch):
    def explode(stream, hooks):
        raise ValueError("boom")

    monkeypatch.setattr(selftest_module, "CHECKS", (("zf.nulling", check_zf_nulling), ("demo.crash", explode)))
    report = selftest()
    assert report.failed_names == ["demo.crash"]
    assert "ValueError" in report.checks[1].detail
    assert any(line.startswith("[FALHA] demo.crash") for line in report.summary_lines())


def test_unknown_fault_rejected():
    with pytest.raises(KeyError):
        selftest(fault="sca")


@pytest.mark.slow
def test_fresh_checkout_passes():
    report = selftest()
    assert report.passed, report.summary_lines()
