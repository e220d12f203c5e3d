import numpy as np
import pytest
from scipy.linalg import eigh

import beamforming.sca as sca
from beamforming.channel import sample_channel_set
from beamforming.conic import STATUS_NUMERICAL_FAILURE, SolverResult
from beamforming.error_handler import ConfigError, InitializationError, ScaNumericalError
from beamforming.rates import BeamformerSet, CovarianceSet, ssr_exact, ssr_lower_bound
from beamforming.sca import (
    ScaConfig,
    has_converged,
    init_state,
    is_rank_one,
    randomize_rank_one,
    run_sca,
    sca_step,
    trace_rows,
    update_tilde,
)
from beamforming.utils import RngStream, complex_gaussian

P_10DB = 10.0


def test_config_validation():
    with pytest.raises(ConfigError):
        ScaConfig(max_iter=0)
    with pytest.raises(ConfigError):
        ScaConfig(obj_tol=0.0)
    assert ScaConfig().randomization_samples == 200


def test_stopping_rule_is_relative_above_one_bit():
    assert not has_converged((1.0,), 1e-4)
    assert has_converged((0.5, 0.50005), 1e-4)
    assert not has_converged((0.5, 0.5002), 1e-4)
    assert has_converged((9.0, 9.0005), 1e-4), "9 bits tolerate 9e-4"
    assert not has_converged((9.0, 9.002), 1e-4)


# --- Regra de atualização ---


def test_update_tilde_zero_covariances():
    cs = sample_channel_set(3, 2, 0.1, [0.5, 2.0], [1.5, 3.0], RngStream(1))
    y_tilde, p_tilde = update_tilde(CovarianceSet(np.zeros((2, 3, 3))), cs)
    assert np.allclose(y_tilde, np.log([0.5, 2.0]))
    assert np.allclose(p_tilde, np.log([1.5, 3.0]))


def test_update_tilde_single_user_has_no_interference():
    gen = RngStream(2).generator()
    cs = sample_channel_set(2, 1, 0.2, 1.7, 1.0, gen)
    w = complex_gaussian(gen, (1, 2))
    y_tilde, _ = update_tilde(BeamformerSet(w, 10.0).covariances(), cs)
    assert y_tilde[0] == pytest.approx(np.log(1.7), abs=1e-12)


def test_update_tilde_matches_direct_evaluation():
    gen = RngStream(3).generator()
    cs = sample_channel_set(4, 3, 0.1, 1.0, 1.0, gen)
    W = BeamformerSet(complex_gaussian(gen, (3, 4)), 1e3).covariances()
    y_tilde, p_tilde = update_tilde(W, cs)
    for i in range(3):
        user_cap = cs.sigma2[i]
        eaves_cap = cs.varsigma2[i]
        for k in range(3):
            Wk = W.W[k]
            h, g = cs.h_est[i], cs.g_est[i]
            g_term = np.real(g @ Wk @ g.conj()) + 2 * cs.eps * np.linalg.norm(Wk @ g.conj())
            eaves_cap += g_term
            if k != i:
                user_cap += np.real(h @ Wk @ h.conj()) + 2 * cs.eps * np.linalg.norm(Wk @ h.conj())
        assert np.exp(y_tilde[i]) == pytest.approx(user_cap, rel=1e-12)
        assert np.exp(p_tilde[i]) == pytest.approx(eaves_cap, rel=1e-12)


# --- Recuperação posto-um ---


def test_rank_one_input_is_decomposed_exactly():
    gen = RngStream(4).generator()
    cs = sample_channel_set(4, 2, 0.05, 1.0, 1.0, gen)
    w = complex_gaussian(gen, (2, 4))
    w *= np.sqrt(P_10DB / np.sum(np.abs(w) ** 2))
    Wset = BeamformerSet(w, P_10DB).covariances()
    assert is_rank_one(Wset)

    out = randomize_rank_one(Wset, cs, P_10DB, 200, RngStream(4))
    recovered = out.covariances().W
    assert np.allclose(recovered, Wset.W, atol=1e-9), "Exact branch must reproduce w up to phase"
    assert abs(ssr_lower_bound(cs, out) - ssr_lower_bound(cs, Wset)) < 1e-9


def test_randomization_more_candidates_never_worse():
    gen = RngStream(5).generator()
    cs = sample_channel_set(4, 2, 0.05, 1.0, 1.0, gen)
    W = []
    for _ in range(2):
        X = complex_gaussian(gen, (4, 2))
        W.append(X @ X.conj().T)
    W = np.array(W)
    W *= P_10DB / np.real(np.trace(W, axis1=1, axis2=2)).sum()
    Wset = CovarianceSet(W)
    assert not is_rank_one(Wset)

    one = randomize_rank_one(Wset, cs, P_10DB, 1, RngStream(77))
    many = randomize_rank_one(Wset, cs, P_10DB, 200, RngStream(77))
    assert ssr_lower_bound(cs, many) >= ssr_lower_bound(cs, one) - 1e-12
    assert many.total_power == pytest.approx(P_10DB, rel=1e-9)
    assert one.total_power == pytest.approx(P_10DB, rel=1e-9)


def test_zero_covariances_give_zero_beams():
    cs = sample_channel_set(3, 2, 0.1, 1.0, 1.0, RngStream(6))
    out = randomize_rank_one(CovarianceSet(np.zeros((2, 3, 3))), cs, 1.0, 5, RngStream(6))
    assert out.total_power == 0.0


# --- Iterações (solver) ---


def test_init_state_is_deterministic():
    cs = sample_channel_set(3, 2, 0.0, 1.0, 1.0, RngStream(7))
    a = init_state(cs, P_10DB, ScaConfig(), RngStream(7, 1))
    b = init_state(cs, P_10DB, ScaConfig(), RngStream(7, 1))
    assert a.iteration == 1 and len(a.objective_trace) == 1
    assert np.allclose(a.W_hat.W, b.W_hat.W)
    assert a.objective == b.objective


def test_strict_sign_check_rejects_single_pair_with_small_eaves_noise():
    """Com K=1 o espião não sofre interferência: q̂ ≤ ln ς² < 0 e o teste de sinal sempre rejeita."""
    cs = sample_channel_set(2, 1, 0.0, 1.0, 0.5, RngStream(8))
    cfg = ScaConfig(init_attempts=2, strict_sign_check=True)
    with pytest.raises(InitializationError):
        init_state(cs, P_10DB, cfg, RngStream(8))


def test_step_failure_keeps_last_state(monkeypatch):
    cs = sample_channel_set(3, 2, 0.05, 1.0, 1.0, RngStream(9))
    cfg = ScaConfig()
    state = init_state(cs, P_10DB, cfg, RngStream(9))

    def broken_solve(prog, tol=None):
        return SolverResult(STATUS_NUMERICAL_FAILURE, np.full(prog.n_vars, np.nan), float("nan"), float("inf"), 0)

    monkeypatch.setattr(sca, "solve", broken_solve)
    with pytest.raises(ScaNumericalError) as excinfo:
        sca_step(state, cs, P_10DB, cfg)
    assert excinfo.value.last_state is state


def test_sca_step_is_monotone_and_tilde_chain_holds():
    cs = sample_channel_set(4, 2, 0.1, 1.0, 1.0, RngStream(10))
    cfg = ScaConfig()
    state = init_state(cs, P_10DB, cfg, RngStream(10))
    for _ in range(3):
        previous = state
        state = sca_step(state, cs, P_10DB, cfg)
        assert state.objective >= previous.objective - 1e-6
        assert np.all(state.y_tilde <= state.yhat + 1e-6)
        assert np.all(state.p_tilde <= state.phat + 1e-6)
        assert np.array_equal(state.y_tilde_used, previous.y_tilde)

    rows = trace_rows(state)
    assert [r[0] for r in rows] == [1, 2, 3, 4]
    assert all(res <= cfg.solver_tol for _, _, res in rows)


def test_run_sca_keeps_last_state_on_mid_run_failure(monkeypatch):
    cs = sample_channel_set(3, 2, 0.05, 1.0, 1.0, RngStream(12))
    real_step = sca.sca_step
    calls = []

    def flaky_step(state, cs, P, cfg):
        calls.append(state.iteration)
        if len(calls) == 2:
            raise ScaNumericalError("forced", last_state=state)
        return real_step(state, cs, P, cfg)

    monkeypatch.setattr(sca, "sca_step", flaky_step)
    result = run_sca(cs, P_10DB, ScaConfig(obj_tol=1e-12), RngStream(12, 1))
    assert not result.converged
    assert result.iterations == 2
    assert len(result.trace) == 2
    assert result.beamformers.total_power <= P_10DB * (1 + 1e-9)


@pytest.mark.slow
def test_run_sca_typical_instances():
    """(N_t=4, K=2, ε=0.1, 10 dB), 50 sementes: todas convergem, ≥ 90% em até 15 iterações."""
    cfg = ScaConfig()
    lengths = []
    for seed in range(50):
        cs = sample_channel_set(4, 2, 0.1, 1.0, 1.0, RngStream(seed))
        result = run_sca(cs, P_10DB, cfg, RngStream(seed, 1))
        trace = np.array(result.trace)
        assert np.all(np.diff(trace) >= -1e-6), f"Trace decreased for seed {seed}"
        assert result.converged, f"Seed {seed} stopped after {result.iterations} iterations"
        assert result.beamformers.total_power <= P_10DB * (1 + 1e-9)
        assert result.trace[-1] <= result.relaxation_value + 1e-5
        assert result.lower_bound_value <= result.relaxation_value + 1e-6
        lengths.append(result.iterations)
    assert np.mean(np.array(lengths) <= 15) >= 0.9, f"Iteration counts: {sorted(lengths)}"


@pytest.mark.slow
def test_single_pair_matches_generalized_eigen_oracle():
    """K=1, ε=0: o ótimo é o maior autovalor generalizado de (I + P h*hᵀ, I + P g*gᵀ)."""
    for seed in range(3):
        cs = sample_channel_set(2, 1, 0.0, 1.0, 1.0, RngStream(100 + seed))
        result = run_sca(cs, P_10DB, ScaConfig(), RngStream(100 + seed, 1))

        h, g = cs.h_est[0], cs.g_est[0]
        A = np.eye(2) + P_10DB * np.outer(h.conj(), h)
        B = np.eye(2) + P_10DB * np.outer(g.conj(), g)
        best = np.log2(eigh(A, B, eigvals_only=True)[-1])
        assert abs(ssr_exact(cs, result.beamformers) - best) < 1e-2


@pytest.mark.slow
def test_permuting_pairs_preserves_value():
    cs = sample_channel_set(4, 2, 0.05, 1.0, 1.0, RngStream(11))
    cfg = ScaConfig()
    base = run_sca(cs, P_10DB, cfg, RngStream(11, 1), pair_tags=[0, 1])
    swapped = run_sca(cs.permuted([1, 0]), P_10DB, cfg, RngStream(11, 1), pair_tags=[1, 0])
    assert base.lower_bound_value == pytest.approx(swapped.lower_bound_value, abs=1e-4)
