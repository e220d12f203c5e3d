import numpy as np
import pytest

from beamforming.channel import ChannelSet, sample_channel_set
from beamforming.conic import (
    CONSTRAINT_FAMILIES,
    STATUS_NUMERICAL_FAILURE,
    LinExpr,
    ProgramBuilder,
    SolverResult,
    add_hermitian,
    audit_size,
    build_sca_subproblem,
    constraint_activity,
    dump_program,
    embedded_entries,
    extract_covariances,
    herm_to_real,
    matvec_expr,
    norm_mark_gaps,
    program_size,
    quad_form_expr,
    real_to_herm,
    solve,
)
from beamforming.error_handler import ExtractionError, InvalidDimensionError, NotHermitianError
from beamforming.sca import update_tilde
from beamforming.utils import RngStream, complex_gaussian


def random_hermitian(gen, n, psd=False):
    X = complex_gaussian(gen, (n, n))
    return X @ X.conj().T if psd else 0.5 * (X + X.conj().T)


def evaluate(expr: LinExpr, z: np.ndarray) -> float:
    return sum(coef * z[idx] for idx, coef in expr.terms.items()) + expr.const


def fill_hermitian(z, herm, W):
    n = W.shape[0]
    iu = np.triu_indices(n)
    iu_strict = np.triu_indices(n, k=1)
    z[herm.idx_a[iu]] = W.real[iu]
    z[herm.idx_b[iu_strict]] = W.imag[iu_strict]


# --- Imersão Hermitiana ---


def test_herm_to_real_examples():
    assert np.array_equal(herm_to_real(np.eye(2)), np.eye(4))

    W = np.array([[1, 1j], [-1j, 1]])
    eig = np.linalg.eigvalsh(herm_to_real(W))
    assert np.allclose(eig, [0, 0, 2, 2], atol=1e-12)
    assert np.trace(herm_to_real(W)) == pytest.approx(2 * np.trace(W).real)


def test_herm_to_real_round_trip_and_psd():
    gen = RngStream(1).generator()
    for _ in range(1000):
        n = int(gen.integers(1, 9))
        W = random_hermitian(gen, n)
        M = herm_to_real(W)
        assert np.max(np.abs(real_to_herm(M) - W)) < 1e-14
        w_eig = np.linalg.eigvalsh(W)
        m_eig = np.linalg.eigvalsh(M)
        assert np.allclose(np.sort(np.repeat(w_eig, 2)), m_eig, atol=1e-9)


def test_herm_to_real_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        herm_to_real(np.array([[1.0, 1.0], [0.0, 1.0]]))


# --- Expressões ---


def test_linexpr_arithmetic():
    a = LinExpr.var(0, 2.0) + 1.0
    b = 3 * LinExpr.var(1) - a
    z = np.array([5.0, 7.0])
    assert evaluate(a, z) == 11.0
    assert evaluate(b, z) == 21.0 - 11.0
    assert evaluate(-b + 4, z) == -6.0


def test_embedded_expressions_match_direct_evaluation():
    """quad_form_expr, matvec_expr e embedded_entries reproduzem os valores complexos."""
    gen = RngStream(2).generator()
    n = 3
    builder = ProgramBuilder()
    herm = add_hermitian(builder, "W[0]", n)
    W = random_hermitian(gen, n, psd=True)
    c = complex_gaussian(gen, n)
    z = np.zeros(builder.n_vars)
    fill_hermitian(z, herm, W)

    assert evaluate(quad_form_expr(herm, c), z) == pytest.approx(np.real(c @ W @ c.conj()), abs=1e-10)

    Wc = W @ c.conj()
    values = np.array([evaluate(e, z) for e in matvec_expr(herm, c)])
    assert np.allclose(values, np.concatenate([Wc.real, Wc.imag]), atol=1e-10)

    M = np.array([[evaluate(e, z) for e in row] for row in embedded_entries(herm, n)])
    assert np.allclose(M, herm_to_real(W), atol=1e-12)


def test_builder_rejects_undeclared_variables():
    builder = ProgramBuilder()
    builder.add_vars("x", (1,))
    builder.nonneg(("bad",), LinExpr.var(4))
    with pytest.raises(InvalidDimensionError):
        builder.build()


# --- Subproblema ---


@pytest.mark.parametrize("n_tx,k_pairs", [(1, 1), (2, 1), (4, 2), (3, 3)])
def test_subproblem_size_matches_formula(n_tx, k_pairs):
    cs = sample_channel_set(n_tx, k_pairs, 0.1, 1.0, 1.0, RngStream(3))
    prog = build_sca_subproblem(cs, 1.0, np.zeros(k_pairs), np.zeros(k_pairs))
    assert audit_size(prog) == program_size(n_tx, k_pairs)
    for family in CONSTRAINT_FAMILIES:
        for i in range(k_pairs):
            prog.find((family, i))


def test_subproblem_eps_zero_decouples_norm_marks():
    cs = sample_channel_set(3, 2, 0.0, 1.0, 1.0, RngStream(4))
    prog = build_sca_subproblem(cs, 1.0, np.zeros(2), np.zeros(2))
    marks = np.concatenate([prog.var_map["t"].ravel(), prog.var_map["u"].ravel()])
    for cone in prog.cones("nonneg"):
        assert not np.any(cone.A.toarray()[:, marks]), f"{cone.label} still uses norm marks"


def test_subproblem_rejects_bad_tildes():
    cs = sample_channel_set(2, 1, 0.1, 1.0, 1.0, RngStream(5))
    with pytest.raises(InvalidDimensionError):
        build_sca_subproblem(cs, 1.0, np.zeros(2), np.zeros(1))
    with pytest.raises(InvalidDimensionError):
        build_sca_subproblem(cs, 1.0, np.array([np.inf]), np.zeros(1))


def test_dump_program_writes_sparse_text(tmp_path):
    cs = sample_channel_set(2, 1, 0.1, 1.0, 1.0, RngStream(6))
    prog = build_sca_subproblem(cs, 1.0, np.zeros(1), np.zeros(1))
    path = dump_program(prog, tmp_path / "prog.txt")
    lines = path.read_text(encoding="utf-8").splitlines()

    assert lines[0].startswith(f"# conic program: {prog.n_vars} variables")
    assert sum(1 for line in lines if line.startswith("# cone ")) == len(prog.constraints)
    assert any(line.startswith("obj ") for line in lines)
    assert any(" -1 " in line for line in lines), "Constant terms should use var-id -1"


def test_extract_requires_optimal_status():
    cs = sample_channel_set(2, 1, 0.1, 1.0, 1.0, RngStream(7))
    prog = build_sca_subproblem(cs, 1.0, np.zeros(1), np.zeros(1))
    failed = SolverResult(STATUS_NUMERICAL_FAILURE, np.zeros(prog.n_vars), 0.0, 1.0, 0)
    with pytest.raises(ExtractionError):
        extract_covariances(prog, failed, cs)


def _optimal_with_diagonal(prog, value):
    z = np.zeros(prog.n_vars)
    idx_a = prog.var_map["W[0].idx_a"]
    z[np.diag(idx_a)] = value
    return SolverResult("optimal", z, 0.0, 0.0, 1)


def test_extract_clips_solver_noise_eigenvalues():
    cs = sample_channel_set(2, 1, 0.1, 1.0, 1.0, RngStream(7))
    prog = build_sca_subproblem(cs, 1.0, np.zeros(1), np.zeros(1))
    W, *_ = extract_covariances(prog, _optimal_with_diagonal(prog, -5e-8), cs)
    assert np.linalg.eigvalsh(W.W[0])[0] >= 0.0
    assert np.allclose(W.W[0], 0.0)


def test_extract_rejects_clearly_indefinite_covariance():
    cs = sample_channel_set(2, 1, 0.1, 1.0, 1.0, RngStream(7))
    prog = build_sca_subproblem(cs, 1.0, np.zeros(1), np.zeros(1))
    with pytest.raises(ExtractionError):
        extract_covariances(prog, _optimal_with_diagonal(prog, -1e-3), cs)


# --- Solver ---


def test_solve_lp_sanity():
    builder = ProgramBuilder()
    x = builder.add_vars("x", (1,))
    builder.nonneg(("cap",), 3.0 - LinExpr.var(x[0]))
    builder.maximize(LinExpr.var(x[0]))
    result = solve(builder.build())
    assert result.is_optimal
    assert result.primal[x[0]] == pytest.approx(3.0, abs=1e-6)


def test_solve_exp_cone_epigraph():
    builder = ProgramBuilder()
    x = builder.add_vars("x", (1,))
    s = builder.add_vars("s", (1,))
    builder.exp(("exp",), LinExpr.var(x[0]), LinExpr.constant(1.0), LinExpr.var(s[0]))
    builder.nonneg(("cap",), 5.0 - LinExpr.var(s[0]))
    builder.maximize(LinExpr.var(x[0]))
    result = solve(builder.build())
    assert result.is_optimal
    assert result.objective_value == pytest.approx(np.log(5.0), abs=1e-5)


def test_solve_psd_correlation_bound():
    builder = ProgramBuilder()
    v = builder.add_vars("v", (1,))
    one = LinExpr.constant(1.0)
    builder.psd(("psd",), [[one, LinExpr.var(v[0])], [LinExpr.var(v[0]), one]])
    builder.maximize(LinExpr.var(v[0]))
    result = solve(builder.build())
    assert result.is_optimal
    assert result.primal[v[0]] == pytest.approx(1.0, abs=1e-5)


def test_separable_instance_optimum():
    """Toda a potência no usuário, nada no espião: objetivo ln 2."""
    cs = ChannelSet(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]), 0.0, 1.0, 1.0)
    prog = build_sca_subproblem(cs, 1.0, np.zeros(1), np.zeros(1))
    result = solve(prog)
    assert result.is_optimal
    assert result.objective_value == pytest.approx(np.log(2.0), abs=1e-5)

    W, x, y, p, q = extract_covariances(prog, result, cs)
    assert np.allclose(W.W[0], np.diag([1.0, 0.0]), atol=1e-4)
    assert W.total_power <= 1.0 + 1e-6
    assert x[0] == pytest.approx(np.log(2.0), abs=1e-5)
    assert q[0] == pytest.approx(0.0, abs=1e-5)


def test_random_subproblem_is_tight_at_optimum():
    gen = RngStream(8).generator()
    cs = sample_channel_set(4, 2, 0.05, 1.0, 1.0, gen)
    w = complex_gaussian(gen, (2, 4))
    w *= np.sqrt(10.0 / np.sum(np.abs(w) ** 2))
    y_tilde, p_tilde = update_tilde(np.einsum("ka,kb->kab", w, w.conj()), cs)

    prog = build_sca_subproblem(cs, 10.0, y_tilde, p_tilde)
    result = solve(prog)
    assert result.is_optimal
    activity = constraint_activity(prog, result.primal)
    for family, gap in activity.items():
        assert gap <= 1e-5, f"Family {family} not tight at optimum (gap {gap:.2e})"
    assert norm_mark_gaps(prog, result.primal) <= 1e-5

    W, *_ = extract_covariances(prog, result, cs)
    assert W.total_power <= 10.0 + 1e-6


def test_subproblem_objective_permutation_invariant():
    gen = RngStream(9).generator()
    cs = sample_channel_set(3, 2, 0.05, [1.0, 2.0], 1.0, gen)
    y_tilde, p_tilde = np.array([0.4, 1.1]), np.array([0.9, 0.2])
    base = solve(build_sca_subproblem(cs, 5.0, y_tilde, p_tilde))
    swapped = solve(build_sca_subproblem(cs.permuted([1, 0]), 5.0, y_tilde[::-1], p_tilde[::-1]))
    assert base.is_optimal and swapped.is_optimal
    assert base.objective_value == pytest.approx(swapped.objective_value, abs=1e-5)
