# -*- coding: utf-8 -*-
"""
Módulo Cônico (beamforming/conic.py).

Responsabilidade:
1. Representação intermediária de programas cônicos independente de solver:
   objetivo linear (maximização) e cones Nonnegative, SecondOrder,
   Exponential e PsdBlock sobre expressões afins de variáveis reais.
2. Imersão Hermitiana complexa → simétrica real: W = A + iB ↦ [[A, −B], [B, A]].
3. Montagem do subproblema convexo de cada iteração SCA.
4. Resolução via cvxpy (Clarabel por padrão, SCS como alternativa) e
   extração das covariâncias com piso de autovalores.

Convenções fixas:
- Cone exponencial (a, b, c): c ≥ b·e^{a/b}, b > 0; aqui b é sempre a constante 1.
- PsdBlock guarda a matriz em ordem row-major (linha i·d + j ↔ entrada (i, j)).
- O fator log2(e) do objetivo não entra no solver; é reaplicado ao reportar bits.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import cvxpy as cp
import numpy as np
import scipy.sparse as sp

from beamforming.channel import ChannelSet
from beamforming.config_bf import (
    EIGEN_FLOOR,
    EXTRACTION_RESIDUAL_TOL,
    HERMITIAN_TOL,
    SOLVER_FALLBACKS,
    SOLVER_NAME,
    SOLVER_TOL,
    SOLVER_TOL_OPTIONS,
)
from beamforming.error_handler import ExtractionError, InvalidDimensionError, NotHermitianError
from beamforming.rates import CovarianceSet
from beamforming.utils import get_module_logger

logger = get_module_logger("conic")

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_NUMERICAL_FAILURE = "numerical-failure"

# Famílias de restrições do subproblema SCA (rótulo → sentido da folga)
SIGNAL_FLOOR = "signal_floor"  # Σ_k lb(h̄_i, W_k) + σ_i² ≥ s_i ≥ e^{x_i}
EAVES_FLOOR = "eaves_floor"  # Σ_{k≠i} lb(ḡ_i, W_k) + ς_i² ≥ r_i ≥ e^{q_i}
USER_CAP = "user_cap"  # Σ_{k≠i} ub(h̄_i, W_k) + σ_i² ≤ e^{ỹ_i}(y_i − ỹ_i + 1)
EAVES_CAP = "eaves_cap"  # Σ_k ub(ḡ_i, W_k) + ς_i² ≤ e^{p̃_i}(p_i − p̃_i + 1)
CONSTRAINT_FAMILIES = (SIGNAL_FLOOR, EAVES_FLOOR, USER_CAP, EAVES_CAP)


# ----------------------------------------------------------------------
# Imersão Hermitiana
# ----------------------------------------------------------------------


def herm_to_real(W: np.ndarray) -> np.ndarray:
    """
    W = A + iB (n×n Hermitiana) ↦ [[A, −B], [B, A]] (2n×2n simétrica real).

    O resultado é PSD sse W é PSD; cada autovalor de W aparece duas vezes.

    Raises:
        NotHermitianError: se ‖W − Wᴴ‖ > 1e-9.
    """
    W = np.asarray(W, dtype=complex)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise InvalidDimensionError(f"Matriz quadrada esperada (recebeu {W.shape}).")
    if np.linalg.norm(W - W.conj().T) > HERMITIAN_TOL:
        raise NotHermitianError("Matriz não é Hermitiana (‖W − Wᴴ‖ > 1e-9).")
    A, B = W.real, W.imag
    return np.block([[A, -B], [B, A]])


def real_to_herm(M: np.ndarray) -> np.ndarray:
    """Inversa de herm_to_real: lê os blocos A (superior esquerdo) e B (inferior esquerdo)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0] // 2
    if M.shape != (2 * n, 2 * n):
        raise InvalidDimensionError(f"Matriz 2n×2n esperada (recebeu {M.shape}).")
    return M[:n, :n] + 1j * M[n:, :n]


# ----------------------------------------------------------------------
# Expressões afins
# ----------------------------------------------------------------------


class LinExpr:
    """Expressão afim esparsa: Σ coef·z[var] + const."""

    __slots__ = ("terms", "const")

    def __init__(self, terms: Optional[Dict[int, float]] = None, const: float = 0.0):
        self.terms: Dict[int, float] = dict(terms or {})
        self.const = float(const)

    @classmethod
    def var(cls, index: int, coef: float = 1.0) -> "LinExpr":
        return cls({int(index): float(coef)})

    @classmethod
    def constant(cls, value: float) -> "LinExpr":
        return cls(None, value)

    def add_term(self, index: int, coef: float) -> "LinExpr":
        if coef != 0.0:
            self.terms[int(index)] = self.terms.get(int(index), 0.0) + float(coef)
        return self

    def __add__(self, other) -> "LinExpr":
        out = LinExpr(self.terms, self.const)
        if isinstance(other, LinExpr):
            for idx, coef in other.terms.items():
                out.add_term(idx, coef)
            out.const += other.const
        else:
            out.const += float(other)
        return out

    __radd__ = __add__

    def __neg__(self) -> "LinExpr":
        return LinExpr({i: -c for i, c in self.terms.items()}, -self.const)

    def __sub__(self, other) -> "LinExpr":
        return self + (-other if isinstance(other, LinExpr) else -float(other))

    def __rsub__(self, other) -> "LinExpr":
        return (-self) + other

    def __mul__(self, scalar) -> "LinExpr":
        scalar = float(scalar)
        return LinExpr({i: c * scalar for i, c in self.terms.items()}, self.const * scalar)

    __rmul__ = __mul__

    def references(self) -> Iterable[int]:
        return self.terms.keys()


def lin_sum(exprs: Iterable[LinExpr]) -> LinExpr:
    total = LinExpr()
    for expr in exprs:
        total = total + expr
    return total


# ----------------------------------------------------------------------
# Cones
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cone:
    """
    Pertinência de um vetor afim (A z + b) a um cone.
    `label` identifica a restrição (ex: ('signal_floor', 0)).
    """

    label: Tuple
    A: sp.csr_matrix
    b: np.ndarray

    kind = "cone"

    @property
    def rows(self) -> int:
        return self.A.shape[0]

    def values(self, z: np.ndarray) -> np.ndarray:
        return self.A @ z + self.b

    def residual(self, z: np.ndarray) -> float:
        raise NotImplementedError


class Nonnegative(Cone):
    kind = "nonneg"

    def residual(self, z):
        v = self.values(z)
        scale = 1.0 + abs(self.A) @ np.abs(z) + np.abs(self.b)
        return float(np.max(np.maximum(-v, 0.0) / scale, initial=0.0))


class SecondOrder(Cone):
    kind = "soc"

    def residual(self, z):
        v = self.values(z)
        head, tail = v[0], v[1:]
        return float(max(np.linalg.norm(tail) - head, 0.0) / (1.0 + abs(head)))


class Exponential(Cone):
    kind = "exp"

    def residual(self, z):
        a, b, c = self.values(z)
        if b <= 0:
            return float("inf")
        bound = b * np.exp(min(a / b, 700.0))
        return float(max(bound - c, 0.0) / (1.0 + abs(c)))


@dataclass(frozen=True, eq=False)
class PsdBlock(Cone):
    dim: int = 0

    kind = "psd"

    def matrix(self, z: np.ndarray) -> np.ndarray:
        M = self.values(z).reshape(self.dim, self.dim)
        return 0.5 * (M + M.T)

    def residual(self, z):
        M = self.matrix(z)
        min_eig = float(np.linalg.eigvalsh(M)[0])
        return float(max(-min_eig, 0.0) / (1.0 + np.max(np.abs(M), initial=0.0)))


def _compile(exprs: Sequence[LinExpr], n_vars: int) -> Tuple[sp.csr_matrix, np.ndarray]:
    rows, cols, data = [], [], []
    for r, expr in enumerate(exprs):
        for idx, coef in expr.terms.items():
            if coef != 0.0:
                rows.append(r)
                cols.append(idx)
                data.append(coef)
    A = sp.csr_matrix((data, (rows, cols)), shape=(len(exprs), n_vars))
    b = np.array([expr.const for expr in exprs], dtype=float)
    return A, b


# ----------------------------------------------------------------------
# Programa e construtor
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConicProgram:
    """
    maximize cᵀz  s.a.  cada cone em `constraints`.
    `var_map` associa nomes a arrays de índices de variáveis (para extração).
    """

    n_vars: int
    objective: np.ndarray
    constraints: Tuple[Cone, ...]
    var_map: Dict[str, np.ndarray] = field(default_factory=dict)

    def cones(self, kind: str) -> List[Cone]:
        return [c for c in self.constraints if c.kind == kind]

    def find(self, label: Tuple) -> Cone:
        for cone in self.constraints:
            if cone.label == label:
                return cone
        raise KeyError(f"Restrição {label} inexistente.")

    def max_residual(self, z: np.ndarray) -> float:
        return max((cone.residual(z) for cone in self.constraints), default=0.0)


class ProgramBuilder:
    """Acumula variáveis, cones e objetivo; `build()` congela em ConicProgram."""

    def __init__(self):
        self.n_vars = 0
        self.var_map: Dict[str, np.ndarray] = {}
        self._cones: List[Tuple[type, Tuple, List[LinExpr], dict]] = []
        self._objective = LinExpr()

    def add_vars(self, name: str, shape=()) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 1
        idx = np.arange(self.n_vars, self.n_vars + count).reshape(shape)
        self.n_vars += count
        self.var_map[name] = idx
        return idx

    def nonneg(self, label, expr: LinExpr):
        self._cones.append((Nonnegative, label, [expr], {}))

    def soc(self, label, head: LinExpr, tail: Sequence[LinExpr]):
        self._cones.append((SecondOrder, label, [head, *tail], {}))

    def exp(self, label, a: LinExpr, b: LinExpr, c: LinExpr):
        self._cones.append((Exponential, label, [a, b, c], {}))

    def psd(self, label, entries: Sequence[Sequence[LinExpr]]):
        dim = len(entries)
        flat = [entries[i][j] for i in range(dim) for j in range(dim)]
        self._cones.append((PsdBlock, label, flat, {"dim": dim}))

    def maximize(self, expr: LinExpr):
        self._objective = expr

    def build(self) -> ConicProgram:
        constraints = []
        for cls, label, exprs, extra in self._cones:
            for expr in exprs:
                bad = [i for i in expr.references() if not 0 <= i < self.n_vars]
                if bad:
                    raise InvalidDimensionError(f"Restrição {label} referencia variáveis {bad}.")
            A, b = _compile(exprs, self.n_vars)
            constraints.append(cls(label, A, b, **extra))
        objective = np.zeros(self.n_vars)
        for idx, coef in self._objective.terms.items():
            objective[idx] += coef
        return ConicProgram(self.n_vars, objective, tuple(constraints), dict(self.var_map))


# ----------------------------------------------------------------------
# Variáveis Hermitianas imersas
# ----------------------------------------------------------------------


class HermitianVars(NamedTuple):
    """Índices das partes real (A, simétrica) e imaginária (B, antissimétrica) de W."""

    idx_a: np.ndarray  # n×n, idx_a[a,b] == idx_a[b,a]
    idx_b: np.ndarray  # n×n, −1 na diagonal
    sign_b: np.ndarray  # +1 acima da diagonal, −1 abaixo, 0 na diagonal

    def a(self, r: int, c: int) -> LinExpr:
        return LinExpr.var(self.idx_a[r, c])

    def b(self, r: int, c: int) -> LinExpr:
        if r == c:
            return LinExpr()
        return LinExpr.var(self.idx_b[r, c], self.sign_b[r, c])


def add_hermitian(builder: ProgramBuilder, name: str, n: int) -> HermitianVars:
    iu = np.triu_indices(n)
    iu_strict = np.triu_indices(n, k=1)
    a_flat = builder.add_vars(f"{name}.re", (len(iu[0]),))
    b_flat = builder.add_vars(f"{name}.im", (len(iu_strict[0]),))

    idx_a = np.zeros((n, n), dtype=int)
    idx_a[iu] = a_flat
    idx_a.T[iu] = a_flat

    idx_b = -np.ones((n, n), dtype=int)
    sign_b = np.zeros((n, n))
    idx_b[iu_strict] = b_flat
    idx_b.T[iu_strict] = b_flat
    sign_b[iu_strict] = 1.0
    sign_b.T[iu_strict] = -1.0

    herm = HermitianVars(idx_a, idx_b, sign_b)
    builder.var_map[f"{name}.idx_a"] = idx_a
    builder.var_map[f"{name}.idx_b"] = idx_b
    return herm


def quad_form_expr(herm: HermitianVars, c: np.ndarray) -> LinExpr:
    """cᵀ W c* como funcional real linear: Σ Re(C)⊙A − Im(C)⊙B, C = c cᴴ."""
    C = np.outer(c, c.conj())
    n = len(c)
    expr = LinExpr()
    for r in range(n):
        for s in range(n):
            expr.add_term(herm.idx_a[r, s], C[r, s].real)
            if r != s:
                expr.add_term(herm.idx_b[r, s], -C[r, s].imag * herm.sign_b[r, s])
    return expr


def matvec_expr(herm: HermitianVars, c: np.ndarray) -> List[LinExpr]:
    """Partes real e imaginária empilhadas de W c* (2n expressões)."""
    cr, ci = c.real, c.imag
    n = len(c)
    re_rows, im_rows = [], []
    for r in range(n):
        re_part, im_part = LinExpr(), LinExpr()
        for s in range(n):
            re_part.add_term(herm.idx_a[r, s], cr[s])
            im_part.add_term(herm.idx_a[r, s], -ci[s])
            if r != s:
                re_part.add_term(herm.idx_b[r, s], ci[s] * herm.sign_b[r, s])
                im_part.add_term(herm.idx_b[r, s], cr[s] * herm.sign_b[r, s])
        re_rows.append(re_part)
        im_rows.append(im_part)
    return re_rows + im_rows


def embedded_entries(herm: HermitianVars, n: int) -> List[List[LinExpr]]:
    """Entradas de [[A, −B], [B, A]] como expressões afins."""
    M = [[LinExpr() for _ in range(2 * n)] for _ in range(2 * n)]
    for r in range(n):
        for s in range(n):
            M[r][s] = herm.a(r, s)
            M[n + r][n + s] = herm.a(r, s)
            M[r][n + s] = -herm.b(r, s)
            M[n + r][s] = herm.b(r, s)
    return M


# ----------------------------------------------------------------------
# Subproblema SCA
# ----------------------------------------------------------------------


class ProgramSize(NamedTuple):
    n_vars: int
    n_psd: int
    n_soc: int
    n_exp: int
    n_nonneg: int


def program_size(n_tx: int, k_pairs: int) -> ProgramSize:
    """
    Tamanho esperado do subproblema: W (n² reais por usuário), x y p q s r,
    marcas de norma t e u (K² cada).
    """
    n_vars = k_pairs * n_tx**2 + 6 * k_pairs + 2 * k_pairs**2
    return ProgramSize(
        n_vars=n_vars,
        n_psd=k_pairs,
        n_soc=2 * k_pairs**2,
        n_exp=2 * k_pairs,
        n_nonneg=4 * k_pairs + 1,
    )


def audit_size(prog: ConicProgram) -> ProgramSize:
    """Contagem real de variáveis e cones de um programa montado."""
    return ProgramSize(
        n_vars=prog.n_vars,
        n_psd=len(prog.cones("psd")),
        n_soc=len(prog.cones("soc")),
        n_exp=len(prog.cones("exp")),
        n_nonneg=len(prog.cones("nonneg")),
    )


def build_sca_subproblem(cs: ChannelSet, P: float, y_tilde, p_tilde) -> ConicProgram:
    """
    Subproblema convexo de uma iteração, linearizado em (ỹ, p̃).

    Marcas de norma t_{i,k} ≥ ‖W_k h̄_i*‖ e u_{i,k} ≥ ‖W_k ḡ_i*‖ substituem as
    normas: exato no ótimo nos pisos (coeficiente −2ε) e conservador nos tetos.
    """
    y_tilde = np.asarray(y_tilde, dtype=float)
    p_tilde = np.asarray(p_tilde, dtype=float)
    K, n, eps = cs.k_pairs, cs.n_tx, cs.eps
    if y_tilde.shape != (K,) or p_tilde.shape != (K,):
        raise InvalidDimensionError(f"ỹ e p̃ devem ter comprimento K={K}.")
    if not (np.all(np.isfinite(y_tilde)) and np.all(np.isfinite(p_tilde))):
        raise InvalidDimensionError("ỹ e p̃ devem ser finitos.")

    builder = ProgramBuilder()
    herms = [add_hermitian(builder, f"W[{k}]", n) for k in range(K)]
    x = builder.add_vars("x", (K,))
    y = builder.add_vars("y", (K,))
    p = builder.add_vars("p", (K,))
    q = builder.add_vars("q", (K,))
    s = builder.add_vars("s", (K,))
    r = builder.add_vars("r", (K,))
    t = builder.add_vars("t", (K, K))
    u = builder.add_vars("u", (K, K))

    for k, herm in enumerate(herms):
        builder.psd(("psd", k), embedded_entries(herm, n))

    # Formas quadráticas e marcas de norma
    quad_h = [[quad_form_expr(herms[k], cs.h_est[i]) for k in range(K)] for i in range(K)]
    quad_g = [[quad_form_expr(herms[k], cs.g_est[i]) for k in range(K)] for i in range(K)]
    for i in range(K):
        for k in range(K):
            builder.soc(("norm_t", i, k), LinExpr.var(t[i, k]), matvec_expr(herms[k], cs.h_est[i]))
            builder.soc(("norm_u", i, k), LinExpr.var(u[i, k]), matvec_expr(herms[k], cs.g_est[i]))

    for i in range(K):
        others = [k for k in range(K) if k != i]
        t_i = [LinExpr.var(t[i, k]) for k in range(K)]
        u_i = [LinExpr.var(u[i, k]) for k in range(K)]

        signal = lin_sum(quad_h[i][k] - 2 * eps * t_i[k] for k in range(K)) + cs.sigma2[i]
        builder.nonneg((SIGNAL_FLOOR, i), signal - LinExpr.var(s[i]))

        eaves_interf = lin_sum(quad_g[i][k] - 2 * eps * u_i[k] for k in others) + cs.varsigma2[i]
        builder.nonneg((EAVES_FLOOR, i), eaves_interf - LinExpr.var(r[i]))

        user_interf = lin_sum(quad_h[i][k] + 2 * eps * t_i[k] for k in others) + cs.sigma2[i]
        cap_y = np.exp(y_tilde[i]) * (LinExpr.var(y[i]) + (1.0 - y_tilde[i]))
        builder.nonneg((USER_CAP, i), cap_y - user_interf)

        eaves_sig = lin_sum(quad_g[i][k] + 2 * eps * u_i[k] for k in range(K)) + cs.varsigma2[i]
        cap_p = np.exp(p_tilde[i]) * (LinExpr.var(p[i]) + (1.0 - p_tilde[i]))
        builder.nonneg((EAVES_CAP, i), cap_p - eaves_sig)

        builder.exp(("exp_x", i), LinExpr.var(x[i]), LinExpr.constant(1.0), LinExpr.var(s[i]))
        builder.exp(("exp_q", i), LinExpr.var(q[i]), LinExpr.constant(1.0), LinExpr.var(r[i]))

    trace = lin_sum(herm.a(j, j) for herm in herms for j in range(n))
    builder.nonneg(("power",), P - trace)

    builder.maximize(
        lin_sum(LinExpr.var(x[i]) - LinExpr.var(y[i]) - LinExpr.var(p[i]) + LinExpr.var(q[i]) for i in range(K))
    )
    return builder.build()


# ----------------------------------------------------------------------
# Resolução
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SolverResult:
    status: str
    primal: np.ndarray
    objective_value: float
    max_cone_residual: float
    iterations: int
    solver: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL


def _to_cvxpy(prog: ConicProgram, z: cp.Variable) -> List[cp.Constraint]:
    constraints = []
    nonneg = prog.cones("nonneg")
    if nonneg:
        A = sp.vstack([c.A for c in nonneg]).tocsr()
        b = np.concatenate([c.b for c in nonneg])
        constraints.append(A @ z + b >= 0)

    for cone in prog.cones("soc"):
        expr = cone.A @ z + cone.b
        constraints.append(cp.SOC(expr[0], expr[1:]))

    exp_cones = prog.cones("exp")
    if exp_cones:
        A = sp.vstack([c.A for c in exp_cones]).tocsr()
        b = np.concatenate([c.b for c in exp_cones])
        stacked = A @ z + b
        constraints.append(
            cp.constraints.ExpCone(stacked[0::3], stacked[1::3], stacked[2::3])
        )

    for cone in prog.cones("psd"):
        M = cp.reshape(cone.A @ z + cone.b, (cone.dim, cone.dim), order="C")
        constraints.append(0.5 * (M + M.T) >> 0)
    return constraints


def _solver_options(name: str, tol: float) -> dict:
    return {opt: tol * 0.1 for opt in SOLVER_TOL_OPTIONS.get(name, ())}


def solve(prog: ConicProgram, tol: float = SOLVER_TOL, solver: Optional[str] = None) -> SolverResult:
    """
    Resolve o programa. Nunca propaga falhas do solver: devolve
    SolverResult com status 'numerical-failure' e registra o motivo.

    status 'optimal' implica max_cone_residual ≤ tol (resíduos relativos).
    """
    preferred = (solver or SOLVER_NAME).upper()
    candidates = [preferred] + [s for s in SOLVER_FALLBACKS if s != preferred]
    installed = set(cp.installed_solvers())

    z = cp.Variable(prog.n_vars)
    problem = cp.Problem(cp.Maximize(prog.objective @ z), _to_cvxpy(prog, z))

    last = SolverResult(STATUS_NUMERICAL_FAILURE, np.full(prog.n_vars, np.nan), float("nan"), float("inf"), 0)
    for name in candidates:
        if name not in installed:
            continue
        try:
            problem.solve(solver=name, **_solver_options(name, tol))
        except (cp.error.SolverError, ArithmeticError, ValueError) as e:
            logger.warning(f"Solver {name} falhou: {e}")
            continue

        iterations = int(getattr(problem.solver_stats, "num_iters", 0) or 0)
        if problem.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
            return SolverResult(STATUS_INFEASIBLE, np.full(prog.n_vars, np.nan), float("nan"), float("inf"), iterations, name)
        if problem.status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
            return SolverResult(STATUS_UNBOUNDED, np.full(prog.n_vars, np.nan), float("inf"), float("inf"), iterations, name)
        if z.value is None:
            continue

        primal = np.asarray(z.value, dtype=float)
        residual = prog.max_residual(primal)
        objective_value = float(prog.objective @ primal)
        ok = problem.status in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE) and residual <= tol
        status = STATUS_OPTIMAL if ok else STATUS_NUMERICAL_FAILURE
        last = SolverResult(status, primal, objective_value, residual, iterations, name)
        if ok:
            return last
        logger.debug(f"Solver {name}: status {problem.status}, resíduo {residual:.3e} > {tol:.1e}")

    logger.warning(f"Nenhum solver atingiu o ótimo (resíduo {last.max_cone_residual:.3e}).")
    return last


# ----------------------------------------------------------------------
# Extração e diagnóstico
# ----------------------------------------------------------------------


def _hermitian_from(prog: ConicProgram, name: str, z: np.ndarray) -> np.ndarray:
    idx_a = prog.var_map[f"{name}.idx_a"]
    idx_b = prog.var_map[f"{name}.idx_b"]
    n = idx_a.shape[0]
    A = z[idx_a]
    B = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    B[iu] = z[idx_b[iu]]
    B = B - B.T
    return A + 1j * B


def _floor_psd(W: np.ndarray) -> np.ndarray:
    W = 0.5 * (W + W.conj().T)
    vals, vecs = np.linalg.eigh(W)
    vals = np.maximum(vals, 0.0)
    W = (vecs * vals) @ vecs.conj().T
    return 0.5 * (W + W.conj().T)


def extract_covariances(prog: ConicProgram, result: SolverResult, cs: ChannelSet):
    """
    Recupera (CovarianceSet, x, y, p, q) de uma solução ótima.

    Autovalores negativos dentro de EIGEN_FLOOR·(1 + ‖W‖₂) são zerados.

    Raises:
        ExtractionError: se o status não é ótimo, os resíduos excedem 1e-6 ou
            algum W_i tem autovalor abaixo do piso.
    """
    if not result.is_optimal:
        raise ExtractionError(f"Extração exige solução ótima (status: {result.status}).")
    if result.max_cone_residual > EXTRACTION_RESIDUAL_TOL:
        raise ExtractionError(f"Resíduo de cone {result.max_cone_residual:.3e} acima de 1e-6.")

    z = result.primal
    raw = [_hermitian_from(prog, f"W[{k}]", z) for k in range(cs.k_pairs)]
    floored = []
    for k, W in enumerate(raw):
        eigs = np.linalg.eigvalsh(0.5 * (W + W.conj().T))
        min_eig = float(eigs[0])
        if min_eig < -EIGEN_FLOOR * (1.0 + max(abs(eigs[-1]), abs(min_eig))):
            raise ExtractionError(f"W[{k}] com autovalor {min_eig:.3e} abaixo do piso.")
        floored.append(_floor_psd(W))

    scalars = tuple(z[prog.var_map[name]].copy() for name in ("x", "y", "p", "q"))
    return (CovarianceSet(np.stack(floored)), *scalars)


def constraint_activity(prog: ConicProgram, z: np.ndarray) -> Dict[str, float]:
    """
    Folga máxima de cada família de restrições no ponto z.

    Pisos: |LHS − e^{x_i}| (e análogo com q_i); tetos: |cap − LHS|.
    Valores relativos a (1 + |LHS|).
    """
    activity = {}
    exp_of = {SIGNAL_FLOOR: "x", EAVES_FLOOR: "q"}
    mark_of = {SIGNAL_FLOOR: "s", EAVES_FLOOR: "r"}
    for family in CONSTRAINT_FAMILIES:
        gaps = []
        for cone in prog.constraints:
            if cone.label[0] != family:
                continue
            i = cone.label[1]
            slack = float(cone.values(z)[0])
            if family in exp_of:
                mark = z[prog.var_map[mark_of[family]][i]]
                lhs = slack + mark
                gap = abs(lhs - np.exp(z[prog.var_map[exp_of[family]][i]]))
                gaps.append(gap / (1.0 + abs(lhs)))
            else:
                gaps.append(abs(slack) / (1.0 + abs(slack)))
        activity[family] = max(gaps, default=0.0)
    return activity


def norm_mark_gaps(prog: ConicProgram, z: np.ndarray) -> float:
    """Maior diferença t − ‖W h̄*‖ (ou u − ‖W ḡ*‖) entre todas as marcas."""
    gaps = [0.0]
    for cone in prog.cones("soc"):
        v = cone.values(z)
        gaps.append(abs(v[0] - np.linalg.norm(v[1:])))
    return max(gaps)


def dump_program(prog: ConicProgram, path) -> Path:
    """
    Grava o programa em texto esparso para conferência com ferramentas externas.

    Cabeçalho: diretório de cones (id, tipo, rótulo, linhas globais).
    Corpo: 'constraint-id var-id coeficiente' por não-zero; var-id -1 é a constante;
    'obj var-id coeficiente' para o objetivo.
    """
    path = Path(path)
    lines = [f"# conic program: {prog.n_vars} variables, {len(prog.constraints)} cones"]
    row = 0
    for cid, cone in enumerate(prog.constraints):
        extra = f" dim={cone.dim}" if isinstance(cone, PsdBlock) else ""
        lines.append(f"# cone {cid} {cone.kind} {'/'.join(map(str, cone.label))} rows={row}..{row + cone.rows - 1}{extra}")
        row += cone.rows

    for idx in np.flatnonzero(prog.objective):
        lines.append(f"obj {idx} {prog.objective[idx]:.17g}")

    row = 0
    for cone in prog.constraints:
        coo = cone.A.tocoo()
        for r, c, v in sorted(zip(coo.row, coo.col, coo.data)):
            lines.append(f"{row + r} {c} {v:.17g}")
        for r in np.flatnonzero(cone.b):
            lines.append(f"{row + r} -1 {cone.b[r]:.17g}")
        row += cone.rows

    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug(f"Programa gravado em {path} ({row} linhas de restrição)")
    return path
