# -*- coding: utf-8 -*-
"""
Módulo Zero-Forcing (beamforming/zf.py).

Responsabilidade:
1. Direções ZF pela pseudo-inversa de H̄ = [h̄_1* … h̄_K* ḡ_1* … ḡ_K*],
   anulando todos os espiões e a interferência entre usuários.
2. Alocação de potência por water-filling (KKT fechado), com bisseção no nível d'água.
3. Oráculo cônico da mesma alocação (somente para conferência).
4. Seleção de usuários quando N_t < 2K (exaustiva ou por razão de contraste).
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from beamforming.channel import ChannelSet
from beamforming.config_bf import PINV_RCOND, SOLVER_TOL, WATERFILL_TOL
from beamforming.conic import LinExpr, ProgramBuilder, lin_sum, solve
from beamforming.error_handler import InvalidDimensionError, RankDeficientError, SolverError
from beamforming.rates import BeamformerSet
from beamforming.utils import get_module_logger

logger = get_module_logger("zf")

SelectionMode = Literal["exhaustive", "heuristic"]


@dataclass(frozen=True, eq=False)
class ZfDirections:
    """
    v[j]: linha j da pseudo-inversa (usuário selected[j]), com vᵀh̄* = δ e vᵀḡ* = 0.
    O feixe usa o conjugado: w = v*/‖v‖·√P.
    """

    v: np.ndarray
    v_norm: np.ndarray
    selected: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    P: np.ndarray
    lam: float
    active: np.ndarray
    no_eligible: bool = False

    @property
    def water_level(self) -> float:
        return 0.0 if self.no_eligible else 1.0 / self.lam


@dataclass(frozen=True, eq=False)
class ZfDesign:
    """Resultado completo: feixes dos pares atendidos e o valor do objetivo reduzido."""

    directions: ZfDirections
    allocation: PowerAllocation
    beamformers: BeamformerSet
    value: float

    @property
    def selected(self) -> Tuple[int, ...]:
        return self.directions.selected


# --- Direções ---


def stacked_channels(cs: ChannelSet, subset: Sequence[int]) -> np.ndarray:
    """N_t × 2|S|: colunas h̄_i* dos selecionados seguidas das colunas ḡ_i*."""
    subset = list(subset)
    return np.concatenate([cs.h_est[subset].conj().T, cs.g_est[subset].conj().T], axis=1)


def zf_directions(cs: ChannelSet, subset: Optional[Sequence[int]] = None) -> ZfDirections:
    """
    Raises:
        InvalidDimensionError: N_t < 2|subset| ou subset vazio.
        RankDeficientError: menor valor singular < 1e-10 · maior.
    """
    subset = tuple(range(cs.k_pairs)) if subset is None else tuple(int(i) for i in subset)
    if not subset:
        raise InvalidDimensionError("Conjunto de usuários vazio.")
    if cs.n_tx < 2 * len(subset):
        raise InvalidDimensionError(
            f"ZF exige N_t ≥ 2|S| (N_t={cs.n_tx}, |S|={len(subset)})."
        )

    H = stacked_channels(cs, subset)
    sv = np.linalg.svd(H, compute_uv=False)
    if sv[-1] < PINV_RCOND * sv[0]:
        raise RankDeficientError(
            f"Canais empilhados sem posto completo para {subset} "
            f"(σ_min/σ_max = {sv[-1] / sv[0]:.2e})."
        )
    pinv = np.linalg.pinv(H, rcond=PINV_RCOND)
    v = pinv[: len(subset)]
    return ZfDirections(v=v, v_norm=np.linalg.norm(v, axis=1), selected=subset)


def nulling_residual(dirs: ZfDirections, cs: ChannelSet) -> float:
    """max |vᵀH̄ − [I 0]| sobre os selecionados."""
    H = stacked_channels(cs, dirs.selected)
    m = len(dirs.selected)
    target = np.concatenate([np.eye(m), np.zeros((m, m))], axis=1)
    return float(np.max(np.abs(dirs.v @ H - target)))


# --- Potência ---


def _gain_floors(dirs: ZfDirections, cs: ChannelSet) -> Tuple[np.ndarray, np.ndarray]:
    """
    c_i = ‖v_i‖²σ_i² / (1 − 2ε‖v_i‖) e máscara de elegibilidade (1 − 2ε‖v_i‖ > 0).
    Usuários inelegíveis recebem c_i = inf.
    """
    sigma2 = cs.sigma2[list(dirs.selected)]
    margin = 1.0 - 2.0 * cs.eps * dirs.v_norm
    eligible = margin > 0
    c = np.full(len(dirs.selected), np.inf)
    c[eligible] = dirs.v_norm[eligible] ** 2 * sigma2[eligible] / margin[eligible]
    return c, eligible


def waterfill(dirs: ZfDirections, cs: ChannelSet, P: float) -> PowerAllocation:
    """
    P_i = (μ − c_i)⁺ com Σ P_i = P; μ = 1/λ é o nível d'água.

    Bisseção em μ sobre o resíduo monótono Σ(μ − c_i)⁺ − P até 1e-10·P,
    seguida do fechamento exato μ = (P + Σ_ativos c_i)/|ativos|.
    """
    if P <= 0:
        raise InvalidDimensionError(f"Orçamento de potência deve ser > 0 (recebeu {P}).")
    c, eligible = _gain_floors(dirs, cs)
    m = len(c)
    if not np.any(eligible):
        logger.debug("Water-filling sem usuário elegível (1 − 2ε‖v‖ ≤ 0 para todos).")
        return PowerAllocation(np.zeros(m), float("inf"), np.zeros(m, dtype=bool), no_eligible=True)

    ce = c[eligible]

    def residual(mu: float) -> float:
        return float(np.maximum(mu - ce, 0.0).sum() - P)

    lo, hi = float(ce.min()), float(ce.max() + P)
    while hi - lo > WATERFILL_TOL * max(P, hi):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0:
            hi = mid
        else:
            lo = mid
        if abs(residual(mid)) <= WATERFILL_TOL * P:
            lo = hi = mid
            break

    mu = 0.5 * (lo + hi)
    active = eligible & (c < mu)
    if not active.any():
        active = eligible & (c == ce.min())
    for _ in range(m + 1):
        mu = (P + c[active].sum()) / active.sum()
        refined = eligible & (c < mu)
        if np.array_equal(refined, active):
            break
        active = refined if refined.any() else active

    powers = np.where(active, np.maximum(mu - c, 0.0), 0.0)
    return PowerAllocation(P=powers, lam=1.0 / mu, active=active)


def kkt_violation(dirs: ZfDirections, cs: ChannelSet, alloc: PowerAllocation, P: float) -> float:
    """
    Maior violação das condições de KKT do water-filling:
    ativos com μ − c_i = P_i, inativos com μ ≤ c_i, ΣP_i = P e P_i = 0 para inelegíveis.
    """
    c, eligible = _gain_floors(dirs, cs)
    if np.any(alloc.P < 0):
        return float(-alloc.P.min())
    forced = float(np.max(np.abs(alloc.P[~eligible]), initial=0.0))
    if alloc.no_eligible:
        return max(forced, float(np.abs(alloc.P).sum()))
    mu = alloc.water_level
    active = alloc.active
    active_gap = float(np.max(np.abs(mu - c[active] - alloc.P[active]), initial=0.0))
    inactive_gap = float(np.max(np.maximum(mu - c[~active], 0.0), initial=0.0))
    budget_gap = abs(float(alloc.P.sum()) - P) / max(P, 1.0)
    return max(forced, active_gap, inactive_gap, budget_gap)


def zf_ssr(dirs: ZfDirections, alloc: PowerAllocation, cs: ChannelSet) -> float:
    """Σ_i log2(1 + (1 − 2ε‖v_i‖)P_i/(‖v_i‖²σ_i²)), em bits."""
    sigma2 = cs.sigma2[list(dirs.selected)]
    margin = np.maximum(1.0 - 2.0 * cs.eps * dirs.v_norm, 0.0)
    snr = margin * alloc.P / (dirs.v_norm**2 * sigma2)
    return float(np.log2(1.0 + snr).sum())


def waterfill_convex_oracle(dirs: ZfDirections, cs: ChannelSet, P: float, tol: float = SOLVER_TOL) -> PowerAllocation:
    """
    Mesma alocação resolvida pelo módulo cônico:
    max Σ z_i  s.a.  (z_i, 1, 1 + P_i/c_i) ∈ K_exp, P_i ≥ 0, ΣP_i ≤ P.

    Raises:
        SolverError: se o solver não chegar ao ótimo.
    """
    c, eligible = _gain_floors(dirs, cs)
    m = len(c)
    if not np.any(eligible):
        return PowerAllocation(np.zeros(m), float("inf"), np.zeros(m, dtype=bool), no_eligible=True)

    users = np.flatnonzero(eligible)
    builder = ProgramBuilder()
    powers = builder.add_vars("P", (len(users),))
    z = builder.add_vars("z", (len(users),))
    for j, i in enumerate(users):
        builder.nonneg(("power_floor", int(i)), LinExpr.var(powers[j]))
        builder.exp(
            ("log_term", int(i)),
            LinExpr.var(z[j]),
            LinExpr.constant(1.0),
            LinExpr.var(powers[j], 1.0 / c[i]) + 1.0,
        )
    builder.nonneg(("power",), P - lin_sum(LinExpr.var(idx) for idx in powers))
    builder.maximize(lin_sum(LinExpr.var(idx) for idx in z))
    prog = builder.build()

    result = solve(prog, tol=tol)
    if not result.is_optimal:
        raise SolverError("Oráculo do water-filling não convergiu.", status=result.status)

    alloc = np.zeros(m)
    alloc[users] = np.maximum(result.primal[powers], 0.0)
    active = alloc > 1e-6 * P
    mu = float(np.mean(alloc[active] + c[active])) if active.any() else float("inf")
    return PowerAllocation(P=alloc, lam=1.0 / mu, active=active)


# --- Seleção e montagem ---


def zf_beamformers(dirs: ZfDirections, alloc: PowerAllocation, P: float) -> BeamformerSet:
    """w_j = v_j*/‖v_j‖·√P_j para os usuários selecionados (ordem de `selected`)."""
    w = dirs.v.conj() / dirs.v_norm[:, None] * np.sqrt(alloc.P)[:, None]
    total = float(np.sum(np.abs(w) ** 2))
    if total > P:
        w = w * np.sqrt(P / total)
    return BeamformerSet(w, P)


def _evaluate_subset(cs: ChannelSet, P: float, subset: Sequence[int]) -> Tuple[ZfDirections, PowerAllocation, float]:
    dirs = zf_directions(cs, subset)
    alloc = waterfill(dirs, cs, P)
    return dirs, alloc, zf_ssr(dirs, alloc, cs)


def contrast_ratios(cs: ChannelSet) -> np.ndarray:
    """u_i = ‖h̄_i‖²/‖ḡ_i‖² sobre os canais estimados."""
    return np.linalg.norm(cs.h_est, axis=1) ** 2 / np.linalg.norm(cs.g_est, axis=1) ** 2


def select_users(cs: ChannelSet, P: float, mode: SelectionMode = "exhaustive") -> Tuple[Tuple[int, ...], float]:
    """
    Escolhe K̂ = floor(N_t/2) pares para o ZF.

    exhaustive: avalia todos os C(K, K̂) subconjuntos (empate → menor lexicográfico);
                subconjuntos sem posto completo valem −inf.
    heuristic:  ordena por u_i decrescente e toma os K̂ primeiros, trocando o último
                escolhido pelo próximo da fila enquanto o conjunto não tiver posto completo.

    Raises:
        InvalidDimensionError: K̂ < 1 ou modo desconhecido.
        RankDeficientError: nenhum subconjunto viável.
    """
    k_hat = min(cs.n_tx // 2, cs.k_pairs)
    if k_hat < 1:
        raise InvalidDimensionError(f"Seleção exige N_t ≥ 2 (N_t={cs.n_tx}).")

    if mode == "exhaustive":
        best_subset, best_value = None, -np.inf
        for subset in combinations(range(cs.k_pairs), k_hat):
            try:
                _, _, value = _evaluate_subset(cs, P, subset)
            except RankDeficientError:
                logger.debug(f"Subconjunto {subset} sem posto completo; ignorado.")
                continue
            if value > best_value:
                best_subset, best_value = subset, value
        if best_subset is None:
            raise RankDeficientError("Nenhum subconjunto de usuários com posto completo.")
        return best_subset, float(best_value)

    if mode == "heuristic":
        ranking = [int(i) for i in np.argsort(-contrast_ratios(cs), kind="stable")]
        chosen = ranking[: k_hat - 1]
        for candidate in ranking[k_hat - 1 :]:
            subset = tuple(sorted(chosen + [candidate]))
            try:
                _, _, value = _evaluate_subset(cs, P, subset)
            except RankDeficientError:
                logger.debug(f"Heurística: {subset} sem posto completo, tentando o próximo par.")
                continue
            return subset, float(value)
        raise RankDeficientError("Heurística não encontrou subconjunto com posto completo.")

    raise InvalidDimensionError(f"Modo de seleção desconhecido: {mode!r}")


def zf_design(cs: ChannelSet, P: float, mode: SelectionMode = "exhaustive") -> ZfDesign:
    """
    Projeto ZF completo. Com N_t ≥ 2K atende todos os pares; caso contrário
    seleciona K̂ pares pelo modo pedido.
    """
    if cs.n_tx >= 2 * cs.k_pairs:
        subset = tuple(range(cs.k_pairs))
    else:
        subset, _ = select_users(cs, P, mode)
    dirs, alloc, value = _evaluate_subset(cs, P, subset)
    return ZfDesign(
        directions=dirs,
        allocation=alloc,
        beamformers=zf_beamformers(dirs, alloc, P),
        value=value,
    )
