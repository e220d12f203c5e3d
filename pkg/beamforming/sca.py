# -*- coding: utf-8 -*-
"""
Módulo SCA (beamforming/sca.py).

Responsabilidade:
1. Inicializar a aproximação convexa sucessiva a partir de feixes aleatórios,
   verificando se o primeiro subproblema é aceitável (com novos sorteios se não for).
2. Iterar: montar o subproblema linearizado em (ỹ, p̃), resolver, extrair e
   atualizar (ỹ, p̃) pela regra ln(teto avaliado na solução).
3. Detectar convergência pela variação do objetivo.
4. Recuperar feixes posto-um: decomposição exata quando W_i já é posto-um,
   aleatorização Gaussiana caso contrário.

A sequência de objetivos é não-decrescente: a solução da iteração n continua
viável na iteração n+1 com y_i = ỹ_i[n+1] ≤ ŷ_i[n].
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from beamforming.channel import ChannelSet
from beamforming.config_bf import (
    DEFAULT_INIT_ATTEMPTS,
    DEFAULT_MAX_ITER,
    DEFAULT_OBJ_TOL,
    DEFAULT_RAND_SAMPLES,
    POWER_SLACK,
    RANK_ONE_RATIO,
    SOLVER_TOL,
)
from beamforming.conic import (
    build_sca_subproblem,
    constraint_activity,
    extract_covariances,
    solve,
)
from beamforming.error_handler import (
    BeamformingError,
    ConfigError,
    InitializationError,
    InvalidDimensionError,
    ScaNumericalError,
)
from beamforming.rates import BeamformerSet, CovarianceSet, bound_terms, ssr_lower_bound
from beamforming.utils import RngStream, complex_gaussian, get_module_logger

logger = get_module_logger("sca")

LOG2E = float(np.log2(np.e))
MONOTONE_SLACK = 1e-6


@dataclass(frozen=True)
class ScaConfig:
    max_iter: int = DEFAULT_MAX_ITER
    obj_tol: float = DEFAULT_OBJ_TOL
    init_attempts: int = DEFAULT_INIT_ATTEMPTS
    randomization_samples: int = DEFAULT_RAND_SAMPLES
    strict_sign_check: bool = False
    solver_tol: float = SOLVER_TOL

    def __post_init__(self):
        if self.max_iter < 1 or self.init_attempts < 1 or self.randomization_samples < 1:
            raise ConfigError("max_iter, init_attempts e randomization_samples devem ser ≥ 1.")
        if self.obj_tol <= 0 or self.solver_tol <= 0:
            raise ConfigError("obj_tol e solver_tol devem ser positivos.")


@dataclass(frozen=True, eq=False)
class ScaState:
    """
    Estado após a iteração `iteration`.

    y_tilde/p_tilde: pontos de linearização da PRÓXIMA iteração.
    y_tilde_used/p_tilde_used: pontos que produziram a solução atual.
    """

    iteration: int
    y_tilde: np.ndarray
    p_tilde: np.ndarray
    W_hat: CovarianceSet
    xhat: np.ndarray
    yhat: np.ndarray
    phat: np.ndarray
    qhat: np.ndarray
    y_tilde_used: np.ndarray
    p_tilde_used: np.ndarray
    objective_trace: Tuple[float, ...] = ()
    residual_trace: Tuple[float, ...] = ()
    activity_trace: Tuple[float, ...] = ()

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


@dataclass(frozen=True, eq=False)
class ScaResult:
    covariances: CovarianceSet
    beamformers: BeamformerSet
    trace: Tuple[float, ...]
    relaxation_value: float
    lower_bound_value: float
    iterations: int
    converged: bool
    rank_one: bool
    state: ScaState = field(repr=False, default=None)


# --- Auxiliares ---


def _pair_generators(rng, k_pairs: int, pair_tags: Optional[Sequence[int]] = None):
    """
    Um gerador por par usuário-espião. Com RngStream, cada par tem seu sub-fluxo
    (sorteios acompanham o par quando os índices são permutados).
    """
    tags = list(range(k_pairs)) if pair_tags is None else list(pair_tags)
    if len(tags) != k_pairs:
        raise InvalidDimensionError(f"pair_tags deve ter {k_pairs} elementos.")
    if isinstance(rng, RngStream):
        return [rng.child(tag).generator() for tag in tags]
    if isinstance(rng, np.random.Generator):
        return [rng] * k_pairs
    raise TypeError(f"Gerador aleatório não suportado: {type(rng).__name__}")


def _child(rng, tag: int):
    return rng.child(tag) if isinstance(rng, RngStream) else rng


def _scale_to_budget(w: np.ndarray, P: float) -> np.ndarray:
    total = float(np.sum(np.abs(w) ** 2))
    if total <= 0.0:
        return w
    return w * np.sqrt(P / total)


def update_tilde(W_hat: CovarianceSet, cs: ChannelSet) -> Tuple[np.ndarray, np.ndarray]:
    """
    ỹ_i = ln(Σ_{k≠i}(h̄_iᵀW_k h̄_i* + 2ε‖W_k h̄_i*‖) + σ_i²)
    p̃_i = ln(Σ_k(ḡ_iᵀW_k ḡ_i* + 2ε‖W_k ḡ_i*‖) + ς_i²)
    """
    W = W_hat.W if isinstance(W_hat, CovarianceSet) else np.asarray(W_hat, dtype=complex)
    off_diag = 1.0 - np.eye(cs.k_pairs)
    c_h, r_h = bound_terms(cs.h_est, W, cs.eps)
    c_g, r_g = bound_terms(cs.g_est, W, cs.eps)
    # Centros podem sair −1e-17 por arredondamento; ruído > 0 mantém o log finito
    y_tilde = np.log(((c_h + r_h) * off_diag).sum(axis=1) + cs.sigma2)
    p_tilde = np.log((c_g + r_g).sum(axis=1) + cs.varsigma2)
    return y_tilde, p_tilde


def _solve_at(cs, P, y_tilde, p_tilde, cfg):
    prog = build_sca_subproblem(cs, P, y_tilde, p_tilde)
    result = solve(prog, tol=cfg.solver_tol)
    return prog, result


def _state_from(prog, result, cs, y_used, p_used, iteration, previous: Optional[ScaState]) -> ScaState:
    W_hat, xhat, yhat, phat, qhat = extract_covariances(prog, result, cs)
    y_next, p_next = update_tilde(W_hat, cs)
    objective_bits = result.objective_value * LOG2E
    activity = max(constraint_activity(prog, result.primal).values(), default=0.0)
    prev_obj = previous.objective_trace if previous else ()
    prev_res = previous.residual_trace if previous else ()
    prev_act = previous.activity_trace if previous else ()
    return ScaState(
        iteration=iteration,
        y_tilde=y_next,
        p_tilde=p_next,
        W_hat=W_hat,
        xhat=xhat,
        yhat=yhat,
        phat=phat,
        qhat=qhat,
        y_tilde_used=np.asarray(y_used, dtype=float),
        p_tilde_used=np.asarray(p_used, dtype=float),
        objective_trace=prev_obj + (objective_bits,),
        residual_trace=prev_res + (result.max_cone_residual,),
        activity_trace=prev_act + (activity,),
    )


# --- Operações principais ---


def init_state(cs: ChannelSet, P: float, cfg: ScaConfig, rng, pair_tags=None) -> ScaState:
    """
    Sorteia ŵ_i[0] ~ CN(0, I), normaliza para Σ‖ŵ_i[0]‖² = P e resolve o
    primeiro subproblema. Aceita se o status for ótimo (e, com
    strict_sign_check, se x̂, ŷ, p̂, q̂ forem todos positivos).

    Raises:
        InitializationError: após cfg.init_attempts rejeições.
    """
    gens = _pair_generators(rng, cs.k_pairs, pair_tags)
    for attempt in range(1, cfg.init_attempts + 1):
        w0 = np.stack([complex_gaussian(gen, cs.n_tx) for gen in gens])
        w0 = _scale_to_budget(w0, P)
        W0 = np.einsum("ka,kb->kab", w0, w0.conj())
        y_tilde, p_tilde = update_tilde(W0, cs)

        prog, result = _solve_at(cs, P, y_tilde, p_tilde, cfg)
        if not result.is_optimal:
            logger.warning(f"Inicialização {attempt}/{cfg.init_attempts} rejeitada: status {result.status}")
            continue
        try:
            state = _state_from(prog, result, cs, y_tilde, p_tilde, 1, None)
        except BeamformingError as e:
            logger.warning(f"Inicialização {attempt}/{cfg.init_attempts} rejeitada na extração: {e}")
            continue

        if cfg.strict_sign_check:
            values = np.concatenate([state.xhat, state.yhat, state.phat, state.qhat])
            if np.any(values <= 0):
                logger.warning(
                    f"Inicialização {attempt}/{cfg.init_attempts} rejeitada: x̂ŷp̂q̂ não positivos"
                )
                continue

        logger.debug(f"Inicialização aceita na tentativa {attempt}: objetivo {state.objective:.6g} bits")
        return state

    raise InitializationError(
        f"Nenhum ponto inicial aceito após {cfg.init_attempts} tentativas (eps={cs.eps})."
    )


def sca_step(state: ScaState, cs: ChannelSet, P: float, cfg: ScaConfig) -> ScaState:
    """
    Uma iteração: resolve o subproblema em (ỹ[n], p̃[n]) e calcula (ỹ[n+1], p̃[n+1]).

    Raises:
        ScaNumericalError: falha do solver/extração, com o último estado válido anexado.
    """
    prog, result = _solve_at(cs, P, state.y_tilde, state.p_tilde, cfg)
    if not result.is_optimal:
        raise ScaNumericalError(
            f"Subproblema da iteração {state.iteration + 1} não resolvido ({result.status}).",
            last_state=state,
            status=result.status,
        )
    try:
        new_state = _state_from(prog, result, cs, state.y_tilde, state.p_tilde, state.iteration + 1, state)
    except BeamformingError as e:
        raise ScaNumericalError(
            f"Extração falhou na iteração {state.iteration + 1}: {e}",
            last_state=state,
            original_exception=e,
        ) from e

    previous, current = state.objective, new_state.objective
    if current < previous - MONOTONE_SLACK:
        logger.warning(f"Objetivo decresceu: {previous:.9g} → {current:.9g} bits")
    logger.debug(
        f"Iteração {new_state.iteration}: objetivo {current:.9g} bits, "
        f"resíduo {new_state.residual_trace[-1]:.2e}, folga {new_state.activity_trace[-1]:.2e}"
    )
    return new_state


def is_rank_one(Wset: CovarianceSet, ratio: float = RANK_ONE_RATIO) -> bool:
    """Todas as W_i com λ₂/λ₁ ≤ ratio (matrizes nulas contam como posto-um)."""
    for W in Wset.W:
        vals = np.linalg.eigvalsh(W)[::-1]
        if vals[0] <= 1e-12:
            continue
        if len(vals) > 1 and vals[1] / vals[0] > ratio:
            return False
    return True


def _dominant(W: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(W)
    return np.sqrt(max(vals[-1], 0.0)) * vecs[:, -1]


def _sqrtm_psd(W: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(W)
    return (vecs * np.sqrt(np.maximum(vals, 0.0))) @ vecs.conj().T


def randomize_rank_one(
    Wset: CovarianceSet, cs: ChannelSet, P: float, L: int, rng, pair_tags=None
) -> BeamformerSet:
    """
    Feixes posto-um a partir das covariâncias relaxadas.

    - Todas posto-um: w_i = √λ₁·v₁ (decomposição exata, sem reescala).
    - Caso contrário: candidatos w_i = W_i^{1/2} z_i (z_i ~ CN(0, I)) mais o
      candidato de autovetores dominantes; cada candidato é reescalado por um
      fator comum até Σ‖w_i‖² = P e vence o maior limite inferior da SSR.
    """
    if is_rank_one(Wset):
        w = np.stack([_dominant(W) for W in Wset.W])
        total = float(np.sum(np.abs(w) ** 2))
        if total > P:
            # Folga do solver no traço (≤ 1e-6) não pode violar o orçamento
            w = _scale_to_budget(w, P)
        return BeamformerSet(w, P)

    gens = _pair_generators(rng, cs.k_pairs, pair_tags)
    roots = [_sqrtm_psd(W) for W in Wset.W]

    best_w = _scale_to_budget(np.stack([_dominant(W) for W in Wset.W]), P)
    best_value = ssr_lower_bound(cs, BeamformerSet(best_w, P))
    for _ in range(L):
        w = np.stack([root @ complex_gaussian(gen, cs.n_tx) for root, gen in zip(roots, gens)])
        w = _scale_to_budget(w, P)
        value = ssr_lower_bound(cs, BeamformerSet(w, P))
        if value > best_value:
            best_w, best_value = w, value

    logger.debug(f"Aleatorização com {L} candidatos: melhor limite {best_value:.6g} bits")
    return BeamformerSet(best_w, P)


def has_converged(trace: Sequence[float], obj_tol: float) -> bool:
    """|Δobj| < obj_tol·max(1, |obj|): absoluto abaixo de 1 bit, relativo acima."""
    if len(trace) < 2:
        return False
    return abs(trace[-1] - trace[-2]) < obj_tol * max(1.0, abs(trace[-1]))


def run_sca(cs: ChannelSet, P: float, cfg: Optional[ScaConfig] = None, rng=None, pair_tags=None) -> ScaResult:
    """
    Algoritmo completo: inicialização, iterações até a parada de has_converged
    ou max_iter, e recuperação posto-um.

    Uma falha numérica no meio das iterações não perde o trabalho feito: o
    último estado válido segue para a recuperação posto-um com converged=False.

    Returns:
        ScaResult com as covariâncias relaxadas (relaxation_value = limite
        inferior da SSR avaliado nelas) e os feixes viáveis.

    Raises:
        InitializationError: nenhuma inicialização aceita.
    """
    cfg = cfg or ScaConfig()
    if rng is None:
        rng = RngStream(0)

    state = init_state(cs, P, cfg, _child(rng, 1), pair_tags)
    converged = False
    while state.iteration < cfg.max_iter:
        try:
            state = sca_step(state, cs, P, cfg)
        except ScaNumericalError as e:
            logger.warning(f"SCA interrompido; usando o estado da iteração {state.iteration}: {e}")
            state = e.last_state or state
            break
        if has_converged(state.objective_trace, cfg.obj_tol):
            converged = True
            break
    else:
        logger.warning(f"SCA atingiu max_iter={cfg.max_iter} sem convergir.")

    covariances = state.W_hat
    rank_one = is_rank_one(covariances)
    beamformers = randomize_rank_one(
        covariances, cs, P, cfg.randomization_samples, _child(rng, 2), pair_tags
    )
    relaxation_value = ssr_lower_bound(cs, covariances)
    lower_bound_value = ssr_lower_bound(cs, beamformers)

    if beamformers.total_power > P * (1 + POWER_SLACK):
        raise InvalidDimensionError("Feixes recuperados violam o orçamento de potência.")

    logger.debug(
        f"SCA concluído em {state.iteration} iterações (convergiu={converged}, posto-um={rank_one}): "
        f"relaxado {relaxation_value:.6g}, viável {lower_bound_value:.6g} bits"
    )
    return ScaResult(
        covariances=covariances,
        beamformers=beamformers,
        trace=state.objective_trace,
        relaxation_value=relaxation_value,
        lower_bound_value=lower_bound_value,
        iterations=state.iteration,
        converged=converged,
        rank_one=rank_one,
        state=state,
    )


def trace_rows(state: ScaState) -> List[Tuple[int, float, float]]:
    """Linhas (iter, objective_bits, max_constraint_residual) para emissão em CSV."""
    return [
        (n + 1, obj, res)
        for n, (obj, res) in enumerate(zip(state.objective_trace, state.residual_trace))
    ]
