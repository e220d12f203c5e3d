# -*- coding: utf-8 -*-
"""
Módulo de Taxas (beamforming/rates.py).

Responsabilidade:
1. Taxas exatas de usuários e espiões e a taxa de sigilo soma (SSR) exata.
2. Limites robustos das formas quadráticas |(h̄+Δ)ᵀw|² para ‖Δ‖ ≤ ε
   (termo de segunda ordem em ε² omitido).
3. O objetivo robusto: limite inferior da SSR construído com esses limites.

Convenção: sinal recebido pelo usuário i vindo do feixe k é h_iᵀ w_k (sem conjugado).
Todas as taxas em bits (log2).
"""

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from beamforming.channel import ChannelSet, TrueChannelInstance
from beamforming.config_bf import LOG_ARG_FLOOR, POWER_SLACK
from beamforming.error_handler import InvalidDimensionError
from beamforming.utils import get_module_logger

logger = get_module_logger("rates")


@dataclass(frozen=True, eq=False)
class BeamformerSet:
    """
    K vetores de beamforming (linhas de `w`, forma K × N_t) sob orçamento P.
    """

    w: np.ndarray
    power_budget: float

    def __post_init__(self):
        w = np.atleast_2d(np.array(self.w, dtype=complex, copy=True))
        if self.power_budget <= 0:
            raise InvalidDimensionError(f"Orçamento de potência deve ser > 0 ({self.power_budget}).")
        total = float(np.sum(np.abs(w) ** 2))
        if total > self.power_budget * (1 + POWER_SLACK):
            raise InvalidDimensionError(
                f"Potência total {total:.12g} excede o orçamento {self.power_budget:.12g}."
            )
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "power_budget", float(self.power_budget))

    @property
    def k_pairs(self) -> int:
        return self.w.shape[0]

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.w) ** 2))

    def covariances(self) -> "CovarianceSet":
        W = np.einsum("ka,kb->kab", self.w, self.w.conj())
        return CovarianceSet(W, power_budget=self.power_budget)


@dataclass(frozen=True, eq=False)
class CovarianceSet:
    """
    K matrizes Hermitianas PSD (forma K × N_t × N_t), variáveis da relaxação SDR.
    """

    W: np.ndarray
    power_budget: Optional[float] = None

    def __post_init__(self):
        W = np.array(self.W, dtype=complex, copy=True)
        if W.ndim == 2:
            W = W[None, :, :]
        if W.ndim != 3 or W.shape[1] != W.shape[2]:
            raise InvalidDimensionError(f"Forma inválida para CovarianceSet: {W.shape}.")
        if np.max(np.abs(W - W.conj().transpose(0, 2, 1)), initial=0.0) > 1e-10:
            raise InvalidDimensionError("Matrizes W_i devem ser Hermitianas (tolerância 1e-10).")
        min_eig = min(float(np.linalg.eigvalsh(Wi)[0]) for Wi in W)
        if min_eig < -1e-8:
            raise InvalidDimensionError(f"Autovalor mínimo {min_eig:.3e} < -1e-8.")
        if self.power_budget is not None:
            total = float(np.real(np.trace(W, axis1=1, axis2=2)).sum())
            if total > self.power_budget + 1e-8:
                raise InvalidDimensionError(
                    f"Traço total {total:.12g} excede o orçamento {self.power_budget:.12g}."
                )
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def k_pairs(self) -> int:
        return self.W.shape[0]

    @property
    def total_power(self) -> float:
        return float(np.real(np.trace(self.W, axis1=1, axis2=2)).sum())


@dataclass(frozen=True)
class LowerBoundResult:
    """Valor do limite inferior da SSR e a sinalização de limites degenerados."""

    value: float
    user_terms: Tuple[float, ...]
    eaves_terms: Tuple[float, ...]
    degenerate: bool


# --- Helpers de entrada ---


def _resolve_channels(ch, sigma2=None, varsigma2=None):
    """
    Aceita ChannelSet (canais estimados + ruídos), TrueChannelInstance ou
    um par (h, g) de arrays. Ruídos explícitos têm precedência.
    """
    if isinstance(ch, ChannelSet):
        h, g = ch.h_est, ch.g_est
        sigma2 = ch.sigma2 if sigma2 is None else sigma2
        varsigma2 = ch.varsigma2 if varsigma2 is None else varsigma2
    elif isinstance(ch, TrueChannelInstance):
        h, g = ch.h_true, ch.g_true
    else:
        h, g = ch
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    if sigma2 is None or varsigma2 is None:
        raise InvalidDimensionError("Variâncias de ruído ausentes para canais sem ChannelSet.")
    k_pairs = h.shape[0]
    sigma2 = np.broadcast_to(np.asarray(sigma2, dtype=float), (k_pairs,))
    varsigma2 = np.broadcast_to(np.asarray(varsigma2, dtype=float), (k_pairs,))
    return h, g, sigma2, varsigma2


def _weights(bf) -> np.ndarray:
    if isinstance(bf, BeamformerSet):
        return bf.w
    return np.atleast_2d(np.asarray(bf, dtype=complex))


def _sinr_rates(chan: np.ndarray, w: np.ndarray, noise: np.ndarray) -> np.ndarray:
    if chan.shape != w.shape:
        raise InvalidDimensionError(f"Canais {chan.shape} e feixes {w.shape} incompatíveis.")
    gains = np.abs(chan @ w.T) ** 2  # gains[i, k] = |c_iᵀ w_k|²
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return np.log2(1.0 + signal / (interference + noise))


# --- Taxas exatas ---


def user_rates_exact(ch, bf, sigma2=None) -> np.ndarray:
    h, _, sigma2, _ = _resolve_channels(ch, sigma2, 1.0)
    return _sinr_rates(h, _weights(bf), sigma2)


def eaves_rates_exact(ch, bf, varsigma2=None) -> np.ndarray:
    _, g, _, varsigma2 = _resolve_channels(ch, 1.0, varsigma2)
    return _sinr_rates(g, _weights(bf), varsigma2)


def user_rate_exact(ch, bf, i: int, sigma2=None) -> float:
    """log2(1 + |h_iᵀw_i|² / (Σ_{k≠i}|h_iᵀw_k|² + σ_i²))"""
    return float(user_rates_exact(ch, bf, sigma2)[i])


def eaves_rate_exact(ch, bf, i: int, varsigma2=None) -> float:
    """Espelho de user_rate_exact com g_i e ς_i²."""
    return float(eaves_rates_exact(ch, bf, varsigma2)[i])


def pair_secrecy_rates(ch, bf, sigma2=None, varsigma2=None) -> np.ndarray:
    """r_i − s_i por par, com sinal (sem corte em zero)."""
    h, g, sigma2, varsigma2 = _resolve_channels(ch, sigma2, varsigma2)
    w = _weights(bf)
    return _sinr_rates(h, w, sigma2) - _sinr_rates(g, w, varsigma2)


def ssr_exact(ch, bf, sigma2=None, varsigma2=None) -> float:
    """Σ_i (r_i − s_i). Pode ser negativa."""
    return float(pair_secrecy_rates(ch, bf, sigma2, varsigma2).sum())


def ssr_clamped(ch, bf, sigma2=None, varsigma2=None) -> float:
    """Σ_i (r_i − s_i)⁺, usada apenas como coluna auxiliar nos relatórios."""
    return float(np.maximum(pair_secrecy_rates(ch, bf, sigma2, varsigma2), 0.0).sum())


# --- Limites robustos ---


def quad_bounds(hbar: np.ndarray, W: np.ndarray, eps: float) -> Tuple[float, float]:
    """
    Limites de primeira ordem para |(h̄+Δ)ᵀw|² com W = wwᴴ e ‖Δ‖ ≤ eps:

        centro = h̄ᵀ W h̄*,  raio = 2·eps·‖W h̄*‖
        (lb, ub) = (centro − raio, centro + raio)
    """
    hbar = np.asarray(hbar, dtype=complex)
    W = np.asarray(W, dtype=complex)
    whc = W @ hbar.conj()
    center = float(np.real(hbar @ whc))
    radius = 2.0 * eps * float(np.linalg.norm(whc))
    return center - radius, center + radius


def bound_terms(chan: np.ndarray, W: np.ndarray, eps: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Centros e raios de todas as formas quadráticas de uma vez.

    Returns:
        (center, radius) com center[i, k] = c_iᵀ W_k c_i* e radius[i, k] = 2ε‖W_k c_i*‖.
    """
    wc = np.einsum("kab,ib->ika", W, chan.conj())
    center = np.real(np.einsum("ia,ika->ik", chan, wc))
    radius = 2.0 * eps * np.linalg.norm(wc, axis=2)
    return center, radius


def _covariances(x) -> np.ndarray:
    if isinstance(x, BeamformerSet):
        return np.einsum("ka,kb->kab", x.w, x.w.conj())
    if isinstance(x, CovarianceSet):
        return x.W
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 2:
        return np.einsum("ka,kb->kab", arr, arr.conj())
    return arr


def evaluate_lower_bound(cs: ChannelSet, x: Union[BeamformerSet, CovarianceSet]) -> LowerBoundResult:
    """
    Limite inferior da SSR sob erro de canal limitado em norma.

    Termo do usuário i: log2((Σ_k lb_h[i,k] + σ_i²) / (Σ_{k≠i} ub_h[i,k] + σ_i²))
    Termo do espião i:  log2((Σ_k ub_g[i,k] + ς_i²) / (Σ_{k≠i} lb_g[i,k] + ς_i²))

    Limites inferiores negativos são cortados em 0 e argumentos de log em
    LOG_ARG_FLOOR. O resultado é degenerado quando o limite do sinal desejado
    de algum usuário fica negativo ou algum argumento de log precisa de corte.
    """
    W = _covariances(x)
    if W.shape[0] != cs.k_pairs or W.shape[1] != cs.n_tx:
        raise InvalidDimensionError(
            f"Covariâncias {W.shape} incompatíveis com K={cs.k_pairs}, N_t={cs.n_tx}."
        )
    off_diag = 1.0 - np.eye(cs.k_pairs)

    c_h, r_h = bound_terms(cs.h_est, W, cs.eps)
    c_g, r_g = bound_terms(cs.g_est, W, cs.eps)
    lb_h, ub_h = c_h - r_h, c_h + r_h
    lb_g, ub_g = c_g - r_g, c_g + r_g

    # Só o sinal desejado lb_h[i,i] marca degeneração; termos de interferência
    # cortados em 0 continuam limites válidos. Negativos de ordem 1e-15 não contam.
    degenerate = bool(np.any(np.diag(lb_h) < -1e-12))
    lb_h = np.maximum(lb_h, 0.0)
    lb_g = np.maximum(lb_g, 0.0)

    args = np.stack(
        [
            lb_h.sum(axis=1) + cs.sigma2,
            (ub_h * off_diag).sum(axis=1) + cs.sigma2,
            ub_g.sum(axis=1) + cs.varsigma2,
            (lb_g * off_diag).sum(axis=1) + cs.varsigma2,
        ]
    )
    if np.any(args < LOG_ARG_FLOOR):
        degenerate = True
    args = np.maximum(args, LOG_ARG_FLOOR)

    user_terms = np.log2(args[0]) - np.log2(args[1])
    eaves_terms = np.log2(args[2]) - np.log2(args[3])
    value = float(np.sum(user_terms - eaves_terms))

    if degenerate:
        logger.debug(f"Limite inferior degenerado (eps={cs.eps}): valor {value:.6g}")

    return LowerBoundResult(
        value=value,
        user_terms=tuple(float(t) for t in user_terms),
        eaves_terms=tuple(float(t) for t in eaves_terms),
        degenerate=degenerate,
    )


def ssr_lower_bound(cs: ChannelSet, x: Union[BeamformerSet, CovarianceSet]) -> float:
    """Atalho: apenas o valor (bits) do limite inferior da SSR."""
    return evaluate_lower_bound(cs, x).value
