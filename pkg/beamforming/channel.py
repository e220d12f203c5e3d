# -*- coding: utf-8 -*-
"""
Módulo de Canais (beamforming/channel.py).

Responsabilidade:
1. Modelo de dados dos canais estimados (ChannelSet) e de uma realização
   verdadeira dentro da bola de incerteza (TrueChannelInstance).
2. Sorteio dos canais (Rayleigh, entradas CN(0,1) i.i.d.).
3. Sorteio das perturbações uniformes na bola complexa de raio ε.
4. Extremizadores de Re(xᴴy) sobre ‖x‖ ≤ ε, base de todos os limites robustos.

Convenção de forma: vetores de usuário/espião empilhados em linhas,
h_est[i] é o vetor h̄_i (comprimento N_t).
"""

from dataclasses import dataclass, field
from typing import Literal, Sequence, Tuple, Union

import numpy as np

from beamforming.error_handler import InvalidDimensionError
from beamforming.utils import as_generator, complex_gaussian, get_module_logger

logger = get_module_logger("channel")

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


def _noise_vector(value: ArrayLike, k_pairs: int, label: str) -> np.ndarray:
    vec = np.broadcast_to(np.asarray(value, dtype=float), (k_pairs,)).astype(float)
    if np.any(vec <= 0) or not np.all(np.isfinite(vec)):
        raise InvalidDimensionError(f"{label} deve ser positivo e finito (recebeu {vec}).")
    return vec


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """
    Entradas do problema robusto: canais estimados, limite ε e ruídos.

    h_est, g_est: matrizes complexas K × N_t (linha i = h̄_i, ḡ_i).
    sigma2, varsigma2: variâncias de ruído dos usuários e dos espiões.
    """

    h_est: np.ndarray
    g_est: np.ndarray
    eps: float
    sigma2: np.ndarray
    varsigma2: np.ndarray
    n_tx: int = field(init=False)
    k_pairs: int = field(init=False)

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h_est, dtype=complex))
        g = np.atleast_2d(np.asarray(self.g_est, dtype=complex))
        if h.shape != g.shape:
            raise InvalidDimensionError(
                f"h_est {h.shape} e g_est {g.shape} devem ter a mesma forma."
            )
        k_pairs, n_tx = h.shape
        if not (n_tx >= k_pairs >= 1):
            raise InvalidDimensionError(
                f"É necessário N_t ≥ K ≥ 1 (recebeu N_t={n_tx}, K={k_pairs})."
            )
        if not (np.isfinite(self.eps) and self.eps >= 0):
            raise InvalidDimensionError(f"eps deve ser ≥ 0 (recebeu {self.eps}).")

        object.__setattr__(self, "h_est", _frozen(h))
        object.__setattr__(self, "g_est", _frozen(g))
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "sigma2", _frozen(_noise_vector(self.sigma2, k_pairs, "sigma2")))
        object.__setattr__(
            self, "varsigma2", _frozen(_noise_vector(self.varsigma2, k_pairs, "varsigma2"))
        )
        object.__setattr__(self, "n_tx", int(n_tx))
        object.__setattr__(self, "k_pairs", int(k_pairs))

    def with_eps(self, eps: float) -> "ChannelSet":
        return ChannelSet(self.h_est, self.g_est, eps, self.sigma2, self.varsigma2)

    def permuted(self, order: Sequence[int]) -> "ChannelSet":
        """Reordena os pares usuário-espião."""
        order = list(order)
        return ChannelSet(
            self.h_est[order],
            self.g_est[order],
            self.eps,
            self.sigma2[order],
            self.varsigma2[order],
        )

    def subset(self, users: Sequence[int]) -> "ChannelSet":
        """Mantém apenas os pares listados (na ordem dada)."""
        return self.permuted(users)


@dataclass(frozen=True, eq=False)
class TrueChannelInstance:
    """
    Realização verdadeira do canal: h_true = h_est + dh, g_true = g_est + dg,
    com ‖dh_i‖ ≤ ε e ‖dg_i‖ ≤ ε.
    """

    h_true: np.ndarray
    g_true: np.ndarray
    dh: np.ndarray
    dg: np.ndarray

    def __post_init__(self):
        for name in ("h_true", "g_true", "dh", "dg"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=complex)))

    def as_channel_set(self, template: ChannelSet, eps: float = 0.0) -> ChannelSet:
        """ChannelSet com os canais verdadeiros no lugar das estimativas."""
        return ChannelSet(self.h_true, self.g_true, eps, template.sigma2, template.varsigma2)

    def subset(self, users: Sequence[int]) -> "TrueChannelInstance":
        users = list(users)
        return TrueChannelInstance(self.h_true[users], self.g_true[users], self.dh[users], self.dg[users])


def sample_channel_set(n_tx, k_pairs, eps, sigma2, varsigma2, rng) -> ChannelSet:
    """
    Sorteia canais estimados com entradas CN(0, 1) i.i.d. (desvanecimento Rayleigh).

    Raises:
        InvalidDimensionError: se n_tx < k_pairs ou k_pairs < 1.
    """
    if not (n_tx >= k_pairs >= 1):
        raise InvalidDimensionError(
            f"É necessário n_tx ≥ k_pairs ≥ 1 (recebeu n_tx={n_tx}, k_pairs={k_pairs})."
        )
    gen = as_generator(rng)
    h_est = complex_gaussian(gen, (k_pairs, n_tx))
    g_est = complex_gaussian(gen, (k_pairs, n_tx))
    return ChannelSet(h_est, g_est, eps, sigma2, varsigma2)


def sample_ball(gen: np.random.Generator, count: int, n_tx: int, eps: float) -> np.ndarray:
    """
    Sorteia `count` vetores uniformes na bola complexa fechada de raio eps em C^n_tx.

    Direção uniforme na esfera de R^(2·n_tx); raio eps·u^(1/(2·n_tx)).
    """
    if eps == 0:
        return np.zeros((count, n_tx), dtype=complex)
    direction = complex_gaussian(gen, (count, n_tx))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radius = eps * gen.uniform(0.0, 1.0, size=(count, 1)) ** (1.0 / (2 * n_tx))
    return direction / norms * radius


def sample_true_instance(cs: ChannelSet, rng) -> TrueChannelInstance:
    """
    Sorteia uma realização verdadeira do canal dentro da bola de incerteza.
    """
    gen = as_generator(rng)
    dh = sample_ball(gen, cs.k_pairs, cs.n_tx, cs.eps)
    dg = sample_ball(gen, cs.k_pairs, cs.n_tx, cs.eps)
    return TrueChannelInstance(cs.h_est + dh, cs.g_est + dg, dh, dg)


def inner_product_extreme(
    y: np.ndarray, eps: float, sense: Literal["max", "min"] = "max"
) -> Tuple[np.ndarray, float]:
    """
    Extremo de Re(xᴴy) sobre ‖x‖ ≤ eps (Cauchy–Schwarz).

    sense='max' → x = (eps/‖y‖)·y, valor eps·‖y‖
    sense='min' → x = −(eps/‖y‖)·y, valor −eps·‖y‖
    y = 0 → x = 0, valor 0.
    """
    if eps < 0:
        raise InvalidDimensionError(f"eps deve ser ≥ 0 (recebeu {eps}).")
    if sense not in ("max", "min"):
        raise ValueError(f"sense deve ser 'max' ou 'min' (recebeu {sense!r}).")

    y = np.asarray(y, dtype=complex)
    norm_y = float(np.linalg.norm(y))
    if norm_y == 0.0 or eps == 0.0:
        return np.zeros_like(y), 0.0

    sign = 1.0 if sense == "max" else -1.0
    x = sign * (eps / norm_y) * y
    return x, sign * eps * norm_y
