# -*- coding: utf-8 -*-
"""
Módulo SLNR (beamforming/slnr.py).

Responsabilidade:
1. Beamformer de referência que maximiza a razão sinal/(vazamento + ruído).
2. A pilha de vazamento contém apenas os demais usuários (sem espiões),
   e a potência é dividida igualmente entre os K feixes.
"""

import numpy as np

from beamforming.channel import ChannelSet
from beamforming.rates import BeamformerSet
from beamforming.utils import get_module_logger

logger = get_module_logger("slnr")


def slnr_direction(cs: ChannelSet, i: int) -> np.ndarray:
    """
    Autovetor dominante de (σ_i²I + H̃_iᴴH̃_i)⁻¹ h̄_i* h̄_iᵀ.

    A matriz alvo tem posto um, então o autovetor é (σ_i²I + H̃_iᴴH̃_i)⁻¹ h̄_i*
    normalizado.
    """
    others = [k for k in range(cs.k_pairs) if k != i]
    leak = cs.h_est[others]  # linhas h̄_kᵀ
    gram = cs.sigma2[i] * np.eye(cs.n_tx) + leak.conj().T @ leak
    direction = np.linalg.solve(gram, cs.h_est[i].conj())
    return direction / np.linalg.norm(direction)


def slnr_beamformers(cs: ChannelSet, P: float) -> BeamformerSet:
    """‖w_i‖² = P/K para todo i."""
    per_user = np.sqrt(P / cs.k_pairs)
    w = np.stack([slnr_direction(cs, i) * per_user for i in range(cs.k_pairs)])
    total = float(np.sum(np.abs(w) ** 2))
    if total > P:
        w = w * np.sqrt(P / total)
    return BeamformerSet(w, P)
