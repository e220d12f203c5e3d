# -*- coding: utf-8 -*-
"""
Módulo Beamforming - Taxa de Sigilo Soma Robusta

Este pacote contém os modelos de canal com erro limitado em norma,
as taxas exatas e robustas, o subproblema cônico da aproximação convexa
sucessiva (SCA) e os projetos de referência ZF e SLNR.
"""

__version__ = "1.0.0"
__author__ = "EBM Desenvolvimento"

# Importações principais para facilitar o uso
from beamforming.channel import (
    ChannelSet,
    TrueChannelInstance,
    sample_channel_set,
    sample_true_instance,
)
from beamforming.rates import (
    BeamformerSet,
    CovarianceSet,
    ssr_exact,
    ssr_lower_bound,
)
from beamforming.sca import ScaConfig, run_sca
from beamforming.slnr import slnr_beamformers
from beamforming.utils import RngStream, setup_logger
from beamforming.zf import select_users, zf_design

__all__ = [
    "ChannelSet",
    "TrueChannelInstance",
    "sample_channel_set",
    "sample_true_instance",
    "BeamformerSet",
    "CovarianceSet",
    "ssr_exact",
    "ssr_lower_bound",
    "ScaConfig",
    "run_sca",
    "slnr_beamformers",
    "RngStream",
    "setup_logger",
    "select_users",
    "zf_design",
]
