# -*- coding: utf-8 -*-
"""
Módulo Experiments - Harness de Simulação Monte Carlo

Este pacote contém a configuração das varreduras, o orquestrador de trials,
a gravação dos CSVs de resultado, a autoverificação e a linha de comando.
"""

__version__ = "1.0.0"
__author__ = "EBM Desenvolvimento"

# Importações principais para facilitar o uso
from experiments.config import Config, ExperimentConfig, build_config, read_config_file
from experiments.file_handler import SCHEMA_COLUMNS, TRACE_COLUMNS, render_csv, write_csv
from experiments.runner import (
    compare_bounds,
    run_convergence,
    run_eps_sweep,
    run_rand_effect,
    run_sweep,
    run_users_sweep,
)
from experiments.selftest import selftest

__all__ = [
    "Config",
    "ExperimentConfig",
    "build_config",
    "read_config_file",
    "SCHEMA_COLUMNS",
    "TRACE_COLUMNS",
    "render_csv",
    "write_csv",
    "compare_bounds",
    "run_convergence",
    "run_eps_sweep",
    "run_rand_effect",
    "run_sweep",
    "run_users_sweep",
    "selftest",
]
