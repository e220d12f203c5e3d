# -*- coding: utf-8 -*-
"""
Módulo de Configuração do Núcleo Numérico.

Centraliza tolerâncias, padrões do solver e variáveis de ambiente.
Valores numéricos que aparecem em mais de um módulo moram aqui.
"""
from typing import Dict, Tuple

import os
from dotenv import load_dotenv

from beamforming.utils import setup_logger

# Carrega as variáveis de ambiente do arquivo .env na raiz
load_dotenv()

logger = setup_logger("beamforming.config")

# --- Solver Cônico ---

# Solver preferido e alternativas, na ordem de tentativa
SOLVER_NAME = os.getenv("SSR_SOLVER", "CLARABEL").upper()
SOLVER_FALLBACKS: Tuple[str, ...] = ("CLARABEL", "SCS")
SOLVER_TOL = float(os.getenv("SSR_SOLVER_TOL", "1e-7"))

# Opções de tolerância por solver (nomes dos parâmetros de cada backend)
SOLVER_TOL_OPTIONS: Dict[str, Tuple[str, ...]] = {
    "CLARABEL": ("tol_feas", "tol_gap_abs", "tol_gap_rel"),
    "SCS": ("eps_abs", "eps_rel"),
}

# --- Tolerâncias do Modelo ---
HERMITIAN_TOL = 1e-9
EXTRACTION_RESIDUAL_TOL = 1e-6
# Autovalores acima de -EIGEN_FLOOR·(1 + ‖W‖₂) são ruído do solver e viram 0
EIGEN_FLOOR = EXTRACTION_RESIDUAL_TOL
POWER_SLACK = 1e-9
LOG_ARG_FLOOR = 1e-12

# --- SCA ---
DEFAULT_MAX_ITER = 50
DEFAULT_OBJ_TOL = 1e-4
DEFAULT_INIT_ATTEMPTS = 20
DEFAULT_RAND_SAMPLES = 200
RANK_ONE_RATIO = 1e-6

# --- ZF ---
PINV_RCOND = 1e-10
WATERFILL_TOL = 1e-10


def validate_config():
    errors = []

    if SOLVER_NAME not in SOLVER_TOL_OPTIONS:
        errors.append(f"SSR_SOLVER '{SOLVER_NAME}' sem mapeamento de tolerância.")

    if not (0 < SOLVER_TOL < 1e-2):
        errors.append(f"SSR_SOLVER_TOL fora do intervalo razoável: {SOLVER_TOL}.")

    if errors:
        logger.warning(f"Aviso de Configuração: {', '.join(errors)}")


try:
    validate_config()
except Exception as e:
    logger.error(f"Configuração Inválida: {e}")
