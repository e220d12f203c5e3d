# -*- coding: utf-8 -*-
"""
Módulo de Arquivos de Resultado (experiments/file_handler.py).

Responsabilidade:
1. Gravar as tabelas de resultado em CSV com formato byte-determinístico:
   floats com 9 dígitos significativos, separador decimal '.', fim de linha '\\n'.
2. Ler de volta CSVs gravados (subcomando summary da CLI).
"""

import os
from pathlib import Path

import pandas as pd

from beamforming.utils import setup_logger

logger = setup_logger("experiments.file_handler")

SCHEMA_COLUMNS = ["snr_db", "method", "metric", "mean", "stddev", "trials", "failures"]
TRACE_COLUMNS = ["trial", "snr_db", "iter", "objective_bits", "max_constraint_residual"]
FLOAT_FORMAT = "%.9g"


def write_csv(df: pd.DataFrame, path):
    """
    Escreve o DataFrame no disco.

    Returns:
        (Path, None) em caso de sucesso ou (None, mensagem) em caso de erro.
    """
    try:
        path = Path(path)
        if path.parent and not path.parent.exists():
            os.makedirs(path.parent, exist_ok=True)
        df.to_csv(
            path,
            index=False,
            float_format=FLOAT_FORMAT,
            lineterminator="\n",
            na_rep="nan",
            encoding="utf-8",
        )
        logger.debug(f"CSV gravado: {path} ({len(df)} linhas)")
        return path, None
    except OSError as e:
        logger.error(f"Erro ao salvar CSV {path}: {e}")
        return None, f"Erro ao salvar CSV: {e}"


def render_csv(df: pd.DataFrame) -> str:
    """Mesma serialização de write_csv, em memória."""
    return df.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n", na_rep="nan")


def read_results(path):
    """
    Lê um CSV de resultados.

    Returns:
        (DataFrame, None) ou (None, mensagem de erro).
    """
    try:
        return pd.read_csv(path), None
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        logger.error(f"Erro ao ler {path}: {e}")
        return None, f"Erro ao ler arquivo: {e}"
