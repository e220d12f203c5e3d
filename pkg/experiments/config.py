# -*- coding: utf-8 -*-
"""
Módulo de Configuração de Experimentos (experiments/config.py).

Responsabilidade:
1. Centralizar diretórios e padrões do harness (classe Config).
2. Modelar a configuração de uma varredura Monte Carlo (ExperimentConfig).
3. Ler o arquivo chave=valor e aplicar as sobreposições vindas da CLI,
   validando tudo antes de qualquer simulação.
"""

import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from beamforming.error_handler import ConfigError
from beamforming.sca import ScaConfig
from beamforming.utils import setup_logger
from experiments.validators import (
    validate_dimensions,
    validate_eps,
    validate_methods,
    validate_positive_float,
    validate_positive_int,
    validate_selection_mode,
    validate_snr_list,
)

load_dotenv()

logger = setup_logger("experiments.config")


class Config:
    """
    Centraliza diretórios e padrões do harness.
    """

    # Raiz do projeto (um nível acima da pasta 'experiments')
    PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))

    # Diretório padrão para os CSVs de resultado
    RESULTS_DIR = os.getenv("SSR_RESULTS_DIR", os.path.join(PROJECT_ROOT, "results"))

    # Convenção de ruído: σ² = ς² = 1, a SNR varia apenas P
    NOISE_VARIANCE = 1.0

    DEFAULT_SEED = int(os.getenv("SSR_SEED", "2024"))
    DEFAULT_WORKERS = int(os.getenv("SSR_WORKERS", "1"))

    # Taxa de falhas do solver acima da qual a CLI sai com código 3
    MAX_FAILURE_RATE = 0.5


@dataclass(frozen=True)
class ExperimentConfig:
    n_tx: int = 4
    k_pairs: int = 2
    eps: float = 0.1
    snr_db_list: Tuple[float, ...] = (10.0,)
    trials: int = 10
    methods: Tuple[str, ...] = ("sca", "zf", "slnr")
    seed: int = Config.DEFAULT_SEED
    sca: ScaConfig = field(default_factory=ScaConfig)
    selection: str = "exhaustive"
    theoretical: bool = True
    report_clamped: bool = False
    workers: int = Config.DEFAULT_WORKERS
    eps_list: Tuple[float, ...] = (0.0, 0.05, 0.1, 0.2)
    k_list: Tuple[int, ...] = (1, 2, 3, 4)
    out: Optional[str] = None

    @property
    def noise_variance(self) -> float:
        return Config.NOISE_VARIANCE

    @staticmethod
    def power_for(snr_db: float) -> float:
        """P = 10^(SNR/10) com σ² = 1."""
        return 10.0 ** (snr_db / 10.0)

    def validate(self):
        """
        Executa todos os validadores e levanta ConfigError com a lista de problemas.
        """
        checks = [
            validate_dimensions(self.n_tx, self.k_pairs),
            validate_eps(self.eps),
            validate_snr_list(self.snr_db_list),
            validate_positive_int(self.trials, "trials"),
            validate_methods(self.methods),
            validate_selection_mode(self.selection),
            validate_positive_int(self.workers, "workers"),
        ]
        checks += [validate_eps(e) for e in self.eps_list]
        checks += [validate_positive_int(k, "k_list") for k in self.k_list]
        errors = [msg for ok, msg in checks if not ok]
        if errors:
            raise ConfigError("; ".join(errors))
        return self


# --- Leitura do arquivo chave=valor ---


def _as_list(raw: str):
    return [item.strip() for item in str(raw).split(",") if item.strip()]


def _as_bool(raw: str) -> bool:
    value = str(raw).strip().lower()
    if value in ("1", "true", "sim", "yes", "on"):
        return True
    if value in ("0", "false", "nao", "não", "no", "off"):
        return False
    raise ValueError(f"valor booleano inválido: {raw!r}")


# chave do arquivo/CLI → (campo, conversor)
_TOP_LEVEL = {
    "ntx": ("n_tx", int),
    "k": ("k_pairs", int),
    "eps": ("eps", float),
    "snr": ("snr_db_list", lambda raw: tuple(float(v) for v in _as_list(raw))),
    "trials": ("trials", int),
    "methods": ("methods", lambda raw: tuple(v.lower() for v in _as_list(raw))),
    "seed": ("seed", int),
    "selection": ("selection", lambda raw: str(raw).strip().lower()),
    "theoretical": ("theoretical", _as_bool),
    "report_clamped": ("report_clamped", _as_bool),
    "workers": ("workers", int),
    "eps_list": ("eps_list", lambda raw: tuple(float(v) for v in _as_list(raw))),
    "k_list": ("k_list", lambda raw: tuple(int(v) for v in _as_list(raw))),
    "out": ("out", lambda raw: str(raw).strip() or None),
}

_SCA_LEVEL = {
    "max_iter": ("max_iter", int),
    "obj_tol": ("obj_tol", float),
    "init_attempts": ("init_attempts", int),
    "rand_samples": ("randomization_samples", int),
    "strict_sign_check": ("strict_sign_check", _as_bool),
    "solver_tol": ("solver_tol", float),
}


def read_config_file(path) -> Dict[str, str]:
    """
    Lê um arquivo texto plano chave=valor (um par por linha, '#' comenta).

    Raises:
        ConfigError: arquivo inexistente.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Arquivo de configuração não encontrado: {path}")
    values = dotenv_values(path)
    return {key.strip().lower(): value for key, value in values.items() if value is not None}


def build_config(file_values: Optional[Mapping[str, str]] = None, overrides: Optional[Mapping] = None) -> ExperimentConfig:
    """
    Mescla padrões ← arquivo ← CLI e valida.

    `overrides` aceita os mesmos nomes de chave do arquivo; valores None são ignorados.

    Raises:
        ConfigError: chave desconhecida, valor não conversível ou regra violada.
    """
    merged: Dict[str, object] = {}
    merged.update({k: v for k, v in (file_values or {}).items()})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})

    top, sca_fields, errors = {}, {}, []
    for key, raw in merged.items():
        if key in _TOP_LEVEL:
            target, convert, bucket = *_TOP_LEVEL[key], top
        elif key in _SCA_LEVEL:
            target, convert, bucket = *_SCA_LEVEL[key], sca_fields
        else:
            errors.append(f"chave desconhecida '{key}'")
            continue
        try:
            bucket[target] = raw if not isinstance(raw, str) else convert(raw)
        except (TypeError, ValueError) as e:
            errors.append(f"{key}: {e}")

    for name in ("obj_tol", "solver_tol"):
        if name in sca_fields:
            ok, msg = validate_positive_float(sca_fields[name], name)
            if not ok:
                errors.append(msg)

    if errors:
        raise ConfigError("Configuração inválida: " + "; ".join(errors))

    try:
        sca_cfg = replace(ScaConfig(), **sca_fields)
    except Exception as e:
        raise ConfigError(f"Parâmetros do SCA inválidos: {e}", original_exception=e)

    cfg = ExperimentConfig(sca=sca_cfg, **top)
    logger.debug(f"Configuração montada: {cfg}")
    return cfg.validate()
