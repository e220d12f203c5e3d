# -*- coding: utf-8 -*-
"""
Módulo de Utilitários (beamforming/utils.py).

Responsabilidade:
1. Configurar o sistema de logging centralizado (Console + Arquivo com rotação).
2. Gerar identificadores de execução para correlacionar logs.
3. Fornecer o gerador aleatório determinístico por sub-fluxo (RngStream).

Arquitetura:
- Console (INFO+) e Arquivo (DEBUG+) com rotação por tamanho.
- Geradores Philox (baseados em contador): o par (seed, stream) define
  a sequência inteira, independente da ordem em que os trials rodam.
"""

import os
import uuid
import logging
from dataclasses import dataclass
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path

import numpy as np

PROJECT_ROOT = Path(__file__).resolve().parent.parent

_UINT64_MASK = (1 << 64) - 1


def _logs_dir() -> Path:
    # Lido em tempo de chamada para que testes possam redirecionar via env
    return Path(
        os.getenv("SSR_LOGS_DIR", str(PROJECT_ROOT / "ssr_logs" / "execution_logs"))
    )


# --- Funções de Logging ---


def setup_logger(name="ssr", log_level=logging.DEBUG):
    """
    Configura um logger centralizado.

    Estratégia de Logging:
    - Console (StreamHandler): INFO, WARNING e ERROR.
    - Arquivo (RotatingFileHandler): tudo (DEBUG+), 5 MB por arquivo, 10 backups.

    Args:
        name (str): Nome do logger (ex: 'beamforming.sca').
        log_level (int): Nível mínimo do logger (padrão: DEBUG).

    Returns:
        logging.Logger: Instância configurada.
    """
    logger = logging.getLogger(name)

    # Evita handlers duplicados quando o módulo é importado várias vezes
    if logger.handlers:
        return logger

    logger.setLevel(log_level)
    logger.propagate = False

    formatter = logging.Formatter(
        fmt="%(asctime)s [%(levelname)-8s] [%(name)s:%(lineno)d] [%(threadName)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    console_level = getattr(logging, os.getenv("SSR_LOG_LEVEL", "INFO").upper(), logging.INFO)
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    console_handler.setLevel(console_level)
    logger.addHandler(console_handler)

    logs_dir = _logs_dir()
    try:
        logs_dir.mkdir(parents=True, exist_ok=True)
        log_filepath = logs_dir / f"execution_{datetime.now().strftime('%Y%m%d')}.log"
        file_handler = RotatingFileHandler(
            log_filepath, maxBytes=5 * 1024 * 1024, backupCount=10, encoding="utf-8"
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(logging.DEBUG)
        logger.addHandler(file_handler)
    except OSError as e:
        # Diretório somente-leitura: segue apenas com o console
        logger.warning(f"Log em arquivo desabilitado ({logs_dir}): {e}")

    return logger


def get_module_logger(module_name):
    """
    Cria um logger com namespace 'beamforming.<modulo>'.

    Exemplo:
        >>> logger = get_module_logger('sca')
        >>> logger.info("Iteração 3 concluída")
    """
    return setup_logger(f"beamforming.{module_name}")


def generate_run_id():
    """
    Gera um identificador curto para uma execução de experimento.

    Returns:
        str: ID no formato 'run_a3f8b2e1'.
    """
    return f"run_{uuid.uuid4().hex[:8]}"


# --- Geração Aleatória Determinística ---


@dataclass(frozen=True)
class RngStream:
    """
    Sub-fluxo aleatório identificado por (seed, stream).

    O mesmo par produz os mesmos sorteios em qualquer execução e plataforma
    (Philox é um gerador baseado em contador, com chave de 128 bits).
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _UINT64_MASK)
        object.__setattr__(self, "stream", int(self.stream) & _UINT64_MASK)

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, tag: int) -> "RngStream":
        """Deriva um sub-fluxo filho, estável para o mesmo (stream, tag)."""
        state = np.random.SeedSequence([self.stream, int(tag) & _UINT64_MASK])
        child_id = int(state.generate_state(1, dtype=np.uint64)[0])
        return RngStream(self.seed, child_id)


def as_generator(rng) -> np.random.Generator:
    """Aceita RngStream ou np.random.Generator e devolve um Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"Gerador aleatório não suportado: {type(rng).__name__}")


def complex_gaussian(gen: np.random.Generator, shape) -> np.ndarray:
    """Amostras CN(0, 1): partes real e imaginária com variância 1/2."""
    return (gen.standard_normal(shape) + 1j * gen.standard_normal(shape)) / np.sqrt(2.0)
