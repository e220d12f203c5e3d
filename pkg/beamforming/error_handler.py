# -*- coding: utf-8 -*-
"""
Módulo de Tratamento de Erros (beamforming/error_handler.py).

Responsabilidade:
1. Definir a hierarquia de exceções do pacote.
2. Permitir que o harness distinga erros de entrada, de solver e de convergência.
"""


class BeamformingError(Exception):
    """
    Classe base para todas as exceções do pacote.
    Captura a mensagem e, opcionalmente, a exceção original (chaining).
    """

    def __init__(self, message, original_exception=None):
        super().__init__(message)
        self.original_exception = original_exception


class InvalidDimensionError(BeamformingError):
    """
    Levantado quando as dimensões violam uma pré-condição.
    Ex: n_tx < k_pairs, N_t < 2·|subconjunto| no ZF, vetores de tamanho errado.
    """

    pass


class NotHermitianError(BeamformingError):
    """Matriz recebida não é Hermitiana dentro da tolerância."""

    pass


class RankDeficientError(BeamformingError):
    """
    Matriz empilhada de canais sem posto coluna completo.
    Ação recomendada: descartar o subconjunto de usuários (seleção exaustiva).
    """

    pass


class SolverError(BeamformingError):
    """
    Falha do solver cônico (status diferente de ótimo).
    """

    def __init__(self, message, status=None, original_exception=None):
        super().__init__(message, original_exception)
        self.status = status


class ExtractionError(BeamformingError):
    """Resíduos de cone acima do limite ao extrair as covariâncias."""

    pass


class InitializationError(BeamformingError):
    """
    Nenhum ponto inicial aceito após init_attempts sorteios.
    Esperado para limites de erro grandes (ε ≳ 0.6).
    """

    pass


class ScaNumericalError(SolverError):
    """
    Falha numérica no meio das iterações. Carrega o último estado válido.
    """

    def __init__(self, message, last_state=None, status=None, original_exception=None):
        super().__init__(message, status=status, original_exception=original_exception)
        self.last_state = last_state


class ConfigError(BeamformingError):
    """Configuração de experimento inválida (CLI: código de saída 1)."""

    pass
