# -*- coding: utf-8 -*-
"""
Módulo de Validações de Experimento.

Cada função valida UMA regra da configuração e retorna
(True, "") se válido ou (False, "Mensagem de Erro") se inválido.
"""

import math

KNOWN_METHODS = ("sca", "zf", "slnr")
SELECTION_MODES = ("exhaustive", "heuristic")


def validate_positive_int(value, field_name):
    """
    /// Inteiros estritamente positivos (trials, n_tx, k_pairs, max_iter...).
    """
    if isinstance(value, bool) or not isinstance(value, int):
        return False, f"{field_name}: esperado inteiro (recebeu {value!r})."
    if value < 1:
        return False, f"{field_name}: deve ser ≥ 1 (recebeu {value})."
    return True, ""


def validate_dimensions(n_tx, k_pairs):
    ok, msg = validate_positive_int(n_tx, "ntx")
    if not ok:
        return ok, msg
    ok, msg = validate_positive_int(k_pairs, "k")
    if not ok:
        return ok, msg
    if n_tx < k_pairs:
        return False, f"É necessário ntx ≥ k (recebeu ntx={n_tx}, k={k_pairs})."
    return True, ""


def validate_eps(value):
    """
    /// Raio da bola de incerteza: real finito e não negativo.
    """
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        return False, f"eps: esperado número real (recebeu {value!r})."
    if not math.isfinite(value) or value < 0:
        return False, f"eps: deve ser finito e ≥ 0 (recebeu {value})."
    return True, ""


def validate_snr_list(values):
    if not values:
        return False, "snr: lista vazia."
    for v in values:
        if not isinstance(v, (int, float)) or not math.isfinite(v):
            return False, f"snr: valor inválido {v!r}."
    return True, ""


def validate_methods(methods):
    if not methods:
        return False, "methods: nenhum método informado."
    unknown = [m for m in methods if m not in KNOWN_METHODS]
    if unknown:
        return False, f"methods: desconhecidos {unknown} (válidos: {', '.join(KNOWN_METHODS)})."
    if len(set(methods)) != len(methods):
        return False, "methods: métodos repetidos."
    return True, ""


def validate_selection_mode(mode):
    if mode not in SELECTION_MODES:
        return False, f"selection: modo '{mode}' inválido (válidos: {', '.join(SELECTION_MODES)})."
    return True, ""


def validate_positive_float(value, field_name):
    if not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        return False, f"{field_name}: deve ser real positivo (recebeu {value!r})."
    return True, ""
