# -*- coding: utf-8 -*-
"""
Módulo de Autoverificação (experiments/selftest.py).

Responsabilidade:
1. Executar, em tamanhos pequenos (N_t ≤ 8, K ≤ 4), as verificações de
   invariantes de cada módulo numérico: canal, taxas, imersão cônica, SCA, ZF e SLNR.
2. Relatar cada verificação pelo nome, com o detalhe da primeira violação.
3. Permitir injeção de falhas (ex.: water-filling corrompido) para validar
   que a própria autoverificação detecta erros.

Uma verificação que levanta exceção conta como falha, com o nome da exceção
no detalhe; a execução continua nas demais.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from beamforming.channel import inner_product_extreme, sample_channel_set, sample_true_instance
from beamforming.conic import audit_size, build_sca_subproblem, herm_to_real, program_size, real_to_herm
from beamforming.rates import BeamformerSet, ssr_exact, ssr_lower_bound
from beamforming.sca import ScaConfig, run_sca, update_tilde
from beamforming.slnr import slnr_beamformers
from beamforming.utils import RngStream, complex_gaussian, generate_run_id, setup_logger
from beamforming.zf import PowerAllocation, kkt_violation, nulling_residual, waterfill, zf_directions

logger = setup_logger("experiments.selftest")

SELFTEST_SEED = 7

# Folga relativa entre limite e SSR prática (o limite despreza o termo de segunda ordem em ε)
BOUND_REL_TOL = 1e-6

# (n_tx, k_pairs) dos casos pequenos
SMALL_SHAPES: Tuple[Tuple[int, int], ...] = ((2, 1), (4, 2), (8, 4))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class SelftestReport:
    run_id: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed_names(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def summary_lines(self) -> List[str]:
        lines = []
        for c in self.checks:
            mark = "OK  " if c.passed else "FALHA"
            suffix = f" ({c.detail})" if c.detail else ""
            lines.append(f"[{mark}] {c.name} {c.seconds:.2f}s{suffix}")
        return lines


# --- Falhas injetáveis ---


def _halved_waterfill(dirs, cs, P) -> PowerAllocation:
    alloc = waterfill(dirs, cs, P)
    return PowerAllocation(alloc.P * 0.5, alloc.lam, alloc.active, alloc.no_eligible)


FAULTS: Dict[str, Dict[str, Callable]] = {
    "waterfill": {"waterfill": _halved_waterfill},
}


# --- Verificações ---


def _instances(stream: RngStream, eps: float, count: int = 4):
    for n, (n_tx, k_pairs) in enumerate(SMALL_SHAPES):
        for j in range(count):
            yield sample_channel_set(n_tx, k_pairs, eps, 1.0, 1.0, stream.child(100 * n + j))


def check_ball_radius(stream, hooks):
    for cs in _instances(stream, 0.3):
        true = sample_true_instance(cs, stream.child(999))
        worst = max(np.linalg.norm(true.dh, axis=1).max(), np.linalg.norm(true.dg, axis=1).max())
        if worst > cs.eps * (1 + 1e-12):
            return False, f"perturbação {worst:.6g} > eps={cs.eps}"
    return True, ""


def check_inner_product_extremes(stream, hooks):
    gen = stream.child(1).generator()
    for _ in range(20):
        y = complex_gaussian(gen, 4)
        x, value = inner_product_extreme(y, 0.2, "max")
        if abs(np.real(np.vdot(x, y)) - value) > 1e-12 or abs(value - 0.2 * np.linalg.norm(y)) > 1e-12:
            return False, f"extremo não atinge ε‖y‖ ({value:.6g})"
    return True, ""


def check_eps_zero_collapse(stream, hooks):
    gen = stream.child(2).generator()
    for cs in _instances(stream, 0.0):
        w = complex_gaussian(gen, (cs.k_pairs, cs.n_tx))
        bf = BeamformerSet(w * np.sqrt(10.0 / np.sum(np.abs(w) ** 2)), 10.0)
        gap = abs(ssr_lower_bound(cs, bf) - ssr_exact(cs, bf))
        if gap >= 1e-9:
            return False, f"|limite − exato| = {gap:.3e} com eps=0"
    return True, ""


def check_lower_bound_below_practical(stream, hooks):
    gen = stream.child(3).generator()
    for cs in _instances(stream, 0.1):
        w = complex_gaussian(gen, (cs.k_pairs, cs.n_tx))
        bf = BeamformerSet(w * np.sqrt(10.0 / np.sum(np.abs(w) ** 2)), 10.0)
        bound = ssr_lower_bound(cs, bf)
        for j in range(10):
            true = sample_true_instance(cs, stream.child(3000 + j))
            practical = ssr_exact(true, bf, cs.sigma2, cs.varsigma2)
            if bound > practical + BOUND_REL_TOL * max(1.0, abs(practical)):
                return False, f"limite {bound:.6g} > SSR prática {practical:.6g}"
    return True, ""


def check_embedding_psd(stream, hooks):
    gen = stream.child(4).generator()
    for n in (1, 2, 4):
        X = complex_gaussian(gen, (n, n))
        W = X @ X.conj().T
        M = herm_to_real(W)
        if np.linalg.eigvalsh(M)[0] < -1e-9:
            return False, f"imersão de matriz PSD com autovalor negativo (n={n})"
        if not np.allclose(real_to_herm(M), W, atol=1e-12):
            return False, f"ida e volta da imersão falhou (n={n})"
    return True, ""


def check_subproblem_size(stream, hooks):
    for cs in _instances(stream, 0.1, count=1):
        y_tilde, p_tilde = update_tilde(np.zeros((cs.k_pairs, cs.n_tx, cs.n_tx), dtype=complex), cs)
        prog = build_sca_subproblem(cs, 10.0, y_tilde, p_tilde)
        expected, actual = program_size(cs.n_tx, cs.k_pairs), audit_size(prog)
        if expected != actual:
            return False, f"tamanho {actual} ≠ esperado {expected}"
    return True, ""


def check_sca_monotone(stream, hooks):
    cs = sample_channel_set(3, 2, 0.1, 1.0, 1.0, stream.child(5))
    result = run_sca(cs, 10.0, ScaConfig(max_iter=10, randomization_samples=20), stream.child(6))
    trace = np.asarray(result.trace)
    drops = np.diff(trace)
    if drops.size and drops.min() < -1e-6:
        return False, f"objetivo decresceu {drops.min():.3e} bits"
    if result.lower_bound_value > result.relaxation_value + 1e-6:
        return False, "feixes recuperados acima da relaxação"
    if result.beamformers.total_power > 10.0 * (1 + 1e-9):
        return False, "orçamento de potência violado"
    tightness = max(result.state.activity_trace)
    if tightness > 1e-5:
        return False, f"restrições não ativas no ótimo (folga {tightness:.3e})"
    return True, ""


def check_zf_nulling(stream, hooks):
    for j in range(5):
        cs = sample_channel_set(8, 4, 0.0, 1.0, 1.0, stream.child(700 + j))
        residual = nulling_residual(zf_directions(cs), cs)
        if residual >= 1e-8:
            return False, f"resíduo de anulação {residual:.3e}"
    return True, ""


def check_waterfill_kkt(stream, hooks):
    allocate = hooks.get("waterfill", waterfill)
    for j in range(20):
        cs = sample_channel_set(4, 2, 0.1, 1.0, 1.0, stream.child(800 + j))
        dirs = zf_directions(cs)
        P = 10.0 ** (j % 4)
        violation = kkt_violation(dirs, cs, allocate(dirs, cs, P), P)
        if violation > 1e-8:
            return False, f"KKT violada em {violation:.3e} (P={P:g})"
    return True, ""


def check_slnr_power(stream, hooks):
    for cs in _instances(stream, 0.1, count=2):
        bf = slnr_beamformers(cs, 10.0)
        if abs(bf.total_power - 10.0) > 1e-9:
            return False, f"potência total {bf.total_power:.9g} ≠ 10"
    return True, ""


CHECKS: Tuple[Tuple[str, Callable], ...] = (
    ("channel.ball_radius", check_ball_radius),
    ("channel.inner_product_extremes", check_inner_product_extremes),
    ("rates.eps_zero_collapse", check_eps_zero_collapse),
    ("rates.lower_bound_below_practical", check_lower_bound_below_practical),
    ("conic.embedding_psd", check_embedding_psd),
    ("conic.subproblem_size", check_subproblem_size),
    ("sca.monotone_and_tight", check_sca_monotone),
    ("zf.nulling", check_zf_nulling),
    ("zf.waterfill_kkt", check_waterfill_kkt),
    ("slnr.power_budget", check_slnr_power),
)


def selftest(fault: Optional[str] = None, seed: int = SELFTEST_SEED) -> SelftestReport:
    """
    Executa todas as verificações.

    Args:
        fault: nome de uma falha de FAULTS a injetar (None = execução normal).

    Raises:
        KeyError: falha desconhecida.
    """
    hooks = FAULTS[fault] if fault else {}
    report = SelftestReport(run_id=generate_run_id())
    stream = RngStream(seed)
    logger.info(f"[{report.run_id}] Autoverificação iniciada ({len(CHECKS)} verificações, falha injetada: {fault})")

    for index, (name, check) in enumerate(CHECKS):
        start = time.perf_counter()
        try:
            passed, detail = check(stream.child(index), hooks)
        except Exception as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        elapsed = time.perf_counter() - start
        report.checks.append(CheckResult(name, passed, detail, elapsed))
        if passed:
            logger.debug(f"[{report.run_id}] {name}: OK em {elapsed:.2f}s")
        else:
            logger.error(f"[{report.run_id}] {name}: FALHA ({detail})")

    logger.info(f"[{report.run_id}] Autoverificação {'aprovada' if report.passed else 'reprovada'}.")
    return report
