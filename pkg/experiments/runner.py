# -*- coding: utf-8 -*-
"""
Módulo Orquestrador de Experimentos (experiments/runner.py).

Responsabilidade:
1. Executar as varreduras Monte Carlo: para cada trial, sortear os canais
   estimados e uma realização verdadeira, projetar os feixes de cada método e
   avaliar o limite inferior, a SSR prática e a SSR teórica.
2. Estudos específicos: convergência do SCA, efeito da aleatorização,
   comparação dos limites, sensibilidade a ε e ao número de pares.
3. Agregar os trials (média e desvio padrão amostral, n−1) em tabelas pandas
   no formato fixo de CSV.

Determinismo: cada trial usa o sub-fluxo RngStream(seed).child(trial); canais
são sorteados uma vez por trial e compartilhados por todas as SNRs e métodos
(comparação pareada). A ordem de agregação segue o índice do trial, então a
execução paralela não altera nenhum byte da saída.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import pandas as pd

from beamforming.channel import ChannelSet, TrueChannelInstance, sample_channel_set, sample_true_instance
from beamforming.error_handler import BeamformingError, ConfigError
from beamforming.rates import BeamformerSet, evaluate_lower_bound, ssr_clamped, ssr_exact
from beamforming.sca import run_sca, trace_rows
from beamforming.slnr import slnr_beamformers
from beamforming.utils import RngStream, generate_run_id, setup_logger
from beamforming.zf import zf_design
from experiments.config import ExperimentConfig
from experiments.file_handler import SCHEMA_COLUMNS, TRACE_COLUMNS
from experiments.validators import validate_dimensions

logger = setup_logger("experiments.runner")

METRICS = ("lb_ssr", "practical_ssr", "theoretical_ssr", "lb_ssr_per_user", "degenerate_fraction", "iterations")
BOUND_METRICS = ("lb_ssr", "practical_ssr", "theoretical_ssr")
RAND_COLUMNS = ["trial", "snr_db", "relaxed_ssr", "randomized_ssr", "relative_gap", "rank_one"]

# Sub-fluxos por trial
_STREAM_CHANNEL, _STREAM_TRUE, _STREAM_DESIGN, _STREAM_IDEAL = 0, 1, 2, 3

StatusCallback = Callable[[str, str, int, str, str], None]


def _silent_callback(run_id, status, progress, message, details):
    pass


# --- Tipos de resultado ---


@dataclass(frozen=True)
class Design:
    """Feixes de um método e os pares efetivamente atendidos."""

    beamformers: BeamformerSet
    served: Tuple[int, ...]
    iterations: float = math.nan
    relaxation_value: float = math.nan
    rank_one: bool = True


@dataclass(frozen=True)
class MethodOutcome:
    trial: int
    snr_db: float
    method: str
    lb_ssr: float = math.nan
    practical_ssr: float = math.nan
    theoretical_ssr: float = math.nan
    lb_ssr_per_user: float = math.nan
    ssr_clamped: float = math.nan
    iterations: float = math.nan
    degenerate: bool = False
    failure: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.failure)


@dataclass
class SweepResult:
    """
    table: tabela pronta para CSV.
    failures/attempts: contagem de execuções de método que falharam.
    degenerate: execuções válidas cujo limite inferior precisou de corte.
    """

    table: pd.DataFrame
    failures: int
    attempts: int
    run_id: str
    details: Optional[pd.DataFrame] = None
    outcomes: List[MethodOutcome] = field(default_factory=list)
    degenerate: int = 0

    @property
    def failure_rate(self) -> float:
        return self.failures / self.attempts if self.attempts else 0.0


@dataclass(frozen=True, eq=False)
class TrialChannels:
    trial: int
    cs: ChannelSet
    true: TrueChannelInstance
    stream: RngStream

    @property
    def cs_true(self) -> ChannelSet:
        """Canais verdadeiros tratados como conhecidos (ε = 0)."""
        return self.true.as_channel_set(self.cs, 0.0)


# --- Blocos de um trial ---


def draw_trial(cfg: ExperimentConfig, trial: int) -> TrialChannels:
    stream = RngStream(cfg.seed).child(trial)
    noise = cfg.noise_variance
    cs = sample_channel_set(cfg.n_tx, cfg.k_pairs, cfg.eps, noise, noise, stream.child(_STREAM_CHANNEL))
    true = sample_true_instance(cs, stream.child(_STREAM_TRUE))
    return TrialChannels(trial, cs, true, stream)


def design_beamformers(method: str, cs: ChannelSet, P: float, cfg: ExperimentConfig, rng) -> Design:
    """
    Projeta os feixes de um método.

    Raises:
        BeamformingError: falhas de inicialização, solver ou posto (contadas pelo chamador).
    """
    everyone = tuple(range(cs.k_pairs))
    if method == "sca":
        result = run_sca(cs, P, cfg.sca, rng)
        return Design(
            result.beamformers,
            everyone,
            iterations=float(result.iterations),
            relaxation_value=result.relaxation_value,
            rank_one=result.rank_one,
        )
    if method == "zf":
        design = zf_design(cs, P, cfg.selection)
        return Design(design.beamformers, design.selected)
    if method == "slnr":
        return Design(slnr_beamformers(cs, P), everyone)
    raise ConfigError(f"Método desconhecido: {method}")


def _theoretical_ssr(method, channels: TrialChannels, P, cfg) -> float:
    """Mesmo método projetado sobre os canais verdadeiros, avaliado pela SSR exata."""
    cs_true = channels.cs_true
    try:
        ideal = design_beamformers(method, cs_true, P, cfg, channels.stream.child(_STREAM_IDEAL))
    except BeamformingError as e:
        logger.warning(f"[trial {channels.trial}] Projeto teórico ({method}) falhou: {e}")
        return math.nan
    return ssr_exact(cs_true.subset(ideal.served), ideal.beamformers)


def evaluate_method(cfg: ExperimentConfig, channels: TrialChannels, method: str, snr_db: float) -> MethodOutcome:
    P = cfg.power_for(snr_db)
    try:
        design = design_beamformers(method, channels.cs, P, cfg, channels.stream.child(_STREAM_DESIGN))
    except BeamformingError as e:
        logger.warning(f"[trial {channels.trial}] {method} @ {snr_db} dB falhou: {type(e).__name__}: {e}")
        return MethodOutcome(channels.trial, snr_db, method, failure=type(e).__name__)

    served = list(design.served)
    cs_served = channels.cs.subset(served)
    true_served = channels.true.subset(served)
    bound = evaluate_lower_bound(cs_served, design.beamformers)
    practical = ssr_exact(true_served, design.beamformers, cs_served.sigma2, cs_served.varsigma2)
    clamped = ssr_clamped(true_served, design.beamformers, cs_served.sigma2, cs_served.varsigma2)
    theoretical = _theoretical_ssr(method, channels, P, cfg) if cfg.theoretical else math.nan

    return MethodOutcome(
        trial=channels.trial,
        snr_db=snr_db,
        method=method,
        lb_ssr=bound.value,
        practical_ssr=practical,
        theoretical_ssr=theoretical,
        lb_ssr_per_user=bound.value / cfg.k_pairs,
        ssr_clamped=clamped,
        iterations=design.iterations,
        degenerate=bound.degenerate,
    )


def run_trial(cfg: ExperimentConfig, trial: int) -> List[MethodOutcome]:
    channels = draw_trial(cfg, trial)
    return [
        evaluate_method(cfg, channels, method, snr_db)
        for snr_db in cfg.snr_db_list
        for method in cfg.methods
    ]


def _map_trials(cfg: ExperimentConfig, work, run_id: str, callback: StatusCallback, label: str) -> list:
    """
    Executa `work(cfg, trial)` para todos os trials, preservando a ordem.
    Com cfg.workers > 1 usa um pool de threads (map ordenado).
    """
    results = []
    total = cfg.trials

    def report(done):
        progress = 5 + int(90 * done / total)
        callback(run_id, "processing", progress, f"{label}: trial {done}/{total}", "")

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers, thread_name_prefix="trial") as pool:
            for done, result in enumerate(pool.map(lambda t: work(cfg, t), range(total)), start=1):
                results.append(result)
                report(done)
    else:
        for trial in range(total):
            results.append(work(cfg, trial))
            report(trial + 1)
    return results


# --- Agregação ---


def _stats(values: pd.Series) -> Tuple[float, float]:
    values = values.dropna()
    mean = float(values.mean()) if len(values) else math.nan
    std = float(values.std(ddof=1)) if len(values) > 1 else math.nan
    return mean, std


def aggregate(outcomes: Sequence[MethodOutcome], cfg: ExperimentConfig) -> pd.DataFrame:
    """
    Uma linha por (snr, método, métrica). stddev usa o estimador não viesado (n−1);
    'trials' é o total pedido e 'failures' quantos trials do método falharam.
    'degenerate_fraction' é a fração dos trials válidos com limite inferior cortado.
    """
    frame = pd.DataFrame([asdict(o) for o in outcomes])
    frame["degenerate_fraction"] = frame["degenerate"].astype(float)
    metrics = list(METRICS)
    if not cfg.theoretical:
        metrics.remove("theoretical_ssr")
    if cfg.report_clamped:
        metrics.append("ssr_clamped")

    rows = []
    for snr_db in cfg.snr_db_list:
        for method in cfg.methods:
            group = frame[(frame["snr_db"] == snr_db) & (frame["method"] == method)]
            ok = group[group["failure"] == ""]
            failures = int(len(group) - len(ok))
            for metric in metrics:
                if metric == "iterations" and method != "sca":
                    continue
                mean, std = _stats(ok[metric])
                rows.append(
                    {
                        "snr_db": float(snr_db),
                        "method": method,
                        "metric": metric,
                        "mean": mean,
                        "stddev": std,
                        "trials": int(cfg.trials),
                        "failures": failures,
                    }
                )
    return pd.DataFrame(rows, columns=SCHEMA_COLUMNS)


# --- Operações do harness ---


def run_sweep(cfg: ExperimentConfig, callback: Optional[StatusCallback] = None) -> SweepResult:
    """
    Varredura SNR × métodos com trials pareados.
    Falhas por trial são registradas e contadas, nunca fatais.
    """
    callback = callback or _silent_callback
    run_id = generate_run_id()
    logger.info(
        f"[{run_id}] Varredura: N_t={cfg.n_tx}, K={cfg.k_pairs}, eps={cfg.eps}, "
        f"SNR={list(cfg.snr_db_list)}, métodos={list(cfg.methods)}, trials={cfg.trials}"
    )
    callback(run_id, "processing", 5, "Sorteando canais...", "")

    per_trial = _map_trials(cfg, run_trial, run_id, callback, "Varredura")
    outcomes = [o for trial_outcomes in per_trial for o in trial_outcomes]
    table = aggregate(outcomes, cfg)
    failures = sum(o.failed for o in outcomes)
    degenerate = sum(o.degenerate for o in outcomes if not o.failed)

    logger.info(
        f"[{run_id}] Varredura concluída: {len(outcomes)} avaliações, {failures} falhas, "
        f"{degenerate} com limite degenerado."
    )
    callback(run_id, "completed", 100, "Varredura concluída.", f"{failures} falhas")
    return SweepResult(table, failures, len(outcomes), run_id, outcomes=outcomes, degenerate=degenerate)


def _sca_runs(cfg: ExperimentConfig, trial: int):
    """Executa o SCA para todas as SNRs de um trial; falhas viram None."""
    channels = draw_trial(cfg, trial)
    runs = []
    for snr_db in cfg.snr_db_list:
        try:
            result = run_sca(channels.cs, cfg.power_for(snr_db), cfg.sca, channels.stream.child(_STREAM_DESIGN))
        except BeamformingError as e:
            logger.warning(f"[trial {trial}] SCA @ {snr_db} dB falhou: {type(e).__name__}: {e}")
            result = None
        runs.append((snr_db, result))
    return runs


def run_convergence(cfg: ExperimentConfig, callback: Optional[StatusCallback] = None) -> SweepResult:
    """
    Traços por iteração do SCA: linhas (trial, snr_db, iter, objective_bits,
    max_constraint_residual).
    """
    callback = callback or _silent_callback
    run_id = generate_run_id()
    logger.info(f"[{run_id}] Convergência do SCA: {cfg.trials} trials, SNR={list(cfg.snr_db_list)}")

    per_trial = _map_trials(cfg, _sca_runs, run_id, callback, "Convergência")
    rows, failures, attempts = [], 0, 0
    for trial, runs in enumerate(per_trial):
        for snr_db, result in runs:
            attempts += 1
            if result is None:
                failures += 1
                continue
            for iteration, objective, residual in trace_rows(result.state):
                rows.append([trial, float(snr_db), iteration, objective, residual])

    table = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    callback(run_id, "completed", 100, "Traços gerados.", f"{failures} falhas")
    return SweepResult(table, failures, attempts, run_id)


def run_rand_effect(cfg: ExperimentConfig, callback: Optional[StatusCallback] = None) -> SweepResult:
    """
    Relaxação SDR (sem aleatorização) versus feixes recuperados (com aleatorização).

    'relaxed_ssr' é o limite inferior avaliado nas covariâncias relaxadas;
    'randomized_ssr' é o mesmo limite nos feixes posto-um.
    """
    callback = callback or _silent_callback
    run_id = generate_run_id()
    logger.info(f"[{run_id}] Efeito da aleatorização: {cfg.trials} trials")

    per_trial = _map_trials(cfg, _sca_runs, run_id, callback, "Aleatorização")
    detail_rows, failures, attempts = [], 0, 0
    for trial, runs in enumerate(per_trial):
        for snr_db, result in runs:
            attempts += 1
            if result is None:
                failures += 1
                continue
            relaxed, randomized = result.relaxation_value, result.lower_bound_value
            gap = (relaxed - randomized) / abs(relaxed) if abs(relaxed) > 1e-12 else 0.0
            detail_rows.append([trial, float(snr_db), relaxed, randomized, gap, result.rank_one])
    details = pd.DataFrame(detail_rows, columns=RAND_COLUMNS)

    rows = []
    for snr_db in cfg.snr_db_list:
        group = details[details["snr_db"] == float(snr_db)]
        group_failures = cfg.trials - len(group)
        for metric, column in (("relaxed_ssr", "relaxed_ssr"), ("randomized_ssr", "randomized_ssr"), ("relative_gap", "relative_gap")):
            mean, std = _stats(group[column])
            rows.append([float(snr_db), "sca", metric, mean, std, int(cfg.trials), int(group_failures)])
    table = pd.DataFrame(rows, columns=SCHEMA_COLUMNS)

    if len(details):
        logger.info(f"[{run_id}] Gap relativo médio: {details['relative_gap'].mean():.3e}")
    callback(run_id, "completed", 100, "Estudo de aleatorização concluído.", f"{failures} falhas")
    return SweepResult(table, failures, attempts, run_id, details=details)


def compare_bounds(cfg: ExperimentConfig, callback: Optional[StatusCallback] = None) -> SweepResult:
    """
    Limite inferior × SSR prática × SSR teórica para o SCA.
    """
    study = replace(cfg, methods=("sca",), theoretical=True)
    result = run_sweep(study, callback)
    keep = list(BOUND_METRICS) + (["ssr_clamped"] if cfg.report_clamped else [])
    result.table = result.table[result.table["metric"].isin(keep)].reset_index(drop=True)
    return result


def run_eps_sweep(cfg: ExperimentConfig, eps_list: Optional[Sequence[float]] = None, callback: Optional[StatusCallback] = None) -> SweepResult:
    """Repete run_sweep para cada ε (mesmos sorteios de canal); coluna 'eps' à esquerda."""
    eps_list = tuple(eps_list if eps_list is not None else cfg.eps_list)
    tables, failures, attempts, degenerate = [], 0, 0, 0
    run_id = generate_run_id()
    for eps in eps_list:
        logger.info(f"[{run_id}] Sensibilidade a ε: eps={eps}")
        result = run_sweep(replace(cfg, eps=float(eps)), callback)
        table = result.table.copy()
        table.insert(0, "eps", float(eps))
        tables.append(table)
        failures += result.failures
        attempts += result.attempts
        degenerate += result.degenerate
    return SweepResult(pd.concat(tables, ignore_index=True), failures, attempts, run_id, degenerate=degenerate)


def run_users_sweep(cfg: ExperimentConfig, k_list: Optional[Sequence[int]] = None, callback: Optional[StatusCallback] = None) -> SweepResult:
    """
    Repete run_sweep para cada número de pares K; coluna 'k' à esquerda.

    Raises:
        ConfigError: algum K maior que N_t.
    """
    k_list = tuple(k_list if k_list is not None else cfg.k_list)
    for k in k_list:
        ok, msg = validate_dimensions(cfg.n_tx, k)
        if not ok:
            raise ConfigError(msg)

    tables, failures, attempts, degenerate = [], 0, 0, 0
    run_id = generate_run_id()
    for k in k_list:
        logger.info(f"[{run_id}] Número de pares: K={k}")
        result = run_sweep(replace(cfg, k_pairs=int(k)), callback)
        table = result.table.copy()
        table.insert(0, "k", int(k))
        tables.append(table)
        failures += result.failures
        attempts += result.attempts
        degenerate += result.degenerate
    return SweepResult(pd.concat(tables, ignore_index=True), failures, attempts, run_id, degenerate=degenerate)
