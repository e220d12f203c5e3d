# -*- coding: utf-8 -*-
"""
Módulo de Linha de Comando (experiments/cli.py).

Responsabilidade:
1. Expor as operações do harness como subcomandos click:
   simulate, convergence, rand-effect, compare-bounds, selftest,
   eps-sweep, users-sweep e summary (leitura de um CSV gravado).
2. Montar a configuração (arquivo chave=valor + flags) e gravar o CSV
   resultante em --out (ou na saída padrão).
3. Traduzir o resultado em código de saída:
   0 sucesso, 1 configuração inválida, 2 autoverificação reprovada,
   3 taxa de falhas do solver acima de 50%.
"""

import functools
import sys
from pathlib import Path

import click

from beamforming.error_handler import ConfigError
from beamforming.utils import setup_logger
from experiments.config import Config, build_config, read_config_file
from experiments.file_handler import read_results, render_csv, write_csv
from experiments.runner import (
    compare_bounds,
    run_convergence,
    run_eps_sweep,
    run_rand_effect,
    run_sweep,
    run_users_sweep,
)
from experiments.selftest import FAULTS, selftest

logger = setup_logger("experiments.cli")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SELFTEST = 2
EXIT_SOLVER = 3


def _progress(run_id, status, progress, message, details):
    logger.debug(f"[{run_id}] {status} {progress}% {message} {details}".rstrip())


def experiment_options(func):
    """Flags comuns a todos os subcomandos de simulação."""

    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Arquivo chave=valor.")
    @click.option("--ntx", type=int, default=None, help="Antenas de transmissão N_t.")
    @click.option("--k", "k", type=int, default=None, help="Número de pares usuário-espião.")
    @click.option("--eps", type=float, default=None, help="Raio da bola de incerteza ε.")
    @click.option("--snr", type=str, default=None, help="Lista de SNRs em dB, separadas por vírgula.")
    @click.option("--trials", type=int, default=None, help="Número de trials Monte Carlo.")
    @click.option("--methods", type=str, default=None, help="Subconjunto de sca,zf,slnr.")
    @click.option("--seed", type=int, default=None, help="Semente do gerador.")
    @click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV de saída (padrão: stdout).")
    @click.option("--workers", type=int, default=None, help="Threads para os trials.")
    @functools.wraps(func)
    def wrapper(*args, config_path=None, **kwargs):
        flags = {key: kwargs.pop(key) for key in ("ntx", "k", "eps", "snr", "trials", "methods", "seed", "out", "workers")}
        try:
            file_values = read_config_file(config_path) if config_path else {}
            cfg = build_config(file_values, flags)
        except ConfigError as e:
            click.echo(f"Erro de configuração: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        return func(cfg, *args, **kwargs)

    return wrapper


def _resolve_out(out) -> Path:
    """Nome de arquivo sem diretório vai para Config.RESULTS_DIR."""
    path = Path(out)
    if path.parent == Path("."):
        return Path(Config.RESULTS_DIR) / path
    return path


def _emit(result, cfg):
    """Grava a tabela e decide o código de saída pela taxa de falhas."""
    if cfg.out:
        path, error = write_csv(result.table, _resolve_out(cfg.out))
        if error:
            click.echo(error, err=True)
            sys.exit(EXIT_CONFIG)
        click.echo(f"Resultados gravados em {path}", err=True)
    else:
        click.echo(render_csv(result.table), nl=False)

    if result.degenerate:
        valid = result.attempts - result.failures
        click.echo(
            f"Aviso: limite inferior degenerado em {result.degenerate} de {valid} execuções válidas "
            f"(ε grande demais para o SNR).",
            err=True,
        )

    if result.failure_rate > Config.MAX_FAILURE_RATE:
        click.echo(
            f"Taxa de falhas {result.failure_rate:.0%} acima do limite de {Config.MAX_FAILURE_RATE:.0%}.",
            err=True,
        )
        sys.exit(EXIT_SOLVER)
    sys.exit(EXIT_OK)


def _run(operation, cfg, *args):
    try:
        result = operation(cfg, *args, callback=_progress)
    except ConfigError as e:
        click.echo(f"Erro de configuração: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    _emit(result, cfg)


def _parse_list(raw, convert, name):
    try:
        values = tuple(convert(v.strip()) for v in raw.split(",") if v.strip())
    except ValueError as e:
        click.echo(f"Erro de configuração: {name}: {e}", err=True)
        sys.exit(EXIT_CONFIG)
    if not values:
        click.echo(f"Erro de configuração: {name} vazia.", err=True)
        sys.exit(EXIT_CONFIG)
    return values


@click.group()
def cli():
    """Simulações de taxa de sigilo soma robusta (SCA, ZF, SLNR)."""


@cli.command()
@experiment_options
def simulate(cfg):
    """Varredura SNR × métodos: limite inferior, SSR prática e teórica."""
    _run(run_sweep, cfg)


@cli.command()
@experiment_options
def convergence(cfg):
    """Traços por iteração do SCA."""
    _run(run_convergence, cfg)


@cli.command("rand-effect")
@experiment_options
def rand_effect(cfg):
    """Relaxação SDR versus feixes aleatorizados."""
    _run(run_rand_effect, cfg)


@cli.command("compare-bounds")
@experiment_options
def compare_bounds_cmd(cfg):
    """Limite inferior, SSR prática e SSR teórica do SCA."""
    _run(compare_bounds, cfg)


@cli.command("eps-sweep")
@click.option("--eps-list", type=str, default=None, help="Valores de ε separados por vírgula.")
@experiment_options
def eps_sweep(cfg, eps_list):
    """Sensibilidade ao raio de incerteza ε."""
    values = _parse_list(eps_list, float, "eps-list") if eps_list else None
    if values and any(v < 0 for v in values):
        click.echo("Erro de configuração: eps-list com valor negativo.", err=True)
        sys.exit(EXIT_CONFIG)
    _run(run_eps_sweep, cfg, values)


@cli.command("users-sweep")
@click.option("--k-list", type=str, default=None, help="Valores de K separados por vírgula.")
@experiment_options
def users_sweep(cfg, k_list):
    """SSR normalizada por usuário em função de K."""
    values = _parse_list(k_list, int, "k-list") if k_list else None
    _run(run_users_sweep, cfg, values)


@cli.command("selftest")
@click.option("--fault", type=click.Choice(sorted(FAULTS)), default=None, help="Falha a injetar (teste do teste).")
def selftest_cmd(fault):
    """Verificações de invariantes de todos os módulos em tamanhos pequenos."""
    report = selftest(fault=fault)
    for line in report.summary_lines():
        click.echo(line)
    if not report.passed:
        click.echo(f"Verificações reprovadas: {', '.join(report.failed_names)}", err=True)
        sys.exit(EXIT_SELFTEST)
    sys.exit(EXIT_OK)


@cli.command()
@click.argument("results", type=click.Path(dir_okay=False))
@click.option("--metric", default="lb_ssr", show_default=True, help="Métrica a tabular.")
def summary(results, metric):
    """Médias de uma métrica de um CSV gravado, em tabela SNR × método."""
    df, error = read_results(results)
    if error:
        click.echo(error, err=True)
        sys.exit(EXIT_CONFIG)
    missing = [c for c in ("snr_db", "method", "metric", "mean") if c not in df.columns]
    if missing:
        click.echo(f"Arquivo sem as colunas {', '.join(missing)}.", err=True)
        sys.exit(EXIT_CONFIG)

    rows = df[df["metric"] == metric]
    if rows.empty:
        click.echo(f"Métrica '{metric}' ausente em {results}.", err=True)
        sys.exit(EXIT_CONFIG)
    index = [c for c in ("eps", "k") if c in df.columns] + ["snr_db"]
    table = rows.pivot_table(index=index, columns="method", values="mean", sort=False, dropna=False)
    click.echo(table.to_string(float_format=lambda v: f"{v:.4f}"))
    sys.exit(EXIT_OK)


def main():
    cli()


if __name__ == "__main__":
    main()
