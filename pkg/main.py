# --- Standard Imports ---
import logging
import sys
from pathlib import Path
from typing import Optional

import click

# --- Project-specific Core Imports ---
from core import config, scenario_service
from core.errors import ConfigError, ZermeloError
from core.export_service import emit_quantization_table
from core.models import quantization_table

logger = logging.getLogger("zermelo")

# Códigos de salida
EXIT_OK = 0
EXIT_INVARIANT_FAILED = 1
EXIT_CONFIG_OR_SOLVER = 2


def _configure_logging(quiet: bool) -> None:
    logging.basicConfig(format="%(levelname)s: %(message)s", level=config.LOG_LEVEL)
    logging.getLogger().setLevel(logging.ERROR if quiet else config.LOG_LEVEL)


def _summary(report) -> str:
    lines = [f"ΔT = {report.delta_t:.17g}   φ = {report.phi:.17g}   k = {report.k:.17g}"]
    if report.delta_t_ps is not None:
        lines.append(f"ΔT = {report.delta_t_ps:.6g} ps")
    if report.degenerate:
        lines.append("Problema degenerado: no hace falta control")
    for check in report.invariants:
        mark = "OK " if check.passed else "FALLA"
        lines.append(f"  [{mark}] {check.name}: {check.max_deviation:.3e} (umbral {check.threshold:.1e})")
    return "\n".join(lines)


@click.group()
def cli():
    """Navegación cuántica de Zermelo en tiempo mínimo."""


# ============================
#           RUN
# ============================
@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--output-dir", type=click.Path(file_okay=False), default=None, help="Directorio de resultados.")
@click.option("--steps", type=click.IntRange(min=2), default=None, help="Pasos de la malla de salida.")
@click.option("--quiet", is_flag=True, help="Solo errores en el log.")
def run(config_path: str, output_dir: Optional[str], steps: Optional[int], quiet: bool):
    """Resuelve y verifica un escenario."""
    _configure_logging(quiet)
    try:
        report = scenario_service.run_scenario(config_path, output_dir, steps)
    except ConfigError as e:
        logger.error("%s", e)
        sys.exit(EXIT_CONFIG_OR_SOLVER)
    except ZermeloError as e:
        logger.error("Fallo numérico: %s", e)
        sys.exit(EXIT_CONFIG_OR_SOLVER)
    except OSError as e:
        logger.error("No se pudieron escribir los resultados: %s", e)
        sys.exit(EXIT_CONFIG_OR_SOLVER)
    if not quiet:
        click.echo(_summary(report))
    sys.exit(EXIT_OK if report.passed else EXIT_INVARIANT_FAILED)


# ============================
#           BATCH
# ============================
@cli.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--steps", type=click.IntRange(min=2), default=None)
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Hilos concurrentes.")
@click.option("--quiet", is_flag=True)
def batch(directory: str, output_dir: Optional[str], steps: Optional[int], workers: Optional[int], quiet: bool):
    """Ejecuta en paralelo todos los escenarios de un directorio."""
    _configure_logging(quiet)
    results = scenario_service.run_batch(directory, output_dir, workers, steps)
    code = EXIT_OK
    for path, ok, payload in results:
        if not ok:
            code = EXIT_CONFIG_OR_SOLVER
            status = "ERROR"
        elif not payload.passed:
            code = max(code, EXIT_INVARIANT_FAILED)
            status = "FALLA"
        else:
            status = "OK"
        if not quiet:
            click.echo(f"{status:6} {Path(path).name}")
    sys.exit(code)


# ============================
#           TABLE
# ============================
@cli.command()
@click.option("--eps-f", "eps_f", type=float, required=True, help="Energía del estado final.")
@click.option("--rows", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), required=True)
def table(eps_f: float, rows: int, output: str):
    """Escribe la tabla n, k_n, ΔT_n de controles tipo Zeeman."""
    _configure_logging(False)
    try:
        emit_quantization_table(quantization_table(eps_f, rows), output)
    except (ValueError, OSError) as e:
        logger.error("%s", e)
        sys.exit(EXIT_CONFIG_OR_SOLVER)


if __name__ == "__main__":
    cli()
