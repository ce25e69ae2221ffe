from __future__ import annotations

import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError

from pydantic_models import AdiabaticitySummary, InvariantCheck, RunReport, ScenarioConfig, complex_array

from . import config
from .dynamics import (
    TimeGrid,
    adiabaticity_report,
    coadjoint_bound,
    coadjoint_residual,
    finsler_delta_t,
    propagate_analytic,
    propagate_ode,
    x_operator,
)
from .errors import ConfigError
from .export_service import emit_adiabaticity_csv, emit_quantization_table, emit_report_json, emit_trajectory_csv
from .linalg import HermitianOperator, StateVector, hermitian_eigendecompose, trace_product
from .models import quantization_table, quantized_k, zeeman_field_tesla, zeeman_realizability
from .protocol import SolverSettings, ZermeloProblem, ZermeloSolution, energy_time_product, full_unitary, solve
from .registry import PresetProblem, build_preset, preset_eps_f

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# --- Umbrales de los invariantes del reporte ---
FIDELITY_TOL = 1e-10
TRACE_TOL = 1e-10
RESOURCE_TOL = 1e-8
VARIANCE_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-10
NORM_TOL = 1e-10
SPEED_TOL = 1e-6
ORACLE_TOL = 1e-8
FINSLER_TOL = 1e-8
SPECTRUM_TOL = 1e-8
POPULATION_SUM_TOL = 1e-10
FD_STEP = 1e-6
COADJOINT_STEP = 1e-5


# --------------------------------------------------------------------------------------
# Carga de configuración
# --------------------------------------------------------------------------------------
def load_config(path: PathLike) -> Tuple[bool, Union[ScenarioConfig, str]]:
    """
    Lee un escenario JSON (o YAML por extensión). Devuelve (True, ScenarioConfig)
    o (False, "diagnóstico").
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
        data = yaml.safe_load(text) if path.suffix.lower() in (".yaml", ".yml") else json.loads(text)
        return True, ScenarioConfig.model_validate(data)
    except OSError as e:
        return False, f"No se pudo leer {path}: {e}"
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        return False, f"{path} no es un documento válido: {e}"
    except ValidationError as e:
        return False, f"Configuración inválida en {path}:\n{e}"


def solver_settings(cfg: ScenarioConfig) -> SolverSettings:
    overrides = cfg.solver.model_dump(exclude_none=True)
    overrides.setdefault("scan_points", config.SCAN_POINTS)
    return SolverSettings(**overrides)


def resolve_k(cfg: ScenarioConfig) -> Tuple[float, Optional[float]]:
    """(k, ε_f); ε_f es None para problemas a medida."""
    eps_f = preset_eps_f(cfg.preset, cfg.parameters.model_dump()) if cfg.preset else None
    n = cfg.quantized_n
    if n is None:
        return float(cfg.k), eps_f
    return quantized_k(eps_f, n), eps_f


def build_problem(cfg: ScenarioConfig, k: float) -> PresetProblem:
    if cfg.preset is not None:
        return build_preset(cfg.preset, cfg.parameters.model_dump(), k)
    c = cfg.custom
    problem = ZermeloProblem(
        HermitianOperator(complex_array(c.h0)),
        StateVector(complex_array(c.psi_i)),
        StateVector(complex_array(c.psi_f)),
        k,
    )
    return PresetProblem(problem, eps_f=None)


# --------------------------------------------------------------------------------------
# Invariantes
# --------------------------------------------------------------------------------------
def _check(name: str, deviation: float, threshold: float) -> InvariantCheck:
    passed = bool(deviation <= threshold) and math.isfinite(deviation)
    if not passed:
        logger.warning("Invariante '%s' fuera de tolerancia: %.3e > %.1e", name, deviation, threshold)
    return InvariantCheck(name=name, max_deviation=float(deviation), threshold=threshold, passed=passed)


def invariant_checks(
    p: ZermeloProblem, sol: ZermeloSolution, samples, settings: SolverSettings, ode_steps: int
) -> List[InvariantCheck]:
    checks = []
    u = full_unitary(p, sol, sol.delta_t)
    checks.append(_check("arrival_fidelity", 1 - p.psi_f.fidelity(u.apply(p.psi_i)), FIDELITY_TOL))
    checks.append(_check("angle_law", abs(sol.residual), settings.tol * max(sol.delta_t, 1.0)))
    checks.append(_check("orthogonality", abs(p.psi_i.inner(sol.psi_f_orthonormal)), ORTHOGONALITY_TOL))
    checks.append(_check("traceless", abs(sol.hc_initial.trace()), TRACE_TOL))
    checks.append(_check("resource_bound", max(abs(s.trace_hc_sq - p.k) for s in samples), RESOURCE_TOL))
    checks.append(_check("variance_law", max(abs(s.variance_hc - p.k / 2) for s in samples), VARIANCE_TOL))
    checks.append(_check("norm", max(abs(s.norm - 1) for s in samples), NORM_TOL))

    # ‖dψ'/dt‖² = k/2 por diferencia central en la mitad del recorrido; tolerancia relativa a k/2
    t_mid = sol.delta_t / 2
    h = min(FD_STEP, t_mid)
    hc = sol.hc_initial
    hc_eig = hermitian_eigendecompose(hc)
    plus = hc_eig.exp(t_mid + h, -1).matrix @ p.psi_i.amplitudes
    minus = hc_eig.exp(t_mid - h, -1).matrix @ p.psi_i.amplitudes
    speed = float(np.linalg.norm((plus - minus) / (2 * h)) ** 2)
    checks.append(_check("speed_law", abs(speed - p.k / 2), SPEED_TOL * max(1.0, p.k / 2)))

    residual = coadjoint_residual(p.h0, hc, t_mid, COADJOINT_STEP)
    checks.append(_check("coadjoint_motion", residual, coadjoint_bound(p.h0, hc, t_mid, COADJOINT_STEP)))

    ode = propagate_ode(p, sol, TimeGrid.over(sol, ode_steps), sample_every=ode_steps)
    oracle_error = 1 - abs(ode[-1].psi.inner(samples[-1].psi)) ** 2
    checks.append(_check("oracle_equivalence", oracle_error, ORACLE_TOL))
    return checks


def finsler_check(p: ZermeloProblem, sol: ZermeloSolution) -> Optional[InvariantCheck]:
    h0_sq = trace_product(p.h0, p.h0).real
    q = trace_product(p.h0, sol.hc_initial).real
    if not (p.k + q > 0 and abs(p.k - h0_sq) > 1e-6):
        logger.info("Cierre de Finsler omitido: k + tr(H₀Hc) = %.3e, k − tr(H₀²) = %.3e", p.k + q, p.k - h0_sq)
        return None
    recovered = finsler_delta_t(x_operator(p.h0, sol.hc_initial, sol.delta_t, 0.5), p.h0, p.k)
    return _check("finsler_closure", abs(recovered - sol.delta_t), FINSLER_TOL)


# --------------------------------------------------------------------------------------
# Ejecución de escenarios
# --------------------------------------------------------------------------------------
def run_scenario(
    config_path: PathLike, output_dir: Optional[PathLike] = None, n_steps: Optional[int] = None
) -> RunReport:
    """
    Pasos 1-4 del protocolo sobre el escenario de `config_path`, con las salidas pedidas.
    Lanza ConfigError si el escenario no es válido; los errores del solver se propagan.
    """
    ok, payload = load_config(config_path)
    if not ok:
        raise ConfigError(payload)
    cfg: ScenarioConfig = payload

    name = cfg.name or Path(config_path).stem
    out = Path(output_dir or config.OUTPUT_DIR) / name
    steps = n_steps or cfg.grid.n_steps
    ode_steps = cfg.grid.ode_steps or config.ODE_STEPS
    settings = solver_settings(cfg)

    try:
        k, eps_f = resolve_k(cfg)
        built = build_problem(cfg, k)
    except (ValueError, KeyError) as e:
        raise ConfigError(f"No se pudo construir el problema de {config_path}: {e}") from e
    p = built.problem
    logger.info("Escenario '%s': dim = %d, k = %.17g", name, p.dim, k)
    if eps_f == 0 and "quantization-table" in cfg.outputs:
        raise ConfigError(f"{config_path}: la salida 'quantization-table' requiere ε_f ≠ 0")

    sol = solve(p, settings)
    report = RunReport(
        name=cfg.name,
        source=cfg.preset or "custom",
        k=k,
        eps_f=eps_f,
        delta_t=sol.delta_t,
        phi=sol.phi,
        energy_time_product=energy_time_product(sol),
        iterations=sol.iterations,
        residual=sol.residual,
        degenerate=sol.degenerate,
    )
    if built.units is not None:
        seconds = built.units.natural_time_to_seconds(sol.delta_t)
        report.delta_t_seconds = seconds
        report.delta_t_ps = seconds * 1e12
    if eps_f == 0:
        logger.info("ε_f = 0: la prueba de realizabilidad Zeeman no aplica")
    elif eps_f is not None:
        realizable, _, _ = zeeman_realizability(eps_f, k, cfg.realizability_tol)
        report.zeeman_realizable = realizable
        if realizable and built.units is not None:
            report.zeeman_field_tesla = zeeman_field_tesla(math.sqrt(k / 2))

    files = []
    if "quantization-table" in cfg.outputs:
        emit_quantization_table(quantization_table(eps_f, cfg.quantization_rows), out / "quantization.csv")
        files.append("quantization.csv")

    if sol.degenerate:
        logger.warning("Problema degenerado: ΔT = 0, no se propaga la trayectoria")
    else:
        grid = TimeGrid.over(sol, steps)
        samples = propagate_analytic(p, sol, grid)
        if "trajectory" in cfg.outputs:
            emit_trajectory_csv(samples, out / "trajectory.csv")
            files.append("trajectory.csv")
        if "invariants" in cfg.outputs:
            report.invariants.extend(invariant_checks(p, sol, samples, settings, ode_steps))
        if "finsler-check" in cfg.outputs:
            check = finsler_check(p, sol)
            if check is not None:
                report.invariants.append(check)
        if "adiabaticity" in cfg.outputs:
            adiabatic = adiabaticity_report(p, sol, grid)
            emit_adiabaticity_csv(adiabatic, out / "adiabaticity.csv")
            files.append("adiabaticity.csv")
            report.adiabaticity = AdiabaticitySummary(
                max_rate=adiabatic.max_rate,
                rate_threshold=0.1 * p.rate,
                eigenvalue_drift=adiabatic.eigenvalue_drift,
                population_drift=adiabatic.population_drift,
                flagged_samples=len(adiabatic.flagged),
            )
            report.invariants.append(_check("spectrum_constant", adiabatic.eigenvalue_drift, SPECTRUM_TOL))
            sums = np.abs(adiabatic.populations.sum(axis=1) - 1)
            report.invariants.append(_check("population_sum", float(sums.max()), POPULATION_SUM_TOL))

    files.append("report.json")
    report.files = files
    emit_report_json(report, out / "report.json")
    logger.info("Escenario '%s' terminado: ΔT = %.17g, invariantes %s", name, sol.delta_t, "OK" if report.passed else "FALLAN")
    return report


def output_name(config_path: PathLike) -> str:
    """Nombre del directorio de salida: `name` del escenario o, si falta o no carga, el nombre del archivo."""
    ok, payload = load_config(config_path)
    if ok and payload.name:
        return payload.name
    return Path(config_path).stem


def run_batch(
    directory: PathLike, output_dir: Optional[PathLike] = None, workers: Optional[int] = None,
    n_steps: Optional[int] = None,
) -> List[Tuple[Path, bool, Union[RunReport, str]]]:
    """Ejecuta todos los escenarios de `directory` en paralelo; cada uno escribe en su propio directorio.

    Los escenarios que comparten directorio de salida no se ejecutan y se reportan como fallidos.
    """
    paths = sorted(p for p in Path(directory).iterdir() if p.suffix.lower() in (".json", ".yaml", ".yml"))
    if not paths:
        logger.warning("No hay escenarios en %s", directory)
        return []

    names = {path: output_name(path) for path in paths}
    shared = {n for n, count in Counter(names.values()).items() if count > 1}

    def _one(path: Path):
        if names[path] in shared:
            others = ", ".join(o.name for o, n in names.items() if n == names[path] and o != path)
            msg = f"El directorio de salida '{names[path]}' se comparte con {others}"
            logger.error("Escenario %s omitido: %s", path.name, msg)
            return path, False, msg
        try:
            return path, True, run_scenario(path, output_dir, n_steps)
        except Exception as e:
            logger.error("Escenario %s falló: %s", path.name, e)
            return path, False, str(e)

    with ThreadPoolExecutor(max_workers=workers or config.BATCH_WORKERS) as pool:
        return list(pool.map(_one, paths))
