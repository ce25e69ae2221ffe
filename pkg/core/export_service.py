import csv
import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np

from .dynamics import AdiabaticityReport, TrajectorySample
from .models import QuantizationTable

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _open_for_write(path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8")


# --------------------------------------------------------------------------------------
# Trayectorias
# --------------------------------------------------------------------------------------
def trajectory_header(dim: int) -> List[str]:
    header = ["t", "fidelity", "norm", "trace_hc_sq", "variance_hc"]
    for j in range(dim):
        header += [f"re_psi_{j}", f"im_psi_{j}"]
    return header


def emit_trajectory_csv(samples: Sequence[TrajectorySample], path: PathLike) -> Path:
    """
    Escribe una fila por muestra. Los flotantes van con 17 cifras significativas,
    así que releer el archivo reproduce los valores bit a bit.
    """
    if not samples:
        raise ValueError("No hay muestras que escribir")
    dim = samples[0].psi.dim
    try:
        with _open_for_write(path) as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(trajectory_header(dim))
            for s in samples:
                row = [s.t, s.fidelity_to_target, s.norm, s.trace_hc_sq, s.variance_hc]
                for amp in s.psi.amplitudes:
                    row += [amp.real, amp.imag]
                writer.writerow([_fmt(x) for x in row])
    except OSError as e:
        logger.error("No se pudo escribir la trayectoria en %s: %s", path, e)
        raise
    logger.info("Trayectoria escrita: %s (%d muestras)", path, len(samples))
    return Path(path)


def read_trajectory_csv(path: PathLike) -> Tuple[List[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    return rows[0], np.array([[float(x) for x in row] for row in rows[1:]])


# --------------------------------------------------------------------------------------
# Tabla de cuantización
# --------------------------------------------------------------------------------------
def emit_quantization_table(table: QuantizationTable, path: PathLike) -> Path:
    if not table.rows:
        raise ValueError("La tabla de cuantización está vacía")
    try:
        with _open_for_write(path) as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["n", "k", "delta_t"])
            for row in sorted(table.rows, key=lambda r: r.n):
                writer.writerow([str(row.n), _fmt(row.k), _fmt(row.delta_t)])
    except OSError as e:
        logger.error("No se pudo escribir la tabla de cuantización en %s: %s", path, e)
        raise
    logger.info("Tabla de cuantización escrita: %s (%d filas)", path, len(table.rows))
    return Path(path)


# --------------------------------------------------------------------------------------
# Adiabaticidad y reporte
# --------------------------------------------------------------------------------------
def emit_adiabaticity_csv(report: AdiabaticityReport, path: PathLike) -> Path:
    branches = report.populations.shape[1]
    with _open_for_write(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t"] + [f"population_{b}" for b in range(branches)] + [f"eigenvalue_{b}" for b in range(branches)])
        for t, pops, eigs in zip(report.times, report.populations, report.eigenvalues):
            writer.writerow([_fmt(t)] + [_fmt(x) for x in pops] + [_fmt(x) for x in eigs])
    logger.info("Poblaciones escritas: %s", path)
    return Path(path)


def emit_report_json(report, path: PathLike) -> Path:
    """`report` es un RunReport de pydantic_models."""
    with _open_for_write(path) as f:
        f.write(report.model_dump_json(indent=2))
        f.write("\n")
    return Path(path)
