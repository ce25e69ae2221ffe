from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator # ConfigDict para Pydantic v2
from typing import Optional, List, Literal, Tuple, Union
import re

import numpy as np

from core.errors import ZermeloError
from core.linalg import HermitianOperator, StateVector

QUANTIZED_RE = re.compile(r"^\s*quantized\(\s*(\d+)\s*\)\s*$")

PresetName = Literal["oscillator", "bell-swap", "spin-flip", "cu-acetate"]
OutputName = Literal["trajectory", "invariants", "quantization-table", "adiabaticity", "finsler-check"]
BellName = Literal["phi+", "phi-", "phibar+", "phibar-"]
ComplexPair = Tuple[float, float]  # [re, im]


def complex_array(values) -> np.ndarray:
    a = np.asarray(values, dtype=np.float64)
    return a[..., 0] + 1j * a[..., 1]


# ============================
#     SCHEMAS DE ESCENARIO
# ============================

class CustomProblem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    h0: List[List[ComplexPair]]
    psi_i: List[ComplexPair]
    psi_f: List[ComplexPair]

    @model_validator(mode="after")
    def check_physics(self):
        # Errores de H₀ o de normalización llegan al usuario con su diagnóstico numérico
        try:
            h0 = HermitianOperator(complex_array(self.h0))
            psi_i = StateVector(complex_array(self.psi_i))
            psi_f = StateVector(complex_array(self.psi_f))
        except (ZermeloError, ValueError) as e:
            raise ValueError(str(e)) from e
        if not (h0.dim == psi_i.dim == psi_f.dim):
            raise ValueError(f"Dimensiones incompatibles: h0 {h0.dim}, psi_i {psi_i.dim}, psi_f {psi_f.dim}")
        return self


class PresetParameters(BaseModel):
    model_config = ConfigDict(extra="forbid")

    omega: float = Field(1.0, gt=0)
    j_x: float = 1.0
    j_y: float = 0.5
    j_z: float = 2.0
    initial: BellName = "phi+"
    final: BellName = "phi-"


class GridSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_steps: int = Field(1000, ge=2)
    ode_steps: Optional[int] = Field(None, ge=2)


class SolverOverrides(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tol: Optional[float] = Field(None, gt=0)
    max_iter: Optional[int] = Field(None, ge=1)
    bracket_max: Optional[float] = Field(None, ge=1)
    scan_points: Optional[int] = Field(None, ge=2)


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Optional[str] = None
    preset: Optional[PresetName] = None
    custom: Optional[CustomProblem] = None
    parameters: PresetParameters = PresetParameters()
    k: Union[float, str]
    grid: GridSettings = GridSettings()
    solver: SolverOverrides = SolverOverrides()
    outputs: List[OutputName] = ["trajectory", "invariants"]
    quantization_rows: int = Field(5, ge=1)
    realizability_tol: float = Field(1e-9, gt=0)

    @field_validator("k")
    @classmethod
    def check_k(cls, v):
        if isinstance(v, str):
            if not QUANTIZED_RE.match(v):
                raise ValueError(f"k debe ser un número positivo o 'quantized(n)', recibido {v!r}")
            return v
        if not v > 0:
            raise ValueError(f"k debe ser positivo, recibido {v!r}")
        return v

    @model_validator(mode="after")
    def check_problem_source(self):
        if (self.preset is None) == (self.custom is None):
            raise ValueError("Se debe indicar exactamente uno de 'preset' o 'custom'")
        if self.custom is not None:
            if self.quantized_n is not None:
                raise ValueError("k = quantized(n) requiere un preset que defina ε_f")
            if "quantization-table" in self.outputs:
                raise ValueError("La salida 'quantization-table' requiere un preset que defina ε_f")
        if self.preset == "spin-flip" and self.parameters.initial == self.parameters.final:
            raise ValueError("spin-flip requiere estados inicial y final distintos")
        return self

    @property
    def quantized_n(self) -> Optional[int]:
        if isinstance(self.k, str):
            return int(QUANTIZED_RE.match(self.k).group(1))
        return None


# ============================
#       SCHEMAS DE REPORTE
# ============================

class InvariantCheck(BaseModel):
    name: str
    max_deviation: float
    threshold: float
    passed: bool


class AdiabaticitySummary(BaseModel):
    max_rate: float
    rate_threshold: float
    eigenvalue_drift: float
    population_drift: float
    flagged_samples: int


class RunReport(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    name: Optional[str] = None
    source: str  # nombre del preset o "custom"
    k: float
    eps_f: Optional[float] = None
    delta_t: float
    delta_t_seconds: Optional[float] = None
    delta_t_ps: Optional[float] = None
    phi: float
    energy_time_product: float
    iterations: int
    residual: float
    degenerate: bool = False
    zeeman_realizable: Optional[bool] = None
    zeeman_field_tesla: Optional[float] = None
    invariants: List[InvariantCheck] = []
    adiabaticity: Optional[AdiabaticitySummary] = None
    files: List[str] = []

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.invariants)
