from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import constants

from .errors import DimensionMismatchError, RealizabilityError
from .linalg import (
    PAULI,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    ComplexMatrix,
    HermitianOperator,
    StateVector,
    outer,
)
from .protocol import SolverSettings, ZermeloProblem, solve

# --- Constantes ---
PAULI_LABELS = ("I", "x", "y", "z")
REALIZABILITY_TOL = 1e-9

CU_ACETATE_RAW_CM = (297.793, 297.753, 298.453)  # J_x, J_y, J_z en convención de espín, cm⁻¹
CU_ACETATE_G_Z = 2.43
CU_ACETATE_EXPECTED_PS = 0.2


# ============================
#           MODELOS
# ============================

@dataclass(frozen=True)
class OscillatorPreset:
    omega: float

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise ValueError(f"omega debe ser positivo, recibido {self.omega!r}")

    @property
    def eps_f(self) -> float:
        """Energía del estado excitado, 3ω/2 (incluye el punto cero)."""
        return 1.5 * self.omega


@dataclass(frozen=True)
class DimerParams:
    """Acoplamientos del dímero en convención de matrices de Pauli."""

    j_x: float
    j_y: float
    j_z: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(j) for j in (self.j_x, self.j_y, self.j_z)):
            raise ValueError("Los acoplamientos deben ser finitos")

    @property
    def j_plus(self) -> float:
        return self.j_x + self.j_y

    @property
    def j_minus(self) -> float:
        return self.j_x - self.j_y

    @classmethod
    def from_spin_convention(cls, j_x: float, j_y: float, j_z: float) -> "DimerParams":
        """Convierte acoplamientos de operadores de espín S = σ/2: se dividen entre −4."""
        return cls(j_x / -4, j_y / -4, j_z / -4)

    def __repr__(self) -> str:
        return f"DimerParams(j_x={self.j_x!r}, j_y={self.j_y!r}, j_z={self.j_z!r})"


class QuantizationRow(NamedTuple):
    n: int
    k: float
    delta_t: float


@dataclass(frozen=True)
class QuantizationTable:
    eps_f: float
    rows: Tuple[QuantizationRow, ...]


@dataclass(frozen=True, eq=False)
class PauliDecomposition:
    coefficients: NDArray[np.float64]  # coefficients[a, b] multiplica σ_a⊗σ_b

    def coefficient(self, a: str, b: str) -> float:
        return float(self.coefficients[PAULI_LABELS.index(a), PAULI_LABELS.index(b)])

    def reconstruct(self) -> ComplexMatrix:
        m = np.zeros((4, 4), dtype=np.complex128)
        for i, a in enumerate(PAULI_LABELS):
            for j, b in enumerate(PAULI_LABELS):
                m += self.coefficients[i, j] * np.kron(PAULI[a], PAULI[b])
        return m

    def nonzero(self, tol: float = 1e-12) -> dict:
        return {
            (a, b): self.coefficient(a, b)
            for a in PAULI_LABELS
            for b in PAULI_LABELS
            if abs(self.coefficient(a, b)) > tol
        }


@dataclass(frozen=True)
class PhysicalUnits:
    c_cm_per_s: float = constants.c * 100

    def wavenumber_to_angular(self, wavenumber_cm: float) -> float:
        """ω = 2πc·ν̃, en rad/s."""
        return 2 * math.pi * self.c_cm_per_s * wavenumber_cm

    def angular_to_wavenumber(self, omega_rad_s: float) -> float:
        return omega_rad_s / (2 * math.pi * self.c_cm_per_s)

    def natural_time_to_seconds(self, t: float) -> float:
        """Con energías en cm⁻¹ y ħ = 1 el tiempo natural se mide en cm; t[s] = t/(2πc)."""
        return t / (2 * math.pi * self.c_cm_per_s)

    def seconds_to_natural_time(self, seconds: float) -> float:
        return seconds * 2 * math.pi * self.c_cm_per_s


class CuAcetatePreset(NamedTuple):
    params: DimerParams
    units: PhysicalUnits
    expected_delta_t_ps: float


class BellStates(NamedTuple):
    phi_plus: StateVector
    phi_minus: StateVector
    phi_bar_plus: StateVector
    phi_bar_minus: StateVector


class ZermeloBellBlock(NamedTuple):
    matrix: ComplexMatrix  # H₀ + Hc(t_i) en la base (Φ₊, Φ₋, Φ̄₊, Φ̄₋)
    eigenvalues: NDArray[np.float64]
    eigenvectors: ComplexMatrix  # columnas normalizadas


BELL_NAMES = {"phi+": "phi_plus", "phi-": "phi_minus", "phibar+": "phi_bar_plus", "phibar-": "phi_bar_minus"}


# ============================
#     OSCILADOR (2 NIVELES)
# ============================

def oscillator_problem(omega: float, k: float) -> ZermeloProblem:
    """|0⟩ → |1⟩ con H₀ = diag(ω/2, 3ω/2)."""
    preset = OscillatorPreset(omega)
    h0 = HermitianOperator(np.diag([0.5 * preset.omega, preset.eps_f]).astype(np.complex128))
    return ZermeloProblem(h0, StateVector.basis(2, 0), StateVector.basis(2, 1), k)


def oscillator_control_decomposition(
    omega: float, k: float, settings: SolverSettings = SolverSettings()
) -> Tuple[float, float]:
    """Pesos de Hc(t_i) sobre la posición (a†+a) y el momento i(a†−a) del oscilador truncado."""
    sol = solve(oscillator_problem(omega, k), settings)
    element = complex(sol.hc_initial.matrix[1, 0])
    return element.real, element.imag


def driving_field_amplitude(
    omega: float, k: float, tol: float = REALIZABILITY_TOL, settings: SolverSettings = SolverSettings()
) -> float:
    """E₀ con Hc(t_i) = −√(1/(2ω))·(a†+a)·E₀; solo existe si el peso de momento se anula."""
    position, momentum = oscillator_control_decomposition(omega, k, settings)
    rate = math.sqrt(k / 2)
    if abs(momentum) / rate > tol:
        raise RealizabilityError(
            f"Para k = {k!r} el control tiene componente de momento {momentum:.3e}; no es un campo de posición"
        )
    return -position * math.sqrt(2 * omega)


# ============================
#     CUANTIZACIÓN DE k
# ============================

def quantized_k(eps_f: float, n: int) -> float:
    if eps_f == 0:
        raise ValueError("eps_f = 0: no hay cuantización de k")
    if n < 0:
        raise ValueError(f"n debe ser no negativo, recibido {n}")
    return eps_f ** 2 / (2 * (n + 0.5) ** 2)


def quantization_table(eps_f: float, rows: int = 5) -> QuantizationTable:
    if rows < 1:
        raise ValueError("La tabla necesita al menos una fila")
    return QuantizationTable(
        eps_f=eps_f,
        rows=tuple(
            QuantizationRow(n, quantized_k(eps_f, n), math.pi * (n + 0.5) / abs(eps_f)) for n in range(rows)
        ),
    )


def zeeman_realizability(eps_f: float, k: float, tol: float = REALIZABILITY_TOL) -> Tuple[bool, int, float]:
    """(realizable, n más cercano, |cos(ε_f·π/√(2k))|)."""
    if eps_f == 0 or not k > 0:
        raise ValueError("Se requiere eps_f ≠ 0 y k > 0")
    root = math.sqrt(2 * k)
    deviation = abs(math.cos(eps_f * math.pi / root))
    nearest_n = max(0, round(abs(eps_f) / root - 0.5))
    return deviation < tol, nearest_n, deviation


def zeeman_realizability_pauli(
    eps_f: float, k: float, tol: float = REALIZABILITY_TOL, settings: SolverSettings = SolverSettings()
) -> Tuple[bool, int, float]:
    """Misma prueba, resolviendo Φ₊ → Φ₋ en un dímero con ε_f dado y leyendo los pesos (x,y)+(y,x)."""
    if eps_f == 0 or not k > 0:
        raise ValueError("Se requiere eps_f ≠ 0 y k > 0")
    sol = solve(bell_swap_problem(DimerParams(0.0, 0.0, -eps_f), k), settings)
    pauli = pauli_decompose(sol.hc_initial)
    deviation = abs(pauli.coefficient("x", "y") + pauli.coefficient("y", "x")) / math.sqrt(k / 2)
    nearest_n = max(0, round(abs(eps_f) / math.sqrt(2 * k) - 0.5))
    return deviation < tol, nearest_n, deviation


# ============================
#       DÍMERO DE ESPINES
# ============================

def dimer_h0(params: DimerParams) -> HermitianOperator:
    """H₀ = −Σ_j J_j σ_j⊗σ_j en la base computacional |00⟩, |01⟩, |10⟩, |11⟩."""
    m = -(
        params.j_x * np.kron(SIGMA_X, SIGMA_X)
        + params.j_y * np.kron(SIGMA_Y, SIGMA_Y)
        + params.j_z * np.kron(SIGMA_Z, SIGMA_Z)
    )
    return HermitianOperator.from_hermitian_part(m)


def bell_states() -> BellStates:
    s = 1 / math.sqrt(2)
    return BellStates(
        phi_plus=StateVector([s, 0, 0, s]),
        phi_minus=StateVector([s, 0, 0, -s]),
        phi_bar_plus=StateVector([0, s, s, 0]),
        phi_bar_minus=StateVector([0, s, -s, 0]),
    )


def bell_state(name: str) -> StateVector:
    try:
        return getattr(bell_states(), BELL_NAMES[name])
    except KeyError:
        raise ValueError(f"Estado de Bell desconocido: {name!r}; opciones {sorted(BELL_NAMES)}") from None


def bell_energy(params: DimerParams, name: str) -> float:
    """Energía de H₀ en el estado de Bell `name` (cada uno es autoestado)."""
    return dimer_h0(params).expectation(bell_state(name))


def bell_swap_problem(params: DimerParams, k: float) -> ZermeloProblem:
    bell = bell_states()
    return ZermeloProblem(dimer_h0(params), bell.phi_plus, bell.phi_minus, k)


def bell_swap_eps_f(params: DimerParams) -> float:
    """ε_f = −J_z + J_−, la energía de Φ₋."""
    return -params.j_z + params.j_minus


def spin_flip_problem(params: DimerParams, k: float, initial: str = "phi+", final: str = "phi-") -> ZermeloProblem:
    if initial == final:
        raise ValueError("Los estados inicial y final deben ser distintos")
    return ZermeloProblem(dimer_h0(params), bell_state(initial), bell_state(final), k)


def orthonormal_control_hamiltonian(
    psi_i: StateVector, psi_f: StateVector, eps_f: float, k: float
) -> HermitianOperator:
    """i√(k/2)(e^{iε_fπ/√(2k)}|ψ_f⟩⟨ψ_i| − h.c.), para |ψ_f⟩ autoestado de H₀ con energía ε_f."""
    phase = np.exp(1j * eps_f * math.pi / math.sqrt(2 * k))
    m = 1j * math.sqrt(k / 2) * phase * outer(psi_f, psi_i)
    return HermitianOperator.from_hermitian_part(m + m.conj().T)


def pauli_decompose(h: HermitianOperator) -> PauliDecomposition:
    if h.dim != 4:
        raise DimensionMismatchError(f"La descomposición de Pauli requiere dimensión 4, recibida {h.dim}")
    c = np.empty((4, 4))
    for i, a in enumerate(PAULI_LABELS):
        for j, b in enumerate(PAULI_LABELS):
            c[i, j] = np.einsum("ij,ji->", h.matrix, np.kron(PAULI[a], PAULI[b])).real / 4
    c.setflags(write=False)
    return PauliDecomposition(c)


def zermelo_hamiltonian_bell_block(params: DimerParams) -> ZermeloBellBlock:
    """Matriz de H₀ + Hc(t_i) en la base de Bell para k = 2(J_z−J_−)², con sus autopares en forma cerrada."""
    b0 = params.j_z - params.j_minus
    if b0 == 0:
        raise ValueError("J_z = J_−: el bloque de Zermelo no está definido")
    jz, jm, jp = params.j_z, params.j_minus, params.j_plus
    matrix = np.array(
        [
            [-(jz + jm), b0, 0, 0],
            [b0, -(jz - jm), 0, 0],
            [0, 0, jz - jp, 0],
            [0, 0, 0, jz + jp],
        ],
        dtype=np.complex128,
    )
    alpha = -jm / b0
    beta = math.sqrt(alpha ** 2 + 1)
    eigenvalues = np.array([-jz - b0 * beta, -jz + b0 * beta, jz - jp, jz + jp])
    vectors = np.array(
        [
            [alpha - beta, alpha + beta, 0, 0],
            [1, 1, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
        ],
        dtype=np.complex128,
    )
    return ZermeloBellBlock(matrix, eigenvalues, vectors / np.linalg.norm(vectors, axis=0))


def bell_basis_matrix(h: HermitianOperator) -> ComplexMatrix:
    """h expresado en la base (Φ₊, Φ₋, Φ̄₊, Φ̄₋)."""
    w = np.column_stack([s.amplitudes for s in bell_states()])
    return w.conj().T @ h.matrix @ w


# ============================
#     ACETATO DE COBRE(II)
# ============================

def cu_acetate_preset() -> CuAcetatePreset:
    return CuAcetatePreset(
        params=DimerParams.from_spin_convention(*CU_ACETATE_RAW_CM),
        units=PhysicalUnits(),
        expected_delta_t_ps=CU_ACETATE_EXPECTED_PS,
    )


def zeeman_field_tesla(b0_plus_cm: float, g_z: float = CU_ACETATE_G_Z) -> float:
    """Campo H_z para un control (B₀₊/2)(σ_z⊗𝕀 + 𝕀⊗σ_z) con B⁽ⁱ⁾ = g_z·μ_B·H_z/4."""
    energy_j = constants.h * constants.c * 100 * abs(b0_plus_cm)
    return 2 * energy_j / (g_z * constants.physical_constants["Bohr magneton"][0])

