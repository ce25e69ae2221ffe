"""Protocolo de navegación de Zermelo en cuatro pasos.

1. Resolver ΔT de la ecuación implícita φ(ΔT) = √(k/2)·ΔT.
2. Llevar el objetivo a la imagen de interacción, |ψ'_f⟩ = U₀†(ΔT)|ψ_f⟩.
3. Ortonormalizar contra |ψ_i⟩ y construir Hc(t_i).
4. Componer U(t) = U₀(t)·Uc(t).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

import numpy as np
import numpy.linalg as npl
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import bisect

from .errors import (
    ConvergenceError,
    DegenerateProblemError,
    DimensionMismatchError,
    OrthogonalityError,
    SingularConstructionError,
)
from .linalg import (
    EigenDecomposition,
    HermitianOperator,
    StateVector,
    UnitaryOperator,
    hermitian_eigendecompose,
    outer,
    unitary_exp,
)

logger = logging.getLogger(__name__)

# --- Umbrales ---
DEGENERATE_TOL = 1e-12
PHASE_TOL = 1e-12
ORTHOGONALITY_TOL = 1e-10
SINGULAR_TOL = 1e-12
BISECT_XTOL = 1e-15
BISECT_RTOL = 4 * np.finfo(float).eps
BISECT_MAXITER = 200


# ============================
#           TIPOS
# ============================

@dataclass(frozen=True, eq=False)
class ZermeloProblem:
    h0: HermitianOperator
    psi_i: StateVector
    psi_f: StateVector
    k: float
    h0_spectrum: EigenDecomposition = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not (self.h0.dim == self.psi_i.dim == self.psi_f.dim):
            raise DimensionMismatchError(
                f"H0 ({self.h0.dim}), psi_i ({self.psi_i.dim}) y psi_f ({self.psi_f.dim}) deben compartir dimensión"
            )
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValueError(f"k debe ser positivo y finito, recibido {self.k!r}")
        object.__setattr__(self, "h0_spectrum", hermitian_eigendecompose(self.h0))

    @property
    def dim(self) -> int:
        return self.h0.dim

    @property
    def rate(self) -> float:
        """√(k/2): velocidad angular del control y semiancho de su espectro."""
        return math.sqrt(self.k / 2)

    def orthogonal_time(self) -> float:
        """π/√(2k), el tiempo para objetivos ortogonales."""
        return math.pi / math.sqrt(2 * self.k)

    def __repr__(self) -> str:
        return f"ZermeloProblem(dim={self.dim}, k={self.k!r})"


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-12
    max_iter: int = 1000
    bracket_max: float = 4.0
    scan_points: int = 4096

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol debe ser positivo")
        if self.max_iter < 1:
            raise ValueError("max_iter debe ser al menos 1")
        if self.bracket_max < 1:
            # r(π/√(2k)) ≤ 0 siempre, así que un intervalo menor puede no contener la raíz
            raise ValueError("bracket_max debe ser al menos 1")
        if self.scan_points < 2:
            raise ValueError("scan_points debe ser al menos 2")


@dataclass(frozen=True, eq=False)
class ZermeloSolution:
    delta_t: float
    phi: float
    k: float
    psi_f_prime: StateVector
    psi_f_orthonormal: Optional[StateVector]
    hc_initial: HermitianOperator
    iterations: int
    residual: float
    degenerate: bool = False

    def __repr__(self) -> str:
        return (
            f"ZermeloSolution(delta_t={self.delta_t:.12g}, phi={self.phi:.12g}, k={self.k!r}, "
            f"iterations={self.iterations}, degenerate={self.degenerate})"
        )


class DeltaTResult(NamedTuple):
    delta_t: float
    phi: float
    iterations: int
    residual: float


# ============================
#      ÁNGULO Y RESIDUO
# ============================

def angle(p: ZermeloProblem, t: Union[float, ArrayLike]) -> Union[float, NDArray[np.float64]]:
    """Distancia angular φ(t) entre |ψ_i⟩ y U₀†(t)|ψ_f⟩, en [0, π/2].

    Se evalúa en la base propia de H₀, de modo que `t` puede ser un arreglo.
    Usa atan2(‖(𝕀−P)v‖, |⟨ψ_i|v⟩|) en vez de arccos para conservar precisión cerca de 0.
    """
    scalar = np.ndim(t) == 0
    times = np.atleast_1d(np.asarray(t, dtype=np.float64))
    v = p.h0_spectrum.eigenvectors.matrix
    ci = v.conj().T @ p.psi_i.amplitudes
    cf = v.conj().T @ p.psi_f.amplitudes
    w = cf[None, :] * np.exp(1j * np.outer(times, p.h0_spectrum.eigenvalues))
    overlap = w @ ci.conj()
    perp = npl.norm(w - overlap[:, None] * ci[None, :], axis=1)
    phi = np.arctan2(perp, np.abs(overlap))
    return float(phi[0]) if scalar else phi


def angle_residual(p: ZermeloProblem, t: Union[float, ArrayLike]) -> Union[float, NDArray[np.float64]]:
    """r(t) = φ(t) − √(k/2)·t; r(0) ≥ 0 y r(π/√(2k)) ≤ 0."""
    if np.ndim(t) == 0:
        return angle(p, t) - p.rate * float(t)
    return angle(p, t) - p.rate * np.asarray(t, dtype=np.float64)


def _first_root(p: ZermeloProblem, t_max: float, points: int) -> Optional[float]:
    # Primer cambio de signo de r en [0, t_max], refinado por bisección.
    grid = np.linspace(0.0, t_max, points + 1)
    r = angle_residual(p, grid)
    hits = np.flatnonzero(r[1:] <= 0.0)
    if hits.size == 0:
        return None
    j = int(hits[0]) + 1
    if r[j] == 0.0:
        return float(grid[j])
    root, info = bisect(
        lambda x: angle_residual(p, x),
        float(grid[j - 1]),
        float(grid[j]),
        xtol=BISECT_XTOL,
        rtol=BISECT_RTOL,
        maxiter=BISECT_MAXITER,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        logger.debug("Bisección sin convergencia en [%r, %r] tras %d iteraciones", grid[j - 1], grid[j], info.iterations)
        return None
    return float(root)


# ============================
#      PASO 1: RESOLVER ΔT
# ============================

def solve_delta_t(p: ZermeloProblem, s: SolverSettings = SolverSettings()) -> DeltaTResult:
    """Menor ΔT ≥ 0 con φ(ΔT) = √(k/2)·ΔT.

    Iteración de punto fijo ΔT ← φ(ΔT)/√(k/2) sembrada en φ(0)/√(k/2); luego se
    barre [0, ΔT*] en busca de una raíz anterior. Si la iteración no converge se
    barre [0, bracket_max·π/√(2k)] y se refina por bisección.
    """
    a = p.rate
    phi0 = angle(p, 0.0)
    if phi0 < DEGENERATE_TOL:
        logger.warning("Problema degenerado: φ(0) = %.3e, no hace falta control", phi0)
        return DeltaTResult(0.0, phi0, 0, phi0)

    t = phi0 / a
    residual = math.inf
    for it in range(1, s.max_iter + 1):
        phi = angle(p, t)
        residual = phi - a * t
        if abs(residual) < s.tol * max(t, 1.0):
            logger.debug("Punto fijo convergió: ΔT = %.17g en %d iteraciones", t, it)
            earlier = _first_root(p, t * (1 - 1e-9), s.scan_points)
            if earlier is not None:
                logger.warning("Se encontró una raíz anterior al punto fijo: %.17g < %.17g", earlier, t)
                return _checked(p, earlier, it, s)
            return DeltaTResult(t, phi, it, residual)
        t = phi / a

    logger.warning(
        "El punto fijo no convergió en %d iteraciones (residuo %.3e); se usa bisección", s.max_iter, residual
    )
    root = _first_root(p, s.bracket_max * p.orthogonal_time(), s.scan_points)
    if root is None:
        raise ConvergenceError("No se encontró ΔT por punto fijo ni por bisección", t, residual)
    return _checked(p, root, s.max_iter, s)


def _checked(p: ZermeloProblem, t: float, iterations: int, s: SolverSettings) -> DeltaTResult:
    phi = angle(p, t)
    residual = phi - p.rate * t
    if abs(residual) >= s.tol * max(t, 1.0):
        raise ConvergenceError("La bisección no alcanzó la tolerancia pedida", t, residual)
    return DeltaTResult(t, phi, iterations, residual)


# ============================
#   PASOS 2-3: ESTADOS Y Hc
# ============================

def intermediate_final_state(p: ZermeloProblem, delta_t: float) -> StateVector:
    """|ψ'_f⟩ = U₀†(ΔT)|ψ_f⟩ = e^{+iH₀ΔT}|ψ_f⟩."""
    if delta_t < 0:
        raise ValueError(f"delta_t debe ser no negativo, recibido {delta_t!r}")
    return unitary_exp(p.h0_spectrum, delta_t, sign=+1).apply(p.psi_f)


def _phase_aligned(psi_i: StateVector, psi: StateVector) -> StateVector:
    # Fase global de psi elegida para que ⟨ψ_i|psi⟩ sea real no negativo.
    overlap = psi_i.inner(psi)
    if abs(overlap) < PHASE_TOL:
        return psi
    return psi.with_phase(overlap.conjugate() / abs(overlap))


def gram_schmidt_target(p: ZermeloProblem, psi_f_prime: StateVector) -> StateVector:
    aligned = _phase_aligned(p.psi_i, psi_f_prime)
    perp = aligned.amplitudes - p.psi_i.amplitudes * p.psi_i.inner(aligned)
    norm = float(npl.norm(perp))
    if norm < DEGENERATE_TOL:
        raise DegenerateProblemError(
            f"|ψ_i⟩ y |ψ'_f⟩ son paralelos (‖(𝕀−P)ψ'_f‖ = {norm:.3e}); ΔT = 0, no hace falta control"
        )
    return StateVector.normalized(perp / norm)


def control_hamiltonian(p: ZermeloProblem, psi_orthonormal: StateVector) -> HermitianOperator:
    """Hc(t_i) = i√(k/2)(|ψ̄'_f⟩⟨ψ_i| − |ψ_i⟩⟨ψ̄'_f|)."""
    overlap = abs(p.psi_i.inner(psi_orthonormal))
    if overlap > ORTHOGONALITY_TOL:
        raise OrthogonalityError(f"El estado objetivo no es ortogonal a ψ_i: |⟨ψ_i|ψ̄⟩| = {overlap:.3e}")
    m = 1j * p.rate * (outer(psi_orthonormal, p.psi_i) - outer(p.psi_i, psi_orthonormal))
    return HermitianOperator.from_hermitian_part(m)


def control_hamiltonian_closed_form(p: ZermeloProblem, psi_f_prime: StateVector, delta_t: float) -> HermitianOperator:
    """Forma cerrada i√(k/2)/sin(√(k/2)ΔT)·(|ψ'_f⟩⟨ψ_i| − |ψ_i⟩⟨ψ'_f|), con |ψ'_f⟩ alineado en fase."""
    sine = math.sin(p.rate * delta_t)
    if abs(sine) < SINGULAR_TOL:
        raise SingularConstructionError(f"sin(√(k/2)ΔT) = {sine:.3e}: la forma cerrada es singular")
    aligned = _phase_aligned(p.psi_i, psi_f_prime)
    m = 1j * p.rate / sine * (outer(aligned, p.psi_i) - outer(p.psi_i, aligned))
    return HermitianOperator.from_hermitian_part(m)


# ============================
#      PASO 4: UNITARIOS
# ============================

def control_unitary(hc_initial: HermitianOperator, t: float) -> UnitaryOperator:
    """Uc(t) = exp(−i·Hc(t_i)·t)."""
    if t < 0:
        raise ValueError(f"t debe ser no negativo, recibido {t!r}")
    return unitary_exp(hc_initial, t, sign=-1)


def control_rotation(psi_i: StateVector, psi_orthonormal: StateVector, rate: float, t: float) -> UnitaryOperator:
    """Uc(t) como rotación de rango 2 en span{|ψ_i⟩, |ψ̄'_f⟩} e identidad en el complemento."""
    if t < 0:
        raise ValueError(f"t debe ser no negativo, recibido {t!r}")
    c, s = math.cos(rate * t), math.sin(rate * t)
    ii = outer(psi_i, psi_i)
    ff = outer(psi_orthonormal, psi_orthonormal)
    fi = outer(psi_orthonormal, psi_i)
    m = np.eye(psi_i.dim, dtype=np.complex128) + (c - 1) * (ii + ff) + s * (fi - fi.conj().T)
    return UnitaryOperator(m)


def full_unitary(p: ZermeloProblem, sol: ZermeloSolution, t: float) -> UnitaryOperator:
    """U(t) = U₀(t)·Uc(t) para 0 ≤ t ≤ ΔT."""
    slack = 1e-12 * max(sol.delta_t, 1.0)
    if t < 0 or t > sol.delta_t + slack:
        raise ValueError(f"t = {t!r} fuera de [0, ΔT = {sol.delta_t!r}]")
    return unitary_exp(p.h0_spectrum, t, sign=-1) @ control_unitary(sol.hc_initial, t)


# ============================
#     PROTOCOLO COMPLETO
# ============================

def solve(p: ZermeloProblem, s: SolverSettings = SolverSettings()) -> ZermeloSolution:
    """Pasos 1-3: ΔT, |ψ'_f⟩, |ψ̄'_f⟩ y Hc(t_i). El caso degenerado devuelve Hc = 0."""
    result = solve_delta_t(p, s)
    if result.delta_t == 0.0:
        return ZermeloSolution(
            delta_t=0.0,
            phi=result.phi,
            k=p.k,
            psi_f_prime=p.psi_f,
            psi_f_orthonormal=None,
            hc_initial=HermitianOperator.zeros(p.dim),
            iterations=0,
            residual=result.residual,
            degenerate=True,
        )
    psi_f_prime = intermediate_final_state(p, result.delta_t)
    psi_orth = gram_schmidt_target(p, psi_f_prime)
    hc = control_hamiltonian(p, psi_orth)
    logger.debug("Resuelto: ΔT = %.17g, φ = %.17g", result.delta_t, result.phi)
    return ZermeloSolution(
        delta_t=result.delta_t,
        phi=result.phi,
        k=p.k,
        psi_f_prime=psi_f_prime,
        psi_f_orthonormal=psi_orth,
        hc_initial=hc,
        iterations=result.iterations,
        residual=result.residual,
    )


def energy_time_product(sol: ZermeloSolution) -> float:
    """ΔT·ΔHc con ΔHc = √(k/2); vale π/2 para objetivos ortogonales."""
    return math.sqrt(sol.k / 2) * sol.delta_t
