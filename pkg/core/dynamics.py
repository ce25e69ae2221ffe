from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import numpy.linalg as npl
from numpy.typing import NDArray

from .errors import IntegrationError, SingularConstructionError
from .linalg import (
    ComplexMatrix,
    EigenDecomposition,
    HermitianOperator,
    StateVector,
    commutator,
    frobenius_norm,
    hermitian_eigendecompose,
    trace_product,
)
from .protocol import ZermeloProblem, ZermeloSolution

logger = logging.getLogger(__name__)

# --- Umbrales ---
ODE_DRIFT_TOL = 1e-6
X_HERMITIAN_TOL = 1e-8
FINSLER_SINGULAR_TOL = 1e-12
BRANCH_TIE_TOL = 1e-6
DEFAULT_FD_STEP = 1e-6


# ============================
#           TIPOS
# ============================

@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_steps: int

    def __post_init__(self) -> None:
        if not self.t_end > self.t_start:
            raise ValueError(f"t_end ({self.t_end!r}) debe ser mayor que t_start ({self.t_start!r})")
        if self.n_steps < 2:
            raise ValueError(f"n_steps debe ser al menos 2, recibido {self.n_steps}")

    @classmethod
    def over(cls, sol: ZermeloSolution, n_steps: int) -> "TimeGrid":
        return cls(0.0, sol.delta_t, n_steps)

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    def times(self) -> NDArray[np.float64]:
        """Los n_steps + 1 instantes, extremos incluidos."""
        return np.linspace(self.t_start, self.t_end, self.n_steps + 1)


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    t: float
    psi: StateVector
    psi_prime: StateVector
    hc_t: HermitianOperator
    fidelity_to_target: float
    trace_hc_sq: float
    variance_hc: float
    norm: float = 1.0

    def __repr__(self) -> str:
        return f"TrajectorySample(t={self.t:.6g}, fidelity={self.fidelity_to_target:.12f})"


@dataclass(frozen=True, eq=False)
class AdiabaticityReport:
    times: NDArray[np.float64]
    populations: NDArray[np.float64]  # (tiempos, ramas)
    eigenvalues: NDArray[np.float64]  # (tiempos, ramas)
    max_rate: float
    eigenvalue_drift: float
    population_drift: float
    flagged: Tuple[int, ...]

    def __repr__(self) -> str:
        return (
            f"AdiabaticityReport(max_rate={self.max_rate:.6g}, eigenvalue_drift={self.eigenvalue_drift:.3e}, "
            f"population_drift={self.population_drift:.3e}, flagged={len(self.flagged)})"
        )


@dataclass(frozen=True, eq=False)
class XOperator:
    """X(s) = i·(dU/ds)·U† en la parametrización s = t/ΔT."""

    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=np.complex128)
        deviation = float(np.max(np.abs(m - m.conj().T)))
        if deviation > X_HERMITIAN_TOL:
            raise SingularConstructionError(f"X(s) no es Hermítico: desviación {deviation:.3e}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __mul__(self, factor: float) -> "XOperator":
        return XOperator(self.matrix * factor)

    __rmul__ = __mul__


# ============================
#      Hc(t) Y PROPAGADORES
# ============================

def _conjugated(h0_eig: EigenDecomposition, hc: ComplexMatrix, t: float) -> ComplexMatrix:
    u0 = h0_eig.exp(t, -1).matrix
    return u0 @ hc @ u0.conj().T


def control_hamiltonian_at(h0: HermitianOperator, hc_initial: HermitianOperator, t: float) -> HermitianOperator:
    """Hc(t) = e^{−iH₀t}·Hc(t_i)·e^{iH₀t}."""
    if t < 0:
        raise ValueError(f"t debe ser no negativo, recibido {t!r}")
    return HermitianOperator.from_hermitian_part(_conjugated(hermitian_eigendecompose(h0), hc_initial.matrix, t))


def _check_span(sol: ZermeloSolution, grid: TimeGrid) -> None:
    slack = 1e-12 * max(sol.delta_t, 1.0)
    if grid.t_start < 0 or grid.t_end > sol.delta_t + slack:
        raise ValueError(f"La malla [{grid.t_start!r}, {grid.t_end!r}] debe estar dentro de [0, ΔT = {sol.delta_t!r}]")


def _sample(p: ZermeloProblem, sol: ZermeloSolution, t: float, raw_psi: np.ndarray, psi_prime: StateVector) -> TrajectorySample:
    hc_t = HermitianOperator.from_hermitian_part(_conjugated(p.h0_spectrum, sol.hc_initial.matrix, t))
    norm = float(npl.norm(raw_psi))
    psi = StateVector.normalized(raw_psi)
    return TrajectorySample(
        t=float(t),
        psi=psi,
        psi_prime=psi_prime,
        hc_t=hc_t,
        fidelity_to_target=min(1.0, p.psi_f.fidelity(psi)),
        trace_hc_sq=trace_product(hc_t, hc_t).real,
        variance_hc=sol.hc_initial.variance(psi_prime),
        norm=norm,
    )


def propagate_analytic(p: ZermeloProblem, sol: ZermeloSolution, grid: TimeGrid) -> List[TrajectorySample]:
    """Muestras de U₀(t)·Uc(t)|ψ_i⟩ a partir de las formas cerradas."""
    _check_span(sol, grid)
    hc_eig = hermitian_eigendecompose(sol.hc_initial)
    samples = []
    for t in grid.times():
        psi_prime = hc_eig.exp(t, -1).apply(p.psi_i)
        raw = p.h0_spectrum.exp(t, -1).matrix @ psi_prime.amplitudes
        samples.append(_sample(p, sol, t, raw, psi_prime))
    return samples


def propagate_ode(
    p: ZermeloProblem, sol: ZermeloSolution, grid: TimeGrid, sample_every: int = 1
) -> List[TrajectorySample]:
    """Integra i·dψ/dt = [H₀ + Hc(t)]ψ con RK4 de paso fijo, un paso por intervalo de la malla.

    La integración se hace en la base propia de H₀, donde Hc(t) tiene elementos
    Hc_jk·e^{−i(λ_j−λ_k)t}. La imagen de interacción se recupera como U₀†(t)ψ(t).
    Solo se construye una muestra cada `sample_every` pasos; el instante final
    siempre se muestrea.
    """
    if grid.t_start != 0.0:
        raise ValueError("La integración ODE debe empezar en t = 0")
    if sample_every < 1:
        raise ValueError(f"sample_every debe ser al menos 1, recibido {sample_every}")
    _check_span(sol, grid)

    lam = p.h0_spectrum.eigenvalues
    v = p.h0_spectrum.eigenvectors.matrix
    hc_tilde = v.conj().T @ sol.hc_initial.matrix @ v

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        # e^{−iΛt} H̃c e^{+iΛt} y sin formar la matriz dependiente de t
        phase = np.exp(-1j * lam * t)
        return -1j * (lam * y + phase * (hc_tilde @ (phase.conj() * y)))

    h = grid.step
    y = v.conj().T @ p.psi_i.amplitudes
    times = grid.times()
    samples = []
    for n, t in enumerate(times):
        if n > 0:
            t_prev = times[n - 1]
            k1 = rhs(t_prev, y)
            k2 = rhs(t_prev + h / 2, y + h / 2 * k1)
            k3 = rhs(t_prev + h / 2, y + h / 2 * k2)
            k4 = rhs(t_prev + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        drift = abs(float(npl.norm(y)) - 1.0)
        if drift > ODE_DRIFT_TOL:
            raise IntegrationError(drift, grid.n_steps, float(t))
        if n % sample_every and n != grid.n_steps:
            continue
        raw = v @ y
        # ψ'(t) = U₀†(t)ψ(t) en la base propia: fases e^{+iλt}
        prime = v @ (np.exp(1j * lam * t) * y)
        samples.append(_sample(p, sol, t, raw, StateVector.normalized(prime)))
    logger.debug("ODE completada: %d pasos, deriva final %.3e", grid.n_steps, abs(samples[-1].norm - 1.0))
    return samples


# ============================
#   MOVIMIENTO COADJUNTO
# ============================

def coadjoint_residual(
    h0: HermitianOperator, hc_initial: HermitianOperator, t: float, fd_step: float = DEFAULT_FD_STEP
) -> float:
    """‖[Hc(t+h) − Hc(t−h)]/(2h) + i[H₀, Hc(t)]‖_F, de orden h²."""
    if fd_step <= 0:
        raise ValueError("fd_step debe ser positivo")
    eig = hermitian_eigendecompose(h0)
    hc = hc_initial.matrix
    derivative = (_conjugated(eig, hc, t + fd_step) - _conjugated(eig, hc, t - fd_step)) / (2 * fd_step)
    return frobenius_norm(derivative + 1j * commutator(h0, _conjugated(eig, hc, t)))


def coadjoint_bound(
    h0: HermitianOperator, hc_initial: HermitianOperator, t: float, fd_step: float = DEFAULT_FD_STEP
) -> float:
    """Cota 1e-8 + (h²/6)·‖ad³_{H₀}Hc(t)‖_F del error de truncamiento de la diferencia central."""
    ad = _conjugated(hermitian_eigendecompose(h0), hc_initial.matrix, t)
    for _ in range(3):
        ad = commutator(h0, ad)
    return 1e-8 + fd_step ** 2 / 6 * frobenius_norm(ad)


# ============================
#     X(s) Y NORMA DE FINSLER
# ============================

def x_operator(h0: HermitianOperator, hc_initial: HermitianOperator, delta_t: float, s: float) -> XOperator:
    """X(s) = ΔT·[H₀ + Hc(sΔT)]."""
    hc_t = _conjugated(hermitian_eigendecompose(h0), hc_initial.matrix, s * delta_t)
    return XOperator(delta_t * (h0.matrix + hc_t))


def _unitary_at(p: ZermeloProblem, sol: ZermeloSolution, t: float) -> np.ndarray:
    hc_eig = hermitian_eigendecompose(sol.hc_initial)
    return p.h0_spectrum.exp(t, -1).matrix @ hc_eig.exp(t, -1).matrix


def x_operator_finite_difference(
    p: ZermeloProblem, sol: ZermeloSolution, s: float, step: float = DEFAULT_FD_STEP
) -> XOperator:
    """X(s) = i·(dU/ds)·U† con diferencia central de paso `step` en s."""
    if step <= 0:
        raise ValueError("step debe ser positivo")
    dt = sol.delta_t
    du = (_unitary_at(p, sol, (s + step) * dt) - _unitary_at(p, sol, (s - step) * dt)) / (2 * step)
    x = 1j * du @ _unitary_at(p, sol, s * dt).conj().T
    return XOperator((x + x.conj().T) / 2)


def finsler_delta_t(x: XOperator, h0: HermitianOperator, k: float) -> float:
    """[−tr(XH₀) + √(tr(XH₀)² + (k − tr H₀²)·tr X²)] / (k − tr H₀²)."""
    denominator = k - trace_product(h0, h0).real
    if abs(denominator) < FINSLER_SINGULAR_TOL:
        raise SingularConstructionError(f"k − tr(H₀²) = {denominator:.3e}: denominador singular")
    b = trace_product(x.matrix, h0).real
    c = trace_product(x.matrix, x.matrix).real
    disc = b * b + denominator * c
    if disc < 0:
        if disc < -1e-12 * max(b * b, 1.0):
            raise SingularConstructionError(f"Discriminante negativo ({disc:.3e}): X no es alcanzable con k = {k!r}")
        disc = 0.0
    return (-b + math.sqrt(disc)) / denominator


# ============================
#       ADIABATICIDAD
# ============================

def _match_branches(previous: np.ndarray, current: np.ndarray) -> Tuple[np.ndarray, bool]:
    # Asignación voraz por máximo solapamiento; devuelve el orden de columnas y si hubo empate.
    overlaps = np.abs(previous.conj().T @ current) ** 2
    dim = overlaps.shape[0]
    order = np.full(dim, -1)
    tie = False
    for row in range(dim):
        ranked = np.sort(overlaps[row])[::-1]
        if dim > 1 and ranked[0] - ranked[1] < BRANCH_TIE_TOL:
            tie = True
    work = overlaps.copy()
    for _ in range(dim):
        row, col = np.unravel_index(np.argmax(work), work.shape)
        order[row] = col
        work[row, :] = -1.0
        work[:, col] = -1.0
    return order, tie


def adiabaticity_report(p: ZermeloProblem, sol: ZermeloSolution, grid: TimeGrid) -> AdiabaticityReport:
    """Poblaciones de ψ(t) en las ramas propias de H(t) = H₀ + Hc(t).

    El espectro de H(t) es constante, pero las poblaciones cambian: la evolución no es adiabática.
    """
    _check_span(sol, grid)
    times = grid.times()
    hc_eig = hermitian_eigendecompose(sol.hc_initial)
    populations = np.empty((times.size, p.dim))
    eigenvalues = np.empty((times.size, p.dim))
    flagged = []
    previous = None
    for n, t in enumerate(times):
        h_t = HermitianOperator.from_hermitian_part(p.h0.matrix + _conjugated(p.h0_spectrum, sol.hc_initial.matrix, t))
        eig = hermitian_eigendecompose(h_t)
        vectors, values = eig.eigenvectors.matrix, eig.eigenvalues
        if previous is not None:
            order, tie = _match_branches(previous, vectors)
            vectors, values = vectors[:, order], values[order]
            if tie:
                flagged.append(n)
        psi = p.h0_spectrum.exp(t, -1).matrix @ (hc_eig.exp(t, -1).matrix @ p.psi_i.amplitudes)
        populations[n] = np.abs(vectors.conj().T @ psi) ** 2
        eigenvalues[n] = values
        previous = vectors

    if flagged:
        logger.warning("Emparejamiento de ramas ambiguo en %d instantes", len(flagged))
    rates = np.abs(np.diff(populations, axis=0)) / np.diff(times)[:, None]
    return AdiabaticityReport(
        times=times,
        populations=populations,
        eigenvalues=eigenvalues,
        max_rate=float(rates.max()),
        eigenvalue_drift=float(np.max(np.abs(eigenvalues - eigenvalues[0]))),
        population_drift=float(np.max(np.abs(populations - populations[0]))),
        flagged=tuple(flagged),
    )
