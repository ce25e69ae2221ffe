"""Álgebra lineal compleja densa compartida por el resto de módulos.

Los tipos de valor son inmutables: los arreglos se copian al construirlos y
quedan marcados como solo lectura, así que pueden compartirse entre hilos.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import numpy.linalg as npl
from numpy.typing import ArrayLike, NDArray

from .errors import (
    DimensionMismatchError,
    NonHermitianError,
    NonUnitaryError,
    NormalizationError,
)

# --- Tolerancias ---
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-12

ComplexMatrix = NDArray[np.complex128]

# --- Álgebra de Pauli ---
IDENTITY_2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULI = {"I": IDENTITY_2, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}
for _m in PAULI.values():
    _m.setflags(write=False)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_complex_matrix(a: ArrayLike) -> ComplexMatrix:
    """Copia `a` en una matriz compleja cuadrada, finita y de solo lectura."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatchError(f"Se esperaba una matriz cuadrada, forma recibida {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("La matriz contiene NaN o Inf")
    return _frozen(m)


def hermitian_part(a: ArrayLike) -> ComplexMatrix:
    """Devuelve (A + A†)/2."""
    m = np.asarray(a, dtype=np.complex128)
    return (m + m.conj().T) / 2


def _array_of(x: Union["HermitianOperator", "UnitaryOperator", ArrayLike]) -> np.ndarray:
    return x.matrix if isinstance(x, (HermitianOperator, UnitaryOperator)) else np.asarray(x, dtype=np.complex128)


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Dimensiones incompatibles: {a.shape} vs {b.shape}")


# ============================
#       TIPOS DE VALOR
# ============================

@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: NDArray[np.complex128]

    def __post_init__(self) -> None:
        v = np.array(self.amplitudes, dtype=np.complex128)
        if v.ndim != 1 or v.size == 0:
            raise DimensionMismatchError(f"Un estado debe ser un vector no vacío, forma {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("El estado contiene NaN o Inf")
        norm = float(npl.norm(v))
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(norm, NORM_TOL)
        object.__setattr__(self, "amplitudes", _frozen(v))

    @classmethod
    def normalized(cls, amplitudes: ArrayLike) -> "StateVector":
        v = np.asarray(amplitudes, dtype=np.complex128)
        norm = npl.norm(v)
        if norm == 0.0:
            raise NormalizationError(0.0, NORM_TOL)
        return cls(v / norm)

    @classmethod
    def renormalized(cls, amplitudes: ArrayLike, tol: float = UNITARY_TOL) -> "StateVector":
        """Como `normalized`, pero solo acepta vectores ya unitarios salvo `tol`."""
        v = np.asarray(amplitudes, dtype=np.complex128)
        norm = float(npl.norm(v))
        if abs(norm - 1.0) > tol:
            raise NormalizationError(norm, tol)
        return cls(v / norm)

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        v = np.zeros(dim, dtype=np.complex128)
        v[index] = 1.0
        return cls(v)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def inner(self, other: "StateVector") -> complex:
        """⟨self|other⟩."""
        _check_same_dim(self.amplitudes, other.amplitudes)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        return abs(self.inner(other)) ** 2

    def with_phase(self, phase: complex) -> "StateVector":
        return StateVector.renormalized(self.amplitudes * phase, tol=NORM_TOL)

    def __repr__(self) -> str:
        return f"StateVector(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        m = as_complex_matrix(self.matrix)
        deviation = float(np.max(np.abs(m - m.conj().T)))
        if deviation > HERMITIAN_TOL:
            raise NonHermitianError(deviation, HERMITIAN_TOL)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_hermitian_part(cls, a: ArrayLike) -> "HermitianOperator":
        """Simetriza primero; para productos Hermíticos salvo redondeo."""
        return cls(hermitian_part(a))

    @classmethod
    def zeros(cls, dim: int) -> "HermitianOperator":
        return cls(np.zeros((dim, dim), dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def apply(self, psi: StateVector) -> NDArray[np.complex128]:
        _check_same_dim(self.matrix[0], psi.amplitudes)
        return self.matrix @ psi.amplitudes

    def expectation(self, psi: StateVector) -> float:
        return float(np.vdot(psi.amplitudes, self.apply(psi)).real)

    def variance(self, psi: StateVector) -> float:
        h_psi = self.apply(psi)
        mean = np.vdot(psi.amplitudes, h_psi).real
        return float(np.vdot(h_psi, h_psi).real - mean ** 2)

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        _check_same_dim(self.matrix, other.matrix)
        return HermitianOperator(self.matrix + other.matrix)

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim}, trace={self.trace():.6g})"


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    matrix: ComplexMatrix

    def __post_init__(self) -> None:
        m = as_complex_matrix(self.matrix)
        eye = np.eye(m.shape[0])
        deviation = float(max(np.max(np.abs(m.conj().T @ m - eye)), np.max(np.abs(m @ m.conj().T - eye))))
        if deviation > UNITARY_TOL:
            raise NonUnitaryError(deviation, UNITARY_TOL)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, dim: int) -> "UnitaryOperator":
        return cls(np.eye(dim, dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "UnitaryOperator":
        return UnitaryOperator(self.matrix.conj().T)

    def apply(self, psi: StateVector) -> StateVector:
        _check_same_dim(self.matrix[0], psi.amplitudes)
        return StateVector.renormalized(self.matrix @ psi.amplitudes)

    def __matmul__(self, other: "UnitaryOperator") -> "UnitaryOperator":
        _check_same_dim(self.matrix, other.matrix)
        return UnitaryOperator(self.matrix @ other.matrix)

    def __repr__(self) -> str:
        return f"UnitaryOperator(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: NDArray[np.float64]
    eigenvectors: UnitaryOperator

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors.matrix
        return (v * self.eigenvalues) @ v.conj().T

    def exp(self, t: float, sign: int = -1) -> UnitaryOperator:
        """exp(sign·i·A·t) = V·diag(e^{sign·i·λt})·V†."""
        if sign not in (-1, 1):
            raise ValueError(f"sign debe ser ±1, recibido {sign!r}")
        v = self.eigenvectors.matrix
        phases = np.exp(sign * 1j * self.eigenvalues * t)
        return UnitaryOperator((v * phases) @ v.conj().T)

    def __repr__(self) -> str:
        return f"EigenDecomposition(eigenvalues={np.array2string(self.eigenvalues, precision=6)})"


# ============================
#        OPERACIONES
# ============================

def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    # La componente de mayor módulo de cada columna queda real positiva (la primera en empates).
    idx = np.argmax(np.abs(vectors), axis=0)
    pivots = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (pivots.conj() / np.abs(pivots))


def hermitian_eigendecompose(a: Union[HermitianOperator, ArrayLike]) -> EigenDecomposition:
    h = a if isinstance(a, HermitianOperator) else HermitianOperator(a)
    eigenvalues, vectors = npl.eigh(h.matrix)
    return EigenDecomposition(
        eigenvalues=_frozen(np.asarray(eigenvalues, dtype=np.float64)),
        eigenvectors=UnitaryOperator(_fix_phases(vectors)),
    )


def unitary_exp(h: Union[HermitianOperator, EigenDecomposition], t: float, sign: int = -1) -> UnitaryOperator:
    """exp(sign·i·h·t), siempre mediante la descomposición espectral Hermítica.

    Si se pasa una EigenDecomposition ya calculada no se vuelve a diagonalizar.
    """
    eig = h if isinstance(h, EigenDecomposition) else hermitian_eigendecompose(h)
    return eig.exp(t, sign)


def commutator(a, b) -> ComplexMatrix:
    """[a, b] = ab − ba; anti-Hermítico si ambos argumentos son Hermíticos."""
    ma, mb = _array_of(a), _array_of(b)
    _check_same_dim(ma, mb)
    return ma @ mb - mb @ ma


def trace_product(a, b) -> complex:
    """tr(ab) sin formar el producto."""
    ma, mb = _array_of(a), _array_of(b)
    _check_same_dim(ma, mb)
    return complex(np.einsum("ij,ji->", ma, mb))


def outer(u: StateVector, v: StateVector) -> ComplexMatrix:
    """|u⟩⟨v|."""
    _check_same_dim(u.amplitudes, v.amplitudes)
    return np.outer(u.amplitudes, v.amplitudes.conj())


def frobenius_norm(a) -> float:
    return float(npl.norm(_array_of(a), "fro"))
