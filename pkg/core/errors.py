from __future__ import annotations

from typing import Optional


class ZermeloError(Exception):
    """Clase base de todos los errores del paquete."""


class NonHermitianError(ZermeloError):
    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        self.tol = tol
        super().__init__(
            f"La matriz no es Hermítica: max|A - A†| = {deviation:.3e} (tolerancia {tol:.0e})"
        )


class NonUnitaryError(ZermeloError):
    def __init__(self, deviation: float, tol: float):
        self.deviation = deviation
        self.tol = tol
        super().__init__(
            f"La matriz no es unitaria: max|U†U - I| = {deviation:.3e} (tolerancia {tol:.0e})"
        )


class NormalizationError(ZermeloError):
    def __init__(self, norm: float, tol: float):
        self.norm = norm
        self.tol = tol
        super().__init__(f"Estado no normalizado: ||psi|| = {norm!r} (tolerancia {tol:.0e})")


class DimensionMismatchError(ZermeloError, ValueError):
    pass


class ConvergenceError(ZermeloError):
    """Fallaron ambas estrategias para ΔT; guarda el último iterado y su residuo."""

    def __init__(self, message: str, last_iterate: float, residual: float):
        self.last_iterate = last_iterate
        self.residual = residual
        super().__init__(f"{message} (último ΔT = {last_iterate!r}, residuo = {residual:.3e})")


class DegenerateProblemError(ZermeloError):
    """El estado inicial y el objetivo (en imagen de interacción) son paralelos: no hace falta control."""


class SingularConstructionError(ZermeloError):
    pass


class OrthogonalityError(ZermeloError):
    pass


class IntegrationError(ZermeloError):
    def __init__(self, drift: float, n_steps: int, t: Optional[float] = None):
        self.drift = drift
        self.n_steps = n_steps
        self.t = t
        where = f" en t = {t:.6g}" if t is not None else ""
        super().__init__(
            f"Deriva de norma {drift:.3e}{where} con {n_steps} pasos; aumenta el número de pasos"
        )


class ConfigError(ZermeloError):
    pass


class RealizabilityError(ZermeloError):
    """El control óptimo no tiene la forma de laboratorio pedida para este k."""
