"""Presets con nombre y salidas disponibles para los escenarios."""
from __future__ import annotations

from typing import NamedTuple, Optional

from .models import (
    DimerParams,
    OscillatorPreset,
    PhysicalUnits,
    bell_energy,
    bell_swap_eps_f,
    bell_swap_problem,
    cu_acetate_preset,
    oscillator_problem,
    spin_flip_problem,
)
from .protocol import ZermeloProblem

PRESET_PARAMETERS = {
    "oscillator": ["omega"],
    "bell-swap": ["j_x", "j_y", "j_z"],
    "spin-flip": ["j_x", "j_y", "j_z", "initial", "final"],
    "cu-acetate": [],
}


class PresetProblem(NamedTuple):
    problem: ZermeloProblem
    eps_f: float
    units: Optional[PhysicalUnits] = None
    params: Optional[DimerParams] = None


def preset_names():
    return list(PRESET_PARAMETERS)


def preset_eps_f(name: str, parameters: dict) -> float:
    """ε_f del preset, sin construir el problema (k todavía puede depender de él)."""
    if name == "oscillator":
        return OscillatorPreset(parameters["omega"]).eps_f
    if name == "bell-swap":
        return bell_swap_eps_f(_dimer(parameters))
    if name == "spin-flip":
        return bell_energy(_dimer(parameters), parameters["final"])
    if name == "cu-acetate":
        return bell_swap_eps_f(cu_acetate_preset().params)
    raise KeyError(name)


def build_preset(name: str, parameters: dict, k: float) -> PresetProblem:
    eps_f = preset_eps_f(name, parameters)
    if name == "oscillator":
        return PresetProblem(oscillator_problem(parameters["omega"], k), eps_f)
    if name == "bell-swap":
        params = _dimer(parameters)
        return PresetProblem(bell_swap_problem(params, k), eps_f, params=params)
    if name == "spin-flip":
        params = _dimer(parameters)
        problem = spin_flip_problem(params, k, parameters["initial"], parameters["final"])
        return PresetProblem(problem, eps_f, params=params)
    preset = cu_acetate_preset()
    return PresetProblem(bell_swap_problem(preset.params, k), eps_f, units=preset.units, params=preset.params)


def _dimer(parameters: dict) -> DimerParams:
    return DimerParams(parameters["j_x"], parameters["j_y"], parameters["j_z"])
