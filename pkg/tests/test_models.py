import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_hermitian
from core.errors import DimensionMismatchError, RealizabilityError
from core.linalg import SIGMA_Z, HermitianOperator
from core.models import (
    CU_ACETATE_RAW_CM,
    DimerParams,
    OscillatorPreset,
    PhysicalUnits,
    bell_basis_matrix,
    bell_energy,
    bell_state,
    bell_states,
    bell_swap_eps_f,
    bell_swap_problem,
    cu_acetate_preset,
    dimer_h0,
    driving_field_amplitude,
    orthonormal_control_hamiltonian,
    oscillator_control_decomposition,
    oscillator_problem,
    pauli_decompose,
    quantization_table,
    quantized_k,
    spin_flip_problem,
    zeeman_field_tesla,
    zeeman_realizability,
    zeeman_realizability_pauli,
    zermelo_hamiltonian_bell_block,
)
from core.protocol import full_unitary, solve

COUPLING_TRIPLES = [
    DimerParams(1.0, 0.5, 2.0),
    DimerParams.from_spin_convention(*CU_ACETATE_RAW_CM),
    DimerParams(0.3, -0.7, 1.1),
]


def zeeman_control(params: DimerParams) -> np.ndarray:
    b0 = params.j_z - params.j_minus
    eye = np.eye(2)
    return b0 / 2 * (np.kron(SIGMA_Z, eye) + np.kron(eye, SIGMA_Z))


# ============================
#          OSCILADOR
# ============================

def test_oscillator_preset():
    assert OscillatorPreset(2.0).eps_f == 3.0
    with pytest.raises(ValueError):
        OscillatorPreset(0.0)
    p = oscillator_problem(2.0, 1.0)
    assert np.allclose(np.diag(p.h0.matrix), [1.0, 3.0])


def test_oscillator_driving_field_at_quantized_k():
    k = quantized_k(1.5, 0)
    assert k == pytest.approx(4.5)
    position, momentum = oscillator_control_decomposition(1.0, k)
    assert abs(momentum) < 1e-9
    assert driving_field_amplitude(1.0, k) == pytest.approx(1.5 * math.sqrt(2), abs=1e-10)


def test_oscillator_off_resonance_is_not_a_position_field():
    with pytest.raises(RealizabilityError):
        driving_field_amplitude(1.0, 1.0)


# ============================
#        CUANTIZACIÓN
# ============================

@pytest.mark.parametrize("eps_f", [0.5, 1.5, 7.3])
def test_quantized_k_is_realizable(eps_f):
    for n in range(5):
        realizable, nearest, deviation = zeeman_realizability(eps_f, quantized_k(eps_f, n))
        assert realizable and nearest == n and deviation < 1e-9
    for n in range(3):
        realizable, _, _ = zeeman_realizability(eps_f, 1.01 * quantized_k(eps_f, n))
        assert not realizable


@pytest.mark.parametrize("eps_f", [0.5, 1.5, -2.0])
def test_pauli_route_agrees_with_cosine_route(eps_f):
    for row in quantization_table(eps_f, 5).rows:
        assert zeeman_realizability_pauli(eps_f, row.k)[0]
    k = 1.3 * quantized_k(eps_f, 1)
    _, _, by_cosine = zeeman_realizability(eps_f, k)
    _, _, by_pauli = zeeman_realizability_pauli(eps_f, k)
    assert by_pauli == pytest.approx(by_cosine, abs=1e-10)


def test_quantization_table_values():
    table = quantization_table(1.5, 5)
    assert [r.n for r in table.rows] == list(range(5))
    assert table.rows[0].k == pytest.approx(4.5)
    assert table.rows[0].delta_t == pytest.approx(math.pi / 3)
    for row in table.rows:
        assert row.k * (row.n + 0.5) ** 2 == pytest.approx(1.5 ** 2 / 2)
        assert row.delta_t == pytest.approx(math.pi / math.sqrt(2 * row.k))


@given(
    st.floats(min_value=0.01, max_value=100.0).flatmap(lambda x: st.sampled_from([x, -x])),
    st.integers(min_value=1, max_value=12),
)
@settings(max_examples=50, deadline=None)
def test_quantization_is_monotone(eps_f, rows):
    table = quantization_table(eps_f, rows)
    ks = [r.k for r in table.rows]
    times = [r.delta_t for r in table.rows]
    assert all(a > b for a, b in zip(ks, ks[1:]))
    assert all(a < b for a, b in zip(times, times[1:]))


def test_quantization_rejects_bad_input():
    with pytest.raises(ValueError):
        quantized_k(0.0, 1)
    with pytest.raises(ValueError):
        quantized_k(1.0, -1)
    with pytest.raises(ValueError):
        quantization_table(1.0, 0)


# ============================
#       DÍMERO DE ESPINES
# ============================

def test_spin_convention_divides_by_minus_four():
    params = DimerParams.from_spin_convention(4.0, -8.0, 2.0)
    assert (params.j_x, params.j_y, params.j_z) == (-1.0, 2.0, -0.5)


@pytest.mark.parametrize("params", COUPLING_TRIPLES, ids=["unit", "cu", "mixed"])
def test_bell_states_diagonalize_dimer(params):
    m = bell_basis_matrix(dimer_h0(params))
    assert np.all(m[:2, 2:] == 0) and np.all(m[2:, :2] == 0)
    jz, jm, jp = params.j_z, params.j_minus, params.j_plus
    assert np.allclose(np.diag(m).real, [-(jz + jm), -(jz - jm), jz - jp, jz + jp], atol=1e-12)
    assert bell_energy(params, "phi-") == pytest.approx(bell_swap_eps_f(params))


def test_bell_state_lookup():
    assert bell_state("phibar-").fidelity(bell_states().phi_bar_minus) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        bell_state("psi+")
    with pytest.raises(ValueError):
        spin_flip_problem(DimerParams(1.0, 0.5, 2.0), 1.0, "phi+", "phi+")


@pytest.mark.parametrize("params", COUPLING_TRIPLES, ids=["unit", "cu", "mixed"])
def test_bell_swap_control_is_zeeman_field(params):
    b0 = params.j_z - params.j_minus
    p = bell_swap_problem(params, 2 * b0 ** 2)
    sol = solve(p)
    assert np.max(np.abs(sol.hc_initial.matrix - zeeman_control(params))) < 1e-10
    assert 1 - p.psi_f.fidelity(full_unitary(p, sol, sol.delta_t).apply(p.psi_i)) < 1e-10


@pytest.mark.parametrize("params", COUPLING_TRIPLES, ids=["unit", "cu", "mixed"])
def test_zermelo_hamiltonian_bell_block(params):
    block = zermelo_hamiltonian_bell_block(params)
    b0 = params.j_z - params.j_minus
    sol = solve(bell_swap_problem(params, 2 * b0 ** 2))
    assembled = bell_basis_matrix(HermitianOperator(dimer_h0(params).matrix + sol.hc_initial.matrix))
    assert np.max(np.abs(assembled - block.matrix)) < 1e-10
    assert np.allclose(np.sort(block.eigenvalues), np.linalg.eigvalsh(block.matrix), atol=1e-10)
    for value, vector in zip(block.eigenvalues, block.eigenvectors.T):
        assert np.max(np.abs(block.matrix @ vector - value * vector)) < 1e-10


def test_pauli_weights_of_bell_control():
    params = DimerParams(1.0, 0.5, 2.0)
    k = 3.0
    sol = solve(bell_swap_problem(params, k))
    theta = bell_swap_eps_f(params) * math.pi / math.sqrt(2 * k)
    a = math.sqrt(k / 2)
    pauli = pauli_decompose(sol.hc_initial)
    expected = {
        ("z", "I"): -a / 2 * math.sin(theta),
        ("I", "z"): -a / 2 * math.sin(theta),
        ("x", "y"): -a / 2 * math.cos(theta),
        ("y", "x"): -a / 2 * math.cos(theta),
    }
    nonzero = pauli.nonzero(1e-10)
    assert set(nonzero) == set(expected)
    for key, value in expected.items():
        assert nonzero[key] == pytest.approx(value, abs=1e-10)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_pauli_decomposition_reconstructs(seed):
    h = random_hermitian(np.random.default_rng(seed), 4)
    assert np.max(np.abs(pauli_decompose(h).reconstruct() - h.matrix)) < 1e-12


def test_pauli_decomposition_requires_two_qubits():
    with pytest.raises(DimensionMismatchError):
        pauli_decompose(HermitianOperator(np.eye(2)))


@pytest.mark.parametrize("initial,final", [("phi+", "phi-"), ("phibar+", "phi-"), ("phibar-", "phibar+")])
def test_orthonormal_form_matches_solver_on_spin_flip(initial, final):
    params = DimerParams(1.0, 0.5, 2.0)
    k = 2.7
    p = spin_flip_problem(params, k, initial, final)
    sol = solve(p)
    closed = orthonormal_control_hamiltonian(p.psi_i, p.psi_f, bell_energy(params, final), k)
    assert np.max(np.abs(closed.matrix - sol.hc_initial.matrix)) < 1e-10


# ============================
#     ACETATO DE COBRE(II)
# ============================

def test_cu_acetate_time_is_sub_picosecond():
    preset = cu_acetate_preset()
    params = preset.params
    b0 = params.j_z - params.j_minus
    sol = solve(bell_swap_problem(params, 2 * b0 ** 2))
    ps = preset.units.natural_time_to_seconds(sol.delta_t) * 1e12
    assert 0.1 <= ps <= 0.4
    assert 0.5 * preset.expected_delta_t_ps <= ps <= 2 * preset.expected_delta_t_ps


def test_cu_acetate_zeeman_field():
    params = cu_acetate_preset().params
    field = zeeman_field_tesla(abs(params.j_z - params.j_minus))
    assert 120 < field < 140


def test_unit_round_trip():
    units = PhysicalUnits()
    for wavenumber in (1e-3, 0.02, 74.6, 3.1e4):
        back = units.angular_to_wavenumber(units.wavenumber_to_angular(wavenumber))
        assert back == pytest.approx(wavenumber, rel=1e-14)
    assert units.seconds_to_natural_time(units.natural_time_to_seconds(0.5)) == pytest.approx(0.5, rel=1e-14)
