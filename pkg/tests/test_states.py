import numpy as np
import pytest

from oracles import evolve_matrix, hamiltonian_matrix, imaginary_evolve_vector, terms_of
from warmstart.errors import NumericFailure, ValidationError
from warmstart.models import xx_chain, xz_chain
from warmstart.states import (
    StateVector,
    basis_state,
    bell_pair_state,
    dump_statevector_csv,
    evolve_imaginary,
    evolve_real,
    fidelity,
    from_amplitudes,
    load_statevector_csv,
    zero_state,
)


def test_basis_state_places_single_amplitude():
    s = basis_state(3, 5)
    assert s.n == 3 and s.dim == 8
    assert s.amplitudes[5] == 1.0
    assert np.sum(np.abs(s.amplitudes)) == 1.0


def test_zero_state_is_index_zero():
    assert np.array_equal(zero_state(2).amplitudes, basis_state(2, 0).amplitudes)


def test_basis_state_rejects_out_of_range():
    with pytest.raises(ValidationError):
        basis_state(2, 4)


def test_statevector_requires_unit_norm_power_of_two():
    with pytest.raises(ValidationError):
        StateVector(np.array([1.0, 1.0]))
    with pytest.raises(ValidationError):
        StateVector(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValidationError):
        StateVector(np.array([1.0]))


def test_from_amplitudes_normalizes_on_request():
    s = from_amplitudes(np.array([3.0, 4.0]), normalize=True)
    assert np.allclose(s.amplitudes, [0.6, 0.8])
    with pytest.raises(NumericFailure):
        from_amplitudes(np.zeros(2), normalize=True)


def test_bell_pair_state_layout():
    s = bell_pair_state(2)
    assert s.n == 4
    expected = np.zeros(16)
    for b in range(4):
        expected[b * 4 + b] = 0.5
    assert np.allclose(s.amplitudes, expected)


def test_fidelity_of_orthogonal_and_identical_states():
    a, b = basis_state(2, 0), basis_state(2, 3)
    assert fidelity(a, a) == 1.0
    assert fidelity(a, b) == 0.0
    with pytest.raises(ValidationError):
        fidelity(a, basis_state(3, 0))


@pytest.mark.parametrize("t", [0.0, 0.05, 0.7, 2.3, -1.1])
def test_real_evolution_matches_expm(t):
    h = xz_chain(3)
    dense = hamiltonian_matrix(terms_of(h))
    rng = np.random.default_rng(3)
    raw = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    state = from_amplitudes(raw, normalize=True)
    out = evolve_real(state, h, t)
    expected = evolve_matrix(dense, t) @ state.amplitudes
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-11


@pytest.mark.parametrize("tau", [0.0, 0.05, 0.9, 3.0])
def test_imaginary_evolution_matches_normalized_expm(tau):
    h = xx_chain(3)
    dense = hamiltonian_matrix(terms_of(h))
    rng = np.random.default_rng(4)
    raw = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    state = from_amplitudes(raw, normalize=True)
    out = evolve_imaginary(state, h, tau)
    expected = imaginary_evolve_vector(dense, tau, state.amplitudes)
    # both are unit vectors equal up to nothing: the product form has no phase freedom
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-10


def test_imaginary_evolution_projects_to_ground_state():
    h = xx_chain(2)
    dense = hamiltonian_matrix(terms_of(h))
    vals, vecs = np.linalg.eigh(dense)
    ground = vecs[:, 0]
    rng = np.random.default_rng(5)
    raw = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    raw += ground * 2.0  # guarantee nonzero overlap
    state = from_amplitudes(raw, normalize=True)
    out = evolve_imaginary(state, h, 40.0)
    assert np.abs(np.vdot(ground, out.amplitudes)) ** 2 > 1.0 - 1e-10


def test_evolution_rejects_mismatched_sizes_and_bad_times():
    h = xx_chain(2)
    with pytest.raises(ValidationError):
        evolve_real(basis_state(3), h, 0.1)
    with pytest.raises(ValidationError):
        evolve_real(basis_state(2), h, float("nan"))
    with pytest.raises(ValidationError):
        evolve_imaginary(basis_state(2), h, -0.1)


def test_statevector_csv_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(6)
    state = from_amplitudes(rng.standard_normal(8) + 1j * rng.standard_normal(8), normalize=True)
    path = tmp_path / "state.csv"
    dump_statevector_csv(state, path)
    again = load_statevector_csv(path)
    assert np.array_equal(state.amplitudes, again.amplitudes)


def test_statevector_csv_rejects_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n0,1.0,0.0\n")
    with pytest.raises(ValidationError):
        load_statevector_csv(path)
