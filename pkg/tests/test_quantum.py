import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mqrac.quantum import (
    CIRCULAR,
    COMPUTATIONAL,
    HADAMARD,
    Basis1Q,
    StateVector,
    basis_along,
    basis_from_angles,
    bloch_to_state,
    ket,
    make_bell,
    make_ghz,
    measure,
    rotate_bloch,
    rotation_matrix,
    state_overlap,
    state_to_bloch,
    su2_rotation,
)

from oracles import joint_probability, singlet

S2 = 1 / np.sqrt(2)
BETA_PLUS = np.arccos(np.sqrt((np.sqrt(2) + 1) / (2 * np.sqrt(2))))


def test_resource_amplitudes():
    assert np.allclose(make_bell().amplitudes, [0, S2, -S2, 0])
    ghz = np.zeros(8)
    ghz[[0, 7]] = S2
    assert np.allclose(make_ghz().amplitudes, ghz)


def test_state_validation():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        StateVector(np.ones(16) / 4)
    assert StateVector(np.array([1.0])).qubit_count == 0


def test_basis_validation():
    with pytest.raises(ValueError):
        Basis1Q(np.array([1, 0]), np.array([S2, S2]))


def test_beta_plus_overlap():
    b = basis_from_angles(BETA_PLUS, 0.0)
    assert abs(b.v0[0]) ** 2 == pytest.approx((np.sqrt(2) + 1) / (2 * np.sqrt(2)), abs=1e-12)
    assert abs(b.v0[0]) ** 2 == pytest.approx(0.85355, abs=1e-5)


def test_ghz_x_measurement_branches():
    branches = measure(make_ghz(), 0, HADAMARD)
    assert [b.probability for b in branches] == pytest.approx([0.5, 0.5], abs=1e-12)
    plus = np.array([S2, 0, 0, S2])
    minus = np.array([S2, 0, 0, -S2])
    assert np.allclose(branches[0].state.amplitudes, plus)
    assert np.allclose(branches[1].state.amplitudes, minus)


def test_null_branch_and_post_state_without_discard():
    zero = StateVector(np.array([1, 0, 0, 0]))
    br = measure(zero, 1, COMPUTATIONAL)
    assert br[1].is_null and br[1].probability == 0.0
    kept = measure(zero, 1, COMPUTATIONAL, discard=False)[0].state
    assert kept.qubit_count == 2


def test_measure_qubit_out_of_range():
    with pytest.raises(IndexError):
        measure(make_bell(), 2, COMPUTATIONAL)


def test_singlet_probabilities_agree_with_projector_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        ta, pa, tb, pb = rng.uniform(0, np.pi, 4)
        a, b = basis_from_angles(ta, pa), basis_from_angles(tb, pb)
        for oa, va in enumerate(a.vectors):
            first = measure(make_bell(), 0, a)[oa]
            if first.is_null:
                continue
            for ob, vb in enumerate(b.vectors):
                p = first.probability * measure(first.state, 0, b)[ob].probability
                assert p == pytest.approx(joint_probability(singlet(), va, vb), abs=1e-12)


def test_pauli_bases_bloch_directions():
    assert np.allclose(COMPUTATIONAL.bloch, [0, 0, 1])
    assert np.allclose(HADAMARD.bloch, [1, 0, 0])
    assert np.allclose(CIRCULAR.bloch, [0, 1, 0])


def test_rotations_are_right_handed_and_match_su2():
    assert np.allclose(rotation_matrix("z", np.pi / 2) @ [1, 0, 0], [0, 1, 0])
    assert np.allclose(rotation_matrix("y", np.pi / 2) @ [0, 0, 1], [1, 0, 0])
    rng = np.random.default_rng(5)
    for axis in "xyz":
        angle = rng.uniform(0, 2 * np.pi)
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        psi = bloch_to_state(v).amplitudes
        rotated = su2_rotation(axis, angle) @ psi
        assert np.allclose(state_to_bloch(rotated), rotate_bloch(v, axis, angle), atol=1e-12)
    with pytest.raises(ValueError):
        rotate_bloch([1, 1, 0], "x", 0.1)


def test_basis_along_projects_onto_direction():
    v = np.array([1.0, 2.0, 2.0]) / 3
    b = basis_along(v)
    assert np.allclose(b.bloch, v)
    assert state_overlap(StateVector(b.v0), bloch_to_state(v)) == pytest.approx(1.0)
    assert b.same_measurement(b.swapped())


unit = st.floats(-1, 1, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.tuples(unit, unit, unit).filter(lambda t: np.linalg.norm(t) > 1e-3))
def test_bloch_round_trip(t):
    v = np.array(t) / np.linalg.norm(t)
    assert np.allclose(state_to_bloch(bloch_to_state(v)), v, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_branch_probabilities_sum_to_one(q, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2**q) + 1j * rng.normal(size=2**q)
    state = StateVector(amps / np.linalg.norm(amps))
    basis = basis_from_angles(*rng.uniform(0, np.pi, 2))
    total = sum(b.probability for b in measure(state, int(rng.integers(q)), basis))
    assert abs(total - 1) < 1e-12


def random_sequence_total(rng):
    """Sum of leaf probabilities when every qubit of a random state is measured."""
    q = int(rng.integers(1, 4))
    amps = rng.normal(size=2**q) + 1j * rng.normal(size=2**q)
    leaves = [(1.0, StateVector(amps / np.linalg.norm(amps)))]
    while leaves[0][1].qubit_count:
        nxt = []
        for p, s in leaves:
            basis = basis_from_angles(*rng.uniform(0, np.pi, 2))
            for b in measure(s, int(rng.integers(s.qubit_count)), basis):
                if not b.is_null:
                    nxt.append((p * b.probability, b.state))
        leaves = nxt
    return sum(p for p, _ in leaves)


def test_random_measurement_sequences_conserve_probability():
    rng = np.random.default_rng(2024)
    worst = max(abs(random_sequence_total(rng) - 1) for _ in range(2000))
    assert worst < 1e-12


def test_ket_is_normalized():
    assert np.linalg.norm(ket(0.3, 1.1)) == pytest.approx(1.0)
