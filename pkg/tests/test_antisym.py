import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aqlab.antisym import (
    MAX_D,
    Permutation,
    antisymmetric_state,
    bell_basis,
    construction_stages,
    correlation_probability,
    generalized_bell,
    index_of_correlation,
    iterative_construction,
    joint_distribution,
    levi_civita,
    permutations,
    post_projection_state,
)
from aqlab.core import Ket, derive_rng, fidelity, measure_projective, reduced_state
from aqlab.gates import collective, haar_random_unitary


def test_levi_civita_examples():
    assert levi_civita((0, 1, 2)) == 1
    assert levi_civita((0, 2, 1)) == -1
    assert levi_civita((0, 0, 1)) == 0
    with pytest.raises(ValueError):
        levi_civita((0, 1, 3))


@given(st.permutations(range(5)))
def test_permutation_sign_matches_inversion_parity(image):
    inversions = sum(1 for a, b in itertools.combinations(image, 2) if a > b)
    assert Permutation(tuple(image)).sign == (-1) ** inversions


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation((0, 0, 1))


def test_permutation_count():
    assert sum(1 for _ in permutations(4)) == 24


def test_singlet():
    s = antisymmetric_state(2)
    assert np.allclose(s.amplitudes, np.array([0, 1, -1, 0]) / np.sqrt(2))


def test_a3_signs():
    a = antisymmetric_state(3).tensor_view() * np.sqrt(6)
    expected = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}
    for idx in itertools.product(range(3), repeat=3):
        assert a[idx] == pytest.approx(expected.get(idx, 0))


@pytest.mark.parametrize("d", range(2, 6))
def test_normalized(d):
    assert antisymmetric_state(d).norm() == pytest.approx(1, abs=1e-12)


def test_cap():
    with pytest.raises(ValueError, match=str(MAX_D)):
        antisymmetric_state(MAX_D + 1)
    with pytest.raises(ValueError):
        antisymmetric_state(1)


@pytest.mark.parametrize("d", range(2, 6))
def test_swap_negates(d):
    t = antisymmetric_state(d).tensor_view()
    for a, b in itertools.combinations(range(d), 2):
        axes = list(range(d))
        axes[a], axes[b] = b, a
        assert np.array_equal(t.transpose(axes), -t)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_born_rule_equivalence(d):
    joint = joint_distribution(antisymmetric_state(d))
    for idx in itertools.product(range(d), repeat=d):
        p = correlation_probability(idx, d)
        assert p == (1 / math.factorial(d) if len(set(idx)) == d else 0)
        assert abs(joint.get(idx, 0.0) - p) < 1e-12


def test_correlation_examples():
    assert correlation_probability((0, 1, 2), 3) == pytest.approx(1 / 6)
    assert correlation_probability((0, 0, 2), 3) == 0
    assert sum(correlation_probability(i, 3)
               for i in itertools.product(range(3), repeat=3)) == pytest.approx(1)
    with pytest.raises(ValueError):
        correlation_probability((0, 1, 3), 3)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_collective_invariance(d):
    a = antisymmetric_state(d)
    proj = a.projector().matrix
    rng = derive_rng(21, d)
    for _ in range(100):
        u = haar_random_unitary(d, rng)
        cu = collective(u, d).matrix
        assert np.max(np.abs(cu @ proj - proj @ cu)) < 1e-9
        assert np.allclose(cu @ a.amplitudes, np.linalg.det(u.matrix) * a.amplitudes, atol=1e-9)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_rotated_basis_outcomes_distinct(d):
    a = antisymmetric_state(d)
    for r in range(300):
        rng = derive_rng(31, d, r)
        basis = haar_random_unitary(d, rng).matrix
        state, seen = a, set()
        for party in range(d):
            o, state, _ = measure_projective(state, party, basis, rng)
            seen.add(o)
        assert len(seen) == d


@pytest.mark.parametrize("d", range(2, 7))
def test_single_particle_reductions(d):
    a = antisymmetric_state(d)
    for i in (0, d - 1):
        assert np.max(np.abs(reduced_state(a, [i]).matrix - np.eye(d) / d)) < 1e-12


@pytest.mark.parametrize("d", range(2, 7))
def test_index_of_correlation(d):
    ic = index_of_correlation(d)
    assert ic["index"] == pytest.approx(2 * math.log(d), abs=1e-9)
    assert ic["S_total"] == pytest.approx(0, abs=1e-9)
    assert ic["S_single"] == pytest.approx(ic["S_rest"], abs=1e-9)


@pytest.mark.parametrize("d", range(2, 7))
def test_iterative_construction(d):
    assert fidelity(iterative_construction(d), antisymmetric_state(d)) == pytest.approx(1, abs=1e-10)


def test_d3_construction_stages():
    st_ = construction_stages(3)
    seed = st_["seed"].tensor_view()
    assert np.allclose(seed, -seed.transpose(1, 0, 2))  # pair is antisymmetric
    # after the Fourier step particle 2 is uniform and unentangled
    after_f = st_["fourier"].amplitudes.reshape(9, 3)
    pair = st_["seed"].amplitudes.reshape(9, 3)[:, 0]
    assert np.allclose(after_f, np.outer(pair, np.ones(3) / np.sqrt(3)))
    assert fidelity(st_["final"], antisymmetric_state(3)) == pytest.approx(1, abs=1e-10)


def test_post_projection_example():
    s = post_projection_state(3, 0)
    assert np.allclose(s.amplitudes, Ket((3, 3), [0, 0, 0, 0, 0, 1, 0, -1, 0]).normalized().amplitudes)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_post_projection_matches_direct_projection(d):
    t = antisymmetric_state(d).tensor_view()
    for j in range(d):
        s = post_projection_state(d, j)
        direct = Ket(s.dims, t[j].reshape(-1)).normalized()
        assert fidelity(s, direct) == pytest.approx(1, abs=1e-12)
        view = s.tensor_view()
        for idx in itertools.product(range(d), repeat=d - 1):
            if j in idx:
                assert view[idx] == 0
        first = s.amplitudes[np.flatnonzero(s.amplitudes)[0]]
        assert first.real > 0 and abs(first.imag) < 1e-15


def test_post_projection_errors():
    with pytest.raises(ValueError):
        post_projection_state(3, 3)


def test_generalized_bell_examples():
    assert np.allclose(generalized_bell(1, 0, 2).amplitudes, np.array([1, 0, 0, -1]) / np.sqrt(2))
    assert np.allclose(generalized_bell(0, 0, 3).amplitudes,
                       np.array([1, 0, 0, 0, 1, 0, 0, 0, 1]) / np.sqrt(3))


@pytest.mark.parametrize("d", [2, 3, 4])
def test_bell_basis_orthonormal_and_complete(d):
    vecs = np.column_stack([k.amplitudes for _, k in bell_basis(d)])
    assert np.allclose(vecs.conj().T @ vecs, np.eye(d * d), atol=1e-12)
    assert np.allclose(vecs @ vecs.conj().T, np.eye(d * d), atol=1e-12)


def test_bell_index_errors():
    with pytest.raises((ValueError, IndexError)):
        generalized_bell(3, 0, 3)
