import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aqlab.core import (
    DensityMatrix,
    DimensionError,
    Ket,
    Operator,
    apply_on,
    basis_ket,
    derive_rng,
    fidelity,
    measure_projective,
    measure_projectors,
    outcome_probabilities,
    partial_trace,
    random_ket,
    reduced_state,
    remove_subsystems,
    schmidt_spectrum,
    tensor,
    von_neumann_entropy,
)
from aqlab.gates import haar_random_unitary

dims_st = st.lists(st.integers(2, 4), min_size=1, max_size=4)


def brute_force_apply(op, state, targets):
    """Index-by-index reference for apply_on."""
    dims = state.dims
    out = np.zeros(state.size, dtype=complex)
    sub = [dims[t] for t in targets]
    for idx in itertools.product(*[range(d) for d in dims]):
        amp = state.amplitudes[np.ravel_multi_index(idx, dims)]
        if amp == 0:
            continue
        col = np.ravel_multi_index([idx[t] for t in targets], sub)
        for row, new in enumerate(itertools.product(*[range(d) for d in sub])):
            j = list(idx)
            for t, v in zip(targets, new):
                j[t] = v
            out[np.ravel_multi_index(j, dims)] += op.matrix[row, col] * amp
    return out


def test_basis_ket_row_major():
    k = basis_ket((2, 3), (1, 2))
    assert k.amplitudes[5] == 1 and k.norm() == 1


def test_basis_ket_rejects_bad_label():
    with pytest.raises(ValueError):
        basis_ket((2, 2), (0, 2))


def test_dimension_cap():
    with pytest.raises(DimensionError):
        Ket((10,) * 7, np.zeros(10 ** 7))


def test_shape_mismatch():
    with pytest.raises(ValueError):
        Ket((2, 2), np.ones(3))


@given(dims=dims_st, seed=st.integers(0, 2 ** 31), data=st.data())
def test_apply_on_matches_brute_force(dims, seed, data):
    rng = np.random.default_rng(seed)
    state = random_ket(dims, rng)
    n_t = data.draw(st.integers(1, min(2, len(dims))))
    targets = data.draw(st.permutations(range(len(dims)))).__getitem__(slice(0, n_t))
    sub = tuple(dims[t] for t in targets)
    m = int(np.prod(sub))
    op = Operator(sub, rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
    got = apply_on(op, state, targets).amplitudes
    assert np.allclose(got, brute_force_apply(op, state, targets), atol=1e-12)


def test_apply_on_target_errors():
    s = basis_ket((2, 2), (0, 0))
    op = Operator((2,), np.eye(2))
    with pytest.raises(IndexError):
        apply_on(op, s, (2,))
    with pytest.raises(ValueError):
        apply_on(Operator((2, 2), np.eye(4)), s, (0, 0))


@given(seed=st.integers(0, 2 ** 31))
def test_unitary_preserves_norm(seed):
    rng = np.random.default_rng(seed)
    s = random_ket((3, 3, 3), rng)
    u = haar_random_unitary(3, rng)
    assert abs(apply_on(u, s, (1,)).norm() - 1) < 1e-12


def test_tensor_and_inner():
    a, b = basis_ket((2,), (1,)), basis_ket((3,), (2,))
    ab = tensor(a, b)
    assert ab.dims == (2, 3) and ab.amplitudes[5] == 1
    assert ab.inner(ab) == 1


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.array([[1, 1], [0, 0]]))
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.diag([1.5, -0.5]))


@given(seed=st.integers(0, 2 ** 31))
def test_partial_trace_properties(seed):
    rng = np.random.default_rng(seed)
    s = random_ket((2, 3, 2), rng)
    rho = s.density()
    r0 = partial_trace(rho, [0])
    assert abs(np.trace(r0.matrix) - 1) < 1e-12
    assert np.all(r0.eigenvalues() > -1e-12)
    # tracing in two stages equals tracing at once
    r02 = partial_trace(rho, [0, 2])
    assert np.allclose(partial_trace(r02, [0]).matrix, r0.matrix, atol=1e-12)
    # pure bipartite state: both sides share the entropy
    assert abs(von_neumann_entropy(reduced_state(s, [1]))
               - von_neumann_entropy(reduced_state(s, [0, 2]))) < 1e-9


def test_partial_trace_keep_all_is_identity():
    rho = basis_ket((2, 2), (0, 1)).density()
    assert partial_trace(rho, [0, 1]) is rho


def test_schmidt_spectrum_matches_reduced_state():
    s = random_ket((3, 4), np.random.default_rng(0))
    ev = np.sort(reduced_state(s, [0]).eigenvalues())
    assert np.allclose(np.sort(schmidt_spectrum(s, [0]))[-3:], ev, atol=1e-12)


def test_entropy_of_maximally_mixed():
    rho = DensityMatrix((4,), np.eye(4) / 4)
    assert abs(von_neumann_entropy(rho) - np.log(4)) < 1e-12


def test_measure_requires_rng():
    with pytest.raises(ValueError):
        measure_projective(basis_ket((2,), (0,)), 0)


def test_measure_basis_state_is_deterministic(rng):
    s = basis_ket((3, 3), (2, 1))
    o, post, p = measure_projective(s, 1, None, rng)
    assert (o, p) == (1, 1.0) and fidelity(post, s) == pytest.approx(1)


def test_measure_rejects_non_orthonormal_basis(rng):
    with pytest.raises(ValueError):
        measure_projective(basis_ket((2,), (0,)), 0, [[1, 0], [1, 1]], rng)


def test_measurement_frequencies(rng):
    s = Ket((2,), [np.sqrt(0.3), np.sqrt(0.7)])
    hits = sum(measure_projective(s, 0, None, rng)[0] for _ in range(20000))
    sigma = np.sqrt(0.3 * 0.7 / 20000)
    assert abs(hits / 20000 - 0.7) < 5 * sigma


@given(seed=st.integers(0, 2 ** 31))
def test_collapse_in_rotated_basis(seed):
    rng = np.random.default_rng(seed)
    s = random_ket((3, 2), rng)
    u = haar_random_unitary(3, rng).matrix
    probs = outcome_probabilities(s, 0, u)
    assert abs(probs.sum() - 1) < 1e-12
    o, post, p = measure_projective(s, 0, u, rng)
    assert p == pytest.approx(probs[o])
    # collapsed state lies in the chosen basis vector on subsystem 0
    rho0 = reduced_state(post, [0]).matrix
    v = u[:, o]
    assert abs(np.vdot(v, rho0 @ v) - 1) < 1e-9


def test_joint_measurement_of_pair(rng):
    bell = Ket((2, 2), [1, 0, 0, 1]).normalized()
    o, post, p = measure_projective(tensor(bell, basis_ket((2,), (0,))), (0, 1), None, rng)
    assert o in (0, 3) and p == pytest.approx(0.5)


def test_remove_subsystems():
    s = tensor(basis_ket((3,), (2,)), Ket((2,), [0.6, 0.8]))
    left = remove_subsystems(s, {0: 2})
    assert left.dims == (2,) and np.allclose(left.amplitudes, [0.6, 0.8])


def test_measure_projectors_completeness(rng):
    s = basis_ket((2,), (0,))
    with pytest.raises(ValueError):
        measure_projectors(s, [Operator((2,), np.diag([1.0, 0]))], rng)


def test_derive_rng_streams_independent_and_reproducible():
    a = derive_rng(7, 0, 3).random(5)
    assert np.array_equal(a, derive_rng(7, 0, 3).random(5))
    assert not np.array_equal(a, derive_rng(7, 0, 4).random(5))
    assert not np.array_equal(a, derive_rng(8, 0, 3).random(5))
