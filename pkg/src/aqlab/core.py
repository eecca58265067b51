"""Dense linear algebra over small multi-qudit Hilbert spaces.

Basis convention: subsystem 0 is the most significant index of the
flattened amplitude vector (row-major / big-endian), so the basis string
``(i0, i1, ..., iN-1)`` sits at ``np.ravel_multi_index(idx, dims)``.
Subsystems are addressed with 0-based indices throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

ATOL = 1e-10
SUM_ATOL = 1e-9
MAX_AMPLITUDES = 10**6
MAX_MATRIX_ENTRIES = 2**24


class DimensionError(ValueError):
    """Raised for malformed or oversized subsystem dimensions."""


def _check_dims(dims: Sequence[int], limit: int = MAX_AMPLITUDES) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise DimensionError("at least one subsystem is required")
    if any(d < 2 for d in dims):
        raise DimensionError(f"every subsystem dimension must be >= 2, got {dims}")
    size = 1
    for d in dims:
        size *= d
        if size > limit:
            raise DimensionError(
                f"state space {dims} exceeds the cap of {limit} amplitudes"
            )
    return dims


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Ket:
    """State vector over ``dims``; amplitudes are stored read-only."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != math.prod(dims):
            raise DimensionError(
                f"{amps.size} amplitudes do not match dims {dims}"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def size(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, atol: float = ATOL) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= atol

    def normalized(self) -> "Ket":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize a zero vector")
        return Ket(self.dims, self.amplitudes / n)

    def tensor_view(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def inner(self, other: "Ket") -> complex:
        """``<self|other>``."""
        if self.dims != other.dims:
            raise DimensionError(f"dims differ: {self.dims} vs {other.dims}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def projector(self) -> "Operator":
        return Operator(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f"Ket(dims={self.dims}, size={self.size})"


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix acting on the space ``dims``."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        dims = _check_dims(self.dims)
        n = int(np.prod(dims))
        if n * n > MAX_MATRIX_ENTRIES:
            raise DimensionError(
                f"operator on {dims} would need {n * n} entries "
                f"(cap {MAX_MATRIX_ENTRIES})"
            )
        mat = _frozen(self.matrix)
        if mat.shape != (n, n):
            raise DimensionError(f"matrix shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @property
    def dag(self) -> "Operator":
        return Operator(self.dims, self.matrix.conj().T)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            if other.dims != self.dims:
                raise DimensionError(f"dims differ: {self.dims} vs {other.dims}")
            return Operator(self.dims, self.matrix @ other.matrix)
        if isinstance(other, Ket):
            if other.dims != self.dims:
                raise DimensionError(f"dims differ: {self.dims} vs {other.dims}")
            return Ket(self.dims, self.matrix @ other.amplitudes)
        return NotImplemented

    def is_unitary(self, atol: float = ATOL) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= atol)

    def is_projector(self, atol: float = ATOL) -> bool:
        m = self.matrix
        return bool(
            np.max(np.abs(m @ m - m)) <= atol and np.max(np.abs(m - m.conj().T)) <= atol
        )

    def __repr__(self):
        return f"Operator(dims={self.dims})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        op = Operator(self.dims, self.matrix)
        m = op.matrix
        if np.max(np.abs(m - m.conj().T)) > ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > ATOL:
            raise ValueError(f"density matrix trace {np.trace(m).real} != 1")
        if np.linalg.eigvalsh(m).min() < -ATOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "dims", op.dims)
        object.__setattr__(self, "matrix", m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"


def basis_ket(dims: Sequence[int], labels: Sequence[int]) -> Ket:
    """Computational basis state ``|labels>``."""
    dims = _check_dims(dims)
    if len(labels) != len(dims):
        raise DimensionError("one label per subsystem is required")
    amps = np.zeros(int(np.prod(dims)), dtype=complex)
    amps[np.ravel_multi_index(tuple(labels), dims)] = 1.0
    return Ket(dims, amps)


def tensor(a: Ket, b: Ket) -> Ket:
    return Ket(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def kron_all(kets: Sequence[Ket]) -> Ket:
    out = kets[0]
    for k in kets[1:]:
        out = tensor(out, k)
    return out


def fidelity(a: Ket, b: Ket) -> float:
    """``|<a|b>|^2`` for normalized kets (global phase insensitive)."""
    return abs(a.inner(b)) ** 2


def _check_targets(targets: Sequence[int], n: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target indices {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise IndexError(f"subsystem index {t} out of range for {n} subsystems")
    return targets


def apply_matrix(amplitudes: np.ndarray, dims: tuple[int, ...], mat: np.ndarray,
                 targets: tuple[int, ...]) -> np.ndarray:
    """Array-level kernel behind :func:`apply_on`; no validation."""
    if len(targets) == 1:
        t = targets[0]
        left = math.prod(dims[:t])
        psi = amplitudes.reshape(left, dims[t], -1)
        return np.matmul(mat, psi).reshape(-1)
    psi = amplitudes.reshape(dims)
    psi = np.moveaxis(psi, targets, range(len(targets)))
    shape = psi.shape
    k = mat.shape[0]
    psi = (mat @ psi.reshape(k, -1)).reshape(shape)
    psi = np.moveaxis(psi, range(len(targets)), targets)
    return psi.reshape(-1)


def apply_on(op: Operator, state: Ket, targets: Sequence[int]) -> Ket:
    """Apply ``op`` to the ordered ``targets`` of ``state``, identity elsewhere.

    ``op.dims`` must equal the targeted subsystem dims in the given order;
    the first target corresponds to the most significant factor of ``op``.
    """
    targets = _check_targets(targets, len(state.dims))
    want = tuple(state.dims[t] for t in targets)
    if op.dims != want:
        raise DimensionError(f"operator dims {op.dims} do not match targets {want}")
    return Ket(state.dims, apply_matrix(state.amplitudes, state.dims, op.matrix, targets))


def _basis_matrix(basis, dim: int) -> np.ndarray:
    if basis is None:
        return np.eye(dim, dtype=complex)
    if isinstance(basis, np.ndarray):
        mat = np.asarray(basis, dtype=complex)
    else:
        mat = np.column_stack(
            [b.amplitudes if isinstance(b, Ket) else np.asarray(b, dtype=complex)
             for b in basis]
        )
    if mat.shape != (dim, dim):
        raise ValueError(f"basis must hold {dim} vectors of length {dim}")
    if np.max(np.abs(mat.conj().T @ mat - np.eye(dim))) > ATOL:
        raise ValueError("measurement basis is not orthonormal")
    return mat


def outcome_probabilities(state: Ket, subsystems, basis=None) -> np.ndarray:
    """Born probabilities of measuring ``subsystems`` in ``basis``."""
    targets = _as_targets(subsystems, len(state.dims))
    dim = int(np.prod([state.dims[t] for t in targets]))
    mat = _basis_matrix(basis, dim)
    coeffs = apply_matrix(state.amplitudes, state.dims, mat.conj().T, targets)
    coeffs = np.moveaxis(coeffs.reshape(state.dims), targets, range(len(targets)))
    probs = np.sum(np.abs(coeffs.reshape(dim, -1)) ** 2, axis=1)
    return probs / probs.sum()


def _as_targets(subsystems, n: int) -> tuple[int, ...]:
    if isinstance(subsystems, (int, np.integer)):
        subsystems = (int(subsystems),)
    return _check_targets(subsystems, n)


def measure_projective(state: Ket, subsystem, basis=None,
                       rng: np.random.Generator | None = None):
    """Projective measurement of one subsystem (or a tuple of subsystems).

    ``basis`` is a sequence of orthonormal kets/arrays, or a unitary whose
    columns are the basis vectors; ``None`` means the computational basis.
    Returns ``(outcome, collapsed, probability)`` where ``collapsed`` is the
    renormalized post-measurement state of the whole register.
    """
    if rng is None:
        raise ValueError("an explicit random generator is required")
    targets = _as_targets(subsystem, len(state.dims))
    sub_dims = tuple(state.dims[t] for t in targets)
    dim = math.prod(sub_dims)
    mat = None if basis is None else _basis_matrix(basis, dim)
    amps = state.amplitudes
    norm2 = float(np.vdot(amps, amps).real)
    if norm2 == 0.0:
        raise ValueError("cannot measure a zero-norm state")

    # rotate the measured subsystems so the basis becomes computational
    rotated = amps if mat is None else apply_matrix(amps, state.dims, mat.conj().T, targets)
    if len(targets) == 1:
        left = math.prod(state.dims[: targets[0]])
        block = rotated.reshape(left, dim, -1)
        probs = np.einsum("ldr,ldr->d", block, block.conj()).real / norm2
    else:
        front = np.moveaxis(rotated.reshape(state.dims), targets, range(len(targets)))
        rows = front.reshape(dim, -1)
        probs = np.sum(np.abs(rows) ** 2, axis=1) / norm2
    if abs(probs.sum() - 1.0) > SUM_ATOL:
        raise ValueError("Born probabilities do not sum to one")
    cdf = np.cumsum(probs)
    outcome = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    outcome = min(outcome, dim - 1)
    scale = 1.0 / np.sqrt(probs[outcome] * norm2)

    if len(targets) == 1:
        out = np.zeros_like(block)
        out[:, outcome, :] = block[:, outcome, :] * scale
        collapsed = out.reshape(-1)
    else:
        out = np.zeros_like(rows)
        out[outcome] = rows[outcome] * scale
        out = out.reshape(sub_dims + front.shape[len(targets):])
        collapsed = np.moveaxis(out, range(len(targets)), targets).reshape(-1)
    if mat is not None:
        collapsed = apply_matrix(collapsed, state.dims, mat, targets)
    return outcome, Ket(state.dims, collapsed), float(probs[outcome])


def remove_subsystems(state: Ket, labels: dict[int, int]) -> Ket:
    """Slice out subsystems already collapsed onto computational labels.

    ``labels`` maps subsystem index to its basis label. The returned ket is
    the (unnormalized) amplitude slice of the remaining subsystems.
    """
    idx = [slice(None)] * len(state.dims)
    for t, lab in labels.items():
        idx[t] = int(lab)
    rest = tuple(d for i, d in enumerate(state.dims) if i not in labels)
    return Ket(rest, state.tensor_view()[tuple(idx)])


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced state on ``keep`` (ascending subsystem order)."""
    n = len(rho.dims)
    keep = sorted(_check_targets(keep, n))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if len(keep) == n:
        return rho
    drop = [i for i in range(n) if i not in keep]
    kd = int(np.prod([rho.dims[i] for i in keep]))
    t = rho.matrix.reshape(rho.dims + rho.dims)
    order = keep + drop
    t = t.transpose(order + [n + i for i in order])
    rd = int(np.prod([rho.dims[i] for i in drop]))
    red = np.einsum("arbr->ab", t.reshape(kd, rd, kd, rd))
    return DensityMatrix(tuple(rho.dims[i] for i in keep), red)


def reduced_state(state: Ket, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix of a pure state without forming the full projector."""
    n = len(state.dims)
    keep = sorted(_check_targets(keep, n))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    kd = int(np.prod([state.dims[i] for i in keep]))
    if kd * kd > MAX_MATRIX_ENTRIES:
        raise DimensionError(f"reduced state on {kd} levels exceeds the matrix cap")
    psi = np.moveaxis(state.tensor_view(), keep, range(len(keep))).reshape(kd, -1)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(tuple(state.dims[i] for i in keep), psi @ psi.conj().T)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``-Tr rho ln rho`` in nats; eigenvalues above -1e-10 are clamped to 0."""
    return spectrum_entropy(rho.eigenvalues())


def spectrum_entropy(eigenvalues: np.ndarray) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.min(initial=0.0) < -ATOL:
        raise ValueError("negative eigenvalue below tolerance")
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def schmidt_spectrum(state: Ket, keep: Sequence[int]) -> np.ndarray:
    """Nonzero spectrum shared by both reductions of a pure bipartition.

    Computed from the Gram matrix on the smaller side so it stays cheap
    when the complementary reduction is too large to form explicitly.
    """
    n = len(state.dims)
    keep = sorted(_check_targets(keep, n))
    kd = int(np.prod([state.dims[i] for i in keep]))
    psi = np.moveaxis(state.tensor_view(), keep, range(len(keep))).reshape(kd, -1)
    psi = psi / np.linalg.norm(psi)
    gram = psi @ psi.conj().T if psi.shape[0] <= psi.shape[1] else psi.T @ psi.conj()
    return np.linalg.eigvalsh(gram)


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for sub-stream ``key`` of master ``seed``.

    The same ``(seed, key)`` always yields the same stream, independent of
    which other streams were drawn, so serial and parallel loops agree.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def measure_projectors(state: Ket, projectors: Sequence[Operator],
                       rng: np.random.Generator):
    """Measure a complete set of orthogonal projectors on the whole register.

    Unlike :func:`measure_projective` the projectors may have rank > 1, so
    coherence inside each outcome subspace survives the collapse.
    """
    if rng is None:
        raise ValueError("an explicit random generator is required")
    mats = [p.matrix for p in projectors]
    total = sum(mats)
    if np.max(np.abs(total - np.eye(total.shape[0]))) > ATOL:
        raise ValueError("projectors do not resolve the identity")
    for p in projectors:
        if p.dims != state.dims or not p.is_projector():
            raise ValueError("every element must be a projector on the state space")
    norm2 = float(np.vdot(state.amplitudes, state.amplitudes).real)
    if norm2 == 0.0:
        raise ValueError("cannot measure a zero-norm state")
    branches = [m @ state.amplitudes for m in mats]
    probs = np.array([np.vdot(b, b).real for b in branches]) / norm2
    cdf = np.cumsum(probs)
    outcome = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")),
                  len(mats) - 1)
    collapsed = branches[outcome] / np.sqrt(probs[outcome] * norm2)
    return outcome, Ket(state.dims, collapsed), float(probs[outcome])


def random_ket(dims: Sequence[int], rng: np.random.Generator) -> Ket:
    """Haar-random pure state (normalized complex Gaussian vector)."""
    dims = _check_dims(dims)
    n = math.prod(dims)
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return Ket(dims, z / np.linalg.norm(z))
