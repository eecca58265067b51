"""Totally antisymmetric N-qudit states (N = d) and their properties."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import (
    Ket,
    apply_on,
    basis_ket,
    fidelity,
    reduced_state,
    schmidt_spectrum,
    spectrum_entropy,
    tensor,
    von_neumann_entropy,
)
from .gates import fourier, gxor

MAX_D = 6


@dataclass(frozen=True)
class Permutation:
    """Bijection of 0..n-1 given by its image array."""

    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(i) for i in self.image)
        if sorted(image) != list(range(len(image))):
            raise ValueError(f"{image} is not a permutation of 0..{len(image) - 1}")
        object.__setattr__(self, "image", image)

    @property
    def sign(self) -> int:
        # parity from the cycle decomposition: each k-cycle is k-1 transpositions
        seen = [False] * len(self.image)
        parity = 0
        for start in range(len(self.image)):
            if seen[start]:
                continue
            j, length = start, 0
            while not seen[j]:
                seen[j] = True
                j = self.image[j]
                length += 1
            parity += length - 1
        return -1 if parity % 2 else 1

    def __len__(self):
        return len(self.image)


def permutations(n: int) -> Iterator[Permutation]:
    for p in itertools.permutations(range(n)):
        yield Permutation(p)


def levi_civita(indices: Sequence[int]) -> int:
    n = len(indices)
    for i in indices:
        if not 0 <= i < n:
            raise ValueError(f"label {i} outside 0..{n - 1}")
    if len(set(indices)) < n:
        return 0
    return Permutation(tuple(indices)).sign


def _check_d(d: int, lo: int = 2, hi: int = MAX_D) -> int:
    d = int(d)
    if not lo <= d <= hi:
        raise ValueError(f"d={d} outside the supported range {lo}..{hi} (cap {MAX_D})")
    return d


def slater_amplitudes(labels: Sequence[int], d: int) -> np.ndarray:
    """Antisymmetrized product of ``|labels>`` on len(labels) qudits of dim d."""
    n = len(labels)
    amps = np.zeros(d**n, dtype=complex)
    norm = 1.0 / math.sqrt(math.factorial(n))
    for p in permutations(n):
        idx = np.ravel_multi_index(tuple(labels[i] for i in p.image), (d,) * n)
        amps[idx] = p.sign * norm
    return amps


def antisymmetric_state(d: int) -> Ket:
    """|A_d>: amplitude eps_{i1..id}/sqrt(d!) on every basis string."""
    d = _check_d(d)
    return Ket((d,) * d, slater_amplitudes(range(d), d))


def _extend(prev: np.ndarray, m: int) -> np.ndarray:
    """Grow an (m-1)-particle antisymmetric state to m particles of dim m.

    Old labels shift up by one so that |0> is free, the new particle starts
    in |c> and is Fourier transformed, then a GXOR controlled by the new
    particle hits every earlier particle. c = 0 for odd m and m/2 for even
    m; that choice is what makes the k-dependent signs collapse to a
    global phase.
    """
    n_old = m - 1
    old = prev.reshape((m - 1,) * n_old)
    emb = np.zeros((m,) * n_old, dtype=complex)
    emb[(slice(1, None),) * n_old] = old
    c = 0 if m % 2 else m // 2
    state = tensor(Ket((m,) * n_old, emb), basis_ket((m,), (c,)))
    state = apply_on(fourier(m), state, (n_old,))
    g = gxor(m)
    for t in range(n_old - 1, -1, -1):
        state = apply_on(g, state, (n_old, t))
    return state.amplitudes


def iterative_construction(d: int) -> Ket:
    """Prepare |A_d> with Fourier and GXOR gates.

    For d = 3 this is the circuit GR_31 GR_32 F_3 acting on
    |0>_3 (|2>_1|1>_2 - |1>_1|2>_2)/sqrt(2), applied right to left.
    Other d use the recursive extension in :func:`_extend`; the result is
    checked against :func:`antisymmetric_state` and any d where the check
    fails is reported as unsupported.
    """
    d = _check_d(d)
    if d == 3:
        return _circuit_d3()[-1]
    amps = np.array([1.0 + 0j])
    for m in range(2, d + 1):
        amps = _extend(amps, m)
    out = Ket((d,) * d, amps)
    if fidelity(out, antisymmetric_state(d)) < 1 - 1e-10:
        raise NotImplementedError(f"iterative construction does not reproduce |A_{d}>")
    return out


def _circuit_d3() -> list[Ket]:
    pair = (basis_ket((3, 3), (2, 1)).amplitudes - basis_ket((3, 3), (1, 2)).amplitudes)
    seed = tensor(Ket((3, 3), pair / np.sqrt(2)), basis_ket((3,), (0,)))
    after_f = apply_on(fourier(3), seed, (2,))
    after_g32 = apply_on(gxor(3), after_f, (2, 1))
    after_g31 = apply_on(gxor(3), after_g32, (2, 0))
    return [seed, after_f, after_g32, after_g31]


def construction_stages(d: int = 3) -> dict[str, Ket]:
    """Intermediate states of the d = 3 preparation circuit."""
    if int(d) != 3:
        raise NotImplementedError("stage listing is only available for d = 3")
    seed, f, g32, g31 = _circuit_d3()
    return {"seed": seed, "fourier": f, "gxor_32": g32, "final": g31}


def correlation_probability(indices: Sequence[int], d: int) -> float:
    """Joint probability of the computational-basis string ``indices``."""
    d = _check_d(d)
    if len(indices) != d:
        raise ValueError(f"expected {d} labels, got {len(indices)}")
    return levi_civita(indices) ** 2 / math.factorial(d)


def joint_distribution(state: Ket) -> dict[tuple[int, ...], float]:
    """Computational-basis Born probabilities of every nonzero string."""
    probs = np.abs(state.amplitudes) ** 2
    out = {}
    for flat in np.flatnonzero(probs > 1e-15):
        out[tuple(int(i) for i in np.unravel_index(flat, state.dims))] = float(probs[flat])
    return out


def post_projection_state(d: int, j: int) -> Ket:
    """Antisymmetric (d-1)-particle state on every label except ``j``.

    The global phase is fixed so the first nonzero amplitude is real and
    positive.
    """
    d = _check_d(d)
    if not 0 <= j < d:
        raise ValueError(f"j={j} outside 0..{d - 1}")
    labels = [i for i in range(d) if i != j]
    if d == 2:
        amps = np.zeros(2, dtype=complex)
        amps[labels[0]] = 1.0
        return Ket((2,), amps)
    return Ket((d,) * (d - 1), canonical_phase(slater_amplitudes(labels, d)))


def canonical_phase(amps: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(amps) > 1e-12)
    if nz.size == 0:
        return amps
    a = amps[nz[0]]
    return amps * (abs(a) / a)


def index_of_correlation(d: int) -> dict[str, float]:
    """Entropies of particle 0, the rest, and the whole of |A_d>, in nats.

    The rest is reduced explicitly while its density matrix has at most
    625 rows (d <= 5); for d = 6 its spectrum comes from the Gram matrix
    of the same bipartition. The global projector is only diagonalized
    for d <= 4.
    """
    d = _check_d(d)
    psi = antisymmetric_state(d)
    s_single = von_neumann_entropy(reduced_state(psi, [0]))
    rest = list(range(1, d))
    if d ** (d - 1) <= 625:
        s_rest = von_neumann_entropy(reduced_state(psi, rest))
    else:
        s_rest = spectrum_entropy(schmidt_spectrum(psi, rest))
    if d <= 4:
        s_total = von_neumann_entropy(reduced_state(psi, range(d)))
    else:
        # rank-1 projector: its only nonzero eigenvalue is <psi|psi>
        s_total = spectrum_entropy(np.array([psi.norm() ** 2]))
    return {
        "S_single": s_single,
        "S_rest": s_rest,
        "S_total": s_total,
        "index": s_single + s_rest - s_total,
    }


def generalized_bell(l: int, rho: int, d: int) -> Ket:
    """d^{-1/2} sum_k exp(2 pi i lk/d) |k>|(k - rho) mod d>."""
    d = int(d)
    if d < 2:
        raise ValueError("d must be >= 2")
    if not (0 <= l < d and 0 <= rho < d):
        raise IndexError(f"(l, rho)=({l}, {rho}) outside 0..{d - 1}")
    amps = np.zeros(d * d, dtype=complex)
    for k in range(d):
        amps[k * d + (k - rho) % d] = np.exp(2j * np.pi * l * k / d) / np.sqrt(d)
    return Ket((d, d), amps)


def bell_basis(d: int) -> list[tuple[tuple[int, int], Ket]]:
    return [((l, r), generalized_bell(l, r, d)) for l in range(d) for r in range(d)]
