"""Three-party qutrit state sharing over |A_3>.

Particle 0 carries the input |chi>; particles 1, 2, 3 hold |A_3>. The
sender owns particles 0 and 1 and measures them in the generalized Bell
basis, the mediator Fourier transforms particle 2 and measures it, and the
receiver holds particle 3.

For each outcome (l, rho, k) the receiver's particle ends up in
``branch_operator(l, rho, k) |chi> / sqrt(54)`` (unnormalized). That
operator has rank 2, so no correction can restore every input: the
component of |chi> along the branch's kernel is destroyed. The functions
below report the fidelities that are actually reached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .antisym import antisymmetric_state, bell_basis
from .core import (
    Ket,
    SUM_ATOL,
    apply_on,
    fidelity,
    measure_projective,
    reduced_state,
    remove_subsystems,
    tensor,
)
from .gates import branch_operator, fourier, haar_random_unitary, recovery_unitary

BRANCHES = [(l, r, k) for l in range(3) for r in range(3) for k in range(3)]


def _check_chi(chi: Ket) -> Ket:
    if chi.dims != (3,):
        raise ValueError(f"input must be a single qutrit, got dims {chi.dims}")
    if not chi.is_normalized(SUM_ATOL):
        raise ValueError("input state is not normalized")
    return chi


def random_qutrit(rng: np.random.Generator) -> Ket:
    return Ket((3,), haar_random_unitary(3, rng).matrix[:, 0])


def _mediator_ket(k: int) -> np.ndarray:
    """F^{-1}|k>: the mediator's effective measurement vector."""
    return fourier(3).matrix.conj().T[:, k]


def printed_expansion(chi: Ket, drop: tuple[int, int] | None = None) -> np.ndarray:
    """Right-hand side of the sharing identity with its printed coefficients.

    Terms are (1/3)|Psi_{l,rho}> (x) (1/sqrt 3) e^{2 pi i k rho/3} F^{-1}|k>
    (x) U(l,rho,k)|chi>, with U read as :func:`branch_operator`.
    """
    _check_chi(chi)
    out = np.zeros(81, dtype=complex)
    for (l, r), bell in bell_basis(3):
        if drop == (l, r):
            continue
        for k in range(3):
            phase = np.exp(2j * np.pi * k * r / 3)
            out += np.kron(
                np.kron(bell.amplitudes / 3, phase * _mediator_ket(k) / np.sqrt(3)),
                branch_operator(l, r, k) @ chi.amplitudes,
            )
    return out


def exact_expansion(chi: Ket, drop: tuple[int, int] | None = None) -> np.ndarray:
    """Branch decomposition with the coefficients that make it an identity.

    Each term is |Psi_{l,rho}> (x) F^{-1}|k> (x) branch_operator |chi> / sqrt(54);
    no k-dependent phase appears.
    """
    _check_chi(chi)
    out = np.zeros(81, dtype=complex)
    for (l, r), bell in bell_basis(3):
        if drop == (l, r):
            continue
        for k in range(3):
            out += np.kron(
                np.kron(bell.amplitudes, _mediator_ket(k)),
                branch_operator(l, r, k) @ chi.amplitudes,
            ) / np.sqrt(54)
    return out


def shared_input(chi: Ket) -> Ket:
    return tensor(_check_chi(chi), antisymmetric_state(3))


def _residual(diff: np.ndarray, norm: str) -> float:
    if norm == "max":
        return float(np.max(np.abs(diff)))
    if norm == "l2":
        return float(np.linalg.norm(diff))
    raise ValueError(f"unknown norm {norm!r}")


def verify_identity(chi: Ket, drop: tuple[int, int] | None = None, norm: str = "max") -> float:
    """Residual between |chi>|A_3> and the printed expansion."""
    return _residual(shared_input(chi).amplitudes - printed_expansion(chi, drop), norm)


def verify_exact_identity(chi: Ket, drop: tuple[int, int] | None = None,
                          norm: str = "max") -> float:
    """Residual of the corrected decomposition."""
    return _residual(shared_input(chi).amplitudes - exact_expansion(chi, drop), norm)


def branch_states(chi: Ket) -> dict[tuple[int, int, int], tuple[float, np.ndarray]]:
    """Exact (probability, unnormalized receiver vector) per branch.

    Computed by projecting |chi>|A_3> onto each Bell vector and each
    mediator vector directly, independently of ``branch_operator``.
    """
    psi = shared_input(chi).amplitudes.reshape(9, 3, 3)
    out = {}
    for (l, r), bell in bell_basis(3):
        on_34 = np.tensordot(bell.amplitudes.conj(), psi, axes=(0, 0))
        for k in range(3):
            vec = _mediator_ket(k).conj() @ on_34
            out[(l, r, k)] = (float(np.vdot(vec, vec).real), vec)
    return out


def branch_fidelities(chi: Ket, use_mediator: bool = True) -> dict:
    """Exact (probability, fidelity) of every branch after recovery.

    Without the mediator's label the receiver always corrects with k = 0.
    """
    out = {}
    for (l, r, k), (p, vec) in branch_states(chi).items():
        kk = k if use_mediator else 0
        if p <= 1e-15:
            out[(l, r, k)] = (p, float("nan"))
            continue
        rec = recovery_unitary(l, r, kk).matrix.conj().T @ (vec / np.sqrt(p))
        out[(l, r, k)] = (p, abs(np.vdot(chi.amplitudes, rec)) ** 2)
    return out


def average_fidelity(chi: Ket, use_mediator: bool = True) -> float:
    vals = branch_fidelities(chi, use_mediator).values()
    return float(sum(p * f for p, f in vals if p > 1e-15))


def receiver_reduced_state(chi: Ket):
    """Receiver's particle before any classical message arrives."""
    return reduced_state(shared_input(chi), [3])


@dataclass
class ShareTranscript:
    input_state: Ket
    bell_outcome: tuple[int, int]
    fourier_outcome: int
    recovered_state: Ket
    fidelity: float

    @property
    def success(self) -> bool:
        return self.fidelity >= 1 - 1e-9

    def to_dict(self) -> dict:
        return {
            "chi_amplitudes": [[float(a.real), float(a.imag)]
                               for a in self.input_state.amplitudes],
            "l": self.bell_outcome[0],
            "rho": self.bell_outcome[1],
            "k": self.fourier_outcome,
            "fidelity": self.fidelity,
        }


def run_protocol(chi: Ket, rng: np.random.Generator,
                 use_mediator: bool = True) -> ShareTranscript:
    """Simulate one run: Bell test, mediator Fourier test, receiver correction."""
    state = shared_input(chi)
    bells = bell_basis(3)
    idx, state, _ = measure_projective(state, (0, 1), [b for _, b in bells], rng)
    l, r = bells[idx][0]
    state = apply_on(fourier(3), state, (2,))
    k, state, _ = measure_projective(state, 2, None, rng)

    # particles 0 and 1 now sit in the Bell vector; strip them with it
    tv = state.tensor_view().reshape(9, 3, 3)
    residue = np.tensordot(bells[idx][1].amplitudes.conj(), tv, axes=(0, 0))
    receiver = remove_subsystems(Ket((3, 3), residue), {0: k}).normalized()

    corr = recovery_unitary(l, r, k if use_mediator else 0).dag
    recovered = corr @ receiver
    return ShareTranscript(chi, (l, r), k, recovered, fidelity(chi, recovered))
