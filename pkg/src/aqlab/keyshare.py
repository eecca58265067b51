"""Three-party qutrit key sharing on |A_3> and the ancilla-attack analysis.

Parties: Alice holds qutrit 0, Bob qutrit 1, Charlie qutrit 2. An attack
appends an ancilla as subsystem 3. Each party applies a uniformly chosen
element of the transformation set to its own qutrit and measures in the
computational basis. Alice compares the announced choices with her own
and publishes only the validity bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .antisym import antisymmetric_state, levi_civita
from .core import (
    ATOL,
    Ket,
    Operator,
    apply_matrix,
    derive_rng,
    measure_projective,
    tensor,
)
from .gates import fourier, haar_random_unitary

PERM_STRINGS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
PERM_LABELS = ["".join(map(str, p)) for p in PERM_STRINGS]
ALL_STRINGS = list(itertools.product(range(3), repeat=3))
EPS_PATTERN = np.array([levi_civita(p) for p in PERM_STRINGS], dtype=float)
_PERM_FLAT = [9 * a + 3 * b + c for a, b, c in PERM_STRINGS]

_ROUND_STREAM = 0
_DISCLOSE_STREAM = 1


def default_u_set() -> list[Operator]:
    return [Operator((3,), np.eye(3)), fourier(3)]


def _check_u_set(u_set: Sequence[Operator]) -> list[Operator]:
    u_set = list(u_set)
    if not u_set:
        raise ValueError("transformation set is empty")
    for u in u_set:
        if u.dims != (3,) or not u.is_unitary():
            raise ValueError("every transformation must be a unitary on one qutrit")
    return u_set


@dataclass(frozen=True)
class RoundRecord:
    alice_choice: int
    bob_choice: int
    charlie_choice: int
    alice_outcome: int
    bob_outcome: int
    charlie_outcome: int

    @property
    def valid(self) -> bool:
        return self.alice_choice == self.bob_choice == self.charlie_choice

    @property
    def key_digit(self) -> Optional[int]:
        return self.alice_outcome if self.valid else None

    @property
    def outcomes(self) -> tuple[int, int, int]:
        return (self.alice_outcome, self.bob_outcome, self.charlie_outcome)

    @property
    def distinct(self) -> bool:
        return len(set(self.outcomes)) == 3

    def reconstructed_digit(self) -> int:
        """Bob and Charlie's joint guess: the label neither of them saw."""
        return (3 - self.bob_outcome - self.charlie_outcome) % 3


@dataclass(frozen=True, eq=False)
class AncillaAttack:
    """Joint state of the three qutrits and an eavesdropper ancilla."""

    state: Ket

    def __post_init__(self):
        dims = self.state.dims
        if len(dims) != 4 or dims[:3] != (3, 3, 3):
            raise ValueError(f"attack state must live on 3 qutrits + ancilla, got {dims}")
        if not self.state.is_normalized():
            raise ValueError("attack state must have unit norm")

    @property
    def ancilla_dim(self) -> int:
        return self.state.dims[3]

    def components(self) -> np.ndarray:
        """Rows are the ancilla vectors |E_{i1 i2 i3}> in row-major string order."""
        return self.state.amplitudes.reshape(27, self.ancilla_dim)


def kernel_attack(ancilla: np.ndarray) -> AncillaAttack:
    """|A_3> ⊗ |R>: the only undetectable form."""
    r = np.asarray(ancilla, dtype=complex)
    r = r / np.linalg.norm(r)
    return AncillaAttack(tensor(antisymmetric_state(3), Ket((r.size,), r)))


def cut_resend_attack() -> AncillaAttack:
    """Ancilla keeps an orthogonal record of each permutation string."""
    amps = np.zeros((27, 6), dtype=complex)
    for n, (flat, e) in enumerate(zip(_PERM_FLAT, EPS_PATTERN)):
        amps[flat, n] = e / np.sqrt(6)
    return AncillaAttack(Ket((3, 3, 3, 6), amps))


def random_attack(rng: np.random.Generator, ancilla_dim: int = 2) -> AncillaAttack:
    z = rng.standard_normal(27 * ancilla_dim) + 1j * rng.standard_normal(27 * ancilla_dim)
    return AncillaAttack(Ket((3, 3, 3, ancilla_dim), z / np.linalg.norm(z)))


def run_round(u_set: Sequence[Operator], rng: np.random.Generator,
              state: Ket | None = None) -> RoundRecord:
    """One protocol round on ``state`` (default |A_3>)."""
    u_set = _check_u_set(u_set)
    return _round([u.matrix for u in u_set], rng,
                  antisymmetric_state(3) if state is None else state)


def _round(mats: list[np.ndarray], rng: np.random.Generator, psi: Ket) -> RoundRecord:
    choices, outcomes = [], []
    for party in range(3):
        c = int(rng.integers(len(mats)))
        psi = Ket(psi.dims, apply_matrix(psi.amplitudes, psi.dims, mats[c], (party,)))
        o, psi, _ = measure_projective(psi, party, None, rng)
        choices.append(c)
        outcomes.append(o)
    return RoundRecord(*choices, *outcomes)


@dataclass
class SessionStats:
    rounds_total: int
    rounds_valid: int
    sift_rate: float
    outcome_histogram: dict[str, list[int]]
    correlation_violations: int
    disclosed_subset: list[int]
    violations: int
    violation_rate: float
    key_digits: list[int]
    reconstruction_agreement: float
    records: list[RoundRecord] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rounds_total": self.rounds_total,
            "rounds_valid": self.rounds_valid,
            "sift_rate": self.sift_rate,
            "outcome_histogram": self.outcome_histogram,
            "correlation_violations": self.correlation_violations,
            "disclosed": len(self.disclosed_subset),
            "violations": self.violations,
            "violation_rate": self.violation_rate,
            "reconstruction_agreement": self.reconstruction_agreement,
            "key_digits": self.key_digits,
        }


def run_session(n_rounds: int, u_set: Sequence[Operator] | None = None,
                attack: AncillaAttack | None = None, seed: int = 0,
                disclose_fraction: float = 0.5) -> SessionStats:
    """Run ``n_rounds`` rounds; round i draws from sub-stream (seed, 0, i).

    A ``disclose_fraction`` share of the valid rounds (chosen from
    sub-stream (seed, 1)) is revealed for the security check; those rounds
    are dropped from ``key_digits``. ``violations`` counts disclosed valid
    rounds whose outcomes are not pairwise distinct;
    ``correlation_violations`` counts the same event over all valid rounds.
    """
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    if not 0.0 <= disclose_fraction <= 1.0:
        raise ValueError("disclose_fraction must lie in [0, 1]")
    u_set = _check_u_set(default_u_set() if u_set is None else u_set)
    state = antisymmetric_state(3) if attack is None else attack.state

    mats = [u.matrix for u in u_set]
    records = [_round(mats, derive_rng(seed, _ROUND_STREAM, i), state)
               for i in range(n_rounds)]

    valid_idx = [i for i, r in enumerate(records) if r.valid]
    n_disc = int(round(disclose_fraction * len(valid_idx)))
    drng = derive_rng(seed, _DISCLOSE_STREAM)
    disclosed = sorted(int(i) for i in drng.choice(valid_idx, size=n_disc, replace=False)) \
        if n_disc else []
    disclosed_set = set(disclosed)

    violations = sum(1 for i in disclosed if not records[i].distinct)
    hist = {name: [0, 0, 0] for name in ("alice", "bob", "charlie")}
    for r in records:
        hist["alice"][r.alice_outcome] += 1
        hist["bob"][r.bob_outcome] += 1
        hist["charlie"][r.charlie_outcome] += 1
    agree = [records[i].reconstructed_digit() == records[i].alice_outcome for i in valid_idx]
    return SessionStats(
        rounds_total=n_rounds,
        rounds_valid=len(valid_idx),
        sift_rate=len(valid_idx) / n_rounds,
        outcome_histogram=hist,
        correlation_violations=sum(1 for i in valid_idx if not records[i].distinct),
        disclosed_subset=disclosed,
        violations=violations,
        violation_rate=violations / len(disclosed) if disclosed else 0.0,
        key_digits=[records[i].alice_outcome for i in valid_idx if i not in disclosed_set],
        reconstruction_agreement=float(np.mean(agree)) if agree else 1.0,
        records=records,
    )


def _string_probabilities(attack: AncillaAttack, u: Operator) -> np.ndarray:
    """Joint outcome distribution (27 strings) when every party applies ``u``."""
    comp = attack.components().reshape(3, 3, 3, attack.ancilla_dim)
    rotated = np.einsum("ai,bj,ck,ijkx->abcx", u.matrix, u.matrix, u.matrix, comp)
    return np.sum(np.abs(rotated) ** 2, axis=3).reshape(27)


def exact_violation_probability(attack: AncillaAttack | None,
                                u_set: Sequence[Operator] | None = None) -> float:
    """Probability that a valid round shows repeated outcomes.

    Valid rounds are equally likely to use each element of ``u_set``; the
    ancilla is traced out. Built directly from the joint tensor, not from
    sequential sampling.
    """
    u_set = _check_u_set(default_u_set() if u_set is None else u_set)
    if attack is None:
        attack = kernel_attack(np.array([1.0, 0.0]))
    repeated = np.array([len(set(s)) < 3 for s in ALL_STRINGS])
    return float(np.mean([_string_probabilities(attack, u)[repeated].sum() for u in u_set]))


PRINTED_ORDER = PERM_LABELS


def printed_constraints() -> np.ndarray:
    """The seven printed constraint rows over (E012, E021, E102, E120, E201, E210)."""
    x = np.exp(-2j * np.pi / 3)
    xs, a = np.conj(x), abs(x) ** 2

    def row(terms):
        r = np.zeros(6, dtype=complex)
        for coef, labels in terms:
            for lab in labels:
                r[PRINTED_ORDER.index(lab)] += coef
        return r

    return np.array([
        row([(1, ["012", "021", "120", "102", "201", "210"])]),
        row([(a, ["012", "021"]), (xs, ["102", "120"]), (x, ["210", "201"])]),
        row([(xs, ["012", "210"]), (a, ["102", "201"]), (x, ["120", "021"])]),
        row([(x, ["012", "102"]), (xs, ["201", "021"]), (a, ["210", "120"])]),
        row([(a, ["012", "021"]), (x, ["102", "120"]), (xs, ["210", "201"])]),
        row([(x, ["012", "210"]), (a, ["102", "201"]), (xs, ["120", "021"])]),
        row([(xs, ["012", "102"]), (x, ["201", "021"]), (a, ["210", "120"])]),
    ])


def generated_constraints(u_set: Sequence[Operator] | None = None):
    """Rows from first principles over all 27 ancilla vectors.

    For every common setting u and every outcome string whose ideal
    probability is zero, sum_i (u⊗u⊗u)[o, i] |E_i> must vanish. Returns the
    row matrix and the (setting, outcome) tag of each row.
    """
    u_set = _check_u_set(default_u_set() if u_set is None else u_set)
    ideal = antisymmetric_state(3).amplitudes
    rows, tags = [], []
    for s, u in enumerate(u_set):
        u3 = np.kron(np.kron(u.matrix, u.matrix), u.matrix)
        ideal_p = np.abs(u3 @ ideal) ** 2
        for o in range(27):
            if ideal_p[o] <= ATOL:
                rows.append(u3[o])
                tags.append((s, ALL_STRINGS[o]))
    return np.array(rows), tags


def _null_space(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    _, s, vh = np.linalg.svd(mat)
    rank = int(np.sum(s > tol * max(1.0, s.max(initial=0.0))))
    return vh[rank:].conj().T


@dataclass
class ConstraintSystem:
    printed: np.ndarray
    generated: np.ndarray
    generated_tags: list
    kernel: np.ndarray
    printed_kernel: np.ndarray
    printed_implied: bool
    printed_matches: list

    @property
    def kernel_dim(self) -> int:
        return self.kernel.shape[1]

    def sign_pattern(self) -> np.ndarray:
        """Kernel vector on the permutation strings, scaled so E_012 = +1."""
        v = self.kernel[_PERM_FLAT, 0]
        return v / v[0]

    def to_dict(self) -> dict:
        pattern = self.sign_pattern() if self.kernel_dim == 1 else None
        return {
            "kernel_dim": self.kernel_dim,
            "printed_kernel_dim": self.printed_kernel.shape[1],
            "printed_implied": self.printed_implied,
            "order": PERM_LABELS,
            "sign_pattern": None if pattern is None else [float(v.real) for v in pattern],
            "matches_levi_civita": bool(
                pattern is not None and np.max(np.abs(pattern - EPS_PATTERN)) <= 1e-10
            ),
            "printed_rows_matched": self.printed_matches,
            "generated_rows": int(self.generated.shape[0]),
        }


def constraint_system(u_set: Sequence[Operator] | None = None) -> ConstraintSystem:
    """Printed and generated undetectability constraints with their kernels.

    The generated system is authoritative; the printed rows are checked to
    lie in its row space and matched one-by-one where they coincide.
    """
    gen, tags = generated_constraints(u_set)
    kernel = _null_space(gen)
    printed = printed_constraints()
    pkernel = _null_space(printed)

    perm_rows = gen[:, _PERM_FLAT]
    keep = np.linalg.norm(perm_rows, axis=1) > ATOL
    basis = _null_space(perm_rows[keep])  # kernel over the six permutation strings
    implied = bool(np.max(np.abs(printed @ basis), initial=0.0) <= 1e-9)

    matches = []
    scale = np.sqrt(27)
    for n, prow in enumerate(printed):
        hit = None
        for r, tag in zip(perm_rows, tags):
            if np.max(np.abs(r * scale - prow)) <= 1e-9:
                hit = {"row": n, "setting": tag[0], "outcome": "".join(map(str, tag[1]))}
                break
        matches.append(hit or {"row": n, "setting": None, "outcome": None})
    return ConstraintSystem(printed, gen, tags, kernel, pkernel, implied, matches)


def _mutual_information(joint: np.ndarray) -> float:
    joint = joint / joint.sum()
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 1e-300
    return float(max(0.0, np.sum(joint[mask] * np.log(joint[mask] / (px @ py)[mask]))))


@dataclass
class NoInformationReport:
    undetectable: bool
    factorizes: bool
    mutual_information_bound: float
    kernel_residual: float
    forbidden_weight: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_no_information(attack: AncillaAttack, u_set: Sequence[Operator] | None = None,
                          n_bases: int = 32, seed: int = 0,
                          tol: float = 1e-9) -> NoInformationReport:
    """Check undetectability and ancilla factorization of ``attack``.

    ``mutual_information_bound`` (nats) is the largest classical mutual
    information between Alice's digit and a rank-1 projective ancilla
    measurement, over the computational basis plus ``n_bases`` Haar-random
    bases and over every common setting; it is a lower bound on what the
    eavesdropper can learn.
    """
    if not isinstance(attack, AncillaAttack):
        raise TypeError("expected an AncillaAttack")
    u_set = _check_u_set(default_u_set() if u_set is None else u_set)
    comp = attack.components()
    cs = constraint_system(u_set)
    proj = cs.kernel @ cs.kernel.conj().T
    kernel_residual = float(np.max(np.abs(comp - proj @ comp)))
    forbidden = [i for i, s in enumerate(ALL_STRINGS) if len(set(s)) < 3]
    forbidden_weight = float(np.sum(np.abs(comp[forbidden]) ** 2))
    undetectable = kernel_residual <= tol and forbidden_weight <= tol

    dim = attack.ancilla_dim
    rng = derive_rng(seed, 2)
    bases = [np.eye(dim)] + [haar_random_unitary(dim, rng).matrix for _ in range(n_bases)]
    factorizes = True
    mi = 0.0
    for u in u_set:
        c4 = comp.reshape(3, 3, 3, dim)
        rotated = np.einsum("ai,bj,ck,ijkx->abcx", u.matrix, u.matrix, u.matrix, c4)
        vecs = rotated.reshape(27, dim)
        anc = vecs.T @ vecs.conj()
        for v in vecs:
            p = float(np.vdot(v, v).real)
            if p > 1e-12 and np.max(np.abs(np.outer(v, v.conj()) / p - anc)) > tol:
                factorizes = False
        by_digit = rotated.reshape(3, 9, dim)
        for b in bases:
            amps = by_digit @ b.conj()
            joint = np.sum(np.abs(amps) ** 2, axis=1)  # digit x ancilla outcome
            mi = max(mi, _mutual_information(joint))
    if undetectable and not factorizes:
        raise RuntimeError("undetectable attack whose ancilla does not factor out")
    return NoInformationReport(undetectable, factorizes, mi, kernel_residual, forbidden_weight)
