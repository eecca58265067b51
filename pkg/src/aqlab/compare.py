"""Quantum state comparison.

Unknown states: project a product of copies onto the antisymmetric part
(two copies, any d) or onto the mixed-symmetry part (three qubits).
Known candidates cos t|+> ± sin t|->: minimum-error (Helstrom), one-step
unambiguous (each qubit identified separately) and two-step unambiguous
(symmetry test, then unambiguous discrimination of the leftover pair).
|+> and |-> are mapped to the computational |0> and |1>.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import (
    ATOL,
    Ket,
    Operator,
    basis_ket,
    measure_projective,
    measure_projectors,
    tensor,
)

SAME_LABELS = frozenset({(1, 1), (2, 2)})
DIFFERENT_LABELS = frozenset({(1, 2), (2, 1)})
ALL_LABELS = SAME_LABELS | DIFFERENT_LABELS


class Verdict(enum.Enum):
    DIFFERENT = "different"
    SAME = "same"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome plus the probability of the measurement branch that produced it.

    ``labels`` lists the candidate pairs (i, j) still consistent with the
    outcome; unknown-state comparison leaves it empty.
    """

    verdict: Verdict
    probability: float
    labels: frozenset = frozenset()


# -- unknown states -----------------------------------------------------------

def swap_operator(d: int) -> Operator:
    mat = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            mat[j * d + i, i * d + j] = 1.0
    return Operator((d, d), mat)


def antisym_projector(d: int, n: int = 2) -> Operator:
    if n != 2:
        raise NotImplementedError("only two-copy antisymmetric projectors are built")
    if d < 2:
        raise ValueError("d must be >= 2")
    return Operator((d, d), (np.eye(d * d) - swap_operator(d).matrix) / 2)


def sym_projector(d: int) -> Operator:
    if d < 2:
        raise ValueError("d must be >= 2")
    return Operator((d, d), (np.eye(d * d) + swap_operator(d).matrix) / 2)


def _check_pair(psi: Ket, phi: Ket):
    if len(psi.dims) != 1 or psi.dims != phi.dims:
        raise ValueError(f"need two single-qudit states of equal dimension, got "
                         f"{psi.dims} and {phi.dims}")
    for s in (psi, phi):
        if not s.is_normalized(1e-9):
            raise ValueError("input states must be normalized")


def unknown_pair_probabilities(psi: Ket, phi: Ket) -> tuple[float, float]:
    """(P_sym, P_anti) for the product |psi>|phi>."""
    _check_pair(psi, phi)
    d = psi.dims[0]
    prod = np.kron(psi.amplitudes, phi.amplitudes)
    p_a = float(np.vdot(prod, antisym_projector(d).matrix @ prod).real)
    p_s = float(np.vdot(prod, sym_projector(d).matrix @ prod).real)
    return p_s, p_a


def singlet_overlap(psi: Ket, phi: Ket) -> float:
    """|(<1|<0| - <0|<1|) |psi>|phi>|^2 / 2 for qubits."""
    _check_pair(psi, phi)
    if psi.dims != (2,):
        raise ValueError("singlet overlap is defined for qubits")
    prod = np.kron(psi.amplitudes, phi.amplitudes)
    return float(abs(prod[2] - prod[1]) ** 2 / 2)


def compare_unknown(psi: Ket, phi: Ket, rng: np.random.Generator) -> ComparisonVerdict:
    """Antisymmetric hit means DIFFERENT; a symmetric hit is INCONCLUSIVE.

    SAME is never produced: no measurement can certify that two unknown
    states coincide.
    """
    _check_pair(psi, phi)
    d = psi.dims[0]
    outcome, _, p = measure_projectors(
        tensor(psi, phi), [antisym_projector(d), sym_projector(d)], rng)
    return ComparisonVerdict(Verdict.DIFFERENT if outcome == 0 else Verdict.INCONCLUSIVE, p)


def three_qubit_difference_projector() -> Operator:
    """Rank-4 projector onto the mixed-symmetry subspace of three qubits."""
    def k(*terms):
        v = np.zeros(8)
        for coef, bits in terms:
            v[int(bits, 2)] += coef
        return v

    vecs = np.column_stack([
        k((2, "110"), (-1, "101"), (-1, "011")),
        k((2, "001"), (-1, "010"), (-1, "100")),
        k((1, "101"), (-1, "011")),
        k((1, "010"), (-1, "100")),
    ])
    q, _ = np.linalg.qr(vecs)
    return Operator((2, 2, 2), q @ q.conj().T)


def three_qubit_symmetric_vectors() -> list[np.ndarray]:
    out = []
    for group in (["111"], ["000"], ["110", "101", "011"], ["100", "001", "010"]):
        v = np.zeros(8)
        for bits in group:
            v[int(bits, 2)] = 1.0
        out.append(v / np.linalg.norm(v))
    return out


# -- known candidates ---------------------------------------------------------

def _check_theta(theta: float, allow_zero: bool = True) -> float:
    theta = float(theta)
    lo_ok = theta >= 0 if allow_zero else theta > 0
    if not (lo_ok and theta <= np.pi / 4 + 1e-12):
        rng_txt = "[0, pi/4]" if allow_zero else "(0, pi/4]"
        raise ValueError(f"theta={theta} outside {rng_txt}")
    return theta


def candidate_states(theta: float) -> tuple[Ket, Ket]:
    """|psi_1> = cos t|0> + sin t|1>, |psi_2> = cos t|0> - sin t|1>."""
    c, s = np.cos(theta), np.sin(theta)
    return Ket((2,), [c, s]), Ket((2,), [c, -s])


def min_error_analytic(theta: float) -> float:
    return 0.5 * np.cos(2 * theta) ** 2


def onestep_analytic(theta: float) -> float:
    c = np.cos(2 * theta)
    return c * (2 - c)


def twostep_analytic(theta: float) -> float:
    return np.cos(2 * theta)


def helstrom_same_projector(theta: float) -> Operator:
    """Projector onto the positive part of (rho_same - rho_diff)/2."""
    _check_theta(theta)
    p1, p2 = candidate_states(theta)
    pairs = {(i, j): np.kron(a.amplitudes, b.amplitudes)
             for i, a in ((1, p1), (2, p2)) for j, b in ((1, p1), (2, p2))}
    gamma = np.zeros((4, 4), dtype=complex)
    for (i, j), v in pairs.items():
        gamma += (0.25 if i == j else -0.25) * np.outer(v, v.conj())
    w, vecs = np.linalg.eigh(gamma)
    pos = vecs[:, w > 1e-12]
    return Operator((2, 2), pos @ pos.conj().T)


class UnambiguousDiscriminator:
    """Optimal equal-prior unambiguous discrimination of |a> and |b>.

    Realized by a Neumark dilation: the input is written in an orthonormal
    basis of span{a, b}, joined with one ancilla qubit in |0>, rotated by a
    4x4 unitary and read out in the computational basis. Readout 0 names
    ``a``, readout 1 names ``b``, readouts 2 and 3 are inconclusive.
    """

    A, B, INCONCLUSIVE = "A", "B", "?"
    _READOUT = ("A", "B", "?", "?")

    def __init__(self, a: Ket, b: Ket):
        if a.dims != b.dims:
            raise ValueError("candidate states must share dims")
        a, b = a.normalized(), b.normalized()
        ov = a.inner(b)
        s = abs(ov)
        if s >= 1 - 1e-12:
            raise ValueError("candidate states are parallel")
        e1 = b.amplitudes - ov * a.amplitudes
        self.frame = np.column_stack([a.amplitudes, e1 / np.linalg.norm(e1)])
        self.overlap = s

        alpha = np.array([1.0, 0.0], dtype=complex)
        beta = self.frame.conj().T @ b.amplitudes
        a_perp = np.array([0.0, 1.0], dtype=complex)
        b_perp = np.array([np.conj(beta[1]), -np.conj(beta[0])])
        b_perp /= np.linalg.norm(b_perp)
        assert abs(np.vdot(a_perp, alpha)) < ATOL and abs(np.vdot(b_perp, beta)) < ATOL

        pi_a = np.outer(b_perp, b_perp.conj()) / (1 + s)
        pi_b = np.outer(a_perp, a_perp.conj()) / (1 + s)
        lam, vec = np.linalg.eigh(np.eye(2) - pi_a - pi_b)
        lam = np.clip(lam, 0.0, None)
        rows = [b_perp.conj() / np.sqrt(1 + s), a_perp.conj() / np.sqrt(1 + s)]
        rows += [np.sqrt(lam[n]) * vec[:, n].conj() for n in (1, 0)]
        iso = np.array(rows)  # 4x2 isometry: V|x> = sum_k <m_k|x> |k>
        comp = np.linalg.svd(iso, full_matrices=True)[0][:, 2:]
        w = np.zeros((4, 4), dtype=complex)
        w[:, 0], w[:, 2] = iso[:, 0], iso[:, 1]  # columns |x=0,anc=0>, |x=1,anc=0>
        w[:, 1], w[:, 3] = comp[:, 0], comp[:, 1]
        self.unitary = Operator((2, 2), w)
        assert self.unitary.is_unitary()

    def _dilated(self, state: Ket) -> tuple[Ket, float]:
        coords = self.frame.conj().T @ state.amplitudes
        leak = max(0.0, 1.0 - float(np.vdot(coords, coords).real))
        joint = tensor(Ket((2,), coords), basis_ket((2,), (0,)))
        return self.unitary @ joint, leak

    def probabilities(self, state: Ket) -> dict[str, float]:
        """Readout distribution; weight outside span{a, b} counts as inconclusive."""
        out, leak = self._dilated(state)
        p = np.abs(out.amplitudes) ** 2
        return {self.A: float(p[0]), self.B: float(p[1]),
                self.INCONCLUSIVE: float(p[2] + p[3] + leak)}

    def measure(self, state: Ket, rng: np.random.Generator) -> str:
        out, leak = self._dilated(state)
        if leak > 1e-12 and rng.random() < leak:
            return self.INCONCLUSIVE
        k, _, _ = measure_projective(out.normalized(), (0, 1), None, rng)
        return self._READOUT[k]


def idp_discriminate(a: Ket, b: Ket, state: Ket, rng: np.random.Generator) -> str:
    """Single shot of :class:`UnambiguousDiscriminator` on ``state``."""
    return UnambiguousDiscriminator(a, b).measure(state, rng)


def _bell_like():
    anti = Ket((2, 2), [0, 1, -1, 0]).normalized()
    sym = Ket((2, 2), [0, 1, 1, 0]).normalized()
    rest = Operator((2, 2), np.diag([1.0, 0, 0, 1.0]))
    return anti, sym, rest


def twostep_phi(theta: float) -> tuple[Ket, Ket]:
    """Normalized leftover states for equal (+) and different (-) candidates."""
    c2, s2 = np.cos(theta) ** 2, np.sin(theta) ** 2
    n = np.sqrt(1 - 0.5 * np.sin(2 * theta) ** 2)
    return Ket((2, 2), [c2 / n, 0, 0, s2 / n]), Ket((2, 2), [c2 / n, 0, 0, -s2 / n])


def unambiguous_compare_twostep(theta: float, i: int, j: int,
                                rng: np.random.Generator) -> ComparisonVerdict:
    """One two-step comparison of |psi_i>|psi_j> (i, j in {1, 2})."""
    theta = _check_theta(theta, allow_zero=False)
    p1, p2 = candidate_states(theta)
    cands = {1: p1, 2: p2}
    state = tensor(cands[i], cands[j])
    anti, sym, rest = _bell_like()
    k, post, p = measure_projectors(state, [anti.projector(), sym.projector(), rest], rng)
    if k == 0:
        return ComparisonVerdict(Verdict.DIFFERENT, p, DIFFERENT_LABELS)
    if k == 1:
        return ComparisonVerdict(Verdict.SAME, p, SAME_LABELS)
    phi_p, phi_m = twostep_phi(theta)
    disc = UnambiguousDiscriminator(phi_p, phi_m)
    probs = disc.probabilities(post)
    r = disc.measure(post, rng)
    if r == disc.A:
        return ComparisonVerdict(Verdict.SAME, p * probs[r], SAME_LABELS)
    if r == disc.B:
        return ComparisonVerdict(Verdict.DIFFERENT, p * probs[r], DIFFERENT_LABELS)
    return ComparisonVerdict(Verdict.INCONCLUSIVE, p * probs[r], ALL_LABELS)


def twostep_stage1_probabilities(theta: float, i: int, j: int) -> dict[str, float]:
    p1, p2 = candidate_states(theta)
    cands = {1: p1, 2: p2}
    v = np.kron(cands[i].amplitudes, cands[j].amplitudes)
    anti, sym, rest = _bell_like()
    return {
        "antisym": abs(anti.inner(Ket((2, 2), v))) ** 2,
        "sym": abs(sym.inner(Ket((2, 2), v))) ** 2,
        "rest": float(np.vdot(v, rest.matrix @ v).real),
    }


# -- Monte Carlo drivers ------------------------------------------------------

@dataclass
class RateEstimate:
    strategy: str
    theta: float
    trials: int
    rate: float
    analytic: float
    unambiguous_errors: int = 0

    @property
    def stderr(self) -> float:
        p = min(max(self.analytic, 0.0), 1.0)
        return float(np.sqrt(p * (1 - p) / self.trials))

    def within(self, nsigma: float) -> bool:
        sigma = self.stderr
        if sigma < 1e-12:
            return abs(self.rate - self.analytic) <= 1e-12
        return abs(self.rate - self.analytic) <= nsigma * sigma

    def to_row(self) -> dict:
        return {"theta": self.theta, "strategy": self.strategy, "trials": self.trials,
                "rate": self.rate, "analytic": self.analytic, "stderr": self.stderr,
                "unambiguous_errors": self.unambiguous_errors}


def _sample(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Row-wise inverse-cdf sampling: probs is (n, k), u is (n,)."""
    cdf = np.cumsum(probs, axis=1)
    return np.minimum((u[:, None] * cdf[:, -1:] >= cdf).sum(axis=1), probs.shape[1] - 1)


def _cases(trials: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    ij = rng.integers(1, 3, size=(trials, 2))
    return ij[:, 0], ij[:, 1]


def min_error_compare(theta: float, trials: int, rng: np.random.Generator) -> RateEstimate:
    """Helstrom same/different measurement on random candidate pairs."""
    theta = _check_theta(theta)
    proj = helstrom_same_projector(theta).matrix
    p1, p2 = candidate_states(theta)
    cands = {1: p1.amplitudes, 2: p2.amplitudes}
    p_same = np.zeros((3, 3))
    for i in (1, 2):
        for j in (1, 2):
            v = np.kron(cands[i], cands[j])
            p_same[i, j] = float(np.vdot(v, proj @ v).real)
    i, j = _cases(trials, rng)
    said_same = rng.random(trials) < p_same[i, j]
    errors = int(np.sum(said_same != (i == j)))
    return RateEstimate("min-error", theta, trials, errors / trials, min_error_analytic(theta))


def unambiguous_compare_onestep(theta: float, trials: int,
                                rng: np.random.Generator) -> RateEstimate:
    """Identify each qubit unambiguously; inconclusive unless both succeed."""
    theta = _check_theta(theta)
    analytic = onestep_analytic(theta)
    if theta == 0:
        return RateEstimate("one-step", theta, trials, 1.0, analytic)
    p1, p2 = candidate_states(theta)
    disc = UnambiguousDiscriminator(p1, p2)
    table = np.array([[disc.probabilities(s)[o] for o in (disc.A, disc.B, disc.INCONCLUSIVE)]
                      for s in (p1, p2)])  # rows: true label 1, 2
    i, j = _cases(trials, rng)
    oi = _sample(table[i - 1], rng.random(trials))
    oj = _sample(table[j - 1], rng.random(trials))
    conclusive = (oi < 2) & (oj < 2)
    wrong_label = ((oi < 2) & (oi != i - 1)) | ((oj < 2) & (oj != j - 1))
    verdict_wrong = conclusive & ((oi == oj) != (i == j))
    return RateEstimate("one-step", theta, trials, float(np.mean(~conclusive)), analytic,
                        int(np.sum(wrong_label | verdict_wrong)))


def unambiguous_compare_twostep_batch(theta: float, trials: int,
                                      rng: np.random.Generator) -> RateEstimate:
    """Vectorized two-step comparison; per-case Born tables then sampling."""
    theta = _check_theta(theta, allow_zero=False)
    phi_p, phi_m = twostep_phi(theta)
    disc = UnambiguousDiscriminator(phi_p, phi_m)
    stage1 = np.zeros((3, 3, 3))
    stage2 = np.zeros((3, 3, 3))
    for i in (1, 2):
        for j in (1, 2):
            s1 = twostep_stage1_probabilities(theta, i, j)
            stage1[i, j] = [s1["antisym"], s1["sym"], s1["rest"]]
            post = phi_p if i == j else phi_m
            pr = disc.probabilities(post)
            stage2[i, j] = [pr[disc.A], pr[disc.B], pr[disc.INCONCLUSIVE]]
    i, j = _cases(trials, rng)
    first = _sample(stage1[i, j], rng.random(trials))
    second = _sample(stage2[i, j], rng.random(trials))
    same = (first == 1) | ((first == 2) & (second == 0))
    diff = (first == 0) | ((first == 2) & (second == 1))
    inconclusive = ~(same | diff)
    errors = int(np.sum(same & (i != j)) + np.sum(diff & (i == j)))
    return RateEstimate("two-step", theta, trials, float(np.mean(inconclusive)),
                        twostep_analytic(theta), errors)


STRATEGIES = {
    "min-error": min_error_compare,
    "one-step": unambiguous_compare_onestep,
    "two-step": unambiguous_compare_twostep_batch,
}


def theta_grid() -> list[float]:
    return [k * np.pi / 24 for k in range(1, 7)]
