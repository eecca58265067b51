"""Exit criteria for the whole library, runnable from pytest or the CLI.

Every check returns a :class:`CriterionResult`; ``details`` holds only
deterministic values so two runs with one seed serialize identically.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import compare, keyshare, stateshare
from .antisym import (
    antisymmetric_state,
    correlation_probability,
    index_of_correlation,
    iterative_construction,
)
from .core import (
    derive_rng,
    fidelity,
    measure_projective,
    random_ket,
    reduced_state,
)
from .gates import collective, haar_random_unitary

# sub-stream tags under the master seed
_S_HAAR, _S_ROTATED, _S_KERNEL, _S_CHI, _S_PAIRS, _S_COMPARE = 10, 11, 12, 13, 14, 15


@dataclass
class CriterionResult:
    cid: str
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.cid}: {self.title}"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    return wrapper


@_timed
def criterion_1(seed: int) -> CriterionResult:
    t0 = time.perf_counter()
    psi = antisymmetric_state(3)
    born = np.abs(psi.amplitudes) ** 2
    law = np.array([correlation_probability(s, 3)
                    for s in itertools.product(range(3), repeat=3)])
    err = float(np.max(np.abs(born - law)))
    elapsed = time.perf_counter() - t0
    nonzero = int(np.sum(law > 0))
    ok = err <= 1e-12 and nonzero == 6 and np.allclose(law[law > 0], 1 / 6) and elapsed < 1.0
    return CriterionResult("1", "correlation law of |A_3>", ok,
                           {"max_abs_error": err, "nonzero_strings": nonzero})


@_timed
def criterion_2(seed: int, rounds: int = 10_000) -> CriterionResult:
    residuals = {}
    for d in (2, 3, 4):
        rng = derive_rng(seed, _S_HAAR, d)
        proj = antisymmetric_state(d).projector().matrix
        worst = 0.0
        for _ in range(100):
            c = collective(haar_random_unitary(d, rng), d).matrix
            worst = max(worst, float(np.max(np.abs(proj @ c - c @ proj))))
        residuals[d] = worst

    distinct = {}
    for d in (2, 3, 4):
        psi0 = antisymmetric_state(d)
        hits = 0
        for r in range(rounds):
            rng = derive_rng(seed, _S_ROTATED, d, r)
            basis = haar_random_unitary(d, rng).matrix
            psi, seen = psi0, set()
            for party in range(d):
                o, psi, _ = measure_projective(psi, party, basis, rng)
                seen.add(o)
            hits += len(seen) == d
        distinct[d] = hits
    ok = all(v < 1e-9 for v in residuals.values()) and all(v == rounds for v in distinct.values())
    return CriterionResult("2", "collective-unitary invariance", ok, {
        "commutator_residual": {str(k): v for k, v in residuals.items()},
        "all_distinct_rounds": {str(k): v for k, v in distinct.items()},
        "rounds": rounds,
    })


@_timed
def criterion_3(seed: int) -> CriterionResult:
    f = fidelity(iterative_construction(3), antisymmetric_state(3))
    return CriterionResult("3", "iterative GXOR/Fourier construction", f >= 1 - 1e-10,
                           {"fidelity": f})


@_timed
def criterion_4(seed: int) -> CriterionResult:
    psi = antisymmetric_state(3)
    dev = max(float(np.max(np.abs(reduced_state(psi, [i]).matrix - np.eye(3) / 3)))
              for i in range(3))
    ic = index_of_correlation(3)
    ic_err = abs(ic["index"] - 2 * math.log(3))
    return CriterionResult("4", "reduced state and index of correlation",
                           dev < 1e-12 and ic_err <= 1e-9,
                           {"reduced_state_deviation": dev, "index": ic["index"],
                            "index_error": ic_err})


@_timed
def criterion_5(seed: int, rounds: int = 10_000) -> CriterionResult:
    st = keyshare.run_session(rounds, seed=seed)
    sigma = math.sqrt(0.25 * 0.75 / rounds)
    ok = (abs(st.sift_rate - 0.25) <= 3 * sigma and st.correlation_violations == 0
          and st.reconstruction_agreement == 1.0)
    return CriterionResult("5", "key sharing without eavesdropper", ok, {
        "sift_rate": st.sift_rate, "sigma": sigma,
        "correlation_violations": st.correlation_violations,
        "reconstruction_agreement": st.reconstruction_agreement,
    })


@_timed
def criterion_6(seed: int, rounds: int = 10_000) -> CriterionResult:
    cs = keyshare.constraint_system()
    pattern_ok = cs.kernel_dim == 1 and bool(
        np.max(np.abs(cs.sign_pattern() - keyshare.EPS_PATTERN)) <= 1e-10)

    rng = derive_rng(seed, _S_KERNEL)
    k_attack = keyshare.kernel_attack(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    k_stats = keyshare.run_session(rounds, attack=k_attack, seed=seed)
    k_report = keyshare.verify_no_information(k_attack, seed=seed)

    cr = keyshare.cut_resend_attack()
    cr_stats = keyshare.run_session(rounds, attack=cr, seed=seed, disclose_fraction=0.5)
    n = len(cr_stats.disclosed_subset)
    r = cr_stats.violation_rate
    stderr = math.sqrt(r * (1 - r) / n) if 0 < r < 1 else 0.0
    z = r / stderr if stderr > 0 else (math.inf if r > 0 else 0.0)
    exact = keyshare.exact_violation_probability(cr)

    ok = (pattern_ok and k_stats.violations == 0 and k_stats.correlation_violations == 0
          and k_report.mutual_information_bound <= 1e-9 and z >= 5)
    return CriterionResult("6", "eavesdropper analysis", ok, {
        "kernel_dim": cs.kernel_dim,
        "sign_pattern_matches": pattern_ok,
        "printed_block_implied": cs.printed_implied,
        "kernel_attack_violations": k_stats.violations,
        "kernel_attack_information_bound": k_report.mutual_information_bound,
        "cut_resend_violation_rate": r,
        "cut_resend_disclosed": n,
        "cut_resend_z": z,
        "cut_resend_exact_rate": exact,
    })


def _random_chis(seed: int, n: int):
    rng = derive_rng(seed, _S_CHI)
    return [random_ket((3,), rng) for _ in range(n)]


@_timed
def criterion_7a(seed: int) -> CriterionResult:
    chis = _random_chis(seed, 100)
    worst = max(stateshare.verify_identity(c) for c in chis)
    corrected = max(stateshare.verify_exact_identity(c) for c in chis)
    return CriterionResult("7a", "state-sharing identity residual < 1e-9", worst < 1e-9, {
        "printed_identity_residual": worst,
        "corrected_identity_residual": corrected,
    })


@_timed
def criterion_7b(seed: int) -> CriterionResult:
    chis = _random_chis(seed, 50)
    worst, mean = 1.0, []
    for c in chis:
        fids = [f for p, f in stateshare.branch_fidelities(c).values() if p > 1e-15]
        worst = min(worst, float(min(fids)))
        mean.append(stateshare.average_fidelity(c))
    return CriterionResult("7b", "recovery fidelity >= 1 - 1e-9 on all 27 branches",
                           worst >= 1 - 1e-9, {
                               "min_branch_fidelity": worst,
                               "mean_protocol_fidelity": float(np.mean(mean)),
                           })


@_timed
def criterion_7c(seed: int) -> CriterionResult:
    chis = _random_chis(seed, 50)
    dev = max(float(np.max(np.abs(stateshare.receiver_reduced_state(c).matrix - np.eye(3) / 3)))
              for c in chis)
    return CriterionResult("7c", "receiver state is I/3 before communication", dev <= 1e-9,
                           {"max_deviation": dev})


@_timed
def criterion_8(seed: int) -> CriterionResult:
    worst = 0.0
    for d in (2, 3, 4):
        rng = derive_rng(seed, _S_PAIRS, d)
        for _ in range(1000):
            psi, phi = random_ket((d,), rng), random_ket((d,), rng)
            p_s, p_a = compare.unknown_pair_probabilities(psi, phi)
            worst = max(worst, abs(p_s - p_a - abs(psi.inner(phi)) ** 2))
    proj = compare.three_qubit_difference_projector().matrix
    rng = derive_rng(seed, _S_PAIRS, 0)
    annih = 0.0
    for _ in range(100):
        chi = random_ket((2,), rng).amplitudes
        v = np.kron(np.kron(chi, chi), chi)
        annih = max(annih, float(np.max(np.abs(proj @ v))))
    return CriterionResult("8", "unknown-state comparison", worst <= 1e-10 and annih <= 1e-10,
                           {"overlap_identity_error": worst, "three_qubit_leak": annih})


@_timed
def criterion_9(seed: int, trials: int = 100_000) -> CriterionResult:
    rows, within, errors, ordering = [], True, 0, True
    for n, theta in enumerate(compare.theta_grid()):
        by = {}
        for s, (name, fn) in enumerate(compare.STRATEGIES.items()):
            est = fn(theta, trials, derive_rng(seed, _S_COMPARE, n, s))
            by[name] = est
            within &= est.within(3.0)
            errors += est.unambiguous_errors
            rows.append(est.to_row())
        if theta < math.pi / 4 - 1e-12:
            ordering &= (compare.twostep_analytic(theta) < compare.onestep_analytic(theta)
                         and by["two-step"].rate < by["one-step"].rate)
    return CriterionResult("9", "known-state comparison strategies",
                           within and ordering and errors == 0,
                           {"rows": rows, "within_3_sigma": within,
                            "two_step_below_one_step": ordering,
                            "unambiguous_errors": errors})


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7a, criterion_7b, criterion_7c, criterion_8, criterion_9]


def run_all(seed: int = 0) -> list[CriterionResult]:
    return [c(seed) for c in CRITERIA]


def fingerprint(results: list[CriterionResult]) -> str:
    """Canonical JSON of every deterministic field."""
    return json.dumps([{"cid": r.cid, "passed": r.passed, "details": r.details}
                       for r in results], sort_keys=True, default=float)


def criterion_10(seed: int, first: list[CriterionResult] | None = None,
                 budget: float = 60.0) -> CriterionResult:
    t0 = time.perf_counter()
    first = run_all(seed) if first is None else first
    t1 = time.perf_counter()
    second = run_all(seed)
    t2 = time.perf_counter()
    first_time = sum(r.seconds for r in first) if first is not None else t1 - t0
    same = fingerprint(first) == fingerprint(second)
    return CriterionResult("10", "determinism and runtime", same and t2 - t1 < budget
                           and first_time < budget,
                           {"identical": same, "suite_seconds": round(t2 - t1, 1)})
