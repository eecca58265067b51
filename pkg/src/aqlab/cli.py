"""Command-line front end.

JSON goes to stdout, diagnostics to stderr. Seed precedence is
``--seed`` > ``$AQLAB_SEED`` > 0. The exit status is 0 only when every
check the subcommand performs passes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from collections import Counter

import numpy as np

from . import antisym, compare, keyshare, stateshare
from .core import (
    Ket,
    apply_matrix,
    derive_rng,
    fidelity,
    measure_projective,
    reduced_state,
)
from .gates import haar_random_unitary

SCHEMA = 1


def _clean(obj):
    """Recursively convert to JSON types with 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _emit(payload: dict) -> None:
    payload = {"schema": SCHEMA, **payload}
    sys.stdout.write(json.dumps(_clean(payload), indent=2, sort_keys=False) + "\n")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("AQLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"error: AQLAB_SEED={env!r} is not an integer")
    return 0


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


# -- antisym ------------------------------------------------------------------

def cmd_antisym(args) -> int:
    d = args.d
    if not 2 <= d <= antisym.MAX_D:
        return _fail(f"--d {d} outside 2..{antisym.MAX_D} (dimension cap {antisym.MAX_D})")
    seed = _seed(args)
    psi = antisym.antisymmetric_state(d)
    amps = psi.amplitudes
    props = {}

    def record(name, residual, ok, **extra):
        props[name] = {"pass": bool(ok), "residual": residual, **extra}

    record("normalization", abs(psi.norm() - 1), abs(psi.norm() - 1) <= 1e-10)

    table = antisym.joint_distribution(psi)
    law_err = max(abs(p - antisym.correlation_probability(s, d)) for s, p in table.items())
    missing = math.factorial(d) - len(table)
    record("correlation_law", law_err, law_err <= 1e-12 and missing == 0)

    t = psi.tensor_view()
    worst = 0.0
    for a in range(d):
        for b in range(a + 1, d):
            axes = list(range(d))
            axes[a], axes[b] = b, a
            worst = max(worst, float(np.max(np.abs(t.transpose(axes) + t))))
    record("antisymmetry", worst, worst == 0.0)

    rng = derive_rng(seed, 1)
    n_u = 100 if args.check_all else 20
    inv = 0.0
    for _ in range(n_u):
        u = haar_random_unitary(d, rng).matrix
        v = amps
        for party in range(d):
            v = apply_matrix(v, psi.dims, u, (party,))
        inv = max(inv, float(np.max(np.abs(v - np.linalg.det(u) * amps))))
    record("collective_invariance", inv, inv <= 1e-9, unitaries=n_u)

    red = max(float(np.max(np.abs(reduced_state(psi, [i]).matrix - np.eye(d) / d)))
              for i in range(d))
    record("reduced_states", red, red <= 1e-12)

    ic = antisym.index_of_correlation(d)
    ic_err = abs(ic["index"] - 2 * math.log(d))
    record("index_of_correlation", ic_err, ic_err <= 1e-9,
           nats=ic["index"], bits=ic["index"] / math.log(2),
           S_single=ic["S_single"], S_rest=ic["S_rest"], S_total=ic["S_total"])

    pp = 0.0
    for j in range(d):
        proj = Ket(psi.dims[1:], t[j].reshape(-1)).normalized()
        target = antisym.post_projection_state(d, j)
        if d == 2:
            proj = Ket((2,), proj.amplitudes)
        pp = max(pp, 1 - fidelity(proj, target))
    record("post_projection", pp, pp <= 1e-10)

    try:
        f = fidelity(antisym.iterative_construction(d), psi)
        record("iterative_construction", 1 - f, f >= 1 - 1e-10)
    except NotImplementedError as exc:
        record("iterative_construction", None, False, note=str(exc))

    if args.check_all:
        rounds = args.rounds
        hits = 0
        for r in range(rounds):
            rr = derive_rng(seed, 2, r)
            basis = haar_random_unitary(d, rr).matrix
            state, seen = psi, set()
            for party in range(d):
                o, state, _ = measure_projective(state, party, basis, rr)
                seen.add(o)
            hits += len(seen) == d
        record("rotated_basis_correlations", rounds - hits, hits == rounds, rounds=rounds)

    ok = all(p["pass"] for p in props.values())
    _emit({
        "command": "antisym", "d": d, "seed": seed,
        "index_of_correlation": ic["index"],
        "correlation_table": {"".join(map(str, s)): p for s, p in sorted(table.items())},
        "properties": props,
        "all_pass": ok,
    })
    return 0 if ok else 1


# -- keyshare -----------------------------------------------------------------

def cmd_keyshare(args) -> int:
    seed = _seed(args)
    if not 0 <= args.disclose <= 1:
        return _fail("--disclose must lie in [0, 1]")
    if args.rounds < 1:
        return _fail("--rounds must be >= 1")
    attack = None
    report = None
    if args.attack == "kernel":
        rng = derive_rng(seed, 3)
        attack = keyshare.kernel_attack(rng.standard_normal(2) + 1j * rng.standard_normal(2))
    elif args.attack == "cut-resend":
        attack = keyshare.cut_resend_attack()
    if attack is not None:
        report = keyshare.verify_no_information(attack, seed=seed)
    stats = keyshare.run_session(args.rounds, attack=attack, seed=seed,
                                 disclose_fraction=args.disclose)
    payload = {"command": "keyshare", "seed": seed, "attack": args.attack,
               "disclose_fraction": args.disclose, **stats.to_dict()}
    if report is not None:
        payload["eavesdropper"] = report.to_dict()
        payload["exact_violation_probability"] = keyshare.exact_violation_probability(attack)
    _emit(payload)
    if args.attack == "none":
        return 0 if stats.violations == 0 and stats.correlation_violations == 0 else 1
    if args.attack == "kernel":
        return 0 if stats.violations == 0 and report.mutual_information_bound <= 1e-9 else 1
    return 0 if stats.violation_rate > 0 else 1


# -- stateshare ---------------------------------------------------------------

def _parse_chi(text: str) -> Ket:
    try:
        vals = [complex(x.strip().replace(" ", "")) for x in text.split(",")]
    except ValueError:
        raise ValueError(f"malformed amplitude list {text!r}")
    if len(vals) != 3:
        raise ValueError("--chi needs exactly three amplitudes")
    v = np.array(vals)
    if not np.all(np.isfinite(v)) or np.linalg.norm(v) == 0:
        raise ValueError("--chi amplitudes must be finite and not all zero")
    return Ket((3,), v / np.linalg.norm(v))


def cmd_stateshare(args) -> int:
    seed = _seed(args)
    if args.trials < 1:
        return _fail("--trials must be >= 1")
    fixed = None
    if args.chi is not None:
        try:
            fixed = _parse_chi(args.chi)
        except ValueError as exc:
            return _fail(str(exc))
    transcripts = []
    for n in range(args.trials):
        rng = derive_rng(seed, 4, n)
        chi = fixed if fixed is not None else stateshare.random_qutrit(rng)
        transcripts.append(stateshare.run_protocol(chi, rng, use_mediator=not args.skip_mediator))
    fids = np.array([t.fidelity for t in transcripts])
    bell = Counter(f"{t.bell_outcome[0]}{t.bell_outcome[1]}" for t in transcripts)
    payload = {
        "command": "stateshare", "seed": seed, "trials": args.trials,
        "use_mediator": not args.skip_mediator,
        "min_fidelity": float(fids.min()), "mean_fidelity": float(fids.mean()),
        "success_rate": float(np.mean(fids >= 1 - 1e-9)),
        "bell_outcome_counts": dict(sorted(bell.items())),
    }
    if not args.no_transcripts:
        payload["transcripts"] = [t.to_dict() for t in transcripts]
    _emit(payload)
    return 0 if fids.min() >= 1 - 1e-9 else 1


# -- compare ------------------------------------------------------------------

_CSV_FIELDS = ["theta", "strategy", "trials", "rate", "analytic", "stderr",
               "unambiguous_errors"]


def _csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _clean(v) for k, v in r.items()})
    return buf.getvalue()


def cmd_compare(args) -> int:
    seed = _seed(args)
    if args.trials < 1:
        return _fail("--trials must be >= 1")
    if args.sweep:
        rows, ok = [], True
        for n, theta in enumerate(compare.theta_grid()):
            row = {"theta": theta}
            for s, (name, fn) in enumerate(compare.STRATEGIES.items()):
                est = fn(theta, args.trials, derive_rng(seed, 5, n, s))
                ok &= est.within(5.0) and est.unambiguous_errors == 0
                key = {"min-error": "P_e", "one-step": "P_inc_onestep",
                       "two-step": "P_inc_twostep"}[name]
                row[key] = est.rate
                row[key + "_analytic"] = est.analytic
            rows.append(row)
        sys.stdout.write(_csv(rows, list(rows[0].keys())))
        return 0 if ok else 1
    if args.theta is None:
        return _fail("--theta is required unless --sweep is given")
    fn = compare.STRATEGIES[args.strategy]
    try:
        est = fn(args.theta, args.trials, derive_rng(seed, 5))
    except ValueError as exc:
        return _fail(str(exc))
    sys.stdout.write(_csv([est.to_row()], _CSV_FIELDS))
    return 0 if est.within(5.0) and est.unambiguous_errors == 0 else 1


# -- eavesdrop-solve ----------------------------------------------------------

def cmd_eavesdrop_solve(args) -> int:
    cs = keyshare.constraint_system()
    info = cs.to_dict()
    _emit({"command": "eavesdrop-solve", **info})
    return 0 if info["kernel_dim"] == 1 and info["matches_levi_civita"] \
        and info["printed_implied"] else 1


# -- acceptance ---------------------------------------------------------------

def cmd_acceptance(args) -> int:
    from . import acceptance

    seed = _seed(args)
    results = acceptance.run_all(seed)
    for r in results:
        print(r.line(), file=sys.stderr)
    if args.determinism:
        r10 = acceptance.criterion_10(seed, first=results)
        print(r10.line(), file=sys.stderr)
        results.append(r10)
    _emit({"command": "acceptance", "seed": seed,
           "criteria": [{"id": r.cid, "title": r.title, "pass": r.passed,
                         "details": r.details} for r in results]})
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aqlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=None, help="master seed")
        return sp

    a = seeded(sub.add_parser("antisym", help="build |A_d> and check its properties"))
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--check-all", action="store_true",
                   help="more unitaries plus rotated-basis Monte Carlo rounds")
    a.add_argument("--rounds", type=int, default=2000)
    a.set_defaults(func=cmd_antisym)

    k = seeded(sub.add_parser("keyshare", help="run a key-sharing session"))
    k.add_argument("--rounds", type=int, default=10_000)
    k.add_argument("--attack", choices=["none", "cut-resend", "kernel"], default="none")
    k.add_argument("--disclose", type=float, default=0.5)
    k.set_defaults(func=cmd_keyshare)

    s = seeded(sub.add_parser("stateshare", help="run the state-sharing protocol"))
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--chi", default=None, help="comma-separated complex amplitudes")
    s.add_argument("--skip-mediator", action="store_true",
                   help="receiver ignores the mediator's label")
    s.add_argument("--no-transcripts", action="store_true")
    s.set_defaults(func=cmd_stateshare)

    c = seeded(sub.add_parser("compare", help="known-state comparison strategies (CSV)"))
    c.add_argument("--theta", type=float, default=None)
    c.add_argument("--trials", type=int, default=100_000)
    c.add_argument("--strategy", choices=list(compare.STRATEGIES), default="two-step")
    c.add_argument("--sweep", action="store_true", help="table over the standard theta grid")
    c.set_defaults(func=cmd_compare)

    e = sub.add_parser("eavesdrop-solve", help="solve the undetectability constraints")
    e.set_defaults(func=cmd_eavesdrop_solve)

    t = seeded(sub.add_parser("acceptance", help="run every exit criterion"))
    t.add_argument("--determinism", action="store_true",
                   help="also rerun the suite and compare outputs")
    t.set_defaults(func=cmd_acceptance)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
