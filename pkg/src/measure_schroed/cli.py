"""Command-line front end.

Exit codes: 0 success, 1 a computation guard tripped (span / overflow),
2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import diophantine
from .generators import delta_comb, quasi_periodic_pair
from .gordon import (
    PROBE_TOL,
    THREE_BLOCK_TOL,
    ApproximationFamily,
    check_normalized,
    eigenvalue_absence_probe,
    gordon_decay_metric,
    stability_bound_check,
    three_block_test,
)
from .propagation import PropagationError, State, monodromy, solve_ivp
from .specfile import SpecError, dump_measure, load_measure, measure_from_spec, measure_to_spec, read_json


def _num(x: float) -> str:
    return repr(float(x))


def _write_csv(rows: list[list[Any]], header: list[str], out: Optional[str]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(v) if isinstance(v, float) else v for v in row])
    if out is None or out == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(out).write_text(buf.getvalue(), encoding="utf-8")


def _dump_json(payload: Any, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _json_default(obj):
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _finite(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def _parse_alpha(value: Any, where: str):
    if isinstance(value, bool):
        raise SpecError(where, "expected a number or string")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return diophantine.named_constant(value)
        except ValueError as exc:
            raise SpecError(where, str(exc)) from None
    if isinstance(value, dict) and set(value) <= {"liouville_m_max", "B"} and "liouville_m_max" in value:
        alpha, _ = diophantine.liouville_alpha(int(value["liouville_m_max"]), float(value.get("B", 1.0)))
        return alpha
    raise SpecError(where, "expected a number, a named constant, or {\"liouville_m_max\": m}")


def load_family(path: str) -> tuple[ApproximationFamily, dict]:
    """Read a family spec; returns the family and the raw document."""
    doc = read_json(path)
    if not isinstance(doc, dict) or "target" not in doc:
        raise SpecError("<root>", "family spec needs a \"target\"")
    target_doc = doc["target"]
    if isinstance(target_doc, dict) and "recipe" in target_doc:
        if target_doc["recipe"] != "quasiperiodic":
            raise SpecError("target.recipe", f"unknown recipe {target_doc['recipe']!r}")
        for key in ("alpha", "nu", "nu_tilde", "m_max"):
            if key not in target_doc:
                raise SpecError(f"target.{key}", "missing")
        alpha = _parse_alpha(target_doc["alpha"], "target.alpha")
        nu = measure_from_spec(target_doc["nu"], "target.nu")
        nu_tilde = measure_from_spec(target_doc["nu_tilde"], "target.nu_tilde")
        try:
            _, fam = quasi_periodic_pair(nu_tilde, nu, alpha, int(target_doc["m_max"]))
        except ValueError as exc:
            raise SpecError("target", str(exc)) from None
        return fam, doc

    target = measure_from_spec(target_doc, "target")
    raw = doc.get("approximants")
    if not isinstance(raw, list) or not raw:
        raise SpecError("approximants", "expected a non-empty list")
    measures, periods = [], []
    for i, item in enumerate(raw):
        where = f"approximants[{i}]"
        if not isinstance(item, dict) or "period" not in item:
            raise SpecError(where, "expected {\"measure\": ..., \"period\": p}")
        measures.append(measure_from_spec(item["measure"], where + ".measure") if "measure" in item else target)
        p = item["period"]
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise SpecError(where + ".period", "expected a number")
        periods.append(float(p))
    try:
        fam = ApproximationFamily(target, measures, periods)
    except ValueError as exc:
        raise SpecError("approximants", str(exc)) from None
    return fam, doc


def family_to_spec(fam: ApproximationFamily) -> dict:
    return {
        "target": measure_to_spec(fam.target),
        "approximants": [{"measure": measure_to_spec(m), "period": p}
                         for m, p in zip(fam.approximants, fam.periods)],
    }


# -- commands ----------------------------------------------------------------

def cmd_solve(args) -> int:
    mu = load_measure(args.spec)
    init = State(0.0, args.u0, args.du0)
    samples = ()
    if args.samples:
        samples = list(np.linspace(0.0, args.x, args.samples))
    final, states = solve_ivp(mu, args.energy, args.x, init, trajectory=True, samples=samples)
    _dump_json({"x": final.x, "u": final.u, "du": final.du}, None)
    if args.trajectory:
        _write_csv([[s.x, s.u, s.du] for s in states], ["x", "u", "du"], args.trajectory)
    return 0


def cmd_discriminant(args) -> int:
    mu = load_measure(args.spec)
    period = args.period
    if mu.period is None and period is None:
        raise SpecError("period", "discriminant needs a periodic measure")
    if args.n_points < 1:
        raise SpecError("n_points", "must be at least 1")
    if args.n_points == 1:
        energies = [args.e_min]
    else:
        energies = list(np.linspace(args.e_min, args.e_max, args.n_points))
    rows = []
    for E in energies:
        M = monodromy(mu, float(E), period=period)
        rows.append([float(E), M.trace])
    _write_csv(rows, ["E", "trace"], args.out)
    return 0


def _energies(args, doc: dict) -> list[float]:
    if args.energies:
        return [float(e) for e in args.energies]
    if "energies" in doc:
        if not isinstance(doc["energies"], list):
            raise SpecError("energies", "expected a list of numbers")
        return [float(e) for e in doc["energies"]]
    return [float(e) for e in np.linspace(args.e_min, args.e_max, args.n_energies)]


def cmd_gordon(args) -> int:
    fam, doc = load_family(args.family)
    if args.C < 0:
        raise SpecError("C", "must be nonnegative")
    init = State(0.0, args.u0, args.du0)
    try:
        check_normalized(init)
    except ValueError as exc:
        raise SpecError("init", str(exc)) from None
    energies = _energies(args, doc)

    per_energy = []
    csv_rows = []
    all_pass = True
    for E in energies:
        blocks = []
        for m, (mu_m, p) in enumerate(zip(fam.approximants, fam.periods), start=1):
            r = three_block_test(mu_m, E, init, period=p)
            blocks.append({"m": m, "period": p, "n_minus": r.n_minus, "n_plus": r.n_plus,
                           "n_double": r.n_double, "pass": r.passed})
            all_pass &= r.passed
        probe = eigenvalue_absence_probe(fam, E, init)
        all_pass &= probe.non_decay
        stab = stability_bound_check(fam, E, init, args.C)
        for rep in stab.reports:
            csv_rows.append([rep.m, rep.period, rep.x, rep.deviation, rep.tv, rep.bound,
                             "true" if rep.bound_ok else "false"])
        per_energy.append({
            "E": E,
            "three_block": blocks,
            "probe": {"checkpoints": probe.checkpoints, "values": probe.values,
                      "approximant_norms": probe.approximant_norms, "deviations": probe.deviations,
                      "chain_ok": probe.chain_ok, "non_decay": probe.non_decay},
            "stability": [{"m": r.m, "x": r.x, "deviation": r.deviation, "tv": r.tv,
                           "bound": r.bound, "bound_ok": r.bound_ok} for r in stab.reports],
            "fitted_C": _finite(stab.fitted_C),
        })

    report = {
        "periods": list(fam.periods),
        "C": args.C,
        "init": [init.u, init.du],
        "decay_metric": [_finite(v) for v in gordon_decay_metric(fam, args.C)],
        "energies": per_energy,
        "all_pass": all_pass,
        "tolerances": {"three_block": THREE_BLOCK_TOL, "probe": PROBE_TOL},
        "fitted_constants": {"stability_C": [e["fitted_C"] for e in per_energy]},
        "note": "finite checkpoint scan: evidence over the stored approximants, not a proof",
    }
    _dump_json(report, args.out)
    if args.csv:
        _write_csv(csv_rows, ["m", "p_m", "x", "deviation", "tv", "bound", "pass"], args.csv)
    return 0


def cmd_cf(args) -> int:
    alpha = diophantine.named_constant(args.alpha)
    if not 0 < alpha < 1:
        raise SpecError("alpha", f"must lie in (0, 1), got {args.alpha}")
    cf = diophantine.cf_expansion(alpha, args.n)
    convs = diophantine.convergents(cf)
    B = args.B
    if B is None:
        B = (diophantine.least_classical_constant(cf.alpha, convs) if args.classical
             else diophantine.least_liouville_constant(cf.alpha, convs))
        print(f"note: B = {_num(B)} (least constant for the listed m)", file=sys.stderr)
    elif B < 0:
        raise SpecError("B", "must be nonnegative")
    rows = diophantine.liouville_diagnostic(cf.alpha, convs, B, classical=args.classical)
    out = []
    for a, c, r in zip(cf.partial_quotients, convs, rows):
        out.append([c.m, a, c.p, c.q, r.log10_lhs, r.log10_rhs, "true" if r.satisfied else "false"])
    _write_csv(out, ["m", "a_m", "p_m", "q_m", "log10_error", "log10_bound", "satisfied"], args.out)
    if cf.rational:
        print(f"note: expansion terminated after {len(cf.partial_quotients)} terms (rational)",
              file=sys.stderr)
    return 0


def cmd_generate(args) -> int:
    if args.kind == "comb":
        try:
            mu = delta_comb(args.period, args.offset, args.weight)
        except ValueError as exc:
            raise SpecError("period", str(exc)) from None
        dump_measure(mu, args.out)
        return 0
    nu = load_measure(args.nu)
    nu_tilde = load_measure(args.nu_tilde)
    alpha = (diophantine.liouville_alpha(args.liouville, args.B)[0] if args.liouville
             else diophantine.named_constant(args.alpha))
    try:
        _, fam = quasi_periodic_pair(nu_tilde, nu, alpha, args.m_max)
    except ValueError as exc:
        raise SpecError("alpha", str(exc)) from None
    doc = family_to_spec(fam)
    doc["alpha"] = str(diophantine.to_mpf(alpha))
    doc["convergents"] = [{"m": c.m, "p": c.p, "q": c.q} for c in fam.convergents]
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="measure-schroed",
                                     description="Schrodinger operators -u'' + mu u with measure potentials")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="propagate a solution of Hu = Eu from 0 to x")
    p.add_argument("spec")
    p.add_argument("--energy", "-E", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--du0", type=float, default=0.0)
    p.add_argument("--trajectory", help="write breakpoint trajectory CSV here")
    p.add_argument("--samples", type=int, default=0, help="extra uniform sample points on [0, x]")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("discriminant", help="trace of the monodromy over an energy grid")
    p.add_argument("spec")
    p.add_argument("--e-min", type=float, required=True)
    p.add_argument("--e-max", type=float, required=True)
    p.add_argument("--n-points", type=int, required=True)
    p.add_argument("--period", type=float, default=None, help="override period (needed for the zero measure)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_discriminant)

    p = sub.add_parser("gordon", help="decay metric, three-block test and absence probe for a family")
    p.add_argument("family")
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--out", default="-")
    p.add_argument("--csv", help="write per-checkpoint stability rows here")
    p.add_argument("--energies", type=float, nargs="*")
    p.add_argument("--e-min", type=float, default=-5.0)
    p.add_argument("--e-max", type=float, default=20.0)
    p.add_argument("--n-energies", type=int, default=20)
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--du0", type=float, default=0.0)
    p.set_defaults(func=cmd_gordon)

    p = sub.add_parser("cf", help="continued fraction and Liouville diagnostic table")
    p.add_argument("alpha", help="decimal string or one of golden, sqrt2-1, e-2, pi-3")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--B", type=float, default=None,
                   help="bound constant (default: least B satisfying every row)")
    p.add_argument("--classical", action="store_true", help="use B q_m^-m instead of B m^-q_m")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("generate", help="write example measure / family specs")
    gen = p.add_subparsers(dest="kind", required=True)
    g = gen.add_parser("comb")
    g.add_argument("--period", type=float, default=1.0)
    g.add_argument("--offset", type=float, default=0.5)
    g.add_argument("--weight", type=float, default=1.0)
    g.add_argument("--out", required=True)
    g = gen.add_parser("quasiperiodic")
    g.add_argument("--nu", required=True)
    g.add_argument("--nu-tilde", required=True)
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--alpha")
    src.add_argument("--liouville", type=int, metavar="M", help="synthetic alpha fast-approximable up to m=M")
    g.add_argument("--B", type=float, default=1.0)
    g.add_argument("--m-max", type=int, default=4)
    g.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PropagationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # includes SpecError
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
