"""Command-line interface.

Subcommands: analyze, survey, pa, dioph, perturb, curve.  Exit codes:
0 ok, 1 input error, 2 outside the supported hypotheses, 3 invariant or
numerical failure, 4 search/iteration budget exceeded.  All stochastic
commands are reproducible from --seed; outputs are byte-identical across
runs and worker counts.
"""
from __future__ import annotations

import argparse
import json
import sys

from .diophantine import (
    badly_approximable_search_dim4,
    badly_approximable_search_dim6,
    center_norm_minimum,
    center_plane_chart,
)
from .errors import InputError, TorusDynError
from .experiments import curve_experiment, perturb_experiment
from .intmatrix import matrix_from_json
from .perturbed import PerturbedMap
from .pseudo_anosov import pseudo_anosov_subspace
from .splitting import adapted_norm, classify, compute_splitting
from .survey import run_survey


def _dump(obj, path=None, stream=None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    if stream is not None:
        stream.write(text)


def _load_matrix(path: str):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix file {path!r}: {exc}") from exc
    try:
        return matrix_from_json(data)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_analyze(args) -> int:
    a = _load_matrix(args.matrix)
    report = classify(a)
    _dump(report.to_json(), args.out, sys.stdout)
    if not report.ergodic or report.dim_center not in (0, 2):
        return 2
    return 0


def cmd_survey(args) -> int:
    if args.dim < 2 or args.dim > 10:
        raise InputError("survey dimension must be between 2 and 10")
    if args.height < 0 or args.height > 5:
        raise InputError("survey height must be between 0 and 5")
    entries, summary = run_survey(args.dim, args.height, limit=args.limit,
                                  reciprocal_only=args.reciprocal_only, jobs=args.jobs)
    if args.out:
        with open(args.out, "w") as fh:
            for e in entries:
                fh.write(json.dumps(e, sort_keys=True) + "\n")
    _dump(summary, args.summary, sys.stdout)
    return 0


def cmd_pa(args) -> int:
    a = _load_matrix(args.matrix)
    pa = pseudo_anosov_subspace(a, k_max=args.kmax)
    _dump(pa.to_json(), args.out, sys.stdout)
    return 0


def cmd_dioph(args) -> int:
    a = _load_matrix(args.matrix)
    split = compute_splitting(a)
    norm = adapted_norm(split)
    pa = pseudo_anosov_subspace(a, k_max=args.kmax_pa, split=split)
    report, ball = center_norm_minimum(pa, norm, args.radius)
    chart = center_plane_chart(split, pa.lam)
    if pa.dim_x == 4:
        witness = badly_approximable_search_dim4(
            pa, norm, chart, candidate_count=args.candidates, k_max=args.kmax)
    else:
        witness = badly_approximable_search_dim6(
            pa, norm, chart, candidate_count=args.candidates, k_max=args.kmax,
            delta=args.delta)
    report.badly_approximable = witness.to_json()
    out = report.to_json()
    out["config"] = {
        "radius": args.radius, "kmax": args.kmax, "candidates": args.candidates,
        "delta": args.delta, "seed": args.seed,
    }
    table = ["norm,center_norm"] + [
        f"{float(nv)!r},{float(cv)!r}" for nv, cv in zip(ball.norms, ball.center_norms)
    ]
    if args.format == "csv":
        sys.stdout.write("\n".join(table) + "\n")
        _dump(out, args.out)
    else:
        _dump(out, args.out, sys.stdout)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("\n".join(table) + "\n")
    return 0


def cmd_perturb(args) -> int:
    try:
        f = PerturbedMap.load(args.map)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read map file {args.map!r}: {exc}") from exc
    amplitudes = [float(t) for t in args.eps.split(",") if t != ""]
    result = perturb_experiment(
        f, amplitudes, seed=args.seed, n_max=args.nmax, n_count=args.ncount,
        phi_samples=args.samples)
    csv_rows = result.pop("csv_rows")
    table = ["amplitude,norm,deviation"] + [
        f"{float(amp)!r},{float(nv)!r},{float(dev)!r}" for amp, nv, dev in csv_rows
    ]
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("\n".join(table) + "\n")
    if args.format == "csv":
        sys.stdout.write("\n".join(table) + "\n")
        _dump(result, args.out)
    else:
        _dump(result, args.out, sys.stdout)
    for entry in result["results"]:
        deg = entry.get("degeneration")
        if deg is not None and not deg["passed"]:
            return 3
    return 0


def cmd_curve(args) -> int:
    a = _load_matrix(args.matrix)
    result = curve_experiment(a, eps=args.eps, radius=args.radius, seed=args.seed,
                              k_max=args.kmax)
    _dump(result, args.out, sys.stdout)
    if abs(result["winding"]) != 1:
        return 3
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torusdyn",
                                description="algebraic classification and perturbation "
                                            "experiments for toral automorphisms")
    p.add_argument("--seed", type=int, default=0, help="seed for all stochastic steps")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("analyze", help="classify one integer matrix")
    q.add_argument("matrix")
    q.add_argument("--out")
    q.set_defaults(func=cmd_analyze)

    q = sub.add_parser("survey", help="classify a whole coefficient box of companions")
    q.add_argument("--dim", type=int, required=True)
    q.add_argument("--height", type=int, required=True)
    q.add_argument("--limit", type=int)
    q.add_argument("--reciprocal-only", action="store_true")
    q.add_argument("--jobs", type=int, default=1)
    q.add_argument("--out", help="JSONL catalog path")
    q.add_argument("--summary", help="summary JSON path")
    q.set_defaults(func=cmd_survey)

    q = sub.add_parser("pa", help="power-irreducible invariant subspace")
    q.add_argument("matrix")
    q.add_argument("--kmax", type=int, default=24)
    q.add_argument("--out")
    q.set_defaults(func=cmd_pa)

    q = sub.add_parser("dioph", help="Diophantine constants of the invariant lattice")
    q.add_argument("matrix")
    q.add_argument("--radius", type=float, default=50.0, help="scan radius (adapted norm)")
    q.add_argument("--kmax", type=int, default=200)
    q.add_argument("--kmax-pa", type=int, default=24)
    q.add_argument("--candidates", type=int, default=12)
    q.add_argument("--delta", type=float, default=0.1)
    q.add_argument("--format", choices=("json", "csv"), default="json",
                   help="stdout format: the report, or the scan table")
    q.add_argument("--out")
    q.add_argument("--csv", help="write (norm, center norm) pairs")
    q.set_defaults(func=cmd_dioph)

    q = sub.add_parser("perturb", help="graph/holonomy estimates for a perturbed map")
    q.add_argument("map", help="perturbed-map JSON file")
    q.add_argument("--eps", default="0.01", help="comma-separated shear amplitudes")
    q.add_argument("--nmax", type=float, default=100.0)
    q.add_argument("--ncount", type=int, default=24)
    q.add_argument("--samples", type=int, default=1000)
    q.add_argument("--format", choices=("json", "csv"), default="json",
                   help="stdout format: the summary, or the deviation table")
    q.add_argument("--out")
    q.add_argument("--csv")
    q.set_defaults(func=cmd_perturb)

    q = sub.add_parser("curve", help="lattice winding curve around the su-subspace")
    q.add_argument("matrix")
    q.add_argument("--eps", type=float, default=0.2)
    q.add_argument("--radius", type=float, default=10.0)
    q.add_argument("--kmax", type=int, default=24)
    q.add_argument("--out")
    q.set_defaults(func=cmd_curve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TorusDynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
