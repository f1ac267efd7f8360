"""Command line interface: ``powersat <command> ...``.

Commands print JSON on stdout unless they write CSV/JSON files.  The default
master seed comes from the POWERSAT_SEED environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import probe as probes
from .dist import DistSpec, beta0_residual, solve_beta0
from .genmodel import export_dimacs, read_dimacs, sample_formula, stats
from .harness import ConfigError, SweepConfig, run_sweep
from .rng import default_master_seed, stream
from .solver import decide, extract_contradictory_paths
from .tspan import SubcriticalRatio, compute_params, search_contradictory_paths


def _dist(text):
    try:
        return DistSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, default=_json_default)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def cmd_gen(args):
    f = sample_formula(args.dist, args.n, args.k, stream(args.seed))
    text = export_dimacs(f)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args):
    f = read_dimacs(args.inp)
    t0 = time.perf_counter()
    digest = decide(f)
    elapsed = 1000.0 * (time.perf_counter() - t0)
    out = {"verdict": digest.verdict, "longest_path": digest.condensation_longest_path,
           "time_ms": round(elapsed, 3)}
    if digest.witness_var is not None:
        out["witness"] = digest.witness_var
    if args.certificate and not digest.is_sat:
        cert = extract_contradictory_paths(f, digest)
        out["certificate"] = {
            "variable": cert.variable,
            "forward": {"literals": cert.forward.literals, "clauses": cert.forward.clauses},
            "backward": {"literals": cert.backward.literals, "clauses": cert.backward.clauses},
        }
    _emit(out)
    return 0


def cmd_tspan(args):
    f = read_dimacs(args.inp)
    try:
        params = compute_params(f.n_vars, args.alpha, stats(f), override=args.override)
    except SubcriticalRatio as exc:
        print(f"powersat tspan: {exc}; pass --override to search anyway", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"powersat tspan: {exc}; pass --override to search anyway", file=sys.stderr)
        return 2
    res = search_contradictory_paths(f, params, stream(args.seed), overlap_frac=args.overlap_frac,
                                     pick=args.pick, max_rounds=args.max_rounds)
    out = {"outcome": res.outcome, "rounds_used": res.rounds_used, "pairings": res.pairings}
    if res.found:
        out["found_variable"] = res.found_variable
    out["stop_reason"] = res.stop_reason
    out["params"] = {"s1": params.s1, "sigma": params.sigma, "s2": params.s2, "K": params.K, "mu": params.mu}
    _emit(out)
    return 0


def cmd_probe(args):
    kind = args.kind
    rows, header, summary = [], [], {}
    if kind == "scaling":
        rep = probes.scaling_probe(args.dist, args.statistic, args.n, args.trials, args.seed)
        header = ["n", "trial", args.statistic]
        for i, n in enumerate(rep.ns):
            rows.extend([n, j, rep.values[i, j]] for j in range(rep.trials))
        summary = {"ns": rep.ns, "medians": rep.medians, "fitted_exponent": rep.fitted_exponent,
                   "exponent_stderr": rep.exponent_stderr, "trials": rep.trials, "seed": rep.seed}
    elif kind == "pairmoment":
        n = args.n[0]
        est = probes.pair_moment_probe(args.dist, n, args.trials, args.seed)
        summary = {"n": n, "mean": est.mean, "stderr": est.stderr, "samples": est.samples,
                   "reference": None if est.nonconvergent_reference else est.reference,
                   "nonconvergent_reference": est.nonconvergent_reference,
                   "tail_check": {str(k): v for k, v in est.tail_check.items()}}
    elif kind == "azuma":
        res = probes.azuma_probe(args.mu, args.alpha, args.t, args.eps, args.trials, args.seed)
        summary = {"mu": args.mu, "alpha": args.alpha, "t": args.t, "eps": args.eps,
                   "empirical": res.empirical, "bound": res.bound, "sigma_hat": res.sigma_hat,
                   "trials": res.trials, "holds": res.holds}
    elif kind == "bicycles":
        n = args.n[0]
        rep = probes.bicycle_count_probe(args.dist, n, args.trials, args.max_len, args.seed)
        header = ["n", "trial", "bicycles", "verdict", "bound"]
        rows = [[n, j, c, v, b] for j, (c, v, b) in enumerate(zip(rep.counts, rep.verdicts, rep.bounds))]
        summary = {"n": n, "mean": rep.mean, "stderr": rep.stderr, "mean_bound": rep.mean_bound,
                   "unsat_without_bicycle": rep.inconsistent}
    elif kind == "heavy":
        if args.inp:
            f = read_dimacs(args.inp)
        else:
            f = sample_formula(args.dist, args.n[0], args.k, stream(args.seed))
        chosen = args.vars or probes.top_degree_vars(f, f.k)
        summary = {"vars": chosen, "H": probes.heavy_clause_count(f, chosen)}
    if args.csv and header:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    elif header and not args.json:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    _emit({"kind": kind, **summary}, args.json)
    return 0


def cmd_sweep(args):
    raw = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    overrides = {"dists": args.dist, "ns": args.n, "trials": args.trials, "master_seed": args.seed,
                 "csv_path": args.csv, "json_path": args.json, "emit_dimacs": args.dimacs_dir,
                 "workers": args.workers}
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if args.tspan:
        raw["run_tspan"] = True
    if args.probes:
        raw["run_probes"] = True
    raw.setdefault("trials", 10)
    try:
        config = SweepConfig.from_json(raw)
    except (ConfigError, TypeError, ValueError) as exc:
        print(f"powersat sweep: {exc}", file=sys.stderr)
        return 2
    result = run_sweep(config)
    if not config.csv_path:
        sys.stdout.write(result.csv_text)
    if not config.json_path:
        _emit({"master_seed": config.master_seed, "cells": result.summary})
    return 0


def cmd_beta0(args):
    b = solve_beta0(tol=args.tol)
    _emit({"beta0": b, "residual": beta0_residual(b)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="powersat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    seed = default_master_seed()

    p = sub.add_parser("gen", help="generate a configuration-model k-CNF as DIMACS")
    p.add_argument("--dist", type=_dist, required=True, help="zeta:<beta>, pareto:<alpha> or const:<d>")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="decide a 2-CNF")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--certificate", action="store_true", help="include contradictory paths when UNSAT")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("tspan", help="search for contradictory paths by span growth")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--max-rounds", type=int)
    p.add_argument("--overlap-frac", type=float, default=0.1)
    p.add_argument("--pick", choices=["variable", "clone-pair"], default="variable")
    p.add_argument("--override", action="store_true", help="search even when ratio <= 1 or alpha <= 2")
    p.set_defaults(func=cmd_tspan)

    p = sub.add_parser("probe", help="Monte Carlo probes of the degree statistics")
    p.add_argument("--kind", choices=["scaling", "pairmoment", "azuma", "bicycles", "heavy"], required=True)
    p.add_argument("--dist", type=_dist, default=DistSpec.zeta(4.0))
    p.add_argument("--n", type=int, nargs="+", default=[10 ** 3, 10 ** 4, 10 ** 5])
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--statistic", choices=[probes.MAX_DEGREE, probes.SUM_DEGREES], default=probes.MAX_DEGREE)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=2.5)
    p.add_argument("--t", type=int, default=10 ** 3)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--max-len", type=int, default=25)
    p.add_argument("--in", dest="inp", help="DIMACS input for --kind heavy")
    p.add_argument("--vars", type=int, nargs="+", help="variables for --kind heavy (default: top degrees)")
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("sweep", help="seeded SAT-fraction sweep over (dist, n) cells")
    p.add_argument("--config", help="JSON file with SweepConfig fields; flags override it")
    p.add_argument("--dist", type=str, nargs="+")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv")
    p.add_argument("--json")
    p.add_argument("--tspan", action="store_true", help="also run the contradictory-path search")
    p.add_argument("--probes", action="store_true", help="add ratio and pair-moment diagnostics")
    p.add_argument("--dimacs-dir", help="write every generated formula here")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("beta0", help="zeta exponent where E xi^2 = 3 E xi")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_beta0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
