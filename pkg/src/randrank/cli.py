"""Command line front end.

Exit codes: 0 success, 2 configuration/input error, 3 numerical failure, 4 I/O error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import bounds as bd
from .dense import jacobi_svd_values
from .errors import NumericalError, RandRankError
from .grurv import FactorChain, assemble_r, grurv
from .harness import ExperimentConfig, run_experiment, run_grurv_experiment, run_mc_svalue
from .labgen import SpectrumSpec, realize_spectrum
from .matrixio import read_matrix, write_matrix
from .metrics import backward_error, orthogonality_defect, rank_reveal_metrics
from .randhaar import SeededRng
from .report import emit_report, summary_entry, write_mc_histogram, write_mc_table
from .rrr import rurv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("randrank")


def _int_list(text):
    return [int(float(t)) for t in text.split(",") if t.strip()]


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _add_experiment_flags(p):
    p.add_argument("--config", help="JSON file with experiment settings; flags override it")
    p.add_argument("--mode", choices=("vary-gap", "vary-dim", "single"))
    p.add_argument("--dist", choices=("stair", "logspace"))
    p.add_argument("--n", type=_int_list, help="dimension or comma-separated list")
    p.add_argument("--r", type=int, help="split index (default n/2)")
    p.add_argument("--gap", type=_float_list, help="gap sigma_r/sigma_{r+1} or comma-separated list")
    p.add_argument("--top", type=float, help="sigma_1 for the logspace distribution")
    p.add_argument("--trials", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--percentile", type=float)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", dest="output", help="output directory")
    p.add_argument("--jobs", type=int)
    p.add_argument("--no-plot", action="store_true", help="skip the SVG figures")


CONFIG_KEYS = ("mode", "dist", "n", "r", "gap", "top", "trials", "delta", "seed",
               "percentile", "format", "output", "jobs", "exponents", "cond", "oracle_every")


def build_config(args):
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        if "out" in data:
            data["output"] = data.pop("out")
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return ExperimentConfig.from_dict(data).validate()


def _prepare_out(path):
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path} is not writable")


def _print_grid(points, out=None):
    out = out or sys.stdout
    print(f"{'n':>6} {'gap':>9} {'metric':>7} {'median':>11} {'pct':>11} {'bound':>11} "
          f"{'exceed':>7} {'det':>10}", file=out)
    for p in points:
        if p.summary is None:
            print(f"{p.n:>6} {p.gap:>9.2g}  FAILED: {p.error}", file=out)
            continue
        for j, (name, m) in enumerate(p.summary.metrics.items()):
            bound = "n/a" if m.bound is None else f"{m.bound:.4g}"
            print(f"{p.n:>6} {p.gap:>9.2g} {name:>7} {m.median:>11.4g} {m.pct:>11.4g} "
                  f"{bound:>11} {m.exceed_count:>7} {p.det_bounds[j]:>10.3g}", file=out)


def _finish(points, cfg, plots):
    _print_grid(points)
    if cfg.output:
        try:
            paths = emit_report(points, cfg.format, cfg.output, plots=plots)
        except OSError:
            json.dump([summary_entry(p) for p in points], sys.stdout, indent=2, default=str)
            raise
        for path in paths.values():
            print(f"wrote {path}")
    kinds = {p.error_kind for p in points if p.error_kind}
    if "numerical" in kinds:
        return EXIT_NUMERICAL
    if "config" in kinds:
        return EXIT_CONFIG
    return EXIT_OK


def cmd_experiment(args):
    cfg = build_config(args)
    if cfg.output:
        _prepare_out(cfg.output)
    return _finish(run_experiment(cfg), cfg, not args.no_plot)


def cmd_grurv_experiment(args):
    cfg = build_config(args)
    if cfg.output:
        _prepare_out(cfg.output)
    return _finish(run_grurv_experiment(cfg), cfg, not args.no_plot)


def cmd_mc_svalue(args):
    res = run_mc_svalue(args.r, args.n, args.trials, args.delta, args.seed,
                        with_bound=not args.no_bound, jobs=args.jobs)
    print(f"s_(r,n) at r={res.r}, n={res.n}: {res.trials} samples")
    print(f"{'delta':>8} {'empirical':>10} {'ci_low':>9} {'ci_high':>9} {'bound':>9} {'ok':>5}")
    for row in res.rows:
        bound = "n/a" if row.bound is None else f"{row.bound:.4g}"
        ok = "" if row.ok is None else ("yes" if row.ok else "NO")
        print(f"{row.delta:>8.4g} {row.empirical:>10.4g} {row.ci_low:>9.4g} "
              f"{row.ci_high:>9.4g} {bound:>9} {ok:>5}")
    if res.ks_distance is not None:
        print(f"KS distance of s^2 against the closed-form density: {res.ks_distance:.4f}")
    if args.out:
        _prepare_out(args.out)
        write_mc_table(res, os.path.join(args.out, "mc_svalue.csv"))
        write_mc_histogram(res, os.path.join(args.out, "mc_histogram.csv"))
        print(f"wrote {args.out}/mc_svalue.csv and mc_histogram.csv")
    return EXIT_OK


def cmd_bounds(args):
    r = args.r if args.r is not None else args.n // 2
    b = bd.theorem_bounds(r, args.n, args.delta, args.gap)
    print(f"n={args.n} r={r} delta={args.delta} gap={args.gap}")
    print(f"{'quantity':<24} {'probabilistic':>14} {'deterministic':>14}")
    det = (None, None, None)
    if args.gap is not None:
        sigma = realize_spectrum(SpectrumSpec(args.dist, args.n, r, args.gap, args.top))
        det = bd.deterministic_bounds(sigma, r)
    rows = [
        ("sigma_r/sigma_min(R11)", b.b1, det[0]),
        ("sigma_max(R22)/sigma_r+1", b.b2, det[1]),
        ("|R11^-1 R12| (any gap)", b.b3, det[2]),
        ("|R11^-1 R12| (large gap)", b.b4 if b.b4_applicable else None, det[2]),
    ]
    for label, prob, d in rows:
        ps = "n/a" if prob is None else f"{prob:.6g}"
        ds = "n/a" if d is None else f"{d:.6g}"
        print(f"{label:<24} {ps:>14} {ds:>14}")
    print(f"sharp norm bound applies: {b.b4_applicable}")
    return EXIT_OK


def cmd_factor(args):
    a = read_matrix(args.input)
    res = rurv(a, SeededRng(args.seed))
    print(f"backward error {backward_error(a, *res):.3e}, "
          f"orthogonality u {orthogonality_defect(res.u):.3e} v {orthogonality_defect(res.v):.3e}")
    if args.rank is not None:
        sigma = jacobi_svd_values(a)
        rec = rank_reveal_metrics(sigma, res, args.rank)
        print(f"r={args.rank}: ratio1 {rec.ratio1:.6g}  ratio2 {rec.ratio2:.6g}  norm3 {rec.norm3:.6g}")
    if args.out:
        _prepare_out(args.out)
        for name, mat in zip("urv", res):
            write_matrix(os.path.join(args.out, f"{name}.txt"), mat)
        print(f"wrote u.txt r.txt v.txt to {args.out}")
    return EXIT_OK


def cmd_grurv(args):
    mats = [read_matrix(p) for p in args.factors]
    exps = _int_list(args.exponents)
    if len(exps) != len(mats):
        raise RandRankError(f"{len(mats)} factors but {len(exps)} exponents")
    res = grurv(FactorChain(list(zip(mats, exps))), SeededRng(args.seed))
    r = assemble_r(res)
    print(f"k={len(mats)} exponents={exps}: orthogonality u {orthogonality_defect(res.u_current):.3e} "
          f"v {orthogonality_defect(res.v):.3e}")
    if args.out:
        _prepare_out(args.out)
        write_matrix(os.path.join(args.out, "u.txt"), res.u_current)
        write_matrix(os.path.join(args.out, "v.txt"), res.v)
        write_matrix(os.path.join(args.out, "r.txt"), r)
        for i, ri in enumerate(res.r_list, start=1):
            write_matrix(os.path.join(args.out, f"r{i}.txt"), ri)
        print(f"wrote u.txt v.txt r.txt r1..r{len(mats)}.txt to {args.out}")
    return EXIT_OK


def make_parser():
    parser = argparse.ArgumentParser(prog="randrank", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factor", help="one randomized URV of a matrix file")
    p.add_argument("input")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank", type=int, help="report block metrics at this split index")
    p.add_argument("--out")
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("grurv", help="randomized URV of a product of matrix files")
    p.add_argument("factors", nargs="+")
    p.add_argument("--exponents", required=True, help="comma-separated +1/-1 per factor")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_grurv)

    p = sub.add_parser("experiment", help="Monte Carlo study of the rank-revealing bounds")
    _add_experiment_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("grurv-experiment", help="the same study on implicit products")
    _add_experiment_flags(p)
    p.add_argument("--exponents", type=_int_list, help="exponent pattern, e.g. 1,-1,1")
    p.add_argument("--cond", type=float, help="condition bound of the non-carrier factors")
    p.add_argument("--oracle-every", type=int, dest="oracle_every")
    p.set_defaults(func=cmd_grurv_experiment)

    p = sub.add_parser("mc-svalue", help="tail probabilities of the Haar corner singular value")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=5000)
    p.add_argument("--delta", type=_float_list, default=[0.01, 0.05, 0.1])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-bound", action="store_true", help="skip the bound; compare to the density")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mc_svalue)

    p = sub.add_parser("bounds", help="tabulate the probabilistic and deterministic bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--delta", type=float, default=0.03)
    p.add_argument("--gap", type=float)
    p.add_argument("--dist", choices=("stair", "logspace"), default="stair")
    p.add_argument("--top", type=float, default=1e13)
    p.set_defaults(func=cmd_bounds)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    np.set_printoptions(precision=6)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (RandRankError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
