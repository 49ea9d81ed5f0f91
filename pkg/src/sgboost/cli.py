"""Command-line front end: ``sgboost {fit,simulate,bounds,prob}``.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from ._errors import NumericalError, ValidationError
from .boosting import VARIANTS, BoostConfig, coefficient_paths, fit
from .design import read_csv_design, thin_svd
from .evaluation import kfold_cv
from .montecarlo import mc_selection_frequency
from .ridge import lambda_for_df, lambda_for_df_single
from .selection import (UNDETERMINED, alpha_zone, bounds_orthogonal, selection_bounds,
                        orthogonal_case, prob_group_vs_external, prob_group_vs_subcolumns)
from .simulation import RESULT_COLUMNS, builtin_scenarios, default_models, get_scenario, run_experiment

FULL_SCALE = {"reps": 15, "mstop": 2500, "eta": 0.05,
               "lambda_base": [50.0 * i for i in range(1, 11)]}
DEFAULT_ALPHAS = [round(0.1 * i, 10) for i in range(11)]


class Formatter:
    def __init__(self, precision: int = 10):
        self.precision = precision

    def __call__(self, v) -> str:
        if v is None:
            return ""
        if isinstance(v, (bool, np.bool_)):
            return "true" if v else "false"
        if isinstance(v, (int, np.integer)):
            return str(int(v))
        if isinstance(v, (float, np.floating)):
            return format(float(v), f".{self.precision}g")
        return str(v)


def _write_csv(path: Path, header, rows, fmt: Formatter):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _default_seed() -> int:
    raw = os.environ.get("SGB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"SGB_SEED must be an integer, got {raw!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def cmd_fit(args) -> int:
    gd, y = read_csv_design(args.data, args.groups, outcome=args.outcome)
    if args.standardize:
        X = gd.X - gd.X.mean(axis=0)
        sd = X.std(axis=0, ddof=1)
        if np.any(sd == 0):
            j = int(np.flatnonzero(sd == 0)[0])
            raise ValidationError(f"column {gd.names[j]} is constant; cannot standardize")
        gd = type(gd)(X / sd, gd.group_of, gd.group_labels, gd.names)
    cfg = BoostConfig(variant=args.variant, alpha=args.alpha, lambda_base=args.lambda_base,
                      eta=args.eta, M=args.mstop, loss=args.loss, df=args.df)
    cv = kfold_cv(gd, y, cfg, k=args.folds, seed=args.seed, threads=args.threads)
    res = fit(gd, y, cfg)
    fmt = Formatter(args.precision)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    label = lambda g: gd.group_labels[g - 1]
    beta = res.beta_at(cv.best_m)
    _write_csv(out / "coefficients.csv", ["variable", "group", "value"],
               [(nm, label(gd.group_of[j]), beta[j]) for j, nm in enumerate(gd.names)], fmt)
    _write_csv(out / "paths.csv", ["iteration", "variable", "group", "value"],
               [(m, v, label(g), b) for m, v, g, b in coefficient_paths(res)], fmt)
    _write_csv(out / "cv.csv", ["iteration", "risk"],
               [(m, r) for m, r in enumerate(cv.risk, start=1)], fmt)
    print(f"best_m={cv.best_m}")
    print(f"offset={fmt(res.offset)}")
    return 0


def cmd_simulate(args) -> int:
    if args.scenario == "all":
        scenarios = builtin_scenarios()
    else:
        try:
            sid = int(args.scenario)
        except ValueError:
            raise ValidationError(f"scenario must be 1..12 or 'all', got {args.scenario!r}") from None
        scenarios = [get_scenario(sid)]
    reps, mstop, eta = args.reps, args.mstop, args.eta
    lambda_bases = args.lambda_base or [100.0]
    if args.full_scale:
        reps, mstop, eta = FULL_SCALE["reps"], FULL_SCALE["mstop"], FULL_SCALE["eta"]
        lambda_bases = FULL_SCALE["lambda_base"]
    catalogue = default_models(lambda_bases)
    models = []
    for name in args.models.split(","):
        if name not in catalogue:
            raise ValidationError(f"unknown model {name!r}; expected one of {sorted(catalogue)}")
        models += catalogue[name]
    rows = run_experiment(scenarios, models, args.alphas, reps=reps, seed=args.seed,
                          eta=eta, M=mstop, k=args.folds, threads=args.threads)
    _write_csv(Path(args.out), RESULT_COLUMNS, [[r[c] for c in RESULT_COLUMNS] for r in rows],
               Formatter(args.precision))
    print(f"rows={len(rows)}")
    return 0


def _read_penalties(path, names):
    pen = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if head is None or [h.strip() for h in head[:2]] != ["learner", "penalty"]:
            raise ValidationError(f"{path}:1: header must be 'learner,penalty'")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                pen[rec[0].strip()] = float(rec[1])
            except (IndexError, ValueError):
                raise ValidationError(f"{path}:{lineno}: expected 'learner,penalty'") from None
    missing = [k for k in list(names) + ["GROUP"] if k not in pen]
    if missing:
        raise ValidationError(f"{path}: no penalty for '{missing[0]}'")
    return np.array([pen[k] for k in names]), pen["GROUP"]


def cmd_bounds(args) -> int:
    gd, _ = read_csv_design(args.data, args.groups, outcome=args.outcome)
    labels = [str(l) for l in gd.group_labels]
    if args.group not in labels:
        raise ValidationError(f"unknown group {args.group!r}; groups are {labels}")
    g = labels.index(args.group) + 1
    cols = gd.group_cols[g - 1]
    M = gd.X[:, cols]
    names = [gd.names[j] for j in cols]
    if args.lambdas:
        lambdas, mu = _read_penalties(args.lambdas, names)
    else:
        a = args.alpha
        if not 0 < a < 1:
            raise ValidationError("--alpha must lie in (0, 1)")
        lambdas = np.array([lambda_for_df_single(np.linalg.norm(M[:, j]), a) for j in range(M.shape[1])])
        svd = thin_svd(M)
        mu = lambda_for_df_single(svd.d[0], 1 - a) if svd.r == 1 else lambda_for_df(svd.d, 1 - a)
    rep = selection_bounds(M, lambdas, mu)
    case = orthogonal_case(M) if not args.lambdas else None
    orth = bounds_orthogonal(args.alpha, M.shape[1], case) if case else UNDETERMINED
    fmt = Formatter(args.precision)
    print(f"group={args.group}")
    print(f"mu={fmt(float(mu))}")
    for nm, lam in zip(names, lambdas):
        print(f"lambda[{nm}]={fmt(float(lam))}")
    lo, hi = alpha_zone(len(cols))
    print(f"orthogonal_zone_lower={fmt(lo)}")
    print(f"orthogonal_zone_upper={fmt(hi)}")
    for key, val in rep.as_pairs(names):
        print(f"{key}={fmt(val)}")
    print(f"orthogonal_case={case or 'none'}")
    print(f"orthogonal_verdict={orth}")
    print(f"verdict={orth if orth != UNDETERMINED else rep.implied}")
    return 0


def cmd_prob(args) -> int:
    if args.alpha is not None:
        if args.df_lambda is not None or args.df_mu is not None:
            raise ValidationError("give either --alpha or --df-lambda/--df-mu, not both")
        if not 0 < args.alpha < 1:
            raise ValidationError("--alpha must lie in (0, 1)")
        dl, dm = args.alpha, 1 - args.alpha
    else:
        if args.df_lambda is None or args.df_mu is None:
            raise ValidationError("need --df-lambda and --df-mu (or --alpha)")
        dl, dm = args.df_lambda, args.df_mu
    if args.external:
        sp = prob_group_vs_external(args.p, dl, dm)
    else:
        if args.p1 is None:
            raise ValidationError("need --p1 or --external")
        sp = prob_group_vs_subcolumns(args.p, args.p1, dl, dm)
    fmt = Formatter(args.precision)
    print(f"probability={fmt(sp.value)}")
    print(f"regime={sp.regime}")
    print(f"a={fmt(sp.a)}")
    print(f"b={fmt(sp.b)}")
    print(f"q={fmt(sp.q)}")
    print(f"degenerate={fmt(sp.degenerate)}")
    if args.mc:
        mc = mc_selection_frequency(args.p, dl, dm, p1=None if args.external else args.p1,
                                    external=args.external, nsims=args.nsims, seed=args.seed,
                                    threads=args.threads)
        print(f"mc_frequency={fmt(mc.frequency)}")
        print(f"mc_se={fmt(mc.se)}")
        print(f"mc_nsims={mc.nsims}")
        print(f"mc_within_3se={fmt(abs(mc.frequency - sp.value) <= 3 * mc.se)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgboost", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="default: $SGB_SEED or 0")
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("--precision", type=_positive_int, default=10,
                        help="significant digits in numeric output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="boost on CSV data with CV early stopping")
    p.add_argument("data")
    p.add_argument("groups")
    p.add_argument("--outcome", required=True)
    p.add_argument("--variant", choices=VARIANTS, default="sgb-df")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--lambda-base", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--mstop", type=int, default=100)
    p.add_argument("--loss", choices=("l2", "logistic"), default="l2")
    p.add_argument("--df", type=float, default=0.5, help="per-learner df of the baseline variants")
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", parents=[common], help="run the simulation scenarios")
    p.add_argument("--scenario", required=True, help="1..12 or 'all'")
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--models", default="sgb-df")
    p.add_argument("--alphas", type=_float_list, default=DEFAULT_ALPHAS)
    p.add_argument("--lambda-base", type=_float_list, default=None)
    p.add_argument("--mstop", type=_positive_int, default=600)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--full-scale", action="store_true",
                   help="15 reps, 2500 iterations, eta 0.05, lambda_base 50..500")
    p.add_argument("--out", default="results.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", parents=[common], help="selection bounds for one group")
    p.add_argument("data")
    p.add_argument("groups")
    p.add_argument("--group", required=True)
    p.add_argument("--outcome", default=None, help="column to exclude from the design")
    how = p.add_mutually_exclusive_group(required=True)
    how.add_argument("--alpha", type=float)
    how.add_argument("--lambdas", help="CSV 'learner,penalty'; learner GROUP is the group penalty")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("prob", parents=[common], help="group-vs-individual selection probability")
    p.add_argument("--p", type=int, required=True)
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--p1", type=int)
    which.add_argument("--external", action="store_true")
    p.add_argument("--df-lambda", type=float)
    p.add_argument("--df-mu", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--mc", action="store_true", help="append a Monte-Carlo check")
    p.add_argument("--nsims", type=_positive_int, default=100_000)
    p.set_defaults(func=cmd_prob)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except (ValidationError, FileNotFoundError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
