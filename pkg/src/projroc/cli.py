"""Command-line front end: ``projroc estimate | test | simulate``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .datasets import read_dataset
from .errors import DimensionMismatch, ProjRocError, UnsupportedK
from .multivariate import MODES, MultiTestConfig, test_md
from .projections import Direction, project
from .report import atomic_write_text
from .roc import default_grid, quadrature_mass
from .simulation import load_plan, run_experiment
from .study import Study, apply_standardization, fit_standardization, validate_study
from .univariate import PopulationSide, PsiFunctional, UniTestInputs, default_h, pair_curves, test_1d

log = logging.getLogger("projroc")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _load(args) -> Study:
    study = validate_study(read_dataset(args.data, args.x, args.log_cols))
    if study.d >= 2 and args.standardize:
        study = apply_standardization(study, fit_standardization(study))
    return study


def _direction(values, d: int, name: str) -> Direction:
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (d,) or not np.linalg.norm(v) > 0:
        raise DimensionMismatch(f"{name} needs {d} components, not all zero")
    return Direction(v / np.linalg.norm(v))


def cmd_estimate(args) -> int:
    study = _load(args)
    k = args.marker - 1
    if not 0 <= k < study.K:
        raise DimensionMismatch(f"marker {args.marker} not in 1..{study.K}")
    F, G = study.diseased, study.healthy
    if study.d == 1:
        xs_f, xs_g = F.covariates[:, 0], G.covariates[:, 0]
        x_f = x_g = float(study.x[0])
    else:
        if args.beta_f is None or args.beta_g is None:
            raise DimensionMismatch("d >= 2 needs a direction pair via --beta-f and --beta-g")
        bf = _direction(args.beta_f, study.d, "--beta-f")
        bg = _direction(args.beta_g, study.d, "--beta-g")
        xs_f, xs_g = project(F.covariates, bf), project(G.covariates, bg)
        x_f, x_g = float(project(study.x, bf)), float(project(study.x, bg))

    side_f = PopulationSide.select(xs_f, F.markers[:, [k]], x_f)
    side_g = PopulationSide.select(xs_g, G.markers[:, [k]], x_g)
    grid = default_grid(args.grid)
    h = args.h if args.h is not None else default_h(study.n)
    orig_f, orig_g = side_f.original(), side_g.original()
    curve = pair_curves(orig_f, orig_g, quadrature_mass(grid, G.n, h))[0, 0]
    a = (orig_f[1][0, 0] - orig_g[1][0, 0]) / orig_f[2][0, 0]
    b = orig_g[2][0, 0] / orig_f[2][0, 0]

    lines = ["p,roc"] + [f"{p:.10g},{r:.10g}" for p, r in zip(grid.values, curve)]
    text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    print(f"bandwidths: g_F={side_f.bandwidths[0]:.6g} g_G={side_g.bandwidths[0]:.6g} h={h:.6g}",
          file=sys.stderr)
    print(f"shift-scale: a={a:.10g} b={b:.10g}", file=sys.stderr)
    return 0


def cmd_test(args) -> int:
    study = _load(args)
    if study.K < 2:
        raise UnsupportedK(f"comparing curves needs at least 2 markers, file has {study.K}")
    psi = PsiFunctional(args.psi)
    grid = default_grid(args.grid)
    if study.d == 1:
        F, G = study.diseased, study.healthy
        report = test_1d(UniTestInputs(
            F.covariates[:, 0], F.markers, G.covariates[:, 0], G.markers,
            float(study.x[0]), float(study.x[0]),
            psi=psi, B=args.B, seed=args.seed, grid=grid, h=args.h,
        ))
    else:
        config = MultiTestConfig(mode=args.mode, n_beta=args.n_beta, m_beta=args.m_beta, B=args.B,
                                 psi=psi, grid=grid, seed=args.seed, h=args.h, threads=args.threads)
        report = test_md(study, config)
    if args.out:
        atomic_write_text(args.out, report.to_json() + "\n")
    print(report.summary())
    return 0


def cmd_simulate(args) -> int:
    plan = load_plan(args.plan)

    def progress(done, total):
        if done == total or done % max(1, total // 20) == 0:
            print(f"repetition {done}/{total}", file=sys.stderr)

    result = run_experiment(plan, progress=progress, threads=args.threads)
    text = result.to_csv()
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="projroc",
        description="Compare dependent conditional ROC curves given a multidimensional covariate.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_options(p):
        p.add_argument("data", help="dataset CSV with status, x1..xd, y1..yK")
        p.add_argument("--x", type=_floats, required=True, help="conditioning point, comma separated")
        p.add_argument("--standardize", dest="standardize", action="store_true", default=True)
        p.add_argument("--no-standardize", dest="standardize", action="store_false")
        p.add_argument("--log-cols", type=_names, default=[], help="columns to log-transform")
        p.add_argument("--grid", type=_positive, default=101, help="number of p grid points")
        p.add_argument("--h", type=float, default=None, help="ROC smoothing bandwidth (default 1/sqrt(n))")
        p.add_argument("--out", default=None)

    est = sub.add_parser("estimate", help="estimate one conditional ROC curve")
    data_options(est)
    est.add_argument("--marker", type=_positive, default=1, help="1-based marker index")
    est.add_argument("--beta-f", type=_floats, default=None, help="diseased projection direction")
    est.add_argument("--beta-g", type=_floats, default=None, help="healthy projection direction")
    est.set_defaults(func=cmd_estimate)

    tst = sub.add_parser("test", help="test equality of the conditional ROC curves")
    data_options(tst)
    tst.add_argument("--psi", choices=["l2", "ks", "L2", "KS"], default="l2")
    tst.add_argument("--B", type=_positive, default=200)
    tst.add_argument("--mode", choices=MODES, default="grid")
    tst.add_argument("--n-beta", type=_positive, default=5)
    tst.add_argument("--m-beta", type=_positive, default=25)
    tst.add_argument("--seed", type=int, default=0)
    tst.add_argument("--threads", type=_positive, default=1)
    tst.set_defaults(func=cmd_test)

    sim = sub.add_parser("simulate", help="run a level or power experiment from a JSON plan")
    sim.add_argument("plan")
    sim.add_argument("--threads", type=_positive, default=None)
    sim.add_argument("--out", default=None)
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ProjRocError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
