"""Command-line entry point: oa-gen, criterion, subsample, fit, benchmark.

Data goes to stdout or files; logging goes to stderr. Exit codes: 0 success,
1 usage error, 2 runtime error. A TOML config file (--config) supplies
defaults that explicit flags override; IES_SEED overrides the default seed
when no --seed flag is given.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import numpy as np

from . import bench, oa
from .backfit import FitConfig, backfit
from .bandwidth import DEFAULT_GRID, CvSpec, cv_select
from .criterion import criterion_l, membership
from .data import SeededRng, default_seed, load_csv, scale_to_unit
from .sampler import select


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def default_q(n: int) -> int:
    """Largest supported prime power <= ceil(sqrt(n)), floored at 2."""
    cap = math.ceil(math.sqrt(n))
    fits = [s for s in oa.SUPPORTED_Q if s <= cap]
    return fits[-1] if fits else 2


def _parse_grid(spec: str) -> tuple[float, ...]:
    """Either 'start:stop:step' or a comma-separated list."""
    if ":" in spec:
        start, stop, step = (float(v) for v in spec.split(":"))
        k = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 10) for i in range(k))
    return tuple(float(v) for v in spec.split(","))


def _cv_spec(args) -> CvSpec:
    grid = _parse_grid(args.cv_grid) if args.cv_grid else DEFAULT_GRID
    mode = "full" if args.full_grid else "coordinate"
    return CvSpec(folds=args.cv_folds, grid=grid, mode=mode)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="ies",
        description="Near-orthogonal-array subsampling and additive-model fitting",
    )
    top.add_argument("--config", type=Path, help="TOML config file; explicit flags override it")
    top.add_argument("--seed", type=int, default=None, help="global RNG seed (default: IES_SEED or 0)")
    top.add_argument("--threads", type=int, default=None, help="cap on internal parallelism")
    top.add_argument("-v", "--verbose", action="store_true")
    sub = top.add_subparsers(dest="command", metavar="{oa-gen,criterion,subsample,fit,benchmark}")

    g = sub.add_parser("oa-gen", help="construct an orthogonal array, emit as CSV")
    g.add_argument("--q", type=int, required=True)
    g.add_argument("--p", type=int, default=None, help="columns (default q+1)")
    g.add_argument("--lam", type=int, default=1, help="stacked copies")
    g.add_argument("--jitter", action="store_true", help="emit jittered points on [0,1) instead of levels")
    g.add_argument("--out", type=Path, default=None, help="output CSV (default stdout)")

    c = sub.add_parser("criterion", help="criterion L, both lower bounds, and gap as JSON")
    c.add_argument("--input", type=Path, required=True)
    c.add_argument("--response", required=True)
    c.add_argument("--q", type=int, required=True)

    s = sub.add_parser("subsample", help="select a subsample from a CSV dataset")
    s.add_argument("--input", type=Path, required=True)
    s.add_argument("--response", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--q", type=int, default=None, help="resolution (default: prime power near sqrt(n))")
    s.add_argument("--method", choices=["ies", "rand", "lowcon"], default="ies")
    s.add_argument("--output", type=Path, default=None, help="CSV of selected rows")
    s.add_argument("--emit-indices", type=Path, default=None, help="newline-delimited index file")

    f = sub.add_parser("fit", help="fit the additive model on a CSV dataset")
    f.add_argument("--input", type=Path, required=True)
    f.add_argument("--response", required=True)
    f.add_argument("--bandwidths", default=None, help="comma-separated per-predictor bandwidths")
    f.add_argument("--cv", action="store_true", help="choose bandwidths by cross-validation")
    f.add_argument("--kernel", default="epanechnikov")
    f.add_argument("--max-iter", type=int, default=200)
    f.add_argument("--tol", type=float, default=1e-6)
    f.add_argument("--cv-folds", type=int, default=5)
    f.add_argument("--cv-grid", default=None, help="'start:stop:step' or comma list")
    f.add_argument("--full-grid", action="store_true")
    f.add_argument("--out-json", type=Path, default=None, help="fit summary JSON (default stdout)")
    f.add_argument("--out-components", type=Path, default=None, help="CSV of fitted component values")

    b = sub.add_parser("benchmark", help="replication harness over synthetic or real data")
    b.add_argument("--case", type=int, choices=[1, 2], default=1)
    b.add_argument("--misspecify", action="store_true")
    b.add_argument("--N", type=int, default=5000)
    b.add_argument("--n", type=int, default=500)
    b.add_argument("--q", type=int, default=16)
    b.add_argument("--methods", default="ies,rand")
    b.add_argument("--reps", type=int, default=50)
    b.add_argument("--grid-per-axis", type=int, default=40)
    b.add_argument("--out", type=Path, required=True, help="JSON-lines report path")
    b.add_argument("--real-data", type=Path, default=None, help="CSV path; switches to the real-data pipeline")
    b.add_argument("--response", default=None, help="response column for --real-data")
    b.add_argument("--cv-folds", type=int, default=5)
    b.add_argument("--cv-grid", default=None)
    b.add_argument("--full-grid", action="store_true")
    b.add_argument("--no-timings", action="store_true", help="zero timing fields for byte-reproducible reports")
    return top


def _merge_config(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill unset options from the TOML config; explicit flags win."""
    if not args.config:
        return
    with open(args.config, "rb") as fh:
        conf = tomllib.load(fh)
    flat = dict(conf)
    flat.update(conf.get(args.command or "", {}) if isinstance(conf.get(args.command or ""), dict) else {})
    for key, value in flat.items():
        if isinstance(value, dict):
            continue
        dest = key.replace("-", "_")
        flag = "--" + key.replace("_", "-")
        if hasattr(args, dest) and flag not in argv:
            setattr(args, dest, value)


def _cmd_oa_gen(args, seed: int) -> int:
    arr = oa.construct_oa(args.q, args.p if args.p is not None else args.q + 1, args.lam)
    if args.jitter:
        body = oa.random_oa(arr, SeededRng(seed)).points
        lines = [",".join(repr(float(v)) for v in row) for row in body]
    else:
        lines = [",".join(str(int(v)) for v in row) for row in arr.levels]
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_criterion(args, seed: int) -> int:
    ds = load_csv(args.input, args.response)
    view = scale_to_unit(ds)
    cells = membership(view.scaled, args.q)
    print(json.dumps(criterion_l(cells, args.q).as_dict(), sort_keys=True))
    return 0


def _cmd_subsample(args, seed: int) -> int:
    ds = load_csv(args.input, args.response)
    view = scale_to_unit(ds)
    q = args.q if args.q is not None else default_q(args.n)
    sub = select(view, args.n, q, args.method, SeededRng(seed))
    if args.emit_indices:
        args.emit_indices.write_text("".join(f"{i}\n" for i in sub.indices))
    if args.output:
        import csv as _csv

        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            w = _csv.writer(fh)
            w.writerow(list(ds.column_names) + [ds.response_name])
            for i in sub.indices:
                w.writerow([repr(float(v)) for v in ds.predictors[i]] + [repr(float(ds.response[i]))])
    if not args.output and not args.emit_indices:
        sys.stdout.write("".join(f"{i}\n" for i in sub.indices))
    return 0


def _cmd_fit(args, seed: int) -> int:
    ds = load_csv(args.input, args.response)
    view = scale_to_unit(ds)
    cfg = FitConfig(max_iter=args.max_iter, tol=args.tol, kernel=args.kernel)
    if args.cv:
        cv = cv_select(view.scaled, ds.response, _cv_spec(args), cfg, SeededRng(seed))
        h = cv.bandwidths
    elif args.bandwidths:
        h = np.array([float(v) for v in args.bandwidths.split(",")])
        if h.size == 1:
            h = np.repeat(h, ds.n_cols)
    else:
        raise UsageError("either --bandwidths or --cv is required")
    fit = backfit(view.scaled, ds.response, h, cfg)
    summary = {
        "mu_hat": fit.mu_hat,
        "bandwidths": [float(v) for v in fit.bandwidths],
        "iterations": fit.iterations,
        "converged": fit.converged,
        "final_max_update": fit.final_max_update,
        "kernel": fit.kernel,
        "n": fit.n,
        "p": fit.p,
    }
    text = json.dumps(summary, sort_keys=True, indent=2) + "\n"
    if args.out_json:
        args.out_json.write_text(text)
    else:
        sys.stdout.write(text)
    if args.out_components:
        with open(args.out_components, "w", encoding="utf-8") as fh:
            fh.write(",".join(f"m_{name}" for name in ds.column_names) + "\n")
            for i in range(fit.n):
                fh.write(",".join(repr(float(fit.components[j][i])) for j in range(fit.p)) + "\n")
    return 0


def _cmd_benchmark(args, seed: int) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    cv_spec = _cv_spec(args)
    if args.real_data:
        if not args.response:
            raise UsageError("--real-data requires --response")
        ds = load_csv(args.real_data, args.response)
        recs = bench.run_real_data(
            ds, methods, args.out, n_sub=args.n, q=args.q, seed=seed,
            replications=args.reps, grid_per_axis=args.grid_per_axis,
            cv_spec=cv_spec, include_timings=not args.no_timings,
        )
    else:
        scen = bench.SimScenario(
            case="normal" if args.case == 1 else "copula-exponential",
            N=args.N, misspecify=args.misspecify,
        )
        recs = bench.run_benchmark(
            [scen], methods, args.reps, args.out, n_sub=args.n, q=args.q,
            seed=seed, grid_per_axis=args.grid_per_axis, cv_spec=cv_spec,
            include_timings=not args.no_timings,
        )
    _log(f"wrote {len(recs)} records to {args.out}")
    return 0


_COMMANDS = {
    "oa-gen": _cmd_oa_gen,
    "criterion": _cmd_criterion,
    "subsample": _cmd_subsample,
    "fit": _cmd_fit,
    "benchmark": _cmd_benchmark,
}


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        _merge_config(args, argv)
        seed = args.seed if args.seed is not None else default_seed()
        return _COMMANDS[args.command](args, seed)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return 1
    except Exception as exc:  # runtime failures: bad data, singular fits, I/O
        _log(f"error: {exc}")
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
