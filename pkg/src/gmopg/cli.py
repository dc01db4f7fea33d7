"""Command-line interface: ``gmopg {fit,eval,sample,simulate,ttt}``.

Every command writes a JSON report (to ``--output`` or stdout).  Exit codes:
0 success, 1 numerical non-convergence (a partial report is still written),
2 input or usage error (message on stderr, no report).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import Exponential, Weibull
from .errors import DatasetValidationError, GmopgError
from .family import GMOPG
from .inference import (
    ModelTag,
    compare_models,
    descriptive,
    ttt_curve,
    validate_table3,
)
from .simulation import DESK_SAMPLE_SIZES, FULL_SAMPLE_SIZES, mc_study, simulation_config

SCHEMA_VERSION = "1.0"
DEFAULT_MODELS = "exp,me,p-e,mo-e,gmo-e,mop-e,gmop-e"
FAILED = "failed"


class InputError(Exception):
    """Bad file, bad flag value or unusable data: exit code 2."""


# -- input -------------------------------------------------------------------------


def parse_lifetimes(text: str) -> np.ndarray:
    """Single-column positive reals; blank lines and '#' comments are skipped and a
    non-numeric first line is taken as a header."""
    values = []
    seen_first = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in line.replace(";", ",").split(",") if f.strip()]
        if len(fields) != 1:
            raise InputError(f"line {lineno}: expected a single column, got {len(fields)} fields")
        try:
            value = float(fields[0])
        except ValueError:
            if not seen_first:
                seen_first = True
                continue
            raise InputError(f"line {lineno}: {fields[0].strip()!r} is not a number") from None
        seen_first = True
        if not (math.isfinite(value) and value > 0):
            raise InputError(f"line {lineno}: lifetimes must be positive and finite, got {value!r}")
        values.append(value)
    if not values:
        raise InputError("no data values found")
    return np.array(values)


def read_lifetimes(path) -> tuple[np.ndarray, dict]:
    """Read a data file and return the values plus an input digest."""
    try:
        raw = Path(path).read_bytes()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err.strerror or err}") from None
    try:
        data = parse_lifetimes(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise InputError(f"{path} is not a UTF-8 text file") from None
    return data, {"file": str(path), "n": int(data.size), "sha256": hashlib.sha256(raw).hexdigest()}


# -- output ------------------------------------------------------------------------


def _clean(obj):
    """JSON-ready copy: numpy scalars to Python, non-finite numbers to "failed"."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else FAILED
    return obj


def _report(command: str, argv, seed=None, **sections) -> dict:
    base = {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "gmopg", "version": __version__},
        "command": {"name": command, "argv": list(argv)},
        "seed": seed,
        "input": None,
        "models": [],
        "comparison": [],
        "tables": {},
        "plot_data": {},
    }
    base.update(sections)
    return _clean(base)


def _emit(report: dict, output):
    # repr-based float formatting is the shortest string that round-trips exactly
    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(output).write_text(text)
        except OSError as err:
            raise InputError(f"cannot write {output}: {err.strerror or err}") from None


def _plot_block(columns, rows) -> dict:
    return {"columns": list(columns), "rows": [list(r) for r in rows]}


def _write_plot_csv(directory, blocks: dict):
    if not directory:
        return
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, block in blocks.items():
            with open(out / f"{name}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(block["columns"])
                writer.writerows([[repr(v) if isinstance(v, float) else v for v in row] for row in block["rows"]])
    except OSError as err:
        raise InputError(f"cannot write plot data to {directory}: {err.strerror or err}") from None


# -- shared flag handling ------------------------------------------------------------


def _add_params(p, required=True):
    p.add_argument("--theta", type=float, required=required)
    p.add_argument("--alpha", type=float, required=required)
    p.add_argument("--lam", type=float, required=required, help="Poisson rate (any real, |lam| <= 700)")
    p.add_argument("--beta", type=float, required=required, help="baseline rate")
    p.add_argument("--delta", type=float, default=None, help="Weibull shape; selects the Weibull baseline")


def _params_from(args) -> GMOPG:
    try:
        baseline = Exponential(args.beta) if args.delta is None else Weibull(args.beta, args.delta)
        return GMOPG(args.theta, args.alpha, args.lam, baseline)
    except GmopgError as err:
        raise InputError(str(err)) from None


def _params_dict(params: GMOPG) -> dict:
    out = {"theta": params.theta, "alpha": params.alpha, "lam": params.lam, "beta": params.baseline.rate}
    if params.baseline.kind == "weibull":
        out["delta"] = params.baseline.shape
    return out


def _parse_grid(spec: str) -> np.ndarray:
    try:
        start, stop, num = spec.split(":")
        start, stop, num = float(start), float(stop), int(num)
    except ValueError:
        raise InputError(f"grid must look like START:STOP:COUNT, got {spec!r}") from None
    if num < 2 or not (0 < start < stop) or not math.isfinite(stop):
        raise InputError("grid needs 0 < START < STOP and COUNT >= 2")
    return np.linspace(start, stop, num)


def _parse_models(spec: str) -> list[ModelTag]:
    try:
        return [ModelTag.parse(s) for s in spec.split(",") if s.strip()]
    except GmopgError as err:
        raise InputError(str(err)) from None


def _parse_sizes(spec: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(s) for s in spec.split(",") if s.strip())
    except ValueError:
        raise InputError(f"sample sizes must be integers, got {spec!r}") from None
    if not sizes or min(sizes) < 5:
        raise InputError("sample sizes must be integers >= 5")
    return sizes


def _load(args):
    data, digest = read_lifetimes(args.data)
    tables = {"descriptive": descriptive(data).as_dict()}
    if getattr(args, "expect_table3", False):
        try:
            validate_table3(data)
        except DatasetValidationError as err:
            raise InputError(str(err)) from None
        tables["table3_validation"] = "passed"
    return data, digest, tables


# -- commands --------------------------------------------------------------------


def _fit_entry(res) -> dict:
    gof = res.gof.as_dict() if res.gof is not None else None
    return {
        "model": res.tag.label,
        "status": "converged" if res.convergence.converged else "not converged",
        "estimates": res.estimates,
        "fixed": res.fixed,
        "standard_errors": res.standard_errors,
        "ci95": {k: list(v) for k, v in res.ci95.items()},
        "loglik": res.loglik,
        "criteria": res.criteria.as_dict(),
        "gof": gof,
        "convergence": {
            "converged": res.convergence.converged,
            "iterations": res.convergence.iterations,
            "restarts": res.convergence.restarts,
            "gradient_norm": res.convergence.gradient_norm,
            "starts": res.convergence.starts,
            "failed_starts": res.convergence.failed_starts,
        },
    }


def cmd_fit(args, argv) -> int:
    data, digest, tables = _load(args)
    tags = _parse_models(args.models)
    failures: dict = {}
    results = compare_models(data, tags, failures=failures, n_starts=args.starts, seed=args.seed)
    models = [_fit_entry(r) for r in results]
    for tag, err in failures.items():
        models.append({"model": tag.label, "status": FAILED, "error": str(err)})
    comparison = []
    for r in results:
        row = {"model": r.tag.label, "k": r.k, "loglik": r.loglik, **r.criteria.as_dict()}
        g = r.gof
        row.update({"A": g.anderson_darling, "W": g.cramer_von_mises, "KS": g.ks, "KS_pvalue": g.ks_pvalue} if g else
                   {"A": None, "W": None, "KS": None, "KS_pvalue": None})
        comparison.append(row)

    grid = np.linspace(data.min(), data.max(), 200)
    plots = {"ttt": _plot_block(("p", "T"), ttt_curve(data))}
    for r in results:
        dist = r.distribution
        plots[f"fitted_{r.tag.value}"] = _plot_block(("t", "pdf", "cdf"), zip(grid, dist.pdf(grid), dist.cdf(grid)))
    report = _report("fit", argv, args.seed, input=digest, models=models, comparison=comparison, tables=tables, plot_data=plots)
    _emit(report, args.output)
    _write_plot_csv(args.plot_csv, report["plot_data"])
    ok = not failures and all(r.convergence.converged for r in results)
    return 0 if ok else 1


def cmd_eval(args, argv) -> int:
    params = _params_from(args)
    t = _parse_grid(args.grid)
    block = _plot_block(
        ("t", "pdf", "cdf", "sf", "hazard"),
        zip(t, params.pdf(t), params.cdf(t), params.sf(t), params.hazard(t)),
    )
    report = _report("eval", argv, None, tables={"parameters": _params_dict(params)}, plot_data={"evaluation": block})
    _emit(report, args.output)
    _write_plot_csv(args.plot_csv, report["plot_data"])
    return 0


def cmd_sample(args, argv) -> int:
    params = _params_from(args)
    if args.n < 0:
        raise InputError("n must be nonnegative")
    draws = params.sample(args.n, seed=args.seed) if args.n else np.empty(0)
    text = "".join(f"{float(x)!r}\n" for x in draws)
    try:
        Path(args.out).write_text(text)
    except OSError as err:
        raise InputError(f"cannot write {args.out}: {err.strerror or err}") from None
    return 0


def cmd_simulate(args, argv) -> int:
    truth = _params_from(args)
    sizes = FULL_SAMPLE_SIZES if args.full_grid else (_parse_sizes(args.ns) if args.ns else DESK_SAMPLE_SIZES)
    if args.replicates < 1:
        raise InputError("replicates must be at least 1")
    rep = mc_study(truth, sizes, N=args.replicates, seed=args.seed, config=simulation_config(truth),
                   diagnostic=args.diagnostic_truth, workers=args.workers)
    rows = [(c.parameter, c.n, c.bias, c.mse, c.converged, c.failed) for c in rep.cells]
    block = _plot_block(("parameter", "n", "bias", "mse", "converged", "failed"), rows)
    report = _report("simulate", argv, args.seed, tables={"simulation": rep.as_dict()}, plot_data={"bias_mse": block})
    _emit(report, args.output)
    _write_plot_csv(args.plot_csv, report["plot_data"])
    return 0


def cmd_ttt(args, argv) -> int:
    data, digest, tables = _load(args)
    d = tables["descriptive"]
    tables["five_number_summary"] = {k: d[k] for k in ("min", "q1", "median", "q3", "max")}
    report = _report("ttt", argv, None, input=digest, tables=tables, plot_data={"ttt": _plot_block(("p", "T"), ttt_curve(data))})
    _emit(report, args.output)
    _write_plot_csv(args.plot_csv, report["plot_data"])
    return 0


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmopg", description="Fit, evaluate and simulate GMOP-G lifetime models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--output", "-o", default=None, help="report file (default: stdout)")
        p.add_argument("--plot-csv", default=None, metavar="DIR", help="also write plot-data blocks as CSV files")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fit", help="fit models to a data file and compare them by AIC")
    p.add_argument("data")
    p.add_argument("--models", default=DEFAULT_MODELS, help=f"comma-separated model tags (default: {DEFAULT_MODELS})")
    p.add_argument("--starts", type=int, default=16, help="Latin hypercube starts per model")
    p.add_argument("--expect-table3", action="store_true", help="refuse data that does not match the guinea-pig summary")
    common(p)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("eval", help="evaluate pdf, cdf, survival and hazard on a grid")
    _add_params(p)
    p.add_argument("--grid", default="0.01:10:200", help="START:STOP:COUNT (default 0.01:10:200)")
    common(p)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("sample", help="write random draws, one per line")
    _add_params(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("simulate", help="Monte Carlo bias/MSE study of the MLE")
    _add_params(p)
    p.add_argument("--ns", default=None, help="comma-separated sample sizes (default 10,20,40,80)")
    p.add_argument("--full-grid", action="store_true", help="use n = 5, 10, ..., 80")
    p.add_argument("--replicates", type=int, default=500)
    p.add_argument("--diagnostic-truth", action="store_true", help="replace the estimator by the truth")
    p.add_argument("--workers", type=int, default=1)
    common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("ttt", help="total-time-on-test curve and summary statistics")
    p.add_argument("data")
    p.add_argument("--expect-table3", action="store_true")
    common(p, seed=False)
    p.set_defaults(handler=cmd_ttt)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args, argv)
    except InputError as err:
        print(f"gmopg: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
