"""Command line front end.

Subcommands: simulate, estimate, montecarlo, table, fisher, density,
variance.  Exit codes: 0 success, 1 runtime error (machine-readable JSON
{code, message, context} on stderr), 2 flag validation (argparse usage on
stderr).  LEVY_ESTIM_THREADS caps Monte Carlo worker counts when --threads
is not given.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import mc, serialize, skewed, subordinators, symmetric, transforms
from .errors import LevyEstimError
from .stable_core import (
    PositivityStable,
    ScalePath,
    StableParams,
    sample_increments,
    sample_timevarying,
)
from .stable_density import fisher_matrix, median_asymptotic_sd, phi, phi_deriv

__all__ = ["main", "build_parser"]


def _parse_params(text: str) -> dict:
    out = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise ValueError(f"expected key=value, got {chunk!r}")
        key, _, raw = chunk.partition("=")
        out[key.strip()] = float(raw)
    return out


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError("grid must be lo:hi:step")
    lo, hi, step = (float(p) for p in parts)
    if step <= 0.0 or hi < lo:
        raise ValueError("grid needs lo <= hi and step > 0")
    count = int(round((hi - lo) / step)) + 1
    return [lo + i * step for i in range(count) if lo + i * step <= hi + 1e-12]


def _write_lines(path, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf8") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# handlers

def _cmd_simulate(args) -> int:
    try:
        params = _parse_params(args.params)
    except ValueError as exc:
        print(f"error: --params: {exc}", file=sys.stderr)
        return 2
    if args.model == "timevarying":
        if "beta" not in params or "p_pos" not in params:
            print("error: timevarying model needs beta and p_pos params",
                  file=sys.stderr)
            return 2
        if args.path == "cosine":
            path = ScalePath.cosine(params["beta"])
        else:
            path = ScalePath.constant(params.get("sigma", 1.0), params["beta"])
        sample = sample_timevarying(path, params["p_pos"], args.n, args.seed)
    else:
        if args.T is None and args.h is None:
            print("error: need --T or --h", file=sys.stderr)
            return 2
        h = args.h if args.h is not None else args.T / args.n
        if args.model == "stable":
            if "p_pos" in params:
                pp = PositivityStable(params["beta"], params["p_pos"],
                                      params.get("sigma", 1.0) ** params["beta"])
                from .stable_core import sprime_increment_sampler

                sample = sprime_increment_sampler(pp, h, args.n, args.seed)
            else:
                sp = StableParams(params["beta"], params.get("sigma", 1.0),
                                  params.get("rho", 0.0),
                                  params.get("gamma", 0.0))
                sample = sample_increments(sp, h, args.n, args.seed)
        elif args.model == "gamma":
            sample = subordinators.sample_gamma_sub(
                subordinators.GammaSubParams(params["delta"], params["gamma"]),
                h, args.n, args.seed)
        else:  # ig
            sample = subordinators.sample_ig_sub(
                subordinators.IGSubParams(params["delta"], params["gamma"]),
                h, args.n, args.seed)
    serialize.write_increments(args.out, sample)
    return 0


def _report_out(report: serialize.EstimateReport, out) -> int:
    text = report.to_json()
    if out is None:
        print(text)
    else:
        with open(out, "w", encoding="utf8") as fh:
            fh.write(text + "\n")
    return 0


def _cmd_estimate(args) -> int:
    sample = serialize.read_increments(args.infile)
    method = args.method
    if method == "log":
        report = symmetric.log_moment_estimate(sample, args.level)
    elif method == "frac":
        if args.p is None:
            print("error: --method frac needs --p", file=sys.stderr)
            return 2
        report = symmetric.frac_moment_estimate(sample, args.p, args.level)
    elif method == "sign-bipower":
        report = skewed.sign_bipower_estimate(
            sample, 0.25 if args.q is None else args.q)
    elif method == "tripower":
        report = skewed.tripower_estimate(
            sample, 0.25 if args.q is None else args.q)
    elif method == "pipeline":
        report = transforms.full_pipeline(sample, q=args.q, p=args.p,
                                          level=args.level)
    elif method == "gamma-mle":
        delta_hat, gamma_hat = subordinators.gamma_mle(sample)
        fisher = subordinators.gamma_fisher(
            subordinators.GammaSubParams(delta_hat, gamma_hat))
        report = serialize.EstimateReport(
            method="gamma-mle", n=sample.n, h=sample.h, gamma_hat=gamma_hat,
            extra={"delta_hat": delta_hat,
                   "fisher": [float(v) for v in fisher.ravel()]})
    else:  # ig-mle
        delta_hat, gamma_hat = subordinators.ig_mle(sample)
        fisher = subordinators.ig_fisher(
            subordinators.IGSubParams(delta_hat, gamma_hat))
        report = serialize.EstimateReport(
            method="ig-mle", n=sample.n, h=sample.h, gamma_hat=gamma_hat,
            extra={"delta_hat": delta_hat,
                   "fisher": [float(v) for v in fisher.ravel()]})
    return _report_out(report, args.out)


def _cmd_montecarlo(args) -> int:
    with open(args.config, "r", encoding="utf8") as fh:
        payload = json.load(fh)
    if isinstance(payload, dict):
        payload = [payload]
    rows = []
    echo = {"configs": len(payload)}
    for entry in payload:
        config = mc.ExperimentConfig.from_json_dict(entry)
        rows.extend(mc.run_experiment(config, threads=args.threads))
        echo[f"label_{entry.get('label', 'custom')}"] = config.model
    mc.emit(rows, args.format, args.out, echo)
    return 0


def _cmd_table(args) -> int:
    rows = mc.run_preset(args.table_id, replications=args.reps,
                         master_seed=args.seed, threads=args.threads,
                         beta=args.beta,
                         n_list=args.n if args.n else None)
    echo = {"table": args.table_id, "master_seed": args.seed,
            "replications": args.reps if args.reps else "preset-default"}
    mc.emit(rows, args.format, args.out, echo)
    return 0


def _cmd_fisher(args) -> int:
    betas = _grid_or_single(args)
    lines = ["beta,sigma,i_beta_beta,i_beta_sigma,i_sigma_sigma,"
             "i_gamma_gamma,top_left_det"]
    for beta in betas:
        info = fisher_matrix(beta, args.sigma)
        m = info.matrix
        lines.append(",".join([f"{beta:.10g}", f"{args.sigma:.10g}",
                               f"{m[0, 0]:.10g}", f"{m[0, 1]:.10g}",
                               f"{m[1, 1]:.10g}", f"{m[2, 2]:.10g}",
                               f"{info.top_left_det():.10g}"]))
    _write_lines(args.out, lines)
    return 0


def _cmd_density(args) -> int:
    y_min = -args.y_max if args.y_min is None else args.y_min
    grid = np.linspace(y_min, args.y_max, args.points)
    lines = ["y,phi,dphi"]
    for y in grid:
        lines.append(f"{y:.10g},{phi(y, args.beta, args.sigma):.10g},"
                     f"{phi_deriv(y, args.beta, 1, args.sigma):.10g}")
    _write_lines(args.out, lines)
    return 0


def _cmd_variance(args) -> int:
    betas = _grid_or_single(args)
    header = ["beta", "sigma", "v_log_11", "v_log_12", "v_log_22",
              "v_log_33", "median_sd"]
    if args.p is not None:
        header += ["v_p_11", "v_p_12", "v_p_22"]
    lines = [",".join(header)]
    for beta in betas:
        vlog = symmetric.v_log(beta, args.sigma)
        cells = [f"{beta:.10g}", f"{args.sigma:.10g}",
                 f"{vlog[0, 0]:.10g}", f"{vlog[0, 1]:.10g}",
                 f"{vlog[1, 1]:.10g}", f"{vlog[2, 2]:.10g}",
                 f"{median_asymptotic_sd(beta, args.sigma):.10g}"]
        if args.p is not None:
            try:
                vp = symmetric.v_p(beta, args.sigma, args.p)
                cells += [f"{vp[0, 0]:.10g}", f"{vp[0, 1]:.10g}",
                          f"{vp[1, 1]:.10g}"]
            except LevyEstimError:
                # outside the admissible moment range for this p: leave the
                # curve undefined at this beta instead of aborting the dump
                cells += ["nan", "nan", "nan"]
        lines.append(",".join(cells))
    _write_lines(args.out, lines)
    return 0


def _grid_or_single(args) -> list[float]:
    if getattr(args, "beta_grid", None):
        return _parse_grid(args.beta_grid)
    if args.beta is None:
        raise LevyEstimError("need --beta or --beta-grid")
    return [args.beta]


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyestim",
        description="Simulation and parametric estimation for jump-type "
                    "Levy processes observed at high frequency.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write an increment CSV")
    sim.add_argument("--model", required=True,
                     choices=("stable", "timevarying", "gamma", "ig"))
    sim.add_argument("--params", required=True,
                     help="comma-separated key=value parameter list")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--T", type=float, default=None)
    sim.add_argument("--h", type=float, default=None)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--path", choices=("cosine", "constant"),
                     default="cosine", help="scale path for timevarying")
    sim.add_argument("--out", required=True)
    sim.set_defaults(handler=_cmd_simulate)

    est = sub.add_parser("estimate", help="estimate parameters from a CSV")
    est.add_argument("--in", dest="infile", required=True)
    est.add_argument("--method", required=True,
                     choices=("log", "frac", "sign-bipower", "tripower",
                              "gamma-mle", "ig-mle", "pipeline"))
    est.add_argument("--p", type=float, default=None,
                     help="fractional moment power (frac, pipeline)")
    est.add_argument("--q", type=float, default=None,
                     help="power for sign-bipower/tripower (default 0.25) "
                          "or the pipeline consistency diagnostic")
    est.add_argument("--level", type=float, default=0.95,
                     help="confidence level for intervals")
    est.add_argument("--out", default=None)
    est.set_defaults(handler=_cmd_estimate)

    mcp = sub.add_parser("montecarlo", help="run experiment configs (JSON)")
    mcp.add_argument("--config", required=True)
    mcp.add_argument("--out", required=True)
    mcp.add_argument("--format", choices=("csv", "json"), default="csv")
    mcp.add_argument("--threads", type=int, default=None)
    mcp.set_defaults(handler=_cmd_montecarlo)

    tab = sub.add_parser("table", help="reproduce a simulation table")
    tab.add_argument("--id", dest="table_id", required=True,
                     choices=mc.PRESET_NAMES)
    tab.add_argument("--reps", type=int, default=None)
    tab.add_argument("--seed", type=int, default=mc.DEFAULT_MASTER_SEED)
    tab.add_argument("--out", required=True)
    tab.add_argument("--format", choices=("csv", "json"), default="csv")
    tab.add_argument("--threads", type=int, default=None)
    tab.add_argument("--beta", type=float, default=None,
                     help="restrict to one true index")
    tab.add_argument("--n", type=int, nargs="+", default=None,
                     help="override the preset sample sizes")
    tab.set_defaults(handler=_cmd_table)

    fis = sub.add_parser("fisher", help="Fisher information dump")
    fis.add_argument("--beta", type=float, default=None)
    fis.add_argument("--beta-grid", default=None, help="lo:hi:step")
    fis.add_argument("--sigma", type=float, default=1.0)
    fis.add_argument("--out", default=None)
    fis.set_defaults(handler=_cmd_fisher)

    den = sub.add_parser("density", help="density grid dump")
    den.add_argument("--beta", type=float, required=True)
    den.add_argument("--sigma", type=float, default=1.0)
    den.add_argument("--y-min", type=float, default=None)
    den.add_argument("--y-max", type=float, default=10.0)
    den.add_argument("--points", type=int, default=201)
    den.add_argument("--out", default=None)
    den.set_defaults(handler=_cmd_density)

    var = sub.add_parser("variance", help="asymptotic variance dump")
    var.add_argument("--beta", type=float, default=None)
    var.add_argument("--beta-grid", default=None, help="lo:hi:step")
    var.add_argument("--sigma", type=float, default=1.0)
    var.add_argument("--p", type=float, default=None)
    var.add_argument("--out", default=None)
    var.set_defaults(handler=_cmd_variance)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except LevyEstimError as exc:
        print(json.dumps(exc.to_json_dict(), sort_keys=True), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"code": "io_error", "message": str(exc),
                          "context": {}}), file=sys.stderr)
        return 1
    except ValueError as exc:
        print(json.dumps({"code": "value_error", "message": str(exc),
                          "context": {}}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
