"""Deterministic Monte Carlo harness reproducing the simulation tables.

Each replication draws its own RNG stream from
hash(master_seed, n, estimator_id, replication_index), so results are
bit-identical for any worker count: replications are pure functions of the
seed and aggregation reduces in replication order.

Estimation failures (EstimationError subclasses, e.g. an index root
outside the admissible interval) are counted per cell and excluded from
mean/RMSE; RMSE uses the population convention
RMSE^2 = (mean - truth)^2 + (1/R') sum (est - mean)^2 over the R'
successes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DomainError, EstimationError
from .serialize import SummaryRow, write_summary
from .skewed import (
    bipower_beta,
    sign_statistic,
    sigma_star_power,
    tripower_integrated_scale,
)
from .stable_core import (
    PositivityStable,
    ScalePath,
    StableParams,
    derive_seed,
    sample_increments,
    sample_timevarying,
    skew_to_positivity,
    sprime_increment_sampler,
)
from .subordinators import (
    GammaSubParams,
    IGSubParams,
    gamma_mle,
    gamma_moment_estimate,
    ig_mle,
    sample_gamma_sub,
    sample_ig_sub,
)
from .symmetric import (
    frac_moment_estimate,
    known_scale_beta,
    log_moment_estimate,
    median_gamma,
)

__all__ = [
    "ExperimentConfig",
    "run_experiment",
    "preset",
    "run_preset",
    "emit",
    "DEFAULT_MASTER_SEED",
    "PRESET_NAMES",
]

DEFAULT_MASTER_SEED = 20260814

_MODELS = ("symmetric_stable", "skewed_stable", "timevarying_stable",
           "gamma_sub", "ig_sub")

_H_RULES = ("fixed_T", "power")

# parameters each estimator kind emits, in row order
_ESTIMATOR_PARAMS = {
    "log": ("beta", "sigma", "gamma"),
    "frac": ("beta", "sigma", "gamma"),
    "known_scale": ("beta",),
    "median": ("gamma",),
    "sign": ("p_pos",),
    "bipower": ("beta",),
    "power_scale": ("sigma",),
    "tripower": ("sigma_star",),
    "gamma_mle": ("delta", "gamma"),
    "gamma_moment": ("delta", "gamma"),
    "ig_mle": ("delta", "gamma"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo design: a model with true parameters, sample sizes,
    a mesh rule, estimators with tuning, and a master seed."""

    model: str
    truth: dict
    n_list: tuple[int, ...]
    h_rule: dict
    replications: int
    estimators: tuple[dict, ...]
    master_seed: int = DEFAULT_MASTER_SEED
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "estimators",
                           tuple(dict(e) for e in self.estimators))
        object.__setattr__(self, "truth", dict(self.truth))
        object.__setattr__(self, "h_rule", dict(self.h_rule))
        if self.model not in _MODELS:
            raise DomainError("unknown model", model=self.model,
                              known=list(_MODELS))
        if self.replications < 1:
            raise DomainError("replications must be >= 1",
                              replications=self.replications)
        if not self.n_list or any(n < 1 for n in self.n_list):
            raise DomainError("n_list must hold positive sizes",
                              n_list=list(self.n_list))
        kind = self.h_rule.get("kind")
        if kind not in _H_RULES:
            raise DomainError("h_rule kind must be fixed_T or power",
                              h_rule=self.h_rule)
        if kind == "fixed_T" and not float(self.h_rule.get("T", 0.0)) > 0.0:
            raise DomainError("fixed_T rule needs T > 0", h_rule=self.h_rule)
        if kind == "power" and not 0.0 < float(self.h_rule.get("a", 0.0)):
            raise DomainError("power rule needs a > 0", h_rule=self.h_rule)
        if not self.estimators:
            raise DomainError("estimator list must be nonempty")
        for est in self.estimators:
            if "id" not in est or "kind" not in est:
                raise DomainError("estimator entries need id and kind",
                                  entry=dict(est))
            if est["kind"] not in _ESTIMATOR_PARAMS:
                raise DomainError("unknown estimator kind",
                                  kind=est["kind"],
                                  known=sorted(_ESTIMATOR_PARAMS))
            for param in _ESTIMATOR_PARAMS[est["kind"]]:
                if param not in self.truth:
                    raise DomainError("truth record lacks a parameter the "
                                      "estimator reports",
                                      estimator=est["id"], param=param)

    def mesh(self, n: int) -> float:
        if self.h_rule["kind"] == "fixed_T":
            return float(self.h_rule["T"]) / n
        return float(n) ** (-float(self.h_rule["a"]))

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "truth": dict(self.truth),
            "n_list": list(self.n_list),
            "h_rule": dict(self.h_rule),
            "replications": self.replications,
            "estimators": [dict(e) for e in self.estimators],
            "master_seed": self.master_seed,
            "label": self.label,
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "ExperimentConfig":
        return cls(
            model=payload["model"],
            truth=dict(payload["truth"]),
            n_list=tuple(payload["n_list"]),
            h_rule=dict(payload["h_rule"]),
            replications=int(payload["replications"]),
            estimators=tuple(payload["estimators"]),
            master_seed=int(payload.get("master_seed", DEFAULT_MASTER_SEED)),
            label=payload.get("label", "custom"),
        )


def _simulate(model: str, truth: dict, n: int, h: float, seed: int):
    if model == "symmetric_stable":
        params = StableParams(truth["beta"], truth["sigma"],
                              truth.get("rho", 0.0), truth.get("gamma", 0.0))
        return sample_increments(params, h, n, seed)
    if model == "skewed_stable":
        beta = truth["beta"]
        pp = PositivityStable(beta, truth["p_pos"],
                              truth.get("sigma", 1.0) ** beta)
        return sprime_increment_sampler(pp, h, n, seed)
    if model == "timevarying_stable":
        path_name = truth.get("path", "cosine")
        if path_name == "cosine":
            path = ScalePath.cosine(truth["beta"])
        elif path_name == "constant":
            path = ScalePath.constant(truth.get("sigma", 1.0), truth["beta"])
        else:
            raise DomainError("unknown scale path", path=path_name)
        return sample_timevarying(path, truth["p_pos"], n, seed)
    if model == "gamma_sub":
        return sample_gamma_sub(GammaSubParams(truth["delta"], truth["gamma"]),
                                h, n, seed)
    if model == "ig_sub":
        return sample_ig_sub(IGSubParams(truth["delta"], truth["gamma"]),
                             h, n, seed)
    raise DomainError("unknown model", model=model)


def _apply_estimator(est: dict, sample, truth: dict) -> tuple[float, ...]:
    kind = est["kind"]
    if kind == "log":
        rep = log_moment_estimate(sample)
        return rep.beta_hat, rep.sigma_hat, rep.gamma_hat
    if kind == "frac":
        rep = frac_moment_estimate(sample, float(est["p"]))
        return rep.beta_hat, rep.sigma_hat, rep.gamma_hat
    if kind == "known_scale":
        sigma = float(est.get("sigma", truth.get("sigma")))
        return (known_scale_beta(sample, sigma),)
    if kind == "median":
        return (median_gamma(sample),)
    if kind == "sign":
        return (sign_statistic(sample),)
    if kind == "bipower":
        p_hat = sign_statistic(sample)
        return (bipower_beta(sample, float(est["q"]), p_hat),)
    if kind == "power_scale":
        q = float(est["q"])
        p_hat = sign_statistic(sample)
        beta_hat = bipower_beta(sample, q, p_hat)
        power = 2.0 * q
        s_p = sigma_star_power(sample, p_hat, beta_hat, power)
        if s_p <= 0.0:
            raise EstimationError("nonpositive scale functional", s_p=s_p)
        return (s_p ** (1.0 / power),)
    if kind == "tripower":
        q = float(est["q"])
        p_hat = sign_statistic(sample)
        beta_hat = bipower_beta(sample, q, p_hat)
        return (tripower_integrated_scale(sample, p_hat, beta_hat),)
    if kind == "gamma_mle":
        return gamma_mle(sample)
    if kind == "gamma_moment":
        delta_hat, gamma_hat, _ = gamma_moment_estimate(sample)
        return delta_hat, gamma_hat
    if kind == "ig_mle":
        return ig_mle(sample)
    raise DomainError("unknown estimator kind", kind=kind)


def _replicate(model: str, truth: dict, n: int, h: float, est: dict,
               master_seed: int, rep: int):
    seed = derive_seed(master_seed, n, est["id"], rep)
    sample = _simulate(model, truth, n, h, seed)
    try:
        return _apply_estimator(est, sample, truth)
    except EstimationError:
        return None


def _thread_count(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("LEVY_ESTIM_THREADS")
    if env:
        return max(1, int(env))
    return 1


def run_experiment(config: ExperimentConfig,
                   threads: int | None = None) -> list[SummaryRow]:
    """Run the full design and return one SummaryRow per
    (n, estimator, parameter) cell, in that deterministic order."""
    workers = _thread_count(threads)
    rows: list[SummaryRow] = []
    for n in config.n_list:
        h = config.mesh(n)
        t_total = n * h
        for est in config.estimators:
            reps = range(config.replications)

            def one(rep: int, est=est, n=n, h=h):
                return _replicate(config.model, config.truth, n, h, est,
                                  config.master_seed, rep)

            if workers == 1:
                results = [one(rep) for rep in reps]
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    results = list(pool.map(one, reps))
            params = _ESTIMATOR_PARAMS[est["kind"]]
            failures = sum(1 for r in results if r is None)
            kept = [r for r in results if r is not None]
            for idx, param in enumerate(params):
                truth_val = float(config.truth[param])
                if kept:
                    vals = np.array([r[idx] for r in kept])
                    mean = float(vals.mean())
                    rmse = math.sqrt(float(np.mean((vals - truth_val) ** 2)))
                else:
                    mean = rmse = float("nan")
                rows.append(SummaryRow(
                    table=config.label, estimator=est["id"], param=param,
                    n=n, T=t_total, truth=truth_val, mean=mean, rmse=rmse,
                    failures=failures, replications=config.replications,
                    seed=config.master_seed))
    return rows


# ---------------------------------------------------------------------------
# table presets

PRESET_NAMES = ("table1", "table2", "table3", "table4")

_SYMMETRIC_BETAS = (0.8, 1.0, 1.5, 1.8)
_SKEWED_BETAS = (1.2, 1.5, 1.7, 1.9)
_FRAC_ORDERS = (0.05, 0.1, 0.2)


def _symmetric_estimators(beta: float) -> tuple[dict, ...]:
    ests = [{"id": "log", "kind": "log"}]
    for p in _FRAC_ORDERS:
        if p < beta / 6.0:  # blank cells: the moment order must stay below beta/6
            ests.append({"id": f"frac_{p:g}", "kind": "frac", "p": p})
    ests.append({"id": "known_scale", "kind": "known_scale", "sigma": 0.5})
    ests.append({"id": "median", "kind": "median"})
    return tuple(ests)


def _skewed_estimators(final: str) -> tuple[dict, ...]:
    return (
        {"id": "sign", "kind": "sign"},
        {"id": "bipower", "kind": "bipower", "q": 0.25},
        {"id": final, "kind": final, "q": 0.25},
    )


def preset(table_id: str,
           master_seed: int = DEFAULT_MASTER_SEED) -> list[ExperimentConfig]:
    """Exact designs of the four simulation tables, one config per true
    index.

    table1: symmetric stable, (sigma, gamma) = (0.5, -0.5),
            beta in {0.8, 1, 1.5, 1.8}, n in {501, 1001, 2001}, h = 5/n;
            log-moment, fractional p in {0.05, 0.1, 0.2} where p < beta/6,
            known-scale, median; 1000 replications.
    table2: as table1 with h = n^{-3/5}.
    table3: skewed strictly stable on [0, 1], sigma = 1,
            beta in {1.2, 1.5, 1.7, 1.9} with p_pos mapped from rho = -0.5,
            n in {500, 1000, 2000, 5000}; sign, bipower(q=1/4),
            power-scale(q=1/4); 1000 replications.
    table4: as table3 with the cosine scale path (sigma*_beta = 0.6) and
            the tripower integrated-scale estimator.
    """
    if table_id in ("table1", "table2"):
        h_rule = ({"kind": "fixed_T", "T": 5.0} if table_id == "table1"
                  else {"kind": "power", "a": 0.6})
        return [
            ExperimentConfig(
                model="symmetric_stable",
                truth={"beta": beta, "sigma": 0.5, "gamma": -0.5, "rho": 0.0},
                n_list=(501, 1001, 2001),
                h_rule=h_rule,
                replications=1000,
                estimators=_symmetric_estimators(beta),
                master_seed=master_seed,
                label=f"{table_id}[beta={beta:g}]")
            for beta in _SYMMETRIC_BETAS
        ]
    if table_id in ("table3", "table4"):
        configs = []
        for beta in _SKEWED_BETAS:
            p_pos = skew_to_positivity(beta, -0.5)
            if table_id == "table3":
                model = "skewed_stable"
                truth = {"beta": beta, "p_pos": p_pos, "sigma": 1.0}
                estimators = _skewed_estimators("power_scale")
            else:
                model = "timevarying_stable"
                truth = {"beta": beta, "p_pos": p_pos, "sigma_star": 0.6,
                         "path": "cosine"}
                estimators = _skewed_estimators("tripower")
            configs.append(ExperimentConfig(
                model=model, truth=truth,
                n_list=(500, 1000, 2000, 5000),
                h_rule={"kind": "fixed_T", "T": 1.0},
                replications=1000,
                estimators=estimators,
                master_seed=master_seed,
                label=f"{table_id}[beta={beta:g}]"))
        return configs
    raise DomainError("unknown preset", table_id=table_id,
                      known=list(PRESET_NAMES))


def run_preset(table_id: str, replications: int | None = None,
               master_seed: int = DEFAULT_MASTER_SEED,
               threads: int | None = None,
               beta: float | None = None,
               n_list: Sequence[int] | None = None) -> list[SummaryRow]:
    """Run one preset, optionally overriding replications, restricting to a
    single true index, or overriding the sample sizes."""
    rows: list[SummaryRow] = []
    for config in preset(table_id, master_seed):
        if beta is not None and abs(config.truth["beta"] - beta) > 1e-12:
            continue
        if replications is not None:
            config = replace(config, replications=int(replications))
        if n_list is not None:
            config = replace(config, n_list=tuple(int(n) for n in n_list))
        rows.extend(run_experiment(config, threads=threads))
    if not rows:
        raise DomainError("preset filter selected no design",
                          table_id=table_id, beta=beta)
    return rows


def emit(rows: Sequence[SummaryRow], fmt: str, path,
         config_echo: dict | None = None) -> None:
    """Write summary rows as CSV (with '#' config echo) or JSON."""
    if not rows:
        raise DomainError("no rows to emit")
    if fmt == "csv":
        write_summary(path, rows, config_echo)
        return
    if fmt == "json":
        import json

        payload = {
            "config": {k: str(v) for k, v in (config_echo or {}).items()},
            "rows": [
                {
                    # lowercase field names; "t" mirrors the CSV column "T"
                    "table": r.table, "estimator": r.estimator,
                    "param": r.param, "n": r.n,
                    "t": float(f"{r.T:.6g}"),
                    "truth": float(f"{r.truth:.6g}"),
                    "mean": float(f"{r.mean:.6g}") if r.mean == r.mean else None,
                    "rmse": float(f"{r.rmse:.6g}") if r.rmse == r.rmse else None,
                    "failures": r.failures,
                    "replications": r.replications,
                    "seed": r.seed,
                }
                for r in rows
            ],
        }
        with open(path, "w", encoding="utf8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        return
    raise DomainError("unknown emit format", fmt=fmt)
