"""Serialization: increment CSV files, estimate reports, summary tables.

Increment files are one value per line, full repr precision, preceded by
'#'-prefixed key=value metadata lines that always include h and n.  Summary
tables are plain CSV with a '#'-prefixed config echo; floats are written
with 6 significant digits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .stable_core import IncrementSample

__all__ = [
    "EstimateReport",
    "SummaryRow",
    "write_increments",
    "read_increments",
    "write_summary",
    "read_summary",
    "SUMMARY_COLUMNS",
]


def _meta_value(raw: str):
    try:
        as_float = float(raw)
    except ValueError:
        return raw
    if as_float.is_integer() and "." not in raw and "e" not in raw.lower():
        return int(raw)
    return as_float


def write_increments(path, sample: IncrementSample) -> None:
    """Write an increment sample: '#' k=v metadata lines, then one value
    per line at full precision."""
    lines = [f"# h={sample.h!r}", f"# n={sample.n}"]
    for key, val in sorted(sample.meta.items()):
        if key in ("h", "n"):
            continue
        lines.append(f"# {key}={val!r}" if isinstance(val, str) else f"# {key}={val}")
    lines.extend(repr(float(v)) for v in sample.values)
    with open(path, "w", encoding="utf8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_increments(path) -> IncrementSample:
    meta: dict = {}
    values: list[float] = []
    with open(path, "r", encoding="utf8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise DataError("metadata line is not key=value",
                                    line=lineno, text=line)
                key, _, raw = body.partition("=")
                key = key.strip()
                raw = raw.strip()
                if raw.startswith("'") and raw.endswith("'") and len(raw) >= 2:
                    meta[key] = raw[1:-1]
                else:
                    meta[key] = _meta_value(raw)
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise DataError("unparseable increment value",
                                line=lineno, text=line) from exc
    if "h" not in meta:
        raise DataError("increment file lacks an h metadata line", path=str(path))
    h = float(meta.pop("h"))
    declared_n = meta.pop("n", None)
    if declared_n is not None and int(declared_n) != len(values):
        raise DataError("declared n disagrees with the number of values",
                        declared=int(declared_n), found=len(values))
    if not values:
        raise DataError("increment file holds no values", path=str(path))
    return IncrementSample(np.array(values), h, meta)


# ---------------------------------------------------------------------------
# estimate reports

@dataclass(frozen=True)
class EstimateReport:
    """One estimation outcome: point estimates, gamma confidence interval,
    plug-in asymptotic covariance, and method-specific extras."""

    method: str
    n: int
    h: float
    beta_hat: float | None = None
    sigma_hat: float | None = None
    gamma_hat: float | None = None
    ci_gamma: tuple[float, float] | None = None
    cov_matrix: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        cov = self.cov_matrix
        if cov is not None:
            cov = [float(v) for v in np.asarray(cov).ravel()]
        ci = self.ci_gamma
        if ci is not None:
            ci = [float(ci[0]), float(ci[1])]
        return {
            "method": self.method,
            "beta_hat": _opt_float(self.beta_hat),
            "sigma_hat": _opt_float(self.sigma_hat),
            "gamma_hat": _opt_float(self.gamma_hat),
            "ci_gamma": ci,
            "cov_matrix": cov,
            "n": int(self.n),
            "h": float(self.h),
            "extra": {k: _jsonable(v) for k, v in self.extra.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json_dict(cls, payload: dict) -> "EstimateReport":
        cov = payload.get("cov_matrix")
        if cov is not None:
            flat = np.asarray(cov, dtype=float)
            side = int(round(math.sqrt(flat.size)))
            if side * side != flat.size:
                raise DataError("cov_matrix payload is not square",
                                size=int(flat.size))
            cov = flat.reshape(side, side)
        ci = payload.get("ci_gamma")
        if ci is not None:
            ci = (float(ci[0]), float(ci[1]))
        return cls(
            method=payload["method"],
            n=int(payload["n"]),
            h=float(payload["h"]),
            beta_hat=_opt_float(payload.get("beta_hat")),
            sigma_hat=_opt_float(payload.get("sigma_hat")),
            gamma_hat=_opt_float(payload.get("gamma_hat")),
            ci_gamma=ci,
            cov_matrix=cov,
            extra=dict(payload.get("extra", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "EstimateReport":
        return cls.from_json_dict(json.loads(text))


def _opt_float(value):
    return None if value is None else float(value)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return [float(v) for v in value.ravel()]
    if hasattr(value, "item"):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


# ---------------------------------------------------------------------------
# Monte Carlo summary tables

SUMMARY_COLUMNS = ("table", "estimator", "param", "n", "T", "truth",
                   "mean", "rmse", "failures", "replications", "seed")


@dataclass(frozen=True)
class SummaryRow:
    """One aggregated Monte Carlo cell."""

    table: str
    estimator: str
    param: str
    n: int
    T: float
    truth: float
    mean: float
    rmse: float
    failures: int
    replications: int
    seed: int

    def as_record(self) -> tuple:
        return (self.table, self.estimator, self.param, self.n,
                _sig6(self.T), _sig6(self.truth), _sig6(self.mean),
                _sig6(self.rmse), self.failures, self.replications, self.seed)


def _sig6(x: float) -> str:
    if x != x:  # NaN: every replication failed
        return "nan"
    return f"{x:.6g}"


def write_summary(path, rows: Sequence[SummaryRow],
                  config_echo: dict | None = None) -> None:
    lines = []
    for key, val in sorted((config_echo or {}).items()):
        lines.append(f"# {key}={val}")
    lines.append(",".join(SUMMARY_COLUMNS))
    for row in rows:
        lines.append(",".join(str(v) for v in row.as_record()))
    with open(path, "w", encoding="utf8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_summary(path) -> tuple[list[SummaryRow], dict]:
    meta: dict = {}
    rows: list[SummaryRow] = []
    header_seen = False
    with open(path, "r", encoding="utf8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, raw = line[1:].strip().partition("=")
                meta[key.strip()] = raw.strip()
                continue
            parts = line.split(",")
            if not header_seen:
                if tuple(parts) != SUMMARY_COLUMNS:
                    raise DataError("unexpected summary header",
                                    header=line)
                header_seen = True
                continue
            if len(parts) != len(SUMMARY_COLUMNS):
                raise DataError("summary row has wrong arity", text=line)
            rows.append(SummaryRow(
                table=parts[0], estimator=parts[1], param=parts[2],
                n=int(parts[3]), T=float(parts[4]), truth=float(parts[5]),
                mean=float(parts[6]), rmse=float(parts[7]),
                failures=int(parts[8]), replications=int(parts[9]),
                seed=int(parts[10])))
    if not header_seen:
        raise DataError("summary file lacks a header", path=str(path))
    return rows, meta


def summary_records(rows: Iterable[SummaryRow]) -> list[tuple]:
    return [row.as_record() for row in rows]
