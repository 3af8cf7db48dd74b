"""Weighted empirical distributions, two-sample tests and verification reports."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

__all__ = [
    "WeightedSampleSet",
    "Check",
    "VerificationReport",
    "weighted_mean",
    "weighted_ecdf",
    "ks_two_sample",
    "ks_pvalue",
    "bootstrap_pvalue",
    "mean_ci_compare",
]

DEFAULT_RESAMPLES = 999
ALPHA = 0.01
SIGMA_LEVEL = 3.0


@dataclass(frozen=True, eq=False)
class WeightedSampleSet:
    values: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).ravel()
        if self.weights is None:
            weights = np.ones_like(values)
        else:
            weights = np.asarray(self.weights, dtype=float).ravel()
        if values.size == 0:
            raise ValueError("empty sample set")
        if weights.shape != values.shape:
            raise ValueError("values and weights differ in length")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite and nonnegative")
        if not weights.sum() > 0:
            raise ValueError("total weight must be positive")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.values.size

    @property
    def effective_size(self) -> float:
        w = self.weights
        return float(w.sum() ** 2 / (w**2).sum())


def weighted_mean(s: WeightedSampleSet) -> tuple[float, float]:
    """Weighted mean and its (ratio-estimator) standard error."""
    p = s.weights / s.weights.sum()
    mean = float(p @ s.values)
    n = int(np.count_nonzero(s.weights))
    if n < 2:
        return mean, 0.0
    var = float((p**2) @ (s.values - mean) ** 2) * n / (n - 1)
    return mean, math.sqrt(var)


def weighted_ecdf(s: WeightedSampleSet, x):
    """Weighted fraction of values ``<= x``; right-continuous in ``x``."""
    order = np.argsort(s.values, kind="stable")
    sorted_values = s.values[order]
    cum = np.cumsum(s.weights[order])
    idx = np.searchsorted(sorted_values, x, side="right")
    out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)] / cum[-1], 0.0)
    return float(out) if np.ndim(out) == 0 else out


def _ecdf_on(grid: np.ndarray, positions: np.ndarray, weights: np.ndarray) -> np.ndarray:
    cum = np.cumsum(np.bincount(positions, weights=weights, minlength=grid.size))
    return cum / cum[-1]


def ks_two_sample(a: WeightedSampleSet, b: WeightedSampleSet) -> float:
    """Largest gap between the two weighted ECDFs over the pooled values."""
    grid = np.unique(np.concatenate([a.values, b.values]))
    fa = _ecdf_on(grid, np.searchsorted(grid, a.values), a.weights)
    fb = _ecdf_on(grid, np.searchsorted(grid, b.values), b.weights)
    return float(np.max(np.abs(fa - fb)))


def ks_pvalue(a: WeightedSampleSet, b: WeightedSampleSet) -> float:
    """Classical two-sample KS p-value; only valid for unit weights."""
    if np.any(a.weights != 1) or np.any(b.weights != 1):
        raise ValueError("ks_pvalue requires unweighted samples; use bootstrap_pvalue")
    return float(stats.ks_2samp(a.values, b.values).pvalue)


def bootstrap_pvalue(
    a: WeightedSampleSet,
    b: WeightedSampleSet,
    resamples: int = DEFAULT_RESAMPLES,
    rng: np.random.Generator | int | None = 0,
) -> float:
    """Bootstrap-calibrated p-value of the weighted KS statistic.

    Each resample draws (value, weight) pairs with replacement from both
    sets; its statistic is the sup-gap between the *centred* bootstrap
    processes ``(F*_a - F_a) - (F*_b - F_b)``, which reproduces the null
    fluctuation of ``F_a - F_b`` whatever the weight dispersion.  Returns
    ``(1 + #{null >= observed}) / (1 + resamples)``.
    """
    if resamples < 200:
        raise ValueError("at least 200 resamples are required")
    rng = np.random.default_rng(rng)
    grid = np.unique(np.concatenate([a.values, b.values]))
    pos_a = np.searchsorted(grid, a.values)
    pos_b = np.searchsorted(grid, b.values)
    fa = _ecdf_on(grid, pos_a, a.weights)
    fb = _ecdf_on(grid, pos_b, b.weights)
    observed = np.max(np.abs(fa - fb))
    na, nb = len(a), len(b)
    exceed = 0
    for _ in range(resamples):
        ca = np.bincount(rng.integers(0, na, na), minlength=na)
        cb = np.bincount(rng.integers(0, nb, nb), minlength=nb)
        wa, wb = ca * a.weights, cb * b.weights
        if not (wa.sum() > 0 and wb.sum() > 0):
            exceed += 1
            continue
        gap = (_ecdf_on(grid, pos_a, wa) - fa) - (_ecdf_on(grid, pos_b, wb) - fb)
        # small tolerance so exact ties with the observed value count as exceedances
        if np.max(np.abs(gap)) >= observed - 1e-12:
            exceed += 1
    return (1 + exceed) / (1 + resamples)


@dataclass
class Check:
    """One pass/fail comparison ``statistic <= threshold`` (or ``>=``)."""

    name: str
    statistic: float
    threshold: float
    rule: str = "le"
    group: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.rule == "le":
            return bool(self.statistic <= self.threshold)
        if self.rule == "ge":
            return bool(self.statistic >= self.threshold)
        raise ValueError(f"unknown rule {self.rule!r}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Check":
        d = {k: v for k, v in d.items() if k != "passed"}
        return cls(**d)


@dataclass
class VerificationReport:
    """Outcome of one identity check.

    The pass flag is derived from the recorded checks: every group may fail
    at most ``max_failures_per_group`` of its checks.  A report whose
    rejection fraction exceeds ``rejection_cap`` is inconclusive instead.
    ``diagnostics`` are recorded alongside but never affect the outcome.
    """

    identity: str
    checks: list[Check] = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    parameters: dict = field(default_factory=dict)
    max_failures_per_group: int = 0
    rejection_cap: float | None = None
    notes: list[str] = field(default_factory=list)
    diagnostics: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def group_failures(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.checks:
            out[c.group] = out.get(c.group, 0) + (not c.passed)
        return out

    @property
    def rejection_fraction(self) -> float:
        total = self.counts.get("samples", 0)
        return self.counts.get("rejected", 0) / total if total else 0.0

    @property
    def inconclusive(self) -> bool:
        return self.rejection_cap is not None and self.rejection_fraction > self.rejection_cap

    @property
    def passed(self) -> bool:
        return all(n <= self.max_failures_per_group for n in self.group_failures().values())

    @property
    def status(self) -> str:
        if self.inconclusive:
            return "inconclusive"
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "status": self.status,
            "passed": self.passed,
            "rejection_fraction": self.rejection_fraction,
            "rejection_cap": self.rejection_cap,
            "max_failures_per_group": self.max_failures_per_group,
            "checks": [c.to_dict() for c in self.checks],
            "counts": dict(self.counts),
            "seeds": dict(self.seeds),
            "parameters": dict(self.parameters),
            "notes": list(self.notes),
            "diagnostics": [c.to_dict() for c in self.diagnostics],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        return cls(
            identity=d["identity"],
            checks=[Check.from_dict(c) for c in d["checks"]],
            counts=d.get("counts", {}),
            seeds=d.get("seeds", {}),
            parameters=d.get("parameters", {}),
            max_failures_per_group=d.get("max_failures_per_group", 0),
            rejection_cap=d.get("rejection_cap"),
            notes=d.get("notes", []),
            diagnostics=[Check.from_dict(c) for c in d.get("diagnostics", [])],
        )

    def summary_lines(self) -> list[str]:
        lines = [f"{self.identity}: {self.status.upper()}"]
        lines += [_check_line(c, "ok  " if c.passed else "FAIL") for c in self.checks]
        lines += [_check_line(c, "diag") for c in self.diagnostics]
        if self.counts:
            lines.append("  counts: " + ", ".join(f"{k}={v}" for k, v in sorted(self.counts.items())))
        return lines


def _check_line(c: Check, mark: str) -> str:
    op = "<=" if c.rule == "le" else ">="
    group = f"{c.group}: " if c.group else ""
    return f"  [{mark}] {group}{c.name}: {c.statistic:.6g} {op} {c.threshold:.6g}"


def mean_ci_compare(
    a: WeightedSampleSet,
    b: WeightedSampleSet,
    sigma_level: float = SIGMA_LEVEL,
    name: str = "mean",
    allowance: float = 0.0,
) -> VerificationReport:
    """Pass iff ``|mean_a - mean_b| <= sigma_level * sqrt(se_a^2 + se_b^2) + allowance``."""
    ma, sa = weighted_mean(a)
    mb, sb = weighted_mean(b)
    se = math.hypot(sa, sb)
    report = VerificationReport("mean-comparison")
    report.add(Check(
        name, abs(ma - mb), sigma_level * se + allowance,
        details={"mean_a": ma, "mean_b": mb, "se_a": sa, "se_b": sb,
                 "sigma_level": sigma_level, "allowance": allowance},
    ))
    return report
