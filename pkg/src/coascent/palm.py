"""Rescaling-Palm calculus for the record measure.

The Palm measure of the record measure ``mu`` with respect to the rescaling
group is defined through the refined Campbell formula

    Ebar g = E[ int_A g(s_r X) mu(dr) ] / kappa(A),

with the hyperbolic reference measure ``kappa(ds) = H s^(H-1) ds``.  Because
``mu((0, t]) = M_t``, drawing ``r`` proportionally to ``mu`` restricted to
``A = (a, b]`` amounts to drawing a level ``V`` uniformly on ``(M_a, M_b]``
and taking ``r = T_V``.  :func:`palm_sample` does that and attaches the
importance weight ``mu(A) / kappa(A)``; normalising the weights of an
ensemble gives the Palm distribution.

Test functionals ``g`` act on the functional battery of the rescaled path
(see :mod:`coascent.transform`): ``g(battery) -> array`` for Campbell
estimates and ``g(battery, u) -> array`` for mass-stationarity.  ``None``
stands for ``g = 1``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .pathgen import GeneratorConfig, GridPath, HorizonError, reach, rescale
from .records import RecordProfile
from .stattest import (
    ALPHA,
    DEFAULT_RESAMPLES,
    SIGMA_LEVEL,
    Check,
    VerificationReport,
    WeightedSampleSet,
    bootstrap_pvalue,
    ks_two_sample,
)
from .transform import FUNCTIONALS, Battery, rescaled_battery

__all__ = [
    "HyperbolicMeasure",
    "WeightedPathSample",
    "Estimate",
    "kappa_mass",
    "campbell_term",
    "campbell_estimate",
    "palm_sample",
    "mass_stationarity_nodes",
    "mass_stationarity_terms",
    "mass_stationarity_check",
    "scaled_sample_battery",
    "scaling_invariance_check",
    "paired_difference_check",
    "weighted_ks_checks",
    "summarize",
]

QUADRATURE_NODES = 64


@dataclass(frozen=True)
class HyperbolicMeasure:
    """``kappa(ds) = H s^(H-1) ds`` on the positive half-line."""

    hurst: float

    def __post_init__(self) -> None:
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (0, 1), got {self.hurst!r}")

    def mass(self, a: float, b: float) -> float:
        if a < 0 or b < 0:
            raise ValueError("kappa is defined on the positive half-line")
        if b < a:
            raise ValueError(f"need a <= b, got ({a}, {b})")
        return b**self.hurst - a**self.hurst

    def quantile_nodes(self, a: float, b: float, count: int) -> np.ndarray:
        """Midpoints of ``count`` cells of equal kappa-mass partitioning (a, b]."""
        h = self.hurst
        cells = a**h + (np.arange(count) + 0.5) * (b**h - a**h) / count
        return cells ** (1.0 / h)


def kappa_mass(measure: HyperbolicMeasure, a: float, b: float) -> float:
    return measure.mass(a, b)


@dataclass(frozen=True, eq=False)
class WeightedPathSample:
    """A rescaled path ``s_r(X)`` carrying the importance weight of its draw.

    ``source`` and ``source_config`` are optional; when present, operations
    that need the sample beyond its horizon may extend the source.
    """

    path: GridPath | None
    weight: float
    r: float
    level: float
    source: GridPath | None = None
    source_config: GeneratorConfig | None = None


class Estimate(NamedTuple):
    mean: float
    stderr: float
    count: int
    rejected: int


def _check_window(window) -> tuple[float, float]:
    a, b = (float(w) for w in window)
    if not 0 <= a < b:
        raise ValueError(f"window must satisfy 0 <= a < b, got {window}")
    return a, b


def campbell_term(
    path: GridPath,
    window=(0.0, 1.0),
    g: Callable[[Battery], np.ndarray] | None = None,
    u: float = 0.5,
    profile: RecordProfile | None = None,
) -> float:
    """One path's contribution ``int_A g(s_r X) mu(dr) / kappa(A)``.

    The record mass of ``A`` is split along the grid's record values; each
    piece contributes ``g`` at the record time of its midpoint level.
    """
    a, b = _check_window(window)
    if not path.covers(b):
        raise HorizonError(f"window end {b} beyond horizon {path.horizon:.6g}")
    profile = profile or RecordProfile(path)
    kappa = HyperbolicMeasure(path.hurst).mass(a, b)
    mass = profile.record_mass(a, b)
    if mass <= 0:
        return 0.0
    if g is None:
        return mass / kappa
    levels, pieces = profile.record_increments(a, b)
    r = profile.first_passages(levels)
    values = np.asarray(g(rescaled_battery(path, r, u, profile)), dtype=float)
    return mass * (np.sum(values * pieces) / np.sum(pieces)) / kappa


def campbell_estimate(
    ensemble: Sequence[GridPath],
    window=(0.0, 1.0),
    g: Callable[[Battery], np.ndarray] | None = None,
    rng: np.random.Generator | int | None = 0,
) -> Estimate:
    """Monte Carlo estimate of the Palm-measure integral of ``g``.

    Paths too short for the window are rejected and counted.  With
    ``g=None`` and ``window=(0, 1]`` each term is exactly ``M_1``.
    """
    rng = np.random.default_rng(rng)
    terms, rejected = [], 0
    for path in ensemble:
        u = rng.random()
        try:
            terms.append(campbell_term(path, window, g, u))
        except HorizonError:
            rejected += 1
    return summarize(np.array(terms), rejected)


def summarize(terms: np.ndarray, rejected: int = 0) -> Estimate:
    n = terms.size
    if n == 0:
        return Estimate(math.nan, math.nan, 0, rejected)
    se = float(np.std(terms, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(float(np.mean(terms)), se, n, rejected)


def palm_sample(
    path: GridPath,
    window=(0.0, 1.0),
    rng: np.random.Generator | int | None = None,
    out_horizon: float | None = None,
    out_steps: int | None = None,
    source_config: GeneratorConfig | None = None,
) -> WeightedPathSample:
    """Draw a record time ``r`` from ``mu`` on the window and return ``s_r(X)``.

    A window without record mass yields weight 0 and no path.  Raises
    :class:`HorizonError` if ``s_r(X)`` cannot be formed on ``out_horizon``.
    """
    a, b = _check_window(window)
    rng = np.random.default_rng(rng)
    profile = RecordProfile(path)
    lo, hi = (float(m) for m in profile.max_at([a, b]))
    kappa = HyperbolicMeasure(path.hurst).mass(a, b)
    if hi <= lo:
        return WeightedPathSample(None, 0.0, math.nan, math.nan, path, source_config)
    level = hi - (hi - lo) * rng.random()
    r = profile.first_passage(level)
    rescaled = rescale(path, r, out_horizon, out_steps)
    return WeightedPathSample(rescaled, (hi - lo) / kappa, r, level, path, source_config)


# ---------------------------------------------------------------------------
# Mass-stationarity
# ---------------------------------------------------------------------------

def mass_stationarity_nodes(hurst: float, window, nodes: int = QUADRATURE_NODES):
    """kappa-uniform midpoint nodes over ``C`` and their common kappa-mass."""
    c1, c2 = _check_window(window)
    if c1 <= 0:
        raise ValueError("mass-stationarity window must stay away from 0")
    kappa = HyperbolicMeasure(hurst)
    return kappa.quantile_nodes(c1, c2, nodes), kappa.mass(c1, c2) / nodes


def mass_stationarity_terms(
    path: GridPath,
    window,
    g: Callable[[Battery, np.ndarray], np.ndarray] | None,
    u_alpha: float = 0.5,
    nodes: int = QUADRATURE_NODES,
) -> tuple[float, float, int]:
    """Per-sample left and right sides of the mass-stationarity identity.

    Returns ``(lhs, rhs, degenerate)`` where ``degenerate`` counts quadrature
    nodes whose window ``C/u`` carries no record mass (they contribute 0).
    """
    c1, c2 = _check_window(window)
    u, node_mass = mass_stationarity_nodes(path.hurst, window, nodes)
    if not path.covers(c2 / c1):
        raise HorizonError(f"sample horizon {path.horizon:.6g} < {c2 / c1:.6g}")
    profile = RecordProfile(path)
    if g is None:
        g = _one

    own = rescaled_battery(path, np.ones(nodes), u_alpha, profile)
    rhs = float(np.sum(np.asarray(g(own, u), dtype=float) * node_mass))

    lo = profile.max_at(c1 / u)
    hi = profile.max_at(c2 / u)
    edges = profile.breakpoints(float(lo.min()), float(hi.max()))
    clo = np.maximum(edges[None, :-1], lo[:, None])
    chi = np.minimum(edges[None, 1:], hi[:, None])
    length = chi - clo
    rows, cols = np.nonzero(length > 0)
    if rows.size == 0:
        return 0.0, rhs, nodes
    pieces = length[rows, cols]
    r = profile.first_passages(0.5 * (clo[rows, cols] + chi[rows, cols]))
    values = np.asarray(g(rescaled_battery(path, r, u_alpha, profile), u[rows] * r), dtype=float)
    num = np.bincount(rows, weights=values * pieces, minlength=nodes)
    den = np.bincount(rows, weights=pieces, minlength=nodes)
    inner = np.divide(num, den, out=np.zeros(nodes), where=den > 0)
    lhs = float(np.sum(inner * node_mass))
    return lhs, rhs, int(np.count_nonzero(den == 0))


def _one(b, u=None):
    return np.ones_like(b.endpoint if u is None else u)


def _as_named(g) -> dict:
    if g is None:
        return {"one": None}
    if isinstance(g, Mapping):
        return dict(g)
    return {getattr(g, "__name__", "g"): g}


def paired_difference_check(name, lhs, rhs, weights, sigma_level=SIGMA_LEVEL, group=""):
    """Weighted paired comparison of per-sample left/right sides."""
    p = weights / weights.sum()
    left, right = float(p @ lhs), float(p @ rhs)
    diff = lhs - rhs
    mean = float(p @ diff)
    n = int(np.count_nonzero(weights))
    var = float((p**2) @ (diff - mean) ** 2) * n / (n - 1) if n > 1 else 0.0
    se = math.sqrt(var)
    return Check(
        name, abs(mean), sigma_level * se, group=group,
        details={"lhs": left, "rhs": right, "difference": mean, "stderr": se,
                 "sigma_level": sigma_level},
    )


def mass_stationarity_check(
    samples: Sequence[WeightedPathSample],
    window=(1.0, 2.0),
    g=None,
    rng: np.random.Generator | int | None = 0,
    nodes: int = QUADRATURE_NODES,
    sigma_level: float = SIGMA_LEVEL,
) -> VerificationReport:
    """Compare both sides of the mass-stationarity identity under the weighted ensemble.

    ``g`` may be a single callable, a mapping of names to callables, or
    ``None`` (``g = 1``).  Each functional yields one check at
    ``sigma_level`` standard errors of the paired difference.
    """
    rng = np.random.default_rng(rng)
    named = _as_named(g)
    report = VerificationReport(
        "mass-stationarity",
        parameters={"window": list(_check_window(window)), "nodes": nodes,
                    "functionals": list(named)},
    )
    rows = {name: [] for name in named}
    weights, rejected, degenerate = [], 0, 0
    for sample in samples:
        u_alpha = rng.random()
        if sample.path is None or sample.weight == 0:
            continue
        try:
            terms = {name: mass_stationarity_terms(sample.path, window, fn, u_alpha, nodes)
                     for name, fn in named.items()}
        except HorizonError:
            rejected += 1
            continue
        weights.append(sample.weight)
        for name, (lhs, rhs, deg) in terms.items():
            rows[name].append((lhs, rhs))
        degenerate += next(iter(terms.values()))[2]
    w = np.array(weights)
    for name, pairs in rows.items() if weights else ():
        pairs = np.array(pairs)
        report.add(paired_difference_check(name, pairs[:, 0], pairs[:, 1], w, sigma_level))
    report.counts.update(samples=len(samples), rejected=rejected, degenerate_nodes=degenerate)
    return report


# ---------------------------------------------------------------------------
# Invariance under rescaling by record-level passage times
# ---------------------------------------------------------------------------

def scaled_sample_battery(
    sample: WeightedPathSample,
    x: float,
    u_alpha: float,
    max_stages: int = 64,
) -> np.ndarray:
    """Battery of ``s_{I_x}(Y)`` for a sample ``Y`` with record inverse ``I``.

    Uses the sample path when it reaches level ``x`` in time; otherwise the
    source path is ladder-extended (``s_{I_x} s_r = s_{T_y}`` with
    ``y = x r^H``).  Raises :class:`HorizonError` when neither works.
    """
    path = sample.path
    profile = RecordProfile(path)
    if profile.reached(x):
        t = profile.first_passage(x)
        return rescaled_battery(path, t, u_alpha, profile).as_array()[0]
    if sample.source is None or sample.source_config is None:
        raise HorizonError(f"sample never reaches level {x} and has no source to extend")
    level = x * sample.r ** path.hurst
    source = reach(sample.source, sample.source_config, level, max_stages=max_stages)
    src_profile = RecordProfile(source)
    t = src_profile.first_passage(level)
    return rescaled_battery(source, t, u_alpha, src_profile).as_array()[0]


def weighted_ks_checks(
    reference: np.ndarray,
    ref_weights: np.ndarray,
    other: np.ndarray,
    other_weights: np.ndarray,
    seed: int,
    resamples: int = DEFAULT_RESAMPLES,
    alpha: float = ALPHA,
    group: str = "",
    names: Sequence[str] = FUNCTIONALS,
) -> list[Check]:
    """One bootstrap weighted-KS check per column; ``names`` labels the columns.

    Returns no checks when either side is empty.
    """
    checks = []
    if not (len(reference) and len(other)):
        return checks
    for j, name in enumerate(names):
        a = WeightedSampleSet(reference[:, j], ref_weights)
        b = WeightedSampleSet(other[:, j], other_weights)
        stream = np.random.SeedSequence(seed, spawn_key=(j,))
        p = bootstrap_pvalue(a, b, resamples, np.random.default_rng(stream))
        checks.append(Check(
            name, p, alpha, rule="ge", group=group,
            details={"ks": ks_two_sample(a, b), "ess_a": a.effective_size,
                     "ess_b": b.effective_size},
        ))
    return checks


def scaling_invariance_check(
    samples: Sequence[WeightedPathSample],
    x: float,
    reference: Sequence[WeightedPathSample] | None = None,
    rng: np.random.Generator | int | None = 0,
    resamples: int = DEFAULT_RESAMPLES,
    alpha: float = ALPHA,
    seed: int = 0,
) -> VerificationReport:
    """Test that rescaling by ``I_x`` leaves the weighted ensemble's law unchanged.

    Without ``reference`` the ensemble is split by index parity: even
    samples form the untouched reference, odd samples are transformed, so
    the two compared sets are independent.
    """
    rng = np.random.default_rng(rng)
    if reference is None:
        reference, samples = list(samples)[0::2], list(samples)[1::2]
    ref_rows, ref_w = [], []
    for s in reference:
        u = rng.random()
        if s.path is None or s.weight == 0:
            continue
        ref_rows.append(rescaled_battery(s.path, 1.0, u).as_array()[0])
        ref_w.append(s.weight)
    rows, w, rejected = [], [], 0
    for s in samples:
        u = rng.random()
        if s.path is None or s.weight == 0:
            continue
        try:
            rows.append(scaled_sample_battery(s, x, u))
        except HorizonError:
            rejected += 1
            continue
        w.append(s.weight)
    report = VerificationReport(
        "scaling-invariance",
        parameters={"level": x, "resamples": resamples, "alpha": alpha},
    )
    report.counts.update(samples=len(samples), rejected=rejected)
    if not rows or not ref_rows:
        report.rejection_cap = 0.0
        report.notes.append("no usable samples on one side; nothing was compared")
        return report
    for c in weighted_ks_checks(np.array(ref_rows), np.array(ref_w), np.array(rows),
                                np.array(w), seed, resamples, alpha, group=f"x={x}"):
        report.add(c)
    return report
