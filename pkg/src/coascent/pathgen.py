"""Sample paths of H-self-similar processes on uniform time grids.

Three generators are provided: Brownian motion, fractional Brownian motion
(circulant embedding with a dense Cholesky fallback) and the deterministic
power path ``t -> t**H``, which is a fixed point of the rescaling group.

Paths are immutable :class:`GridPath` objects.  Every generator is a pure
function of its :class:`GeneratorConfig`, so equal configs give bit-identical
paths.

Two ways of lengthening a path exist.  :func:`extend` keeps the time step and
appends fresh increments (Brownian and deterministic paths only).
:func:`ladder_extend` doubles the horizon while keeping the number of steps,
by subsampling every other grid point and continuing the coarse grid with the
exact conditional Gaussian law given the retained past.  The ladder keeps the
grid resolution proportional to the horizon, which is what first-passage
experiments with heavy-tailed passage times need.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import linalg

log = logging.getLogger(__name__)

__all__ = [
    "KINDS",
    "GenerationError",
    "HorizonError",
    "UnsupportedExtension",
    "GridPath",
    "GeneratorConfig",
    "fbm_covariance",
    "fgn_autocovariance",
    "dense_factor",
    "implied_covariance",
    "generate",
    "generate_batch",
    "rescale",
    "extend",
    "ladder_extend",
    "ladder_extend_batch",
    "ladder_stage",
    "reach",
]

KINDS = ("brownian", "fbm", "deterministic-power")
METHODS = ("auto", "circulant", "dense")

DENSE_MAX_STEPS = 2**12
NEGATIVE_EIGENVALUE_TOL = 1e-8

# spawn keys of the auxiliary random streams attached to a path seed
LADDER_STREAM = 1

_TIME_RTOL = 1e-9


class GenerationError(RuntimeError):
    """A path could not be generated with the requested method."""


class HorizonError(ValueError):
    """A requested time range is not covered by the path."""


class UnsupportedExtension(ValueError):
    """The path kind cannot be extended in the requested way."""


@dataclass(frozen=True, eq=False)
class GridPath:
    """A path sampled at times ``i * delta``, ``i = 0..steps``.

    Values are linearly interpolated between grid points wherever a path is
    evaluated off-grid.
    """

    delta: float
    values: np.ndarray
    hurst: float

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("a path needs at least two grid values")
        if values[0] != 0.0:
            raise ValueError(f"paths start at 0, got values[0]={values[0]!r}")
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (0, 1), got {self.hurst!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "hurst", float(self.hurst))

    @property
    def steps(self) -> int:
        return self.values.size - 1

    @property
    def horizon(self) -> float:
        return self.steps * self.delta

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.delta

    def covers(self, t: float) -> bool:
        return t <= self.horizon * (1.0 + _TIME_RTOL)

    def at(self, t):
        """Linearly interpolated value(s) at time(s) ``t`` within the horizon."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or not self.covers(float(np.max(t, initial=0.0))):
            raise HorizonError(
                f"time {float(np.max(t)):.6g} outside [0, {self.horizon:.6g}]"
            )
        return np.interp(t, self.times, self.values)


@dataclass(frozen=True)
class GeneratorConfig:
    """Reproducible description of one sample path.

    ``kind="brownian"`` always has Hurst index 1/2, whatever is passed.
    ``method`` only matters for fBm: ``"circulant"`` embedding, ``"dense"``
    Cholesky factorization, or ``"auto"`` (circulant, dense fallback).
    """

    kind: str = "brownian"
    hurst: float = 0.5
    horizon: float = 1.0
    steps: int = 4096
    seed: int = 0
    method: str = "auto"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "brownian":
            object.__setattr__(self, "hurst", 0.5)
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (0, 1), got {self.hurst!r}")
        if not self.horizon > 0:
            raise ValueError(f"horizon must be positive, got {self.horizon!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "hurst", float(self.hurst))

    @property
    def delta(self) -> float:
        return self.horizon / self.steps


# ---------------------------------------------------------------------------
# Gaussian covariance structure
# ---------------------------------------------------------------------------

def fbm_covariance(hurst: float, s, t) -> np.ndarray:
    """Cov(X_s, X_t) = (s^2H + t^2H - |t - s|^2H) / 2 for standard fBm."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    two_h = 2.0 * hurst
    return 0.5 * (np.abs(s) ** two_h + np.abs(t) ** two_h - np.abs(t - s) ** two_h)


def fgn_autocovariance(hurst: float, lags) -> np.ndarray:
    """Autocovariance of unit-spaced fractional Gaussian noise at integer lags."""
    k = np.abs(np.asarray(lags, dtype=float))
    two_h = 2.0 * hurst
    return 0.5 * ((k + 1.0) ** two_h - 2.0 * k**two_h + np.abs(k - 1.0) ** two_h)


@lru_cache(maxsize=16)
def _circulant_scale(hurst: float, steps: int) -> np.ndarray:
    gamma = fgn_autocovariance(hurst, np.arange(steps + 1))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    low = eig.min()
    if low < -NEGATIVE_EIGENVALUE_TOL:
        raise GenerationError(
            f"circulant embedding has eigenvalue {low:.3g} < -{NEGATIVE_EIGENVALUE_TOL}"
        )
    if low < 0:
        log.warning("truncating circulant eigenvalue %.3g to zero", low)
        eig = np.clip(eig, 0.0, None)
    scale = np.sqrt(eig / row.size)
    scale.setflags(write=False)
    return scale


@lru_cache(maxsize=8)
def _unit_dense_factor(hurst: float, steps: int) -> np.ndarray:
    grid = np.arange(1, steps + 1, dtype=float)
    cov = fbm_covariance(hurst, grid[:, None], grid[None, :])
    factor = linalg.cholesky(cov, lower=True)
    factor.setflags(write=False)
    return factor


def dense_factor(hurst: float, steps: int, horizon: float = 1.0) -> np.ndarray:
    """Lower Cholesky factor of the fBm covariance at ``horizon * i / steps``."""
    if steps > DENSE_MAX_STEPS:
        raise GenerationError(f"dense factorization limited to {DENSE_MAX_STEPS} steps")
    delta = horizon / steps
    return _unit_dense_factor(float(hurst), int(steps)) * delta**hurst


def _fbm_route(config: GeneratorConfig) -> str:
    if config.method != "auto":
        return config.method
    try:
        _circulant_scale(config.hurst, config.steps)
    except GenerationError:
        if config.steps > DENSE_MAX_STEPS:
            raise
        log.warning("circulant embedding failed; using dense factorization")
        return "dense"
    return "circulant"


def implied_covariance(config: GeneratorConfig) -> np.ndarray:
    """Covariance matrix of ``values[1:]`` implied by the generator itself.

    This is reconstructed from the factor or the embedded increment
    covariance actually used for sampling, not from the target formula.
    """
    times = np.arange(1, config.steps + 1) * config.delta
    if config.kind == "deterministic-power":
        return np.zeros((config.steps, config.steps))
    if config.kind == "brownian":
        return np.minimum(times[:, None], times[None, :])
    if _fbm_route(config) == "dense":
        factor = dense_factor(config.hurst, config.steps, config.horizon)
        return factor @ factor.T
    scale = _circulant_scale(config.hurst, config.steps)
    m = scale.size
    # first row of the circulant actually sampled (after any eigenvalue clipping)
    row = np.fft.ifft(scale**2 * m).real
    toeplitz = linalg.toeplitz(row[: config.steps])
    cumulative = np.tril(np.ones((config.steps, config.steps)))
    return cumulative @ toeplitz @ cumulative.T * config.delta ** (2 * config.hurst)


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def _brownian_values(seed: int, steps: int, delta: float) -> np.ndarray:
    increments = np.random.default_rng(seed).standard_normal(steps) * math.sqrt(delta)
    return np.concatenate(([0.0], np.cumsum(increments)))


def _power_values(hurst: float, steps: int, delta: float) -> np.ndarray:
    return (np.arange(steps + 1) * delta) ** hurst


def _fbm_values_batch(seeds, hurst: float, steps: int, delta: float, route: str):
    if route == "dense":
        factor = _unit_dense_factor(hurst, steps)
        z = np.stack([np.random.default_rng(s).standard_normal(steps) for s in seeds])
        body = z @ factor.T
    else:
        scale = _circulant_scale(hurst, steps)
        m = scale.size
        draws = np.stack(
            [np.random.default_rng(s).standard_normal((2, m)) for s in seeds]
        )
        noise = np.fft.fft(scale * (draws[:, 0] + 1j * draws[:, 1]), axis=1)
        body = np.cumsum(noise[:, :steps].real, axis=1)
    values = np.zeros((len(seeds), steps + 1))
    values[:, 1:] = body * delta**hurst
    return values


def generate_batch(config: GeneratorConfig, seeds) -> np.ndarray:
    """Values of one path per seed, shape ``(len(seeds), steps + 1)``.

    Row ``i`` matches ``generate(replace(config, seed=seeds[i])).values``:
    bit for bit on the Brownian and circulant routes, to rounding (about
    1e-15) on the dense route where the batched matrix product reorders sums.
    """
    seeds = [int(s) for s in seeds]
    n, delta = config.steps, config.delta
    if config.kind == "brownian":
        return np.stack([_brownian_values(s, n, delta) for s in seeds])
    if config.kind == "deterministic-power":
        return np.tile(_power_values(config.hurst, n, delta), (len(seeds), 1))
    return _fbm_values_batch(seeds, config.hurst, n, delta, _fbm_route(config))


def generate(config: GeneratorConfig) -> GridPath:
    """Sample one path according to ``config``."""
    values = generate_batch(config, [config.seed])[0]
    return GridPath(config.delta, values, config.hurst)


# ---------------------------------------------------------------------------
# Rescaling group
# ---------------------------------------------------------------------------

def rescale(
    path: GridPath,
    r: float,
    out_horizon: float | None = None,
    out_steps: int | None = None,
) -> GridPath:
    """Apply ``s_r``: the path ``t -> r**-H * f(r t)``.

    With ``out_steps`` the result is resampled by linear interpolation on a
    uniform grid over ``[0, out_horizon]``.  Without it the source grid is
    carried over exactly (time step ``delta / r``), truncated to the first
    grid point at or beyond ``out_horizon`` when that is given.
    """
    if not r > 0:
        raise ValueError(f"rescaling factor must be positive, got {r!r}")
    limit = path.horizon / r
    if out_horizon is None:
        out_horizon = limit
    if out_horizon <= 0:
        raise ValueError("out_horizon must be positive")
    if not path.covers(r * out_horizon):
        raise HorizonError(
            f"rescaling by {r:.6g} to horizon {out_horizon:.6g} needs source time "
            f"{r * out_horizon:.6g} > {path.horizon:.6g}"
        )
    factor = r ** (-path.hurst)
    if out_steps is None:
        delta = path.delta / r
        last = min(path.steps, math.ceil(out_horizon / delta * (1 - _TIME_RTOL)))
        return GridPath(delta, path.values[: last + 1] * factor, path.hurst)
    grid = np.arange(out_steps + 1) * (out_horizon / out_steps)
    src = np.minimum(grid * r, path.horizon)
    return GridPath(out_horizon / out_steps, factor * path.at(src), path.hurst)


# ---------------------------------------------------------------------------
# Extension
# ---------------------------------------------------------------------------

def extend(path: GridPath, config: GeneratorConfig, new_horizon: float) -> GridPath:
    """Continue ``path`` (generated from ``config``) to ``new_horizon``.

    The time step is kept; the original grid values are reproduced exactly.
    Brownian paths continue with the increments of their own seed stream,
    deterministic paths with the closed form.  fBm is not supported.
    """
    if config.kind == "fbm":
        raise UnsupportedExtension(
            "fBm cannot be extended at fixed resolution; use ladder_extend"
        )
    if not new_horizon > path.horizon:
        raise ValueError("new_horizon must exceed the current horizon")
    steps = math.ceil(new_horizon / path.delta * (1 - _TIME_RTOL))
    if config.kind == "brownian":
        values = _brownian_values(config.seed, steps, path.delta)
    else:
        values = _power_values(config.hurst, steps, path.delta)
    if not np.array_equal(values[: path.values.size], path.values):
        raise ValueError("path was not generated from this config")
    return GridPath(path.delta, values, path.hurst)


@lru_cache(maxsize=8)
def _continuation(hurst: float, m: int):
    """Regression and noise factor of the next ``m`` unit fGn steps given ``m`` past ones."""
    cov = linalg.toeplitz(fgn_autocovariance(hurst, np.arange(2 * m)))
    past = linalg.cho_factor(cov[:m, :m], lower=True)
    regression = linalg.cho_solve(past, cov[:m, m:]).T
    residual = cov[m:, m:] - regression @ cov[:m, m:]
    residual = 0.5 * (residual + residual.T)
    noise = linalg.cholesky(residual, lower=True)
    regression.setflags(write=False)
    noise.setflags(write=False)
    return regression, noise


def ladder_stage(path: GridPath, config: GeneratorConfig) -> int:
    """Number of horizon doublings separating ``path`` from its stage-0 grid."""
    ratio = path.delta / config.delta
    stage = round(math.log2(ratio))
    if not math.isclose(ratio, 2.0**stage, rel_tol=1e-9):
        raise ValueError("path time step is not a power-of-two multiple of the config's")
    return stage


def _ladder_noise(seed: int, stage: int, m: int) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=(LADDER_STREAM, stage))
    return np.random.default_rng(ss).standard_normal(m)


def ladder_extend_batch(
    values: np.ndarray,
    deltas: np.ndarray,
    seeds,
    stages,
    kind: str,
    hurst: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Double the horizon of a stack of equal-length paths.

    Each row keeps its even-indexed grid points and receives ``steps / 2``
    new increments at twice the time step, drawn from the Gaussian law of the
    continuation given all retained increments.  Row ``i`` uses the random
    stream ``(seeds[i], stages[i])``.
    """
    values = np.asarray(values, dtype=float)
    deltas = np.asarray(deltas, dtype=float)
    steps = values.shape[1] - 1
    if steps % 2:
        raise ValueError("ladder extension needs an even number of steps")
    m = steps // 2
    coarse = values[:, ::2]
    new_deltas = 2.0 * deltas
    if kind == "deterministic-power":
        tail = (np.arange(m + 1, steps + 1)[None, :] * new_deltas[:, None]) ** hurst
        return np.concatenate([coarse, tail], axis=1), new_deltas
    z = np.stack([_ladder_noise(int(s), int(k), m) for s, k in zip(seeds, stages)])
    scale = new_deltas**hurst
    if kind == "brownian":
        increments = z * scale[:, None]
    else:
        regression, noise = _continuation(float(hurst), m)
        increments = np.diff(coarse, axis=1) @ regression.T + (z @ noise.T) * scale[:, None]
    tail = coarse[:, -1:] + np.cumsum(increments, axis=1)
    return np.concatenate([coarse, tail], axis=1), new_deltas


def ladder_extend(path: GridPath, config: GeneratorConfig) -> GridPath:
    """Double the horizon of ``path`` at constant step count (see module notes)."""
    stage = ladder_stage(path, config)
    values, deltas = ladder_extend_batch(
        path.values[None, :], np.array([path.delta]), [config.seed], [stage],
        config.kind, config.hurst,
    )
    return GridPath(float(deltas[0]), values[0], path.hurst)


def reach(
    path: GridPath,
    config: GeneratorConfig,
    level: float,
    factor: float = 1.0,
    max_stages: int = 64,
) -> GridPath:
    """Ladder-extend until ``level`` is hit at some T with ``factor * T`` covered.

    Raises :class:`HorizonError` when ``max_stages`` doublings do not suffice.
    """
    from .records import RecordProfile

    current = path
    while True:
        profile = RecordProfile(current)
        if profile.reached(level):
            t = profile.first_passage(level)
            if current.covers(factor * t):
                return current
        if ladder_stage(current, config) >= max_stages:
            raise HorizonError(f"level {level} not reached within {max_stages} doublings")
        current = ladder_extend(current, config)


def with_seed(config: GeneratorConfig, seed: int) -> GeneratorConfig:
    return replace(config, seed=int(seed))
