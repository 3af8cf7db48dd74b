"""Path transformations: co-ascent, its iterate, Lamperti rescaling.

Also home of the functional battery, the four scalar path functionals used by
every distributional comparison in the package:

``endpoint``  value at t = 1
``sup``       supremum over [0, 1]
``avg``       time average over [0, 1]
``alpha``     value at an independent uniform time U in [0, 1]

All functionals are exact for the piecewise-linear interpolant of a grid
path, and :func:`rescaled_battery` evaluates them on ``s_r(path)`` for many
``r`` at once without resampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .pathgen import GridPath, HorizonError, rescale
from .records import RecordProfile

__all__ = [
    "FUNCTIONALS",
    "Battery",
    "CoAscentResult",
    "LogTimePath",
    "battery",
    "rescaled_battery",
    "coascent",
    "iterated_coascent",
    "lamperti",
    "excursion_from_max",
]

FUNCTIONALS = ("endpoint", "sup", "avg", "alpha")


class Battery(NamedTuple):
    endpoint: np.ndarray
    sup: np.ndarray
    avg: np.ndarray
    alpha: np.ndarray

    def as_array(self) -> np.ndarray:
        """Shape ``(k, 4)`` with columns in :data:`FUNCTIONALS` order."""
        return np.column_stack([np.atleast_1d(c) for c in self])


def rescaled_battery(path: GridPath, r, u, profile: RecordProfile | None = None) -> Battery:
    """Battery of ``s_r(path)`` on [0, 1] for each entry of ``r``.

    ``u`` holds the uniform time(s) of the ``alpha`` functional and is
    broadcast against ``r``.  Only path values on ``[0, max(r)]`` are used.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    u = np.broadcast_to(np.asarray(u, dtype=float), r.shape)
    if np.any(r <= 0):
        raise ValueError("rescaling factors must be positive")
    if not path.covers(float(r.max())):
        raise HorizonError(f"s_r needs time {r.max():.6g} > horizon {path.horizon:.6g}")
    if profile is None:
        profile = RecordProfile(path)
    v, delta, n = path.values, path.delta, path.steps
    times = path.times
    k = np.clip(np.searchsorted(times, r, side="left"), 1, n)
    t0 = times[k - 1]
    y0 = v[k - 1]
    yr = y0 + (np.minimum(r, path.horizon) - t0) / delta * (v[k] - y0)
    cumulative = np.concatenate(([0.0], np.cumsum(0.5 * (v[:-1] + v[1:]) * delta)))
    integral = cumulative[k - 1] + 0.5 * (y0 + yr) * (r - t0)
    scale = r ** (-path.hurst)
    return Battery(
        endpoint=scale * yr,
        sup=scale * np.maximum(profile.running_max[k - 1], yr),
        avg=scale * integral / r,
        alpha=scale * np.interp(u * r, times, v),
    )


def battery(path: GridPath, u: float) -> np.ndarray:
    """The four functionals of ``path`` itself, in :data:`FUNCTIONALS` order."""
    return rescaled_battery(path, 1.0, u).as_array()[0]


@dataclass(frozen=True, eq=False)
class CoAscentResult:
    """A co-ascent path with the passage time that produced it.

    ``path.at(1) == level * passage_time_used ** -H`` up to rounding, and the
    supremum of the path over [0, 1] is attained at t = 1.
    """

    path: GridPath
    passage_time_used: float
    level: float
    source: GridPath | None = None


def coascent(
    path: GridPath,
    level: float = 1.0,
    out_horizon: float = 2.0,
    out_steps: int | None = None,
) -> CoAscentResult:
    """Extended co-ascent ``t -> T_x**-H * X(T_x t)`` at hitting level ``x``.

    ``out_steps=None`` keeps the source grid (exact, time step ``delta/T_x``);
    otherwise the path is resampled on ``out_steps`` uniform cells over
    ``[0, out_horizon]``.  Raises :class:`~coascent.records.PassageNotReached`
    if the level is never hit and :class:`HorizonError` if the path ends
    before ``T_x * out_horizon``.
    """
    if not level > 0:
        raise ValueError("co-ascent level must be positive")
    if out_horizon < 1:
        raise ValueError("out_horizon must be at least 1")
    passage = RecordProfile(path).first_passage(level)
    out = rescale(path, passage, out_horizon, out_steps)
    return CoAscentResult(out, passage, float(level), source=path)


def iterated_coascent(
    result: CoAscentResult,
    level: float = 1.0,
    out_horizon: float = 2.0,
    out_steps: int | None = None,
) -> CoAscentResult:
    """Co-ascent of a co-ascent path.

    The record times of ``result.path`` are those of its source divided by
    the first passage used, so this equals the co-ascent of the source at
    level ``level * T**H`` (up to interpolation).
    """
    inner = coascent(result.path, level, out_horizon, out_steps)
    return CoAscentResult(inner.path, inner.passage_time_used, inner.level, source=result.path)


@dataclass(frozen=True, eq=False)
class LogTimePath:
    """A path indexed by log-time ``z`` on a uniform grid."""

    z: np.ndarray
    values: np.ndarray


def _log_grid(path: GridPath, z_min: float, z_max: float, z_steps: int) -> np.ndarray:
    if not z_max > z_min or z_steps < 1:
        raise ValueError("need z_min < z_max and z_steps >= 1")
    if not path.covers(np.exp(z_max)):
        raise HorizonError(f"exp({z_max}) exceeds horizon {path.horizon:.6g}")
    if np.exp(z_min) < path.delta:
        raise HorizonError(f"exp({z_min}) falls inside the first grid cell")
    return np.linspace(z_min, z_max, z_steps + 1)


def lamperti(path: GridPath, z_min: float, z_max: float, z_steps: int) -> LogTimePath:
    """Exponential rescaling ``z -> exp(-H z) * f(exp(z))`` on a uniform z grid."""
    z = _log_grid(path, z_min, z_max, z_steps)
    times = np.minimum(np.exp(z), path.horizon)
    return LogTimePath(z, np.exp(-path.hurst * z) * path.at(times))


def excursion_from_max(path: GridPath, z_min: float, z_max: float, z_steps: int) -> LogTimePath:
    """Lamperti image of ``X - M``; nonpositive everywhere."""
    gap = path.values - RecordProfile(path).running_max
    return lamperti(GridPath(path.delta, gap, path.hurst), z_min, z_max, z_steps)
