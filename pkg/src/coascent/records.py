"""Running maximum, record measure and first-passage times of a grid path.

The record measure of a path puts mass ``M_b - M_a`` on ``(a, b]`` where
``M`` is the running maximum.  First-passage times are its generalised
inverse: the first grid index with ``values[i] >= x`` is located and the
crossing time is interpolated linearly inside the preceding cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pathgen import GridPath, HorizonError

__all__ = [
    "PassageNotReached",
    "RecordProfile",
    "record_mass",
    "first_passage",
]


class PassageNotReached(HorizonError):
    """The requested level is above the running maximum at the horizon."""


@dataclass(frozen=True, eq=False)
class RecordProfile:
    source: GridPath
    running_max: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        running = np.maximum.accumulate(self.source.values)
        running.setflags(write=False)
        object.__setattr__(self, "running_max", running)

    @property
    def final_max(self) -> float:
        return float(self.running_max[-1])

    def reached(self, level: float) -> bool:
        return level <= self.running_max[-1]

    def max_at(self, t):
        """Running maximum at time(s) ``t`` (linear between grid points)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or not self.source.covers(float(np.max(t, initial=0.0))):
            raise HorizonError(
                f"time {float(np.max(t)):.6g} outside [0, {self.source.horizon:.6g}]"
            )
        return np.interp(t, self.source.times, self.running_max)

    def record_mass(self, a: float, b: float) -> float:
        if not 0 <= a <= b:
            raise ValueError(f"need 0 <= a <= b, got ({a}, {b})")
        lo, hi = self.max_at([a, b])
        return float(hi - lo)

    def first_passages(self, levels) -> np.ndarray:
        """Vectorised :meth:`first_passage` for an array of positive levels."""
        levels = np.asarray(levels, dtype=float)
        if np.any(levels <= 0):
            raise ValueError("passage levels must be positive")
        if levels.size and levels.max() > self.running_max[-1]:
            raise PassageNotReached(
                f"level {levels.max():.6g} above final maximum {self.final_max:.6g}"
            )
        v = self.source.values
        idx = np.searchsorted(self.running_max, levels, side="left")
        lo = v[idx - 1]
        frac = (levels - lo) / (v[idx] - lo)
        return (idx - 1 + frac) * self.source.delta

    def first_passage(self, x: float) -> float:
        return float(self.first_passages(np.array([x]))[0])

    def record_increments(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Partition the record mass of ``(a, b]`` along the grid's record values.

        Returns level midpoints and masses of the pieces.  ``first_passages``
        of the midpoints are record times inside ``(a, b]``, so the pair is a
        quadrature rule for integrals against the record measure.
        """
        lo, hi = self.max_at([a, b])
        if hi <= lo:
            return np.empty(0), np.empty(0)
        edges = self.breakpoints(lo, hi)
        return 0.5 * (edges[:-1] + edges[1:]), np.diff(edges)

    def breakpoints(self, lo: float, hi: float) -> np.ndarray:
        """Distinct record values strictly inside the level window, with its ends."""
        m = self.running_max
        inner = m[np.searchsorted(m, lo, side="right"): np.searchsorted(m, hi, side="left")]
        if inner.size:
            inner = inner[np.concatenate(([True], np.diff(inner) > 0))]
        return np.concatenate(([lo], inner, [hi]))


def record_mass(profile: RecordProfile, a: float, b: float) -> float:
    """Record measure of ``(a, b]``, i.e. ``M_b - M_a``."""
    return profile.record_mass(a, b)


def first_passage(profile: RecordProfile, x: float) -> float:
    """Interpolated first time the path reaches level ``x > 0``."""
    return profile.first_passage(x)
