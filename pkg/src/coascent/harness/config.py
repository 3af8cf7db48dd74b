"""Experiment configuration: a flat ``key = value`` file plus CLI overrides.

Values are written as JSON (``levels = [0.5, 1.0, 2.0]``); bare words are
read as strings.  Keys left unset (``None``) take identity-specific defaults
when the experiment is resolved.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..pathgen import KINDS

__all__ = ["ConfigError", "ExperimentConfig", "IDENTITIES", "load_config", "parse_value"]

IDENTITIES = (
    "level-independence",
    "idempotence",
    "persistence",
    "intensity",
    "a-independence",
    "palm-theorem",
    "mass-stationarity",
    "scaling-invariance",
    "lamperti-stationarity",
    "generator-covariance",
)

MIN_ENSEMBLE = 100
_SECTION = "experiment"


class ConfigError(ValueError):
    """The configuration violates a constraint; maps to the usage-error exit code."""


@dataclass(frozen=True)
class ExperimentConfig:
    identity: str
    kind: str = "brownian"
    hurst: float = 0.5
    ensemble_size: int = 5000
    horizon: float | None = None
    steps: int | None = None
    out_horizon: float = 2.0
    levels: list | None = None
    windows: list | None = None
    mass_window: list = field(default_factory=lambda: [1.0, 2.0])
    functionals: list | None = None
    lags: list = field(default_factory=lambda: [0.25, 0.5, 1.0])
    base_points: list = field(default_factory=lambda: [-1.0, 0.0])
    master_seed: int = 0
    workers: int = 1
    resamples: int = 999
    alpha: float = 0.01
    sigma_level: float = 3.0
    rejection_cap: float = 0.02
    max_stages: int = 64
    output_json: str = ""
    output_csv: str = ""

    def __post_init__(self) -> None:
        if self.identity not in IDENTITIES:
            raise ConfigError(f"identity must be one of {', '.join(IDENTITIES)}; got {self.identity!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {', '.join(KINDS)}; got {self.kind!r}")
        if self.kind == "brownian" and self.hurst != 0.5:
            object.__setattr__(self, "hurst", 0.5)
        if not 0 < self.hurst < 1:
            raise ConfigError(f"hurst must lie in (0, 1); got {self.hurst}")
        _require(isinstance(self.ensemble_size, int) and self.ensemble_size >= MIN_ENSEMBLE,
                 f"ensemble_size must be an integer >= {MIN_ENSEMBLE}")
        _require(self.horizon is None or self.horizon > 0, "horizon must be positive")
        _require(self.steps is None or (isinstance(self.steps, int) and self.steps >= 2
                                        and self.steps % 2 == 0),
                 "steps must be an even integer >= 2")
        _require(self.out_horizon >= 1, "out_horizon must be at least 1")
        _require(self.levels is None or (len(self.levels) > 0 and all(x > 0 for x in self.levels)),
                 "levels must be a nonempty list of positive numbers")
        if self.windows is not None:
            _require(len(self.windows) > 0, "windows must be a nonempty list")
            for w in self.windows:
                _require(len(w) == 2 and 0 <= w[0] < w[1], f"window {w} must satisfy 0 <= a < b")
        c = self.mass_window
        _require(len(c) == 2 and 0 < c[0] < c[1], "mass_window must satisfy 0 < c1 < c2")
        _require(len(self.lags) > 0 and all(t > 0 for t in self.lags), "lags must be positive")
        _require(len(self.base_points) > 0, "base_points must be nonempty")
        _require(isinstance(self.master_seed, int) and 0 <= self.master_seed < 2**64,
                 "master_seed must be a 64-bit unsigned integer")
        _require(isinstance(self.workers, int) and self.workers >= 1, "workers must be >= 1")
        _require(isinstance(self.resamples, int) and self.resamples >= 200, "resamples must be >= 200")
        _require(0 < self.alpha < 1, "alpha must lie in (0, 1)")
        _require(self.sigma_level > 0, "sigma_level must be positive")
        _require(0 <= self.rejection_cap <= 1, "rejection_cap must lie in [0, 1]")
        _require(isinstance(self.max_stages, int) and self.max_stages >= 0, "max_stages must be >= 0")

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            lines.append(f"{f.name} = {json.dumps(value)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, **overrides) -> "ExperimentConfig":
        parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
        parser.optionxform = str
        try:
            parser.read_string(f"[{_SECTION}]\n{text}")
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        raw = {k: parse_value(v) for k, v in parser[_SECTION].items()}
        raw.update(overrides)
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(raw) - set(known))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        if "identity" not in raw:
            raise ConfigError("config must name an identity")
        values = {}
        for key, value in raw.items():
            values[key] = _coerce(key, value, known[key].type)
        return cls(**values)


_NUMERIC_LISTS = {"levels", "windows", "mass_window", "lags", "base_points"}


def _floats(key: str, value):
    if isinstance(value, list):
        return [_floats(key, v) for v in value]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must contain numbers only")
    return float(value)


def _require(ok: bool, message: str) -> None:
    if not ok:
        raise ConfigError(message)


def _coerce(key: str, value, annotation: str):
    """Check a parsed value against the field annotation; ints may widen to floats."""
    if value is None:
        if "None" in annotation:
            return None
        raise ConfigError(f"{key} may not be null")
    base = annotation.replace(" | None", "")
    if base == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    if base == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if base == "list":
        if not isinstance(value, list):
            raise ConfigError(f"{key} must be a list")
        return _floats(key, value) if key in _NUMERIC_LISTS else value
    if base == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string")
        return value
    return value


def parse_value(text: str):
    """JSON value if the text parses as one, else the stripped string."""
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return ExperimentConfig.from_text(text, **overrides)
