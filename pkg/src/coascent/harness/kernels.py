"""Per-chunk sample kernels run by :func:`coascent.ensemble.map_chunks`.

Each kernel takes a plain ``params`` dict and an array of sample indices and
returns a dict of arrays indexed like ``indices``.  Kernels only depend on
``(params, indices)``, which keeps runs independent of the worker count.
"""

from __future__ import annotations

import math

import numpy as np

from ..ensemble import ALPHA_STREAM, PALM_STREAM, aux_uniform, reach_batch, sample_seeds
from ..palm import campbell_term, mass_stationarity_terms, palm_sample, scaled_sample_battery
from ..pathgen import GeneratorConfig, GridPath, HorizonError, generate_batch, reach, with_seed
from ..records import RecordProfile
from ..transform import lamperti, rescaled_battery

NAN4 = (math.nan,) * 4

CAMPBELL_FUNCTIONS = {
    "one": None,
    "endpoint": lambda b: b.endpoint,
    "sup": lambda b: b.sup,
    "avg": lambda b: b.avg,
    "alpha": lambda b: b.alpha,
}

MASS_FUNCTIONS = {
    "one": None,
    "endpoint": lambda b, u: b.endpoint,
    "sup_u": lambda b, u: b.sup * u,
    "avg_u": lambda b, u: b.avg * u,
}


def generator_config(p: dict, seed: int = 0) -> GeneratorConfig:
    return GeneratorConfig(p["kind"], p["hurst"], p["horizon"], p["steps"], int(seed))


def _seeds(p: dict, indices) -> np.ndarray:
    return sample_seeds(p["master_seed"], p["stream"], indices)


def source_battery(path: GridPath, seed: int) -> np.ndarray:
    return rescaled_battery(path, 1.0, aux_uniform(seed, ALPHA_STREAM)).as_array()[0]


def coascent_kernel(p: dict, indices) -> dict:
    """Co-ascent samples at ``p['level']``, optionally iterated once.

    Optional keys: ``coarsen`` (subsampling factors for censored suprema on
    coarser grids), ``direct_max`` (running maximum at time 1 of the stage-0
    path, also on the coarser grids) and ``iterate``.
    """
    seeds = _seeds(p, indices)
    cfg = generator_config(p)
    hurst, level = cfg.hurst, p["level"]
    stage0 = generate_batch(cfg, seeds)
    paths, stages = reach_batch(cfg, seeds, level, p["factor"], p.get("min_horizon", 0.0),
                                p["max_stages"], values=stage0)
    n = len(indices)
    out = {
        "seed": seeds,
        "battery": np.full((n, 4), math.nan),
        "passage": np.full(n, math.nan),
        "stages": stages,
        "rejected": np.zeros(n, dtype=bool),
    }
    coarsen = p.get("coarsen", [])
    for f in coarsen:
        out[f"sup_{f}"] = np.full(n, math.nan)
    if p.get("direct_max"):
        out["max1"] = np.full(n, math.nan)
        for f in coarsen:
            out[f"max1_{f}"] = np.full(n, math.nan)
    for i, path in enumerate(paths):
        seed = int(seeds[i])
        if p.get("direct_max"):
            start = GridPath(cfg.delta, stage0[i], hurst)
            out["max1"][i] = RecordProfile(start).max_at(1.0)
            for f in coarsen:
                coarse = GridPath(cfg.delta * f, stage0[i][::f], hurst)
                out[f"max1_{f}"][i] = RecordProfile(coarse).max_at(1.0)
        if path is None:
            out["rejected"][i] = True
            continue
        profile = RecordProfile(path)
        passage = profile.first_passage(level)
        u = aux_uniform(seed, ALPHA_STREAM)
        if p.get("iterate"):
            inner = level * passage**hurst
            try:
                path = reach(path, with_seed(cfg, seed), inner, p["factor"], p["max_stages"])
            except HorizonError:
                out["rejected"][i] = True
                continue
            profile = RecordProfile(path)
            passage = profile.first_passage(inner)
        out["passage"][i] = passage
        out["battery"][i] = rescaled_battery(path, passage, u, profile).as_array()[0]
        for f in coarsen:
            coarse = GridPath(path.delta * f, path.values[::f], hurst)
            cp = RecordProfile(coarse)
            t = cp.first_passage(level) if cp.reached(level) else coarse.horizon
            # censored at the horizon, which callers keep beyond the decision time
            out[f"sup_{f}"][i] = level * t ** (-hurst)
    return out


def palm_kernel(p: dict, indices) -> dict:
    """Palm samples on ``p['window']``; ``p['mode']`` adds mass or scaling terms."""
    seeds = _seeds(p, indices)
    cfg = generator_config(p)
    values = generate_batch(cfg, seeds)
    window = tuple(p["window"])
    mode = p.get("mode", "")
    n = len(indices)
    out = {
        "seed": seeds,
        "weight": np.zeros(n),
        "r": np.full(n, math.nan),
        "battery": np.full((n, 4), math.nan),
        "rejected": np.zeros(n, dtype=bool),
    }
    if mode == "mass":
        names = p["functionals"]
        out["lhs"] = np.full((n, len(names)), math.nan)
        out["rhs"] = np.full((n, len(names)), math.nan)
        out["degenerate"] = np.zeros(n, dtype=int)
    if mode == "scaling":
        out["scaled"] = np.full((n, len(p["levels"]), 4), math.nan)
        out["scaled_rejected"] = np.zeros((n, len(p["levels"])), dtype=bool)
    for i, index in enumerate(indices):
        seed = int(seeds[i])
        path = GridPath(cfg.delta, values[i], cfg.hurst)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(PALM_STREAM,)))
        try:
            sample = palm_sample(path, window, rng, p["out_horizon"], None, with_seed(cfg, seed))
        except HorizonError:
            out["rejected"][i] = True
            continue
        out["weight"][i] = sample.weight
        if sample.path is None:
            continue
        out["r"][i] = sample.r
        u = aux_uniform(seed, ALPHA_STREAM)
        out["battery"][i] = rescaled_battery(sample.path, 1.0, u).as_array()[0]
        if mode == "mass":
            try:
                for j, name in enumerate(p["functionals"]):
                    lhs, rhs, degenerate = mass_stationarity_terms(
                        sample.path, p["mass_window"], MASS_FUNCTIONS[name], u)
                    out["lhs"][i, j], out["rhs"][i, j] = lhs, rhs
                out["degenerate"][i] = degenerate
            except HorizonError:
                out["rejected"][i] = True
        if mode == "scaling" and index % 2 == 1:
            for j, x in enumerate(p["levels"]):
                try:
                    out["scaled"][i, j] = scaled_sample_battery(sample, x, u, p["max_stages"])
                except HorizonError:
                    out["scaled_rejected"][i, j] = True
    return out


def campbell_kernel(p: dict, indices) -> dict:
    """Campbell terms of each path for one window and several functionals.

    Also returns the running maximum at time 1 read straight off the grid,
    when time 1 is a grid point.
    """
    seeds = _seeds(p, indices)
    cfg = generator_config(p)
    values = generate_batch(cfg, seeds)
    names = p["functionals"]
    window = tuple(p["window"])
    n = len(indices)
    out = {
        "seed": seeds,
        "terms": np.full((n, len(names)), math.nan),
        "weight": np.zeros(n),
        "battery": np.full((n, 4), math.nan),
        "max1": np.full(n, math.nan),
    }
    unit = round(1.0 / cfg.delta)
    on_grid = unit <= cfg.steps and unit * cfg.delta == 1.0
    kappa = window[1] ** cfg.hurst - window[0] ** cfg.hurst
    for i in range(n):
        seed = int(seeds[i])
        path = GridPath(cfg.delta, values[i], cfg.hurst)
        profile = RecordProfile(path)
        u = aux_uniform(seed, ALPHA_STREAM)
        for j, name in enumerate(names):
            out["terms"][i, j] = campbell_term(path, window, CAMPBELL_FUNCTIONS[name], u, profile)
        out["weight"][i] = profile.record_mass(*window) / kappa
        out["battery"][i] = rescaled_battery(path, 1.0, u, profile).as_array()[0]
        if on_grid:
            out["max1"][i] = np.max(values[i][: unit + 1])
    return out


def lamperti_kernel(p: dict, indices) -> dict:
    """Lamperti images at each base point and at base point plus each lag."""
    seeds = _seeds(p, indices)
    cfg = generator_config(p)
    values = generate_batch(cfg, seeds)
    bases, lags = p["base_points"], p["lags"]
    n = len(indices)
    out = {
        "seed": seeds,
        "battery": np.full((n, 4), math.nan),
        "base": np.full((n, len(bases)), math.nan),
        "lagged": np.full((n, len(bases), len(lags)), math.nan),
    }
    for i in range(n):
        path = GridPath(cfg.delta, values[i], cfg.hurst)
        out["battery"][i] = source_battery(path, int(seeds[i]))
        for j, z in enumerate(bases):
            for k, lag in enumerate(lags):
                image = lamperti(path, z, z + lag, 1)
                out["base"][i, j] = image.values[0]
                out["lagged"][i, j, k] = image.values[1]
    return out


def path_kernel(p: dict, indices) -> dict:
    """Raw generated paths and their batteries."""
    seeds = _seeds(p, indices)
    cfg = generator_config(p)
    values = generate_batch(cfg, seeds)
    battery = np.array([source_battery(GridPath(cfg.delta, v, cfg.hurst), int(s))
                        for v, s in zip(values, seeds)])
    return {"seed": seeds, "values": values, "battery": battery}
