"""Seeded, chunked ensemble construction.

Every sample is identified by ``(master_seed, stream, index)``; its path seed
is derived from that triple alone, so results never depend on how indices are
split across workers.  Work is cut into fixed-size chunks, mapped in order
(optionally on a process pool) and concatenated in chunk order.
"""

from __future__ import annotations

from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .pathgen import (
    GeneratorConfig,
    GridPath,
    generate_batch,
    ladder_extend_batch,
)
from .records import RecordProfile

__all__ = [
    "CHUNK_SIZE",
    "sample_seeds",
    "aux_uniform",
    "map_chunks",
    "reach_batch",
]

CHUNK_SIZE = 256

# spawn keys of per-sample auxiliary streams (the ladder uses 1, see pathgen)
ALPHA_STREAM = 2
PALM_STREAM = 3


def sample_seeds(master_seed: int, stream: int, indices) -> np.ndarray:
    """Path seeds for sample ``indices`` of ``stream`` under ``master_seed``."""
    return np.array(
        [np.random.SeedSequence(int(master_seed), spawn_key=(int(stream), int(i)))
         .generate_state(1, np.uint64)[0] for i in indices],
        dtype=np.uint64,
    )


def aux_uniform(seed: int, stream: int) -> float:
    """One uniform draw from auxiliary ``stream`` of a path seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream,))
    return float(np.random.default_rng(ss).random())


def _run_chunk(job):
    kernel, params, indices = job
    return kernel(params, indices)


def map_chunks(
    kernel: Callable[[dict, np.ndarray], dict],
    params: dict,
    count: int,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> dict[str, np.ndarray]:
    """Apply ``kernel(params, indices)`` to index chunks and concatenate the outputs.

    ``kernel`` must be a module-level function returning a dict of arrays
    whose first axis runs over ``indices``.  The result is identical for
    every ``workers`` value.
    """
    jobs = [(kernel, params, np.arange(lo, min(lo + chunk_size, count)))
            for lo in range(0, count, chunk_size)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(job) for job in jobs]
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}


def reach_batch(
    config: GeneratorConfig,
    seeds,
    levels,
    factor: float = 1.0,
    min_horizon: float = 0.0,
    max_stages: int = 64,
    values: np.ndarray | None = None,
) -> tuple[list[GridPath | None], np.ndarray]:
    """Generate one path per seed and ladder-extend each until it is usable.

    A path is usable once it hits its level at some ``T`` with
    ``factor * T`` and ``min_horizon`` both covered.  Rows still unusable
    after ``max_stages`` doublings come back as ``None``.  Also returns the
    number of doublings applied to each row.  ``values`` may carry the
    stage-0 paths if the caller has already generated them.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    count = seeds.size
    levels = np.broadcast_to(np.asarray(levels, dtype=float), (count,))
    if values is None:
        values = generate_batch(config, seeds)
    deltas = np.full(count, config.delta)
    stages = np.zeros(count, dtype=int)
    out: list[GridPath | None] = [None] * count
    active = np.arange(count)
    while active.size:
        pending = []
        for row, i in enumerate(active):
            path = GridPath(deltas[row], values[row], config.hurst)
            if _usable(path, levels[i], factor, min_horizon):
                out[i] = path
            elif stages[i] < max_stages:
                pending.append(row)
        pending = np.array(pending, dtype=int)
        if pending.size == 0:
            break
        active = active[pending]
        values, deltas = ladder_extend_batch(
            values[pending], deltas[pending], seeds[active], stages[active],
            config.kind, config.hurst,
        )
        stages[active] += 1
    return out, stages


def _usable(path: GridPath, level: float, factor: float, min_horizon: float) -> bool:
    if not path.covers(min_horizon):
        return False
    profile = RecordProfile(path)
    if not profile.reached(level):
        return False
    return path.covers(factor * profile.first_passage(level))
