"""Exponential time change: the Lamperti image is stationary."""

import math

import numpy as np

from coascent.harness.identities import lamperti_covariance
from coascent.pathgen import GeneratorConfig, GridPath, generate, generate_batch
from coascent.transform import excursion_from_max, lamperti

# t^H is sent to the constant 1, and it never leaves its running maximum
power = generate(GeneratorConfig("deterministic-power", 0.6, 4.0, 4096))
print("L(t^H) on [-2, 1]:", np.round(lamperti(power, -2.0, 1.0, 3).values, 12))
print("excursion from max:", np.round(excursion_from_max(power, -2.0, 1.0, 3).values, 12))

cfg = GeneratorConfig("brownian", horizon=4.0, steps=4096)
paths = generate_batch(cfg, np.arange(8000))
for z in (-1.0, 0.0):
    for lag in (0.25, 1.0):
        pairs = np.array([lamperti(GridPath(cfg.delta, v, 0.5), z, z + lag, 1).values for v in paths])
        est = np.mean(pairs[:, 0] * pairs[:, 1])
        print(f"z={z:+.0f} lag={lag}: cov {est:.3f}, exp(-lag/2) {math.exp(-lag / 2):.3f}")

print(f"H=0.7 covariance at lag 0.5: {float(lamperti_covariance(0.7, 0.5)):.4f}")
