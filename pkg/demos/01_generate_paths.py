"""Sampling fractional Brownian motion and checking what comes out."""

import numpy as np

from coascent.pathgen import GeneratorConfig, fbm_covariance, generate, generate_batch, implied_covariance

# one path per seed; the same config always gives the same path
cfg = GeneratorConfig("fbm", hurst=0.7, horizon=2.0, steps=1024, seed=42)
path = generate(cfg)
print(f"fBm H=0.7: {path.steps} steps of {path.delta:.4g}, X(1) = {path.at(1.0):+.4f}")

# the circulant route and the Cholesky route carry the same covariance
t = np.arange(1, 65) / 64
target = fbm_covariance(0.3, t[:, None], t[None, :])
for method in ("circulant", "dense"):
    implied = implied_covariance(GeneratorConfig("fbm", 0.3, 1.0, 64, method=method))
    print(f"{method:>9} route, H=0.3: max covariance error {np.abs(implied - target).max():.1e}")

# Monte Carlo view of the covariance at times 1 and 2
values = generate_batch(GeneratorConfig("fbm", 0.75, 2.0, 8), np.arange(50_000))
x1, x2 = values[:, 4], values[:, 8]
print(f"E[X1 X2] ~ {np.mean(x1 * x2):.3f} (exact {fbm_covariance(0.75, 1.0, 2.0):.3f})")

# self-similarity: 2^-H X(2) has the law of X(1)
print(f"sd X(1) = {x1.std():.3f}, sd 2^-H X(2) = {(x2 * 2**-0.75).std():.3f}")
