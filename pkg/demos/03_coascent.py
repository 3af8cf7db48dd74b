"""The co-ascent transform, its persistence law, and what iterating it does."""

import numpy as np
from scipy import stats

from coascent.ensemble import reach_batch
from coascent.pathgen import GeneratorConfig, generate, reach, with_seed
from coascent.records import RecordProfile
from coascent.transform import coascent

cfg = GeneratorConfig("brownian", horizon=1.0, steps=2048)
paths, stages = reach_batch(cfg, np.arange(3000, dtype=np.uint64), 1.0, factor=2.0)
print(f"{len(paths)} paths, up to {stages.max()} horizon doublings to reach level 1")

# every co-ascent path ends its first unit of time at its running maximum
ends = np.array([coascent(p, 1.0, out_horizon=2.0).path.at(1.0) for p in paths])
for x in (0.5, 1.0, 2.0):
    print(f"P(sup <= {x}) = {np.mean(ends <= x):.4f}   2 Phi(x) - 1 = {2 * stats.norm.cdf(x) - 1:.4f}")

# co-ascent of the co-ascent, on a fresh ensemble: it is the co-ascent of the
# source at the random level T_1^H, so extend each source until that level is hit
twice = []
for seed in range(10_000, 13_000):
    c = with_seed(cfg, seed)
    path = reach(generate(c), c, 1.0)
    level = RecordProfile(path).first_passage(1.0) ** 0.5
    path = reach(path, c, level, factor=2.0)
    twice.append(coascent(path, level).path.at(1.0))
twice = np.array(twice)

print(f"endpoint mean: once {ends.mean():.3f}, twice {twice.mean():.3f}")
print(f"KS p-value between the two laws: {stats.ks_2samp(ends, twice).pvalue:.1e}")
print("the second pass changes the endpoint law, so the transform is not idempotent")
