"""Co-ascent transforms, record measures and rescaling-Palm calculus for
self-similar processes, with Monte Carlo checks of their distributional
identities."""

from .palm import (
    HyperbolicMeasure,
    WeightedPathSample,
    campbell_estimate,
    kappa_mass,
    mass_stationarity_check,
    palm_sample,
    scaling_invariance_check,
)
from .pathgen import GeneratorConfig, GridPath, extend, generate, ladder_extend, rescale
from .records import RecordProfile, first_passage, record_mass
from .stattest import (
    VerificationReport,
    WeightedSampleSet,
    bootstrap_pvalue,
    ks_two_sample,
    mean_ci_compare,
    weighted_ecdf,
)
from .transform import coascent, excursion_from_max, iterated_coascent, lamperti

__version__ = "0.1.0"

__all__ = [
    "GeneratorConfig", "GridPath", "generate", "rescale", "extend", "ladder_extend",
    "RecordProfile", "record_mass", "first_passage",
    "coascent", "iterated_coascent", "lamperti", "excursion_from_max",
    "HyperbolicMeasure", "WeightedPathSample", "kappa_mass", "campbell_estimate",
    "palm_sample", "mass_stationarity_check", "scaling_invariance_check",
    "WeightedSampleSet", "VerificationReport", "weighted_ecdf", "ks_two_sample",
    "bootstrap_pvalue", "mean_ci_compare",
]
