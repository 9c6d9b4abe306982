"""Jensen-Shannon divergence, its metric powers, and applications.

``D_JS ** alpha`` is a metric for ``alpha in (0, 1/2]`` and fails the
triangle inequality for ``alpha >= 1``. The package provides the divergences,
the numerics used to classify exponents, a recursive segmenter for symbol
sequences built on the weighted JSD, and a measured JSD between qubit states.
"""

from .errors import JSDMError
from .probability import (
    F_JS,
    F_KL,
    AlphaExponent,
    Classification,
    FGenerator,
    ProbDist,
    WeightPair,
    d_alpha,
    f_divergence,
    jsd,
    jsd_weighted,
    kl_divergence,
    shannon_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "JSDMError",
    "F_JS",
    "F_KL",
    "AlphaExponent",
    "Classification",
    "FGenerator",
    "ProbDist",
    "WeightPair",
    "d_alpha",
    "f_divergence",
    "jsd",
    "jsd_weighted",
    "kl_divergence",
    "shannon_entropy",
]
