"""Evaluation toolkit for hashing-based retrieval over bit-packed binary codes."""
from .core import (
    BinaryCode,
    CodeHistogram,
    Entry,
    HammingBall,
    InvariantError,
    LabeledCodeSet,
    UsageError,
    ball_volume,
    hamming_distance,
    histogram,
    retrieve_within,
)
from .kernels import BACKEND
from .metrics import (
    BEST,
    STABLE,
    WORST,
    RankedRetrieval,
    RelevanceMode,
    TiePolicy,
    ap_bounds,
    average_precision,
    indicator,
    lgap,
    mean_average_precision,
    mlgap,
    penalty_phi,
    precision_at_k,
    precision_at_radius,
    rank,
)

__version__ = "0.1.0"
