"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it was built; otherwise the
numpy fallback is loaded. Setting ``MLGAP_PURE_PYTHON=1`` forces the fallback.
"""
import os

from . import _fallback

BACKENDS = {"numpy": _fallback}

try:
    from . import _kernels
except ImportError:
    _kernels = None
else:
    BACKENDS["cython"] = _kernels

if _kernels is not None and os.environ.get("MLGAP_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "numpy"

_impl = BACKENDS[BACKEND]

hamming_to_query = _impl.hamming_to_query
hamming_matrix = _impl.hamming_matrix
resolve_extreme = _impl.resolve_extreme
ap_sorted = _impl.ap_sorted
lgap_aggregates = _impl.lgap_aggregates


def use(name: str) -> None:
    """Switch the active backend for this process (used by tests and benchmarks)."""
    global BACKEND, _impl, hamming_to_query, hamming_matrix, resolve_extreme, ap_sorted, lgap_aggregates
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    BACKEND = name
    _impl = BACKENDS[name]
    hamming_to_query = _impl.hamming_to_query
    hamming_matrix = _impl.hamming_matrix
    resolve_extreme = _impl.resolve_extreme
    ap_sorted = _impl.ap_sorted
    lgap_aggregates = _impl.lgap_aggregates
