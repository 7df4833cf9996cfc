"""Hot numeric kernels with two interchangeable backends.

The per-token interval sweeps dominate runtime on large traces. Each
kernel exists twice: a numba ``@njit`` loop and a pure-numpy vectorized
path. ``WATTLENS_BACKEND`` selects between them:

    auto  (default)  numba when importable, numpy otherwise
    numba            force numba; falls back to numpy with a warning
    numpy            force the pure-numpy path

Both paths use the same half-open interval convention: a sample at time
``t`` belongs to interval ``k`` iff ``bounds[k] < t <= bounds[k+1]``.
Accumulation order is sample order with one fresh accumulator per
interval, so the two backends agree bit for bit on the sample-sum
kernel. ``benchmarks/bench_kernels.py`` compares their throughput.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

try:
    from numba import njit

    _NUMBA_OK = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    _NUMBA_OK = False


def _resolve_backend() -> str:
    choice = os.environ.get("WATTLENS_BACKEND", "auto").strip().lower() or "auto"
    if choice not in {"auto", "numba", "numpy"}:
        raise ValueError(
            f"WATTLENS_BACKEND must be 'auto', 'numba', or 'numpy', got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    if _NUMBA_OK:
        return "numba"
    if choice == "numba":
        warnings.warn(
            "WATTLENS_BACKEND=numba but numba is not importable; using numpy",
            RuntimeWarning,
            stacklevel=2,
        )
    return "numpy"


_ACTIVE = _resolve_backend()


def active_backend() -> str:
    return _ACTIVE


# ---------------------------------------------------------------------------
# sample-sum kernel: per-interval sum and count of samples in (lo, hi]

def _sample_stats_np(sample_t, sample_p, bounds):
    n_intervals = len(bounds) - 1
    # searchsorted(side="left"): first bound >= t, i.e. 1-based interval id
    idx = np.searchsorted(bounds, sample_t, side="left")
    sums = np.bincount(idx, weights=sample_p, minlength=n_intervals + 2)
    counts = np.bincount(idx, minlength=n_intervals + 2)
    return sums[1 : n_intervals + 1], counts[1 : n_intervals + 1]


def _sample_stats_loop(sample_t, sample_p, bounds):
    n_intervals = len(bounds) - 1
    sums = np.zeros(n_intervals, dtype=np.float64)
    counts = np.zeros(n_intervals, dtype=np.int64)
    n_samples = len(sample_t)
    j = 0
    while j < n_samples and sample_t[j] <= bounds[0]:
        j += 1
    for k in range(n_intervals):
        hi = bounds[k + 1]
        acc = 0.0
        c = 0
        while j < n_samples and sample_t[j] <= hi:
            acc += sample_p[j]
            c += 1
            j += 1
        sums[k] = acc
        counts[k] = c
    return sums, counts


# ---------------------------------------------------------------------------
# trapezoid kernel: integral of the piecewise-linear power curve over
# each (lo, hi], via the antiderivative at arbitrary points

def _trapezoid_np(sample_t, sample_p, bounds):
    seg_area = np.diff(sample_t) * (sample_p[1:] + sample_p[:-1]) * 0.5
    cum = np.concatenate(([0.0], np.cumsum(seg_area)))
    seg = np.clip(
        np.searchsorted(sample_t, bounds, side="right") - 1, 0, len(sample_t) - 2
    )
    dt = sample_t[seg + 1] - sample_t[seg]
    frac = bounds - sample_t[seg]
    p_at = sample_p[seg] + (sample_p[seg + 1] - sample_p[seg]) * (frac / dt)
    anti = cum[seg] + frac * (sample_p[seg] + p_at) * 0.5
    return anti[1:] - anti[:-1]


def _trapezoid_loop(sample_t, sample_p, bounds):
    n_samples = len(sample_t)
    cum = np.empty(n_samples, dtype=np.float64)
    cum[0] = 0.0
    for i in range(1, n_samples):
        cum[i] = cum[i - 1] + (sample_t[i] - sample_t[i - 1]) * (
            sample_p[i] + sample_p[i - 1]
        ) * 0.5

    anti = np.empty(len(bounds), dtype=np.float64)
    for b in range(len(bounds)):
        x = bounds[b]
        seg = np.searchsorted(sample_t, x, side="right") - 1
        if seg < 0:
            seg = 0
        elif seg > n_samples - 2:
            seg = n_samples - 2
        dt = sample_t[seg + 1] - sample_t[seg]
        frac = x - sample_t[seg]
        p_at = sample_p[seg] + (sample_p[seg + 1] - sample_p[seg]) * (frac / dt)
        anti[b] = cum[seg] + frac * (sample_p[seg] + p_at) * 0.5
    return anti[1:] - anti[:-1]


if _NUMBA_OK:
    _sample_stats_numba = njit(cache=True)(_sample_stats_loop)
    _trapezoid_numba = njit(cache=True)(_trapezoid_loop)
else:  # pragma: no cover
    _sample_stats_numba = _sample_stats_loop
    _trapezoid_numba = _trapezoid_loop


def _as_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def interval_sample_stats(sample_t, sample_p, bounds, backend: str | None = None):
    """Sum and count of samples falling in each (bounds[k], bounds[k+1]]."""
    sample_t, sample_p, bounds = _as_f64(sample_t), _as_f64(sample_p), _as_f64(bounds)
    if (backend or _ACTIVE) == "numba":
        return _sample_stats_numba(sample_t, sample_p, bounds)
    return _sample_stats_np(sample_t, sample_p, bounds)


def interval_trapezoid(sample_t, sample_p, bounds, backend: str | None = None):
    """Integral of the piecewise-linear curve through the samples over each interval.

    Requires at least two samples and bounds inside [sample_t[0], sample_t[-1]].
    """
    sample_t, sample_p, bounds = _as_f64(sample_t), _as_f64(sample_p), _as_f64(bounds)
    if len(sample_t) < 2:
        raise ValueError("trapezoid integration needs at least two samples")
    if (backend or _ACTIVE) == "numba":
        return _trapezoid_numba(sample_t, sample_p, bounds)
    return _trapezoid_np(sample_t, sample_p, bounds)
