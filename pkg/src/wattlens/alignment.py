"""Timestamp alignment of power samples to generated tokens.

Token ``n`` owns the half-open interval ``(t_{n-1}, t_n]`` where ``t_0``
is the generation start recorded in the manifest, so consecutive token
intervals tile ``(gen_start_t, last_token_t]`` with no gaps or overlaps
and every in-span sample is counted exactly once. A sample landing
exactly on a token's end timestamp belongs to that token.

Two energy modes:

* ``sample-mean`` (default): mean power of the samples inside the
  interval times its duration.
* ``trapezoid``: integral of the piecewise-linear power curve through
  the samples, a higher-fidelity alternative.

Intervals shorter than the sampling period can hold no samples at all.
Both modes then fall back to linearly interpolated power at the interval
midpoint times the duration and mark the token ``estimated`` so
downstream analyses can exclude it. Samples before the generation start
(model loading, idle) are ignored.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import EmptyInput
from .model import InferenceTrace, PhaseBreakdown, TokenEnergy, validate_trace

MODE_SAMPLE_MEAN = "sample-mean"
MODE_TRAPEZOID = "trapezoid"
MODES = (MODE_SAMPLE_MEAN, MODE_TRAPEZOID)


def token_bounds(trace: InferenceTrace) -> np.ndarray:
    """Interval boundary array: gen_start_t followed by each token end time."""
    bounds = np.empty(len(trace.tokens) + 1, dtype=np.float64)
    bounds[0] = trace.manifest.gen_start_t
    bounds[1:] = [ev.t for ev in trace.tokens]
    return bounds


def assign_token_energies(
    trace: InferenceTrace,
    mode: str = MODE_SAMPLE_MEAN,
    backend: str | None = None,
) -> list[TokenEnergy]:
    """Attribute energy to every token of a validated trace."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    validate_trace(trace)

    sample_t = np.array([s.t for s in trace.samples], dtype=np.float64)
    sample_p = np.array([s.p for s in trace.samples], dtype=np.float64)
    bounds = token_bounds(trace)
    durations = np.diff(bounds)

    sums, counts = _kernels.interval_sample_stats(sample_t, sample_p, bounds, backend)
    if mode == MODE_SAMPLE_MEAN:
        mean_p = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
        energies = mean_p * durations
    else:
        energies = _kernels.interval_trapezoid(sample_t, sample_p, bounds, backend)

    empty = counts == 0
    if empty.any():
        midpoints = bounds[:-1][empty] + durations[empty] * 0.5
        p_mid = np.interp(midpoints, sample_t, sample_p)
        energies = energies.copy()
        energies[empty] = p_mid * durations[empty]

    return [
        TokenEnergy(
            index=k + 1,
            start_t=float(bounds[k]),
            end_t=float(bounds[k + 1]),
            duration_s=float(durations[k]),
            energy_j=float(energies[k]),
            sample_count=int(counts[k]),
            estimated=bool(empty[k]),
        )
        for k in range(len(trace.tokens))
    ]


def split_phases(energies: list[TokenEnergy]) -> PhaseBreakdown:
    """Split per-token energies into the prefill/decoding phases.

    The first token (prompt processing plus the token it yields) is the
    prefill phase; every later token is decoding.
    """
    if not energies:
        raise EmptyInput("cannot split phases of an empty energy series")
    for pos, te in enumerate(energies):
        if te.index != pos + 1:
            raise ValueError(
                f"token indices must be contiguous from 1, got {te.index} at {pos + 1}"
            )

    prefill_j = energies[0].energy_j
    decode_j = float(sum(te.energy_j for te in energies[1:]))
    total_j = prefill_j + decode_j
    fraction = prefill_j / total_j if total_j > 0 else 0.0
    return PhaseBreakdown(
        prefill_j=prefill_j,
        decode_j=decode_j,
        total_j=total_j,
        prefill_fraction=fraction,
        decode_token_count=len(energies) - 1,
    )
