"""Domain types for inference traces and their derived metrics.

A trace is one inference run: a manifest, a power-sample stream, and a
token-event stream, all on a single monotonic clock declared by the
manifest. Types are frozen dataclasses; construction does not validate,
so invalid traces can be built in memory (e.g. by tests or by
``validate_workload_set``) and checked explicitly with
:func:`validate_trace`.

Clock contract
--------------
All timestamps are seconds as 64-bit floats on one shared monotonic
clock per trace. Mixing clocks across the two streams makes alignment
meaningless; the manifest names its clock source so downstream tools can
refuse mixed-clock merges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    CoverageError,
    DuplicateTimestamp,
    EmptyTokenStream,
    MalformedRecord,
    NonMonotonicTimestamp,
    WattlensError,
)

# Canonical workload names. The workload field is an open string; anything
# outside this set is treated as a custom workload and grouped by value.
WORKLOAD_ZERO_SHOT = "0-shot"
WORKLOAD_TWO_SHOT = "2-shot"
WORKLOAD_ZERO_SHOT_COT = "0-shot-cot"
WORKLOAD_CU = "cu"
WORKLOAD_CU_LONG = "cu-long"

KNOWN_WORKLOADS = frozenset(
    {
        WORKLOAD_ZERO_SHOT,
        WORKLOAD_TWO_SHOT,
        WORKLOAD_ZERO_SHOT_COT,
        WORKLOAD_CU,
        WORKLOAD_CU_LONG,
    }
)


@dataclass(frozen=True, slots=True)
class PowerSample:
    """One instantaneous GPU power reading."""

    t: float
    p: float


@dataclass(frozen=True, slots=True)
class TokenEvent:
    """One generated token, stamped at the end of its generation."""

    index: int
    t: float
    text: str | None = None
    eos: bool = False


@dataclass(frozen=True, slots=True)
class TraceManifest:
    trace_id: str
    model_name: str
    workload: str
    input_token_count: int
    gen_start_t: float
    max_new_tokens: int
    samples_path: str
    tokens_path: str
    clock: str = "monotonic"


@dataclass(frozen=True, slots=True)
class InferenceTrace:
    """One inference run: manifest plus its two aligned streams."""

    manifest: TraceManifest
    samples: tuple[PowerSample, ...]
    tokens: tuple[TokenEvent, ...]


@dataclass(frozen=True, slots=True)
class TokenEnergy:
    """Energy attributed to one token over its half-open interval (start_t, end_t].

    ``estimated`` is set when the interval held no power samples and the
    energy came from midpoint interpolation instead of observed samples.
    """

    index: int
    start_t: float
    end_t: float
    duration_s: float
    energy_j: float
    sample_count: int
    estimated: bool


@dataclass(frozen=True, slots=True)
class PhaseBreakdown:
    """Prefill/decode energy split for one trace.

    The first token belongs to the prefill phase; decoding is everything
    after it.
    """

    prefill_j: float
    decode_j: float
    total_j: float
    prefill_fraction: float
    decode_token_count: int


@dataclass(frozen=True, slots=True)
class DecodingTrend:
    """Least-squares line over decode-token energies.

    ``intercept_j`` is the fitted energy at the first decode token
    (ordinal 1), not at ordinal zero. ``growth_pct`` compares the fitted
    endpoints, matching how a regression line is read off a plot.
    """

    intercept_j: float
    slope_j_per_token: float
    first_fit_j: float
    last_fit_j: float
    growth_pct: float
    r2: float
    n_points: int


@dataclass(frozen=True, slots=True)
class WorkloadSummary:
    """Aggregate row for one (model, workload) pair after outlier removal."""

    model_name: str
    workload: str
    n_traces: int
    n_outliers_removed: int
    total_j_mean: float
    total_j_std: float
    energy_per_token_j_mean: float
    energy_per_token_j_std: float
    energy_per_decode_token_j_mean: float
    energy_per_decode_token_j_std: float
    output_tokens_mean: float
    output_tokens_std: float
    prefill_fraction_mean: float
    pooled_trend: DecodingTrend | None


@dataclass(frozen=True, slots=True)
class TraceValidation:
    """Per-trace validation outcome; ``error`` is the failing check's class name."""

    trace_id: str
    ok: bool
    error: str | None = None
    detail: str | None = None


def _check_stream_times(kind: str, times: list[float]) -> None:
    for i in range(1, len(times)):
        if times[i] == times[i - 1]:
            raise DuplicateTimestamp(
                f"{kind} stream repeats timestamp {times[i]!r} at record {i + 1}"
            )
        if times[i] < times[i - 1]:
            raise NonMonotonicTimestamp(
                f"{kind} stream goes backwards at record {i + 1}: "
                f"{times[i - 1]!r} -> {times[i]!r}"
            )


def validate_trace(trace: InferenceTrace) -> None:
    """Check every trace invariant; raise the first violation found.

    Pure: never mutates the trace, and repeated calls see the same result.
    """
    m = trace.manifest
    if m.input_token_count < 1:
        raise MalformedRecord(f"{m.trace_id}: input_token_count must be >= 1")
    if m.max_new_tokens < 1:
        raise MalformedRecord(f"{m.trace_id}: max_new_tokens must be >= 1")
    if not math.isfinite(m.gen_start_t):
        raise MalformedRecord(f"{m.trace_id}: gen_start_t is not finite")

    if not trace.tokens:
        raise EmptyTokenStream(f"{m.trace_id}: token stream is empty")

    for i, ev in enumerate(trace.tokens):
        if ev.index != i + 1:
            raise MalformedRecord(
                f"{m.trace_id}: token indices must be contiguous from 1, "
                f"got {ev.index} at position {i + 1}"
            )
        if not math.isfinite(ev.t):
            raise MalformedRecord(f"{m.trace_id}: token {ev.index} timestamp is not finite")
        if ev.eos and i != len(trace.tokens) - 1:
            raise MalformedRecord(
                f"{m.trace_id}: eos at token {ev.index} is not the last event"
            )
    _check_stream_times("token", [ev.t for ev in trace.tokens])

    for j, s in enumerate(trace.samples):
        if not math.isfinite(s.t) or not math.isfinite(s.p):
            raise MalformedRecord(f"{m.trace_id}: sample {j + 1} has non-finite fields")
        if s.p < 0:
            raise MalformedRecord(f"{m.trace_id}: sample {j + 1} has negative power {s.p!r}")
    _check_stream_times("power", [s.t for s in trace.samples])

    first_token_t = trace.tokens[0].t
    if not m.gen_start_t < first_token_t:
        raise NonMonotonicTimestamp(
            f"{m.trace_id}: gen_start_t {m.gen_start_t!r} is not before the "
            f"first token timestamp {first_token_t!r}"
        )

    last_token_t = trace.tokens[-1].t
    if not trace.samples:
        raise CoverageError(f"{m.trace_id}: power stream is empty")
    if trace.samples[0].t > m.gen_start_t:
        raise CoverageError(
            f"{m.trace_id}: first power sample at {trace.samples[0].t!r} is after "
            f"gen_start_t {m.gen_start_t!r}"
        )
    if trace.samples[-1].t < last_token_t:
        raise CoverageError(
            f"{m.trace_id}: power stream ends at {trace.samples[-1].t!r}, before "
            f"the last token at {last_token_t!r}"
        )


def validate_workload_set(traces: list[InferenceTrace]) -> list[TraceValidation]:
    """Validate each trace, reporting failures instead of raising."""
    report = []
    for trace in traces:
        try:
            validate_trace(trace)
        except WattlensError as err:
            report.append(
                TraceValidation(
                    trace_id=trace.manifest.trace_id,
                    ok=False,
                    error=type(err).__name__,
                    detail=str(err),
                )
            )
        else:
            report.append(TraceValidation(trace_id=trace.manifest.trace_id, ok=True))
    return report
