"""Dependent variables, trend fits, and workload-level aggregation.

Trend fits run over decode tokens only (ordinal 1 = the first decode
token, i.e. overall token 2): the prefill spike would corrupt a line
drawn over the decoding phase. Tokens whose energy was interpolated
(``estimated``) are excluded from fits by default to avoid biasing the
slope with synthetic values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .alignment import split_phases
from .errors import (
    AllTracesRemoved,
    InsufficientPoints,
    NoDecodeTokens,
    NonPositiveIntercept,
    ZeroTokens,
)
from .model import (
    DecodingTrend,
    InferenceTrace,
    PhaseBreakdown,
    TokenEnergy,
    WorkloadSummary,
)

OUTLIER_NONE = "none"
OUTLIER_IQR = "iqr1.5"
OUTLIER_RULES = (OUTLIER_NONE, OUTLIER_IQR)


@dataclass(frozen=True, slots=True)
class AmplificationReport:
    """Increase of the fitted initial decoding cost caused by a longer input."""

    baseline_workload: str
    long_input_workload: str
    intercept_baseline_j: float
    intercept_long_j: float
    amplification_pct: float


@dataclass(frozen=True, slots=True)
class BabblingReport:
    mean_budget_utilization: float
    is_babbler: bool
    threshold: float


@dataclass(frozen=True, slots=True)
class TraceMetrics:
    """Per-trace inputs to workload aggregation."""

    trace_id: str
    model_name: str
    workload: str
    breakdown: PhaseBreakdown
    trend: DecodingTrend | None
    output_tokens: int
    decode_ordinals: tuple[int, ...]
    decode_energies: tuple[float, ...]


def energy_per_token(total_j: float, n_tokens: int) -> float:
    """Total inference energy divided by generated token count (prefill included)."""
    if n_tokens < 1:
        raise ZeroTokens(f"n_tokens must be >= 1, got {n_tokens}")
    return total_j / n_tokens


def energy_per_decode_token(breakdown: PhaseBreakdown) -> float:
    """Decode-phase energy per decode token (prefill excluded)."""
    if breakdown.decode_token_count < 1:
        raise NoDecodeTokens("single-token output has no decoding phase")
    return breakdown.decode_j / breakdown.decode_token_count


def percent_increase(baseline: float, value: float) -> float:
    if baseline <= 0:
        raise ValueError(f"baseline must be positive, got {baseline!r}")
    return 100.0 * (value - baseline) / baseline


def fit_trend_points(ordinals: Sequence[int], energies_j: Sequence[float]) -> DecodingTrend:
    """OLS line of energy on decode ordinal; intercept reported at ordinal 1."""
    x = np.asarray(ordinals, dtype=np.float64)
    y = np.asarray(energies_j, dtype=np.float64)
    if len(x) < 2:
        raise InsufficientPoints(f"need at least 2 decode points, got {len(x)}")
    if np.ptp(x) == 0:
        raise InsufficientPoints("decode ordinals are all identical; slope undefined")

    slope, b0 = np.polyfit(x, y, 1)
    fitted = b0 + slope * x
    residuals = y - fitted
    ss_res = float(residuals @ residuals)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot

    first_fit = float(b0 + slope * 1.0)
    last_fit = float(b0 + slope * x.max())
    growth = 100.0 * (last_fit - first_fit) / first_fit if first_fit > 0 else 0.0
    return DecodingTrend(
        intercept_j=first_fit,
        slope_j_per_token=float(slope),
        first_fit_j=first_fit,
        last_fit_j=last_fit,
        growth_pct=growth,
        r2=float(r2),
        n_points=len(x),
    )


def decode_points(
    energies: list[TokenEnergy], include_estimated: bool = False
) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """(ordinal, energy) pairs for the decoding phase, ordinal 1 = token 2."""
    pairs = [
        (te.index - 1, te.energy_j)
        for te in energies
        if te.index >= 2 and (include_estimated or not te.estimated)
    ]
    if not pairs:
        return (), ()
    ordinals, values = zip(*pairs)
    return tuple(ordinals), tuple(values)


def fit_decoding_trend(
    energies: list[TokenEnergy], include_estimated: bool = False
) -> DecodingTrend:
    ordinals, values = decode_points(energies, include_estimated)
    return fit_trend_points(ordinals, values)


def amplification(
    baseline: DecodingTrend,
    long_input: DecodingTrend,
    baseline_workload: str = "",
    long_input_workload: str = "",
) -> AmplificationReport:
    """How much a longer input raised the fitted initial decoding token cost."""
    if baseline.intercept_j <= 0 or long_input.intercept_j <= 0:
        raise NonPositiveIntercept(
            f"intercepts must be positive, got {baseline.intercept_j!r} "
            f"and {long_input.intercept_j!r}"
        )
    pct = percent_increase(baseline.intercept_j, long_input.intercept_j)
    return AmplificationReport(
        baseline_workload=baseline_workload,
        long_input_workload=long_input_workload,
        intercept_baseline_j=baseline.intercept_j,
        intercept_long_j=long_input.intercept_j,
        amplification_pct=pct,
    )


def detect_babbling(
    output_tokens: Sequence[int], max_new_tokens: int, threshold: float = 0.95
) -> BabblingReport:
    """Flag models that pad output toward the token budget.

    Utilization is mean output length over the budget, capped at 1.0.
    An empty sample reports utilization 0.
    """
    if not 0 < threshold <= 1:
        raise ValueError(f"threshold must be in (0, 1], got {threshold!r}")
    if max_new_tokens < 1:
        raise ValueError(f"max_new_tokens must be >= 1, got {max_new_tokens}")
    if len(output_tokens) == 0:
        utilization = 0.0
    else:
        utilization = min(1.0, float(np.mean(output_tokens)) / max_new_tokens)
    return BabblingReport(
        mean_budget_utilization=utilization,
        is_babbler=utilization >= threshold,
        threshold=threshold,
    )


def collect_trace_metrics(
    trace: InferenceTrace,
    energies: list[TokenEnergy],
    include_estimated: bool = False,
) -> TraceMetrics:
    """Bundle one trace's aggregation inputs (phase split, trend, decode points)."""
    breakdown = split_phases(energies)
    ordinals, values = decode_points(energies, include_estimated)
    try:
        trend = fit_trend_points(ordinals, values)
    except InsufficientPoints:
        trend = None
    return TraceMetrics(
        trace_id=trace.manifest.trace_id,
        model_name=trace.manifest.model_name,
        workload=trace.manifest.workload,
        breakdown=breakdown,
        trend=trend,
        output_tokens=len(trace.tokens),
        decode_ordinals=ordinals,
        decode_energies=values,
    )


def iqr_outlier_mask(values: Sequence[float]) -> np.ndarray:
    """True where a value lies outside [Q1 - 1.5*IQR, Q3 + 1.5*IQR]."""
    arr = np.asarray(values, dtype=np.float64)
    q1, q3 = np.percentile(arr, [25.0, 75.0])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    return (arr < lo) | (arr > hi)


def aggregate_workload(
    rows: Sequence[TraceMetrics], outlier_rule: str = OUTLIER_IQR
) -> WorkloadSummary:
    """Fold per-trace metrics into one summary row for a (model, workload) pair.

    With the IQR rule, traces whose total energy falls outside
    [Q1 - 1.5*IQR, Q3 + 1.5*IQR] are dropped and counted. Standard
    deviations are population deviations, 0 for a single trace. The
    pooled trend refits one line over every retained trace's decode
    points rather than averaging per-trace fits.
    """
    if outlier_rule not in OUTLIER_RULES:
        raise ValueError(f"outlier_rule must be one of {OUTLIER_RULES}, got {outlier_rule!r}")
    if not rows:
        raise ValueError("aggregate_workload needs at least one trace")
    keys = {(r.model_name, r.workload) for r in rows}
    if len(keys) > 1:
        raise ValueError(f"rows span multiple (model, workload) groups: {sorted(keys)}")

    rows = sorted(rows, key=lambda r: r.trace_id)
    totals = np.array([r.breakdown.total_j for r in rows], dtype=np.float64)
    if outlier_rule == OUTLIER_IQR:
        # a non-finite total can never sit inside the fences
        outliers = iqr_outlier_mask(totals) | ~np.isfinite(totals)
    else:
        outliers = np.zeros(len(rows), dtype=bool)
    kept = [r for r, out in zip(rows, outliers) if not out]
    n_removed = int(outliers.sum())
    if not kept:
        raise AllTracesRemoved(
            f"outlier rule {outlier_rule!r} removed all {len(rows)} traces"
        )

    def mean_std(values) -> tuple[float, float]:
        arr = np.asarray(values, dtype=np.float64)
        return float(arr.mean()), float(arr.std())

    total_mean, total_std = mean_std([r.breakdown.total_j for r in kept])
    ept_mean, ept_std = mean_std(
        [r.breakdown.total_j / r.output_tokens for r in kept]
    )
    decode_rows = [r for r in kept if r.breakdown.decode_token_count >= 1]
    if decode_rows:
        epd_mean, epd_std = mean_std(
            [
                r.breakdown.decode_j / r.breakdown.decode_token_count
                for r in decode_rows
            ]
        )
    else:
        epd_mean, epd_std = float("nan"), float("nan")
    out_mean, out_std = mean_std([r.output_tokens for r in kept])
    prefill_frac_mean = float(
        np.mean([r.breakdown.prefill_fraction for r in kept])
    )

    pooled_ordinals: list[int] = []
    pooled_energies: list[float] = []
    for r in kept:
        pooled_ordinals.extend(r.decode_ordinals)
        pooled_energies.extend(r.decode_energies)
    try:
        pooled_trend = fit_trend_points(pooled_ordinals, pooled_energies)
    except InsufficientPoints:
        pooled_trend = None

    first = kept[0]
    return WorkloadSummary(
        model_name=first.model_name,
        workload=first.workload,
        n_traces=len(kept),
        n_outliers_removed=n_removed,
        total_j_mean=total_mean,
        total_j_std=total_std,
        energy_per_token_j_mean=ept_mean,
        energy_per_token_j_std=ept_std,
        energy_per_decode_token_j_mean=epd_mean,
        energy_per_decode_token_j_std=epd_std,
        output_tokens_mean=out_mean,
        output_tokens_std=out_std,
        prefill_fraction_mean=prefill_frac_mean,
        pooled_trend=pooled_trend,
    )
