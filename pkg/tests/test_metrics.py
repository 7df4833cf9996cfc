import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wattlens.errors import (
    AllTracesRemoved,
    InsufficientPoints,
    NoDecodeTokens,
    NonPositiveIntercept,
    ZeroTokens,
)
from wattlens.metrics import (
    TraceMetrics,
    aggregate_workload,
    amplification,
    detect_babbling,
    energy_per_decode_token,
    energy_per_token,
    fit_decoding_trend,
    fit_trend_points,
    iqr_outlier_mask,
    percent_increase,
)
from wattlens.model import PhaseBreakdown, TokenEnergy

from oracles import iqr_outliers, ols_line


def token_series(values, start_index=1, estimated=None):
    return [
        TokenEnergy(
            index=start_index + i,
            start_t=float(i),
            end_t=float(i + 1),
            duration_s=1.0,
            energy_j=float(v),
            sample_count=4,
            estimated=bool(estimated[i]) if estimated is not None else False,
        )
        for i, v in enumerate(values)
    ]


def test_energy_per_token():
    assert energy_per_token(300.0, 100) == pytest.approx(3.0)
    assert energy_per_token(0.0, 5) == 0.0
    with pytest.raises(ZeroTokens):
        energy_per_token(10.0, 0)


def test_percent_increase_paper_pair():
    # 5.22 -> 8.59 J per token reads as a 64.5% increase
    assert abs(percent_increase(5.22, 8.59) - 64.5) <= 0.1
    with pytest.raises(ValueError):
        percent_increase(0.0, 1.0)


def test_energy_per_decode_token():
    b = PhaseBreakdown(10.0, 6.0, 16.0, 0.625, 3)
    assert energy_per_decode_token(b) == pytest.approx(2.0)
    zero = PhaseBreakdown(10.0, 0.0, 10.0, 1.0, 3)
    assert energy_per_decode_token(zero) == 0.0
    single = PhaseBreakdown(7.0, 0.0, 7.0, 1.0, 0)
    with pytest.raises(NoDecodeTokens):
        energy_per_decode_token(single)


def test_fit_perfect_line():
    # decode energies 2.0 + 0.01*(i-1) over ordinals i = 1..50
    decode = [2.0 + 0.01 * i for i in range(50)]
    energies = token_series([9.0] + decode)  # token 1 is prefill, ignored by the fit
    trend = fit_decoding_trend(energies)
    assert trend.slope_j_per_token == pytest.approx(0.01, rel=1e-9)
    assert trend.intercept_j == pytest.approx(2.0, rel=1e-9)
    assert trend.first_fit_j == pytest.approx(2.0, rel=1e-9)
    assert trend.r2 == pytest.approx(1.0, abs=1e-12)
    assert trend.n_points == 50


def test_fit_needs_two_decode_points():
    with pytest.raises(InsufficientPoints):
        fit_decoding_trend(token_series([5.0, 3.0]))  # only one decode token
    with pytest.raises(InsufficientPoints):
        fit_trend_points([2, 2, 2], [1.0, 1.1, 0.9])  # degenerate ordinals


def test_fit_excludes_estimated_by_default():
    decode = [2.0, 2.1, 50.0, 2.3, 2.4]
    flags = [False, False, False, True, False, False]
    energies = token_series([9.0] + decode, estimated=flags)
    trend = fit_decoding_trend(energies)
    assert trend.n_points == 4
    both = fit_decoding_trend(energies, include_estimated=True)
    assert both.n_points == 5
    assert both.slope_j_per_token != trend.slope_j_per_token


def test_constant_series_r2_is_one():
    trend = fit_decoding_trend(token_series([3.0] + [1.5] * 10))
    assert trend.slope_j_per_token == pytest.approx(0.0, abs=1e-12)
    assert trend.r2 == 1.0
    assert trend.growth_pct == pytest.approx(0.0, abs=1e-9)


@given(
    st.lists(st.floats(0.1, 100.0), min_size=3, max_size=60),
    st.integers(0, 10_000),
)
@settings(max_examples=60, deadline=None)
def test_ols_matches_closed_form(values, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.choice(np.arange(1, 1000), size=len(values), replace=False))
    trend = fit_trend_points(list(x), values)
    slope, b0 = ols_line(x, values)
    assert trend.slope_j_per_token == pytest.approx(slope, rel=1e-9, abs=1e-12)
    assert trend.intercept_j == pytest.approx(b0 + slope, rel=1e-9, abs=1e-12)


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_ols_residuals_orthogonal_to_regressor(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 200))
    x = np.arange(1, n + 1, dtype=float)
    y = rng.uniform(0.5, 20.0, size=n)
    trend = fit_trend_points(x, y)
    fitted = trend.intercept_j + trend.slope_j_per_token * (x - 1.0)
    r = y - fitted
    denom = np.linalg.norm(r) * np.linalg.norm(x) + 1e-30
    assert abs(float(r @ x)) / denom < 1e-6


def test_scaling_leaves_growth_and_r2_unchanged(rng):
    y = rng.uniform(1.0, 5.0, size=40)
    x = np.arange(1, 41)
    base = fit_trend_points(x, y)
    scaled = fit_trend_points(x, y * 7.25)
    assert scaled.slope_j_per_token == pytest.approx(base.slope_j_per_token * 7.25, rel=1e-9)
    assert scaled.intercept_j == pytest.approx(base.intercept_j * 7.25, rel=1e-9)
    assert scaled.growth_pct == pytest.approx(base.growth_pct, rel=1e-9)
    assert scaled.r2 == pytest.approx(base.r2, rel=1e-9)


def make_trend(intercept, slope=0.01, n=100):
    y = intercept + slope * np.arange(n, dtype=float)
    return fit_trend_points(np.arange(1, n + 1), y)


def test_amplification_paper_pairs():
    low = amplification(make_trend(4.54), make_trend(4.60))
    assert abs(low.amplification_pct - 1.3) <= 0.1
    high = amplification(make_trend(5.10), make_trend(7.74))
    assert abs(high.amplification_pct - 51.8) <= 0.2
    mid = amplification(make_trend(5.2), make_trend(7.74))
    assert abs(mid.amplification_pct - 48.8) <= 0.5


def test_amplification_identity_and_errors():
    t = make_trend(3.3)
    assert amplification(t, t).amplification_pct == 0.0
    y = -1.0 + 0.001 * np.arange(10, dtype=float)
    negative = fit_trend_points(np.arange(1, 11), y)
    with pytest.raises(NonPositiveIntercept):
        amplification(negative, t)


def test_detect_babbling_paper_examples():
    at_limit = detect_babbling([300] * 8, 300)
    assert at_limit.mean_budget_utilization == 1.0
    assert at_limit.is_babbler

    near_limit = detect_babbling([1989], 2000)
    assert near_limit.mean_budget_utilization == pytest.approx(0.9945)
    assert near_limit.is_babbler

    modest = detect_babbling([120], 300)
    assert modest.mean_budget_utilization == pytest.approx(0.40)
    assert not modest.is_babbler


@given(
    st.lists(st.integers(0, 400), min_size=1, max_size=30),
    st.floats(0.05, 1.0),
    st.floats(0.05, 1.0),
)
@settings(max_examples=100, deadline=None)
def test_detect_babbling_monotone_in_threshold(outputs, thr_a, thr_b):
    lo, hi = sorted((thr_a, thr_b))
    at_lo = detect_babbling(outputs, 300, threshold=lo)
    at_hi = detect_babbling(outputs, 300, threshold=hi)
    # raising the threshold never turns a non-babbler into a babbler
    assert not (at_hi.is_babbler and not at_lo.is_babbler)


def test_detect_babbling_caps_at_one():
    assert detect_babbling([450, 500], 300).mean_budget_utilization == 1.0


def row(trace_id, total, prefill=2.0, n_tokens=10, model="m", workload="0-shot"):
    decode = total - prefill
    breakdown = PhaseBreakdown(
        prefill_j=prefill,
        decode_j=decode,
        total_j=total,
        prefill_fraction=prefill / total,
        decode_token_count=n_tokens - 1,
    )
    per_tok = decode / (n_tokens - 1)
    ordinals = tuple(range(1, n_tokens))
    energies = tuple(per_tok for _ in ordinals)
    return TraceMetrics(
        trace_id=trace_id,
        model_name=model,
        workload=workload,
        breakdown=breakdown,
        trend=None,
        output_tokens=n_tokens,
        decode_ordinals=ordinals,
        decode_energies=energies,
    )


def test_aggregate_iqr_removes_extreme():
    rows = [row(f"t{i}", total) for i, total in enumerate([10.0, 11.0, 12.0, 100.0])]
    summary = aggregate_workload(rows, outlier_rule="iqr1.5")
    assert summary.n_outliers_removed == 1
    assert summary.n_traces == 3
    assert summary.total_j_mean == pytest.approx(11.0)


def test_aggregate_none_keeps_everything():
    rows = [row(f"t{i}", total) for i, total in enumerate([10.0, 11.0, 12.0, 100.0])]
    summary = aggregate_workload(rows, outlier_rule="none")
    assert summary.n_outliers_removed == 0
    assert summary.total_j_mean == pytest.approx(33.25)
    plain = np.array([10.0, 11.0, 12.0, 100.0])
    assert summary.total_j_std == pytest.approx(float(plain.std()))


def test_aggregate_single_trace_has_zero_std():
    summary = aggregate_workload([row("only", 20.0)], outlier_rule="iqr1.5")
    assert summary.n_traces == 1
    assert summary.total_j_std == 0.0
    assert summary.output_tokens_std == 0.0
    assert summary.total_j_mean == pytest.approx(20.0)


def test_iqr_mask_matches_independent_oracle(rng):
    for _ in range(100):
        n = int(rng.integers(3, 40))
        values = rng.uniform(0.0, 50.0, size=n)
        if rng.random() < 0.5:
            values[rng.integers(0, n)] *= 50.0
        got = iqr_outlier_mask(values).tolist()
        want = iqr_outliers(values)
        assert got == want


def test_aggregate_pooled_trend_refits_over_all_points():
    rows = []
    for i in range(3):
        base = row(f"t{i}", 30.0 + i)
        ordinals = tuple(range(1, 20))
        energies = tuple(2.0 + 0.05 * (o - 1) for o in ordinals)
        rows.append(
            TraceMetrics(
                trace_id=base.trace_id,
                model_name=base.model_name,
                workload=base.workload,
                breakdown=base.breakdown,
                trend=None,
                output_tokens=base.output_tokens,
                decode_ordinals=ordinals,
                decode_energies=energies,
            )
        )
    summary = aggregate_workload(rows, outlier_rule="none")
    assert summary.pooled_trend is not None
    assert summary.pooled_trend.n_points == 3 * 19
    assert summary.pooled_trend.slope_j_per_token == pytest.approx(0.05, rel=1e-9)
    assert summary.pooled_trend.intercept_j == pytest.approx(2.0, rel=1e-9)


def test_aggregate_input_validation():
    with pytest.raises(ValueError):
        aggregate_workload([], outlier_rule="none")
    with pytest.raises(ValueError):
        aggregate_workload([row("a", 1.0)], outlier_rule="mad")
    mixed = [row("a", 1.0, model="m1"), row("b", 2.0, model="m2")]
    with pytest.raises(ValueError):
        aggregate_workload(mixed)


def test_aggregate_all_nan_removed():
    bad = [row(f"t{i}", float("nan")) for i in range(3)]
    with pytest.raises(AllTracesRemoved):
        aggregate_workload(bad, outlier_rule="iqr1.5")


def test_aggregate_order_independent(rng):
    rows = [row(f"t{i}", float(v)) for i, v in enumerate(rng.uniform(5, 50, size=9))]
    forward = aggregate_workload(rows, outlier_rule="iqr1.5")
    backward = aggregate_workload(list(reversed(rows)), outlier_rule="iqr1.5")
    assert forward == backward
