import pytest

from wattlens.errors import (
    CoverageError,
    DuplicateTimestamp,
    EmptyTokenStream,
    MalformedRecord,
    NonMonotonicTimestamp,
)
from wattlens.model import (
    InferenceTrace,
    PowerSample,
    TokenEvent,
    validate_trace,
    validate_workload_set,
)

from conftest import make_trace


def valid_trace(trace_id="t0"):
    return make_trace(
        sample_ts=[0.0, 0.1, 0.2, 0.3, 0.4],
        sample_ps=[100, 100, 100, 100, 100],
        token_ts=[0.15, 0.35],
        trace_id=trace_id,
    )


def test_valid_trace_passes():
    validate_trace(valid_trace())


def test_validation_is_pure():
    trace = valid_trace()
    validate_trace(trace)
    validate_trace(trace)
    assert trace == valid_trace()


def test_nonmonotonic_token_timestamps():
    trace = valid_trace()
    tokens = (TokenEvent(1, 1.0), TokenEvent(2, 0.9))
    bad = InferenceTrace(trace.manifest, trace.samples, tokens)
    with pytest.raises(NonMonotonicTimestamp):
        validate_trace(bad)


def test_duplicate_token_timestamps():
    trace = valid_trace()
    tokens = (TokenEvent(1, 0.15), TokenEvent(2, 0.15))
    bad = InferenceTrace(trace.manifest, trace.samples, tokens)
    with pytest.raises(DuplicateTimestamp):
        validate_trace(bad)


def test_duplicate_sample_timestamps():
    trace = valid_trace()
    samples = (PowerSample(0.0, 100.0), PowerSample(0.1, 90.0), PowerSample(0.1, 80.0))
    bad = InferenceTrace(trace.manifest, samples, (TokenEvent(1, 0.05),))
    with pytest.raises(DuplicateTimestamp):
        validate_trace(bad)


def test_coverage_error_when_samples_end_early():
    trace = make_trace(
        sample_ts=[0.0, 2.0, 5.0],
        sample_ps=[100, 100, 100],
        token_ts=[1.0, 6.0],
    )
    with pytest.raises(CoverageError):
        validate_trace(trace)


def test_coverage_error_when_samples_start_late():
    trace = make_trace(
        sample_ts=[0.5, 2.0],
        sample_ps=[100, 100],
        token_ts=[1.0, 1.5],
    )
    with pytest.raises(CoverageError):
        validate_trace(trace)


def test_empty_token_stream():
    trace = valid_trace()
    bad = InferenceTrace(trace.manifest, trace.samples, ())
    with pytest.raises(EmptyTokenStream):
        validate_trace(bad)


def test_noncontiguous_indices():
    trace = valid_trace()
    tokens = (TokenEvent(1, 0.15), TokenEvent(3, 0.35))
    bad = InferenceTrace(trace.manifest, trace.samples, tokens)
    with pytest.raises(MalformedRecord):
        validate_trace(bad)


def test_eos_must_be_last():
    trace = valid_trace()
    tokens = (TokenEvent(1, 0.15, eos=True), TokenEvent(2, 0.35))
    bad = InferenceTrace(trace.manifest, trace.samples, tokens)
    with pytest.raises(MalformedRecord):
        validate_trace(bad)


def test_negative_power_rejected():
    trace = valid_trace()
    samples = (PowerSample(0.0, 100.0), PowerSample(0.2, -1.0), PowerSample(0.5, 100.0))
    bad = InferenceTrace(trace.manifest, samples, trace.tokens)
    with pytest.raises(MalformedRecord):
        validate_trace(bad)


def test_gen_start_must_precede_first_token():
    trace = make_trace(
        sample_ts=[0.0, 1.0],
        sample_ps=[100, 100],
        token_ts=[0.5],
        gen_start_t=0.5,
    )
    with pytest.raises(NonMonotonicTimestamp):
        validate_trace(trace)


def test_validate_workload_set_all_pass():
    report = validate_workload_set([valid_trace(f"t{i}") for i in range(3)])
    assert len(report) == 3
    assert all(r.ok for r in report)


def test_validate_workload_set_reports_failures():
    good = valid_trace("good")
    dup = InferenceTrace(
        good.manifest,
        good.samples,
        (TokenEvent(1, 0.15), TokenEvent(2, 0.15)),
    )
    report = validate_workload_set([good, valid_trace("good2"), dup])
    assert [r.ok for r in report] == [True, True, False]
    assert report[2].error == "DuplicateTimestamp"


def test_validate_workload_set_empty():
    assert validate_workload_set([]) == []
