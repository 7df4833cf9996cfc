from __future__ import annotations

import numpy as np
import pytest

from wattlens.model import InferenceTrace, PowerSample, TokenEvent, TraceManifest


def make_trace(
    sample_ts,
    sample_ps,
    token_ts,
    gen_start_t: float = 0.0,
    trace_id: str = "t0",
    model_name: str = "test-model",
    workload: str = "custom",
    input_token_count: int = 10,
    max_new_tokens: int | None = None,
    token_texts=None,
) -> InferenceTrace:
    tokens = tuple(
        TokenEvent(
            index=i + 1,
            t=float(t),
            text=None if token_texts is None else token_texts[i],
        )
        for i, t in enumerate(token_ts)
    )
    samples = tuple(
        PowerSample(t=float(t), p=float(p)) for t, p in zip(sample_ts, sample_ps)
    )
    manifest = TraceManifest(
        trace_id=trace_id,
        model_name=model_name,
        workload=workload,
        input_token_count=input_token_count,
        gen_start_t=gen_start_t,
        max_new_tokens=max_new_tokens if max_new_tokens is not None else len(tokens),
        samples_path=f"{trace_id}.samples.ndjson",
        tokens_path=f"{trace_id}.tokens.ndjson",
    )
    return InferenceTrace(manifest=manifest, samples=samples, tokens=tokens)


def random_trace(rng: np.random.Generator, dyadic: bool = False, trace_id: str = "r0"):
    """A small random trace with irregular token spacing and sample jitter.

    With ``dyadic=True`` every timestamp is a multiple of 1/1024 so that
    adding integer shifts keeps float arithmetic exact.
    """
    n_tokens = int(rng.integers(3, 40))
    grid = 1.0 / 1024.0
    if dyadic:
        gaps = rng.integers(8, 512, size=n_tokens) * grid
        gen_start = float(rng.integers(0, 64) * grid)
    else:
        gaps = rng.uniform(0.01, 0.5, size=n_tokens)
        gen_start = float(rng.uniform(0.0, 1.0))
    token_ts = gen_start + np.cumsum(gaps)

    span = token_ts[-1] - gen_start
    n_samples = int(rng.integers(5, 300))
    if dyadic:
        max_step = max(2, int(span / grid) + 16)
        offsets = rng.choice(
            np.arange(1, max_step), size=min(n_samples, max_step - 1), replace=False
        )
        offsets = np.concatenate(([0], np.sort(offsets)))
        sample_ts = gen_start - 8 * grid + offsets * grid
        while sample_ts[-1] < token_ts[-1]:
            sample_ts = np.append(sample_ts, sample_ts[-1] + grid)
    else:
        sample_ts = np.sort(rng.uniform(gen_start - 0.5, token_ts[-1], size=n_samples))
        sample_ts[0] = min(sample_ts[0], gen_start)
        sample_ts[-1] = token_ts[-1] + float(rng.uniform(0.0, 0.1))
        sample_ts = np.unique(sample_ts)
    sample_ps = rng.uniform(10.0, 400.0, size=len(sample_ts))

    return make_trace(sample_ts, sample_ps, token_ts, gen_start_t=gen_start, trace_id=trace_id)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
