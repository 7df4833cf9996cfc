"""Synthetic inference traces with known ground truth.

The energy model is deliberately simple: the prefill token costs a fixed
amount per input token, and decode token energy is linear in both input
length and decode ordinal, plus optional Gaussian noise. That is the
smallest family a regression-line analysis can be validated against; the
point is verifying the pipeline, not modeling a GPU.

Power synthesis places samples on a uniform grid and holds power
constant across each token interval at the level that reproduces the
token's target energy, so sample-mean alignment is exact by
construction. Levels get their mantissas truncated before being laid
down: sums of identical truncated values stay exact in float64, which
lets round-trip tests demand bit-exact recovery of the prefill energy.
The reported ground truth is the quantized energy actually embedded in
the trace, not the pre-quantization target.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InfeasibleSamplingWarning
from .model import InferenceTrace, PowerSample, TokenEvent, TraceManifest

_PRESET_DIR = Path(__file__).parent / "presets"

BABBLE_FILLERS = (
    "\n",
    "# example usage\n",
    "# test case\n",
    "    \n",
    "# print(result)\n",
)

_LEVEL_MANTISSA_BITS = 40


def _quantize(x: np.ndarray, bits: int = _LEVEL_MANTISSA_BITS) -> np.ndarray:
    """Round mantissas to ``bits`` bits.

    Float64 sums of up to 2**(53 - bits) copies of a quantized value are
    exact, so interval-mean recovery loses nothing to accumulation as
    long as no token interval holds more than ~8k samples. The induced
    level error (~5e-13 relative) is far below recovery tolerances.
    """
    mantissa, exponent = np.frexp(x)
    return np.ldexp(np.round(np.ldexp(mantissa, bits)), exponent - bits)


@dataclass(frozen=True, slots=True)
class SyntheticModelConfig:
    prefill_j_per_input_token: float
    decode_base_j: float
    input_amplification_j_per_input_token: float
    decode_slope_j_per_token: float
    noise_sigma_j: float
    token_duration_s: float
    sample_rate_hz: float
    babble_tail_tokens: int = 0
    rng_seed: int = 0

    def validate(self) -> None:
        for name in (
            "prefill_j_per_input_token",
            "decode_base_j",
            "input_amplification_j_per_input_token",
            "decode_slope_j_per_token",
            "noise_sigma_j",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.token_duration_s <= 0:
            raise ValueError("token_duration_s must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.babble_tail_tokens < 0:
            raise ValueError("babble_tail_tokens must be nonnegative")


@dataclass(frozen=True, slots=True)
class GroundTruth:
    """Recoverable parameters of one synthetic trace.

    ``prefill_j`` and ``token_energies_j`` are the quantized values laid
    down in the power stream (exact under sample-mean alignment);
    ``intercept_j`` and ``slope_j_per_token`` are the configured decode
    line before quantization and noise.
    """

    prefill_j: float
    intercept_j: float
    slope_j_per_token: float
    token_energies_j: tuple[float, ...]


def generate_trace(
    config: SyntheticModelConfig,
    input_tokens: int,
    output_tokens: int,
    trace_id: str = "synthetic",
    model_name: str = "sim-model",
    workload: str = "custom",
    max_new_tokens: int | None = None,
) -> tuple[InferenceTrace, GroundTruth]:
    """Synthesize one trace plus the ground truth it encodes."""
    config.validate()
    if input_tokens < 1:
        raise ValueError("input_tokens must be >= 1")
    if output_tokens < 1:
        raise ValueError("output_tokens must be >= 1")
    if max_new_tokens is None:
        max_new_tokens = output_tokens

    rng = np.random.default_rng(config.rng_seed)
    n = output_tokens
    d = config.token_duration_s
    bounds = d * np.arange(n + 1, dtype=np.float64)
    durations = np.diff(bounds)

    targets = np.empty(n, dtype=np.float64)
    targets[0] = config.prefill_j_per_input_token * input_tokens
    intercept = (
        config.decode_base_j
        + config.input_amplification_j_per_input_token * input_tokens
    )
    if n > 1:
        ordinals = np.arange(1, n, dtype=np.float64)
        targets[1:] = intercept + config.decode_slope_j_per_token * (ordinals - 1.0)
        if config.noise_sigma_j > 0:
            targets[1:] += rng.normal(0.0, config.noise_sigma_j, size=n - 1)

    levels = _quantize(np.maximum(targets / durations, 0.0))
    laid_down = levels * durations

    dt = 1.0 / config.sample_rate_hz
    if dt > config.token_duration_s:
        warnings.warn(
            f"sample period {dt:.4g}s exceeds token duration "
            f"{config.token_duration_s:.4g}s; some intervals will be estimated",
            InfeasibleSamplingWarning,
            stacklevel=2,
        )
    n_steps = int(np.ceil(bounds[-1] / dt))
    while n_steps * dt < bounds[-1]:
        n_steps += 1
    sample_t = dt * np.arange(n_steps + 1, dtype=np.float64)
    owner = np.clip(np.searchsorted(bounds, sample_t, side="left") - 1, 0, n - 1)
    sample_p = levels[owner]

    texts: list[str | None] = [None] * n
    if config.babble_tail_tokens > 0:
        tail = min(config.babble_tail_tokens, n - 1)
        for k in range(n - tail):
            texts[k] = f"x{k} = {k}\n"
        for k in range(n - tail, n):
            texts[k] = BABBLE_FILLERS[k % len(BABBLE_FILLERS)]

    tokens = tuple(
        TokenEvent(
            index=k + 1,
            t=float(bounds[k + 1]),
            text=texts[k],
            eos=(k == n - 1 and output_tokens < max_new_tokens),
        )
        for k in range(n)
    )
    samples = tuple(
        PowerSample(t=float(t), p=float(p)) for t, p in zip(sample_t, sample_p)
    )
    manifest = TraceManifest(
        trace_id=trace_id,
        model_name=model_name,
        workload=workload,
        input_token_count=input_tokens,
        gen_start_t=0.0,
        max_new_tokens=max_new_tokens,
        samples_path=f"{trace_id}.samples.ndjson",
        tokens_path=f"{trace_id}.tokens.ndjson",
    )
    trace = InferenceTrace(manifest=manifest, samples=samples, tokens=tokens)
    truth = GroundTruth(
        prefill_j=float(laid_down[0]),
        intercept_j=float(intercept),
        slope_j_per_token=float(config.decode_slope_j_per_token),
        token_energies_j=tuple(float(e) for e in laid_down),
    )
    return trace, truth


def generate_babbler_stream(
    solution_tokens: list[str],
    babble_tokens: int,
    budget: int,
    token_duration_s: float = 0.05,
    start_t: float = 0.0,
) -> list[TokenEvent]:
    """Scripted token stream: a solution followed by babble filler.

    Emits the solution, then comment/whitespace filler. When solution
    plus filler meets the budget, the stream simply runs out at the
    budget with no end-of-sequence marker (a babbler never stops
    itself); otherwise an empty end-of-sequence token is appended.
    """
    if not solution_tokens:
        raise ValueError("solution_tokens must be nonempty")
    if "\n" not in solution_tokens[-1]:
        raise ValueError("the last solution token must contain a newline")
    if babble_tokens < 0 or budget < 1:
        raise ValueError("babble_tokens must be >= 0 and budget >= 1")

    texts = list(solution_tokens)
    for i in range(babble_tokens):
        texts.append(BABBLE_FILLERS[i % len(BABBLE_FILLERS)])
    append_eos = len(texts) < budget
    texts = texts[:budget]
    if append_eos:
        texts.append("")

    events = []
    for k, text in enumerate(texts):
        events.append(
            TokenEvent(
                index=k + 1,
                t=start_t + (k + 1) * token_duration_s,
                text=text,
                eos=(append_eos and k == len(texts) - 1),
            )
        )
    return events


@dataclass(frozen=True, slots=True)
class Scenario:
    """A named simulation setup: model config plus workload shape."""

    name: str
    config: SyntheticModelConfig
    input_tokens: int
    output_tokens: int
    model_name: str
    workload: str
    max_new_tokens: int | None = None
    description: str = ""


def scenario_from_dict(obj: dict, name: str = "") -> Scenario:
    cfg = obj["config"]
    return Scenario(
        name=obj.get("name", name),
        config=SyntheticModelConfig(
            prefill_j_per_input_token=float(cfg["prefill_j_per_input_token"]),
            decode_base_j=float(cfg["decode_base_j"]),
            input_amplification_j_per_input_token=float(
                cfg["input_amplification_j_per_input_token"]
            ),
            decode_slope_j_per_token=float(cfg["decode_slope_j_per_token"]),
            noise_sigma_j=float(cfg["noise_sigma_j"]),
            token_duration_s=float(cfg["token_duration_s"]),
            sample_rate_hz=float(cfg["sample_rate_hz"]),
            babble_tail_tokens=int(cfg.get("babble_tail_tokens", 0)),
            rng_seed=int(cfg.get("rng_seed", 0)),
        ),
        input_tokens=int(obj["input_tokens"]),
        output_tokens=int(obj["output_tokens"]),
        model_name=str(obj.get("model_name", "sim-model")),
        workload=str(obj.get("workload", "custom")),
        max_new_tokens=(
            int(obj["max_new_tokens"]) if "max_new_tokens" in obj else None
        ),
        description=str(obj.get("description", "")),
    )


def list_presets() -> list[str]:
    return sorted(p.stem for p in _PRESET_DIR.glob("*.json"))


def load_preset(name: str) -> Scenario:
    path = _PRESET_DIR / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(
            f"unknown preset {name!r}; available: {', '.join(list_presets())}"
        )
    with open(path, encoding="utf-8") as f:
        return scenario_from_dict(json.load(f), name=name)


def load_scenario_file(path: str | Path) -> Scenario:
    path = Path(path)
    with open(path, encoding="utf-8") as f:
        return scenario_from_dict(json.load(f), name=path.stem)


def generate_scenario_trace(
    scenario: Scenario, index: int = 0, seed: int | None = None
) -> tuple[InferenceTrace, GroundTruth]:
    """One trace of a scenario; ``index`` derives the id and perturbs the seed."""
    base_seed = scenario.config.rng_seed if seed is None else seed
    config = SyntheticModelConfig(
        prefill_j_per_input_token=scenario.config.prefill_j_per_input_token,
        decode_base_j=scenario.config.decode_base_j,
        input_amplification_j_per_input_token=(
            scenario.config.input_amplification_j_per_input_token
        ),
        decode_slope_j_per_token=scenario.config.decode_slope_j_per_token,
        noise_sigma_j=scenario.config.noise_sigma_j,
        token_duration_s=scenario.config.token_duration_s,
        sample_rate_hz=scenario.config.sample_rate_hz,
        babble_tail_tokens=scenario.config.babble_tail_tokens,
        rng_seed=base_seed + index,
    )
    return generate_trace(
        config,
        input_tokens=scenario.input_tokens,
        output_tokens=scenario.output_tokens,
        trace_id=f"{scenario.name}-{index:03d}",
        model_name=scenario.model_name,
        workload=scenario.workload,
        max_new_tokens=scenario.max_new_tokens,
    )
