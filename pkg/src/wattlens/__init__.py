"""wattlens: per-token GPU energy accounting for LLM inference.

Aligns a GPU power-sample stream with token-generation timestamps,
splits inference into prefill and decoding phases, fits decoding cost
trends, and evaluates test-driven early stopping of code generation.
"""

__version__ = "0.1.0"

from .alignment import assign_token_energies, split_phases
from .errors import WattlensError
from .metrics import (
    aggregate_workload,
    amplification,
    detect_babbling,
    energy_per_decode_token,
    energy_per_token,
    fit_decoding_trend,
    percent_increase,
)
from .model import (
    DecodingTrend,
    InferenceTrace,
    PhaseBreakdown,
    PowerSample,
    TokenEnergy,
    TokenEvent,
    TraceManifest,
    WorkloadSummary,
    validate_trace,
    validate_workload_set,
)
from .simulator import (
    GroundTruth,
    SyntheticModelConfig,
    generate_babbler_stream,
    generate_trace,
)
from .suppression import (
    SuppressionConfig,
    SuppressionSession,
    evaluate_corpus,
    on_token,
    run_suppressed_generation,
)
from .traceio import parse_trace, write_trace

__all__ = [
    "DecodingTrend",
    "GroundTruth",
    "InferenceTrace",
    "PhaseBreakdown",
    "PowerSample",
    "SuppressionConfig",
    "SuppressionSession",
    "SyntheticModelConfig",
    "TokenEnergy",
    "TokenEvent",
    "TraceManifest",
    "WattlensError",
    "WorkloadSummary",
    "aggregate_workload",
    "amplification",
    "assign_token_energies",
    "detect_babbling",
    "energy_per_decode_token",
    "energy_per_token",
    "evaluate_corpus",
    "fit_decoding_trend",
    "generate_babbler_stream",
    "generate_trace",
    "on_token",
    "parse_trace",
    "percent_increase",
    "run_suppressed_generation",
    "split_phases",
    "validate_trace",
    "validate_workload_set",
    "write_trace",
]
