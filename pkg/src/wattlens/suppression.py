"""Early halting of code generation once intermediate output passes its tests.

The controller watches the token stream from outside the model: after
each token that completes a line, the accumulated output is extracted,
parse-checked, and, only if it parses, run against the task's test
command. Generation halts the moment all tests pass; otherwise it runs
until the end-of-sequence token or the token budget. The model's own
sampling is never touched.

An end-of-line token is any token whose decoded text contains a newline
character, which stays robust to tokenizers that glue newlines onto
other characters. A coarser cadence (check every k-th token) trades
halt latency for fewer checks.
"""

from __future__ import annotations

import json
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import MalformedRecord, SessionAlreadyHalted
from .model import TokenEvent
from .traceio import read_token_stream
from .validators import CommandTestValidator, PythonSyntaxValidator, ValidatorVerdict

CADENCE_EVERY_LINE = "every-line"

EXTRACT_RAW = "raw"
EXTRACT_FENCED = "fenced"
EXTRACTION_MODES = (EXTRACT_RAW, EXTRACT_FENCED)

HALT_TESTS_PASSED = "tests-passed"
HALT_EOS = "eos"
HALT_BUDGET = "budget"

STATE_GENERATING = "generating"
STATE_HALTED = "halted"

CONTINUE = "continue"
HALT = "halt"

_EVERY_K_RE = re.compile(r"^every-k=(\d+)$")
# a fenced block, or an opening fence left unclosed by a mid-stream snapshot
_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)(?:```|\Z)", re.DOTALL)


@dataclass(frozen=True, slots=True)
class SuppressionConfig:
    max_new_tokens: int
    check_cadence: str = CADENCE_EVERY_LINE
    validator_timeout_s: float = 5.0
    code_extraction: str = EXTRACT_RAW

    def cadence_k(self) -> int | None:
        """None for the per-line cadence, otherwise the k of every-k=<k>."""
        if self.check_cadence == CADENCE_EVERY_LINE:
            return None
        m = _EVERY_K_RE.match(self.check_cadence)
        if not m or int(m.group(1)) < 1:
            raise ValueError(
                f"check_cadence must be 'every-line' or 'every-k=<n>', "
                f"got {self.check_cadence!r}"
            )
        return int(m.group(1))

    def validate(self) -> None:
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")
        if self.validator_timeout_s <= 0:
            raise ValueError("validator_timeout_s must be positive")
        if self.code_extraction not in EXTRACTION_MODES:
            raise ValueError(f"code_extraction must be one of {EXTRACTION_MODES}")
        self.cadence_k()


def extract_code(text: str, mode: str) -> str:
    """Pull the code region out of accumulated model output.

    Raw mode returns the text as-is. Fenced mode returns the body of the
    last fenced block; an opening fence that has not closed yet (the
    stream is mid-block) yields everything after it, and text with no
    fence yields an empty string.
    """
    if mode == EXTRACT_RAW:
        return text
    if mode == EXTRACT_FENCED:
        blocks = _FENCE_RE.findall(text)
        return blocks[-1] if blocks else ""
    raise ValueError(f"unknown extraction mode {mode!r}")


@dataclass(slots=True)
class SuppressionSession:
    """State of one suppressed generation; single-owner, strictly sequential."""

    config: SuppressionConfig
    accumulated_text: str = ""
    tokens_emitted: int = 0
    checks_run: int = 0
    test_runs: int = 0
    check_wall_time_s: float = 0.0
    state: str = STATE_GENERATING
    halt_reason: str | None = None
    last_verdict: ValidatorVerdict | None = None

    def _halt(self, reason: str) -> str:
        self.state = STATE_HALTED
        self.halt_reason = reason
        return HALT


def on_token(session: SuppressionSession, token: TokenEvent, syntax, tests) -> str:
    """Feed one token; returns "continue" or "halt".

    Order of precedence: an end-of-sequence token halts first, then the
    token budget, and only then does a cadence-triggered check run. The
    test validator is never consulted unless the syntax gate passed.
    """
    if session.state != STATE_GENERATING:
        raise SessionAlreadyHalted(f"session already halted ({session.halt_reason})")
    if token.text is None:
        raise ValueError(f"token {token.index} carries no text")

    session.accumulated_text += token.text
    session.tokens_emitted += 1

    if token.eos:
        return session._halt(HALT_EOS)
    if session.tokens_emitted >= session.config.max_new_tokens:
        return session._halt(HALT_BUDGET)

    k = session.config.cadence_k()
    fires = ("\n" in token.text) if k is None else (session.tokens_emitted % k == 0)
    if not fires:
        return CONTINUE

    code = extract_code(session.accumulated_text, session.config.code_extraction)
    start = time.perf_counter()
    syntax_ok, syntax_detail = syntax.check(code)
    syntax_elapsed = time.perf_counter() - start
    session.checks_run += 1
    session.check_wall_time_s += syntax_elapsed

    if not syntax_ok:
        session.last_verdict = ValidatorVerdict(
            syntactically_valid=False,
            tests_passed=False,
            elapsed_s=syntax_elapsed,
            detail=syntax_detail,
        )
        return CONTINUE

    passed, test_elapsed, test_detail = tests.run(code)
    session.test_runs += 1
    session.check_wall_time_s += test_elapsed
    session.last_verdict = ValidatorVerdict(
        syntactically_valid=True,
        tests_passed=passed,
        elapsed_s=syntax_elapsed + test_elapsed,
        detail=test_detail,
    )
    if passed:
        return session._halt(HALT_TESTS_PASSED)
    return CONTINUE


@dataclass(frozen=True, slots=True)
class SuppressionOutcome:
    final_text: str
    tokens_emitted: int
    halt_reason: str
    checks_run: int
    test_runs: int
    check_wall_time_s: float


def run_suppressed_generation(
    source: Iterable[TokenEvent],
    config: SuppressionConfig,
    syntax,
    tests,
) -> SuppressionOutcome:
    """Drive a session over a token source until it halts.

    The source can be a scripted replay, a simulator stream, or a live
    feed; a source that simply runs out of tokens counts as the model
    stopping itself (end-of-sequence). Deterministic given the token
    stream and the validator verdicts.
    """
    config.validate()
    session = SuppressionSession(config=config)
    for token in source:
        if on_token(session, token, syntax, tests) == HALT:
            break
    if session.state == STATE_GENERATING:
        session._halt(HALT_EOS)
    return SuppressionOutcome(
        final_text=session.accumulated_text,
        tokens_emitted=session.tokens_emitted,
        halt_reason=session.halt_reason or HALT_EOS,
        checks_run=session.checks_run,
        test_runs=session.test_runs,
        check_wall_time_s=session.check_wall_time_s,
    )


@dataclass(frozen=True, slots=True)
class CorpusTask:
    task_id: str
    tokens: tuple[TokenEvent, ...]
    tests_command: tuple[str, ...]
    extraction_mode: str = EXTRACT_RAW


@dataclass(frozen=True, slots=True)
class TaskOutcome:
    task_id: str
    baseline_tokens: int
    suppressed_tokens: int
    reduction_pct: float
    halt_reason: str
    checks_run: int
    test_runs: int
    check_wall_time_s: float
    baseline_passed: bool
    suppressed_passed: bool


@dataclass(frozen=True, slots=True)
class CorpusReport:
    tasks: tuple[TaskOutcome, ...]
    mean_baseline_tokens: float
    mean_suppressed_tokens: float
    reduction_pct: float
    baseline_pass_rate: float
    suppressed_pass_rate: float
    total_checks_run: int
    total_test_runs: int
    total_check_wall_time_s: float


def load_corpus(path: str | Path) -> list[CorpusTask]:
    """Read a corpus file: a JSON list of task descriptors.

    Each entry names a token-stream NDJSON file and a test program; both
    paths resolve relative to the corpus file. Tests run as
    ``python <tests_path> <candidate_path>``.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            entries = json.load(f)
    except json.JSONDecodeError as err:
        raise MalformedRecord(f"{path}: not valid JSON: {err}") from err
    if not isinstance(entries, list):
        raise MalformedRecord(f"{path}: corpus must be a JSON list")

    tasks = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise MalformedRecord(f"{path}: entry {i} is not an object")
        try:
            task_id = str(entry["task_id"])
            stream_path = path.parent / str(entry["stream_path"])
            tests_path = path.parent / str(entry["tests_path"])
        except KeyError as err:
            raise MalformedRecord(f"{path}: entry {i} missing key {err}") from err
        mode = str(entry.get("extraction_mode", EXTRACT_RAW))
        if mode not in EXTRACTION_MODES:
            raise MalformedRecord(f"{path}: entry {i} has unknown extraction_mode {mode!r}")
        if not tests_path.exists():
            raise MalformedRecord(f"{path}: entry {i} test program not found: {tests_path}")
        tasks.append(
            CorpusTask(
                task_id=task_id,
                tokens=read_token_stream(stream_path),
                tests_command=(sys.executable, str(tests_path)),
                extraction_mode=mode,
            )
        )
    return tasks


def replay_baseline(tokens: Sequence[TokenEvent], max_new_tokens: int) -> tuple[str, int]:
    """What the model would emit with no suppression: until eos or budget."""
    text = []
    emitted = 0
    for token in tokens:
        text.append(token.text or "")
        emitted += 1
        if token.eos or emitted >= max_new_tokens:
            break
    return "".join(text), emitted


def evaluate_corpus(tasks: Sequence[CorpusTask], config: SuppressionConfig) -> CorpusReport:
    """Run every task with and without suppression and compare.

    The suppressed pass verdict always comes from an independent re-run
    of the task's tests on the final extracted code, so a tests-passed
    halt is re-checked rather than trusted.
    """
    config.validate()
    syntax = PythonSyntaxValidator()
    outcomes = []
    for task in tasks:
        task_config = SuppressionConfig(
            max_new_tokens=config.max_new_tokens,
            check_cadence=config.check_cadence,
            validator_timeout_s=config.validator_timeout_s,
            code_extraction=task.extraction_mode,
        )
        tests = CommandTestValidator(
            list(task.tests_command), timeout_s=config.validator_timeout_s
        )

        baseline_text, baseline_tokens = replay_baseline(
            task.tokens, config.max_new_tokens
        )
        baseline_code = extract_code(baseline_text, task.extraction_mode)
        baseline_passed, base_elapsed, _ = tests.run(baseline_code)

        outcome = run_suppressed_generation(task.tokens, task_config, syntax, tests)
        final_code = extract_code(outcome.final_text, task.extraction_mode)
        suppressed_passed, recheck_elapsed, _ = tests.run(final_code)

        reduction = (
            100.0 * (baseline_tokens - outcome.tokens_emitted) / baseline_tokens
            if baseline_tokens > 0
            else 0.0
        )
        outcomes.append(
            TaskOutcome(
                task_id=task.task_id,
                baseline_tokens=baseline_tokens,
                suppressed_tokens=outcome.tokens_emitted,
                reduction_pct=reduction,
                halt_reason=outcome.halt_reason,
                checks_run=outcome.checks_run,
                test_runs=outcome.test_runs,
                check_wall_time_s=outcome.check_wall_time_s,
                baseline_passed=baseline_passed,
                suppressed_passed=suppressed_passed,
            )
        )

    n = len(outcomes)
    if n == 0:
        return CorpusReport(
            tasks=(),
            mean_baseline_tokens=0.0,
            mean_suppressed_tokens=0.0,
            reduction_pct=0.0,
            baseline_pass_rate=0.0,
            suppressed_pass_rate=0.0,
            total_checks_run=0,
            total_test_runs=0,
            total_check_wall_time_s=0.0,
        )
    mean_base = sum(o.baseline_tokens for o in outcomes) / n
    mean_sup = sum(o.suppressed_tokens for o in outcomes) / n
    return CorpusReport(
        tasks=tuple(outcomes),
        mean_baseline_tokens=mean_base,
        mean_suppressed_tokens=mean_sup,
        reduction_pct=100.0 * (1.0 - mean_sup / mean_base) if mean_base > 0 else 0.0,
        baseline_pass_rate=sum(o.baseline_passed for o in outcomes) / n,
        suppressed_pass_rate=sum(o.suppressed_passed for o in outcomes) / n,
        total_checks_run=sum(o.checks_run for o in outcomes),
        total_test_runs=sum(o.test_runs for o in outcomes),
        total_check_wall_time_s=sum(o.check_wall_time_s for o in outcomes),
    )
