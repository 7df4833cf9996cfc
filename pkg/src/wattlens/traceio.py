"""On-disk wire formats for traces.

Power stream: newline-delimited JSON, one ``{"t": <s>, "p": <W>}`` per line.
Token stream: newline-delimited JSON, ``{"i": <int>, "t": <s>, "text": <str|null>, "eos": <bool>}``.
Manifest: a single JSON document with the manifest fields plus ``format_version``.

All files are UTF-8. Unknown JSON keys are ignored so producers can add
fields without breaking older readers. Stream paths in the manifest are
resolved relative to the manifest's own directory.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .errors import MalformedRecord
from .model import (
    InferenceTrace,
    PowerSample,
    TokenEvent,
    TraceManifest,
    validate_trace,
)

FORMAT_VERSION = 1


def _iter_ndjson(path: Path):
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as err:
                raise MalformedRecord(f"{path}:{lineno}: not valid JSON: {err}") from err
            if not isinstance(obj, dict):
                raise MalformedRecord(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _require(obj: dict, key: str, path: Path, lineno: int | None = None):
    if key not in obj:
        where = f"{path}:{lineno}" if lineno is not None else str(path)
        raise MalformedRecord(f"{where}: missing required key {key!r}")
    return obj[key]


def read_power_stream(path: str | os.PathLike) -> tuple[PowerSample, ...]:
    path = Path(path)
    samples = []
    for lineno, obj in _iter_ndjson(path):
        try:
            t = float(_require(obj, "t", path, lineno))
            p = float(_require(obj, "p", path, lineno))
        except (TypeError, ValueError) as err:
            raise MalformedRecord(f"{path}:{lineno}: bad field type: {err}") from err
        samples.append(PowerSample(t=t, p=p))
    return tuple(samples)


def read_token_stream(path: str | os.PathLike) -> tuple[TokenEvent, ...]:
    path = Path(path)
    tokens = []
    for lineno, obj in _iter_ndjson(path):
        try:
            index = int(_require(obj, "i", path, lineno))
            t = float(_require(obj, "t", path, lineno))
        except (TypeError, ValueError) as err:
            raise MalformedRecord(f"{path}:{lineno}: bad field type: {err}") from err
        text = obj.get("text")
        if text is not None and not isinstance(text, str):
            raise MalformedRecord(f"{path}:{lineno}: 'text' must be a string or null")
        eos = bool(obj.get("eos", False))
        tokens.append(TokenEvent(index=index, t=t, text=text, eos=eos))
    return tuple(tokens)


def read_manifest(path: str | os.PathLike) -> TraceManifest:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
    except json.JSONDecodeError as err:
        raise MalformedRecord(f"{path}: not valid JSON: {err}") from err
    if not isinstance(obj, dict):
        raise MalformedRecord(f"{path}: manifest must be a JSON object")

    version = obj.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise MalformedRecord(f"{path}: unsupported format_version {version!r}")

    try:
        return TraceManifest(
            trace_id=str(_require(obj, "trace_id", path)),
            model_name=str(_require(obj, "model_name", path)),
            workload=str(_require(obj, "workload", path)),
            input_token_count=int(_require(obj, "input_token_count", path)),
            gen_start_t=float(_require(obj, "gen_start_t", path)),
            max_new_tokens=int(_require(obj, "max_new_tokens", path)),
            samples_path=str(_require(obj, "samples_path", path)),
            tokens_path=str(_require(obj, "tokens_path", path)),
            clock=str(obj.get("clock", "monotonic")),
        )
    except (TypeError, ValueError) as err:
        raise MalformedRecord(f"{path}: bad manifest field: {err}") from err


def parse_trace(manifest_path: str | os.PathLike) -> InferenceTrace:
    """Load and validate one trace from its manifest file.

    Raises MalformedRecord, NonMonotonicTimestamp, DuplicateTimestamp,
    CoverageError, or EmptyTokenStream on invalid input.
    """
    manifest_path = Path(manifest_path)
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    samples = read_power_stream(base / manifest.samples_path)
    tokens = read_token_stream(base / manifest.tokens_path)
    trace = InferenceTrace(manifest=manifest, samples=samples, tokens=tokens)
    validate_trace(trace)
    return trace


def write_power_stream(samples, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            f.write(json.dumps({"t": s.t, "p": s.p}) + "\n")


def write_token_stream(tokens, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for ev in tokens:
            f.write(
                json.dumps({"i": ev.index, "t": ev.t, "text": ev.text, "eos": ev.eos})
                + "\n"
            )


def manifest_to_dict(manifest: TraceManifest) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "trace_id": manifest.trace_id,
        "model_name": manifest.model_name,
        "workload": manifest.workload,
        "input_token_count": manifest.input_token_count,
        "gen_start_t": manifest.gen_start_t,
        "max_new_tokens": manifest.max_new_tokens,
        "samples_path": manifest.samples_path,
        "tokens_path": manifest.tokens_path,
        "clock": manifest.clock,
    }


def write_trace(trace: InferenceTrace, out_dir: str | os.PathLike) -> Path:
    """Write a trace's three files into ``out_dir``; returns the manifest path.

    File names derive from the trace id, and the manifest's stream paths
    are rewritten to those relative names so the directory is relocatable.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tid = trace.manifest.trace_id
    samples_name = f"{tid}.samples.ndjson"
    tokens_name = f"{tid}.tokens.ndjson"
    write_power_stream(trace.samples, out_dir / samples_name)
    write_token_stream(trace.tokens, out_dir / tokens_name)

    manifest = TraceManifest(
        trace_id=trace.manifest.trace_id,
        model_name=trace.manifest.model_name,
        workload=trace.manifest.workload,
        input_token_count=trace.manifest.input_token_count,
        gen_start_t=trace.manifest.gen_start_t,
        max_new_tokens=trace.manifest.max_new_tokens,
        samples_path=samples_name,
        tokens_path=tokens_name,
        clock=trace.manifest.clock,
    )
    manifest_path = out_dir / f"{tid}.manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest_to_dict(manifest), f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest_path
