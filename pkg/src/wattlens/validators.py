"""Syntax and test validators for intermediate generated code.

The syntax gate is an in-process parse check: cheap enough to run on
every completed line. Test execution always happens out of process with
a hard timeout, because partially generated code can loop forever. A
timeout counts as a failed verdict, never as a crash.
"""

from __future__ import annotations

import ast
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True, slots=True)
class ValidatorVerdict:
    """Outcome of one check event; tests_passed implies syntactically_valid."""

    syntactically_valid: bool
    tests_passed: bool
    elapsed_s: float
    detail: str = ""


class PythonSyntaxValidator:
    """Parse-validity gate for candidate Python code."""

    def check(self, code: str) -> tuple[bool, str]:
        if not code.strip():
            return False, "no code to check"
        try:
            ast.parse(code)
        except SyntaxError as err:
            return False, f"syntax error: {err.msg} (line {err.lineno})"
        return True, ""


class CommandTestValidator:
    """Runs an external test command against a candidate code file.

    The candidate is written to a temporary file and the configured
    command is invoked with that path appended. Exit status 0 means the
    tests passed; any other status, or hitting the timeout, means fail.
    """

    def __init__(self, command: list[str], timeout_s: float = 5.0, suffix: str = ".py"):
        if timeout_s <= 0:
            raise ValueError("timeout_s must be positive")
        self.command = list(command)
        self.timeout_s = timeout_s
        self.suffix = suffix

    def run(self, code: str) -> tuple[bool, float, str]:
        start = time.perf_counter()
        with tempfile.TemporaryDirectory(prefix="wattlens-check-") as tmp:
            candidate = Path(tmp) / f"candidate{self.suffix}"
            candidate.write_text(code, encoding="utf-8")
            try:
                proc = subprocess.run(
                    self.command + [str(candidate)],
                    capture_output=True,
                    text=True,
                    timeout=self.timeout_s,
                )
            except subprocess.TimeoutExpired:
                return False, time.perf_counter() - start, (
                    f"timeout after {self.timeout_s}s"
                )
            except OSError as err:
                return False, time.perf_counter() - start, f"launch failed: {err}"
        elapsed = time.perf_counter() - start
        if proc.returncode == 0:
            return True, elapsed, ""
        tail = (proc.stderr or proc.stdout or "").strip().splitlines()
        detail = tail[-1] if tail else f"exit status {proc.returncode}"
        return False, elapsed, detail
