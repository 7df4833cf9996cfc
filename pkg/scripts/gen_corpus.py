#!/usr/bin/env python3
"""Regenerate the bundled scripted babbler corpus under corpus/babblers/.

Each task is a short correct function whose token stream keeps going
after the solution with comment/whitespace filler (or, for fenced tasks,
prose outside the code fence), padding well past a 1000-token budget.
The output is deterministic; run from the repository root.
"""

from __future__ import annotations

import json
from pathlib import Path

from wattlens.simulator import BABBLE_FILLERS
from wattlens.traceio import write_token_stream
from wattlens.model import TokenEvent

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "corpus" / "babblers"

STREAM_TOKENS = 1050
TOKEN_DURATION_S = 0.05

TEST_HEADER = '''\
import importlib.util
import sys


def load(path):
    spec = importlib.util.spec_from_file_location("candidate", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


mod = load(sys.argv[1])
'''

PROSE_FILLERS = (
    "The function above covers the general case.\n",
    "Additional edge cases behave the same way.\n",
    "\n",
    "You can adapt the signature if needed.\n",
    "No further changes are required.\n",
)

TASKS = [
    {
        "task_id": "add",
        "solution": "def add(a, b):\n    return a + b\n",
        "asserts": [
            "assert mod.add(2, 3) == 5",
            "assert mod.add(-4, 4) == 0",
            "assert mod.add(10, -3) == 7",
        ],
    },
    {
        "task_id": "factorial",
        "solution": (
            "def factorial(n):\n"
            "    result = 1\n"
            "    for i in range(2, n + 1):\n"
            "        result *= i\n"
            "    return result\n"
        ),
        "asserts": [
            "assert mod.factorial(0) == 1",
            "assert mod.factorial(5) == 120",
            "assert mod.factorial(7) == 5040",
        ],
    },
    {
        "task_id": "reverse_string",
        "solution": "def reverse_string(s):\n    return s[::-1]\n",
        "asserts": [
            "assert mod.reverse_string('abc') == 'cba'",
            "assert mod.reverse_string('') == ''",
            "assert mod.reverse_string('racecar') == 'racecar'",
        ],
    },
    {
        "task_id": "is_palindrome",
        "solution": (
            "def is_palindrome(s):\n"
            "    cleaned = s.lower()\n"
            "    return cleaned == cleaned[::-1]\n"
        ),
        "asserts": [
            "assert mod.is_palindrome('Level') is True",
            "assert mod.is_palindrome('python') is False",
            "assert mod.is_palindrome('') is True",
        ],
    },
    {
        "task_id": "gcd",
        "solution": (
            "def gcd(a, b):\n"
            "    while b:\n"
            "        a, b = b, a % b\n"
            "    return abs(a)\n"
        ),
        "asserts": [
            "assert mod.gcd(12, 18) == 6",
            "assert mod.gcd(7, 13) == 1",
            "assert mod.gcd(0, 5) == 5",
        ],
    },
    {
        "task_id": "max_of_list",
        "solution": (
            "def max_of_list(xs):\n"
            "    best = xs[0]\n"
            "    for x in xs[1:]:\n"
            "        if x > best:\n"
            "            best = x\n"
            "    return best\n"
        ),
        "asserts": [
            "assert mod.max_of_list([3, 1, 4, 1, 5]) == 5",
            "assert mod.max_of_list([-7, -2, -9]) == -2",
            "assert mod.max_of_list([42]) == 42",
        ],
    },
    {
        "task_id": "count_vowels",
        "solution": (
            "def count_vowels(s):\n"
            "    return sum(1 for ch in s.lower() if ch in 'aeiou')\n"
        ),
        "asserts": [
            "assert mod.count_vowels('banana') == 3",
            "assert mod.count_vowels('XYZ') == 0",
            "assert mod.count_vowels('Aeiou') == 5",
        ],
    },
    {
        "task_id": "clamp",
        "extraction_mode": "fenced",
        "solution": "def clamp(x, lo, hi):\n    return max(lo, min(x, hi))\n",
        "asserts": [
            "assert mod.clamp(5, 0, 10) == 5",
            "assert mod.clamp(-3, 0, 10) == 0",
            "assert mod.clamp(99, 0, 10) == 10",
        ],
    },
    {
        "task_id": "fib",
        "solution": (
            "def fib(n):\n"
            "    a, b = 0, 1\n"
            "    for _ in range(n):\n"
            "        a, b = b, a + b\n"
            "    return a\n"
        ),
        "asserts": [
            "assert mod.fib(0) == 0",
            "assert mod.fib(1) == 1",
            "assert mod.fib(10) == 55",
        ],
    },
    {
        "task_id": "sum_of_squares",
        "extraction_mode": "fenced",
        "solution": (
            "def sum_of_squares(n):\n"
            "    return sum(i * i for i in range(1, n + 1))\n"
        ),
        "asserts": [
            "assert mod.sum_of_squares(1) == 1",
            "assert mod.sum_of_squares(3) == 14",
            "assert mod.sum_of_squares(10) == 385",
        ],
    },
]


def tokenize(source: str, width: int = 4) -> list[str]:
    """Chop text into small pseudo-tokens; line ends stay inside a token."""
    tokens = []
    for line in source.splitlines(keepends=True):
        for i in range(0, len(line), width):
            tokens.append(line[i : i + width])
    return tokens


def task_texts(task: dict) -> list[str]:
    fenced = task.get("extraction_mode") == "fenced"
    if fenced:
        texts = ["Here is the solution:\n", "```python\n"]
        texts += tokenize(task["solution"])
        texts += ["```\n"]
        fillers = PROSE_FILLERS
    else:
        texts = tokenize(task["solution"])
        fillers = BABBLE_FILLERS
    i = 0
    while len(texts) < STREAM_TOKENS:
        texts.append(fillers[i % len(fillers)])
        i += 1
    return texts


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    entries = []
    for task in TASKS:
        texts = task_texts(task)
        events = [
            TokenEvent(index=k + 1, t=(k + 1) * TOKEN_DURATION_S, text=text, eos=False)
            for k, text in enumerate(texts)
        ]
        stream_name = f"{task['task_id']}.tokens.ndjson"
        tests_name = f"{task['task_id']}_tests.py"
        write_token_stream(events, OUT / stream_name)
        test_src = TEST_HEADER + "\n".join(task["asserts"]) + "\nsys.exit(0)\n"
        (OUT / tests_name).write_text(test_src, encoding="utf-8")
        entries.append(
            {
                "task_id": task["task_id"],
                "stream_path": stream_name,
                "tests_path": tests_name,
                "extraction_mode": task.get("extraction_mode", "raw"),
            }
        )
    (OUT / "corpus.json").write_text(
        json.dumps(entries, indent=2) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(entries)} tasks to {OUT}")


if __name__ == "__main__":
    main()
