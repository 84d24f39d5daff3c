"""Input checks shared by the estimator and the CLI."""
from __future__ import annotations

import os
from pathlib import Path


def check_project_root(X) -> Path:
    if not isinstance(X, (str, os.PathLike)):
        raise TypeError(f"expected a project directory path, got {type(X).__name__}")
    root = Path(X)
    if not root.is_dir():
        raise ValueError(f"project root {X} is not a directory")
    return root


def check_log_lines(X) -> tuple[list[str], bool]:
    """Accept log text, a text file object, or a sequence of lines (without newlines)."""
    if hasattr(X, "read"):
        X = X.read()
    if isinstance(X, bytes):
        X = X.decode("utf-8", errors="surrogateescape")
    if isinstance(X, str):
        if X == "":
            return [], False
        trailing = X.endswith("\n")
        return (X[:-1] if trailing else X).split("\n"), trailing
    try:
        lines = list(X)
    except TypeError:
        raise TypeError(f"expected log text or a sequence of lines, got {type(X).__name__}") from None
    for i, line in enumerate(lines):
        if not isinstance(line, str):
            raise TypeError(f"line {i + 1} is {type(line).__name__}, not str")
        if "\n" in line.rstrip("\n"):
            raise ValueError(f"line {i + 1} contains an embedded newline")
    return [line.rstrip("\n") for line in lines], False


def check_choice(name: str, value, choices) -> None:
    if value not in choices:
        raise ValueError(f"{name} must be one of {list(choices)}, got {value!r}")


def check_positive_int(name: str, value) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
