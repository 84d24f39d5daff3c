"""Precision and recall of redaction decisions against gold labels."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


class EvalInputError(ValueError):
    pass


@dataclass(frozen=True)
class GoldLabel:
    line_no: int
    slots: tuple[tuple[int, str, str], ...]

    def to_json(self) -> str:
        return json.dumps({"line": self.line_no, "slots": [list(s) for s in self.slots]})


@dataclass
class EvalResult:
    true_positives: int
    false_positives: int
    false_negatives: int
    line_tp: int = 0
    line_fp: int = 0
    line_fn: int = 0

    @property
    def precision(self) -> float:
        return ratio(self.true_positives, self.true_positives + self.false_positives)

    @property
    def recall(self) -> float:
        return ratio(self.true_positives, self.true_positives + self.false_negatives)

    @property
    def line_precision(self) -> float:
        return ratio(self.line_tp, self.line_tp + self.line_fp)

    @property
    def line_recall(self) -> float:
        return ratio(self.line_tp, self.line_tp + self.line_fn)

    def to_dict(self) -> dict:
        return {
            "value": {"tp": self.true_positives, "fp": self.false_positives, "fn": self.false_negatives,
                      "precision": self.precision, "recall": self.recall},
            "line": {"tp": self.line_tp, "fp": self.line_fp, "fn": self.line_fn,
                     "precision": self.line_precision, "recall": self.line_recall},
        }


def ratio(num: int, den: int) -> float:
    return 1.0 if den == 0 else num / den


def _items(labels) -> set[tuple[int, int, str, str]]:
    out = set()
    for g in labels:
        for slot, sid, attr in g.slots:
            out.add((g.line_no, slot, sid, attr))
    return out


def _check(labels, what, n_lines):
    seen = set()
    for g in labels:
        if g.line_no in seen:
            raise EvalInputError(f"{what}: line {g.line_no} appears twice")
        seen.add(g.line_no)
        if g.line_no < 1 or (n_lines is not None and g.line_no > n_lines):
            raise EvalInputError(f"{what}: line {g.line_no} is outside the log (1..{n_lines})")


def evaluate(predicted, gold, n_lines: int | None = None) -> EvalResult:
    """Compare decisions at (line, slot, source, attribute) granularity, with a line-level rollup.

    ``predicted`` is a list of GoldLabel-shaped decisions (or a mapping
    line -> [(slot, source, attribute)]); ``n_lines`` is the log length both
    refer to.
    """
    if isinstance(predicted, dict):
        predicted = [GoldLabel(k, tuple(v)) for k, v in sorted(predicted.items())]
    _check(predicted, "predicted", n_lines)
    _check(gold, "gold", n_lines)
    p, g = _items(predicted), _items(gold)
    pl = {x[0] for x in p}
    gl = {x[0] for x in g}
    return EvalResult(len(p & g), len(p - g), len(g - p), len(pl & gl), len(pl - gl), len(gl - pl))


def predictions_from_report(report) -> list[GoldLabel]:
    out = []
    for r in report.records:
        if r.predicted:
            out.append(GoldLabel(r.line_no, tuple(sorted(set(r.predicted)))))
    return out


def load_gold(path) -> list[GoldLabel]:
    labels = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            labels.append(GoldLabel(int(d["line"]), tuple((int(s), str(a), str(b)) for s, a, b in d["slots"])))
        except (ValueError, KeyError, TypeError) as exc:
            raise EvalInputError(f"{path}:{i}: bad gold record ({exc})") from None
    return labels


def save_gold(path, labels) -> None:
    text = "".join(g.to_json() + "\n" for g in sorted(labels, key=lambda g: g.line_no))
    Path(path).write_text(text, encoding="utf-8")
