"""Binary classification metrics from (true label, predicted label) pairs."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence


class MetricsError(ValueError):
    """Raised for empty input, unknown labels, or a missing positive class."""


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 tally with the positive class fixed by label.

    ``tp`` counts positives predicted positive, ``fn`` positives predicted
    negative, ``fp`` negatives predicted positive, ``tn`` the rest.
    """

    positive_label: str
    negative_label: str
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class EvaluationReport:
    """Headline metrics plus the matrix they derive from.

    ``degenerate`` flags that at least one metric had a zero denominator
    and was reported as 0.0 by convention.
    """

    matrix: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    macro_f1: float
    degenerate: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float, bool]:
    """Precision, recall, f1 with zero denominators reported as 0.0."""
    degenerate = False
    if tp + fp == 0:
        precision, degenerate = 0.0, True
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall, degenerate = 0.0, True
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1, degenerate = 0.0, True
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1, degenerate


def score(
    pairs: Sequence[tuple[str, str]],
    positive_label: str,
    negative_label: str | None = None,
) -> EvaluationReport:
    """Score a batch of (true, predicted) label pairs.

    Exactly two classes are in play: ``positive_label`` and one negative
    label, inferred from the data when not given.  A label outside that set
    raises :class:`MetricsError`.
    """
    if not pairs:
        raise MetricsError("cannot score an empty list of label pairs")
    seen = {lab for pair in pairs for lab in pair}
    if negative_label is None:
        others = sorted(seen - {positive_label})
        if len(others) > 1:
            if positive_label not in seen:
                raise MetricsError(
                    f"positive label {positive_label!r} not present; labels are {sorted(seen)}"
                )
            raise MetricsError(f"more than two labels present: {sorted(seen)}")
        negative_label = others[0] if others else ""
    allowed = {positive_label, negative_label}
    unknown = seen - allowed
    if unknown:
        raise MetricsError(f"unknown labels {sorted(unknown)}; expected one of {sorted(allowed)}")

    tp = fp = fn = tn = 0
    for true, pred in pairs:
        if true == positive_label:
            if pred == positive_label:
                tp += 1
            else:
                fn += 1
        else:
            if pred == positive_label:
                fp += 1
            else:
                tn += 1

    matrix = ConfusionMatrix(positive_label, negative_label, tp=tp, fp=fp, fn=fn, tn=tn)
    precision, recall, f1, deg_pos = _prf(tp, fp, fn)
    # Negative-class metrics for the macro average: swap roles.
    _, _, f1_neg, deg_neg = _prf(tn, fn, fp)
    accuracy = (tp + tn) / matrix.total
    return EvaluationReport(
        matrix=matrix,
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        macro_f1=(f1 + f1_neg) / 2.0,
        degenerate=deg_pos or deg_neg,
    )


def save_confusion_csv(matrix: ConfusionMatrix, path: str | Path) -> None:
    """Write the matrix as a labeled 2x2 CSV grid (rows true, columns predicted)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true\\predicted", matrix.positive_label, matrix.negative_label])
        writer.writerow([matrix.positive_label, matrix.tp, matrix.fn])
        writer.writerow([matrix.negative_label, matrix.fp, matrix.tn])


def save_report_json(report: EvaluationReport, path: str | Path, extra: dict | None = None) -> None:
    """Write an evaluation report (plus optional run metadata) as JSON."""
    payload = report.to_dict()
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
