"""Confusion matrices, accuracy and the majority-class baseline."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts. Rows are the actual class, columns the predicted class,
    both ordered FALSE, TRUE."""

    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def total(self) -> int:
        return self.tn + self.fp + self.fn + self.tp

    def transpose(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.tn, self.fn, self.fp, self.tp)

    def render(self) -> str:
        cells = [str(v) for v in (self.tn, self.fp, self.fn, self.tp)]
        w = max(5, *(len(c) for c in cells))
        lines = [
            f"{'':<6} {'FALSE':>{w}} {'TRUE':>{w}}",
            f"{'FALSE':<6} {cells[0]:>{w}} {cells[1]:>{w}}",
            f"{'TRUE':<6} {cells[2]:>{w}} {cells[3]:>{w}}",
        ]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        return f"actual,pred_FALSE,pred_TRUE\nFALSE,{self.tn},{self.fp}\nTRUE,{self.fn},{self.tp}\n"

    @classmethod
    def parse(cls, text: str) -> "ConfusionMatrix":
        """Inverse of :meth:`render` (also accepts the CSV export)."""
        counts = {}
        for line in text.strip().splitlines():
            parts = re.split(r"[\s,]+", line.strip())
            if parts[0] in ("FALSE", "TRUE") and len(parts) == 3:
                counts[parts[0]] = (int(parts[1]), int(parts[2]))
        if set(counts) != {"FALSE", "TRUE"}:
            raise ValueError("not a rendered confusion matrix")
        return cls(*counts["FALSE"], *counts["TRUE"])


def confusion(predicted: Sequence[bool], actual: Sequence[bool]) -> ConfusionMatrix:
    pred = np.asarray(predicted, dtype=bool)
    act = np.asarray(actual, dtype=bool)
    if pred.shape != act.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {act.size} labels")
    if pred.size == 0:
        raise ValueError("cannot build a confusion matrix from empty input")
    return ConfusionMatrix(
        tn=int(np.sum(~act & ~pred)),
        fp=int(np.sum(~act & pred)),
        fn=int(np.sum(act & ~pred)),
        tp=int(np.sum(act & pred)),
    )


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise ValueError("accuracy of an empty confusion matrix")
    return (cm.tn + cm.tp) / cm.total


def majority_baseline(actual: Sequence[bool]) -> float:
    act = np.asarray(actual, dtype=bool)
    if act.size == 0:
        raise ValueError("majority baseline of empty input")
    n_true = int(act.sum())
    return max(n_true, act.size - n_true) / act.size


def format_pct(fraction: float) -> str:
    """Percent to 4 significant digits, e.g. 0.757425 -> '75.74%'."""
    return f"{100 * fraction:.4g}%"


def report(name: str, cm: ConfusionMatrix, actual: Sequence[bool]) -> str:
    acc = accuracy(cm)
    base = majority_baseline(actual)
    return (
        f"{name}\n"
        f"{cm.render()}"
        f"accuracy: {cm.tn + cm.tp}/{cm.total} = {format_pct(acc)}\n"
        f"majority baseline: {format_pct(base)}\n"
    )
