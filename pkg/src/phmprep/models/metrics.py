"""Binary diagnostics metrics; degraded is the positive class.

false_healthy and false_degraded are normalized by the total sample count so
that accuracy + false_healthy + false_degraded == 1 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import EmptyInputError, LengthMismatchError


@dataclass
class EvalReport:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @property
    def false_healthy(self) -> float:
        return self.fn / self.total

    @property
    def false_degraded(self) -> float:
        return self.fp / self.total

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def identity_holds(self) -> bool:
        """accuracy + false_healthy + false_degraded == 1, in exact arithmetic."""
        total = self.total
        return (Fraction(self.tp + self.tn, total) + Fraction(self.fn, total)
                + Fraction(self.fp, total)) == 1

    def to_dict(self) -> dict:
        return {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn,
                "accuracy": self.accuracy, "false_healthy": self.false_healthy,
                "false_degraded": self.false_degraded, "recall": self.recall,
                "f1": self.f1}


def evaluate(predicted, truth) -> EvalReport:
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if len(predicted) != len(truth):
        raise LengthMismatchError(f"{len(predicted)} vs {len(truth)}")
    if len(truth) == 0:
        raise EmptyInputError("cannot evaluate on empty vectors")
    tp = int(((predicted == 1) & (truth == 1)).sum())
    tn = int(((predicted == 0) & (truth == 0)).sum())
    fp = int(((predicted == 1) & (truth == 0)).sum())
    fn = int(((predicted == 0) & (truth == 1)).sum())
    return EvalReport(tp=tp, tn=tn, fp=fp, fn=fn)
