"""Shared classifier pieces: training reports and the output decision rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..preproc import TARGET_CODES, ClassLabel

# Tie-break preference when an output is equidistant from several codes.
_DECISION_ORDER = (ClassLabel.NORMAL, ClassLabel.AMPLIFICATION, ClassLabel.DIRECT_DOS)


@dataclass(frozen=True)
class TrainReport:
    final_mse: float
    epochs_run: int
    wall_time: float
    converged: bool
    mse_history: tuple[float, ...] = ()


def nearest_code_label(output) -> ClassLabel:
    """Map a raw 3-vector output to the class with the nearest target code.

    Ties break Normal, then Amplification, then DirectDoS.
    """
    out = np.asarray(output, dtype=float)
    best_label = _DECISION_ORDER[0]
    best_d2 = float("inf")
    for label in _DECISION_ORDER:
        code = np.array(TARGET_CODES[label])
        d2 = float(np.sum((out - code) ** 2))
        if d2 < best_d2:
            best_d2 = d2
            best_label = label
    return best_label
