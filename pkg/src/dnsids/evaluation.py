"""Confusion accounting, detection metrics, cross-validation, and reports.

The binarized view treats either attack class as the positive case: an
attack window predicted as the wrong attack class still counts as a true
positive there, but as a miss in that class's detection-rate row. Fold
results are pooled (counts summed, then metrics computed) because
per-fold attack counts can be tiny.

Metrics with a zero denominator are reported as absent, never as 0 or
100; absent values render as the "—" placeholder.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass

import numpy as np

from .errors import (DnsIdsError, Empty, InvalidWidth, LengthMismatch, TooFewSamples,
                     UndefinedMetric)
from .preproc import CLASS_INDEX, CLASS_ORDER, ClassLabel, LabeledDataset
from .seeding import derive_seed

ABSENT = "—"


@dataclass(frozen=True)
class ConfusionCounts:
    matrix: tuple[tuple[int, ...], ...]   # [true class][predicted class]
    tp: int   # attack predicted as (any) attack
    tn: int   # normal predicted normal
    fp: int   # normal predicted as attack
    fn: int   # attack predicted normal

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float | None
    dr_direct: float | None
    dr_amplification: float | None
    far: float | None


@dataclass(frozen=True)
class EvalEntry:
    classifier: str
    metrics: MetricSet                    # pooled over all held-out folds
    accuracy_3class: float | None
    confusion: ConfusionCounts
    fold_metrics: tuple[MetricSet, ...]
    train_time: float                     # wall seconds summed over folds
    train_mse: float | None = None
    test_mse: float | None = None


@dataclass(frozen=True)
class EvalReport:
    entries: tuple[EvalEntry, ...]
    dataset_fingerprint: str
    seed: int
    folds: int
    stratified: bool


def confusion(predictions, truth) -> ConfusionCounts:
    """Count per-class and binarized prediction outcomes."""
    predictions = list(predictions)
    truth = list(truth)
    if len(predictions) != len(truth):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(truth)} truths")
    if not predictions:
        raise Empty("no samples to score")
    matrix = [[0, 0, 0] for _ in range(3)]
    tp = tn = fp = fn = 0
    for t, p in zip(truth, predictions):
        matrix[CLASS_INDEX[t]][CLASS_INDEX[p]] += 1
        t_attack = t is not ClassLabel.NORMAL
        p_attack = p is not ClassLabel.NORMAL
        if t_attack and p_attack:
            tp += 1
        elif t_attack:
            fn += 1
        elif p_attack:
            fp += 1
        else:
            tn += 1
    return ConfusionCounts(tuple(tuple(row) for row in matrix), tp, tn, fp, fn)


def accuracy(c: ConfusionCounts) -> float:
    """Binarized accuracy percentage: (TP + TN) / all."""
    if c.total == 0:
        raise UndefinedMetric("no samples")
    return (c.tp + c.tn) / c.total * 100.0


def accuracy_3class(c: ConfusionCounts) -> float:
    total = sum(sum(row) for row in c.matrix)
    if total == 0:
        raise UndefinedMetric("no samples")
    correct = sum(c.matrix[i][i] for i in range(3))
    return correct / total * 100.0


def detection_rate(c: ConfusionCounts, label: ClassLabel) -> float:
    """Per-class recall percentage from that class's confusion row."""
    row = c.matrix[CLASS_INDEX[label]]
    row_total = sum(row)
    if row_total == 0:
        raise UndefinedMetric(f"no samples of class {label.value}")
    return row[CLASS_INDEX[label]] / row_total * 100.0


def far(c: ConfusionCounts) -> float:
    """False alarm rate percentage: FP / (FP + TN)."""
    if c.fp + c.tn == 0:
        raise UndefinedMetric("no normal samples")
    return c.fp / (c.fp + c.tn) * 100.0


def metrics_from_confusion(c: ConfusionCounts) -> MetricSet:
    """Compute all metrics, mapping undefined ones to None."""
    def optional(fn, *args):
        try:
            return fn(*args)
        except UndefinedMetric:
            return None

    return MetricSet(
        accuracy=optional(accuracy, c),
        dr_direct=optional(detection_rate, c, ClassLabel.DIRECT_DOS),
        dr_amplification=optional(detection_rate, c, ClassLabel.AMPLIFICATION),
        far=optional(far, c),
    )


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[int, ...], ...]
    stratified: bool


def kfold_split(data: LabeledDataset, k: int = 10, seed: int = 0) -> FoldPlan:
    """Deterministic stratified split into k folds of near-equal size.

    Stratification deals each class's shuffled samples round-robin so
    per-fold class counts differ from exact proportionality by at most
    one sample. When some class is too small for that (fewer than
    k / number-of-classes samples), the split falls back to a plain
    shuffled partition and flags it.
    """
    n = len(data)
    if n < k:
        raise TooFewSamples(f"need at least {k} samples, have {n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = np.random.default_rng(seed)
    labels = data.labels()
    by_class = {lbl: [i for i, l in enumerate(labels) if l is lbl]
                for lbl in CLASS_ORDER if lbl in labels}
    stratified = all(len(idx) * len(CLASS_ORDER) >= k for idx in by_class.values())

    folds: list[list[int]] = [[] for _ in range(k)]
    cursor = 0
    if stratified:
        for lbl in CLASS_ORDER:
            if lbl not in by_class:
                continue
            indices = np.array(by_class[lbl])
            rng.shuffle(indices)
            for i in indices:
                folds[cursor % k].append(int(i))
                cursor += 1
    else:
        indices = np.arange(n)
        rng.shuffle(indices)
        for i in indices:
            folds[cursor % k].append(int(i))
            cursor += 1
    return FoldPlan(tuple(tuple(sorted(f)) for f in folds), stratified)


def dataset_fingerprint(text: str) -> str:
    """Short digest identifying the dataset a report was computed from."""
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def cross_validate(recipe, data: LabeledDataset, k: int = 10, seed: int = 0) -> EvalEntry:
    """Train on k-1 folds, score the held-out fold, pool all predictions.

    Fold membership derives from (seed, "kfold") and per-fold training
    seeds from (seed, recipe name, fold index), so repeated calls with
    the same arguments reproduce each other exactly.
    """
    plan = kfold_split(data, k, derive_seed(seed, "kfold"))
    all_preds: list[ClassLabel] = []
    all_truth: list[ClassLabel] = []
    fold_metrics = []
    train_time = 0.0
    train_mses = []
    test_sse = 0.0
    test_points = 0
    has_codes = hasattr(recipe, "predict_codes")

    for fold_idx, held_out in enumerate(plan.folds):
        held_set = set(held_out)
        train_idx = [i for i in range(len(data)) if i not in held_set]
        train_set = data.subset(train_idx)
        test_set = data.subset(held_out)
        try:
            model, report = recipe.train(train_set,
                                         derive_seed(seed, recipe.name, fold_idx))
        except DnsIdsError as exc:
            raise type(exc)(f"fold {fold_idx}: {exc}") from exc
        train_time += report.wall_time
        train_mses.append(report.final_mse)

        preds = [recipe.classify(model, fv) for fv, _ in test_set.samples]
        truth = test_set.labels()
        all_preds.extend(preds)
        all_truth.extend(truth)
        fold_metrics.append(metrics_from_confusion(confusion(preds, truth)))

        if has_codes:
            codes = recipe.predict_codes(model, test_set.features())
            test_sse += float(np.sum((codes - test_set.targets()) ** 2))
            test_points += codes.size

    pooled = confusion(all_preds, all_truth)
    try:
        acc3 = accuracy_3class(pooled)
    except UndefinedMetric:
        acc3 = None
    return EvalEntry(
        classifier=recipe.name,
        metrics=metrics_from_confusion(pooled),
        accuracy_3class=acc3,
        confusion=pooled,
        fold_metrics=tuple(fold_metrics),
        train_time=train_time,
        train_mse=float(np.mean(train_mses)) if has_codes else None,
        test_mse=test_sse / test_points if has_codes and test_points else None,
    )


def fold_metric_mean(entry: EvalEntry) -> MetricSet:
    """Mean of each metric over the folds where it was defined."""
    def mean_of(name: str) -> float | None:
        values = [getattr(m, name) for m in entry.fold_metrics
                  if getattr(m, name) is not None]
        return float(np.mean(values)) if values else None

    return MetricSet(mean_of("accuracy"), mean_of("dr_direct"),
                     mean_of("dr_amplification"), mean_of("far"))


# --- hidden-width sweep ------------------------------------------------------

SWEEP_MIN_WIDTH = 3
SWEEP_MAX_WIDTH = 21


@dataclass(frozen=True)
class SweepRow:
    width: int
    metrics: MetricSet
    accuracy_3class: float | None
    train_mse: float | None
    test_mse: float | None


def sweep_hidden_neurons(data: LabeledDataset, widths, seed: int, *, k: int = 10,
                         train_config=None) -> tuple[SweepRow, ...]:
    """Cross-validate the feed-forward network at each hidden width."""
    from .classifiers.mlp import MlpTrainConfig
    from .classifiers.recipes import MlpRecipe

    widths = list(widths)
    for w in widths:
        if not SWEEP_MIN_WIDTH <= w <= SWEEP_MAX_WIDTH:
            raise InvalidWidth(
                f"sweep widths must be in {SWEEP_MIN_WIDTH}..{SWEEP_MAX_WIDTH}, got {w}")
    cfg = train_config or MlpTrainConfig()
    rows = []
    for w in widths:
        entry = cross_validate(MlpRecipe(hidden=w, train_config=cfg), data, k=k, seed=seed)
        rows.append(SweepRow(w, entry.metrics, entry.accuracy_3class,
                             entry.train_mse, entry.test_mse))
    return tuple(rows)


# --- rendering ---------------------------------------------------------------

REPORT_CSV_HEADER = ("classifier,training_time_sec,dr_direct,dr_amplification,"
                     "accuracy,far,accuracy_3class,folds")
SWEEP_CSV_HEADER = "width,dr_direct,dr_amp,accuracy,far,train_mse,test_mse"


def _fmt(value: float | None, spec: str) -> str:
    return ABSENT if value is None else format(value, spec)


def render_report(report: EvalReport, stable_times: bool = False) -> tuple[str, str]:
    """Render the comparison as (text table, CSV).

    With stable_times=True the CSV's time column is blanked so that the
    file is a pure function of config and seed; measured times then live
    only in the text table.
    """
    headers = ("classifier", "training_time_sec", "dr_direct_dos",
               "dr_amplification", "accuracy", "far")
    text_rows = [headers]
    for e in report.entries:
        text_rows.append((
            e.classifier,
            _fmt(e.train_time, ".2f"),
            _fmt(e.metrics.dr_direct, ".2f"),
            _fmt(e.metrics.dr_amplification, ".2f"),
            _fmt(e.metrics.accuracy, ".2f"),
            _fmt(e.metrics.far, ".2f"),
        ))
    widths = [max(len(row[i]) for row in text_rows) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(text_rows):
        cells = [row[0].ljust(widths[0])] + [
            cell.rjust(widths[i]) for i, cell in enumerate(row) if i > 0]
        lines.append("  ".join(cells).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    text = "\n".join(lines) + "\n"

    csv_lines = [REPORT_CSV_HEADER]
    for e in report.entries:
        time_cell = ABSENT if stable_times else _fmt(e.train_time, ".2f")
        csv_lines.append(",".join([
            e.classifier,
            time_cell,
            _fmt(e.metrics.dr_direct, ".6f"),
            _fmt(e.metrics.dr_amplification, ".6f"),
            _fmt(e.metrics.accuracy, ".6f"),
            _fmt(e.metrics.far, ".6f"),
            _fmt(e.accuracy_3class, ".6f"),
            str(report.folds),
        ]))
    return text, "\n".join(csv_lines) + "\n"


def parse_report_csv(text: str) -> list[dict]:
    """Read back a rendered report CSV; absent cells come back as None."""
    rows = []
    saw_header = False
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        if not saw_header:
            saw_header = True
            continue
        cells = line.split(",")
        keys = REPORT_CSV_HEADER.split(",")
        row = dict(zip(keys, cells))
        for key in ("training_time_sec", "dr_direct", "dr_amplification",
                    "accuracy", "far", "accuracy_3class"):
            row[key] = None if row[key] == ABSENT else float(row[key])
        row["folds"] = int(row["folds"])
        rows.append(row)
    return rows


def render_sweep_csv(rows) -> str:
    lines = [SWEEP_CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r.width),
            _fmt(r.metrics.dr_direct, ".6f"),
            _fmt(r.metrics.dr_amplification, ".6f"),
            _fmt(r.metrics.accuracy, ".6f"),
            _fmt(r.metrics.far, ".6f"),
            _fmt(r.train_mse, ".6e"),
            _fmt(r.test_mse, ".6e"),
        ]))
    return "\n".join(lines) + "\n"
