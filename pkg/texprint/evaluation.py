"""
Stratified cross-validation, confusion matrices and precision/recall/F.

Out-of-fold predictions of all folds are pooled into one confusion matrix
before the metrics are computed. The fold-averaged weighted F-measure is
recorded next to the pooled one.
"""

from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence, Union

import numpy as np
from prefect.logging import get_logger
from sklearn.metrics import confusion_matrix

from texprint.dataset import Dataset, FoldAssignment, stratified_folds
from texprint.errors import EvaluationError
from texprint.learners import DISPLAY_NAMES, LEARNER_NAMES, predict_many, train_learner

logger = get_logger(__name__)


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[actual][predicted] over an ordered class list."""

    classes: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        n = len(self.classes)
        if counts.shape != (n, n):
            raise EvaluationError(f"Confusion counts must be {n}x{n}, got {counts.shape}")
        if np.any(counts < 0):
            raise EvaluationError("Confusion counts must be non-negative")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.classes != self.classes:
            raise EvaluationError("Cannot add confusion matrices over different classes")
        return ConfusionMatrix(self.classes, self.counts + other.counts)

    def to_dict(self) -> dict:
        return {"classes": list(self.classes), "counts": self.counts.tolist()}


@dataclass(frozen=True)
class ClassMetrics:
    label: str
    precision: float
    recall: float
    f_measure: float
    support: int


@dataclass(frozen=True)
class MetricSummary:
    per_class: tuple[ClassMetrics, ...]
    precision: float
    recall: float
    f_measure: float
    accuracy: float

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "accuracy": self.accuracy,
            "per_class": [vars(c) for c in self.per_class],
        }


@dataclass(frozen=True)
class LearnerSpec:
    name: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in LEARNER_NAMES:
            raise EvaluationError(
                f"Unknown learner {self.name!r}; choose from {list(LEARNER_NAMES)}"
            )

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES[self.name]


@dataclass(frozen=True)
class FoldResult:
    fold: int
    test_indices: tuple[int, ...]
    predictions: tuple[str, ...]
    train_size: int
    accuracy: float
    f_measure: float


@dataclass(frozen=True)
class EvalReport:
    learner: str
    display_name: str
    k: int
    seed: int
    params: dict[str, Any]
    confusion: ConfusionMatrix
    summary: MetricSummary
    folds: tuple[FoldResult, ...]
    fold_averaged_f_measure: float

    @property
    def precision(self) -> float:
        return self.summary.precision

    @property
    def recall(self) -> float:
        return self.summary.recall

    @property
    def f_measure(self) -> float:
        return self.summary.f_measure

    @property
    def accuracy(self) -> float:
        return self.summary.accuracy

    def to_dict(self) -> dict:
        return {
            "learner": self.learner,
            "classifier": self.display_name,
            "config": {"k": self.k, "seed": self.seed, "params": self.params},
            "pooled": self.summary.to_dict(),
            "fold_averaged_f_measure": self.fold_averaged_f_measure,
            "confusion": self.confusion.to_dict(),
            "folds": [
                {
                    "fold": f.fold,
                    "train_size": f.train_size,
                    "test_size": len(f.test_indices),
                    "accuracy": f.accuracy,
                    "f_measure": f.f_measure,
                }
                for f in self.folds
            ],
        }


def confusion(
    predictions: Sequence[str],
    truths: Sequence[str],
    classes: Sequence[str],
) -> ConfusionMatrix:
    predictions, truths, classes = list(predictions), list(truths), list(classes)
    if len(predictions) != len(truths):
        raise EvaluationError(
            f"{len(predictions)} predictions for {len(truths)} true labels"
        )
    known = set(classes)
    unknown = sorted({label for label in predictions + truths if label not in known})
    if unknown:
        raise EvaluationError(f"Label(s) {unknown} are not in the class list")
    if not truths:
        return ConfusionMatrix(tuple(classes), np.zeros((len(classes), len(classes))))
    return ConfusionMatrix(
        tuple(classes), confusion_matrix(truths, predictions, labels=classes)
    )


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    return np.divide(
        numerator,
        denominator,
        out=np.zeros_like(numerator, dtype=np.float64),
        where=denominator > 0,
    )


def metrics(cm: ConfusionMatrix) -> MetricSummary:
    """
    Per-class precision, recall and F, support-weighted averages and accuracy.
    Any zero denominator yields 0.
    """
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    support = counts.sum(axis=1)
    fn = support - tp

    precision = _safe_ratio(tp, tp + fp)
    recall = _safe_ratio(tp, tp + fn)
    f_measure = _safe_ratio(2 * precision * recall, precision + recall)

    total = support.sum()
    weights = support / total if total > 0 else np.zeros_like(support)
    per_class = tuple(
        ClassMetrics(label, float(p), float(r), float(f), int(s))
        for label, p, r, f, s in zip(cm.classes, precision, recall, f_measure, support)
    )
    return MetricSummary(
        per_class=per_class,
        precision=float((weights * precision).sum()),
        recall=float((weights * recall).sum()),
        f_measure=float((weights * f_measure).sum()),
        accuracy=float(tp.sum() / total) if total > 0 else 0.0,
    )


def _as_spec(learner: Union[str, LearnerSpec]) -> LearnerSpec:
    return learner if isinstance(learner, LearnerSpec) else LearnerSpec(learner)


def evaluate_fold(
    learner: Union[str, LearnerSpec],
    ds: Dataset,
    assignment: FoldAssignment,
    fold: int,
    seed: int,
) -> FoldResult:
    """Train on every other fold and predict this one."""
    spec = _as_spec(learner)
    train_idx = assignment.train_indices(fold)
    test_idx = assignment.test_indices(fold)
    model = train_learner(spec.name, ds.subset(train_idx), seed, **spec.params)

    test = ds.subset(test_idx)
    predictions = predict_many(model, test.X) if len(test) else []
    truths = [instance.label for instance in test.instances]
    summary = metrics(confusion(predictions, truths, ds.classes))
    return FoldResult(
        fold=fold,
        test_indices=tuple(int(i) for i in test_idx),
        predictions=tuple(predictions),
        train_size=int(len(train_idx)),
        accuracy=summary.accuracy,
        f_measure=summary.f_measure,
    )


def pool_folds(
    learner: Union[str, LearnerSpec],
    ds: Dataset,
    assignment: FoldAssignment,
    fold_results: Iterable[FoldResult],
) -> EvalReport:
    """Assemble per-fold results, by fold index, into one report."""
    spec = _as_spec(learner)
    results = tuple(sorted(fold_results, key=lambda r: r.fold))
    if [r.fold for r in results] != list(range(assignment.k)):
        raise EvaluationError(
            f"Expected results for folds 0..{assignment.k - 1}, got {[r.fold for r in results]}"
        )

    predicted: list[Optional[str]] = [None] * len(ds)
    for result in results:
        for index, label in zip(result.test_indices, result.predictions):
            if predicted[index] is not None:
                raise EvaluationError(f"Instance {index} was predicted by more than one fold")
            predicted[index] = label
    missing = [i for i, label in enumerate(predicted) if label is None]
    if missing:
        raise EvaluationError(f"Instances {missing} received no out-of-fold prediction")

    truths = [instance.label for instance in ds.instances]
    cm = confusion(predicted, truths, ds.classes)
    return EvalReport(
        learner=spec.name,
        display_name=spec.display_name,
        k=assignment.k,
        seed=assignment.seed,
        params=dict(spec.params),
        confusion=cm,
        summary=metrics(cm),
        folds=results,
        fold_averaged_f_measure=float(np.mean([r.f_measure for r in results])),
    )


def cross_validate(
    learner: Union[str, LearnerSpec],
    ds: Dataset,
    k: int = 10,
    seed: int = 1,
) -> EvalReport:
    """Stratified k-fold cross-validation with pooled out-of-fold predictions."""
    if len(ds) == 0:
        raise EvaluationError("Cannot cross-validate an empty dataset")
    if k < 2:
        raise EvaluationError(f"k must be >= 2, got {k}")
    spec = _as_spec(learner)
    assignment = stratified_folds(ds, k, seed)
    results = [evaluate_fold(spec, ds, assignment, fold, seed) for fold in range(k)]
    report = pool_folds(spec, ds, assignment, results)
    logger.info(
        f"{spec.display_name}: {k}-fold weighted F {report.f_measure:.3f}, "
        f"accuracy {report.accuracy:.3f}"
    )
    return report


def rank_reports(reports: Iterable[EvalReport]) -> list[EvalReport]:
    """Best weighted F-measure first; equal scores in learner-name order."""
    return sorted(reports, key=lambda r: (-r.f_measure, r.learner))
