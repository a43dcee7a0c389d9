"""
Decision-tree learners on numeric attributes.

All five algorithms share one substrate: binary splits `value <= threshold`
at midpoints between consecutive distinct values, grown recursively from a
split chooser. They differ in how the chooser picks an attribute and in how
(and whether) the grown tree is pruned.

Class labels are handled as indices into the dataset's sorted class list, so
"argmax, first wins" always resolves ties to the lexicographically smallest
label.
"""

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Union

import graphviz
import numpy as np
from prefect.logging import get_logger
from scipy.stats import norm

from texprint.dataset import Dataset
from texprint.errors import LearnerError, ModelFormatError
from texprint.texture import FeatureVector

logger = get_logger(__name__)

LEARNER_NAMES = ("c45", "random_forest", "random_tree", "rep_tree", "stump")

DISPLAY_NAMES = {
    "c45": "J48",
    "random_forest": "Random Forest",
    "random_tree": "Random Tree",
    "rep_tree": "REP Tree",
    "stump": "Decision Stump",
}

MODEL_FORMAT = "texprint-tree-model"
MODEL_FORMAT_VERSION = 1

# gains closer than this are treated as equal so ties resolve by index
GAIN_EPSILON = 1e-12


@dataclass(frozen=True)
class SplitCandidate:
    attribute: int
    threshold: float
    gain: float
    gain_ratio: float = 0.0


@dataclass(frozen=True)
class Leaf:
    distribution: tuple[int, ...]

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.distribution))

    @property
    def size(self) -> int:
        return int(sum(self.distribution))


@dataclass(frozen=True)
class Split:
    split: SplitCandidate
    left: "TreeNode"
    right: "TreeNode"
    distribution: tuple[int, ...]

    @property
    def prediction(self) -> int:
        return int(np.argmax(self.distribution))


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeModel:
    algorithm: str
    attribute_names: tuple[str, ...]
    classes: tuple[str, ...]
    roots: tuple[TreeNode, ...]
    params: dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in LEARNER_NAMES:
            raise LearnerError(f"Unknown algorithm tag {self.algorithm!r}")
        if not self.roots:
            raise LearnerError("A model needs at least one tree")

    @property
    def n_trees(self) -> int:
        return len(self.roots)


@dataclass(frozen=True)
class Prediction:
    label: str
    scores: dict[str, float]


def entropy_of(counts: Sequence[float]) -> float:
    """Class entropy in bits; 0 log 0 is taken as 0."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=1)


def _split_info(n_left: float, n_right: float) -> float:
    return entropy_of([n_left, n_right])


def _best_threshold(
    values: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    min_leaf: int,
) -> Optional[tuple[float, float, float]]:
    """(gain, threshold, split info) of the best cut on one attribute, or None."""
    n = len(values)
    order = np.argsort(values, kind="stable")
    v = values[order]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y[order]] = 1.0

    cumulative = np.cumsum(onehot, axis=0)
    total = cumulative[-1]
    left = cumulative[:-1]
    right = total - left
    n_left = np.arange(1, n, dtype=np.float64)
    n_right = n - n_left

    valid = (v[1:] > v[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None

    parent = entropy_of(total)
    gains = parent - (n_left * _entropy_rows(left) + n_right * _entropy_rows(right)) / n
    gains = np.where(valid, gains, -np.inf)
    best_gain = gains.max()
    if best_gain <= GAIN_EPSILON:
        return None

    # lowest threshold among (numerically) tied cuts
    cut = int(np.flatnonzero(gains >= best_gain - GAIN_EPSILON)[0])
    threshold = (v[cut] + v[cut + 1]) / 2.0
    if not v[cut] <= threshold < v[cut + 1]:
        threshold = float(v[cut])
    return float(gains[cut]), float(threshold), _split_info(n_left[cut], n_right[cut])


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    attributes: Optional[Sequence[int]] = None,
    n_classes: Optional[int] = None,
    criterion: str = "gain",
    min_leaf: int = 1,
) -> Optional[SplitCandidate]:
    """
    Best binary split over the candidate attributes.

    With criterion "gain" the split with the highest information gain wins.
    With "gain_ratio" (C4.5) each attribute contributes its highest-gain cut,
    and the highest gain ratio wins among attributes whose gain is at least
    the average gain. Ties go to the lower attribute index, then the lower
    threshold. Returns None when no split has positive gain.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(y) < 2:
        return None
    if n_classes is None:
        n_classes = int(y.max()) + 1
    if attributes is None:
        attributes = range(X.shape[1])
    if criterion not in ("gain", "gain_ratio"):
        raise LearnerError(f"Unknown split criterion {criterion!r}")

    candidates = []
    for attribute in sorted(attributes):
        found = _best_threshold(X[:, attribute], y, n_classes, min_leaf)
        if found is None:
            continue
        gain, threshold, info = found
        ratio = gain / info if info > 0 else 0.0
        candidates.append(SplitCandidate(int(attribute), threshold, gain, ratio))

    if not candidates:
        return None

    if criterion == "gain":
        pool = candidates
        key = lambda c: c.gain  # noqa: E731
    else:
        mean_gain = sum(c.gain for c in candidates) / len(candidates)
        pool = [c for c in candidates if c.gain >= mean_gain - GAIN_EPSILON]
        key = lambda c: c.gain_ratio  # noqa: E731

    best = pool[0]
    for candidate in pool[1:]:
        if key(candidate) > key(best) + GAIN_EPSILON:
            best = candidate
    return best


SplitChooser = Callable[[np.ndarray, np.ndarray], Optional[SplitCandidate]]


def _counts(y: np.ndarray, n_classes: int) -> tuple[int, ...]:
    return tuple(int(c) for c in np.bincount(y, minlength=n_classes))


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    choose: SplitChooser,
    min_split: int = 2,
    max_depth: Optional[int] = None,
    depth: int = 0,
) -> TreeNode:
    distribution = _counts(y, n_classes)
    pure = sum(1 for c in distribution if c > 0) <= 1
    if pure or len(y) < min_split or (max_depth is not None and depth >= max_depth):
        return Leaf(distribution)

    split = choose(X, y)
    if split is None:
        return Leaf(distribution)

    mask = X[:, split.attribute] <= split.threshold
    return Split(
        split=split,
        left=_grow(X[mask], y[mask], n_classes, choose, min_split, max_depth, depth + 1),
        right=_grow(X[~mask], y[~mask], n_classes, choose, min_split, max_depth, depth + 1),
        distribution=distribution,
    )


def separating_cut(X: np.ndarray) -> Optional[SplitCandidate]:
    """
    Lowest-index attribute that takes more than one value, cut between its two
    smallest values. Used when no cut has positive gain; None when all rows
    are identical.
    """
    for attribute in range(X.shape[1]):
        values = np.unique(X[:, attribute])
        if len(values) > 1:
            threshold = (values[0] + values[1]) / 2.0
            if not values[0] <= threshold < values[1]:
                threshold = float(values[0])
            return SplitCandidate(attribute, float(threshold), 0.0, 0.0)
    return None


def _random_chooser(
    n_attributes: int,
    n_classes: int,
    k_features: int,
    rng: np.random.Generator,
) -> SplitChooser:
    """
    Evaluate k randomly drawn attributes; when none of them gives a positive
    gain, fall back to `separating_cut` so impure nodes keep splitting.
    """

    def choose(X: np.ndarray, y: np.ndarray) -> Optional[SplitCandidate]:
        attributes = rng.permutation(n_attributes)[:k_features]
        split = best_split(X, y, attributes, n_classes)
        return split if split is not None else separating_cut(X)

    return choose


def default_k_features(n_attributes: int) -> int:
    return int(math.floor(math.log2(n_attributes))) + 1 if n_attributes > 0 else 1


def _resolve_k_features(k_features: Optional[int], n_attributes: int) -> int:
    if k_features is None:
        return min(default_k_features(n_attributes), n_attributes)
    if k_features < 1:
        raise LearnerError(f"k_features must be >= 1, got {k_features}")
    if k_features > n_attributes:
        raise LearnerError(
            f"k_features = {k_features} exceeds the attribute count ({n_attributes})"
        )
    return k_features


def _check_trainable(ds: Dataset) -> None:
    if len(ds) == 0:
        raise LearnerError("Cannot train on an empty dataset")
    if not ds.attribute_names:
        raise LearnerError("Cannot train on a dataset without attributes")


def _model(ds: Dataset, algorithm: str, roots: Sequence[TreeNode], **kwargs) -> TreeModel:
    return TreeModel(
        algorithm=algorithm,
        attribute_names=tuple(ds.attribute_names),
        classes=tuple(ds.classes),
        roots=tuple(roots),
        **kwargs,
    )


def train_stump(ds: Dataset) -> TreeModel:
    """One split at the root, two leaves."""
    _check_trainable(ds)
    n_classes = len(ds.classes)
    root = _grow(
        ds.X, ds.y, n_classes,
        lambda X, y: best_split(X, y, n_classes=n_classes),
        max_depth=1,
    )
    return _model(ds, "stump", [root])


def _grow_random_tree(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    k_features: int,
    rng: np.random.Generator,
) -> TreeNode:
    chooser = _random_chooser(X.shape[1], n_classes, k_features, rng)
    return _grow(X, y, n_classes, chooser, min_split=2)


def train_random_tree(
    ds: Dataset,
    k_features: Optional[int] = None,
    seed: int = 1,
) -> TreeModel:
    """Unpruned tree, each node choosing among k randomly drawn attributes."""
    _check_trainable(ds)
    k = _resolve_k_features(k_features, len(ds.attribute_names))
    root = _grow_random_tree(ds.X, ds.y, len(ds.classes), k, np.random.default_rng(seed))
    return _model(ds, "random_tree", [root], params={"k_features": k}, seed=seed)


def _stratified_holdout(
    y: np.ndarray, fraction: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Split indices into (grow, prune) with every class dealt in proportion."""
    ordered = []
    for class_index in np.unique(y):
        members = np.flatnonzero(y == class_index)
        rng.shuffle(members)
        ordered.extend(members.tolist())
    positions = np.arange(len(ordered))
    held = np.floor((positions + 1) * fraction) > np.floor(positions * fraction)
    ordered = np.asarray(ordered, dtype=np.int64)
    return np.sort(ordered[~held]), np.sort(ordered[held])


def reduced_error_prune(node: TreeNode, X: np.ndarray, y: np.ndarray) -> TreeNode:
    """
    Bottom-up: replace a subtree by a leaf on its training distribution
    whenever that does not increase the error on (X, y).
    """
    pruned, _ = _reduced_error_prune(node, np.asarray(X, dtype=np.float64), np.asarray(y))
    return pruned


def _reduced_error_prune(node: TreeNode, X: np.ndarray, y: np.ndarray) -> tuple[TreeNode, int]:
    if isinstance(node, Leaf):
        return node, int(np.sum(y != node.prediction))

    mask = X[:, node.split.attribute] <= node.split.threshold
    left, left_errors = _reduced_error_prune(node.left, X[mask], y[mask])
    right, right_errors = _reduced_error_prune(node.right, X[~mask], y[~mask])
    subtree_errors = left_errors + right_errors

    leaf = Leaf(node.distribution)
    leaf_errors = int(np.sum(y != leaf.prediction))
    if leaf_errors <= subtree_errors:
        return leaf, leaf_errors
    return Split(node.split, left, right, node.distribution), subtree_errors


def train_rep_tree(
    ds: Dataset,
    pruning_fraction: float = 1 / 3,
    seed: int = 1,
    min_leaf: int = 2,
) -> TreeModel:
    """
    Gain-based tree grown on a stratified (1 - pruning_fraction) share of the
    data, then reduced-error pruned against the held-out share.
    """
    _check_trainable(ds)
    if not 0 < pruning_fraction < 1:
        raise LearnerError(f"pruning_fraction must lie in (0, 1), got {pruning_fraction}")
    X, y = ds.X, ds.y
    n_classes = len(ds.classes)
    grow_idx, prune_idx = _stratified_holdout(y, pruning_fraction, np.random.default_rng(seed))

    pruned = True
    if len(prune_idx) == 0 or len(grow_idx) == 0:
        logger.warning(
            f"Dataset of {len(ds)} instances is too small to hold out a pruning set; "
            "growing an unpruned tree"
        )
        grow_idx, pruned = np.arange(len(ds)), False

    chooser = lambda Xn, yn: best_split(Xn, yn, n_classes=n_classes, min_leaf=min_leaf)  # noqa: E731
    root = _grow(X[grow_idx], y[grow_idx], n_classes, chooser, min_split=2 * min_leaf)
    if pruned:
        root = reduced_error_prune(root, X[prune_idx], y[prune_idx])

    return _model(
        ds, "rep_tree", [root],
        params={"pruning_fraction": pruning_fraction, "min_leaf": min_leaf},
        seed=seed,
        metadata={
            "pruned": pruned,
            "grow_size": int(len(grow_idx)),
            "prune_size": int(len(prune_idx)) if pruned else 0,
        },
    )


def added_errors(n: float, errors: float, confidence: float) -> float:
    """
    Extra errors to add to `errors` observed among `n` instances so the total
    is the upper confidence bound of the error count (normal approximation).
    """
    if n <= 0:
        return 0.0
    if errors < 1:
        # exact binomial bound for zero errors, interpolated up to one error
        base = n * (1.0 - confidence ** (1.0 / n))
        if errors == 0:
            return base
        return base + errors * (added_errors(n, 1.0, confidence) - base)
    if errors + 0.5 >= n:
        return max(n - errors, 0.0)

    z = norm.ppf(1.0 - confidence)
    f = (errors + 0.5) / n
    upper = (
        f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))
    ) / (1 + z * z / n)
    return upper * n - errors


def _estimated_errors(distribution: Sequence[int], confidence: float) -> float:
    n = float(sum(distribution))
    errors = n - float(max(distribution))
    return errors + added_errors(n, errors, confidence)


def _pessimistic_prune(node: TreeNode, confidence: float) -> tuple[TreeNode, float]:
    as_leaf = _estimated_errors(node.distribution, confidence)
    if isinstance(node, Leaf):
        return node, as_leaf

    left, left_estimate = _pessimistic_prune(node.left, confidence)
    right, right_estimate = _pessimistic_prune(node.right, confidence)
    subtree = left_estimate + right_estimate
    if as_leaf <= subtree + GAIN_EPSILON:
        return Leaf(node.distribution), as_leaf
    return Split(node.split, left, right, node.distribution), subtree


def train_c45(ds: Dataset, confidence: float = 0.25, min_leaf: int = 2) -> TreeModel:
    """Gain-ratio tree with pessimistic error-based pruning; confidence >= 1 disables pruning."""
    _check_trainable(ds)
    if confidence <= 0:
        raise LearnerError(f"confidence must be positive, got {confidence}")
    if min_leaf < 1:
        raise LearnerError(f"min_leaf must be >= 1, got {min_leaf}")
    n_classes = len(ds.classes)
    chooser = lambda X, y: best_split(  # noqa: E731
        X, y, n_classes=n_classes, criterion="gain_ratio", min_leaf=min_leaf
    )
    root = _grow(ds.X, ds.y, n_classes, chooser, min_split=2 * min_leaf)
    pruned = confidence < 1.0
    if pruned:
        root, _ = _pessimistic_prune(root, confidence)
    return _model(
        ds, "c45", [root],
        params={"confidence": confidence, "min_leaf": min_leaf},
        metadata={"pruned": pruned},
    )


def bootstrap_indices(n: int, seed: int, tree: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, tree]))
    return rng.integers(0, n, size=n)


def train_random_forest(
    ds: Dataset,
    n_trees: int = 100,
    k_features: Optional[int] = None,
    seed: int = 1,
    bootstrap: bool = True,
) -> TreeModel:
    """
    Random trees on bootstrap samples. Tree t draws its attributes with seed
    `seed + t`, so a one-tree forest without bootstrap grows the same tree as
    the random tree (but still scores by votes).
    """
    _check_trainable(ds)
    if n_trees < 1:
        raise LearnerError(f"n_trees must be >= 1, got {n_trees}")
    k = _resolve_k_features(k_features, len(ds.attribute_names))
    X, y = ds.X, ds.y
    n_classes = len(ds.classes)

    roots = []
    for tree in range(n_trees):
        rows = bootstrap_indices(len(ds), seed, tree) if bootstrap else np.arange(len(ds))
        rng = np.random.default_rng(seed + tree)
        roots.append(_grow_random_tree(X[rows], y[rows], n_classes, k, rng))

    return _model(
        ds, "random_forest", roots,
        params={"n_trees": n_trees, "k_features": k, "bootstrap": bootstrap},
        seed=seed,
    )


def train_learner(name: str, ds: Dataset, seed: int, **params: Any) -> TreeModel:
    """Dispatch to the trainer registered under `name`."""
    if name not in TRAINERS:
        raise LearnerError(f"Unknown learner {name!r}; choose from {list(LEARNER_NAMES)}")
    return TRAINERS[name](ds, seed, **params)


TRAINERS: dict[str, Callable[..., TreeModel]] = {
    "stump": lambda ds, seed, **p: train_stump(ds),
    "random_tree": lambda ds, seed, **p: train_random_tree(ds, seed=seed, **p),
    "rep_tree": lambda ds, seed, **p: train_rep_tree(ds, seed=seed, **p),
    "c45": lambda ds, seed, **p: train_c45(ds, **p),
    "random_forest": lambda ds, seed, **p: train_random_forest(ds, seed=seed, **p),
}


def _route(node: TreeNode, x: np.ndarray) -> Leaf:
    while isinstance(node, Split):
        node = node.left if x[node.split.attribute] <= node.split.threshold else node.right
    return node


def _as_row(model: TreeModel, vector: Union[FeatureVector, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(vector, FeatureVector):
        if vector.names != model.attribute_names:
            raise LearnerError("Feature vector attributes do not match the model schema")
        row = np.asarray(vector.values, dtype=np.float64)
    else:
        row = np.asarray(vector, dtype=np.float64)
    if row.shape != (len(model.attribute_names),):
        raise LearnerError(
            f"Expected {len(model.attribute_names)} attribute values, got {row.size}"
        )
    if not np.all(np.isfinite(row)):
        raise LearnerError("Attribute values must be finite")
    return row


def predict(model: TreeModel, vector: Union[FeatureVector, Sequence[float], np.ndarray]) -> Prediction:
    """
    Class label and per-class scores. A tree scores by its leaf's class
    distribution, a forest by vote fractions, even with a single tree.
    """
    row = _as_row(model, vector)
    n_classes = len(model.classes)
    if model.algorithm != "random_forest":
        leaf = _route(model.roots[0], row)
        distribution = np.asarray(leaf.distribution, dtype=np.float64)
        total = distribution.sum()
        scores = distribution / total if total > 0 else distribution
        winner = leaf.prediction
    else:
        votes = np.zeros(n_classes)
        for root in model.roots:
            votes[_route(root, row).prediction] += 1
        scores = votes / model.n_trees
        winner = int(np.argmax(votes))
    return Prediction(
        label=model.classes[winner],
        scores={label: float(score) for label, score in zip(model.classes, scores)},
    )


def predict_many(model: TreeModel, X: np.ndarray) -> list[str]:
    return [predict(model, row).label for row in np.asarray(X, dtype=np.float64)]


def training_accuracy(model: TreeModel, ds: Dataset) -> float:
    predictions = predict_many(model, ds.X)
    truths = [instance.label for instance in ds.instances]
    return sum(p == t for p, t in zip(predictions, truths)) / len(truths)


def count_leaves(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return count_leaves(node.left) + count_leaves(node.right)


def _node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"leaf": list(node.distribution)}
    return {
        "attribute": node.split.attribute,
        "threshold": node.split.threshold,
        "gain": node.split.gain,
        "gain_ratio": node.split.gain_ratio,
        "distribution": list(node.distribution),
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(data: dict, n_classes: int, n_attributes: int) -> TreeNode:
    if "leaf" in data:
        distribution = tuple(int(c) for c in data["leaf"])
        if len(distribution) != n_classes:
            raise ModelFormatError("Leaf distribution does not match the class list")
        return Leaf(distribution)
    attribute = int(data["attribute"])
    if not 0 <= attribute < n_attributes:
        raise ModelFormatError(f"Split attribute {attribute} is out of range")
    return Split(
        split=SplitCandidate(
            attribute=attribute,
            threshold=float(data["threshold"]),
            gain=float(data["gain"]),
            gain_ratio=float(data["gain_ratio"]),
        ),
        left=_node_from_dict(data["left"], n_classes, n_attributes),
        right=_node_from_dict(data["right"], n_classes, n_attributes),
        distribution=tuple(int(c) for c in data["distribution"]),
    )


def model_to_dict(model: TreeModel) -> dict:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "algorithm": model.algorithm,
        "attribute_names": list(model.attribute_names),
        "classes": list(model.classes),
        "params": model.params,
        "seed": model.seed,
        "metadata": model.metadata,
        "trees": [_node_to_dict(root) for root in model.roots],
    }


def save_model(model: TreeModel, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f, indent=2, sort_keys=True)
    return path


def load_model(path: Path | str) -> TreeModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as e:
        raise ModelFormatError(f"Model file not found: {path}") from e
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelFormatError(f"Corrupt model file {path}: {e}") from e

    if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path} is not a texprint model file")
    if data.get("version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"Model format version {data.get('version')} is not supported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )

    try:
        attribute_names = tuple(data["attribute_names"])
        classes = tuple(data["classes"])
        roots = tuple(
            _node_from_dict(tree, len(classes), len(attribute_names)) for tree in data["trees"]
        )
        return TreeModel(
            algorithm=data["algorithm"],
            attribute_names=attribute_names,
            classes=classes,
            roots=roots,
            params=dict(data.get("params") or {}),
            seed=data.get("seed"),
            metadata=dict(data.get("metadata") or {}),
        )
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, LearnerError) as e:
        raise ModelFormatError(f"Corrupt model payload in {path}: {e}") from e


def export_dot(model: TreeModel, tree: int = 0) -> graphviz.Digraph:
    """Graphviz rendering of one tree of the model."""
    if not 0 <= tree < model.n_trees:
        raise LearnerError(f"Model has {model.n_trees} tree(s); no tree {tree}")

    dot = graphviz.Digraph(name=f"{model.algorithm}_{tree}")
    dot.attr("node", fontname="Helvetica", fontsize="10")
    counter = itertools.count()

    def add(node: TreeNode) -> str:
        node_id = f"n{next(counter)}"
        if isinstance(node, Leaf):
            dot.node(
                node_id,
                f"{model.classes[node.prediction]} ({node.size})",
                shape="box",
            )
            return node_id
        name = model.attribute_names[node.split.attribute]
        dot.node(node_id, name, shape="ellipse")
        dot.edge(node_id, add(node.left), label=f"<= {node.split.threshold:.6g}")
        dot.edge(node_id, add(node.right), label=f"> {node.split.threshold:.6g}")
        return node_id

    add(model.roots[tree])
    return dot


def save_dot(model: TreeModel, path: Path | str, tree: int = 0) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(export_dot(model, tree).source)
    return path
