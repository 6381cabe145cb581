"""Concept-pair datasets and the four baseline pair classifiers.

Every ordered concept pair becomes one row whose features are the two
embedding rows concatenated, labeled 1 when the prerequisite edge exists.
The classifiers are small self-contained implementations so the training
paths stay inspectable and seed-deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from . import container, kernels
from .embed import EmbeddingMatrix
from .graph import ConceptGraph

log = logging.getLogger(__name__)

KINDS = ("naive_bayes", "linear_svm", "logistic_regression", "random_forest")


@dataclass
class ClassifierConfig:
    l2: float = 1e-4
    epochs: int = 200
    learning_rate: float = 0.1
    n_trees: int = 100
    max_depth: int = 0  # 0 means unlimited
    min_leaf: int = 1
    var_floor: float = 1e-9

    def __post_init__(self):
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.epochs < 1 or self.n_trees < 1 or self.min_leaf < 1:
            raise ValueError("epochs, n_trees and min_leaf must be positive")
        if self.learning_rate <= 0 or self.var_floor <= 0:
            raise ValueError("learning_rate and var_floor must be positive")
        if self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {self.max_depth}")


@dataclass
class PairDataset:
    pairs: list[tuple[int, int]]
    features: np.ndarray
    labels: list[int]

    def __post_init__(self):
        if self.features.shape[0] != len(self.pairs) or len(self.labels) != len(self.pairs):
            raise ValueError("pairs, features and labels disagree on length")
        if any(lab not in (0, 1) for lab in self.labels):
            raise ValueError("labels must be 0 or 1")


@dataclass
class PairClassifier:
    """A trained classifier; params hold plain arrays so checkpoints stay npz."""

    kind: str
    config: ClassifierConfig
    seed: int
    n_features: int
    params: dict[str, np.ndarray]


def build_pair_dataset(X: EmbeddingMatrix, g: ConceptGraph) -> PairDataset:
    """All ordered concept pairs with prerequisite labels.

    Direction matters: (i, j) and (j, i) are separate rows, and only the
    pairs with an actual i -> j edge get label 1.
    """
    if X.X.shape[0] != g.n:
        raise ValueError(f"{X.X.shape[0]} embedding rows for {g.n} concepts")
    idx = np.arange(g.n)
    src = np.repeat(idx, g.n)
    tgt = np.tile(idx, g.n)
    keep = src != tgt
    src, tgt = src[keep], tgt[keep]
    adj = g.adjacency()
    return PairDataset(pairs=list(zip(src.tolist(), tgt.tolist())),
                       features=np.hstack((X.X[src], X.X[tgt])),
                       labels=adj[src, tgt].astype(int).tolist())


def oversample(ds: PairDataset, seed: int = 0) -> PairDataset:
    """Duplicate random positive rows until the classes balance, then shuffle."""
    labels = np.asarray(ds.labels)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("oversampling needs both classes")
    if pos.size > neg.size:
        raise ValueError(f"{pos.size} positives exceed {neg.size} negatives")
    rng = np.random.default_rng(seed)
    extra = rng.choice(pos, size=neg.size - pos.size, replace=True)
    order = np.concatenate((np.arange(labels.size), extra))
    rng.shuffle(order)
    return PairDataset(pairs=[ds.pairs[i] for i in order],
                       features=ds.features[order],
                       labels=[ds.labels[i] for i in order])


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss_and_grad(w: np.ndarray, b: float, X: np.ndarray,
                           y: np.ndarray, l2: float):
    """L2-regularized mean log-loss with its analytic gradient.

    Uses log(1 + e^z) - y*z so the loss never overflows for large margins.
    """
    z = X @ w + b
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z)) + 0.5 * l2 * float(w @ w)
    p = _sigmoid(z)
    dw = X.T @ (p - y) / X.shape[0] + l2 * w
    db = float(np.mean(p - y))
    return loss, dw, db


def _fit_naive_bayes(X, y, config, seed):
    log_prior = np.empty(2)
    mean = np.empty((2, X.shape[1]))
    var = np.empty((2, X.shape[1]))
    for c in (0, 1):
        rows = X[y == c]
        log_prior[c] = np.log(rows.shape[0] / X.shape[0])
        mean[c] = rows.mean(axis=0)
        # the floor keeps constant features from producing infinite densities
        var[c] = np.maximum(rows.var(axis=0), config.var_floor)
    return {"log_prior": log_prior, "mean": mean, "var": var}


def _fit_linear_svm(X, y, config, seed):
    sign = np.where(y == 1, 1.0, -1.0)
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(config.epochs):
        margin = sign * (X @ w + b)
        active = margin < 1.0
        dw = config.l2 * w - (sign[active, None] * X[active]).sum(axis=0) / X.shape[0]
        db = -sign[active].sum() / X.shape[0]
        w -= config.learning_rate * dw
        b -= config.learning_rate * db
    return {"w": w, "b": np.float64(b)}


def _fit_logistic_regression(X, y, config, seed):
    w = np.zeros(X.shape[1])
    b = 0.0
    yf = y.astype(np.float64)
    for _ in range(config.epochs):
        _, dw, db = logistic_loss_and_grad(w, b, X, yf, config.l2)
        w -= config.learning_rate * dw
        b -= config.learning_rate * db
    return {"w": w, "b": np.float64(b)}


def _grow_tree(X, y, idx, config, rng, n_cand):
    feat: list[int] = []
    thresh: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def add_leaf(rows):
        feat.append(-1)
        thresh.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        return len(feat) - 1

    def build(rows, depth):
        ys = y[rows]
        done = (ys.min() == ys.max() or rows.size < 2 * config.min_leaf
                or (config.max_depth and depth >= config.max_depth))
        if done:
            return add_leaf(rows)
        cand = np.sort(rng.choice(X.shape[1], size=n_cand, replace=False))
        sub = np.ascontiguousarray(X[np.ix_(rows, cand)])
        col, cut, _ = kernels.best_split(sub, ys, config.min_leaf)
        if col < 0:
            return add_leaf(rows)
        j = int(cand[col])
        node = len(feat)
        feat.append(j)
        thresh.append(float(cut))
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        goes_left = X[rows, j] <= cut
        left[node] = build(rows[goes_left], depth + 1)
        right[node] = build(rows[~goes_left], depth + 1)
        return node

    build(idx, 0)
    return (np.asarray(feat, np.int64), np.asarray(thresh, np.float64),
            np.asarray(left, np.int64), np.asarray(right, np.int64),
            np.asarray(value, np.float64))


def _fit_random_forest(X, y, config, seed):
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    n_cand = max(1, int(np.sqrt(X.shape[1])))
    trees = [_grow_tree(X, y, rng.integers(0, n, size=n), config, rng, n_cand)
             for _ in range(config.n_trees)]
    sizes = [t[0].size for t in trees]
    return {"tree_offsets": np.concatenate(([0], np.cumsum(sizes))).astype(np.int64),
            "node_feature": np.concatenate([t[0] for t in trees]),
            "node_threshold": np.concatenate([t[1] for t in trees]),
            "node_left": np.concatenate([t[2] for t in trees]),
            "node_right": np.concatenate([t[3] for t in trees]),
            "node_value": np.concatenate([t[4] for t in trees])}


_FITTERS = {"naive_bayes": _fit_naive_bayes,
            "linear_svm": _fit_linear_svm,
            "logistic_regression": _fit_logistic_regression,
            "random_forest": _fit_random_forest}


def train_classifier(kind: str, ds: PairDataset,
                     config: ClassifierConfig | None = None,
                     seed: int = 0) -> PairClassifier:
    """Fit one of the four baseline classifiers on a pair dataset."""
    if kind not in KINDS:
        raise ValueError(f"unknown classifier kind {kind!r}; expected one of {KINDS}")
    config = config if config is not None else ClassifierConfig()
    X = np.ascontiguousarray(ds.features, dtype=np.float64)
    y = np.asarray(ds.labels, dtype=np.int64)
    if not np.isfinite(X).all():
        raise ValueError("features contain non-finite values")
    if y.min() == y.max():
        raise ValueError("training needs both classes")
    params = _FITTERS[kind](X, y, config, seed)
    return PairClassifier(kind=kind, config=config, seed=seed,
                          n_features=X.shape[1], params=params)


def _nb_scores(clf, X):
    p = clf.params
    ll = np.empty((X.shape[0], 2))
    for c in (0, 1):
        var = p["var"][c]
        ll[:, c] = p["log_prior"][c] - 0.5 * np.sum(
            np.log(2.0 * np.pi * var) + (X - p["mean"][c]) ** 2 / var, axis=1)
    return np.exp(ll[:, 1] - np.logaddexp(ll[:, 0], ll[:, 1]))


def _forest_scores(clf, X):
    p = clf.params
    off = p["tree_offsets"]
    votes = np.zeros(X.shape[0])
    rows = np.arange(X.shape[0])
    for t in range(off.size - 1):
        feat = p["node_feature"][off[t]:off[t + 1]]
        cut = p["node_threshold"][off[t]:off[t + 1]]
        left = p["node_left"][off[t]:off[t + 1]]
        right = p["node_right"][off[t]:off[t + 1]]
        value = p["node_value"][off[t]:off[t + 1]]
        node = np.zeros(X.shape[0], dtype=np.int64)
        pending = feat[node] >= 0
        while pending.any():
            r = rows[pending]
            cur = node[r]
            goes_left = X[r, feat[cur]] <= cut[cur]
            node[r] = np.where(goes_left, left[cur], right[cur])
            pending = feat[node] >= 0
        votes += value[node] >= 0.5
    return votes / (off.size - 1)


def predict_pairs(clf: PairClassifier, features: np.ndarray):
    """Scores plus thresholded labels for a feature matrix.

    Scores are probabilities (or the vote fraction for forests) except for
    the SVM, whose score is the signed margin thresholded at zero.
    """
    X = np.ascontiguousarray(features, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != clf.n_features:
        raise ValueError(f"expected {clf.n_features} feature columns, got shape {X.shape}")
    if clf.kind == "naive_bayes":
        scores = _nb_scores(clf, X)
    elif clf.kind == "linear_svm":
        scores = X @ clf.params["w"] + float(clf.params["b"])
    elif clf.kind == "logistic_regression":
        scores = _sigmoid(X @ clf.params["w"] + float(clf.params["b"]))
    else:
        scores = _forest_scores(clf, X)
    cutoff = 0.0 if clf.kind == "linear_svm" else 0.5
    labels = (scores >= cutoff).astype(int)
    return labels.tolist(), scores.tolist()


def save_classifier(path, clf: PairClassifier) -> None:
    meta = {"kind": clf.kind, "seed": clf.seed, "n_features": clf.n_features,
            "config": asdict(clf.config)}
    container.save_checkpoint(path, "pair_classifier", meta, clf.params)


def load_classifier(path) -> PairClassifier:
    meta, arrays = container.load_checkpoint(path, "pair_classifier")
    return PairClassifier(kind=meta["kind"], config=ClassifierConfig(**meta["config"]),
                          seed=meta["seed"], n_features=meta["n_features"],
                          params=arrays)
