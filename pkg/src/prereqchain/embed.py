"""Paragraph-vector embeddings (PV-DM) with negative sampling.

Training predicts each center word from the mean of its document vector
and surrounding word vectors. Concept phrases are embedded afterwards by
inference: a fresh document vector is optimized against the frozen word
and output weights.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import kernels
from .container import load_checkpoint, save_checkpoint
from .corpus import DocumentSet, tokenize


@dataclass
class EmbedConfig:
    dim: int = 300
    window: int = 5
    epochs: int = 20
    negative_samples: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    min_count: int = 2
    infer_steps: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.window <= 0:
            raise ValueError(f"window must be positive, got {self.window}")
        if self.epochs <= 0:
            raise ValueError(f"epochs must be positive, got {self.epochs}")
        if self.negative_samples < 0:
            raise ValueError("negative_samples must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.min_count < 0:
            raise ValueError("min_count must be non-negative")


@dataclass
class PvdmModel:
    word_vectors: np.ndarray    # |vocab| x d
    doc_vectors: np.ndarray     # |docs| x d
    output_weights: np.ndarray  # |vocab| x d
    vocab: dict[str, int]
    token_counts: np.ndarray    # occurrences per vocab index
    doc_ids: list[str]
    config: EmbedConfig
    epoch_losses: list[float] = field(default_factory=list)

    def __post_init__(self):
        d = self.config.dim
        for name in ("word_vectors", "doc_vectors", "output_weights"):
            m = getattr(self, name)
            if m.shape[1] != d:
                raise ValueError(f"{name} has {m.shape[1]} columns, config says {d}")
            if not np.isfinite(m).all():
                raise ValueError(f"{name} contains non-finite values")


@dataclass
class EmbeddingMatrix:
    concepts: list[str]
    X: np.ndarray

    def __post_init__(self):
        if self.X.shape[0] != len(self.concepts):
            raise ValueError(f"{len(self.concepts)} concepts but {self.X.shape[0]} rows")


def _negative_cdf(counts: np.ndarray) -> np.ndarray:
    # word2vec's flattened unigram distribution
    weights = counts.astype(np.float64) ** 0.75
    return np.cumsum(weights / weights.sum())


def _draw_negatives(rng, cdf: np.ndarray, n_positions: int, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((n_positions, 0), dtype=np.int64)
    return np.searchsorted(cdf, rng.random((n_positions, k))).astype(np.int64)


def _lr_schedule(cfg: EmbedConfig, total_steps: int) -> np.ndarray:
    steps = np.arange(total_steps, dtype=np.float64)
    alphas = cfg.learning_rate * (1.0 - steps / max(total_steps, 1))
    return np.maximum(alphas, cfg.min_learning_rate)


def train_pvdm(docset: DocumentSet, cfg: EmbedConfig | None = None) -> PvdmModel:
    """SGD training, sequential over positions; deterministic per seed."""
    cfg = cfg or EmbedConfig()
    if not docset.documents:
        raise ValueError("document set is empty")

    counts = Counter()
    for doc in docset.documents:
        counts.update(doc.tokens)
    kept = sorted((t for t, c in counts.items() if c >= cfg.min_count),
                  key=lambda t: (-counts[t], t))
    if not kept:
        raise ValueError(f"vocabulary is empty after min_count={cfg.min_count} filtering")
    vocab = {t: i for i, t in enumerate(kept)}
    token_counts = np.array([counts[t] for t in kept], dtype=np.int64)

    encoded = []
    bounds = [0]
    for doc in docset.documents:
        ids = [vocab[t] for t in doc.tokens if t in vocab]
        encoded.extend(ids)
        bounds.append(len(encoded))
    tokens = np.array(encoded, dtype=np.int64)
    doc_bounds = np.array(bounds, dtype=np.int64)
    if tokens.size == 0:
        raise ValueError("no in-vocabulary token positions to train on")

    rng = np.random.default_rng(cfg.seed)
    n_vocab, n_docs, d = len(kept), len(docset.documents), cfg.dim
    word_vectors = (rng.random((n_vocab, d)) - 0.5) / d
    doc_vectors = (rng.random((n_docs, d)) - 0.5) / d
    output_weights = np.zeros((n_vocab, d))

    cdf = _negative_cdf(token_counts)
    n_pos = tokens.shape[0]
    schedule = _lr_schedule(cfg, cfg.epochs * n_pos)

    losses = []
    for epoch in range(cfg.epochs):
        negatives = _draw_negatives(rng, cdf, n_pos, cfg.negative_samples)
        alphas = schedule[epoch * n_pos:(epoch + 1) * n_pos]
        loss = kernels.pvdm_epoch(tokens, doc_bounds, word_vectors, doc_vectors,
                                  output_weights, negatives, alphas,
                                  cfg.window, True)
        if not np.isfinite(loss):
            raise ArithmeticError(f"non-finite training loss at epoch {epoch}")
        losses.append(float(loss))

    return PvdmModel(word_vectors=word_vectors, doc_vectors=doc_vectors,
                     output_weights=output_weights, vocab=vocab,
                     token_counts=token_counts,
                     doc_ids=[doc.id for doc in docset.documents],
                     config=cfg, epoch_losses=losses)


def infer_embedding(model: PvdmModel, tokens: list[str], steps: int | None = None,
                    lr: float | None = None, seed: int | None = None) -> np.ndarray:
    """Optimize a fresh doc vector against frozen word/output weights.

    `steps` counts passes over the token list; 0 returns the seeded
    initialization unchanged.
    """
    cfg = model.config
    steps = cfg.infer_steps if steps is None else steps
    lr = cfg.learning_rate if lr is None else lr
    seed = cfg.seed if seed is None else seed

    ids = [model.vocab[t] for t in tokens if t in model.vocab]
    if not ids:
        raise ValueError(f"no in-vocabulary tokens in {tokens!r}")

    rng = np.random.default_rng(seed)
    vec = (rng.random((1, cfg.dim)) - 0.5) / cfg.dim
    if steps == 0:
        return vec[0]

    enc = np.array(ids, dtype=np.int64)
    doc_bounds = np.array([0, enc.shape[0]], dtype=np.int64)
    n_pos = enc.shape[0]
    total = steps * n_pos
    alphas_all = np.maximum(lr * (1.0 - np.arange(total) / total),
                            cfg.min_learning_rate)
    cdf = _negative_cdf(model.token_counts)
    for step in range(steps):
        negatives = _draw_negatives(rng, cdf, n_pos, cfg.negative_samples)
        kernels.pvdm_epoch(enc, doc_bounds, model.word_vectors, vec,
                           model.output_weights, negatives,
                           alphas_all[step * n_pos:(step + 1) * n_pos],
                           cfg.window, False)
    return vec[0]


def build_concept_matrix(model: PvdmModel, concepts: list[str]) -> EmbeddingMatrix:
    """Infer one row per concept phrase, in the order given."""
    rows = []
    for name in concepts:
        try:
            rows.append(infer_embedding(model, tokenize(name)))
        except ValueError as exc:
            raise ValueError(f"concept {name!r}: {exc}") from exc
    X = np.vstack(rows) if rows else np.zeros((0, model.config.dim))
    return EmbeddingMatrix(concepts=list(concepts), X=X)


def save_pvdm(model: PvdmModel, path: str | Path) -> None:
    meta = {
        "config": asdict(model.config),
        "tokens": sorted(model.vocab, key=model.vocab.get),
        "doc_ids": model.doc_ids,
        "epoch_losses": model.epoch_losses,
    }
    save_checkpoint(path, "pvdm", meta, {
        "word_vectors": model.word_vectors,
        "doc_vectors": model.doc_vectors,
        "output_weights": model.output_weights,
        "token_counts": model.token_counts,
    })


def load_pvdm(path: str | Path) -> PvdmModel:
    meta, arrays = load_checkpoint(path, "pvdm")
    cfg = EmbedConfig(**meta["config"])
    vocab = {t: i for i, t in enumerate(meta["tokens"])}
    return PvdmModel(word_vectors=arrays["word_vectors"],
                     doc_vectors=arrays["doc_vectors"],
                     output_weights=arrays["output_weights"],
                     vocab=vocab, token_counts=arrays["token_counts"],
                     doc_ids=list(meta["doc_ids"]), config=cfg,
                     epoch_losses=list(meta["epoch_losses"]))
