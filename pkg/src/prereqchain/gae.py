"""Graph autoencoders over the concept graph.

A two-layer GCN encoder feeds an inner-product decoder; the variational
variant learns a Gaussian posterior per concept and trains on the ELBO.
Gradients are derived by hand and checked against finite differences in
the tests, so the training path has no framework dependency.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import container
from .embed import EmbeddingMatrix
from .graph import ConceptGraph, normalized_adjacency

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 0.01
    h1: int = 32
    h2: int = 16
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    variational: bool = False
    pos_weight: float | None = None  # None: (#zero entries) / (#one entries)
    parallel_edge_weights: bool = False

    def __post_init__(self):
        if self.epochs < 1 or self.h1 < 1 or self.h2 < 1:
            raise ValueError("epochs and layer sizes must be positive")
        if self.learning_rate <= 0 or self.eps <= 0:
            raise ValueError("learning_rate and eps must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.pos_weight is not None and self.pos_weight <= 0:
            raise ValueError("pos_weight must be positive when given")


@dataclass
class GcnParams:
    W0: np.ndarray
    W1: np.ndarray | None = None
    W1_mu: np.ndarray | None = None
    W1_logsigma: np.ndarray | None = None


@dataclass
class LatentState:
    Z: np.ndarray
    mu: np.ndarray | None = None
    log_sigma: np.ndarray | None = None


@dataclass
class GraphAEModel:
    params: GcnParams
    config: TrainConfig
    a_norm: np.ndarray
    history: list[dict] = field(default_factory=list)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0) + np.log1p(np.exp(-np.abs(z)))


def reparameterize(mu: np.ndarray, log_sigma: np.ndarray,
                   noise: np.ndarray) -> np.ndarray:
    """Z = mu + exp(log_sigma) * noise, the usual Gaussian surrogate."""
    if mu.shape != log_sigma.shape or mu.shape != noise.shape:
        raise ValueError("mu, log_sigma and noise must share one shape")
    return mu + np.exp(log_sigma) * noise


def gcn_encode(X: np.ndarray, a_norm: np.ndarray, params: GcnParams,
               variational: bool = False, seed: int = 0) -> LatentState:
    """Two-layer GCN: hidden = ReLU(A X W0), output heads read A hidden.

    The variational head samples Z with seeded noise; the plain head is
    deterministic.
    """
    n = a_norm.shape[0]
    if X.shape[0] != n:
        raise ValueError(f"{X.shape[0]} feature rows for {n} vertices")
    if X.shape[1] != params.W0.shape[0]:
        raise ValueError(f"feature width {X.shape[1]} does not match "
                         f"W0 rows {params.W0.shape[0]}")
    h = np.maximum(a_norm @ X @ params.W0, 0.0)
    ah = a_norm @ h
    if not variational:
        return LatentState(Z=ah @ params.W1)
    mu = ah @ params.W1_mu
    log_sigma = ah @ params.W1_logsigma
    noise = np.random.default_rng(seed).standard_normal(mu.shape)
    return LatentState(Z=reparameterize(mu, log_sigma, noise),
                       mu=mu, log_sigma=log_sigma)


def decode_adjacency(Z: np.ndarray) -> np.ndarray:
    """Edge probabilities sigma(z_i . z_j); symmetric by construction."""
    return _sigmoid(Z @ Z.T)


def _bce_from_logits(logits, target, pos_weight):
    # pw * y * softplus(-s) + (1 - y) * softplus(s), averaged over n^2
    per = pos_weight * target * _softplus(-logits) + (1.0 - target) * _softplus(logits)
    return float(per.mean())


def reconstruction_loss(a_hat: np.ndarray, a_target: np.ndarray,
                        pos_weight: float = 1.0) -> float:
    """Weighted mean cross-entropy between predicted and target adjacency.

    a_hat must be strictly inside (0, 1): the entries are mapped back to
    logits so the loss stays finite near saturation.
    """
    if a_hat.shape != a_target.shape:
        raise ValueError(f"shape mismatch {a_hat.shape} vs {a_target.shape}")
    if np.any(a_hat <= 0.0) or np.any(a_hat >= 1.0):
        raise ValueError("predicted probabilities must lie strictly in (0, 1)")
    logits = np.log(a_hat) - np.log1p(-a_hat)
    return _bce_from_logits(logits, a_target, pos_weight)


def kl_divergence(mu: np.ndarray, log_sigma: np.ndarray) -> float:
    """KL from N(mu, diag(sigma^2)) to the standard normal prior, summed."""
    if mu.shape != log_sigma.shape:
        raise ValueError("mu and log_sigma must share one shape")
    return float(-0.5 * np.sum(1.0 + 2.0 * log_sigma - mu ** 2
                               - np.exp(2.0 * log_sigma)))


def elbo_loss_and_grads(Xf: np.ndarray, a_norm: np.ndarray,
                        a_target: np.ndarray, params: GcnParams,
                        pos_weight: float, variational: bool,
                        noise: np.ndarray | None = None):
    """Full-loss forward plus hand-derived gradients for every weight.

    Returns (total, recon, kl, grads) where grads maps field names of
    GcnParams to arrays. The KL term is scaled by 1/n so it does not
    drown the reconstruction term on larger graphs.
    """
    n = a_norm.shape[0]
    ax = a_norm @ Xf
    h_pre = ax @ params.W0
    h = np.maximum(h_pre, 0.0)
    ah = a_norm @ h

    if variational:
        mu = ah @ params.W1_mu
        log_sigma = ah @ params.W1_logsigma
        z = reparameterize(mu, log_sigma, noise)
        kl = kl_divergence(mu, log_sigma) / n
    else:
        z = ah @ params.W1
        kl = 0.0

    logits = z @ z.T
    recon = _bce_from_logits(logits, a_target, pos_weight)
    total = recon + kl

    p = _sigmoid(logits)
    g = ((1.0 - a_target) * p - pos_weight * a_target * (1.0 - p)) / a_target.size
    dz = (g + g.T) @ z

    grads: dict[str, np.ndarray] = {}
    if variational:
        dmu = dz + mu / n
        dlog_sigma = dz * noise * np.exp(log_sigma) + (np.exp(2.0 * log_sigma) - 1.0) / n
        grads["W1_mu"] = ah.T @ dmu
        grads["W1_logsigma"] = ah.T @ dlog_sigma
        dh = a_norm @ (dmu @ params.W1_mu.T + dlog_sigma @ params.W1_logsigma.T)
    else:
        grads["W1"] = ah.T @ dz
        dh = a_norm @ dz @ params.W1.T
    dh_pre = dh * (h_pre > 0.0)
    grads["W0"] = ax.T @ dh_pre
    return total, recon, kl, grads


def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _weighted_norm(a: np.ndarray) -> np.ndarray:
    # like normalized_adjacency but keeping integer edge multiplicities
    a = np.maximum(a, a.T) + np.eye(a.shape[0])
    inv = 1.0 / np.sqrt(a.sum(axis=1))
    return a * inv[:, None] * inv[None, :]


def train_graph_autoencoder(X: EmbeddingMatrix, g: ConceptGraph,
                            cfg: TrainConfig | None = None,
                            edge_weights: dict[tuple[int, int], int] | None = None,
                            ) -> GraphAEModel:
    """Full-batch Adam on the (variational) reconstruction objective.

    The adjacency is built from g's edges only, so callers withhold test
    edges by passing a graph restricted to the training split.
    """
    cfg = cfg if cfg is not None else TrainConfig()
    Xf = np.asarray(X.X, dtype=np.float64)
    if Xf.shape[0] != g.n:
        raise ValueError(f"{Xf.shape[0]} embedding rows for {g.n} concepts")
    if not g.edges:
        raise ValueError("training edge set is empty")

    adj = g.adjacency()
    if cfg.parallel_edge_weights and edge_weights:
        for (s, t), w in edge_weights.items():
            adj[s, t] = float(w)
        a_norm = _weighted_norm(adj)
    else:
        a_norm = normalized_adjacency(adj)
    a_target = np.clip(np.maximum(adj > 0, (adj > 0).T) + np.eye(g.n), 0.0, 1.0)

    ones = float(a_target.sum())
    pos_weight = cfg.pos_weight
    if pos_weight is None:
        pos_weight = (a_target.size - ones) / ones

    rng = np.random.default_rng(cfg.seed)
    d = Xf.shape[1]
    if cfg.variational:
        params = GcnParams(W0=_glorot(rng, d, cfg.h1),
                           W1_mu=_glorot(rng, cfg.h1, cfg.h2),
                           W1_logsigma=_glorot(rng, cfg.h1, cfg.h2))
        names = ("W0", "W1_mu", "W1_logsigma")
    else:
        params = GcnParams(W0=_glorot(rng, d, cfg.h1),
                           W1=_glorot(rng, cfg.h1, cfg.h2))
        names = ("W0", "W1")

    moment1 = {k: np.zeros_like(getattr(params, k)) for k in names}
    moment2 = {k: np.zeros_like(getattr(params, k)) for k in names}
    history: list[dict] = []
    for epoch in range(cfg.epochs):
        noise = rng.standard_normal((g.n, cfg.h2)) if cfg.variational else None
        total, recon, kl, grads = elbo_loss_and_grads(
            Xf, a_norm, a_target, params, pos_weight, cfg.variational, noise)
        if not np.isfinite(total):
            raise ArithmeticError(f"non-finite loss at epoch {epoch}")
        t = epoch + 1
        for k in names:
            gk = grads[k]
            moment1[k] = cfg.beta1 * moment1[k] + (1.0 - cfg.beta1) * gk
            moment2[k] = cfg.beta2 * moment2[k] + (1.0 - cfg.beta2) * gk * gk
            m_hat = moment1[k] / (1.0 - cfg.beta1 ** t)
            v_hat = moment2[k] / (1.0 - cfg.beta2 ** t)
            getattr(params, k)[...] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
        history.append({"epoch": epoch, "loss": float(total),
                        "recon": float(recon), "kl": float(kl)})
    return GraphAEModel(params=params, config=cfg, a_norm=a_norm, history=history)


def predict_links(model: GraphAEModel, X: EmbeddingMatrix, a_norm: np.ndarray,
                  pairs: list[tuple[int, int]], threshold: float = 0.5):
    """Score concept pairs from a deterministic encode (mu for VGAE).

    The decoder is an inner product, so score(i, j) == score(j, i); the
    model cannot express direction and both orders get the same score.
    """
    Xf = np.asarray(X.X, dtype=np.float64)
    n = a_norm.shape[0]
    for i, j in pairs:
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"pair ({i}, {j}) outside vertex range 0..{n - 1}")
    h = np.maximum(a_norm @ Xf @ model.params.W0, 0.0)
    ah = a_norm @ h
    if model.config.variational:
        z = ah @ model.params.W1_mu
    else:
        z = ah @ model.params.W1
    src = np.asarray([i for i, _ in pairs], dtype=np.int64)
    tgt = np.asarray([j for _, j in pairs], dtype=np.int64)
    scores = _sigmoid(np.sum(z[src] * z[tgt], axis=1))
    labels = (scores >= threshold).astype(int)
    return labels.tolist(), scores.tolist()


def save_gae_model(path, model: GraphAEModel) -> None:
    arrays = {"a_norm": model.a_norm,
              "history_loss": np.asarray([h["loss"] for h in model.history]),
              "history_recon": np.asarray([h["recon"] for h in model.history]),
              "history_kl": np.asarray([h["kl"] for h in model.history])}
    for k in ("W0", "W1", "W1_mu", "W1_logsigma"):
        value = getattr(model.params, k)
        if value is not None:
            arrays[k] = value
    container.save_checkpoint(path, "graph_autoencoder",
                              {"config": asdict(model.config)}, arrays)


def load_gae_model(path) -> GraphAEModel:
    meta, arrays = container.load_checkpoint(path, "graph_autoencoder")
    cfg = TrainConfig(**meta["config"])
    params = GcnParams(W0=arrays["W0"], W1=arrays.get("W1"),
                       W1_mu=arrays.get("W1_mu"),
                       W1_logsigma=arrays.get("W1_logsigma"))
    history = [{"epoch": i, "loss": float(lo), "recon": float(re), "kl": float(kl)}
               for i, (lo, re, kl) in enumerate(zip(arrays["history_loss"],
                                                    arrays["history_recon"],
                                                    arrays["history_kl"]))]
    return GraphAEModel(params=params, config=cfg,
                        a_norm=arrays["a_norm"], history=history)
