"""Hot numeric kernels, each with a numba-compiled and a pure-numpy twin.

The numba path is used by default whenever numba imports cleanly; setting
PREREQCHAIN_NO_NUMBA=1 selects the numpy fallback instead. Both twins run
the same sequential algorithm, so results agree up to floating-point
summation order (integer-count arithmetic, as in the Gini scan, agrees
bitwise).

Kernels live here because they dominate runtime: the paragraph-vector
SGD sweep touches every token position per epoch, and the decision-tree
split scan sorts and walks every candidate feature per node.
"""

from __future__ import annotations

import math
import os

import numpy as np

ENV_FLAG = "PREREQCHAIN_NO_NUMBA"

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    _HAVE_NUMBA = False


def _pvdm_epoch_numpy(tokens, doc_bounds, word_vec, doc_vec, out_vec,
                      negatives, alphas, window, update_words):
    """One sequential SGD pass over all center positions (numpy twin).

    Per position: h = mean(doc vector, context word vectors); the center
    word is pushed up and the (deduplicated) negatives pushed down through
    the output weights. Returns the summed negative-sampling loss.
    """
    total = 0.0
    n_neg = negatives.shape[1]
    for d in range(doc_bounds.shape[0] - 1):
        start, end = int(doc_bounds[d]), int(doc_bounds[d + 1])
        for t in range(start, end):
            center = int(tokens[t])
            lo = max(start, t - window)
            hi = min(end, t + window + 1)
            ctx = np.concatenate((tokens[lo:t], tokens[t + 1:hi]))
            nctx = ctx.shape[0]
            inv = 1.0 / (nctx + 1)
            h = doc_vec[d] + word_vec[ctx].sum(axis=0) if nctx else doc_vec[d].copy()
            h *= inv

            idxs = [center]
            for k in range(n_neg):
                nid = int(negatives[t, k])
                if nid != center and nid not in idxs:
                    idxs.append(nid)
            idx_arr = np.asarray(idxs, dtype=np.int64)

            out_rows = out_vec[idx_arr]  # snapshot; idxs are unique
            s = out_rows @ h
            p = np.where(s >= 0, 1.0 / (1.0 + np.exp(-np.abs(s))),
                         np.exp(-np.abs(s)) / (1.0 + np.exp(-np.abs(s))))
            g = p.copy()
            g[0] -= 1.0
            # softplus(-s) for the center, softplus(s) for negatives
            sp = np.log1p(np.exp(-np.abs(s)))
            total += sp[0] + max(-s[0], 0.0)
            total += float(np.sum(sp[1:] + np.maximum(s[1:], 0.0)))

            alpha = alphas[t]
            dh = g @ out_rows
            if update_words:
                out_vec[idx_arr] -= (alpha * g)[:, None] * h
            upd = (alpha * inv) * dh
            doc_vec[d] -= upd
            if update_words and nctx:
                np.subtract.at(word_vec, ctx, upd)
    return total


def _pvdm_epoch_scalar(tokens, doc_bounds, word_vec, doc_vec, out_vec,
                       negatives, alphas, window, update_words):
    dim = word_vec.shape[1]
    n_neg = negatives.shape[1]
    total = 0.0
    h = np.empty(dim)
    dh = np.empty(dim)
    idxs = np.empty(n_neg + 1, np.int64)
    for d in range(doc_bounds.shape[0] - 1):
        start = doc_bounds[d]
        end = doc_bounds[d + 1]
        for t in range(start, end):
            center = tokens[t]
            lo = t - window
            if lo < start:
                lo = start
            hi = t + window + 1
            if hi > end:
                hi = end
            nctx = hi - lo - 1
            inv = 1.0 / (nctx + 1)
            for c in range(dim):
                h[c] = doc_vec[d, c]
            for pos in range(lo, hi):
                if pos == t:
                    continue
                w = tokens[pos]
                for c in range(dim):
                    h[c] += word_vec[w, c]
            for c in range(dim):
                h[c] *= inv

            m = 1
            idxs[0] = center
            for k in range(n_neg):
                nid = negatives[t, k]
                if nid == center:
                    continue
                dup = False
                for q in range(1, m):
                    if idxs[q] == nid:
                        dup = True
                        break
                if not dup:
                    idxs[m] = nid
                    m += 1

            alpha = alphas[t]
            for c in range(dim):
                dh[c] = 0.0
            for q in range(m):
                w = idxs[q]
                s = 0.0
                for c in range(dim):
                    s += out_vec[w, c] * h[c]
                if s >= 0:
                    p = 1.0 / (1.0 + math.exp(-s))
                else:
                    es = math.exp(s)
                    p = es / (1.0 + es)
                if q == 0:
                    g = p - 1.0
                    total += math.log1p(math.exp(-abs(s)))
                    if s < 0:
                        total += -s
                else:
                    g = p
                    total += math.log1p(math.exp(-abs(s)))
                    if s > 0:
                        total += s
                for c in range(dim):
                    dh[c] += g * out_vec[w, c]
                if update_words:
                    for c in range(dim):
                        out_vec[w, c] -= alpha * g * h[c]

            scale = alpha * inv
            for c in range(dim):
                doc_vec[d, c] -= scale * dh[c]
            if update_words and nctx > 0:
                for pos in range(lo, hi):
                    if pos == t:
                        continue
                    w = tokens[pos]
                    for c in range(dim):
                        word_vec[w, c] -= scale * dh[c]
    return total


def _best_split_numpy(features, labels, min_leaf):
    """Best Gini split over candidate feature columns (numpy twin).

    Returns (column index, threshold, weighted child impurity); column -1
    when no valid split exists. Counts are integers, so the two twins
    produce bitwise-identical scores and tie-breaks.
    """
    n, n_feat = features.shape
    total_pos = int(labels.sum())
    best_feat = -1
    best_thresh = 0.0
    best_score = np.inf
    nl = np.arange(1, n, dtype=np.int64)
    nr = n - nl
    for j in range(n_feat):
        order = np.argsort(features[:, j])
        xs = features[order, j]
        ys = labels[order]
        pos_l = np.cumsum(ys)[:-1].astype(np.int64)
        valid = (xs[1:] != xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not valid.any():
            continue
        pos_r = total_pos - pos_l
        gl = 1.0 - (pos_l / nl) ** 2 - ((nl - pos_l) / nl) ** 2
        gr = 1.0 - (pos_r / nr) ** 2 - ((nr - pos_r) / nr) ** 2
        score = (nl * gl + nr * gr) / n
        score[~valid] = np.inf
        i = int(np.argmin(score))
        if score[i] < best_score:
            best_score = float(score[i])
            best_feat = j
            best_thresh = float((xs[i] + xs[i + 1]) / 2.0)
    return best_feat, best_thresh, best_score


def _best_split_scalar(features, labels, min_leaf):
    n, n_feat = features.shape
    total_pos = 0
    for i in range(n):
        total_pos += labels[i]
    best_feat = -1
    best_thresh = 0.0
    best_score = np.inf
    for j in range(n_feat):
        order = np.argsort(features[:, j])
        pos_l = 0
        for i in range(n - 1):
            pos_l += labels[order[i]]
            xl = features[order[i], j]
            xr = features[order[i + 1], j]
            nl = i + 1
            nr = n - nl
            if xl == xr or nl < min_leaf or nr < min_leaf:
                continue
            pos_r = total_pos - pos_l
            pl = pos_l / nl
            ql = (nl - pos_l) / nl
            pr = pos_r / nr
            qr = (nr - pos_r) / nr
            gl = 1.0 - pl * pl - ql * ql
            gr = 1.0 - pr * pr - qr * qr
            score = (nl * gl + nr * gr) / n
            if score < best_score:
                best_score = score
                best_feat = j
                best_thresh = (xl + xr) / 2.0
    return best_feat, best_thresh, best_score


if _HAVE_NUMBA:
    _pvdm_epoch_numba = njit(cache=True)(_pvdm_epoch_scalar)
    _best_split_numba = njit(cache=True)(_best_split_scalar)

_DEFAULT = "numba" if _HAVE_NUMBA and os.environ.get(ENV_FLAG, "") not in ("1", "true", "yes") else "numpy"
_active = _DEFAULT


def available_backends():
    return ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    """Switch kernel backend at runtime (tests and benchmarks)."""
    global _active
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _active = name


def pvdm_epoch(tokens, doc_bounds, word_vec, doc_vec, out_vec, negatives,
               alphas, window: int, update_words: bool = True) -> float:
    """Run one training pass; mutates doc_vec (and word/output weights
    unless update_words is False) in place and returns the summed loss."""
    if _active == "numba":
        return _pvdm_epoch_numba(tokens, doc_bounds, word_vec, doc_vec,
                                 out_vec, negatives, alphas, window, update_words)
    return _pvdm_epoch_numpy(tokens, doc_bounds, word_vec, doc_vec,
                             out_vec, negatives, alphas, window, update_words)


def best_split(features, labels, min_leaf: int = 1):
    """Exhaustive best Gini split over the given candidate columns."""
    if _active == "numba":
        return _best_split_numba(features, labels, min_leaf)
    return _best_split_numpy(features, labels, min_leaf)
