import itertools
import os
import subprocess
import sys

import numpy as np
import pytest

from prereqchain import kernels


def random_case(seed, n_vocab=10, n_docs=3, n_tokens=40, dim=7, n_neg=4):
    rng = np.random.default_rng(seed)
    tokens = rng.integers(0, n_vocab, n_tokens).astype(np.int64)
    cuts = np.sort(rng.choice(np.arange(1, n_tokens), size=n_docs - 1, replace=False))
    doc_bounds = np.concatenate(([0], cuts, [n_tokens])).astype(np.int64)
    negatives = rng.integers(0, n_vocab, (n_tokens, n_neg)).astype(np.int64)
    alphas = np.full(n_tokens, 0.04)
    params = ((rng.random((n_vocab, dim)) - 0.5) / dim,
              (rng.random((n_docs, dim)) - 0.5) / dim,
              np.zeros((n_vocab, dim)))
    return tokens, doc_bounds, negatives, alphas, params


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_pvdm_twins_agree(seed):
    tokens, doc_bounds, negatives, alphas, params = random_case(seed)
    results = []
    for fn in (kernels._pvdm_epoch_numpy, kernels._pvdm_epoch_scalar):
        w, d, o = (p.copy() for p in params)
        loss = fn(tokens, doc_bounds, w, d, o, negatives, alphas, 3, True)
        results.append((loss, w, d, o))
    (l1, w1, d1, o1), (l2, w2, d2, o2) = results
    assert l1 == pytest.approx(l2, rel=1e-12)
    np.testing.assert_allclose(w1, w2, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(d1, d2, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(o1, o2, rtol=1e-10, atol=1e-14)


@pytest.mark.skipif("numba" not in kernels.available_backends(),
                    reason="numba not installed")
def test_pvdm_numba_matches_scalar_twin():
    tokens, doc_bounds, negatives, alphas, params = random_case(9)
    outs = []
    for fn in (kernels._pvdm_epoch_scalar, kernels._pvdm_epoch_numba):
        w, d, o = (p.copy() for p in params)
        loss = fn(tokens, doc_bounds, w, d, o, negatives, alphas, 2, True)
        outs.append((loss, w, d, o))
    assert outs[0][0] == pytest.approx(outs[1][0], rel=1e-12)
    for a, b in zip(outs[0][1:], outs[1][1:]):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


def test_pvdm_frozen_words_only_moves_doc():
    tokens, doc_bounds, negatives, alphas, params = random_case(4)
    # zero output weights would zero the doc gradient too; use trained-like ones
    rng = np.random.default_rng(99)
    params = (params[0], params[1], (rng.random(params[0].shape) - 0.5))
    w, d, o = (p.copy() for p in params)
    kernels.pvdm_epoch(tokens, doc_bounds, w, d, o, negatives, alphas, 3, False)
    assert np.array_equal(w, params[0])
    assert np.array_equal(o, params[2])
    assert not np.array_equal(d, params[1])


def brute_force_best_split(features, labels, min_leaf):
    """Direct enumeration of every (feature, adjacent midpoint) split."""
    n, n_feat = features.shape
    best = (-1, 0.0, np.inf)
    for j in range(n_feat):
        order = np.argsort(features[:, j])
        xs = features[order, j]
        ys = labels[order]
        for i in range(n - 1):
            if xs[i] == xs[i + 1] or i + 1 < min_leaf or n - i - 1 < min_leaf:
                continue
            left, right = ys[:i + 1], ys[i + 1:]

            def gini(y):
                p = y.mean()
                return 1.0 - p * p - (1 - p) * (1 - p)

            score = (len(left) * gini(left) + len(right) * gini(right)) / n
            if score < best[2]:
                best = (j, (xs[i] + xs[i + 1]) / 2.0, score)
    return best


@pytest.mark.parametrize("seed", range(6))
def test_best_split_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 40))
    f = int(rng.integers(1, 6))
    X = rng.random((n, f))
    y = (rng.random(n) > 0.5).astype(np.int64)
    min_leaf = int(rng.integers(1, 4))
    expect = brute_force_best_split(X, y, min_leaf)
    for fn in (kernels._best_split_numpy, kernels._best_split_scalar):
        feat, thresh, score = fn(X, y, min_leaf)
        assert feat == expect[0]
        if feat >= 0:
            assert thresh == pytest.approx(expect[1])
            assert score == pytest.approx(expect[2])


def test_best_split_twins_bitwise_identical():
    rng = np.random.default_rng(123)
    for _ in range(10):
        n = int(rng.integers(4, 60))
        X = rng.integers(0, 4, (n, 3)).astype(np.float64)  # heavy ties
        y = (rng.random(n) > 0.4).astype(np.int64)
        a = kernels._best_split_numpy(X, y, 1)
        b = kernels._best_split_scalar(X, y, 1)
        assert a[0] == b[0]
        assert (a[1] == b[1]) and (a[2] == b[2] or (np.isinf(a[2]) and np.isinf(b[2])))


def test_best_split_no_valid_split():
    X = np.ones((6, 2))
    y = np.array([0, 1, 0, 1, 0, 1], dtype=np.int64)
    feat, thresh, score = kernels.best_split(X, y, min_leaf=1)
    assert feat == -1
    assert np.isinf(score)


def test_best_split_min_leaf_respected():
    X = np.arange(10, dtype=np.float64).reshape(-1, 1)
    y = np.array([0] * 5 + [1] * 5, dtype=np.int64)
    feat, thresh, _ = kernels.best_split(X, y, min_leaf=4)
    assert feat == 0
    # only splits leaving >= 4 on each side are allowed
    left = (X[:, 0] <= thresh).sum()
    assert 4 <= left <= 6


def test_backend_switching():
    original = kernels.active_backend()
    try:
        kernels.set_backend("numpy")
        assert kernels.active_backend() == "numpy"
        if "numba" in kernels.available_backends():
            kernels.set_backend("numba")
            assert kernels.active_backend() == "numba"
        with pytest.raises(ValueError):
            kernels.set_backend("fortran")
    finally:
        kernels.set_backend(original)


def test_env_flag_selects_numpy_backend():
    code = ("from prereqchain import kernels; "
            "print(kernels.active_backend())")
    env = dict(os.environ, **{kernels.ENV_FLAG: "1"})
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_backends_produce_same_split_results():
    rng = np.random.default_rng(77)
    X = rng.random((50, 4))
    y = (rng.random(50) > 0.5).astype(np.int64)
    original = kernels.active_backend()
    try:
        results = []
        for name in kernels.available_backends():
            kernels.set_backend(name)
            results.append(kernels.best_split(X, y, 1))
        first = results[0]
        for other in results[1:]:
            assert other == first
    finally:
        kernels.set_backend(original)
