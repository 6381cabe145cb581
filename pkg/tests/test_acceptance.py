"""Acceptance gate: one test per release criterion, at release tolerances.

Run with -v to get one PASSED/FAILED line per criterion. Criterion 2b is
expected to fail: the published reference rows themselves break the stated
harmonic-mean bound, and the check records that honestly instead of
loosening the tolerance. Criterion 7 only runs when real corpora are
supplied via PREREQCHAIN_CORPUS_DIR; it is not a CI gate.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from prereqchain import kernels
from prereqchain.cli import cli_dispatch
from prereqchain.corpus import ingest_documents
from prereqchain.embed import EmbedConfig, EmbeddingMatrix
from prereqchain.evaluation import (METHODS, REFERENCE_SCORES, compute_metrics,
                                    make_folds, run_experiment)
from prereqchain.gae import (GcnParams, TrainConfig, decode_adjacency,
                             elbo_loss_and_grads, kl_divergence,
                             train_graph_autoencoder)
from prereqchain.graph import (graph_statistics, load_concept_graph,
                               normalized_adjacency)
from prereqchain.pairclf import (ClassifierConfig, build_pair_dataset,
                                 logistic_loss_and_grad, oversample)
from prereqchain.synth import make_planted_corpus, make_planted_graph
from tests.gradcheck import (fd_gradient, pvdm_analytic_grads, pvdm_fd_grads,
                             relative_error)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

SYNTH_EMBED = EmbedConfig(dim=48, window=4, epochs=30, min_count=1, seed=0)


@pytest.fixture(scope="module")
def released_graph():
    root = FIXTURES / "annotation"
    return load_concept_graph(root / "concepts.tsv",
                              [root / "edges_annotator1.tsv",
                               root / "edges_annotator2.tsv"])


def test_criterion_1_graph_analytics_fixture_exact(released_graph):
    """Released annotation: 208 vertices, 921 edges, 12 mutual pairs,
    7 isolated concepts, longest condensation path 14, top in-degree
    Neural Machine Translation (19), top out-degree Data Structures and
    Algorithms (106); all exact, under one second."""
    start = time.perf_counter()
    stats = graph_statistics(released_graph)
    elapsed = time.perf_counter() - start
    assert stats.n_concepts == 208
    assert stats.n_edges == 921
    assert len(stats.mutual_pairs) == 12
    assert len(stats.isolated) == 7
    assert stats.longest_path_len == 14
    assert stats.top_in[0] == ("Neural Machine Translation", 19)
    assert stats.top_out[0] == ("Data Structures and Algorithms", 106)
    assert elapsed < 1.0


def test_criterion_2a_metric_oracle_exact():
    """compute_metrics equals brute-force confusion counting on 1,000
    random cases, exactly."""
    rng = np.random.default_rng(20)
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        predicted = rng.integers(0, 2, n).tolist()
        gold = rng.integers(0, 2, n).tolist()
        tp = sum(1 for p, g in zip(predicted, gold) if p == 1 and g == 1)
        fp = sum(1 for p, g in zip(predicted, gold) if p == 1 and g == 0)
        fn = sum(1 for p, g in zip(predicted, gold) if p == 0 and g == 1)
        m = compute_metrics(predicted, gold)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        assert m.precision == precision
        assert m.recall == recall
        assert m.f1 == f1


def test_criterion_2b_published_table_internal_consistency():
    """Every published row's F1 should equal the harmonic mean of its P and
    R within +-0.001 after rounding. The published figures themselves break
    this for several rows, so this check stays honestly red."""
    deviations = []
    for setting, rows in REFERENCE_SCORES.items():
        for method, (p, r, f1) in rows.items():
            hm = 2 * p * r / (p + r)
            # integer thousandths avoid float-representation fuzz
            if abs(round(hm * 1000) - round(f1 * 1000)) > 1:
                deviations.append(f"{setting}/{method}: published F1 {f1:.3f}"
                                  f" vs harmonic mean {hm:.3f}")
    assert not deviations, (
        f"{len(deviations)}/18 published rows deviate beyond +-0.001:\n  "
        + "\n  ".join(deviations))


def test_criterion_3_gradient_checks():
    """Analytic gradients of the embedding step, logistic regression, and
    both autoencoder variants match central finite differences with
    relative error < 1e-4, in under ten seconds total."""
    start = time.perf_counter()
    rng = np.random.default_rng(42)

    tokens = np.array([0, 1, 2, 1, 3], dtype=np.int64)
    doc_bounds = np.array([0, 5], dtype=np.int64)
    negatives = rng.integers(0, 4, (5, 2)).astype(np.int64)
    params = ((rng.random((4, 6)) - 0.5), (rng.random((1, 6)) - 0.5),
              (rng.random((4, 6)) - 0.5))
    analytic = pvdm_analytic_grads(params, tokens, doc_bounds, negatives, window=2)
    fd = pvdm_fd_grads(params, tokens, doc_bounds, negatives, window=2)
    for a, f in zip(analytic, fd):
        assert relative_error(a, f) < 1e-4

    X = rng.normal(size=(12, 5))
    y = rng.integers(0, 2, 12).astype(np.float64)
    w = rng.normal(size=5) * 0.3
    b = 0.2
    _, dw, db = logistic_loss_and_grad(w, b, X, y, 1e-3)
    fd_w = fd_gradient(lambda t: logistic_loss_and_grad(t, b, X, y, 1e-3)[0], w)
    assert relative_error(dw, fd_w) < 1e-4
    eps = 1e-6
    hi = logistic_loss_and_grad(w, b + eps, X, y, 1e-3)[0]
    lo = logistic_loss_and_grad(w, b - eps, X, y, 1e-3)[0]
    assert relative_error(np.array([db]), np.array([(hi - lo) / (2 * eps)])) < 1e-4

    a = np.zeros((3, 3))
    a[0, 1] = a[1, 2] = 1.0
    a_norm = normalized_adjacency(a)
    a_target = np.clip(np.maximum(a, a.T) + np.eye(3), 0, 1)
    Xf = rng.normal(size=(3, 3))
    for variational in (False, True):
        if variational:
            gcn = GcnParams(W0=rng.normal(size=(3, 4)) * 0.6,
                            W1_mu=rng.normal(size=(4, 2)) * 0.6,
                            W1_logsigma=rng.normal(size=(4, 2)) * 0.3)
            names = ("W0", "W1_mu", "W1_logsigma")
            noise = rng.standard_normal((3, 2))
        else:
            gcn = GcnParams(W0=rng.normal(size=(3, 4)) * 0.6,
                            W1=rng.normal(size=(4, 2)) * 0.6)
            names = ("W0", "W1")
            noise = None
        grads = elbo_loss_and_grads(Xf, a_norm, a_target, gcn, 2.0,
                                    variational, noise)[3]
        for k in names:
            W = getattr(gcn, k)
            fd_w = np.empty_like(W)
            for idx in np.ndindex(W.shape):
                orig = W[idx]
                W[idx] = orig + eps
                up = elbo_loss_and_grads(Xf, a_norm, a_target, gcn, 2.0,
                                         variational, noise)[0]
                W[idx] = orig - eps
                dn = elbo_loss_and_grads(Xf, a_norm, a_target, gcn, 2.0,
                                         variational, noise)[0]
                W[idx] = orig
                fd_w[idx] = (up - dn) / (2.0 * eps)
            assert relative_error(grads[k], fd_w) < 1e-4, k

    assert time.perf_counter() - start < 10.0


def test_criterion_4_vgae_invariants():
    """KL >= 0 with equality at (mu=0, log_sigma=0); decoded adjacency
    symmetric with entries in (0,1); 200 epochs on a 20-vertex planted
    graph strictly decrease the loss from epoch 1 to epoch 200."""
    assert kl_divergence(np.zeros((4, 2)), np.zeros((4, 2))) == 0.0
    rng = np.random.default_rng(7)
    for _ in range(25):
        assert kl_divergence(rng.normal(size=(4, 2)),
                             rng.normal(size=(4, 2)) * 0.5) >= 0.0

    Z = rng.normal(size=(6, 3))
    decoded = decode_adjacency(Z)
    assert np.array_equal(decoded, decoded.T)
    assert ((decoded > 0.0) & (decoded < 1.0)).all()

    g = make_planted_graph(n_branches=2, depth=10, window=3)
    assert len(g.concepts) == 20
    X = EmbeddingMatrix(concepts=[c.name for c in g.concepts],
                        X=rng.normal(size=(20, 8)))
    model = train_graph_autoencoder(X, g, TrainConfig(epochs=200, h1=16, h2=8,
                                                      variational=True, seed=0))
    assert len(model.history) == 200
    assert model.history[-1]["loss"] < model.history[0]["loss"]


def test_criterion_5_protocol_invariants(released_graph):
    """Every fold holds floor(0.1*|E+|) test positives and as many test
    negatives; positive test sets are disjoint across the five folds; the
    oversampled training set is exactly class-balanced."""
    folds = make_folds(released_graph, k=5, test_pos_frac=0.1, seed=4)
    assert len(folds) == 5
    want = int(0.1 * len(released_graph.edges))
    positive_sets = []
    for fold in folds:
        positives = {(s, t) for s, t, lab in fold.test_pairs if lab == 1}
        negatives = [(s, t) for s, t, lab in fold.test_pairs if lab == 0]
        assert len(positives) == want == 92
        assert len(negatives) == want
        positive_sets.append(positives)
    for i in range(5):
        for j in range(i + 1, 5):
            assert not positive_sets[i] & positive_sets[j]

    rng = np.random.default_rng(0)
    X = EmbeddingMatrix(concepts=[c.name for c in released_graph.concepts],
                        X=rng.normal(size=(released_graph.n, 4)))
    balanced = oversample(build_pair_dataset(X, released_graph), seed=1)
    labels = np.asarray(balanced.labels)
    assert (labels == 1).sum() == (labels == 0).sum()


def test_criterion_6_synthetic_end_to_end():
    """On the seeded planted corpus (52 concepts, layered DAG, documents
    token-correlated with their concept), the SVM pipeline reaches mean
    F1 >= 0.70 and beats the label-shuffled control by >= 0.15 absolute,
    well inside five minutes."""
    start = time.perf_counter()
    g = make_planted_graph()
    assert len(g.concepts) >= 50
    docs = make_planted_corpus(g, seed=0)

    def run(shuffle):
        reports = run_experiment({"synthetic": docs}, g,
                                 corpus_settings=("synthetic",),
                                 methods=("linear_svm",),
                                 embed_config=SYNTH_EMBED,
                                 k=5, test_pos_frac=0.1, seed=0,
                                 shuffle_labels=shuffle)
        return reports[0].methods["linear_svm"].mean.f1

    real = run(False)
    control = run(True)
    elapsed = time.perf_counter() - start
    assert real >= 0.70, f"mean F1 {real:.3f}"
    assert real - control >= 0.15, f"F1 {real:.3f} vs control {control:.3f}"
    assert elapsed < 300.0


@pytest.mark.skipif("PREREQCHAIN_CORPUS_DIR" not in os.environ,
                    reason="real corpora not present "
                           "(set PREREQCHAIN_CORPUS_DIR to run)")
def test_criterion_7_conditional_reproduction(released_graph):
    """Environment-dependent, not a CI gate: with the real corpora on disk,
    the SVM beats the other three classifiers per corpus setting, the
    autoencoders trade precision for recall, and SVM/tutorialbank F1 lands
    within +-0.08 of the published 0.761."""
    root = Path(os.environ["PREREQCHAIN_CORPUS_DIR"])
    corpora = {name: ingest_documents(root / name, provenance=name)
               for name in ("tutorialbank", "lecturebank")}
    reports = run_experiment(corpora, released_graph, methods=METHODS, seed=0)
    classifiers = ("naive_bayes", "linear_svm", "logistic_regression",
                   "random_forest")
    for report in reports:
        svm = report.methods["linear_svm"].mean.f1
        assert svm == max(report.methods[m].mean.f1 for m in classifiers)
        for method in ("gae", "vgae"):
            mean = report.methods[method].mean
            assert mean.recall > mean.precision
    tb = next(r for r in reports if r.corpus_setting == "tutorialbank")
    assert abs(tb.methods["linear_svm"].mean.f1 - 0.761) <= 0.08


def test_criterion_8_evaluate_determinism(capsys):
    """The evaluate command repeated with the same seed produces
    byte-identical reports."""
    argv = ["evaluate", "--corpus", "synthetic", "--method", "svm",
            "--method", "nb", "--k", "2", "--dim", "8", "--epochs", "3",
            "--min-count", "1", "--seed", "11"]
    assert cli_dispatch(list(argv)) == 0
    first = capsys.readouterr().out
    assert cli_dispatch(list(argv)) == 0
    second = capsys.readouterr().out
    assert first.encode() == second.encode()
    json.loads(first)
