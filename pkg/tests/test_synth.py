"""Planted-structure generator checks."""

from collections import Counter

import pytest

from prereqchain.synth import BRANCH_WORDS, make_planted_corpus, make_planted_graph
from prereqchain.graph import strongly_connected_components


def _level(name: str) -> int:
    return int(name.split()[1].removeprefix("stage"))


def _branch(name: str) -> str:
    return name.split()[0]


class TestPlantedGraph:
    def test_default_shape(self):
        g = make_planted_graph()
        assert len(g.concepts) == 52
        assert len(g.edges) > 500
        assert all(c.name.split()[0] in BRANCH_WORDS for c in g.concepts)

    def test_edges_run_forward_within_window(self):
        g = make_planted_graph(n_branches=3, depth=7, window=4)
        for src, tgt in g.edges:
            delta = _level(g.concepts[tgt].name) - _level(g.concepts[src].name)
            assert 1 <= delta <= 4

    def test_acyclic(self):
        g = make_planted_graph()
        comps = strongly_connected_components(len(g.concepts), g.edges)
        assert all(len(comp) == 1 for comp in comps)

    def test_every_forward_pair_within_window_is_an_edge(self):
        g = make_planted_graph(n_branches=2, depth=5, window=2)
        names = [c.name for c in g.concepts]
        expected = {(i, j) for i in range(len(names)) for j in range(len(names))
                    if 1 <= _level(names[j]) - _level(names[i]) <= 2}
        assert g.edges == expected

    def test_cross_branch_off_keeps_chains_separate(self):
        g = make_planted_graph(n_branches=3, depth=6, window=2, cross_branch=False)
        for src, tgt in g.edges:
            assert _branch(g.concepts[src].name) == _branch(g.concepts[tgt].name)
        full = make_planted_graph(n_branches=3, depth=6, window=2)
        assert len(g.edges) < len(full.edges)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError, match="branches"):
            make_planted_graph(n_branches=len(BRANCH_WORDS) + 1)
        with pytest.raises(ValueError, match="depth"):
            make_planted_graph(depth=1)
        with pytest.raises(ValueError, match="window"):
            make_planted_graph(window=0)


@pytest.fixture(scope="module")
def small():
    g = make_planted_graph(n_branches=2, depth=4, window=2)
    return g, make_planted_corpus(g, docs_per_concept=2, tokens_per_doc=200, seed=3)


class TestPlantedCorpus:
    def test_shape_and_labels(self, small):
        g, ds = small
        assert len(ds.documents) == 2 * len(g.concepts)
        assert len({d.id for d in ds.documents}) == len(ds.documents)
        names = {c.name for c in g.concepts}
        for doc in ds.documents:
            assert len(doc.tokens) == 200
            assert doc.taxonomy_label in names
        assert ds.provenance == "synthetic"

    def test_same_seed_reproduces_tokens(self):
        g = make_planted_graph(n_branches=2, depth=4, window=2)
        a = make_planted_corpus(g, seed=7)
        b = make_planted_corpus(g, seed=7)
        assert [d.tokens for d in a.documents] == [d.tokens for d in b.documents]
        c = make_planted_corpus(g, seed=8)
        assert [d.tokens for d in a.documents] != [d.tokens for d in c.documents]

    def test_own_words_dominate(self, small):
        g, ds = small
        for doc in ds.documents:
            branch_word, level_word = doc.taxonomy_label.split()
            counts = Counter(doc.tokens)
            fillers = [v for t, v in counts.items() if t.startswith("filler")]
            assert counts[level_word] > max(fillers)
            assert counts[branch_word] > max(fillers)

    def test_parent_words_present(self, small):
        g, ds = small
        by_name = {c.name: c.index for c in g.concepts}
        for doc in ds.documents:
            parents = g.predecessors(by_name[doc.taxonomy_label])
            if not parents:
                continue
            parent_words = {tok for p in parents for tok in g.concepts[p].name.split()}
            assert parent_words & set(doc.tokens)
