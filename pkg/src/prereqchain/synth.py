"""Seeded planted-structure corpora for end-to-end pipeline checks.

Concepts form a layered DAG: several branches, each a chain of stages, with
an edge wherever the target sits one to `window` stages above the source.
Every concept gets a handful of generated lectures whose token distribution
is peaked on its own branch and stage words, smoothed toward neighboring
stages and parents, so the learned embeddings carry the planted structure.
"""

from __future__ import annotations

import logging

import numpy as np

from .corpus import Document, DocumentSet
from .graph import Concept, ConceptGraph

log = logging.getLogger(__name__)

BRANCH_WORDS = ("amber", "cobalt", "crimson", "jade", "onyx", "sable")


def _level_word(level: int) -> str:
    return f"stage{level:02d}"


def make_planted_graph(n_branches: int = 4, depth: int = 13, window: int = 8,
                       cross_branch: bool = True) -> ConceptGraph:
    """Layered DAG over n_branches * depth concepts.

    Vertex (b, l) is named "<branch word> stage<l>". An edge runs i -> j
    whenever level(j) - level(i) is in [1, window]; with cross_branch off,
    only within the same branch. Edges always point up-level, so the graph
    is acyclic by construction.
    """
    if n_branches > len(BRANCH_WORDS):
        raise ValueError(f"at most {len(BRANCH_WORDS)} branches supported")
    if depth < 2 or window < 1:
        raise ValueError("depth must be at least 2 and window at least 1")
    names = [f"{BRANCH_WORDS[b]} {_level_word(l)}"
             for b in range(n_branches) for l in range(1, depth + 1)]
    concepts = [Concept(index=i, name=n) for i, n in enumerate(names)]

    def level(i):
        return i % depth + 1

    def branch(i):
        return i // depth

    n = len(names)
    edges = {(i, j) for i in range(n) for j in range(n)
             if 1 <= level(j) - level(i) <= window
             and (cross_branch or branch(i) == branch(j))}
    return ConceptGraph(concepts=concepts, edges=edges)


def make_planted_corpus(g: ConceptGraph, docs_per_concept: int = 3,
                        tokens_per_doc: int = 120, n_noise_words: int = 40,
                        seed: int = 0) -> DocumentSet:
    """Generate lectures whose tokens correlate with their concept."""
    rng = np.random.default_rng(seed)
    noise_words = [f"filler{i:02d}" for i in range(n_noise_words)]
    max_level = max(int(c.name.split()[1].removeprefix("stage"))
                    for c in g.concepts)
    docs = []
    for concept in g.concepts:
        branch_word, level_word = concept.name.split()
        level = int(level_word.removeprefix("stage"))
        pool: list[str] = []
        weights: list[float] = []

        def add(words, total_weight):
            for w in words:
                pool.append(w)
                weights.append(total_weight / len(words))

        add([branch_word], 0.18)
        add([level_word], 0.30)
        near = [_level_word(level + d) for d in (-1, 1)
                if 1 <= level + d <= max_level]
        add(near, 0.14)
        parent_tokens = [tok for p in g.predecessors(concept.index)
                         for tok in g.concepts[p].name.split()]
        if parent_tokens:
            add(parent_tokens, 0.20)
        add(noise_words, 0.18)

        probs = np.asarray(weights) / sum(weights)
        for k in range(docs_per_concept):
            tokens = rng.choice(pool, size=tokens_per_doc, p=probs).tolist()
            text = " ".join(tokens)
            docs.append(Document(
                id=f"syn-{concept.index:03d}-{k}",
                source_path=f"synthetic/{concept.index:03d}_{k}.txt",
                domain_tag="ML",
                slide_texts=[text],
                tokens=tokens,
                taxonomy_label=concept.name))
    return DocumentSet(documents=docs, provenance="synthetic")
