"""Generate the annotation fixtures under fixtures/.

Builds a 208-concept prerequisite graph with the published analytics:
921 intersection edges, 12 mutual pairs, 7 isolated concepts, a unique
14-concept longest chain, and the exact top-15 degree tables. Two
annotator edge files are derived whose intersection is that graph and
whose Cohen's kappa rounds to 0.70. Verification is done independently
with networkx before anything is written.

Run from the repository root:  python tools/gen_annotation_fixture.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import networkx as nx
import numpy as np

SEED = 20190115
ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "fixtures"

# (name, level, out_quota) — exact out-degrees from the degree table
OUT_QUOTA = [
    ("Data Structures and Algorithms", 1, 106),
    ("Probabilities", 1, 105),
    ("Linear Algebra", 1, 98),
    ("Matrix Multiplication", 1, 72),
    ("Bayes Theorem", 2, 59),
    ("Conditional Probability", 2, 58),
    ("Differential Calculus", 2, 21),
    ("Activation Functions", 3, 20),
    ("Loss Function", 3, 19),
    ("Entropy", 2, 17),
    ("Data Preprocessing", 2, 17),
    ("Backpropagation", 3, 17),
    ("Artificial Neural Networks", 5, 16),
    ("Backpropagation Through Time", 4, 14),
    ("Information Theory", 3, 13),
]

# (name, level, in_quota) — exact in-degrees from the degree table
IN_QUOTA = [
    ("Neural Machine Translation", 9, 19),
    ("Variational Autoencoders", 10, 15),
    ("Stack LSTM", 10, 13),
    ("Seq2seq Models", 8, 13),
    ("Highway Networks", 10, 12),
    ("DQN", 10, 12),
    ("Bidirectional Recurrent Neural Networks", 9, 11),
    ("Convolutional Neural Networks", 8, 11),
    ("Multilingual Word Embeddings", 9, 11),
    ("Capsule Networks", 11, 11),
    ("Topic Modeling", 9, 10),
    ("Neural Turing Machine", 11, 10),
    ("Recursive Neural Networks", 9, 10),
    ("Attention Models", 9, 10),
    ("Generative Adversarial Networks", 10, 10),
]

# the 14-concept chain, levels 1..14 in order
CHAIN = [
    "Matrix Multiplication",
    "Differential Calculus",
    "Backpropagation",
    "Backpropagation Through Time",
    "Artificial Neural Networks",
    "Word Embeddings",
    "Word2Vec",
    "Seq2seq Models",
    "Neural Machine Translation",
    "BLEU",
    "IBM Translation Models",
    "ROUGE",
    "Automatic Summarization",
    "Scientific Article Summarization",
]

# mutual prerequisite pairs; both directions present, same level, and no
# other outgoing edges so no long path can continue through them
MUTUAL = [
    ("Lemmatization", "Stemming", 4),
    ("Knowledge Graphs", "Knowledge Base Construction", 6),
    ("Sentiment Analysis", "Opinion Mining", 6),
    ("Named Entity Recognition", "Entity Linking", 7),
    ("Speech Recognition", "Acoustic Modeling", 7),
    ("Coreference Resolution", "Anaphora Resolution", 7),
    ("Domain Adaptation", "Transfer Learning", 8),
    ("Paraphrase Detection", "Semantic Textual Similarity", 8),
    ("LDA", "Topic Modeling", 9),
    ("Question Answering", "Reading Comprehension", 9),
    ("Dialogue Systems", "Chatbots", 10),
    ("Image Captioning", "Visual Question Answering", 10),
]

ISOLATED = [
    "Morphological Disambiguation",
    "Weakly-supervised Learning",
    "Multi-task Learning",
    "ImageNet",
    "Human-robot Interaction",
    "Game Playing in AI",
    "Crowdsourcing",
]

# remaining named concepts with hand-picked levels
EXTRA_NAMED = [
    ("Dynamic Programming", 1),
    ("Markov Models", 3),
    ("Hidden Markov Models", 4),
    ("Viterbi Algorithm", 5),
    ("POS Tagging", 6),
]

FILLER = {
    1: ["Discrete Mathematics", "Set Theory"],
    2: ["Graph Theory", "Combinatorics", "Integral Calculus", "Vector Spaces",
        "Eigenvalues And Eigenvectors", "Random Variables", "Expectation And Variance",
        "Sampling Methods"],
    3: ["Joint Distributions", "Bayesian Inference", "Maximum Likelihood Estimation",
        "Gradient Descent", "Convex Optimization", "Regularization", "Overfitting",
        "Cross Validation", "Feature Engineering", "Distance Metrics",
        "Cosine Similarity", "Tokenization"],
    4: ["Stochastic Gradient Descent", "Learning Rate Schedules", "Momentum Methods",
        "Perceptron", "Linear Regression", "Logistic Regression", "Naive Bayes",
        "Decision Trees", "K-means Clustering", "Hierarchical Clustering",
        "Word Segmentation", "Stop Word Removal"],
    5: ["Support Vector Machines", "Kernel Methods", "Random Forests",
        "Gradient Boosting", "Ensemble Methods", "Principal Component Analysis",
        "Singular Value Decomposition", "Expectation Maximization",
        "Gaussian Mixture Models", "Hidden Variable Models", "N-gram Models",
        "Language Modeling", "Smoothing Techniques", "TF-IDF"],
    6: ["Bag Of Words", "Multilayer Perceptron", "Weight Initialization", "Dropout",
        "Batch Normalization", "Chain Rule", "Computational Graphs",
        "Automatic Differentiation", "Conditional Random Fields", "Markov Chains",
        "Monte Carlo Methods", "Gibbs Sampling", "Text Classification",
        "Spam Detection"],
    7: ["Recurrent Neural Networks", "Vanishing Gradients", "Long Short-Term Memory",
        "Gated Recurrent Units", "Sequence Labeling", "Chunking", "Dependency Parsing",
        "Constituency Parsing", "Syntactic Parsing", "Semantic Role Labeling",
        "Word Sense Disambiguation", "Distributional Semantics", "GloVe",
        "Subword Models"],
    8: ["Character-level Models", "Sentence Embeddings", "Contextual Embeddings",
        "Encoder-Decoder Architectures", "Beam Search", "Greedy Decoding",
        "Pointer Networks", "Copy Mechanisms", "Self-Attention", "Transformers",
        "Positional Encoding", "Residual Connections", "Layer Normalization",
        "Label Smoothing"],
    9: ["Machine Translation Evaluation", "Alignment Models", "Phrase-based Translation",
        "Statistical Machine Translation", "Subword Tokenization", "Byte Pair Encoding",
        "Text Generation", "Decoding Strategies", "Curriculum Learning",
        "Multi-head Attention", "Cross-lingual Transfer", "Zero-shot Learning"],
    10: ["Pretrained Language Models", "Fine-tuning", "ELMo", "BERT", "GPT",
         "Masked Language Modeling", "Next Sentence Prediction", "Adversarial Training",
         "Knowledge Distillation", "Model Compression", "Quantization",
         "Neural Architecture Search"],
    11: ["Graph Neural Networks", "Graph Convolutional Networks", "Node Embeddings",
         "Link Prediction", "Variational Inference", "Reparameterization Trick",
         "Evidence Lower Bound", "Normalizing Flows"],
    12: ["Summarization Evaluation", "Extractive Summarization",
         "Abstractive Summarization", "Sentence Compression", "Content Selection",
         "Discourse Parsing"],
    13: ["Multi-document Summarization", "Query-focused Summarization",
         "Citation Analysis", "Scholarly Document Processing", "Survey Generation"],
    14: ["Literature Review Automation", "Citation Recommendation",
         "Research Trend Analysis"],
}

N_CONCEPTS = 208
N_EDGES = 921
EXTRA_PER_ANNOTATOR = 378  # tuned so kappa over all ordered pairs rounds to 0.70


def build_concepts():
    """Returns (names sorted for indexing, level map, quota maps)."""
    level = {}
    out_quota = {}
    in_quota = {}
    for name, lv, q in OUT_QUOTA:
        level[name] = lv
        out_quota[name] = q
    for name, lv, q in IN_QUOTA:
        level[name] = lv
        in_quota[name] = q
    for i, name in enumerate(CHAIN, start=1):
        if name in level:
            assert level[name] == i, f"level clash for {name}"
        level[name] = i
    for a, b, lv in MUTUAL:
        for name in (a, b):
            if name in level:
                assert level[name] == lv, f"level clash for {name}"
            level[name] = lv
    for name, lv in EXTRA_NAMED:
        level[name] = lv
    for lv, names in FILLER.items():
        for name in names:
            assert name not in level, f"duplicate filler {name}"
            level[name] = lv
    names = sorted(set(level) | set(ISOLATED), key=str.casefold)
    assert len(names) == N_CONCEPTS, f"have {len(names)} concepts, want {N_CONCEPTS}"
    return names, level, out_quota, in_quota


def build_edges(rng, names, level, out_quota, in_quota):
    """Phased construction; all cross-level edges strictly increase level."""
    mutual_members = {n for a, b, _ in MUTUAL for n in (a, b)}
    isolated = set(ISOLATED)
    edges: set[tuple[str, str]] = set()
    out_deg = {n: 0 for n in names}
    in_deg = {n: 0 for n in names}

    def add(s, t):
        assert s != t and (s, t) not in edges, (s, t)
        assert s not in isolated and t not in isolated
        edges.add((s, t))
        out_deg[s] += 1
        in_deg[t] += 1

    for a, b in zip(CHAIN, CHAIN[1:]):
        add(a, b)
    for a, b, _ in MUTUAL:
        add(a, b)
        add(b, a)

    in_need = {n: q - in_deg[n] for n, q in in_quota.items()}
    # non-quota caps sit strictly below the published minima (13 out, 10 in)
    OUT_CAP, IN_CAP = 12, 9

    def in_ok(t):
        if t in in_quota:
            return in_need[t] > 0
        return in_deg[t] < IN_CAP

    # phase A: out-degree quotas, preferring targets that still owe in-degree
    for s, _, quota in sorted(OUT_QUOTA, key=lambda r: -r[2]):
        remaining = quota - out_deg[s]
        needy = [t for t in in_quota
                 if in_need[t] > 0 and level[t] > level[s] and (s, t) not in edges]
        needy.sort(key=lambda t: (-in_need[t], t))
        for t in needy[:remaining]:
            add(s, t)
            in_need[t] -= 1
            remaining -= 1
        pool = [t for t in names
                if t not in isolated and t not in in_quota
                and level.get(t, 0) > level[s] and (s, t) not in edges
                and in_deg[t] < IN_CAP]
        while remaining > 0:
            assert pool, f"no targets left for {s}"
            pool.sort(key=lambda t: (in_deg[t], t))
            k = min(remaining, max(1, len(pool) // 3))
            chosen = pool[:k]
            for t in chosen:
                add(s, t)
            remaining -= len(chosen)
            pool = [t for t in pool if in_deg[t] < IN_CAP and (s, t) not in edges]

    # phase B: top up in-degree quotas from ordinary lower-level sources
    for t in sorted(in_quota, key=lambda t: (-in_need[t], t)):
        while in_need[t] > 0:
            srcs = [s for s in names
                    if s not in isolated and s not in out_quota
                    and s not in mutual_members
                    and level.get(s, 99) < level[t]
                    and out_deg[s] < OUT_CAP and (s, t) not in edges]
            assert srcs, f"no sources left for {t}"
            srcs.sort(key=lambda s: (out_deg[s], s))
            add(srcs[0], t)
            in_need[t] -= 1

    # phase C: pad to the published edge count with ordinary pairs
    candidates = []
    for s in names:
        if s in isolated or s in out_quota or s in mutual_members:
            continue
        for t in names:
            if (t in isolated or t in in_quota or s == t
                    or level.get(s, 99) >= level.get(t, 0)):
                continue
            candidates.append((s, t))
    rng.shuffle(candidates)
    for s, t in candidates:
        if len(edges) >= N_EDGES:
            break
        if (s, t) in edges or out_deg[s] >= OUT_CAP or in_deg[t] >= IN_CAP:
            continue
        add(s, t)
    assert len(edges) == N_EDGES, f"built {len(edges)} edges, want {N_EDGES}"
    return edges


def verify(names, level, edges, out_quota, in_quota):
    """Independent recount of every published figure via networkx."""
    g = nx.DiGraph()
    g.add_nodes_from(names)
    g.add_edges_from(edges)
    assert g.number_of_nodes() == N_CONCEPTS
    assert g.number_of_edges() == N_EDGES

    mutual = {tuple(sorted(p)) for p in edges if (p[1], p[0]) in edges}
    assert len(mutual) == 12, f"{len(mutual)} mutual pairs"
    expected_mutual = {tuple(sorted((a, b))) for a, b, _ in MUTUAL}
    assert mutual == expected_mutual

    isolated = {n for n in names if g.degree(n) == 0}
    assert isolated == set(ISOLATED), isolated

    cond = nx.condensation(g)
    longest = nx.dag_longest_path(cond)
    assert len(longest) == 14, f"longest condensation path {len(longest)}"
    # the chain must realize it and stay made of singleton components
    mapping = cond.graph["mapping"]
    chain_comps = [mapping[n] for n in CHAIN]
    assert len(set(chain_comps)) == 14
    for u, v in zip(chain_comps, chain_comps[1:]):
        assert cond.has_edge(u, v)
    for comp_id in longest:
        members = cond.nodes[comp_id]["members"]
        assert len(members) == 1, f"2-cycle on a longest path: {members}"

    for name, want in out_quota.items():
        assert g.out_degree(name) == want, (name, g.out_degree(name), want)
    for name, want in in_quota.items():
        assert g.in_degree(name) == want, (name, g.in_degree(name), want)
    worst_out = max((g.out_degree(n) for n in names if n not in out_quota), default=0)
    worst_in = max((g.in_degree(n) for n in names if n not in in_quota), default=0)
    assert worst_out < min(q for q in out_quota.values()), worst_out
    assert worst_in < min(q for q in in_quota.values()), worst_in

    for s, t in edges:
        if (t, s) in edges:
            assert level[s] == level[t]
        else:
            assert level[s] < level[t], (s, t)
    print(f"verified: {N_CONCEPTS} concepts, {N_EDGES} edges, 12 mutual, "
          f"7 isolated, longest chain 14, degree tables exact")


def annotator_extras(rng, names, edges):
    """Two disjoint sets of extra edges; intersection stays the golden graph."""
    idx = {n: i for i, n in enumerate(names)}
    pool = []
    for s in names:
        for t in names:
            if s != t and (s, t) not in edges:
                pool.append((s, t))
    order = rng.permutation(len(pool))
    extra_a = [pool[i] for i in order[:EXTRA_PER_ANNOTATOR]]
    extra_b = [pool[i] for i in order[EXTRA_PER_ANNOTATOR:2 * EXTRA_PER_ANNOTATOR]]
    assert not (set(extra_a) & set(extra_b))

    n_pairs = len(names) * (len(names) - 1)
    both = len(edges)
    only = EXTRA_PER_ANNOTATOR
    p_o = (n_pairs - 2 * only) / n_pairs
    q = (both + only) / n_pairs
    p_e = q * q + (1 - q) * (1 - q)
    kappa = (p_o - p_e) / (1 - p_e)
    assert round(kappa, 2) == 0.70, kappa
    print(f"annotator kappa over {n_pairs} ordered pairs: {kappa:.4f}")
    return sorted(edges | set(extra_a)), sorted(edges | set(extra_b))


def write_graph(dirpath, names, edge_lists):
    dirpath.mkdir(parents=True, exist_ok=True)
    lines = [f"{i}\t{n}" for i, n in enumerate(names)]
    (dirpath / "concepts.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for fname, edge_list in edge_lists.items():
        lines = [f"{s}\t{t}" for s, t in edge_list]
        (dirpath / fname).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_fig1():
    names = ["Bayes Theorem", "Dynamic Programming", "Hidden Markov Models",
             "Markov Models", "POS Tagging", "Probabilities", "Viterbi Algorithm"]
    edges = [
        ("Probabilities", "Bayes Theorem"),
        ("Probabilities", "Markov Models"),
        ("Bayes Theorem", "Hidden Markov Models"),
        ("Markov Models", "Hidden Markov Models"),
        ("Dynamic Programming", "Viterbi Algorithm"),
        ("Hidden Markov Models", "Viterbi Algorithm"),
        ("Hidden Markov Models", "POS Tagging"),
        ("Viterbi Algorithm", "POS Tagging"),
    ]
    write_graph(OUT / "fig1", names, {"edges.tsv": sorted(edges)})
    print(f"fig1 fixture: {len(names)} concepts, {len(edges)} edges")


def write_taxonomy(names):
    """305 syllabus-style topic labels, coarser than the concept list."""
    base = [
        "Introduction to Neural Networks", "Machine Learning Resources",
        "Information Retrieval", "Classification", "Probabilistic Reasoning",
        "Word Embeddings", "Hidden Markov Models", "NLP Resources",
        "Machine Translation Basics", "Monte Carlo Methods",
    ]
    topics = list(base)
    seen = {t.casefold() for t in topics}
    prefixes = ["Introduction to", "Advanced", "Applications of", "Evaluation of",
                "Tools for", "Theory of", "Case Studies in"]
    i = 0
    pool = sorted(names, key=str.casefold)
    while len(topics) < 305:
        name = pool[i % len(pool)]
        prefix = prefixes[i % len(prefixes)]
        cand = f"{prefix} {name}"
        if cand.casefold() not in seen:
            seen.add(cand.casefold())
            topics.append(cand)
        i += 1
    out = OUT / "taxonomy"
    out.mkdir(parents=True, exist_ok=True)
    (out / "taxonomy_topics.txt").write_text("\n".join(topics) + "\n", encoding="utf-8")
    print(f"taxonomy fixture: {len(topics)} topics")


def main():
    rng = np.random.default_rng(SEED)
    names, level, out_quota, in_quota = build_concepts()
    edges = build_edges(rng, names, level, out_quota, in_quota)
    verify(names, level, edges, out_quota, in_quota)
    ann_a, ann_b = annotator_extras(rng, names, edges)
    write_graph(OUT / "annotation", names, {
        "edges_annotator1.tsv": ann_a,
        "edges_annotator2.tsv": ann_b,
    })
    write_fig1()
    write_taxonomy(names)
    print(f"fixtures written under {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
