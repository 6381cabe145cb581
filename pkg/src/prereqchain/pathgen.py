"""Learning paths: ordered prerequisites for a target concept.

The prerequisite closure walks edges backwards from the target, drops
concepts the reader already knows, and orders the rest topologically on
the cycle-collapsed graph. Steps can then be annotated with matching
lecture documents through the concept-to-taxonomy mapping.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from .corpus import Document, DocumentSet
from .graph import ConceptGraph, ancestors_of, topological_order

log = logging.getLogger(__name__)


@dataclass
class PathStep:
    concept: str
    resources: list[dict] = field(default_factory=list)
    unmapped: bool = False  # concept had no taxonomy mapping when attaching


@dataclass
class LearningPath:
    target: str
    steps: list[PathStep]
    excluded_known: list[str]


def prerequisite_closure(g: ConceptGraph, target: str, known=(),
                         prune_satisfied: bool = False,
                         max_depth: int | None = None) -> LearningPath:
    """Everything to study before the target, ending with the target.

    known concepts are removed from the steps; with prune_satisfied their
    prerequisites disappear too unless some path to the target avoids the
    known set. max_depth optionally cuts the backward walk short.
    """
    t = g.resolve(target)
    known_idx = {g.resolve(name) for name in known}
    known_idx.discard(t)  # the target stays a step even when marked known

    if prune_satisfied or max_depth is not None:
        # reverse BFS that can skip known vertices and track depth
        rev: dict[int, list[int]] = {}
        for s, d in g.edges:
            rev.setdefault(d, []).append(s)
        depth = {t: 0}
        frontier = [t]
        while frontier:
            nxt = []
            for v in frontier:
                if max_depth is not None and depth[v] >= max_depth:
                    continue
                for p in rev.get(v, ()):
                    if p in depth:
                        continue
                    if prune_satisfied and p in known_idx:
                        # known vertex: recorded but never expanded, so
                        # concepts reachable only through it drop out
                        depth[p] = depth[v] + 1
                        continue
                    depth[p] = depth[v] + 1
                    nxt.append(p)
            frontier = nxt
        reached = set(depth) - {t}
    else:
        reached = ancestors_of(g, t)

    step_idx = (reached - known_idx) | {t}
    ordered = topological_order(g, step_idx)
    ordered.remove(t)
    ordered.append(t)  # a mutual pair containing the target could hide it
    excluded = sorted((g.concepts[v].name for v in reached & known_idx),
                      key=str.casefold)
    return LearningPath(target=g.concepts[t].name,
                        steps=[PathStep(concept=g.concepts[v].name) for v in ordered],
                        excluded_known=excluded)


def concept_taxonomy_mapping(concept_names, taxonomy_labels,
                             overrides: dict[str, str] | None = None) -> dict[str, str]:
    """Casefolded exact-name matches, with explicit overrides on top."""
    by_fold = {label.casefold(): label for label in taxonomy_labels}
    mapping = {}
    for name in concept_names:
        key = name.casefold()
        if key in by_fold:
            mapping[key] = by_fold[key]
    for concept, label in (overrides or {}).items():
        mapping[concept.casefold()] = label
    return mapping


def resource_index(docset: DocumentSet) -> dict[str, list[Document]]:
    """Documents grouped by casefolded taxonomy label."""
    index: dict[str, list[Document]] = {}
    for doc in docset.documents:
        if doc.taxonomy_label:
            index.setdefault(doc.taxonomy_label.casefold(), []).append(doc)
    return index


def attach_resources(path: LearningPath, index: dict[str, list[Document]],
                     mapping: dict[str, str], limit: int = 5) -> LearningPath:
    """Annotate each step with up to limit documents for its taxonomy label."""
    steps = []
    for step in path.steps:
        label = mapping.get(step.concept.casefold())
        if label is None:
            steps.append(PathStep(concept=step.concept, unmapped=True))
            continue
        docs = index.get(label.casefold(), [])[:limit]
        steps.append(PathStep(
            concept=step.concept,
            resources=[{"id": d.id, "path": d.source_path} for d in docs]))
    return LearningPath(target=path.target, steps=steps,
                        excluded_known=list(path.excluded_known))


def path_to_json(path: LearningPath) -> str:
    payload = {
        "target": path.target,
        "steps": [{"concept": s.concept, "resources": s.resources,
                   "unmapped": s.unmapped} for s in path.steps],
        "excluded_known": path.excluded_known,
    }
    return json.dumps(payload, sort_keys=True, indent=2)
