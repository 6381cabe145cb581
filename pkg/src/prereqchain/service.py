"""JSON-over-HTTP service exposing the loaded graph, models, and lectures.

All state is loaded once and treated as immutable; requests only read it.
POST /reload rebuilds the artifacts and swaps the whole state object in a
single assignment, so in-flight requests keep the snapshot they started
with. Every response body validates against the matching entry in SCHEMAS.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import pathgen
from .corpus import DocumentSet, ingest_documents, load_document_set
from .embed import EmbeddingMatrix, build_concept_matrix, load_pvdm
from .graph import ConceptGraph, GraphStats, graph_statistics, load_concept_graph
from .pairclf import PairClassifier, load_classifier, predict_pairs

log = logging.getLogger(__name__)

_RESOURCE = {
    "type": "object",
    "required": ["id", "path"],
    "properties": {"id": {"type": "string"}, "path": {"type": "string"}},
    "additionalProperties": False,
}
_STEP = {
    "type": "object",
    "required": ["concept", "resources", "unmapped"],
    "properties": {
        "concept": {"type": "string"},
        "resources": {"type": "array", "items": _RESOURCE},
        "unmapped": {"type": "boolean"},
    },
    "additionalProperties": False,
}
_NAME_COUNT = {
    "type": "array",
    "prefixItems": [{"type": "string"}, {"type": "integer"}],
    "items": False,
    "minItems": 2,
}

SCHEMAS: dict[str, dict] = {
    "health": {
        "type": "object",
        "required": ["status"],
        "properties": {"status": {"enum": ["ok", "loading", "reloaded"]}},
        "additionalProperties": False,
    },
    "error": {
        "type": "object",
        "required": ["error"],
        "properties": {"error": {"type": "string"}},
        "additionalProperties": False,
    },
    "concepts": {
        "type": "object",
        "required": ["concepts"],
        "properties": {
            "concepts": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["index", "name"],
                    "properties": {"index": {"type": "integer"},
                                   "name": {"type": "string"}},
                    "additionalProperties": False,
                },
            },
        },
        "additionalProperties": False,
    },
    "graph": {
        "type": "object",
        "required": ["edges", "stats"],
        "properties": {
            "edges": {
                "type": "array",
                "items": {
                    "type": "array",
                    "items": {"type": "integer"},
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
            "stats": {
                "type": "object",
                "required": ["vertices", "edges", "negative_pairs",
                             "mutual_pairs", "isolated", "longest_path_len",
                             "longest_path", "top_in", "top_out"],
                "properties": {
                    "vertices": {"type": "integer"},
                    "edges": {"type": "integer"},
                    "negative_pairs": {"type": "integer"},
                    "mutual_pairs": {"type": "array"},
                    "isolated": {"type": "array", "items": {"type": "string"}},
                    "longest_path_len": {"type": "integer"},
                    "longest_path": {"type": "array", "items": {"type": "string"}},
                    "top_in": {"type": "array", "items": _NAME_COUNT},
                    "top_out": {"type": "array", "items": _NAME_COUNT},
                },
                "additionalProperties": False,
            },
        },
        "additionalProperties": False,
    },
    "predict": {
        "type": "object",
        "required": ["source", "target", "score", "label", "method"],
        "properties": {
            "source": {"type": "string"},
            "target": {"type": "string"},
            "score": {"type": "number"},
            "label": {"type": "boolean"},
            "method": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "path": {
        "type": "object",
        "required": ["target", "steps", "excluded_known"],
        "properties": {
            "target": {"type": "string"},
            "steps": {"type": "array", "items": _STEP},
            "excluded_known": {"type": "array", "items": {"type": "string"}},
            "note": {"type": "string"},
        },
        "additionalProperties": False,
    },
    "resources": {
        "type": "object",
        "required": ["concept", "documents"],
        "properties": {
            "concept": {"type": "string"},
            "documents": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["id", "path", "domain", "label"],
                    "properties": {
                        "id": {"type": "string"},
                        "path": {"type": "string"},
                        "domain": {"type": "string"},
                        "label": {"type": "string"},
                        "course": {"type": ["string", "null"]},
                    },
                    "additionalProperties": False,
                },
            },
        },
        "additionalProperties": False,
    },
}


@dataclass
class ServiceState:
    """Everything a request can read. Built once, swapped atomically."""
    graph: ConceptGraph
    embeddings: EmbeddingMatrix | None = None
    classifier: PairClassifier | None = None
    docset: DocumentSet | None = None
    config: dict = field(default_factory=dict)
    mapping: dict[str, str] = field(init=False)
    index: dict = field(init=False)

    def __post_init__(self):
        names = [c.name for c in self.graph.concepts]
        if self.embeddings is not None and self.embeddings.concepts != names:
            raise ValueError("embedding rows must match graph concepts")
        if (self.classifier is not None and self.embeddings is not None
                and self.classifier.n_features != 2 * self.embeddings.X.shape[1]):
            raise ValueError("classifier expects a different embedding width")
        if self.docset is not None:
            labels = [d.taxonomy_label for d in self.docset.documents
                      if d.taxonomy_label]
            self.mapping = pathgen.concept_taxonomy_mapping(names, labels)
            self.index = pathgen.resource_index(self.docset)
        else:
            self.mapping = {}
            self.index = {}


def stats_payload(stats: GraphStats) -> dict:
    return {
        "vertices": stats.n_concepts,
        "edges": stats.n_edges,
        "negative_pairs": stats.n_negative_pairs,
        "mutual_pairs": [list(pair) for pair in stats.mutual_pairs],
        "isolated": list(stats.isolated),
        "longest_path_len": stats.longest_path_len,
        "longest_path": list(stats.longest_path),
        "top_in": [[name, count] for name, count in stats.top_in],
        "top_out": [[name, count] for name, count in stats.top_out],
    }


def load_graph_dir(path: str | Path, merge: str = "intersection") -> ConceptGraph:
    """Load concepts.tsv plus every edges*.tsv from one directory."""
    root = Path(path)
    concepts = root / "concepts.tsv"
    if not concepts.exists():
        raise FileNotFoundError(f"no concepts.tsv under {root}")
    edge_paths = sorted(root.glob("edges*.tsv"))
    if not edge_paths:
        raise FileNotFoundError(f"no edges*.tsv under {root}")
    if len(edge_paths) == 1 and merge == "intersection":
        merge = "single"
    return load_concept_graph(concepts, edge_paths, merge=merge)


def _load_corpus(path: str | Path, provenance: str) -> DocumentSet:
    p = Path(path)
    if p.is_file() and p.suffix == ".json":
        return load_document_set(p)
    return ingest_documents(p, provenance=provenance)


def build_state(config: dict) -> ServiceState:
    """Load every artifact named in the config into one ServiceState."""
    if "graph" not in config:
        raise ValueError("config needs a 'graph' directory")
    g = load_graph_dir(config["graph"], merge=config.get("merge", "intersection"))
    embeddings = None
    if config.get("model"):
        model = load_pvdm(config["model"])
        embeddings = build_concept_matrix(model, [c.name for c in g.concepts])
    classifier = load_classifier(config["classifier"]) if config.get("classifier") else None
    docset = None
    if config.get("corpus"):
        docset = _load_corpus(config["corpus"],
                              config.get("provenance", "lecturebank"))
    return ServiceState(graph=g, embeddings=embeddings, classifier=classifier,
                        docset=docset, config=dict(config))


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    # ---- plumbing ----

    def log_message(self, fmt, *args):
        log.debug("%s %s", self.address_string(), fmt % args)

    def _send(self, code: int, payload: dict) -> None:
        body = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str) -> None:
        self._send(code, {"error": message})

    def _state(self) -> ServiceState | None:
        return self.server.state

    def _query(self) -> dict[str, str]:
        qs = parse_qs(urlparse(self.path).query)
        return {k: v[0] for k, v in qs.items()}

    def _route(self) -> str:
        return urlparse(self.path).path.rstrip("/") or "/"

    # ---- verbs ----

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        route = self._route()
        state = self._state()
        if route == "/health":
            if state is None:
                self._send(503, {"status": "loading"})
            else:
                self._send(200, {"status": "ok"})
            return
        if state is None:
            self._error(503, "artifacts not loaded yet")
            return
        if route == "/concepts":
            self._send(200, {"concepts": [{"index": c.index, "name": c.name}
                                          for c in state.graph.concepts]})
        elif route == "/graph":
            stats = graph_statistics(state.graph)
            self._send(200, {"edges": sorted([s, t] for s, t in state.graph.edges),
                             "stats": stats_payload(stats)})
        elif route == "/predict":
            self._predict(state)
        elif route == "/resources":
            self._resources(state)
        else:
            self._error(404, f"no such route {route!r}")

    def do_POST(self):
        route = self._route()
        if route == "/reload":
            self._reload()
            return
        state = self._state()
        if state is None:
            self._error(503, "artifacts not loaded yet")
            return
        if route == "/path":
            self._path(state)
        else:
            self._error(404, f"no such route {route!r}")

    # ---- endpoints ----

    def _predict(self, state: ServiceState) -> None:
        if state.embeddings is None or state.classifier is None:
            self._error(503, "prediction model not loaded")
            return
        query = self._query()
        if "src" not in query or "tgt" not in query:
            self._error(400, "predict needs src and tgt query parameters")
            return
        try:
            si = state.graph.resolve(query["src"])
            ti = state.graph.resolve(query["tgt"])
        except KeyError as exc:
            self._error(404, str(exc.args[0]))
            return
        features = np.hstack([state.embeddings.X[si], state.embeddings.X[ti]])
        labels, scores = predict_pairs(state.classifier, features[None, :])
        self._send(200, {
            "source": state.graph.concepts[si].name,
            "target": state.graph.concepts[ti].name,
            "score": float(scores[0]),
            "label": bool(labels[0]),
            "method": state.classifier.kind,
        })

    def _resources(self, state: ServiceState) -> None:
        if state.docset is None:
            self._error(503, "no corpus loaded")
            return
        query = self._query()
        if "concept" not in query:
            self._error(400, "resources needs a concept query parameter")
            return
        try:
            idx = state.graph.resolve(query["concept"])
        except KeyError as exc:
            self._error(404, str(exc.args[0]))
            return
        name = state.graph.concepts[idx].name
        label = state.mapping.get(name.casefold())
        docs = state.index.get(label.casefold(), []) if label else []
        self._send(200, {
            "concept": name,
            "documents": [{"id": d.id, "path": d.source_path,
                           "domain": d.domain_tag, "label": d.taxonomy_label,
                           "course": d.course} for d in docs],
        })

    def _path(self, state: ServiceState) -> None:
        try:
            length = int(self.headers.get("Content-Length", 0))
            body = json.loads(self.rfile.read(length) or b"{}")
        except (ValueError, json.JSONDecodeError):
            self._error(400, "body must be a JSON object")
            return
        if not isinstance(body, dict) or not isinstance(body.get("target"), str):
            self._error(400, "body must be a JSON object with a string 'target'")
            return
        known = body.get("known", [])
        if not isinstance(known, list) or not all(isinstance(k, str) for k in known):
            self._error(400, "'known' must be a list of concept names")
            return
        max_depth = body.get("max_depth")
        if max_depth is not None and (not isinstance(max_depth, int)
                                      or isinstance(max_depth, bool) or max_depth < 1):
            self._error(400, "'max_depth' must be a positive integer")
            return
        try:
            tidx = state.graph.resolve(body["target"])
            known_names = [state.graph.concepts[state.graph.resolve(k)].name
                           for k in known]
        except KeyError as exc:
            self._error(404, str(exc.args[0]))
            return
        target_name = state.graph.concepts[tidx].name
        if target_name in known_names:
            self._send(200, {"target": target_name, "steps": [],
                             "excluded_known": [],
                             "note": f"target {target_name!r} is already known"})
            return
        path = pathgen.prerequisite_closure(
            state.graph, target_name, known=known_names,
            prune_satisfied=bool(body.get("prune_satisfied", False)),
            max_depth=max_depth)
        if state.docset is not None:
            path = pathgen.attach_resources(path, state.index, state.mapping)
        self._send(200, json.loads(pathgen.path_to_json(path)))

    def _reload(self) -> None:
        if self.server.loader is None:
            self._error(400, "no loader configured")
            return
        try:
            fresh = self.server.loader()
        except Exception as exc:
            self._error(500, f"reload failed: {exc}")
            return
        self.server.state = fresh
        self._send(200, {"status": "reloaded"})


class PrereqService(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, loader=None):
        super().__init__(address, _Handler)
        self.loader = loader
        self.state: ServiceState | None = loader() if loader is not None else None


def make_server(loader=None, host: str = "127.0.0.1", port: int = 0) -> PrereqService:
    """Bind a service; port 0 picks a free port. Call serve_forever() to run."""
    return PrereqService((host, port), loader=loader)


def serve(config: dict) -> None:
    """Load artifacts per config and serve until interrupted."""
    server = make_server(lambda: build_state(config),
                         host=config.get("host", "127.0.0.1"),
                         port=int(config.get("port", 8080)))
    host, port = server.server_address[:2]
    log.info("serving on http://%s:%d", host, port)
    print(f"serving on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
