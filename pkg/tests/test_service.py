"""HTTP service endpoint tests over a small planted state."""

import json
import threading
import urllib.error
import urllib.request

import jsonschema
import numpy as np
import pytest

from prereqchain.embed import EmbeddingMatrix
from prereqchain.pairclf import build_pair_dataset, oversample, predict_pairs, train_classifier
from prereqchain.service import SCHEMAS, ServiceState, make_server, stats_payload
from prereqchain.synth import make_planted_corpus, make_planted_graph
from prereqchain.graph import graph_statistics


def _level(name: str) -> int:
    return int(name.split()[1].removeprefix("stage"))


@pytest.fixture(scope="module")
def state():
    # depth 4 with window >= 3 makes every forward pair an edge, so the
    # label is exactly "target level above source level": linearly
    # separable on one level feature per concept.
    g = make_planted_graph(n_branches=2, depth=4, window=8)
    names = [c.name for c in g.concepts]
    X = EmbeddingMatrix(concepts=names,
                        X=np.array([[float(_level(n))] for n in names]))
    ds = oversample(build_pair_dataset(X, g), seed=0)
    clf = train_classifier("linear_svm", ds, seed=0)
    labels, _ = predict_pairs(clf, ds.features)
    assert labels == ds.labels, "fixture must be separable at accuracy 1.0"
    docset = make_planted_corpus(g, docs_per_concept=2, tokens_per_doc=30, seed=1)
    return ServiceState(graph=g, embeddings=X, classifier=clf, docset=docset)


@pytest.fixture(scope="module")
def base_url(state):
    server = make_server(loader=lambda: state)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}"
    server.shutdown()
    server.server_close()


def _request(url, method="GET", body=None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(url, data=data, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read()), dict(resp.headers)
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read()), dict(err.headers)


class TestReadEndpoints:
    def test_health(self, base_url):
        status, payload, _ = _request(f"{base_url}/health")
        assert status == 200
        assert payload == {"status": "ok"}
        jsonschema.validate(payload, SCHEMAS["health"])

    def test_concepts(self, base_url, state):
        status, payload, _ = _request(f"{base_url}/concepts")
        assert status == 200
        jsonschema.validate(payload, SCHEMAS["concepts"])
        assert [c["name"] for c in payload["concepts"]] == \
            [c.name for c in state.graph.concepts]

    def test_graph(self, base_url, state):
        status, payload, _ = _request(f"{base_url}/graph")
        assert status == 200
        jsonschema.validate(payload, SCHEMAS["graph"])
        assert len(payload["edges"]) == len(state.graph.edges)
        assert payload["stats"]["vertices"] == len(state.graph.concepts)

    def test_unknown_route(self, base_url):
        status, payload, _ = _request(f"{base_url}/nope")
        assert status == 404
        jsonschema.validate(payload, SCHEMAS["error"])

    def test_cors_headers(self, base_url):
        _, _, headers = _request(f"{base_url}/health")
        assert headers.get("Access-Control-Allow-Origin") == "*"
        req = urllib.request.Request(f"{base_url}/health", method="OPTIONS")
        with urllib.request.urlopen(req) as resp:
            assert resp.status == 204


class TestPredict:
    def test_gold_edge_is_positive(self, base_url):
        status, payload, _ = _request(
            f"{base_url}/predict?src=amber+stage01&tgt=amber+stage03")
        assert status == 200
        jsonschema.validate(payload, SCHEMAS["predict"])
        assert payload["label"] is True
        assert payload["method"] == "linear_svm"

    def test_reverse_edge_is_negative(self, base_url):
        status, payload, _ = _request(
            f"{base_url}/predict?src=amber+stage03&tgt=amber+stage01")
        assert status == 200
        assert payload["label"] is False

    def test_unknown_concept_404(self, base_url):
        status, payload, _ = _request(
            f"{base_url}/predict?src=amber+stage01&tgt=quux")
        assert status == 404
        jsonschema.validate(payload, SCHEMAS["error"])

    def test_missing_parameter_400(self, base_url):
        status, payload, _ = _request(f"{base_url}/predict?src=amber+stage01")
        assert status == 400
        jsonschema.validate(payload, SCHEMAS["error"])

    def test_same_request_same_response(self, base_url):
        url = f"{base_url}/predict?src=amber+stage01&tgt=cobalt+stage02"
        assert _request(url)[1] == _request(url)[1]


class TestPath:
    def test_path_orders_prerequisites_before_target(self, base_url, state):
        status, payload, _ = _request(f"{base_url}/path", method="POST",
                                      body={"target": "amber stage04",
                                            "known": ["amber stage02"]})
        assert status == 200
        jsonschema.validate(payload, SCHEMAS["path"])
        steps = [s["concept"] for s in payload["steps"]]
        assert steps[-1] == "amber stage04"
        assert [_level(s) for s in steps] == sorted(_level(s) for s in steps)
        assert payload["excluded_known"] == ["amber stage02"]
        assert "amber stage02" not in steps

    def test_steps_carry_resources(self, base_url):
        _, payload, _ = _request(f"{base_url}/path", method="POST",
                                 body={"target": "amber stage03"})
        assert all(len(s["resources"]) == 2 and not s["unmapped"]
                   for s in payload["steps"])

    def test_target_already_known(self, base_url):
        status, payload, _ = _request(
            f"{base_url}/path", method="POST",
            body={"target": "amber stage02", "known": ["Amber Stage02"]})
        assert status == 200
        jsonschema.validate(payload, SCHEMAS["path"])
        assert payload["steps"] == []
        assert "already known" in payload["note"]

    def test_unknown_target_404(self, base_url):
        status, payload, _ = _request(f"{base_url}/path", method="POST",
                                      body={"target": "quux"})
        assert status == 404
        jsonschema.validate(payload, SCHEMAS["error"])

    def test_unknown_known_entry_404(self, base_url):
        status, _, _ = _request(f"{base_url}/path", method="POST",
                                body={"target": "amber stage02", "known": ["quux"]})
        assert status == 404

    @pytest.mark.parametrize("body", [
        {"target": 7},
        {"target": "amber stage02", "known": "amber stage01"},
        {"target": "amber stage02", "known": [3]},
        {"target": "amber stage02", "max_depth": 0},
        {"target": "amber stage02", "max_depth": True},
        {},
    ])
    def test_malformed_body_400(self, base_url, body):
        status, payload, _ = _request(f"{base_url}/path", method="POST", body=body)
        assert status == 400
        jsonschema.validate(payload, SCHEMAS["error"])

    def test_non_json_body_400(self, base_url):
        req = urllib.request.Request(f"{base_url}/path", data=b"not json",
                                     method="POST")
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(req)
        assert err.value.code == 400


class TestResources:
    def test_documents_for_concept(self, base_url):
        status, payload, _ = _request(f"{base_url}/resources?concept=AMBER+STAGE01")
        assert status == 200
        jsonschema.validate(payload, SCHEMAS["resources"])
        assert payload["concept"] == "amber stage01"
        assert len(payload["documents"]) == 2
        assert all(d["label"] == "amber stage01" for d in payload["documents"])

    def test_unknown_concept_404(self, base_url):
        status, _, _ = _request(f"{base_url}/resources?concept=quux")
        assert status == 404

    def test_missing_parameter_400(self, base_url):
        status, _, _ = _request(f"{base_url}/resources")
        assert status == 400


class TestLifecycle:
    def test_not_loaded_returns_503(self):
        server = make_server(loader=None)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        host, port = server.server_address[:2]
        try:
            status, payload, _ = _request(f"http://{host}:{port}/health")
            assert status == 503
            assert payload == {"status": "loading"}
            status, payload, _ = _request(f"http://{host}:{port}/concepts")
            assert status == 503
            jsonschema.validate(payload, SCHEMAS["error"])
            status, _, _ = _request(f"http://{host}:{port}/path", method="POST",
                                    body={"target": "x"})
            assert status == 503
            status, payload, _ = _request(f"http://{host}:{port}/reload",
                                          method="POST", body={})
            assert status == 400
        finally:
            server.shutdown()
            server.server_close()

    def test_reload_swaps_state(self, state):
        calls = []

        def loader():
            calls.append(1)
            return state

        server = make_server(loader=loader)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        host, port = server.server_address[:2]
        try:
            assert len(calls) == 1
            status, payload, _ = _request(f"http://{host}:{port}/reload",
                                          method="POST", body={})
            assert status == 200
            assert payload == {"status": "reloaded"}
            jsonschema.validate(payload, SCHEMAS["health"])
            assert len(calls) == 2
        finally:
            server.shutdown()
            server.server_close()

    def test_predict_without_model_503(self, state):
        bare = ServiceState(graph=state.graph)
        server = make_server(loader=lambda: bare)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        host, port = server.server_address[:2]
        try:
            status, _, _ = _request(
                f"http://{host}:{port}/predict?src=amber+stage01&tgt=amber+stage02")
            assert status == 503
            status, _, _ = _request(
                f"http://{host}:{port}/resources?concept=amber+stage01")
            assert status == 503
        finally:
            server.shutdown()
            server.server_close()


class TestStateValidation:
    def test_embedding_names_must_match(self, state):
        wrong = EmbeddingMatrix(concepts=["a", "b"], X=np.zeros((2, 3)))
        with pytest.raises(ValueError, match="match graph concepts"):
            ServiceState(graph=state.graph, embeddings=wrong)

    def test_classifier_width_must_match(self, state):
        with pytest.raises(ValueError, match="embedding width"):
            ServiceState(graph=state.graph,
                         embeddings=EmbeddingMatrix(
                             concepts=[c.name for c in state.graph.concepts],
                             X=np.zeros((len(state.graph.concepts), 5))),
                         classifier=state.classifier)

    def test_stats_payload_keys(self, state):
        payload = stats_payload(graph_statistics(state.graph))
        assert payload["vertices"] == len(state.graph.concepts)
        assert payload["edges"] == len(state.graph.edges)
