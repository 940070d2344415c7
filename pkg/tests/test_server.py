import json
import threading

import pytest
import requests

from seq2bf import server as server_mod
from seq2bf.bf import load_bundle
from seq2bf.config import RunConfig
from seq2bf.server import make_server


@pytest.fixture(scope="module")
def live_server(bundle_dir):
    bundle = load_bundle(bundle_dir / "bundle.manifest")
    cfg = RunConfig(max_len=24)
    server = make_server(bundle, cfg, host="127.0.0.1", port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    yield base
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)


def test_health(live_server):
    body = requests.get(live_server + "/v1/health", timeout=5).json()
    assert body == {"status": "ok", "model": "seq2bf"}


def test_chat_seq2bf_contains_keyword(live_server):
    resp = requests.post(live_server + "/v1/chat",
                         json={"query": "qa fd", "mode": "seq2bf"}, timeout=10)
    assert resp.status_code == 200
    body = resp.json()
    assert body["query"] == "qa fd"
    assert body["keyword"] == "zv"
    start = body["keyword_start"]
    assert body["reply"][start - 1 : start + 1] == "zv"
    assert isinstance(body["pmi_score"], float)
    assert len(body["candidates"]) <= 5
    assert body["candidates"][0]["term"] == "zv"


def test_chat_nokw_mode_nulls_keyword_fields(live_server):
    body = requests.post(live_server + "/v1/chat",
                         json={"query": "qa fd", "mode": "seq2bf-nokw"},
                         timeout=10).json()
    assert body["keyword"] is None
    assert body["keyword_start"] is None
    assert body["pmi_score"] is None


def test_chat_seq2seq_mode(live_server):
    body = requests.post(live_server + "/v1/chat",
                         json={"query": "qb fe", "mode": "seq2seq"},
                         timeout=10).json()
    assert body["keyword"] is None
    assert body["reply"]


def test_malformed_json_400(live_server):
    resp = requests.post(live_server + "/v1/chat", data=b"{not json",
                         headers={"Content-Type": "application/json"}, timeout=5)
    assert resp.status_code == 400
    assert "error" in resp.json()


def test_non_string_query_400(live_server):
    resp = requests.post(live_server + "/v1/chat", json={"query": 5}, timeout=5)
    assert resp.status_code == 400


def test_unknown_mode_400(live_server):
    resp = requests.post(live_server + "/v1/chat",
                         json={"query": "hi", "mode": "telepathy"}, timeout=5)
    assert resp.status_code == 400


def test_overlong_query_413(live_server):
    resp = requests.post(live_server + "/v1/chat",
                         json={"query": "x" * 501, "mode": "seq2bf"}, timeout=5)
    assert resp.status_code == 413


def test_unknown_endpoint_404(live_server):
    assert requests.get(live_server + "/v1/nope", timeout=5).status_code == 404


def test_cors_headers_and_preflight(live_server):
    resp = requests.options(live_server + "/v1/chat", timeout=5)
    assert resp.status_code == 204
    assert resp.headers["Access-Control-Allow-Origin"] == "*"
    resp = requests.get(live_server + "/v1/health", timeout=5)
    assert resp.headers["Access-Control-Allow-Origin"] == "*"


def test_identical_posts_identical_bodies(live_server):
    payload = {"query": "qc fe", "mode": "seq2bf"}
    a = requests.post(live_server + "/v1/chat", json=payload, timeout=10).json()
    b = requests.post(live_server + "/v1/chat", json=payload, timeout=10).json()
    a.pop("latency_ms")
    b.pop("latency_ms")
    assert a == b


def test_internal_error_500_and_service_survives(live_server, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("injected failure")

    monkeypatch.setattr(server_mod, "respond", boom)
    resp = requests.post(live_server + "/v1/chat",
                         json={"query": "qa fd", "mode": "seq2bf"}, timeout=5)
    assert resp.status_code == 500
    monkeypatch.undo()
    resp = requests.get(live_server + "/v1/health", timeout=5)
    assert resp.status_code == 200


def test_utf8_round_trip(live_server):
    query = "qa 雨天 fd"
    body = requests.post(live_server + "/v1/chat",
                         json={"query": query, "mode": "seq2bf"}, timeout=10).json()
    assert body["query"] == query
