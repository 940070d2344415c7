"""HTTP inference service over a loaded bundle.

Endpoints:
  GET  /v1/health -> {"status": "ok", "model": "seq2bf"}
  POST /v1/chat   body {"query": str, "mode": "seq2bf"|"seq2seq"|"seq2bf-nokw"}
                  -> {"query", "reply", "keyword", "keyword_start",
                      "pmi_score", "candidates": [{term, score} x5], ...}

The bundle is immutable, so requests are served concurrently without
locking; the REPL in the CLI goes through the same respond() path.
"""

from __future__ import annotations

import json
import signal
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .bf import Bundle, reply, reply_seq2seq, reply_without_keyword
from .config import RunConfig
from .pmi import predict_keyword
from .seq2seq import DecodeConfig

MODES = ("seq2bf", "seq2seq", "seq2bf-nokw")
MAX_QUERY_CHARS = 500
PROTOCOL_VERSION = 1


class BadRequest(ValueError):
    pass


def _decode_config(cfg: RunConfig) -> DecodeConfig:
    return DecodeConfig(mode=cfg.decode_mode, beam_width=cfg.beam_width,
                        max_len=cfg.max_len)


def respond(bundle: Bundle, cfg: RunConfig, query: str, mode: str) -> dict:
    """One inference exchange; shared by the HTTP service and the REPL."""
    if mode not in MODES:
        raise BadRequest(f"unknown mode {mode!r}; expected one of {MODES}")
    started = time.monotonic()
    query_words = [w for w in query.split(" ") if w]
    decode_cfg = _decode_config(cfg)
    candidates = predict_keyword(bundle.stats, query_words, bundle.lexicon, k=5)
    if mode == "seq2bf":
        result = reply(bundle.s2bf, bundle.stats, bundle.lexicon, query_words,
                       decode_cfg, candidates=candidates[: cfg.keyword_fallback])
    elif mode == "seq2bf-nokw":
        result = reply_without_keyword(bundle.s2bf, query_words, decode_cfg)
    else:
        baseline = bundle.baseline if bundle.baseline is not None else bundle.s2bf.forward
        result = reply_seq2seq(baseline, bundle.vocab, query_words, decode_cfg)
    return {
        "query": query,
        "mode": mode,
        "reply": result.reply_chars,
        "keyword": result.keyword,
        "keyword_start": result.keyword_start,
        "pmi_score": result.pmi_score,
        "candidates": [{"term": c.term, "score": c.score} for c in candidates],
        "latency_ms": round((time.monotonic() - started) * 1000.0, 3),
        "protocol_version": PROTOCOL_VERSION,
    }


class _Handler(BaseHTTPRequestHandler):
    # set by make_server
    bundle: Bundle = None
    cfg: RunConfig = None

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self._send_cors()
        self.end_headers()
        self.wfile.write(body)

    def _send_cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def do_OPTIONS(self):
        self.send_response(204)
        self._send_cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        if self.path == "/v1/health":
            self._send_json(200, {"status": "ok", "model": "seq2bf"})
        else:
            self._send_json(404, {"error": f"no such endpoint: {self.path}"})

    def do_POST(self):
        if self.path != "/v1/chat":
            self._send_json(404, {"error": f"no such endpoint: {self.path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length)
            try:
                payload = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError) as exc:
                self._send_json(400, {"error": f"malformed JSON body: {exc}"})
                return
            if not isinstance(payload, dict) or not isinstance(payload.get("query"), str):
                self._send_json(400, {"error": "body must be a JSON object with a string 'query'"})
                return
            query = payload["query"]
            if len(query) > MAX_QUERY_CHARS:
                self._send_json(413, {"error": f"query longer than {MAX_QUERY_CHARS} characters"})
                return
            mode = payload.get("mode", "seq2bf")
            try:
                self._send_json(200, respond(self.bundle, self.cfg, query, mode))
            except BadRequest as exc:
                self._send_json(400, {"error": str(exc)})
        except Exception as exc:  # keep the service alive
            try:
                self._send_json(500, {"error": f"internal error: {exc}"})
            except Exception:
                pass


def make_server(bundle: Bundle, cfg: RunConfig, host: str = "127.0.0.1",
                port: int = 8040) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"bundle": bundle, "cfg": cfg})
    return ThreadingHTTPServer((host, port), handler)


def serve(bundle: Bundle, cfg: RunConfig, host: str = "127.0.0.1",
          port: int = 8040) -> None:
    """Run until interrupted; SIGINT finishes in-flight requests first."""
    server = make_server(bundle, cfg, host, port)

    def shutdown(signum, frame):
        threading.Thread(target=server.shutdown, daemon=True).start()

    previous = signal.signal(signal.SIGINT, shutdown)
    try:
        print(f"serving on http://{host}:{server.server_address[1]}")
        server.serve_forever()
    finally:
        signal.signal(signal.SIGINT, previous)
        server.server_close()
