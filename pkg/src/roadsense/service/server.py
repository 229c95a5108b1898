"""Stateless HTTP classification server.

Endpoints::

    GET  /v1/health    -> {"status": "ok", "model_version": ...}
    POST /v1/classify  -> see :func:`roadsense.service.classify.classify_batch`

Errors come back as ``{"error": {"code", "message", "line_or_index"}}`` with
400 for undecodable requests and 422 for sample invariant violations.
"""

from __future__ import annotations

import json
import logging
import os
import signal
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import BundleError, BundleLoadError, DataError, MalformedRow
from .bundle import ModelBundle, read_bundle
from .classify import classify_batch, encode_response, samples_from_json

log = logging.getLogger(__name__)

BUNDLE_ENV = "ROADSENSE_BUNDLE"
MAX_BODY = 16 * 1024 * 1024


class _Handler(BaseHTTPRequestHandler):
    server_version = "roadsense/1"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):
        log.info("%s - %s", self.address_string(), fmt % args)

    def _send(self, status: int, body: str) -> None:
        payload = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _error(self, status: int, code: str, message: str, where: int | None = None) -> None:
        body = {"error": {"code": code, "message": message, "line_or_index": where}}
        self._send(status, json.dumps(body, separators=(",", ":")))

    def do_GET(self):
        if self.path != "/v1/health":
            return self._error(404, "not_found", f"no route for GET {self.path}")
        body = {"status": "ok", "model_version": self.server.model_version}
        self._send(200, json.dumps(body, separators=(",", ":")))

    def do_POST(self):
        if self.path != "/v1/classify":
            return self._error(404, "not_found", f"no route for POST {self.path}")
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            return self._error(400, "bad_request", "invalid Content-Length")
        if length > MAX_BODY:
            return self._error(413, "too_large", f"request body over {MAX_BODY} bytes")
        raw = self.rfile.read(length)
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            return self._error(400, "malformed_json", str(exc))
        if not isinstance(doc, dict) or "samples" not in doc:
            return self._error(400, "malformed_request", "body must be an object with a 'samples' array")
        try:
            data = samples_from_json(doc["samples"])
        except MalformedRow as exc:
            return self._error(400, "malformed_request", exc.message, exc.where)
        try:
            response = classify_batch(self.server.bundle, data)
        except DataError as exc:
            return self._error(422, exc.code, exc.message, exc.where)
        self._send(200, encode_response(response))


class ClassificationServer(ThreadingHTTPServer):
    daemon_threads = False
    block_on_close = True

    def __init__(self, address, bundle: ModelBundle):
        self.bundle = bundle
        self.model_version = bundle.model_version
        super().__init__(address, _Handler)


def make_server(bundle: ModelBundle, host: str = "127.0.0.1", port: int = 8080) -> ClassificationServer:
    return ClassificationServer((host, port), bundle)


def resolve_bundle_path(flag: str | None) -> str:
    path = flag or os.environ.get(BUNDLE_ENV)
    if not path:
        raise BundleLoadError(f"no bundle given: pass --bundle or set {BUNDLE_ENV}")
    return path


def serve(port: int = 8080, bundle_path: str | None = None, host: str = "127.0.0.1") -> None:
    """Load the bundle once and serve until SIGINT/SIGTERM."""
    path = resolve_bundle_path(bundle_path)
    try:
        bundle = read_bundle(path)
    except (OSError, BundleError) as exc:
        raise BundleLoadError(f"cannot load bundle {path}: {exc}") from None
    server = make_server(bundle, host, port)
    log.info("serving %s on http://%s:%d", server.model_version, host, server.server_address[1])

    def _stop(signum, frame):
        # shutdown() blocks until serve_forever returns, so call it off-thread
        threading.Thread(target=server.shutdown, daemon=True).start()

    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGTERM, _stop)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
