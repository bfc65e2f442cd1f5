"""HTTP face of the platform.

Endpoints:

    GET/POST /update                    channel write (api_key + field1..8)
    GET  /channels/<id>/feeds.json      channel read (api_key = read key)
    POST /api/command                   inject a command over an ingress link
    GET  /api/events?after=N[&follow=0] NDJSON event stream
    GET  /api/snapshot                  current service/actuator state
    GET  /api/status                    liveness, store health, link counters

The write endpoint keeps the usual channel-server contract: the body is the
new entry id in decimal, or "0" when the key is wrong or the channel is
rate-limited. Rate limiting runs on simulation time.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qs, urlparse

from smartbuilding.core import Command, Origin, ServiceId
from smartbuilding.hetnet import LinkDownError, LinkKind
from smartbuilding.runtime import Runtime
from smartbuilding.telemetry import FeedAuthError, UnknownChannelError

log = logging.getLogger(__name__)


def _flat_params(query: dict) -> dict:
    return {k: v[0] for k, v in query.items() if v}


class BmsHandler(BaseHTTPRequestHandler):
    server_version = "smartbuilding/0.1"
    protocol_version = "HTTP/1.1"

    @property
    def runtime(self) -> Runtime:
        return self.server.runtime  # type: ignore[attr-defined]

    def log_message(self, format: str, *args) -> None:
        log.debug("%s - %s", self.address_string(), format % args)

    # -- plumbing ----------------------------------------------------------

    def _send_text(self, body: str, status: int = 200,
                   content_type: str = "text/plain; charset=utf-8") -> None:
        data = body.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _send_json(self, doc, status: int = 200) -> None:
        self._send_text(json.dumps(doc, sort_keys=True), status,
                        "application/json; charset=utf-8")

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    # -- dispatch ----------------------------------------------------------

    def do_GET(self) -> None:
        url = urlparse(self.path)
        query = parse_qs(url.query)
        parts = [p for p in url.path.split("/") if p]

        if url.path == "/update":
            return self._handle_update(_flat_params(query))
        if len(parts) == 3 and parts[0] == "channels" and parts[2] == "feeds.json":
            return self._handle_feed(parts[1], _flat_params(query))
        if url.path == "/api/snapshot":
            return self._send_json(self.runtime.snapshot())
        if url.path == "/api/status":
            return self._handle_status()
        if url.path == "/api/events":
            return self._handle_events(_flat_params(query))
        self._send_json({"error": "not found"}, 404)

    def do_POST(self) -> None:
        url = urlparse(self.path)
        if url.path == "/update":
            params = _flat_params(parse_qs(url.query))
            body = self._read_body().decode("utf-8", "replace")
            if body:
                params.update(_flat_params(parse_qs(body)))
            return self._handle_update(params)
        if url.path == "/api/command":
            return self._handle_command()
        self._send_json({"error": "not found"}, 404)

    def do_OPTIONS(self) -> None:
        # browser preflight for cross-origin JSON POSTs
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Access-Control-Max-Age", "600")
        self.send_header("Content-Length", "0")
        self.end_headers()

    # -- endpoints ---------------------------------------------------------

    def _handle_update(self, params: dict) -> None:
        body = self.runtime.store.handle_update(params, self.runtime.now)
        self._send_text(body)

    def _handle_feed(self, channel_token: str, params: dict) -> None:
        try:
            channel_id = int(channel_token)
        except ValueError:
            return self._send_json({"error": "bad channel id"}, 404)
        results: Optional[int] = None
        if "results" in params:
            try:
                results = int(params["results"])
            except ValueError:
                return self._send_json({"error": "bad results count"}, 400)
        try:
            doc = self.runtime.store.query_feed(
                channel_id, read_key=params.get("api_key"), results=results)
        except UnknownChannelError:
            return self._send_json({"error": "unknown channel"}, 404)
        except FeedAuthError:
            return self._send_json({"error": "bad read key"}, 401)
        except ValueError as exc:
            return self._send_json({"error": str(exc)}, 400)
        self._send_json(doc)

    def _handle_command(self) -> None:
        try:
            doc = json.loads(self._read_body() or b"{}")
            raw = Command(
                ServiceId(doc["service"]),
                doc["action"],
                doc.get("params", {}),
                Origin(doc.get("origin", "push_button")),
                0,
            )
            via = LinkKind(doc.get("via", "wifi"))
        except (KeyError, ValueError, TypeError) as exc:
            return self._send_json({"error": f"bad command: {exc}"}, 400)
        try:
            mapped = self.runtime.submit_command(raw, via=via)
        except LinkDownError as exc:
            return self._send_json({"error": str(exc)}, 503)
        except RuntimeError as exc:
            return self._send_json({"error": str(exc)}, 409)
        self._send_json(
            {"accepted": True, "origin": mapped.origin.value, "t": mapped.t}, 202)

    def _handle_status(self) -> None:
        self._send_json({
            "status": "ok",
            "t": self.runtime.now,
            "finished": self.runtime.finished,
            "store": self.runtime.store.status(),
            "links": self.runtime.links.counts(),
        })

    def _handle_events(self, params: dict) -> None:
        try:
            after = int(params.get("after", 0))
        except ValueError:
            return self._send_json({"error": "bad after"}, 400)
        follow = params.get("follow", "1") not in ("0", "false", "no")

        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson; charset=utf-8")
        self.send_header("Cache-Control", "no-store")
        self.send_header("Access-Control-Allow-Origin", "*")
        # stream until the run ends; length is unknowable up front
        self.send_header("Connection", "close")
        self.end_headers()

        from smartbuilding.core import envelope_to_dict

        bus = self.runtime.bus
        try:
            while True:
                envelopes = bus.wait(after, timeout=0.25) if follow else bus.poll(after)
                for env in envelopes:
                    line = json.dumps(envelope_to_dict(env), sort_keys=True) + "\n"
                    self.wfile.write(line.encode("utf-8"))
                    after = env.seq
                if envelopes:
                    self.wfile.flush()
                if not follow or (bus.closed and bus.last_seq <= after):
                    break
        except (BrokenPipeError, ConnectionResetError):
            pass


class BmsServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address: tuple, runtime: Runtime) -> None:
        super().__init__(address, BmsHandler)
        self.runtime = runtime


def serve(runtime: Runtime, host: str = "127.0.0.1", port: int = 8000,
          speed: float = 10.0, block: bool = True) -> BmsServer:
    """Start the HTTP server plus a pacer thread stepping the simulation.

    speed is sim-time acceleration: 10.0 runs a 1000 ms tick every 100 ms.
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    server = BmsServer((host, port), runtime)

    def pace() -> None:
        delay = runtime.scenario.tick_ms / 1000.0 / speed
        while not runtime.finished:
            runtime.step()
            time.sleep(delay)

    pacer = threading.Thread(target=pace, name="sim-pacer", daemon=True)
    pacer.start()
    server.pacer = pacer  # type: ignore[attr-defined]

    if block:
        try:
            server.serve_forever(poll_interval=0.1)
        except KeyboardInterrupt:
            pass
        finally:
            server.shutdown()
    else:
        serve_thread = threading.Thread(
            target=server.serve_forever, kwargs={"poll_interval": 0.1},
            name="http-server", daemon=True)
        serve_thread.start()
        server.serve_thread = serve_thread  # type: ignore[attr-defined]
    return server
