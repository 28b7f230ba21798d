"""WebSocket bridge between the broker and operator consoles.

Outbound: every message on the allowlisted topics is forwarded to every
connected console as one JSON text frame; JSON payloads ride under
"payload", binary ones (TUIO) under "payload_b64".

Inbound: consoles may only publish ui/* topics, and each message is
validated against its schema before it touches the broker; anything
invalid is answered with an error frame and never forwarded.
"""

from __future__ import annotations

import base64
import json
import queue
import threading
from typing import Optional

from websockets.sync.server import serve

from . import messages
from .broker import Broker, Envelope

DEFAULT_WS_PORT = 7789

DEFAULT_ALLOWLIST = (
    "robot/#",
    "tracking/#",
    "intent/#",
    "swarm/#",
    "sim/tick",
    "ui/#",
)

_BINARY_TOPICS = ("tracking/tuio",)


def encode_ws_message(env: Envelope) -> str:
    doc: dict = {"topic": env.topic, "t": env.timestamp_us}
    if env.topic in _BINARY_TOPICS:
        doc["payload_b64"] = base64.b64encode(env.payload).decode("ascii")
    else:
        try:
            doc["payload"] = messages.loads(env.payload)
        except (UnicodeDecodeError, json.JSONDecodeError):
            doc["payload_b64"] = base64.b64encode(env.payload).decode("ascii")
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


class ConsoleBridge:
    def __init__(
        self,
        hub: Broker,
        host: str = "127.0.0.1",
        port: int = DEFAULT_WS_PORT,
        allowlist: tuple[str, ...] = DEFAULT_ALLOWLIST,
    ):
        self.hub = hub
        self.host = host
        self.port = port
        self.allowlist = allowlist
        self._server = None
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        self._server = serve(self._handle, self.host, self.port)
        # resolve the actual port when 0 was requested
        self.port = self._server.socket.getsockname()[1]
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="console-bridge", daemon=True
        )
        self._thread.start()

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    # ----------------------------------------------------------- connection

    def _handle(self, ws) -> None:
        outbound: "queue.Queue[Optional[str]]" = queue.Queue(maxsize=10_000)
        client = self.hub.client(f"console:{id(ws):x}")

        def enqueue(env: Envelope) -> None:
            try:
                outbound.put_nowait(encode_ws_message(env))
            except queue.Full:
                pass  # console too slow: drop rather than stall the broker

        client.on_message = enqueue
        for pattern in self.allowlist:
            client.subscribe(pattern)

        def pump() -> None:
            while True:
                item = outbound.get()
                if item is None:
                    return
                try:
                    ws.send(item)
                except Exception:
                    return

        sender = threading.Thread(target=pump, daemon=True)
        sender.start()
        try:
            for raw in ws:
                reply = self._handle_inbound(client, raw)
                if reply is not None:
                    ws.send(reply)
        except Exception:
            pass
        finally:
            client.close()
            outbound.put(None)

    def _handle_inbound(self, client, raw) -> Optional[str]:
        def error(message: str) -> str:
            return json.dumps({"error": message}, sort_keys=True, separators=(",", ":"))

        if isinstance(raw, bytes):
            return error("binary frames are not accepted")
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            return error(f"not valid JSON: {exc.msg}")
        if not isinstance(doc, dict) or "topic" not in doc:
            return error("message must be an object with a topic")
        topic = doc["topic"]
        if not isinstance(topic, str) or not topic.startswith("ui/"):
            return error(f"consoles may only publish ui/* topics, not {topic!r}")
        payload = doc.get("payload")
        problems = messages.validate_ui_message(topic, payload)
        if problems:
            return error(f"schema violation on {topic}: " + "; ".join(problems))
        client.publish(topic, messages.dumps(payload))
        return None


def serve_console(
    hub: Broker,
    host: str = "127.0.0.1",
    port: int = DEFAULT_WS_PORT,
    allowlist: tuple[str, ...] = DEFAULT_ALLOWLIST,
) -> ConsoleBridge:
    bridge = ConsoleBridge(hub, host, port, allowlist)
    bridge.start()
    return bridge
