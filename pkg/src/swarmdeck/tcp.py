"""TCP transport for the broker: listener, per-connection pumps, and a client.

One reader thread per connection parses frames and drives the routing core;
one writer thread drains that connection's outbound buffer, so delivery to
distinct subscribers proceeds concurrently while each subscriber sees a
strictly ordered stream. Outbound buffers are drained in whole batches and
writers are only woken on the empty-to-nonempty transition, which keeps the
per-message cost low enough for thousands of fan-out deliveries per second
even with every endpoint in one process. A connection that breaks mid-write
is detached silently, matching the at-most-once contract.
"""

from __future__ import annotations

import socket
import threading
import time
from collections import deque
from typing import Callable, Optional

from .broker import (
    CONNECT,
    ERROR,
    PING,
    PONG,
    PUBLISH,
    SUBSCRIBE,
    Broker,
    Envelope,
    Frame,
    FrameDecoder,
    ProtocolError,
    decode_publish_body,
    encode_frame,
    encode_publish_body,
)

DEFAULT_PORT = 7788

_STOP = object()


class _Outbox:
    """Batch-draining handoff buffer between producers and one consumer.

    Appends ride on the GIL-atomic deque with no lock; the condition is
    only taken to park and wake the consumer, so a busy consumer costs the
    producers nothing and batches form naturally under load.
    """

    def __init__(self) -> None:
        self._items: deque = deque()
        self._cond = threading.Condition()
        self._parked = False

    def put(self, item) -> None:
        self._items.append(item)
        if self._parked:
            with self._cond:
                self._cond.notify()

    def _take_all(self) -> list:
        batch = []
        items = self._items
        while True:
            try:
                batch.append(items.popleft())
            except IndexError:
                return batch

    def drain(self, timeout: Optional[float] = None) -> list:
        if self._items:
            return self._take_all()
        with self._cond:
            self._parked = True
            # a producer appending before _parked was visible is caught here
            if not self._items:
                self._cond.wait(timeout)
            self._parked = False
        return self._take_all()


class BrokerServer:
    """Accepts framed-protocol connections and bridges them into a Broker."""

    def __init__(self, hub: Broker, host: str = "127.0.0.1", port: int = DEFAULT_PORT):
        self.hub = hub
        self.host = host
        self.port = port
        self._sock: Optional[socket.socket] = None
        self._running = False

    def start(self) -> None:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((self.host, self.port))
        sock.listen(64)
        self.port = sock.getsockname()[1]
        self._sock = sock
        self._running = True
        threading.Thread(target=self._accept_loop, name="broker-accept", daemon=True).start()

    def stop(self) -> None:
        self._running = False
        if self._sock is not None:
            try:
                self._sock.close()
            except OSError:
                pass

    def _accept_loop(self) -> None:
        assert self._sock is not None
        while self._running:
            try:
                client, addr = self._sock.accept()
            except OSError:
                break
            client.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            _ServerConnection(self.hub, client, f"tcp:{addr[0]}:{addr[1]}")


class _ServerConnection:
    def __init__(self, hub: Broker, sock: socket.socket, name: str):
        self.hub = hub
        self.sock = sock
        self.outbound = _Outbox()
        self.conn = hub.attach(name, self._enqueue)
        self._alive = True
        threading.Thread(target=self._read_loop, name=f"{name}-rd", daemon=True).start()
        threading.Thread(target=self._write_loop, name=f"{name}-wr", daemon=True).start()

    def _enqueue(self, env: Envelope) -> None:
        if not self._alive:
            raise ConnectionError("connection closed")
        self.outbound.put(env)

    def _send_error(self, message: str) -> None:
        self.outbound.put(Frame(ERROR, message.encode("utf-8")))

    def _close(self) -> None:
        if not self._alive:
            return
        self._alive = False
        self.hub.detach(self.conn)
        self.outbound.put(_STOP)
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass

    def _read_loop(self) -> None:
        decoder = FrameDecoder()
        try:
            while self._alive:
                data = self.sock.recv(1 << 16)
                if not data:
                    break
                for frame in decoder.feed(data):
                    self._handle(frame)
        except ProtocolError as exc:
            self._send_error(f"protocol error: {exc}")
            time.sleep(0.05)  # give the writer a chance to flush the ERROR
        except OSError:
            pass
        finally:
            self._close()

    def _handle(self, frame: Frame) -> None:
        if frame.frame_type == PUBLISH:
            try:
                env = decode_publish_body(frame.body)
                self.hub.publish(self.conn, env.topic, env.payload, env.timestamp_us)
            except ProtocolError as exc:
                self._send_error(f"bad publish: {exc}")
        elif frame.frame_type == SUBSCRIBE:
            try:
                self.hub.subscribe(self.conn, frame.body.decode("utf-8"))
            except (ProtocolError, UnicodeDecodeError) as exc:
                self._send_error(f"bad filter: {exc}")
        elif frame.frame_type == CONNECT:
            self.conn.name = frame.body.decode("utf-8", "replace") or self.conn.name
        elif frame.frame_type == PING:
            self.outbound.put(Frame(PONG))
        # PONG / ERROR from a client are ignored.

    def _write_loop(self) -> None:
        try:
            while True:
                batch = self.outbound.drain()
                if not batch:
                    continue
                chunks = []
                stop = False
                for item in batch:
                    if item is _STOP:
                        stop = True
                        break
                    chunks.append(self._to_bytes(item))
                if chunks:
                    self.sock.sendall(b"".join(chunks))
                if stop:
                    break
        except OSError:
            pass
        finally:
            self._close()

    @staticmethod
    def _to_bytes(item) -> bytes:
        if isinstance(item, Envelope):
            return encode_frame(
                Frame(PUBLISH, encode_publish_body(item.topic, item.timestamp_us, item.payload))
            )
        return encode_frame(item)


class BrokerClient:
    """Socket client for the framed protocol.

    Received PUBLISH envelopes go to `on_message` (called on the reader
    thread) and to an internal buffer consumable via `get`.
    """

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = DEFAULT_PORT,
        name: str = "client",
        on_message: Optional[Callable[[Envelope], None]] = None,
        connect_timeout: float = 5.0,
    ):
        self.on_message = on_message
        self.errors: list[str] = []
        self._sock = socket.create_connection((host, port), timeout=connect_timeout)
        self._sock.settimeout(None)
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._inbox: deque[Envelope] = deque()
        self._inbox_cond = threading.Condition()
        self._pong = threading.Event()
        self._closed = False
        self._send_lock = threading.Lock()
        self._send(Frame(CONNECT, name.encode("utf-8")))
        self._reader = threading.Thread(target=self._read_loop, name=f"{name}-rd", daemon=True)
        self._reader.start()

    def _send(self, frame: Frame) -> None:
        with self._send_lock:
            self._sock.sendall(encode_frame(frame))

    def subscribe(self, pattern: str) -> None:
        self._send(Frame(SUBSCRIBE, pattern.encode("utf-8")))

    def publish(self, topic: str, payload: bytes, timestamp_us: int = 0) -> None:
        self._send(Frame(PUBLISH, encode_publish_body(topic, timestamp_us, payload)))

    def publish_many(self, items) -> int:
        """Pipeline many (topic, payload, timestamp_us) publishes in one write.

        A streaming publisher should not pay one syscall and one GIL
        round-trip per message; this is the bulk path the throughput
        benchmark uses.
        """
        chunks = [
            encode_frame(Frame(PUBLISH, encode_publish_body(topic, ts, payload)))
            for topic, payload, ts in items
        ]
        with self._send_lock:
            self._sock.sendall(b"".join(chunks))
        return len(chunks)

    def ping(self, timeout: float = 5.0) -> bool:
        """Round-trip a PING; also serves as a subscribe barrier."""
        self._pong.clear()
        self._send(Frame(PING))
        return self._pong.wait(timeout)

    def get(self, timeout: Optional[float] = None) -> Optional[Envelope]:
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._inbox_cond:
            while not self._inbox:
                remaining = None if deadline is None else deadline - time.monotonic()
                if remaining is not None and remaining <= 0:
                    return None
                self._inbox_cond.wait(remaining)
            return self._inbox.popleft()

    def _read_loop(self) -> None:
        decoder = FrameDecoder()
        try:
            while not self._closed:
                data = self._sock.recv(1 << 16)
                if not data:
                    break
                received = []
                for frame in decoder.feed(data):
                    if frame.frame_type == PUBLISH:
                        env = decode_publish_body(frame.body)
                        received.append(env)
                        if self.on_message is not None:
                            self.on_message(env)
                    elif frame.frame_type == PONG:
                        self._pong.set()
                    elif frame.frame_type == ERROR:
                        self.errors.append(frame.body.decode("utf-8", "replace"))
                if received:
                    with self._inbox_cond:
                        self._inbox.extend(received)
                        self._inbox_cond.notify_all()
        except (OSError, ProtocolError):
            pass

    def close(self) -> None:
        self._closed = True
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()
