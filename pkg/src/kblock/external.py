"""Client side of the external scorer wire protocol.

Newline-delimited JSON, UTF-8, one object per line, over a provider
subprocess's stdin/stdout or a TCP stream:

    harness:  {"type": "hello", "protocol": 1}
    provider: {"type": "hello", "protocol": 1, "modes": ["generative", "mlm"],
               "max_tokens": 512}
    harness:  {"type": "score", "id": "req-000001", "mode": "generative",
               "sentences": ["...", "..."]}
    provider: {"type": "result", "id": "req-000001", "score": -3.27,
               "token_count": 188}
          or: {"type": "error", "id": "req-000001", "message": "..."}

Providers tokenize internally and must return a per-token mean
log-likelihood, which keeps them interchangeable with the built-in scorers.
One request is in flight per handle at any time; open several handles for
parallelism.
"""

from __future__ import annotations

import json
import math
import shlex
import socket
import subprocess
import threading
from dataclasses import replace
from queue import Empty, Queue
from typing import Sequence

from .corpus import Document
from .scoring import ScoreResult

PROTOCOL_VERSION = 1
MODES = ("generative", "mlm")
DEFAULT_TIMEOUT_S = 120.0


class ExternalScorerError(Exception):
    """Base for anything that goes wrong across the process boundary."""

    def __init__(self, message: str, request_id: str | None = None):
        self.request_id = request_id
        if request_id:
            message = f"[{request_id}] {message}"
        super().__init__(message)


class ProtocolError(ExternalScorerError):
    """The provider violated the wire format."""


class ProviderReportedError(ExternalScorerError):
    """The provider answered with an error object."""


class ScoreTimeout(ExternalScorerError):
    """No response within the per-document timeout."""


class _StdioTransport:
    def __init__(self, cmd: Sequence[str]):
        self._proc = subprocess.Popen(
            list(cmd),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
            bufsize=1,
        )
        self._lines: Queue[str | None] = Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self) -> None:
        assert self._proc.stdout is not None
        try:
            for line in self._proc.stdout:
                self._lines.put(line)
        finally:
            self._lines.put(None)

    def send_line(self, line: str) -> None:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ProtocolError(f"provider process closed its input: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        try:
            line = self._lines.get(timeout=timeout)
        except Empty:
            raise ScoreTimeout(f"no provider response within {timeout:g} s") from None
        if line is None:
            code = self._proc.poll()
            raise ProtocolError(f"provider closed its output (exit code {code})")
        return line

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                if self._proc.stdin:
                    self._proc.stdin.close()
                self._proc.wait(timeout=3)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
                self._proc.wait(timeout=3)


class _TcpTransport:
    def __init__(self, host: str, port: int, connect_timeout: float = 10.0):
        self._sock = socket.create_connection((host, port), timeout=connect_timeout)
        self._reader = self._sock.makefile("r", encoding="utf-8", newline="\n")

    def send_line(self, line: str) -> None:
        try:
            self._sock.sendall((line + "\n").encode("utf-8"))
        except OSError as exc:
            raise ProtocolError(f"provider connection lost: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        self._sock.settimeout(timeout)
        try:
            line = self._reader.readline()
        except socket.timeout:
            raise ScoreTimeout(f"no provider response within {timeout:g} s") from None
        if not line:
            raise ProtocolError("provider closed the connection")
        return line

    def close(self) -> None:
        try:
            self._reader.close()
            self._sock.close()
        except OSError:
            pass


class ExternalScorerHandle:
    """One connection to one provider; never interleaves two requests."""

    def __init__(self, transport, timeout_s: float = DEFAULT_TIMEOUT_S):
        self._transport = transport
        self.timeout_s = timeout_s
        self._lock = threading.Lock()
        self._counter = 0
        self.modes: tuple[str, ...] = ()
        self.max_tokens: int | None = None
        self._handshaken = False

    @classmethod
    def spawn(cls, cmd: Sequence[str] | str, timeout_s: float = DEFAULT_TIMEOUT_S
              ) -> "ExternalScorerHandle":
        argv = shlex.split(cmd) if isinstance(cmd, str) else list(cmd)
        return cls(_StdioTransport(argv), timeout_s)

    @classmethod
    def connect(cls, host: str, port: int, timeout_s: float = DEFAULT_TIMEOUT_S
                ) -> "ExternalScorerHandle":
        return cls(_TcpTransport(host, port), timeout_s)

    def _recv_obj(self, timeout: float, request_id: str | None = None) -> dict:
        line = self._transport.recv_line(timeout)
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"provider sent unparseable JSON: {exc}", request_id) from exc
        if not isinstance(obj, dict):
            raise ProtocolError("provider sent a non-object line", request_id)
        return obj

    def handshake(self) -> None:
        if self._handshaken:
            return
        with self._lock:
            if self._handshaken:
                return
            self._transport.send_line(json.dumps({"type": "hello", "protocol": PROTOCOL_VERSION}))
            reply = self._recv_obj(self.timeout_s)
            if reply.get("type") != "hello":
                raise ProtocolError(f"expected hello reply, got {reply.get('type')!r}")
            if reply.get("protocol") != PROTOCOL_VERSION:
                raise ProtocolError(f"unsupported protocol version {reply.get('protocol')!r}")
            modes = reply.get("modes")
            if (
                not isinstance(modes, list)
                or not modes
                or not all(m in MODES for m in modes)
            ):
                raise ProtocolError(f"invalid modes in hello reply: {modes!r}")
            max_tokens = reply.get("max_tokens")
            if not isinstance(max_tokens, int) or isinstance(max_tokens, bool) or max_tokens < 1:
                raise ProtocolError(f"invalid max_tokens in hello reply: {max_tokens!r}")
            self.modes = tuple(modes)
            self.max_tokens = max_tokens
            self._handshaken = True

    def request(self, obj: dict, timeout: float | None = None) -> dict:
        """Send one raw object, receive one reply. Conformance checks use
        this to craft traffic the typed API would refuse to send."""
        with self._lock:
            self._transport.send_line(json.dumps(obj, ensure_ascii=False))
            return self._recv_obj(timeout or self.timeout_s, obj.get("id"))

    def score(self, sentences: Sequence[str], mode: str) -> ScoreResult:
        if mode not in MODES:
            raise ValueError(f"unknown scoring mode {mode!r}")
        self.handshake()
        self._counter += 1
        request_id = f"req-{self._counter:06d}"
        reply = self.request(
            {"type": "score", "id": request_id, "mode": mode, "sentences": list(sentences)}
        )
        kind = reply.get("type")
        if kind == "error":
            raise ProviderReportedError(str(reply.get("message", "unspecified provider error")), request_id)
        if kind != "result":
            raise ProtocolError(f"expected result, got type {kind!r}", request_id)
        if reply.get("id") != request_id:
            raise ProtocolError(f"response id {reply.get('id')!r} does not match", request_id)
        if "score" not in reply:
            raise ProtocolError("response is missing the 'score' field", request_id)
        score = reply["score"]
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise ProtocolError(f"score must be a number, got {score!r}", request_id)
        if not math.isfinite(score):
            raise ProtocolError("non-finite score", request_id)
        token_count = reply.get("token_count")
        if not isinstance(token_count, int) or isinstance(token_count, bool) or token_count < 1:
            raise ProtocolError(f"invalid token_count {token_count!r}", request_id)
        return ScoreResult(doc_id="", score=float(score), token_count=token_count)

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> "ExternalScorerHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def external_score(
    sentences: Sequence[str], endpoint: ExternalScorerHandle, mode: str
) -> ScoreResult:
    """One score request over an established handle; the provider's score
    and token_count are passed through verbatim."""
    return endpoint.score(sentences, mode)


class ExternalScorer:
    """DocumentScorer adapter over a handle, for the evaluation runner."""

    def __init__(self, handle: ExternalScorerHandle, mode: str = "generative"):
        if mode not in MODES:
            raise ValueError(f"unknown scoring mode {mode!r}")
        self.handle = handle
        self.mode = mode
        self.name = f"external-{mode}"

    def score_document(self, doc: Document) -> ScoreResult:
        result = self.handle.score([s.text for s in doc.sentences], self.mode)
        return replace(result, doc_id=doc.id)
