"""Wire-protocol server: answers handshake and score requests on stdio or a
TCP socket, one connection at a time. Per-request failures become error
objects; the process keeps serving."""

from __future__ import annotations

import json
import math
import socket
import sys

from .scorer import BridgeScorer

PROTOCOL = 1


def _reply_for(scorer: BridgeScorer, obj: dict) -> dict:
    kind = obj.get("type")
    if kind == "hello":
        return {
            "type": "hello",
            "protocol": PROTOCOL,
            "modes": scorer.modes,
            "max_tokens": scorer.max_tokens,
        }
    if kind != "score":
        return {"type": "error", "id": obj.get("id"),
                "message": f"unknown request type {kind!r}"}
    rid = obj.get("id")
    sentences = obj.get("sentences")
    mode = obj.get("mode")
    if not isinstance(sentences, list) or not sentences or \
            not all(isinstance(s, str) for s in sentences):
        return {"type": "error", "id": rid,
                "message": "sentences must be a non-empty list of strings"}
    try:
        score, token_count = scorer.score(sentences, mode)
    except Exception as exc:  # per-request failure, keep serving
        return {"type": "error", "id": rid, "message": f"{type(exc).__name__}: {exc}"}
    if not math.isfinite(score):
        return {"type": "error", "id": rid, "message": "model produced a non-finite score"}
    return {"type": "result", "id": rid, "score": score, "token_count": token_count}


def serve_lines(scorer: BridgeScorer, lines, out) -> None:
    for line in lines:
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            reply = {"type": "error", "id": None, "message": "unparseable request"}
        else:
            reply = _reply_for(scorer, obj if isinstance(obj, dict) else {})
        out.write(json.dumps(reply, ensure_ascii=False) + "\n")
        out.flush()


def serve_stdio(scorer: BridgeScorer) -> None:
    serve_lines(scorer, sys.stdin, sys.stdout)


def serve_tcp(scorer: BridgeScorer, port: int) -> None:
    server = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    server.bind(("127.0.0.1", port))
    server.listen(1)
    sys.stdout.write(f"listening on 127.0.0.1:{server.getsockname()[1]}\n")
    sys.stdout.flush()
    conn, _ = server.accept()
    with conn.makefile("r", encoding="utf-8") as rf, \
            conn.makefile("w", encoding="utf-8") as wf:
        serve_lines(scorer, rf, wf)
