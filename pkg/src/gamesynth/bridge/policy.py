"""Line-delimited JSON policy protocol for external Doudizhu oracles.

Request (one line)::

    {"v": 1, "seat": 0, "landlord": 0, "hand": "3 3 4 ...", "history": [[0, "3 3"], [1, "pass"]],
     "dominant": "3 3" | null, "hand_sizes": [20, 17, 17], "legal": ["4 4", ..., "pass"]}

Response (one line)::

    {"v": 1, "logits": {"4 4": 1.3, "pass": -0.2}}

Keys are action encodings as produced by ``Combo.encode``. Every key must
name a legal action; legal actions left out simply receive no entry.
"""
from __future__ import annotations

import json
import math
from typing import Optional

from ..dou.agents import ScoredActions
from ..dou.cards import encode_cards
from ..dou.state import DouState, legal_actions
from .transport import BridgeError, EngineEndpoint, LineChannel, MalformedResponse, ResponseTimeout

PROTOCOL_VERSION = 1


class UnknownActionInResponse(BridgeError):
    pass


def encode_request(state: DouState) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "seat": state.to_move,
        "landlord": state.landlord,
        "hand": encode_cards(state.hand),
        "history": [[seat, combo.encode()] for seat, combo in state.history],
        "dominant": None if state.dominant is None else state.dominant[1].encode(),
        "hand_sizes": [len(h) for h in state.hands],
        "legal": [a.encode() for a in legal_actions(state)],
    }


def decode_response(line: bytes, state: DouState) -> ScoredActions:
    if not line.strip():
        raise MalformedResponse("empty response line", line)
    try:
        msg = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedResponse(f"response is not JSON: {exc}", line) from None
    if not isinstance(msg, dict) or msg.get("v") != PROTOCOL_VERSION:
        raise MalformedResponse("response lacks protocol version 1", line)
    logits = msg.get("logits")
    if not isinstance(logits, dict) or not logits:
        raise MalformedResponse("response has no logits", line)
    lookup = {a.encode(): a for a in legal_actions(state)}
    entries = []
    for key, val in logits.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            raise MalformedResponse(f"logit for {key!r} is not a finite number", line)
        text = " ".join(str(key).split())
        action = lookup.get("pass" if text.lower() == "pass" else text)
        if action is None:
            raise UnknownActionInResponse(f"{key!r} is not a legal action here", line)
        entries.append((action, float(val)))
    entries.sort(key=lambda e: e[0].sort_key)
    return ScoredActions(tuple(entries), normalized=False)


class PolicyClient:
    def __init__(self, endpoint: EngineEndpoint):
        self.endpoint = endpoint
        self._chan: Optional[LineChannel] = None

    def _ensure(self) -> LineChannel:
        if self._chan is None or not self._chan.alive:
            if self._chan is not None:
                self._chan.close()
            self._chan = LineChannel(self.endpoint)
        return self._chan

    def query(self, state: DouState) -> ScoredActions:
        chan = self._ensure()
        chan.send_line(json.dumps(encode_request(state), separators=(",", ":")))
        try:
            line = chan.read_line(self.endpoint.response_timeout_ms / 1000)
        except ResponseTimeout:
            self.close()
            raise
        return decode_response(line, state)

    def close(self) -> None:
        if self._chan is not None:
            self._chan.close()
            self._chan = None


def policy_query(endpoint: EngineEndpoint, state: DouState) -> ScoredActions:
    client = PolicyClient(endpoint)
    try:
        return client.query(state)
    finally:
        client.close()
