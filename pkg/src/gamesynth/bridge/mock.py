"""Scripted stand-in engines for tests and offline runs.

    python3 -m gamesynth.bridge.mock gtp [--perspective side_to_move|black] [--garbage-handshake]
    python3 -m gamesynth.bridge.mock policy [--fault illegal|empty|garbage|hang]

Both speak over stdin/stdout, or over TCP with ``--listen PORT``.

The GTP mock keeps a real board and answers ``kata-analyze`` with a
deterministic report derived from the stones: ownership is the stone colour,
the lead is stone difference minus komi, and the win rate a logistic of the
lead. ``mock-fault KIND`` makes the next analysis misbehave
(``short_ownership``, ``winrate_high``, ``error`` or ``hang``).
"""
from __future__ import annotations

import argparse
import json
import math
import select
import socket
import sys
import time

import numpy as np

from ..go.board import Color, GoMove, IllegalMove, apply_move, empty_state, legal_points, parse_point, point_name


def mock_analysis_values(state) -> tuple[np.ndarray, float, float]:
    """Black-perspective (ownership grid, lead, win rate) the mock engine reports."""
    own = state.grid.astype(float)
    lead = float(state.stones(Color.BLACK) - state.stones(Color.WHITE)) - state.komi
    wr = round(1.0 / (1.0 + math.exp(-lead / 4.0)), 6)
    return own, lead, wr


def mock_candidates(state, k: int = 3) -> list[str]:
    c = (state.size + 1) / 2
    pts = sorted(legal_points(state), key=lambda p: (abs(p[0] - c) + abs(p[1] - c), p[0], p[1]))
    return [point_name(p) for p in pts[:k]] or ["pass"]


def mock_analysis_line(state, perspective: str = "side_to_move", fault: str = "") -> str:
    own, lead, wr = mock_analysis_values(state)
    if perspective == "side_to_move" and state.to_move == Color.WHITE:
        own, lead, wr = -own, -lead, round(1.0 - wr, 6)
    if fault == "winrate_high":
        wr = 1.2
    parts = []
    for i, (mv, visits, prior) in enumerate(zip(mock_candidates(state), (100, 60, 30), (0.5, 0.3, 0.2))):
        parts.append(f"info move {mv} visits {visits} utility 0.0 winrate {wr:.6f} scoreMean {lead - i:.1f} "
                     f"scoreLead {lead - i:.1f} prior {prior:.6f} lcb {max(wr - 0.01, 0):.6f} order {i} pv {mv}")
    flat = own[::-1].ravel()
    if fault == "short_ownership":
        flat = flat[:-1]
    return " ".join(parts) + " ownership " + " ".join(f"{v + 0.0:.6f}" for v in flat)


def render_showboard(state) -> str:
    from ..go.board import COLUMNS
    head = "   " + " ".join(COLUMNS[:state.size])
    rows = [head]
    for r in range(state.size, 0, -1):
        cells = " ".join({1: "X", -1: "O", 0: "."}[int(v)] for v in state.grid[r - 1])
        rows.append(f"{r:2d} {cells} {r:2d}")
    rows.append(head)
    return "\n" + "\n".join(rows)


class MockGtp:
    def __init__(self, out, inp, perspective: str = "side_to_move", garbage_handshake: bool = False):
        self.out = out
        self.inp = inp
        self.perspective = perspective
        self.garbage = garbage_handshake
        self.state = empty_state(19)
        self.fault = ""

    def reply(self, body: str = "", ok: bool = True) -> None:
        self.out.write(("= " if ok else "? ") + body + "\n\n")
        self.out.flush()

    def _stream(self, line: str) -> None:
        self.out.write("=\n")
        self.out.flush()
        if self.fault == "hang":
            time.sleep(3600)
        while True:
            self.out.write(line + "\n")
            self.out.flush()
            if self.inp.readable_within(0.02):
                break
        self.out.write("\n")
        self.out.flush()

    def handle(self, line: str) -> bool:
        parts = line.split()
        if not parts:
            return True
        cmd, args = parts[0], parts[1:]
        if self.garbage and cmd == "protocol_version":
            self.out.write("hello there\n\n")
            self.out.flush()
            return True
        if cmd == "protocol_version":
            self.reply("2")
        elif cmd == "name":
            self.reply("MockGo")
        elif cmd == "version":
            self.reply("1.0")
        elif cmd == "quit":
            self.reply()
            return False
        elif cmd == "boardsize":
            self.state = empty_state(int(args[0]), komi=self.state.komi)
            self.reply()
        elif cmd == "clear_board":
            self.state = empty_state(self.state.size, komi=self.state.komi)
            self.reply()
        elif cmd == "komi":
            self.state = _with(self.state, komi=float(args[0]))
            self.reply()
        elif cmd == "play":
            color = Color.BLACK if args[0].upper().startswith("B") else Color.WHITE
            try:
                self.state = apply_move(self.state, GoMove(color, parse_point(args[1], self.state.size)))
                self.reply()
            except (IllegalMove, ValueError) as exc:
                self.reply(f"illegal move: {exc}", ok=False)
        elif cmd in ("reg_genmove", "genmove"):
            color = Color.BLACK if args[0].upper().startswith("B") else Color.WHITE
            probe = self.state if self.state.to_move == color else _with(self.state, to_move=color)
            mv = mock_candidates(probe, 1)[0]
            if cmd == "genmove":
                self.state = apply_move(probe, GoMove(color, parse_point(mv, self.state.size)))
            self.reply(mv)
        elif cmd == "showboard":
            self.reply(render_showboard(self.state))
        elif cmd == "final_score":
            _, lead, _ = mock_analysis_values(self.state)
            self.reply("0" if lead == 0 else f"{'B' if lead > 0 else 'W'}+{abs(lead):g}")
        elif cmd == "final_status_list":
            self.reply("")
        elif cmd == "mock-fault":
            self.fault = args[0] if args else ""
            self.reply()
        elif cmd == "kata-analyze":
            color = Color.BLACK if args and args[0].upper().startswith("B") else Color.WHITE
            fault, self.fault = self.fault, ""
            if fault == "error":
                self.reply("analysis failed", ok=False)
                return True
            state = self.state if self.state.to_move == color else _with(self.state, to_move=color)
            self.fault = fault
            line = mock_analysis_line(state, self.perspective, fault)
            self._stream(line)
            self.fault = ""
        elif cmd == "list_commands":
            self.reply("\n".join(["protocol_version", "name", "version", "boardsize", "clear_board", "komi",
                                  "play", "genmove", "reg_genmove", "showboard", "final_score",
                                  "final_status_list", "kata-analyze", "quit"]))
        else:
            self.reply("unknown command", ok=False)
        return True


def _with(state, **kw):
    from dataclasses import replace
    return replace(state, **kw)


class _Input:
    """Line reader over a raw fd that can also answer 'is input waiting?'."""

    def __init__(self, fd: int):
        self.fd = fd
        self.buf = b""

    def readable_within(self, timeout: float) -> bool:
        if b"\n" in self.buf:
            return True
        r, _, _ = select.select([self.fd], [], [], timeout)
        return bool(r)

    def readline(self) -> str | None:
        import os
        while b"\n" not in self.buf:
            chunk = os.read(self.fd, 65536)
            if not chunk:
                if self.buf:
                    line, self.buf = self.buf, b""
                    return line.decode()
                return None
            self.buf += chunk
        line, self.buf = self.buf.split(b"\n", 1)
        return line.decode().rstrip("\r")


def _policy_logits(request: dict, fault: str) -> dict:
    from ..dou.cards import parse_cards
    legal = request["legal"]
    if fault == "illegal":
        return {"30 30": 1.0}
    # earlier legal actions and bigger plays score higher; deterministic per request
    logits = {}
    for i, key in enumerate(legal):
        n = 0 if key == "pass" else len(parse_cards(key))
        logits[key] = round(1.0 - 0.05 * i + 0.1 * n, 6)
    return logits


def serve_policy(inp: _Input, out, fault: str = "") -> None:
    while True:
        line = inp.readline()
        if line is None:
            return
        if not line.strip():
            continue
        if fault == "hang":
            time.sleep(3600)
        if fault == "empty":
            out.write("\n")
        elif fault == "garbage":
            out.write("{not json\n")
        else:
            req = json.loads(line)
            out.write(json.dumps({"v": 1, "logits": _policy_logits(req, fault)}) + "\n")
        out.flush()


def serve_gtp(inp: _Input, out, perspective: str, garbage: bool) -> None:
    engine = MockGtp(out, inp, perspective, garbage)
    while True:
        line = inp.readline()
        if line is None or not engine.handle(line):
            return


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="gamesynth.bridge.mock")
    ap.add_argument("kind", choices=["gtp", "policy"])
    ap.add_argument("--perspective", default="side_to_move", choices=["side_to_move", "black"])
    ap.add_argument("--garbage-handshake", action="store_true")
    ap.add_argument("--fault", default="", choices=["", "illegal", "empty", "garbage", "hang"])
    ap.add_argument("--listen", type=int, default=None, help="serve one TCP client at a time on this port")
    args = ap.parse_args(argv)

    def run(inp, out):
        if args.kind == "gtp":
            serve_gtp(inp, out, args.perspective, args.garbage_handshake)
        else:
            serve_policy(inp, out, args.fault)

    if args.listen is None:
        run(_Input(sys.stdin.fileno()), sys.stdout)
        return 0
    srv = socket.create_server(("127.0.0.1", args.listen))
    while True:
        conn, _ = srv.accept()
        with conn, conn.makefile("w") as out:
            run(_Input(conn.fileno()), out)


if __name__ == "__main__":
    sys.exit(main())
