"""GTP client: handshake, board synchronisation and analysis parsing.

Every analysis call rebuilds the engine's board from scratch (clear_board
then one ``play`` per move), so a failed call never leaves stale state
behind. A timed-out engine is killed; the next call reconnects.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..go.board import COLUMNS, Color, GoState, point_name
from ..go.evaluate import DEFAULT_THETA, EvalSource, OwnershipMap, PositionEval
from .transport import (BridgeError, ConnectFailed, EngineEndpoint, LineChannel, MalformedResponse,
                        ResponseTimeout)


class HandshakeTimeout(BridgeError):
    pass


class ProtocolError(BridgeError):
    pass


class EngineError(BridgeError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    """How to obtain an analysis from the engine.

    ``mode="kata"`` issues ``kata-analyze`` (or ``command``) and reads the
    streamed ``info`` lines; ``streaming=False`` expects the whole analysis
    inside one ordinary response. ``mode="final_status"`` is a fallback for
    engines without analysis extensions: ``final_score`` gives the lead,
    ``final_status_list dead`` plus area flood-fill gives ownership, and the
    win rate is a logistic squash of the lead.
    """
    mode: str = "kata"
    command: str = "kata-analyze"
    interval: int = 50
    streaming: bool = True
    min_visits: int = 0  # streamed reports below this root visit count are skipped
    perspective: str = "side_to_move"  # how the engine reports winrate/lead/ownership: or "black"
    lead_scale: float = 4.0

    def __post_init__(self):
        if self.mode not in ("kata", "final_status"):
            raise ValueError(f"unknown analysis mode {self.mode!r}")
        if self.perspective not in ("side_to_move", "black"):
            raise ValueError(f"unknown perspective {self.perspective!r}")


@dataclass(frozen=True)
class MoveCandidate:
    move: str
    visits: int
    winrate: float
    score_lead: float
    prior: float = 0.0
    order: int = 0


@dataclass(frozen=True)
class AnalysisRecord:
    size: int
    to_move: Color
    candidates: tuple[MoveCandidate, ...]
    ownership: tuple[float, ...]  # engine order: A19, B19, ..., T1 (top row first)
    win_rate: float
    score_lead: float
    perspective: str = "side_to_move"
    raw: bytes = field(default=b"", compare=False, repr=False)

    def _sign(self) -> int:
        return -1 if self.perspective == "side_to_move" and self.to_move == Color.WHITE else 1

    def black_win_rate(self) -> float:
        return self.win_rate if self._sign() == 1 else 1.0 - self.win_rate

    def black_score_lead(self) -> float:
        return self._sign() * self.score_lead

    def ownership_grid(self) -> np.ndarray:
        """Black-perspective ownership laid out like ``GoState.grid`` (row 1 first)."""
        grid = np.array(self.ownership, dtype=float).reshape(self.size, self.size)[::-1]
        return self._sign() * grid

    def to_position_eval(self, komi: float = 7.5, theta: float = DEFAULT_THETA) -> PositionEval:
        return PositionEval(OwnershipMap(np.ascontiguousarray(self.ownership_grid()), theta),
                            self.black_score_lead(), self.black_win_rate(), EvalSource.EXTERNAL_ENGINE, komi)


_SINGLE = {"move", "visits", "edgeVisits", "utility", "winrate", "scoreMean", "scoreStdev", "scoreLead",
           "scoreSelfplay", "prior", "lcb", "utilityLcb", "order", "weight", "isSymmetryOf"}
_MULTI = {"pv", "pvVisits", "pvEdgeVisits", "ownership", "ownershipStdev", "movesOwnership"}
_MOVE_RE = re.compile(r"^(pass|[A-HJ-T](1[0-9]|[1-9]))$", re.IGNORECASE)


def _num(text: str, what: str, raw: bytes) -> float:
    try:
        v = float(text)
    except ValueError:
        raise MalformedResponse(f"{what} is not a number: {text!r}", raw) from None
    if not math.isfinite(v):
        raise MalformedResponse(f"{what} is not finite: {text!r}", raw)
    return v


def parse_analysis_line(line: bytes | str, size: int, to_move: Color = Color.BLACK,
                        perspective: str = "side_to_move", require_ownership: bool = True) -> AnalysisRecord:
    """Parse one ``info move ... ownership ...`` line; total: record or MalformedResponse."""
    raw = line if isinstance(line, bytes) else line.encode("utf-8", "surrogateescape")
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedResponse("analysis line is not UTF-8", raw) from None
    toks = text.split()
    cands: list[dict] = []
    top: dict = {}
    i = 0
    while i < len(toks):
        t = toks[i]
        if t == "info":
            cands.append({})
            i += 1
            continue
        target = cands[-1] if cands else top
        if t in _MULTI:
            j = i + 1
            while j < len(toks) and toks[j] != "info" and toks[j] not in _SINGLE and toks[j] not in _MULTI:
                j += 1
            vals = toks[i + 1:j]
            if t in ("ownership", "ownershipStdev"):
                top[t] = vals
            else:
                target[t] = vals
            i = j
            continue
        if i + 1 >= len(toks):
            raise MalformedResponse(f"key {t!r} has no value", raw)
        target[t] = toks[i + 1]
        i += 2
    if not cands:
        raise MalformedResponse("no move candidates in analysis", raw)
    out = []
    for k, c in enumerate(cands):
        mv = c.get("move")
        if mv is None or not _MOVE_RE.match(mv):
            raise MalformedResponse(f"candidate {k} has a bad move {mv!r}", raw)
        if mv.lower() != "pass" and (COLUMNS.index(mv[0].upper()) >= size or int(mv[1:]) > size):
            raise MalformedResponse(f"candidate move {mv} is off the board", raw)
        if "winrate" not in c or "visits" not in c:
            raise MalformedResponse(f"candidate {mv} lacks winrate or visits", raw)
        wr = _num(c["winrate"], "winrate", raw)
        if not 0.0 <= wr <= 1.0:
            raise MalformedResponse(f"winrate {wr} outside [0, 1]", raw)
        visits = _num(c["visits"], "visits", raw)
        if visits < 0 or visits != int(visits):
            raise MalformedResponse(f"visits {c['visits']!r} is not a count", raw)
        lead = _num(c.get("scoreLead", c.get("scoreMean", "0")), "scoreLead", raw)
        prior = _num(c.get("prior", "0"), "prior", raw)
        order = int(_num(c.get("order", str(k)), "order", raw))
        out.append(MoveCandidate(mv.upper() if mv.lower() != "pass" else "pass", int(visits), wr, lead, prior, order))
    if "ownership" in top:
        own = [_num(v, "ownership", raw) for v in top["ownership"]]
        if len(own) != size * size:
            raise MalformedResponse(f"ownership has {len(own)} values, expected {size * size}", raw)
        if any(abs(v) > 1.0 for v in own):
            raise MalformedResponse("ownership value outside [-1, 1]", raw)
    elif require_ownership:
        raise MalformedResponse("analysis carries no ownership", raw)
    else:
        own = [0.0] * (size * size)
    out.sort(key=lambda c: c.order)
    best = out[0]
    return AnalysisRecord(size, Color(to_move), tuple(out), tuple(own), best.winrate, best.score_lead, perspective, raw)


def _gtp_color(color: Color) -> str:
    return "B" if color == Color.BLACK else "W"


class GtpSession:
    def __init__(self, endpoint: EngineEndpoint):
        self.endpoint = endpoint
        self.name = ""
        self.protocol_version = ""
        self._chan: Optional[LineChannel] = None
        self._connect()

    # -- connection ---------------------------------------------------------
    def _connect(self) -> None:
        self._chan = LineChannel(self.endpoint)
        timeout = self.endpoint.connect_timeout_ms / 1000
        try:
            version = self._command("protocol_version", timeout)
        except ResponseTimeout as exc:
            self.close()
            raise HandshakeTimeout("engine did not answer protocol_version", exc.raw) from None
        except (MalformedResponse, EngineError) as exc:
            self.close()
            raise ProtocolError(f"bad handshake: {exc}", exc.raw) from None
        except ConnectFailed:
            self.close()
            raise
        if not version.strip().isdigit():
            self.close()
            raise ProtocolError(f"protocol_version answered {version!r}", version.encode())
        self.protocol_version = version.strip()
        try:
            self.name = self._command("name", timeout).strip()
        except ResponseTimeout as exc:
            self.close()
            raise HandshakeTimeout("engine did not answer name", exc.raw) from None

    def _ensure(self) -> LineChannel:
        if self._chan is None or not self._chan.alive:
            if self._chan is not None:
                self._chan.close()
            self._connect()
        return self._chan

    def close(self) -> None:
        if self._chan is not None:
            self._chan.close()
            self._chan = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- commands -------------------------------------------------------------
    @property
    def _timeout(self) -> float:
        return self.endpoint.response_timeout_ms / 1000

    def _read_status(self, timeout: float) -> tuple[bool, str]:
        line = self._chan.read_line(timeout)
        while line.strip() == b"":
            line = self._chan.read_line(timeout)
        text = line.decode("utf-8", "replace")
        m = re.match(r"^([=?])(\d*)\s?(.*)$", text)
        if not m:
            self._abandon()
            raise MalformedResponse(f"response does not start with '=' or '?': {text[:60]!r}", line)
        return m.group(1) == "=", m.group(3)

    def _read_body(self, first: str, timeout: float) -> tuple[str, bytes]:
        lines = [first]
        raw = [first.encode()]
        while True:
            line = self._chan.read_line(timeout)
            if line.strip() == b"":
                break
            raw.append(line)
            lines.append(line.decode("utf-8", "replace"))
        return "\n".join(lines).strip(), b"\n".join(raw)

    def _abandon(self) -> None:
        # the stream is out of sync or hung: drop it, reconnect on next use
        if self._chan is not None:
            self._chan.close()

    def _command(self, cmd: str, timeout: Optional[float] = None) -> str:
        timeout = self._timeout if timeout is None else timeout
        self._chan.send_line(cmd)
        try:
            ok, first = self._read_status(timeout)
            body, raw = self._read_body(first, timeout)
        except ResponseTimeout:
            self._abandon()
            raise
        if not ok:
            raise EngineError(f"{cmd.split()[0]}: {body}", raw)
        return body

    def command(self, cmd: str) -> str:
        self._ensure()
        return self._command(cmd)

    def sync(self, state: GoState) -> None:
        """Reproduce ``state`` on the engine: history if known, else the bare stones."""
        self._ensure()
        self._command(f"boardsize {state.size}")
        self._command("clear_board")
        self._command(f"komi {state.komi:g}")
        if state.history:
            for mv in state.history:
                self._command(f"play {_gtp_color(mv.color)} {point_name(mv.point)}")
        else:
            for color in (Color.BLACK, Color.WHITE):
                rows, cols = np.nonzero(state.grid == int(color))
                for r, c in zip(rows.tolist(), cols.tolist()):
                    self._command(f"play {_gtp_color(color)} {point_name((c + 1, r + 1))}")

    def showboard(self, size: int) -> np.ndarray:
        return parse_showboard(self.command("showboard"), size)

    def genmove(self, state: GoState) -> Optional[str]:
        """Engine's move for the side to move (uses reg_genmove so the board is untouched)."""
        self.sync(state)
        mv = self._command(f"reg_genmove {_gtp_color(state.to_move)}").strip()
        return None if mv.lower() in ("pass", "resign") else mv.upper()

    # -- analysis -------------------------------------------------------------
    def _analyze_streaming(self, cmd: str, state: GoState, config: AnalysisConfig) -> AnalysisRecord:
        timeout = self._timeout
        self._chan.send_line(cmd)
        try:
            ok, first = self._read_status(timeout)
            if not ok:
                body, raw = self._read_body(first, timeout)
                raise EngineError(f"{cmd.split()[0]}: {body}", raw)
            pending = first.strip()
            found: Optional[bytes] = None
            while True:
                line = pending.encode() if pending else self._chan.read_line(timeout)
                pending = ""
                if line.strip() == b"":
                    break  # engine ended the analysis on its own
                if line.startswith(b"info") and b"ownership" in line:
                    if _root_visits(line) >= config.min_visits:
                        found = line
                        break
            if found is not None:
                # any new command stops the analysis; drain to its blank line
                self._chan.send_line("protocol_version")
                while self._chan.read_line(timeout).strip() != b"":
                    pass
                self._read_status(timeout)
                self._read_body("", timeout)
        except ResponseTimeout:
            self._abandon()
            raise
        if found is None:
            raise MalformedResponse("analysis ended without an ownership report")
        return parse_analysis_line(found, state.size, state.to_move, config.perspective)

    def analyze(self, state: GoState, config: AnalysisConfig = AnalysisConfig()) -> AnalysisRecord:
        self.sync(state)
        color = _gtp_color(state.to_move)
        if config.mode == "final_status":
            return self._final_status(state, config)
        cmd = f"{config.command} {color} interval {config.interval} ownership true"
        if config.streaming:
            return self._analyze_streaming(cmd, state, config)
        body = self._command(cmd)
        lines = [ln for ln in body.splitlines() if ln.startswith("info") and "ownership" in ln]
        if not lines:
            raise MalformedResponse("analysis response has no ownership report", body.encode())
        return parse_analysis_line(lines[-1], state.size, state.to_move, config.perspective)

    def _final_status(self, state: GoState, config: AnalysisConfig) -> AnalysisRecord:
        from ..go.board import from_grid, parse_point
        from ..go.fastgo import neighbor_array
        score = self._command("final_score").strip().upper()
        m = re.match(r"^([BW])\+([0-9.]+)$", score)
        if m:
            lead = float(m.group(2)) * (1 if m.group(1) == "B" else -1)
        elif score in ("0", "JIGO"):
            lead = 0.0
        else:
            raise MalformedResponse(f"final_score answered {score!r}", score.encode())
        dead = self._command("final_status_list dead").split()
        grid = state.grid.astype(int).copy()
        for name in dead:
            col, row = parse_point(name, state.size)
            grid[row - 1, col - 1] = 0
        own = _area_ownership(grid)
        mv = self._command(f"reg_genmove {_gtp_color(state.to_move)}").strip()
        wr_black = 1.0 / (1.0 + math.exp(-lead / config.lead_scale))
        flat = tuple(float(v) for v in own[::-1].ravel())
        # this mode always reports from black's side
        cand = MoveCandidate("pass" if mv.lower() in ("pass", "resign") else mv.upper(), 1, wr_black, lead)
        return AnalysisRecord(state.size, state.to_move, (cand,), flat, wr_black, lead, "black",
                              f"final_score {score}".encode())


def _root_visits(line: bytes) -> int:
    toks = line.split()
    total = 0
    for a, b in zip(toks, toks[1:]):
        if a == b"visits":
            try:
                total += int(b)
            except ValueError:
                pass
    return total


def _area_ownership(grid: np.ndarray) -> np.ndarray:
    """Area ownership of a settled board: stones plus regions bordered by one colour."""
    size = grid.shape[0]
    out = np.zeros_like(grid, dtype=float)
    seen = np.zeros_like(grid, dtype=bool)
    for r in range(size):
        for c in range(size):
            if grid[r, c]:
                out[r, c] = grid[r, c]
                continue
            if seen[r, c]:
                continue
            region, border = [], set()
            stack = [(r, c)]
            seen[r, c] = True
            while stack:
                y, x = stack.pop()
                region.append((y, x))
                for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    yy, xx = y + dy, x + dx
                    if 0 <= yy < size and 0 <= xx < size:
                        if grid[yy, xx]:
                            border.add(int(grid[yy, xx]))
                        elif not seen[yy, xx]:
                            seen[yy, xx] = True
                            stack.append((yy, xx))
            owner = border.pop() if len(border) == 1 else 0
            for y, x in region:
                out[y, x] = owner
    return out


def parse_showboard(text: str, size: int) -> np.ndarray:
    """Grid (row 1 first) from a typical ``showboard`` dump using X/O/./+ cells."""
    grid = np.zeros((size, size), dtype=np.int8)
    found = set()
    for line in text.splitlines():
        m = re.match(r"^\s*(\d{1,2})\s+(.*)$", line)
        if not m:
            continue
        row = int(m.group(1))
        if not 1 <= row <= size or row in found:
            continue
        cells = [ch for ch in m.group(2) if ch in "XxOo.+#*"]
        if len(cells) < size:
            continue
        found.add(row)
        for c, ch in enumerate(cells[:size]):
            grid[row - 1, c] = 1 if ch in "Xx#" else -1 if ch in "Oo" else 0
    if len(found) != size:
        raise MalformedResponse(f"showboard listed {len(found)} of {size} rows", text.encode())
    return grid


def gtp_session(endpoint: EngineEndpoint) -> GtpSession:
    return GtpSession(endpoint)


def gtp_play_and_analyze(session: GtpSession, state: GoState,
                         config: AnalysisConfig = AnalysisConfig()) -> AnalysisRecord:
    return session.analyze(state, config)
