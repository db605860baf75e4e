"""Line-based text protocol for querying a strategy in another process.

Requests and replies, one per line::

    QUERY <state>          -> BEGIN / H <hand> <action>:<prob> ... / END
    SAMPLE <state> <hand>  -> ACT <action>
    PING                   -> PONG

Any failure is answered with ``ERR <message>``. States use the canonical
engine encoding; both ends must agree on the game rules.
"""
from __future__ import annotations

import logging
import shlex
import socket
import socketserver
import subprocess
from typing import Optional, TextIO

import numpy as np

from .cards import NUM_HANDS
from .engine import GameRules, PublicState, format_state, parse_action, parse_state
from .strategy import (MalformedResponseError, OracleError, Strategy, TableQuery,
                       live_hands)

log = logging.getLogger(__name__)


def _fmt_prob(p: float) -> str:
    return format(p, ".10g")


class RemoteStrategy(Strategy):
    """Client side: a strategy answered by a server over a text stream."""

    name = "remote"

    def __init__(self, rfile: TextIO, wfile: TextIO, rules: GameRules = GameRules(),
                 closer=None):
        self.rfile = rfile
        self.wfile = wfile
        self.rules = rules
        self._closer = closer

    @classmethod
    def tcp(cls, host: str, port: int, rules: GameRules = GameRules(),
            timeout: Optional[float] = 60.0) -> "RemoteStrategy":
        try:
            sock = socket.create_connection((host, port), timeout=timeout)
        except OSError as e:
            raise OracleError(f"cannot reach strategy server {host}:{port}: {e}") from e
        rfile = sock.makefile("r", encoding="ascii", newline="\n")
        wfile = sock.makefile("w", encoding="ascii", newline="\n")

        def closer():
            rfile.close()
            wfile.close()
            sock.close()
        return cls(rfile, wfile, rules, closer)

    @classmethod
    def stdio(cls, command: str, rules: GameRules = GameRules()) -> "RemoteStrategy":
        try:
            proc = subprocess.Popen(shlex.split(command), stdin=subprocess.PIPE,
                                    stdout=subprocess.PIPE, text=True, bufsize=1)
        except OSError as e:
            raise OracleError(f"cannot start strategy process {command!r}: {e}") from e

        def closer():
            proc.stdin.close()
            proc.wait(timeout=10)
        return cls(proc.stdout, proc.stdin, rules, closer)

    def close(self):
        if self._closer:
            closer, self._closer = self._closer, None
            closer()

    def _send(self, line: str) -> None:
        try:
            self.wfile.write(line + "\n")
            self.wfile.flush()
        except (OSError, ValueError) as e:
            raise OracleError(f"strategy connection lost: {e}") from e

    def _recv(self) -> str:
        try:
            line = self.rfile.readline()
        except (OSError, ValueError) as e:
            raise OracleError(f"strategy connection lost: {e}") from e
        if not line:
            raise OracleError("strategy closed the connection")
        line = line.rstrip("\r\n")
        if line.startswith("ERR"):
            raise OracleError(f"strategy error: {line[4:]}")
        return line

    def ping(self) -> None:
        self._send("PING")
        if self._recv() != "PONG":
            raise MalformedResponseError("expected PONG")

    def query(self, s: PublicState) -> TableQuery:
        self._send(f"QUERY {format_state(s)}")
        if self._recv() != "BEGIN":
            raise MalformedResponseError("expected BEGIN")
        rows: dict[int, str] = {}
        while True:
            line = self._recv()
            if line == "END":
                break
            parts = line.split(None, 2)
            if len(parts) < 3 or parts[0] != "H":
                raise MalformedResponseError(f"bad hand line {line!r}")
            try:
                hand = int(parts[1])
            except ValueError:
                raise MalformedResponseError(f"bad hand index in {line!r}") from None
            if not 0 <= hand < NUM_HANDS or hand in rows:
                raise MalformedResponseError(f"bad or repeated hand index {hand}")
            rows[hand] = parts[2]
        # card-independent strategies send the same body for every hand
        groups: dict[str, list[int]] = {}
        for hand, body in rows.items():
            groups.setdefault(body, []).append(hand)
        actions: dict = {}
        parsed = []
        for body, hands in groups.items():
            entries = []
            for tok in body.split():
                a, _, p = tok.partition(":")
                try:
                    entries.append((actions.setdefault(parse_action(a), len(actions)), float(p)))
                except ValueError as e:
                    raise MalformedResponseError(f"bad entry {tok!r}: {e}") from None
            parsed.append((hands, entries))
        table = np.zeros((NUM_HANDS, len(actions)))
        for hands, entries in parsed:
            row = np.zeros(len(actions))
            for col, p in entries:
                row[col] += p
            table[hands] = row
        result = TableQuery(s, list(actions), table)
        missing = set(result.hands.tolist()) - rows.keys()
        if missing:
            raise MalformedResponseError(f"no distribution for {len(missing)} live hand(s)")
        if set(rows) - set(result.hands.tolist()):
            raise MalformedResponseError("distribution given for a hand blocked by the board")
        result.validate()
        return result

    def sample_action(self, s, hand, rng=None):
        self._send(f"SAMPLE {format_state(s)} {hand}")
        line = self._recv()
        if not line.startswith("ACT "):
            raise MalformedResponseError(f"expected ACT, got {line!r}")
        try:
            return parse_action(line[4:].strip())
        except ValueError as e:
            raise MalformedResponseError(str(e)) from None


def handle_line(strategy: Strategy, line: str, rules: GameRules,
                rng: np.random.Generator) -> list[str]:
    """Server-side reply lines for one request line."""
    parts = line.split()
    try:
        if not parts:
            raise ValueError("empty request")
        cmd = parts[0]
        if cmd == "PING" and len(parts) == 1:
            return ["PONG"]
        if cmd == "QUERY" and len(parts) == 2:
            s = parse_state(parts[1], rules)
            if s.to_act is None:
                raise ValueError("no player to act")
            q = strategy.query(s)
            out = ["BEGIN"]
            # keyed by identity; the stored dist keeps the id from being reused
            bodies: dict[int, tuple] = {}
            for h in live_hands(s):
                dist = q.distribution(int(h))
                if id(dist) not in bodies:
                    body = " ".join(f"{a}:{_fmt_prob(p)}" for a, p in dist.items() if p > 0)
                    bodies[id(dist)] = (dist, body)
                out.append(f"H {h} {bodies[id(dist)][1]}")
            out.append("END")
            return out
        if cmd == "SAMPLE" and len(parts) == 3:
            s = parse_state(parts[1], rules)
            if s.to_act is None:
                raise ValueError("no player to act")
            return [f"ACT {strategy.sample_action(s, int(parts[2]), rng)}"]
        raise ValueError(f"unknown request {line.strip()!r}")
    except Exception as e:  # every failure goes back to the client
        msg = " ".join(str(e).split())
        return [f"ERR {msg or type(e).__name__}"]


def serve_stream(strategy: Strategy, rfile: TextIO, wfile: TextIO,
                 rules: GameRules = GameRules(), seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    for line in rfile:
        if not line.strip():
            continue
        wfile.write("\n".join(handle_line(strategy, line, rules, rng)) + "\n")
        wfile.flush()


def make_tcp_server(strategy: Strategy, host: str = "127.0.0.1", port: int = 0,
                    rules: GameRules = GameRules(), seed: int = 0):
    """Threaded TCP server; one connection per client, requests serialized per connection."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            rfile = (line.decode("ascii") for line in self.rfile)
            wfile = self.wfile

            class _W:
                def write(self, text):
                    wfile.write(text.encode("ascii"))

                def flush(self):
                    wfile.flush()
            serve_stream(strategy, rfile, _W(), rules, seed)

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    return Server((host, port), Handler)
