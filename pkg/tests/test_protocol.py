import io
import sys
import threading

import numpy as np
import pytest

from lbr_bench.cards import NUM_HANDS
from lbr_bench.engine import Action, GameRules, apply_action, format_state, initial_state
from lbr_bench.harness import MatchConfig, evaluate
from lbr_bench.lbr import FCPA, LbrConfig
from lbr_bench.protocol import RemoteStrategy, handle_line, make_tcp_server
from lbr_bench.strategy import (HalfCallHalfRaise, MalformedResponseError, OracleError,
                                RandomLegal, make_strategy)

RULES = GameRules()
SMALL = GameRules(stack=600, small_blind=50, big_blind=100)


def canned(*lines):
    """A client whose server answers with ``lines`` whatever it is asked."""
    return RemoteStrategy(io.StringIO("".join(line + "\n" for line in lines)), io.StringIO())


def serve_cmd(strategy, rules=RULES):
    return (f"{sys.executable} -m lbr_bench serve {strategy} --stack {rules.stack} "
            f"--sb {rules.small_blind} --bb {rules.big_blind}")


@pytest.fixture
def tcp_server():
    server = make_tcp_server(RandomLegal(), rules=SMALL)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()


class TestHandleLine:
    rng = np.random.default_rng(0)

    def reply(self, line, strategy=None):
        return handle_line(strategy or HalfCallHalfRaise(), line, RULES, self.rng)

    def test_ping(self):
        assert self.reply("PING") == ["PONG"]

    def test_query_lists_every_live_hand(self):
        out = self.reply(f"QUERY {format_state(initial_state())}")
        assert out[0] == "BEGIN" and out[-1] == "END"
        assert len(out) == NUM_HANDS + 2
        entries = out[1].split()[2:]
        assert entries[0] == "c:0.5" and len(entries) == 1 + 19801
        assert entries[1].startswith("r200:") and entries[-1].startswith("r20000:")

    def test_sample(self):
        out = self.reply(f"SAMPLE {format_state(initial_state())} 5")
        assert out[0].startswith("ACT ")

    @pytest.mark.parametrize("line", ["", "BOGUS", "QUERY", "QUERY r100", "QUERY f",
                                      "SAMPLE cc", "PING extra"])
    def test_errors(self, line):
        out = self.reply(line)
        assert len(out) == 1 and out[0].startswith("ERR ")


class TestClientValidation:
    state = initial_state()

    def test_missing_begin(self):
        with pytest.raises(MalformedResponseError):
            canned("H 0 c:1", "END").query(self.state)

    def test_missing_hands(self):
        with pytest.raises(MalformedResponseError, match="live hand"):
            canned("BEGIN", "H 0 c:1", "END").query(self.state)

    def test_bad_probability_sum(self):
        lines = ["BEGIN"] + [f"H {h} c:0.4" for h in range(NUM_HANDS)] + ["END"]
        with pytest.raises(MalformedResponseError):
            canned(*lines).query(self.state)

    def test_illegal_action(self):
        lines = ["BEGIN"] + [f"H {h} r150:1" for h in range(NUM_HANDS)] + ["END"]
        with pytest.raises(MalformedResponseError):
            canned(*lines).query(self.state)

    @pytest.mark.parametrize("line", ["H x c:1", "H 0", "H 0 c:abc", "H 9999 c:1", "X 0 c:1"])
    def test_garbled_lines(self, line):
        with pytest.raises(MalformedResponseError):
            canned("BEGIN", line, "END").query(self.state)

    def test_repeated_hand(self):
        with pytest.raises(MalformedResponseError):
            canned("BEGIN", "H 0 c:1", "H 0 c:1", "END").query(self.state)

    def test_server_error_and_hangup(self):
        with pytest.raises(OracleError, match="boom"):
            canned("ERR boom").query(self.state)
        with pytest.raises(OracleError, match="closed"):
            canned().ping()

    def test_bad_sample_reply(self):
        with pytest.raises(MalformedResponseError):
            canned("NOPE").sample_action(self.state, 0)
        with pytest.raises(MalformedResponseError):
            canned("ACT zz").sample_action(self.state, 0)


class TestTransports:
    def test_stdio_query_matches_local(self):
        remote = RemoteStrategy.stdio(serve_cmd("half-raise"))
        try:
            remote.ping()
            s = apply_action(initial_state(), Action.raise_to(300))
            q = remote.query(s)
            local = HalfCallHalfRaise().query(s)
            for a in (Action.fold(), Action.call(), Action.raise_to(500), Action.raise_to(20000)):
                # probabilities travel with ten significant digits
                assert np.allclose(q.likelihood(a), local.likelihood(a), rtol=1e-9, atol=0)
        finally:
            remote.close()

    def test_tcp_query_matches_local(self, tcp_server):
        host, port = tcp_server.server_address[:2]
        remote = RemoteStrategy.tcp(host, port, SMALL)
        try:
            s = apply_action(initial_state(SMALL), Action.raise_to(300))
            q = remote.query(s)
            local = RandomLegal().query(s)
            for a in (Action.fold(), Action.call(), Action.raise_to(500), Action.raise_to(600)):
                assert np.allclose(q.likelihood(a), local.likelihood(a), rtol=1e-9)
            assert remote.sample_action(s, 0) in {Action.fold(), Action.call()} | {
                Action.raise_to(a) for a in range(500, 601)}
        finally:
            remote.close()

    def test_remote_evaluation_matches_local(self):
        # a deterministic opponent makes the two runs identical hand for hand
        base = dict(rules=SMALL, lbr=LbrConfig(FCPA, {3, 4}), pairs=20, seed=3)
        local = evaluate(MatchConfig(opponent="always-call", **base))
        oracle = RemoteStrategy.stdio(serve_cmd("always-call", SMALL), SMALL)
        try:
            remote = evaluate(MatchConfig(opponent="stdio:", **base), oracle=oracle)
        finally:
            oracle.close()
        assert remote.mean_mbb == pytest.approx(local.mean_mbb, abs=1e-9)

    def test_remote_mixed_strategy_runs_clean(self, tcp_server):
        host, port = tcp_server.server_address[:2]
        oracle = make_strategy(f"tcp:{host}:{port}", SMALL)
        try:
            # the server samples the opponent's actions from its own stream
            r = evaluate(MatchConfig(rules=SMALL, lbr=LbrConfig(FCPA, {3, 4}), pairs=6, seed=3,
                                     opponent=f"tcp:{host}:{port}"), oracle=oracle)
        finally:
            oracle.close()
        assert r.pairs == 6 and r.discarded_hands == 0

    def test_unreachable(self):
        with pytest.raises(OracleError):
            RemoteStrategy.tcp("127.0.0.1", 1, timeout=1.0)
