import json
import subprocess
import sys

import pytest

from lbr_bench import cli
from lbr_bench.preflop import load_table


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestEval:
    def test_text_report(self, capsys, small_table):
        code, out, _ = run(capsys, "eval", "--opponent", "always-call", "--bets", "fc",
                           "--pairs", "20", "--no-imaginary",
                           "--table-path", str(small_table.path))
        assert code == cli.EXIT_OK
        assert "mBB/h" in out and "always-call" in out

    def test_json_report(self, capsys):
        code, out, _ = run(capsys, "eval", "--opponent", "always-fold", "--lbr-rounds", "2-4",
                           "--pairs", "10", "--format", "json")
        assert code == cli.EXIT_OK
        data = json.loads(out)
        # the chump folds preflop whenever it faces the blind, whoever LBR is
        assert data["mean_mbb"] == 750.0
        assert data["config"]["lbr_rounds"] == "2-4"

    def test_rules_and_sampled_queries(self, capsys):
        code, out, _ = run(capsys, "eval", "--opponent", "always-call", "--lbr-rounds", "4",
                           "--pairs", "5", "--stack", "1000", "--sampled-queries", "--format",
                           "json")
        assert code == cli.EXIT_OK
        data = json.loads(out)
        assert data["config"]["stack"] == 1000 and data["config"]["sampled_queries"] == 10

    def test_discards_exit_code(self, capsys):
        # sampled raise sizes rarely match the observed one, so ranges collapse
        code, out, err = run(capsys, "eval", "--opponent", "half-raise", "--lbr-rounds", "4",
                             "--pairs", "20", "--sampled-queries", "2", "--format", "json")
        assert code == cli.EXIT_DISCARDS
        assert json.loads(out)["discarded_pairs"] > 0 and "discard" in err

    def test_missing_table(self, capsys, tmp_path):
        code, _, err = run(capsys, "eval", "--opponent", "always-call", "--pairs", "2",
                           "--table-path", str(tmp_path / "none.bin"))
        assert code == cli.EXIT_TABLE and "build-tables" in err

    def test_unreachable_oracle(self, capsys):
        code, _, _ = run(capsys, "eval", "--opponent", "tcp:127.0.0.1:1", "--lbr-rounds", "4",
                         "--pairs", "2")
        assert code == cli.EXIT_ORACLE

    def test_bad_values(self, capsys):
        assert run(capsys, "eval", "--opponent", "nobody", "--lbr-rounds", "4")[0] == \
            cli.EXIT_USAGE
        assert run(capsys, "eval", "--opponent", "always-call", "--pairs", "0",
                   "--lbr-rounds", "4")[0] == cli.EXIT_USAGE

    def test_bad_syntax_exits_with_usage(self, capsys):
        with pytest.raises(SystemExit) as e:
            cli.main(["eval", "--opponent", "always-call", "--bets", "wat"])
        assert e.value.code == cli.EXIT_USAGE


class TestOtherCommands:
    def test_build_tables(self, capsys, tmp_path):
        out_path = tmp_path / "t.bin"
        code, out, _ = run(capsys, "build-tables", "--mc-boards", "50", "--seed", "4",
                           "--out", str(out_path))
        assert code == cli.EXIT_OK and "47008" in out
        table = load_table(out_path)
        assert (table.seed, table.boards) == (4, 50)

    def test_selfcheck(self, capsys):
        code, out, _ = run(capsys, "selfcheck")
        assert code == cli.EXIT_OK
        assert "FAIL" not in out

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "lbr_bench", "serve", "always-call"],
                              input="PING\nBOGUS\n", capture_output=True, text=True, timeout=60)
        assert proc.returncode == 0
        assert proc.stdout.splitlines() == ["PONG", "ERR unknown request 'BOGUS'"]
