"""Command line entry point: ``lbr-bench eval | build-tables | selfcheck | serve``."""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .engine import GameRules
from .harness import DiscardRateError, MatchConfig, evaluate
from .lbr import BetSet, LbrConfig, parse_rounds
from .preflop import DEFAULT_MC_BOARDS, DEFAULT_PATH, TableError, build_preflop_table
from .strategy import BUILTIN, OracleError, make_strategy

# exit codes by failure category
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_ORACLE = 3
EXIT_TABLE = 4
EXIT_DISCARDS = 5

log = logging.getLogger("lbr_bench")


def _rules(args) -> GameRules:
    return GameRules(stack=args.stack, small_blind=args.sb, big_blind=args.bb)


def _add_rules(p):
    p.add_argument("--stack", type=int, default=20000)
    p.add_argument("--sb", type=int, default=50)
    p.add_argument("--bb", type=int, default=100)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lbr-bench",
        description="Lower-bound exploitability of heads-up no-limit hold'em strategies "
                    "via local best response.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="play LBR against a strategy and report its winnings")
    ev.add_argument("--opponent", required=True,
                    help=f"{' | '.join(BUILTIN)} | tcp:<host:port> | stdio:<cmd>")
    ev.add_argument("--bets", default="fcpa", type=BetSet.parse,
                    help="fc | fcpa | 56bets | custom:<fractions>[,allin] (default fcpa)")
    ev.add_argument("--lbr-rounds", default=parse_rounds("1-4"), type=parse_rounds,
                    help="rounds where LBR decides, e.g. 1-4 or 3-4; it calls elsewhere")
    ev.add_argument("--pairs", type=int, default=1000, help="number of duplicate pairs")
    ev.add_argument("--seed", type=int, default=0)
    _add_rules(ev)
    ev.add_argument("--sampled-queries", type=int, nargs="?", const=10, default=None,
                    metavar="N", help="estimate distributions from N samples per hand "
                                      "(default 10 when given without a value)")
    ev.add_argument("--no-duplicate", action="store_true")
    ev.add_argument("--no-imaginary", action="store_true")
    ev.add_argument("--format", choices=("text", "json"), default="text")
    ev.add_argument("--table-path", default=None,
                    help=f"preflop equity table (default {DEFAULT_PATH})")
    ev.add_argument("--workers", type=int, default=1)

    bt = sub.add_parser("build-tables", help="compute the preflop equity table")
    grp = bt.add_mutually_exclusive_group()
    grp.add_argument("--exact", action="store_true",
                     help="enumerate every board (slow: about an hour)")
    grp.add_argument("--mc-boards", type=int, default=DEFAULT_MC_BOARDS)
    bt.add_argument("--seed", type=int, default=0)
    bt.add_argument("--out", default=str(DEFAULT_PATH))

    sc = sub.add_parser("selfcheck", help="run the built-in invariant checks")
    sc.add_argument("--seed", type=int, default=0)

    sv = sub.add_parser("serve", help="expose a built-in strategy over the text protocol")
    sv.add_argument("strategy", choices=sorted(BUILTIN))
    sv.add_argument("--tcp", metavar="HOST:PORT", help="listen on a socket instead of stdio")
    sv.add_argument("--seed", type=int, default=0)
    _add_rules(sv)
    return parser


def cmd_eval(args) -> int:
    cfg = MatchConfig(
        rules=_rules(args),
        lbr=LbrConfig(args.bets, args.lbr_rounds, args.sampled_queries),
        opponent=args.opponent, pairs=args.pairs, seed=args.seed,
        duplicate=not args.no_duplicate, imaginary=not args.no_imaginary,
        table_path=args.table_path, workers=args.workers)
    try:
        report = evaluate(cfg)
    except DiscardRateError as e:
        print(e.report.to_json() if args.format == "json" else e.report.to_text())
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DISCARDS
    print(report.to_json() if args.format == "json" else report.to_text())
    return EXIT_OK


def cmd_build_tables(args) -> int:
    t = time.time()

    def progress(done, total):
        if done % 10 == 0 or done == total:
            log.info("preflop table: %d/%d first hands (%.0fs)", done, total, time.time() - t)
    table = build_preflop_table(exact=args.exact, mc_boards=args.mc_boards, seed=args.seed,
                                progress=progress)
    table.save(args.out)
    print(f"wrote {table.method_name} table with {len(table.records)} matchup classes "
          f"to {args.out}")
    return EXIT_OK


def cmd_selfcheck(args) -> int:
    from . import selfcheck
    return EXIT_OK if selfcheck.run(args.seed) else EXIT_FAILURE


def cmd_serve(args) -> int:
    from . import protocol
    rules = _rules(args)
    strategy = make_strategy(args.strategy, rules)
    if not args.tcp:
        protocol.serve_stream(strategy, sys.stdin, sys.stdout, rules, args.seed)
        return EXIT_OK
    host, _, port = args.tcp.rpartition(":")
    with protocol.make_tcp_server(strategy, host or "127.0.0.1", int(port), rules,
                                  args.seed) as server:
        log.info("serving %s on %s:%d", args.strategy, *server.server_address[:2])
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "build-tables": cmd_build_tables,
            "selfcheck": cmd_selfcheck, "serve": cmd_serve}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except TableError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_TABLE
    except OracleError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ORACLE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
