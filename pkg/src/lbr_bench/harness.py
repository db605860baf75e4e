"""Match runner: plays LBR against a strategy and estimates its winnings."""
from __future__ import annotations

import json
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .cards import DECK, Card, format_cards, format_hand, hand_cards, hand_index
from .engine import (GameRules, PublicState, apply_action, board_cards_needed,
                     deal_board, format_state, initial_state, terminal_payoff)
from .lbr import FCPA, LbrConfig, WpCache, decide, format_rounds
from .preflop import DEFAULT_PATH, TableError, cached_table
from .ranges import (DegenerateRangeError, Range, bayes_update, condition_on_board,
                     uniform_range, wp_rollout)
from .strategy import MalformedResponseError, Strategy, averaged_query, make_strategy

log = logging.getLogger(__name__)

MAX_DISCARD_RATE = 0.01
Z95 = 1.96

# record flags
DEGENERATE = "degenerate-range"
MALFORMED = "oracle-malformed"
IMAGINARY_FALLBACK = "imaginary-fallback"
DISCARD_FLAGS = frozenset({DEGENERATE, MALFORMED})


class DiscardRateError(RuntimeError):
    def __init__(self, report: "EvalReport"):
        super().__init__(
            f"{report.discarded_pairs} of {report.pairs_played} pairs discarded "
            f"(limit {MAX_DISCARD_RATE:.0%})")
        self.report = report


@dataclass(frozen=True)
class MatchConfig:
    rules: GameRules = GameRules()
    lbr: LbrConfig = LbrConfig(FCPA)
    opponent: str = "always-call"
    pairs: int = 1000
    seed: int = 0
    duplicate: bool = True
    imaginary: bool = True
    table_path: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.pairs < 1:
            raise ValueError("need at least one pair of hands")
        if self.lbr.sampled_queries is not None and self.lbr.sampled_queries < 1:
            raise ValueError("sampled mode needs at least one sample per query")
        if self.workers < 1:
            raise ValueError("workers must be positive")


@dataclass(frozen=True)
class Deal:
    """Private hands by player (player 0 is the first player) and the full board."""

    hands: tuple[int, int]
    board: tuple[Card, ...]

    def __post_init__(self):
        cards = [c for h in self.hands for c in hand_cards(h)] + list(self.board)
        if len(self.board) != 5 or len(set(cards)) != 9:
            raise ValueError("a deal needs two hands and five board cards, all distinct")

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Deal":
        ids = rng.choice(52, size=9, replace=False)
        return cls((hand_index(int(ids[0]), int(ids[1])), hand_index(int(ids[2]), int(ids[3]))),
                   tuple(DECK[int(i)] for i in ids[4:]))

    def __str__(self):
        a, b = (format_hand(h) for h in self.hands)
        return f"{a}|{b}|{format_cards(self.board)}"


@dataclass
class HandRecord:
    deal: Deal
    lbr_player: int
    transcript: str = ""
    # chips won by LBR and the value used for scoring (both in chips)
    winnings: int = 0
    scored: float = 0.0
    lbr_actions: list = field(default_factory=list)  # (round, action) pairs
    flags: set = field(default_factory=set)
    terminal: Optional[PublicState] = None
    terminal_range: Optional[Range] = None

    @property
    def discarded(self) -> bool:
        return bool(self.flags & DISCARD_FLAGS)

    @property
    def opponent_winnings(self) -> int:
        return -self.winnings

    def line(self) -> str:
        """One-line transcript used for determinism checks and logs."""
        tag = ",".join(sorted(self.flags)) or "-"
        return (f"{self.deal} lbr=p{self.lbr_player} {self.transcript} "
                f"won={self.winnings} scored={self.scored!r} flags={tag}")


def play_hand(deal: Deal, lbr_player: int, lbr: LbrConfig, oracle: Strategy,
              rng: np.random.Generator, rules: GameRules = GameRules(), table=None,
              lbr_rng: Optional[np.random.Generator] = None) -> HandRecord:
    """Play one hand of LBR (as ``lbr_player``) against ``oracle``.

    The opponent's actions are sampled from ``rng`` given her real cards. LBR
    keeps a range over her hand, updated after each of her actions and each
    board card. Degenerate ranges or malformed oracle answers end the hand
    early with a flagged record.
    """
    record = HandRecord(deal, lbr_player)
    my_hand = deal.hands[lbr_player]
    opp_hand = deal.hands[1 - lbr_player]
    s = initial_state(rules, first_player=0)
    pi = uniform_range(hand_cards(my_hand))
    cache = WpCache()
    try:
        while not s.is_terminal:
            if s.awaiting_board:
                dealt = len(s.board)
                new = deal.board[dealt:dealt + board_cards_needed(s)]
                s = deal_board(s, new)
                pi = condition_on_board(pi, new)
                continue
            if s.to_act == lbr_player:
                a = decide(pi, s, my_hand, lbr, oracle, table, lbr_rng, cache).action
                record.lbr_actions.append((s.round, a))
            else:
                a = oracle.sample_action(s, opp_hand, rng)
                if lbr.sampled_queries:
                    q = averaged_query(oracle, s, lbr.sampled_queries, lbr_rng)
                else:
                    q = oracle.query(s)
                pi = _observe(pi, q.likelihood(a))
            s = apply_action(s, a)
    except DegenerateRangeError as e:
        record.flags.add(DEGENERATE)
        log.debug("discarding hand %s: %s", deal, e)
    except MalformedResponseError as e:
        record.flags.add(MALFORMED)
        log.warning("discarding hand %s: %s", deal, e)
    record.transcript = format_state(s)
    if record.discarded:
        return record
    record.terminal = s
    record.terminal_range = pi
    record.winnings = terminal_payoff(s, lbr_player, my_hand, opp_hand)
    record.scored = float(record.winnings)
    return record


def _observe(pi: Range, likelihoods: np.ndarray) -> Range:
    """Bayes update, keeping the very same range when the action carries no information."""
    on = likelihoods[pi.support]
    if on.size and on[0] > 0 and np.all(on == on[0]):
        return pi
    return bayes_update(pi, likelihoods)


def imaginary_value(record: HandRecord, terminal_range: Optional[Range] = None,
                    rules: Optional[GameRules] = None) -> float:
    """Scored value of a finished hand in mBB.

    Folds score their actual outcome. Showdowns score LBR's expected outcome
    against every opponent hand still consistent with the betting. If that
    range is unusable the actual outcome is kept and the record flagged.
    """
    chips = _imaginary_chips(record, terminal_range or record.terminal_range)
    rules = rules or record.terminal.rules
    return chips * 1000.0 / rules.big_blind


def _imaginary_chips(record: HandRecord, pi: Optional[Range]) -> float:
    s = record.terminal
    if s is None or not s.is_terminal:
        raise ValueError("imaginary value needs a finished hand")
    if s.outcome == "fold":
        return float(record.winnings)
    try:
        if pi is None or not pi.probs.sum() > 0:
            raise DegenerateRangeError("no terminal range")
        wp = wp_rollout(record.deal.hands[record.lbr_player], pi, s.board)
    except (DegenerateRangeError, ValueError) as e:
        record.flags.add(IMAGINARY_FALLBACK)
        log.debug("imaginary value fallback for %s: %s", record.deal, e)
        return float(record.winnings)
    return (2.0 * wp - 1.0) * s.pot / 2.0


def _seq(seed: int, *path: int) -> np.random.Generator:
    return np.random.default_rng([seed, *path])


def play_duplicate_pair(deal: Deal, lbr: LbrConfig, oracle: Strategy, seed: int,
                        pair_index: int, rules: GameRules = GameRules(), table=None,
                        imaginary: bool = True,
                        second_deal: Optional[Deal] = None) -> tuple[HandRecord, HandRecord]:
    """The same deal played with LBR as player 0 and then as player 1.

    Each seat draws the opponent's actions from its own stream derived from
    ``(seed, pair_index, seat)``. ``second_deal`` replaces the deal of the
    second hand, which turns the pair into two independent hands.
    """
    records = []
    for seat, d in ((0, deal), (1, second_deal or deal)):
        rec = play_hand(d, seat, lbr, oracle, _seq(seed, pair_index, 1, seat), rules, table,
                        _seq(seed, pair_index, 2, seat))
        if imaginary and not rec.discarded:
            rec.scored = _imaginary_chips(rec, rec.terminal_range)
        records.append(rec)
    return records[0], records[1]


@dataclass
class EvalReport:
    mean_mbb: float
    ci_half_width_mbb: float
    pairs: int
    pairs_played: int
    discarded_hands: int
    discarded_pairs: int
    imaginary_fallbacks: int
    std_pair_mbb: float
    histograms: dict
    config: dict

    @property
    def discard_rate(self) -> float:
        return self.discarded_pairs / self.pairs_played

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [
            f"opponent      {self.config['opponent']}",
            f"bets          {self.config['bets']}  rounds {self.config['lbr_rounds']}",
            f"pairs         {self.pairs} used / {self.pairs_played} played "
            f"({self.discarded_hands} hands discarded)",
            f"LBR winnings  {self.mean_mbb:.1f} +- {self.ci_half_width_mbb:.1f} mBB/h (95% CI)",
            "",
            "LBR actions   " + "  ".join(f"{k:>8}" for k in ("fold", "call", "raise")),
        ]
        for rnd in ("1", "2", "3", "4"):
            h = self.histograms.get(rnd, {})
            lines.append(f"  round {rnd}     " + "  ".join(
                f"{h.get(k, 0):>8}" for k in ("f", "c", "r")))
        return "\n".join(lines)


def _config_summary(cfg: MatchConfig) -> dict:
    return {
        "opponent": cfg.opponent,
        "bets": str(cfg.lbr.bet_set),
        "lbr_rounds": format_rounds(cfg.lbr.active_rounds),
        "sampled_queries": cfg.lbr.sampled_queries,
        "seed": cfg.seed,
        "duplicate": cfg.duplicate,
        "imaginary": cfg.imaginary,
        "stack": cfg.rules.stack,
        "small_blind": cfg.rules.small_blind,
        "big_blind": cfg.rules.big_blind,
    }


@dataclass
class _PairResult:
    index: int
    values: tuple[float, float]
    discarded: int  # hands discarded in this pair
    fallbacks: int
    actions: Counter


def _load_table(cfg: MatchConfig):
    if 1 not in cfg.lbr.active_rounds:
        return None
    path = cfg.table_path or DEFAULT_PATH
    try:
        return cached_table(path)
    except TableError as e:
        raise TableError(f"{e}; run 'lbr-bench build-tables --out {path}'") from None


def _pair_deals(cfg: MatchConfig, i: int) -> tuple[Deal, Optional[Deal]]:
    rng = _seq(cfg.seed, i, 0)
    first = Deal.random(rng)
    return first, (None if cfg.duplicate else Deal.random(rng))


def run_pairs(cfg: MatchConfig, indices, oracle: Optional[Strategy] = None,
              records: Optional[list] = None) -> list[_PairResult]:
    """Play the given pair indices; ``records`` collects the hand records if given."""
    table = _load_table(cfg)
    own = oracle is None
    oracle = oracle or make_strategy(cfg.opponent, cfg.rules)
    out = []
    try:
        for i in indices:
            deal, second = _pair_deals(cfg, i)
            pair = play_duplicate_pair(deal, cfg.lbr, oracle, cfg.seed, i, cfg.rules, table,
                                       cfg.imaginary, second)
            if records is not None:
                records.extend(pair)
            actions = Counter((r, a.kind) for rec in pair for r, a in rec.lbr_actions)
            out.append(_PairResult(
                i, (pair[0].scored, pair[1].scored),
                sum(rec.discarded for rec in pair),
                sum(IMAGINARY_FALLBACK in rec.flags for rec in pair), actions))
    finally:
        if own:
            oracle.close()
    return out


def _run_chunk(args):
    cfg, indices = args
    return run_pairs(cfg, indices)


def aggregate(cfg: MatchConfig, results: list[_PairResult]) -> EvalReport:
    results = sorted(results, key=lambda r: r.index)
    kept = [r for r in results if not r.discarded]
    scale = 1000.0 / cfg.rules.big_blind
    means = np.array([(r.values[0] + r.values[1]) / 2.0 for r in kept]) * scale
    n = len(means)
    mean = float(means.mean()) if n else math.nan
    sd = float(means.std(ddof=1)) if n > 1 else math.nan
    half = Z95 * sd / math.sqrt(n) if n > 1 else math.nan
    hist: dict = {str(r): {"f": 0, "c": 0, "r": 0} for r in range(1, 5)}
    for r in results:
        for (rnd, kind), count in r.actions.items():
            hist[str(rnd)][kind] += count
    return EvalReport(
        mean_mbb=mean, ci_half_width_mbb=half, pairs=n, pairs_played=len(results),
        discarded_hands=sum(r.discarded for r in results),
        discarded_pairs=len(results) - n,
        imaginary_fallbacks=sum(r.fallbacks for r in results),
        std_pair_mbb=sd, histograms=hist, config=_config_summary(cfg))


def evaluate(cfg: MatchConfig, oracle: Optional[Strategy] = None,
             check_discards: bool = True) -> EvalReport:
    """Estimate LBR's winnings against the configured opponent.

    Pairs are independent and merged by index, so serial and parallel runs
    give identical reports.
    """
    _load_table(cfg)  # fail fast when the table is missing
    if cfg.workers == 1 or oracle is not None:
        results = run_pairs(cfg, range(cfg.pairs), oracle)
    else:
        chunks = [(cfg, range(k, cfg.pairs, cfg.workers)) for k in range(cfg.workers)]
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = [r for part in pool.map(_run_chunk, chunks) for r in part]
    report = aggregate(cfg, results)
    if check_discards and report.discard_rate > MAX_DISCARD_RATE:
        raise DiscardRateError(report)
    return report
