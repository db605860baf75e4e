"""Local best response: greedy one-action look-ahead against a known strategy.

Each decision scores call and a set of candidate raises assuming both
players check/call to showdown afterwards, using the tracked opponent range.
Fold is worth 0; the best positive action is played, otherwise fold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import Action, PublicState, apply_action, legal_actions
from .ranges import DegenerateRangeError, Range, fold_split, wp_rollout
from .strategy import Strategy, averaged_query

FIFTY6_FRACTIONS = tuple(0.05 * 1.15 ** k for k in range(55))


@dataclass(frozen=True)
class BetSet:
    name: str
    pot_fractions: tuple[float, ...] = ()
    include_all_in: bool = False

    def __post_init__(self):
        fr = tuple(float(f) for f in self.pot_fractions)
        if any(f <= 0 for f in fr):
            raise ValueError("pot fractions must be positive")
        object.__setattr__(self, "pot_fractions", tuple(sorted(set(fr))))

    @classmethod
    def parse(cls, text: str) -> "BetSet":
        """``fc``, ``fcpa``, ``56bets`` or ``custom:<fractions>`` (``allin`` allowed)."""
        if text == "fc":
            return FC
        if text == "fcpa":
            return FCPA
        if text in ("56bets", "fifty6"):
            return FIFTY6
        if text.startswith("custom:"):
            fractions, all_in = [], False
            for tok in filter(None, (t.strip() for t in text[7:].split(","))):
                if tok.lower() in ("a", "allin", "all-in"):
                    all_in = True
                else:
                    fractions.append(float(tok))
            return cls("custom", tuple(fractions), all_in)
        raise ValueError(f"unknown bet set {text!r}")

    def __str__(self):
        if self.name != "custom":
            return "56bets" if self.name == "fifty6" else self.name
        toks = [format(f, "g") for f in self.pot_fractions]
        return "custom:" + ",".join(toks + (["allin"] if self.include_all_in else []))


FC = BetSet("fc")
FCPA = BetSet("fcpa", (1.0,), True)
FIFTY6 = BetSet("fifty6", FIFTY6_FRACTIONS, True)


def parse_rounds(text: str) -> frozenset[int]:
    """Round spans such as ``1-4``, ``3-4`` or ``2,4``."""
    rounds = set()
    for part in text.split(","):
        lo, _, hi = part.strip().partition("-")
        a, b = int(lo), int(hi or lo)
        if not 1 <= a <= b <= 4:
            raise ValueError(f"bad round span {part!r}")
        rounds.update(range(a, b + 1))
    return frozenset(rounds)


def format_rounds(rounds) -> str:
    r = sorted(rounds)
    if r == list(range(r[0], r[-1] + 1)):
        return f"{r[0]}-{r[-1]}" if len(r) > 1 else str(r[0])
    return ",".join(map(str, r))


@dataclass(frozen=True)
class LbrConfig:
    bet_set: BetSet = FCPA
    active_rounds: frozenset = field(default=frozenset({1, 2, 3, 4}))
    # samples per hand when the strategy's distributions must be estimated
    sampled_queries: Optional[int] = None

    def __post_init__(self):
        rounds = frozenset(self.active_rounds)
        if not rounds or not rounds <= {1, 2, 3, 4}:
            raise ValueError("active rounds must be a non-empty subset of 1-4")
        object.__setattr__(self, "active_rounds", rounds)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def bet_amounts(fractions: Sequence[float], include_all_in: bool, pot: int, asked: int,
                min_raise_by: int, max_raise_by: int) -> list[int]:
    """Raise-by amounts for pot fractions of ``pot + asked``, clamped to legal sizes."""
    out = set()
    for f in fractions:
        a = _round_half_up(f * (pot + asked))
        out.add(min(max(a, min_raise_by), max_raise_by))
    if include_all_in:
        out.add(max_raise_by)
    return sorted(out)


def considered_bets(cfg: LbrConfig, s: PublicState) -> list[int]:
    space = legal_actions(s)
    if not space.can_raise:
        return []
    base = s.spent[s.to_act] + space.call_amount
    lo, hi = space.raise_bounds
    return bet_amounts(cfg.bet_set.pot_fractions, cfg.bet_set.include_all_in,
                       s.pot, space.call_amount, lo - base, hi - base)


def utility_call(wp: float, pot: float, asked: float) -> float:
    return wp * pot - (1.0 - wp) * asked


def utility_raise(fp: float, wp: float, pot: float, asked: float, a: float) -> float:
    return fp * pot + (1.0 - fp) * (wp * (pot + a) - (1.0 - wp) * (asked + a))


@dataclass
class Decision:
    """An LBR choice with the utilities behind it (for transcripts and tests)."""

    action: Action
    wp: Optional[float] = None
    utilities: dict = field(default_factory=dict)


class WpCache:
    """Remembers the last rollout; valid while the range object and board stay put."""

    def __init__(self):
        self._key = None
        self._wp = 0.0

    def get(self, hand: int, pi: Range, s: PublicState, table=None) -> float:
        key = (hand, len(s.board))
        if self._key is not None and self._key[0] is pi and self._key[1] == key:
            return self._wp
        self._wp = wp_rollout(hand, pi, s, table)
        self._key = (pi, key)
        return self._wp


def decide(pi: Range, s: PublicState, hand: int, cfg: LbrConfig, oracle: Strategy,
           table=None, rng: Optional[np.random.Generator] = None,
           cache: Optional[WpCache] = None) -> Decision:
    if s.round not in cfg.active_rounds:
        return Decision(Action.call())
    space = legal_actions(s)
    asked = space.call_amount
    pot = s.pot
    wp = cache.get(hand, pi, s, table) if cache else wp_rollout(hand, pi, s, table)
    best = Action.call()
    best_u = utility_call(wp, pot, asked)
    utilities = {best: best_u}
    base = s.spent[s.to_act] + asked
    for a in considered_bets(cfg, s):
        action = Action.raise_to(base + a)
        after = apply_action(s, action)
        if cfg.sampled_queries:
            if rng is None:
                raise ValueError("sampled queries need an rng")
            q = averaged_query(oracle, after, cfg.sampled_queries, rng)
        else:
            q = oracle.query(after)
        fp, rest = fold_split(pi, q.fold_likelihoods())
        if rest is None:
            u = float(pot)
        else:
            # fold-independent strategies leave the range as it was
            same = np.allclose(rest.probs, pi.probs, rtol=0.0, atol=1e-12)
            wp_after = wp if same else wp_rollout(hand, rest, s, table)
            u = utility_raise(fp, wp_after, pot, asked, a)
        utilities[action] = u
        if u > best_u:
            best, best_u = action, u
    if best_u > 0 or not space.can_fold:
        return Decision(best, wp, utilities)
    return Decision(Action.fold(), wp, utilities)


def choose_action(pi: Range, s: PublicState, hand: int, cfg: LbrConfig, oracle: Strategy,
                  table=None, rng: Optional[np.random.Generator] = None,
                  cache: Optional[WpCache] = None) -> Action:
    return decide(pi, s, hand, cfg, oracle, table, rng, cache).action


__all__ = [
    "BetSet", "FC", "FCPA", "FIFTY6", "LbrConfig", "Decision", "DegenerateRangeError",
    "bet_amounts", "choose_action", "considered_bets", "decide", "format_rounds",
    "parse_rounds", "utility_call", "utility_raise", "WpCache",
]
