"""Opponent range tracking and win-probability rollouts."""
from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .cards import HAND_CARDS, NUM_HANDS, card_id, hand_cards, hands_mask

NORM_TOL = 1e-9


class DegenerateRangeError(ValueError):
    """Conditioning left no probability mass on any live hand."""


class Range:
    """Probability distribution over the 1326 private hands.

    ``dead`` holds the card ids known not to be in the opponent's hand; every
    hand touching a dead card has probability exactly 0.
    """

    __slots__ = ("probs", "dead")

    def __init__(self, probs: np.ndarray, dead: Iterable = ()):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.shape != (NUM_HANDS,):
            raise ValueError(f"range needs {NUM_HANDS} entries, got {probs.shape}")
        probs.setflags(write=False)
        self.probs = probs
        self.dead = frozenset(card_id(c) for c in dead)

    def __getitem__(self, hand: int) -> float:
        return float(self.probs[hand])

    def __repr__(self):
        return f"Range(live={np.count_nonzero(self.probs)}, dead={len(self.dead)})"

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs)

    def validate(self) -> None:
        if (self.probs < 0).any():
            raise ValueError("negative probability in range")
        if abs(self.probs.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"range sums to {self.probs.sum()!r}")
        if self.dead and self.probs[hands_mask(self.dead)].any():
            raise ValueError("range puts mass on a hand holding a dead card")


def _normalized(weights: np.ndarray, dead, what: str) -> Range:
    total = weights.sum()
    if not total > 0:
        raise DegenerateRangeError(f"{what} left no probability mass")
    return Range(weights / total, dead)


def uniform_range(dead_cards: Iterable = ()) -> Range:
    dead = {card_id(c) for c in dead_cards}
    if len(dead) >= 51:
        raise ValueError("at least two live cards are needed for a private hand")
    live = ~hands_mask(dead)
    return Range(live / live.sum(), dead)


def bayes_update(pi: Range, likelihoods: np.ndarray) -> Range:
    """Posterior after an action with per-hand probabilities ``likelihoods``."""
    return _normalized(pi.probs * likelihoods, pi.dead, "action update")


def condition_on_board(pi: Range, new_cards: Iterable) -> Range:
    ids = {card_id(c) for c in new_cards}
    clash = ids & pi.dead
    if clash:
        raise ValueError(f"board card(s) {sorted(clash)} already dead")
    weights = np.where(hands_mask(ids), 0.0, pi.probs)
    return _normalized(weights, pi.dead | ids, "board update")


def fold_split(pi: Range, fold_likelihoods: np.ndarray) -> tuple[float, Optional[Range]]:
    """Fold probability and the range conditioned on the opponent not folding.

    The conditioned range is None when the opponent folds every hand.
    """
    folded = pi.probs * fold_likelihoods
    fp = float(folded.sum())
    stay = pi.probs - folded
    if not stay.sum() > 0:
        return 1.0, None
    return fp, Range(stay / stay.sum(), pi.dead)


def wp_rollout(hand: int, pi: Range, board=(), table=None) -> float:
    """Probability that ``hand`` wins (ties count half) against ``pi``.

    ``board`` is a PublicState or a card sequence. Remaining board cards are
    enumerated exhaustively from the flop on; preflop reads the equity table.
    """
    board = getattr(board, "board", board)
    ids = [card_id(c) for c in board]
    mine = [c.id for c in hand_cards(hand)]
    if set(mine) & set(ids):
        raise ValueError("rollout hand overlaps the board")
    if pi.probs[hands_mask(mine + ids)].any():
        raise ValueError("range is inconsistent with the rollout hand or board")
    if not ids:
        if table is None:
            raise ValueError("a preflop equity table is required for round-1 rollouts")
        return float(table.row(hand) @ pi.probs)
    if len(ids) not in (3, 4, 5):
        raise ValueError(f"board must hold 0, 3, 4 or 5 cards, got {len(ids)}")
    live = pi.support
    return float(_kernels.rollout(
        mine[0], mine[1], np.array(ids, dtype=np.int64),
        HAND_CARDS[live, 0].copy(), HAND_CARDS[live, 1].copy(), pi.probs[live].copy()))
