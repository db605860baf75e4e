"""Cards, private-hand indexing and 7-card hand evaluation.

A card id is ``(rank - 2) * 4 + suit`` with suits ordered c, d, h, s, so
``2c`` is 0 and ``As`` is 51. A private hand is an unordered pair of distinct
cards, indexed 0..1325.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels

RANK_CHARS = "23456789TJQKA"
SUIT_CHARS = "cdhs"
NUM_CARDS = 52
NUM_HANDS = 1326

HAND_CARDS = _kernels.HAND_CARDS
HAND_CARDS.setflags(write=False)


class CardParseError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Card:
    id: int

    def __post_init__(self):
        if not 0 <= self.id < NUM_CARDS:
            raise ValueError(f"card id out of range: {self.id}")

    @classmethod
    def of(cls, rank: int, suit: int) -> "Card":
        if not (2 <= rank <= 14 and 0 <= suit <= 3):
            raise ValueError(f"invalid rank/suit: {rank}/{suit}")
        return cls((rank - 2) * 4 + suit)

    @property
    def rank(self) -> int:
        return (self.id >> 2) + 2

    @property
    def suit(self) -> int:
        return self.id & 3

    def __str__(self):
        return RANK_CHARS[self.id >> 2] + SUIT_CHARS[self.id & 3]

    def __repr__(self):
        return f"Card({self})"


DECK = tuple(Card(i) for i in range(NUM_CARDS))


def parse_card(text: str) -> Card:
    if len(text) != 2 or text[0] not in RANK_CHARS or text[1] not in SUIT_CHARS:
        raise CardParseError(f"malformed card token {text!r}")
    return DECK[RANK_CHARS.index(text[0]) * 4 + SUIT_CHARS.index(text[1])]


def parse_cards(text: str) -> list[Card]:
    """Parse concatenated card tokens such as ``"AsKd7h"``."""
    if len(text) % 2:
        raise CardParseError(f"odd-length card string {text!r}")
    return [parse_card(text[i:i + 2]) for i in range(0, len(text), 2)]


def format_cards(cards: Iterable[Card]) -> str:
    return "".join(str(c) for c in cards)


def card_id(card) -> int:
    return card.id if isinstance(card, Card) else int(card)


def hand_index(c1, c2) -> int:
    a, b = card_id(c1), card_id(c2)
    if a == b:
        raise ValueError(f"a private hand needs two distinct cards, got {a} twice")
    if a > b:
        a, b = b, a
    return a * 51 - a * (a - 1) // 2 + (b - a - 1)


def hand_cards(index: int) -> tuple[Card, Card]:
    if not 0 <= index < NUM_HANDS:
        raise ValueError(f"hand index out of range: {index}")
    a, b = HAND_CARDS[index]
    return DECK[a], DECK[b]


def parse_hand(text: str) -> int:
    cards = parse_cards(text)
    if len(cards) != 2:
        raise CardParseError(f"a private hand is two cards, got {text!r}")
    return hand_index(*cards)


def format_hand(index: int) -> str:
    return format_cards(hand_cards(index))


def hands_mask(dead: Iterable) -> np.ndarray:
    """Boolean mask over hand indices: True for hands touching a dead card."""
    ids = [card_id(c) for c in dead]
    hit = np.zeros(NUM_CARDS, dtype=bool)
    hit[ids] = True
    return hit[HAND_CARDS[:, 0]] | hit[HAND_CARDS[:, 1]]


class Category(IntEnum):
    HIGH_CARD = 0
    PAIR = 1
    TWO_PAIR = 2
    TRIPS = 3
    STRAIGHT = 4
    FLUSH = 5
    FULL_HOUSE = 6
    QUADS = 7
    STRAIGHT_FLUSH = 8


class HandRank(NamedTuple):
    """Hand strength; tuple order is poker order, equal ranks split the pot."""

    category: Category
    tiebreak: int

    @classmethod
    def from_score(cls, score: int) -> "HandRank":
        return cls(Category(score >> _kernels.CATEGORY_SHIFT),
                   score & ((1 << _kernels.CATEGORY_SHIFT) - 1))

    @property
    def score(self) -> int:
        return int(self.category) << _kernels.CATEGORY_SHIFT | self.tiebreak


def evaluate7(cards: Sequence) -> HandRank:
    ids = [card_id(c) for c in cards]
    if len(ids) != 7:
        raise ValueError(f"evaluate7 needs exactly 7 cards, got {len(ids)}")
    if len(set(ids)) != 7:
        raise ValueError("duplicate cards in hand")
    return HandRank.from_score(int(_kernels.score_cards(np.array(ids, dtype=np.int64))))


def score7_batch(cards7: np.ndarray) -> np.ndarray:
    """Integer scores for an (n, 7) array of card ids; no validation."""
    return _kernels.score_many(np.ascontiguousarray(cards7, dtype=np.int64))
