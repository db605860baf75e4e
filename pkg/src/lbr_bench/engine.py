"""Heads-up no-limit hold'em rules over immutable public states.

Players are 0 and 1. The *first player* posts the big blind, acts second in
round 1 and first in rounds 2-4. Raises are expressed as raise-to amounts:
the raiser's total contribution to the pot after the action.

Canonical state text is ``<betting>:<board>``; betting is one action string
per started round joined by ``/`` (``f``, ``c``, ``r<int>``) and the board is
the concatenated cards in deal order, or ``-`` when empty.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .cards import Card, CardParseError, evaluate7, format_cards, hand_cards, parse_cards

FOLD, CALL, RAISE = "f", "c", "r"
BOARD_SIZES = (0, 3, 4, 5)  # board length during rounds 1-4


class GameStateError(ValueError):
    """Operation not valid in the current phase of the hand."""


class IllegalActionError(ValueError):
    pass


class StateParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class GameRules:
    stack: int = 20000
    small_blind: int = 50
    big_blind: int = 100

    def __post_init__(self):
        if not 0 < self.small_blind <= self.big_blind <= self.stack:
            raise ValueError(
                "rules need 0 < small_blind <= big_blind <= stack, got "
                f"{self.small_blind}/{self.big_blind}/{self.stack}")


@dataclass(frozen=True, order=True)
class Action:
    kind: str
    amount: int = 0

    @classmethod
    def fold(cls) -> "Action":
        return _FOLD

    @classmethod
    def call(cls) -> "Action":
        return _CALL

    @classmethod
    def raise_to(cls, amount: int) -> "Action":
        return cls(RAISE, int(amount))

    @property
    def is_raise(self) -> bool:
        return self.kind == RAISE

    def __str__(self):
        return f"r{self.amount}" if self.kind == RAISE else self.kind

    def __repr__(self):
        return f"Action({self})"


_FOLD = Action(FOLD)
_CALL = Action(CALL)
_ACTION_RE = re.compile(r"f|c|r(\d+)")


def parse_action(text: str) -> Action:
    m = _ACTION_RE.fullmatch(text)
    if not m:
        raise ValueError(f"malformed action {text!r}")
    if text == FOLD:
        return _FOLD
    if text == CALL:
        return _CALL
    return Action.raise_to(int(m.group(1)))


@dataclass(frozen=True)
class ActionSpace:
    can_fold: bool
    call_amount: int
    raise_bounds: Optional[tuple[int, int]]

    @property
    def can_raise(self) -> bool:
        return self.raise_bounds is not None

    def check(self, action: Action) -> None:
        if action.kind == FOLD:
            if not self.can_fold:
                raise IllegalActionError("fold is only legal when facing a bet")
        elif action.kind == RAISE:
            if self.raise_bounds is None:
                raise IllegalActionError("raising is not legal here")
            lo, hi = self.raise_bounds
            if action.amount < lo:
                raise IllegalActionError(
                    f"raise to {action.amount} is below the minimum raise-to {lo}")
            if action.amount > hi:
                raise IllegalActionError(
                    f"raise to {action.amount} exceeds the stack limit {hi}")
        elif action.kind != CALL:
            raise IllegalActionError(f"unknown action kind {action.kind!r}")

    def is_legal(self, action: Action) -> bool:
        try:
            self.check(action)
        except IllegalActionError:
            return False
        return True


@dataclass(frozen=True)
class PublicState:
    rules: GameRules
    first_player: int
    round: int
    board: tuple[Card, ...]
    history: tuple[tuple[Action, ...], ...]
    spent: tuple[int, int]
    to_act: Optional[int]
    # None while the hand is live; "fold" or "showdown" once terminal
    outcome: Optional[str] = None
    folder: Optional[int] = None
    # largest raise increment so far in the current round
    round_raise: int = field(default=0, compare=False)

    @property
    def is_terminal(self) -> bool:
        return self.outcome is not None

    @property
    def awaiting_board(self) -> bool:
        return self.outcome is None and self.to_act is None

    @property
    def pot(self) -> int:
        return self.spent[0] + self.spent[1]

    @property
    def all_in(self) -> bool:
        return self.spent[0] == self.spent[1] == self.rules.stack

    @property
    def second_player(self) -> int:
        return 1 - self.first_player

    def actions(self) -> Iterable[Action]:
        for rnd in self.history:
            yield from rnd

    def __str__(self):
        return format_state(self)


def initial_state(rules: GameRules = GameRules(), first_player: int = 0) -> PublicState:
    if first_player not in (0, 1):
        raise ValueError(f"player ids are 0 and 1, got {first_player}")
    spent = [0, 0]
    spent[first_player] = rules.big_blind
    spent[1 - first_player] = rules.small_blind
    return PublicState(rules, first_player, 1, (), ((),), tuple(spent), 1 - first_player)


def legal_actions(s: PublicState) -> ActionSpace:
    if s.to_act is None:
        raise GameStateError("no player to act: the hand is over or awaits board cards")
    p = s.to_act
    mine, theirs = s.spent[p], s.spent[1 - p]
    stack = s.rules.stack
    call_amount = theirs - mine
    bounds = None
    if theirs < stack:
        lo = min(theirs + max(s.round_raise, s.rules.big_blind), stack)
        bounds = (lo, stack)
    return ActionSpace(call_amount > 0, call_amount, bounds)


def apply_action(s: PublicState, a: Action) -> PublicState:
    legal_actions(s).check(a)
    p = s.to_act
    o = 1 - p
    history = s.history[:-1] + (s.history[-1] + (a,),)
    if a.kind == FOLD:
        return replace(s, history=history, to_act=None, outcome="fold", folder=p)
    spent = list(s.spent)
    if a.kind == RAISE:
        increment = a.amount - spent[o]
        spent[p] = a.amount
        return replace(s, history=history, spent=tuple(spent), to_act=o,
                       round_raise=max(s.round_raise, increment))
    spent[p] = spent[o]
    if not s.history[-1]:
        # opening call or check: the other player still has to act
        return replace(s, history=history, spent=tuple(spent), to_act=o)
    if s.round == 4:
        return replace(s, history=history, spent=tuple(spent), to_act=None,
                       outcome="showdown")
    return replace(s, history=history, spent=tuple(spent), to_act=None)


def board_cards_needed(s: PublicState) -> int:
    if not s.awaiting_board:
        return 0
    return BOARD_SIZES[s.round] - BOARD_SIZES[s.round - 1]


def deal_board(s: PublicState, cards: Sequence[Card]) -> PublicState:
    if not s.awaiting_board:
        raise GameStateError("board cards can only be dealt once a betting round is complete")
    cards = tuple(cards)
    need = board_cards_needed(s)
    if len(cards) != need:
        raise ValueError(f"round {s.round + 1} needs {need} board card(s), got {len(cards)}")
    if len(set(cards)) != len(cards) or set(cards) & set(s.board):
        raise ValueError("duplicate board card")
    nxt = s.round + 1
    board = s.board + cards
    history = s.history + ((),)
    if s.all_in:
        # nothing left to bet: run the board out
        return replace(s, round=nxt, board=board, history=history, to_act=None,
                       outcome="showdown" if nxt == 4 else None, round_raise=0)
    return replace(s, round=nxt, board=board, history=history, to_act=s.first_player,
                   round_raise=0)


def terminal_payoff(s: PublicState, player: int, hand: int, opp_hand: int) -> int:
    """Net chips won by ``player`` holding ``hand`` against ``opp_hand``."""
    if not s.is_terminal:
        raise GameStateError("payoff requested for a non-terminal state")
    other = 1 - player
    if s.outcome == "fold":
        return -s.spent[player] if s.folder == player else s.spent[other]
    mine = hand_cards(hand)
    theirs = hand_cards(opp_hand)
    if set(mine) & set(theirs) or (set(mine) | set(theirs)) & set(s.board):
        raise ValueError("showdown hands overlap each other or the board")
    a = evaluate7(mine + s.board)
    b = evaluate7(theirs + s.board)
    if a > b:
        return s.spent[other]
    if a < b:
        return -s.spent[player]
    return 0


def format_state(s: PublicState) -> str:
    betting = "/".join("".join(str(a) for a in rnd) for rnd in s.history)
    return f"{betting}:{format_cards(s.board) or '-'}"


def parse_state_text(text: str) -> tuple[list[list[Action]], list[Card]]:
    """Syntactic parse of a state string; legality is not checked."""
    colon = text.find(":")
    if colon < 0:
        raise StateParseError("missing ':' between betting and board", len(text))
    rounds: list[list[Action]] = [[]]
    pos = 0
    while pos < colon:
        ch = text[pos]
        if ch == "/":
            rounds.append([])
            pos += 1
            continue
        m = _ACTION_RE.match(text, pos, colon)
        if not m:
            raise StateParseError(f"unexpected character {ch!r}", pos)
        rounds[-1].append(parse_action(m.group(0)))
        pos = m.end()
    if len(rounds) > 4:
        raise StateParseError("more than four betting rounds", colon)
    board_text = text[colon + 1:]
    if board_text == "-":
        board = []
    else:
        try:
            board = parse_cards(board_text)
        except CardParseError as e:
            raise StateParseError(str(e), colon + 1) from None
        if not board:
            raise StateParseError("empty board must be written '-'", colon + 1)
    return rounds, board


def parse_state(text: str, rules: GameRules = GameRules(), first_player: int = 0) -> PublicState:
    """Parse and replay a state string, validating every action and board card."""
    rounds, board = parse_state_text(text)
    s = initial_state(rules, first_player)
    for i, actions in enumerate(rounds):
        if i > 0:
            need = board_cards_needed(s)
            if not s.awaiting_board:
                raise StateParseError(f"round {i} betting is not complete", len(text))
            start = BOARD_SIZES[i - 1]
            if len(board) < start + need:
                raise StateParseError(
                    f"round {i + 1} needs {BOARD_SIZES[i]} board cards, "
                    f"got {len(board)}", len(text))
            s = deal_board(s, board[start:start + need])
        for a in actions:
            s = apply_action(s, a)
    if len(board) != len(s.board):
        raise StateParseError(
            f"board has {len(board)} cards but round {s.round} shows {len(s.board)}",
            text.find(":") + 1)
    return s
