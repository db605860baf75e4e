"""Strategies under evaluation, seen as per-hand action-distribution oracles."""
from __future__ import annotations

from typing import Iterator, Optional

import numpy as np

from .cards import NUM_HANDS, hands_mask
from .engine import Action, GameRules, PublicState, legal_actions

PROB_TOL = 1e-6


class OracleError(RuntimeError):
    """The evaluated strategy failed to answer."""


class MalformedResponseError(OracleError):
    pass


class ActionDistribution:
    """Probabilities over actions.

    Besides explicit (action, probability) entries, a distribution may spread
    ``raise_mass`` uniformly over every integer raise-to amount in the
    inclusive ``raise_span``; that keeps "a random raise" compact.
    """

    __slots__ = ("probs", "raise_span", "raise_mass")

    def __init__(self, probs=(), raise_span: Optional[tuple[int, int]] = None,
                 raise_mass: float = 0.0):
        self.probs = dict(probs)
        self.raise_span = raise_span if raise_mass > 0 else None
        self.raise_mass = float(raise_mass) if raise_span else 0.0

    def __repr__(self):
        parts = [f"{a}:{p:.6g}" for a, p in self.probs.items()]
        if self.raise_span:
            lo, hi = self.raise_span
            parts.append(f"r{lo}..r{hi}:{self.raise_mass:.6g}")
        return f"ActionDistribution({' '.join(parts)})"

    def prob(self, action: Action) -> float:
        p = self.probs.get(action, 0.0)
        if self.raise_span and action.is_raise:
            lo, hi = self.raise_span
            if lo <= action.amount <= hi:
                p += self.raise_mass / (hi - lo + 1)
        return p

    @property
    def fold_prob(self) -> float:
        return self.probs.get(Action.fold(), 0.0)

    @property
    def total(self) -> float:
        return sum(self.probs.values()) + self.raise_mass

    def items(self) -> Iterator[tuple[Action, float]]:
        """Every (action, probability) pair, expanding the raise span."""
        if not self.raise_span:
            yield from self.probs.items()
            return
        lo, hi = self.raise_span
        each = self.raise_mass / (hi - lo + 1)
        for a, p in self.probs.items():
            if not (a.is_raise and lo <= a.amount <= hi):
                yield a, p
        for amount in range(lo, hi + 1):
            a = Action.raise_to(amount)
            yield a, each + self.probs.get(a, 0.0)

    def sample(self, rng: np.random.Generator) -> Action:
        u = rng.random() * self.total
        for a, p in self.probs.items():
            if u < p:
                return a
            u -= p
        if self.raise_span:
            lo, hi = self.raise_span
            return Action.raise_to(int(rng.integers(lo, hi + 1)))
        # rounding left u just past the last entry
        return next(a for a, p in reversed(self.probs.items()) if p > 0)

    def validate(self, s: PublicState) -> None:
        if abs(self.total - 1.0) > PROB_TOL:
            raise MalformedResponseError(f"action probabilities sum to {self.total:.9g}")
        space = legal_actions(s)
        for a, p in self.probs.items():
            if p < 0:
                raise MalformedResponseError(f"negative probability for {a}")
            if p > 0 and not space.is_legal(a):
                raise MalformedResponseError(f"illegal action {a} in {s}")
        if self.raise_span:
            lo, hi = self.raise_span
            if not (space.is_legal(Action.raise_to(lo)) and space.is_legal(Action.raise_to(hi))):
                raise MalformedResponseError(f"raise span {lo}..{hi} is not legal in {s}")


def live_hands(s: PublicState) -> np.ndarray:
    return np.flatnonzero(~hands_mask(s.board))


class QueryResult:
    """Action distributions of every hand not blocked by the board."""

    def __init__(self, state: PublicState):
        self.state = state
        self.live = ~hands_mask(state.board)

    @property
    def hands(self) -> np.ndarray:
        return np.flatnonzero(self.live)

    def distribution(self, hand: int) -> Optional[ActionDistribution]:
        raise NotImplementedError

    def likelihood(self, action: Action) -> np.ndarray:
        """Probability of ``action`` for every hand (0 for blocked hands)."""
        raise NotImplementedError

    def fold_likelihoods(self) -> np.ndarray:
        return self.likelihood(Action.fold())


class SharedQuery(QueryResult):
    """One distribution for every hand: the strategy ignores its cards."""

    def __init__(self, state: PublicState, dist: ActionDistribution):
        super().__init__(state)
        self.dist = dist

    def distribution(self, hand):
        return self.dist if self.live[hand] else None

    def likelihood(self, action):
        return np.where(self.live, self.dist.prob(action), 0.0)


class TableQuery(QueryResult):
    """Per-hand distributions over a shared list of actions."""

    def __init__(self, state: PublicState, actions: list[Action], table: np.ndarray):
        super().__init__(state)
        self.actions = list(actions)
        self.column = {a: i for i, a in enumerate(self.actions)}
        self.table = np.where(self.live[:, None], table, 0.0)

    def distribution(self, hand):
        if not self.live[hand]:
            return None
        row = self.table[hand]
        return ActionDistribution((a, float(row[i])) for i, a in enumerate(self.actions)
                                  if row[i] > 0)

    def likelihood(self, action):
        i = self.column.get(action)
        if i is None:
            return np.zeros(NUM_HANDS)
        return self.table[:, i].copy()

    def validate(self) -> None:
        sums = self.table[self.live].sum(axis=1)
        bad = np.abs(sums - 1.0) > PROB_TOL
        if bad.any():
            raise MalformedResponseError(
                f"hand distribution sums to {sums[bad][0]:.9g} in {self.state}")
        if (self.table < 0).any():
            raise MalformedResponseError("negative action probability")
        space = legal_actions(self.state)
        used = self.table[self.live].max(axis=0) > 0 if self.live.any() else []
        for a, u in zip(self.actions, used):
            if u and not space.is_legal(a):
                raise MalformedResponseError(f"illegal action {a} in {self.state}")


class Strategy:
    """A strategy that can be queried for its behaviour at public states."""

    name = "strategy"
    card_independent = False

    def query(self, s: PublicState) -> QueryResult:
        raise NotImplementedError

    def sample_action(self, s: PublicState, hand: int, rng: np.random.Generator) -> Action:
        dist = self.query(s).distribution(hand)
        if dist is None:
            raise ValueError(f"hand {hand} is blocked by the board")
        return dist.sample(rng)

    def close(self) -> None:
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class Chump(Strategy):
    """Card-independent rule-based strategy."""

    card_independent = True

    def distribution(self, s: PublicState) -> ActionDistribution:
        raise NotImplementedError

    def query(self, s):
        return SharedQuery(s, self.distribution(s))

    def sample_action(self, s, hand, rng):
        return self.distribution(s).sample(rng)


class AlwaysCall(Chump):
    name = "always-call"

    def distribution(self, s):
        return ActionDistribution({Action.call(): 1.0})


class HalfCallHalfRaise(Chump):
    """Calls half the time, otherwise raises to a uniform legal amount."""

    name = "half-raise"

    def distribution(self, s):
        space = legal_actions(s)
        if not space.can_raise:
            return ActionDistribution({Action.call(): 1.0})
        return ActionDistribution({Action.call(): 0.5}, space.raise_bounds, 0.5)


class RandomLegal(Chump):
    """Uniform over the legal action kinds; raise sizes uniform over integers."""

    name = "random-legal"

    def distribution(self, s):
        space = legal_actions(s)
        kinds = 1 + space.can_fold + space.can_raise
        probs = {Action.call(): 1.0 / kinds}
        if space.can_fold:
            probs[Action.fold()] = 1.0 / kinds
        if space.can_raise:
            return ActionDistribution(probs, space.raise_bounds, 1.0 / kinds)
        return ActionDistribution(probs)


class AlwaysFold(Chump):
    """Folds whenever folding is legal, otherwise checks."""

    name = "always-fold"

    def distribution(self, s):
        if legal_actions(s).can_fold:
            return ActionDistribution({Action.fold(): 1.0})
        return ActionDistribution({Action.call(): 1.0})


BUILTIN = {cls.name: cls for cls in (AlwaysCall, HalfCallHalfRaise, RandomLegal, AlwaysFold)}


def chump_always_call() -> Strategy:
    return AlwaysCall()


def chump_half_call_half_raise() -> Strategy:
    return HalfCallHalfRaise()


def chump_random_legal() -> Strategy:
    return RandomLegal()


def _check_queryable(s: PublicState) -> None:
    if s.to_act is None:
        raise ValueError("strategies are only queried at states with a player to act")


def query(oracle: Strategy, s: PublicState) -> QueryResult:
    _check_queryable(s)
    return oracle.query(s)


def sample_action(oracle: Strategy, s: PublicState, hand: int,
                  rng: np.random.Generator) -> Action:
    _check_queryable(s)
    return oracle.sample_action(s, hand, rng)


def averaged_query(oracle: Strategy, s: PublicState, n: int,
                   rng: np.random.Generator) -> TableQuery:
    """Empirical distributions from ``n`` independent samples per live hand."""
    if n < 1:
        raise ValueError("need at least one sample per hand")
    _check_queryable(s)
    hands = live_hands(s)
    samples = [[oracle.sample_action(s, int(h), rng) for _ in range(n)] for h in hands]
    actions = sorted({a for row in samples for a in row})
    column = {a: i for i, a in enumerate(actions)}
    table = np.zeros((NUM_HANDS, len(actions)))
    for h, row in zip(hands, samples):
        for a in row:
            table[h, column[a]] += 1
    return TableQuery(s, actions, table / n)


def make_strategy(spec: str, rules: GameRules = GameRules()) -> Strategy:
    """Build a strategy from ``always-call``, ``tcp:host:port``, ``stdio:cmd``..."""
    if spec in BUILTIN:
        return BUILTIN[spec]()
    from . import protocol
    if spec.startswith("tcp:"):
        host, _, port = spec[4:].rpartition(":")
        return protocol.RemoteStrategy.tcp(host or "127.0.0.1", int(port), rules)
    if spec.startswith("stdio:"):
        return protocol.RemoteStrategy.stdio(spec[6:], rules)
    raise ValueError(f"unknown opponent {spec!r}; expected one of "
                     f"{', '.join(BUILTIN)}, tcp:<host:port> or stdio:<cmd>")

