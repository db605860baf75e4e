"""Quick built-in invariant checks, runnable without the test suite."""
from __future__ import annotations

import itertools
import time

import numpy as np

from .cards import DECK, NUM_HANDS, evaluate7, hand_cards
from .engine import (GameRules, apply_action, board_cards_needed, deal_board, initial_state,
                     legal_actions, terminal_payoff)
from .harness import Deal, MatchConfig, evaluate, run_pairs
from .lbr import FC, LbrConfig, parse_rounds
from .ranges import bayes_update, condition_on_board, fold_split, uniform_range
from .strategy import RandomLegal


def _best5(cards) -> tuple:
    """Slow reference ranking of the best 5-card subset."""
    best = None
    for five in itertools.combinations(cards, 5):
        ranks = sorted((c.rank for c in five), reverse=True)
        counts = sorted(((ranks.count(r), r) for r in set(ranks)), reverse=True)
        flush = len({c.suit for c in five}) == 1
        uniq = sorted(set(ranks), reverse=True)
        straight = 0
        if len(uniq) == 5 and uniq[0] - uniq[4] == 4:
            straight = uniq[0]
        elif uniq == [14, 5, 4, 3, 2]:
            straight = 5
        shape = [c for c, _ in counts]
        if straight and flush:
            key = (8, straight)
        elif shape[0] == 4:
            key = (7,) + tuple(r for _, r in counts)
        elif shape[:2] == [3, 2]:
            key = (6,) + tuple(r for _, r in counts)
        elif flush:
            key = (5,) + tuple(ranks)
        elif straight:
            key = (4, straight)
        elif shape[0] == 3:
            key = (3,) + tuple(r for _, r in counts)
        elif shape[:2] == [2, 2]:
            key = (2,) + tuple(r for _, r in counts)
        elif shape[0] == 2:
            key = (1,) + tuple(r for _, r in counts)
        else:
            key = (0,) + tuple(ranks)
        best = key if best is None or key > best else best
    return best


def check_evaluator(rng, n=300):
    hands = [[DECK[i] for i in rng.choice(52, 7, replace=False)] for _ in range(n)]
    ref = [_best5(h) for h in hands]
    ours = [evaluate7(h) for h in hands]
    for i, j in itertools.combinations(range(n), 2):
        if (ref[i] > ref[j]) != (ours[i] > ours[j]) or (ref[i] == ref[j]) != (ours[i] == ours[j]):
            raise AssertionError(f"evaluator order differs for {hands[i]} vs {hands[j]}")
        if ref[i][0] != ours[i].category:
            raise AssertionError(f"category mismatch for {hands[i]}")


def check_ranges(rng, n=50):
    for _ in range(n):
        ids = rng.choice(52, 5, replace=False)
        pi = uniform_range([int(i) for i in ids[:2]])
        pi.validate()
        pi = bayes_update(pi, rng.random(NUM_HANDS))
        pi.validate()
        pi = condition_on_board(pi, [int(i) for i in ids[2:]])
        pi.validate()
        fold = rng.random(NUM_HANDS)
        fp, rest = fold_split(pi, fold)
        if abs(fp - float(pi.probs @ fold)) > 1e-12:
            raise AssertionError("fold probability mismatch")
        rest.validate()
        back = fp * (pi.probs * fold / fp) + (1 - fp) * rest.probs
        if not np.allclose(back, pi.probs, atol=1e-12):
            raise AssertionError("fold split does not conserve the range")


def check_engine(rng, n=300):
    """Random legal play: every action legal, payoffs zero-sum and bounded."""
    rules = GameRules()
    chump = RandomLegal()
    for _ in range(n):
        deal = Deal.random(rng)
        s = initial_state(rules)
        while not s.is_terminal:
            if s.awaiting_board:
                k = len(s.board)
                s = deal_board(s, deal.board[k:k + board_cards_needed(s)])
                continue
            a = chump.sample_action(s, deal.hands[s.to_act], rng)
            if not legal_actions(s).is_legal(a):
                raise AssertionError(f"illegal action {a} at {s}")
            s = apply_action(s, a)
        u0 = terminal_payoff(s, 0, *deal.hands)
        u1 = terminal_payoff(s, 1, deal.hands[1], deal.hands[0])
        if u0 + u1 != 0 or abs(u0) > rules.stack:
            raise AssertionError(f"payoffs {u0}, {u1} at {s}")


def check_harness():
    cfg = MatchConfig(lbr=LbrConfig(FC, parse_rounds("2-4")), opponent="random-legal",
                      pairs=20, seed=7)
    a, b = [], []
    run_pairs(cfg, range(cfg.pairs), records=a)
    run_pairs(cfg, range(cfg.pairs), records=b)
    if [r.line() for r in a] != [r.line() for r in b]:
        raise AssertionError("transcripts differ under a fixed seed")
    for rec in a:
        s = rec.terminal
        for card in itertools.chain(*(hand_cards(h) for h in rec.deal.hands)):
            if card in s.board:
                raise AssertionError("deal reuses a card")
    cfg = MatchConfig(lbr=LbrConfig(FC, parse_rounds("2-4")), pairs=50, seed=1, imaginary=False)
    if evaluate(cfg).mean_mbb != 0.0:
        raise AssertionError("always-call with fold/call LBR did not cancel to 0")


CHECKS = [
    ("evaluator vs reference ranking", check_evaluator),
    ("range normalization and fold split", check_ranges),
    ("engine legality and zero-sum payoffs", check_engine),
    ("harness determinism and cancellation", lambda rng: check_harness()),
]


def run(seed: int = 0, out=print) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn in CHECKS:
        t = time.perf_counter()
        try:
            fn(rng)
        except AssertionError as e:
            ok = False
            out(f"FAIL  {name}: {e}")
        else:
            out(f"ok    {name} ({time.perf_counter() - t:.1f}s)")
    return ok
