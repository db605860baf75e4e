from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from lbr_bench.cards import DECK, NUM_HANDS, hands_mask
from lbr_bench.engine import (Action, GameRules, apply_action, board_cards_needed, deal_board,
                              initial_state)
from lbr_bench.ranges import bayes_update, uniform_range
from lbr_bench.strategy import (BUILTIN, ActionDistribution, AlwaysCall, AlwaysFold,
                                HalfCallHalfRaise, MalformedResponseError, RandomLegal,
                                TableQuery, averaged_query, make_strategy, query, sample_action)

C, F = Action.call(), Action.fold()
CHUMPS = [AlwaysCall(), HalfCallHalfRaise(), RandomLegal(), AlwaysFold()]


def random_state(rng, rules=GameRules()):
    """A random non-terminal state reached by random-legal play."""
    chump = RandomLegal()
    while True:
        s = initial_state(rules)
        deck = [DECK[int(c)] for c in rng.permutation(52)[:5]]
        for _ in range(rng.integers(0, 8)):
            if s.is_terminal:
                break
            if s.awaiting_board:
                k = len(s.board)
                s = deal_board(s, deck[k:k + board_cards_needed(s)])
                continue
            s = apply_action(s, chump.sample_action(s, 0, rng))
        if s.to_act is not None:
            return s


class TestDistribution:
    def test_items_expand_span(self):
        d = ActionDistribution({C: 0.5}, (200, 203), 0.5)
        items = dict(d.items())
        assert items[C] == 0.5
        assert [items[Action.raise_to(a)] for a in range(200, 204)] == [0.125] * 4
        assert d.prob(Action.raise_to(202)) == 0.125
        assert d.prob(Action.raise_to(204)) == 0.0
        assert d.total == pytest.approx(1.0)

    def test_validate(self):
        s = initial_state()
        ActionDistribution({C: 0.5, F: 0.5}).validate(s)
        with pytest.raises(MalformedResponseError, match="sum"):
            ActionDistribution({C: 0.7}).validate(s)
        with pytest.raises(MalformedResponseError, match="illegal"):
            ActionDistribution({C: 0.5, Action.raise_to(150): 0.5}).validate(s)


class TestChumps:
    def test_always_call(self):
        assert query(AlwaysCall(), initial_state()).distribution(0).probs == {C: 1.0}

    def test_half_raise_preflop(self):
        d = HalfCallHalfRaise().distribution(initial_state())
        assert d.probs == {C: 0.5}
        assert d.raise_span == (200, 20000) and d.raise_mass == 0.5

    def test_random_legal_facing_all_in(self):
        s = apply_action(initial_state(), Action.raise_to(20000))
        d = RandomLegal().distribution(s)
        assert d.probs == {C: 0.5, F: 0.5} and d.raise_span is None

    def test_half_raise_facing_all_in_calls(self):
        s = apply_action(initial_state(), Action.raise_to(20000))
        assert HalfCallHalfRaise().distribution(s).probs == {C: 1.0}

    def test_random_legal_without_bet(self):
        s = apply_action(initial_state(), C)
        d = RandomLegal().distribution(s)
        assert d.probs == {C: 0.5} and d.raise_mass == 0.5

    def test_always_fold(self):
        assert AlwaysFold().distribution(initial_state()).probs == {F: 1.0}
        s = apply_action(initial_state(), C)
        assert AlwaysFold().distribution(s).probs == {C: 1.0}

    def test_query_needs_player_to_act(self):
        s = apply_action(initial_state(), F)
        with pytest.raises(ValueError):
            query(AlwaysCall(), s)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_distributions_valid_everywhere(self, seed):
        rng = np.random.default_rng(seed)
        s = random_state(rng)
        live = ~hands_mask(s.board)
        for chump in CHUMPS:
            q = chump.query(s)
            d = q.distribution(int(np.flatnonzero(live)[0]))
            d.validate(s)
            # card independence: the update leaves any range unchanged
            pi = uniform_range(s.board)
            a = d.sample(rng)
            assert np.allclose(bayes_update(pi, q.likelihood(a)).probs, pi.probs, atol=1e-9)
            assert (q.likelihood(a)[~live] == 0).all()

    @pytest.mark.parametrize("chump", [HalfCallHalfRaise(), RandomLegal()])
    def test_sample_frequencies(self, chump):
        rng = np.random.default_rng(99)
        s = apply_action(initial_state(GameRules(stack=1000, small_blind=50, big_blind=100)),
                         Action.raise_to(300))
        d = chump.distribution(s)
        n = 100_000
        draws = [chump.sample_action(s, 0, rng) for _ in range(n)]
        support = sorted(a for a, p in d.items() if p > 0)
        seen = Counter(draws)
        counts = np.array([seen[a] for a in support])
        expected = np.array([d.prob(a) for a in support]) * n
        assert counts.sum() == n
        assert stats.chisquare(counts, expected).pvalue > 1e-3

    def test_seeded_sampling_reproducible(self):
        s = initial_state()
        a = [HalfCallHalfRaise().sample_action(s, 0, np.random.default_rng(4)) for _ in range(5)]
        b = [HalfCallHalfRaise().sample_action(s, 0, np.random.default_rng(4)) for _ in range(5)]
        assert a == b


class TestAveragedQuery:
    def test_deterministic_oracle_exact_after_one_sample(self):
        s = initial_state()
        q = averaged_query(AlwaysCall(), s, 1, np.random.default_rng(0))
        assert np.array_equal(q.likelihood(C), np.ones(NUM_HANDS))

    def test_converges_to_mixed_chump(self):
        rng = np.random.default_rng(8)
        s = apply_action(initial_state(GameRules(stack=400, small_blind=50, big_blind=100)),
                         Action.raise_to(300))
        q = averaged_query(RandomLegal(), s, 200, rng)
        # pool the per-hand counts: 1326 * 200 samples of a known distribution
        n = 200 * NUM_HANDS
        for a, p in [(F, 1 / 3), (C, 1 / 3), (Action.raise_to(400), 1 / 3)]:
            freq = q.likelihood(a).mean()
            assert abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / n)

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            averaged_query(AlwaysCall(), initial_state(), 0, np.random.default_rng(0))


class TestTableQuery:
    def test_validate(self, high_card):
        s = initial_state()
        q = high_card.query(s)
        q.validate()
        assert not np.allclose(q.fold_likelihoods(), q.fold_likelihoods()[0])

    def test_bad_sum(self):
        s = initial_state()
        q = TableQuery(s, [C], np.full((NUM_HANDS, 1), 0.9))
        with pytest.raises(MalformedResponseError):
            q.validate()

    def test_unknown_action_has_zero_likelihood(self, high_card):
        q = high_card.query(initial_state())
        assert not q.likelihood(Action.raise_to(5000)).any()


class TestMakeStrategy:
    def test_builtin(self):
        for name, cls in BUILTIN.items():
            assert isinstance(make_strategy(name), cls)

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown opponent"):
            make_strategy("bogus")

    def test_module_level_sample(self):
        assert sample_action(AlwaysCall(), initial_state(), 0, np.random.default_rng(0)) == C
