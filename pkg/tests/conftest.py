import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from lbr_bench.cards import HAND_CARDS, NUM_HANDS  # noqa: E402
from lbr_bench.engine import Action, legal_actions  # noqa: E402
from lbr_bench.preflop import build_preflop_table, ensure_table  # noqa: E402
from lbr_bench.strategy import Strategy, TableQuery, live_hands  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def small_table(tmp_path_factory):
    """A quick low-precision preflop table (a few seconds to build)."""
    table = build_preflop_table(mc_boards=3000, seed=11)
    path = tmp_path_factory.mktemp("tables") / "small.bin"
    table.save(path)
    table.path = path
    return table


@pytest.fixture(scope="session")
def full_table():
    """The default-precision table, built once into the user cache if absent."""
    return ensure_table()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


class HighCardStrategy(Strategy):
    """Card-aware test strategy: folds to bets with weak hands, raises strong ones.

    Strength is the sum of the two card ranks, so the ranges LBR tracks
    against it really do change after each action.
    """

    name = "high-card"

    def __init__(self):
        ranks = (HAND_CARDS >> 2) + 2
        strength = (ranks.sum(axis=1) - 5) / 23.0  # 0 for 32, 1 for AA
        self.fold = np.clip(0.8 - strength, 0.0, 1.0)
        self.raise_ = np.clip(strength - 0.5, 0.0, 1.0)

    def query(self, s):
        space = legal_actions(s)
        fold = self.fold if space.can_fold else np.zeros(NUM_HANDS)
        rai = np.minimum(self.raise_, 1.0 - fold) if space.can_raise else np.zeros(NUM_HANDS)
        actions, cols = [Action.call()], [1.0 - fold - rai]
        if space.can_fold:
            actions.append(Action.fold())
            cols.append(fold)
        if space.can_raise:
            actions.append(Action.raise_to(space.raise_bounds[0]))
            cols.append(rai)
        return TableQuery(s, actions, np.column_stack(cols))


@pytest.fixture
def high_card():
    return HighCardStrategy()


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"CRITERION {name}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


__all__ = ["HighCardStrategy", "record_criterion", "live_hands"]
