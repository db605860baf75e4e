"""Local best response lower bounds on the exploitability of heads-up
no-limit hold'em strategies."""
from .cards import Card, evaluate7, format_hand, hand_cards, hand_index, parse_cards, parse_hand
from .engine import Action, GameRules, PublicState, apply_action, initial_state, legal_actions
from .harness import EvalReport, MatchConfig, evaluate
from .lbr import BetSet, LbrConfig, choose_action
from .ranges import Range, bayes_update, fold_split, uniform_range, wp_rollout
from .strategy import Strategy, make_strategy

__version__ = "0.1.0"

__all__ = [
    "Action", "BetSet", "Card", "EvalReport", "GameRules", "LbrConfig", "MatchConfig",
    "PublicState", "Range", "Strategy", "apply_action", "bayes_update", "choose_action",
    "evaluate", "evaluate7", "fold_split", "format_hand", "hand_cards", "hand_index",
    "initial_state", "legal_actions", "make_strategy", "parse_cards", "parse_hand",
    "uniform_range", "wp_rollout",
]
