"""Doudizhu rules, policies, and endgame solving."""
from .cards import Card, Hand, MultiplicityExceeded, UnknownRank, encode_cards, parse_cards
from .combos import PASS, Category, Combo, beats, enumerate_all_actions
from .state import (
    DouState,
    IllegalAction,
    Side,
    TerminalState,
    apply_action,
    deal,
    is_terminal,
    legal_actions,
    new_game,
)
