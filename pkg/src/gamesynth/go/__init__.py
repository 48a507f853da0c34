"""Go rules, board text codec, SGF reading and position evaluation."""
from .board import (
    Color,
    GoMove,
    GoState,
    KoViolation,
    NotReachable,
    Occupied,
    OutOfBounds,
    Suicide,
    apply_move,
    diff_states,
    empty_state,
)
from .codec import BadSymbol, CoordinateMismatch, RaggedGrid, parse_board, serialize_board
