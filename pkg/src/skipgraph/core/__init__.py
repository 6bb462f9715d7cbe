from .constraints import ConstraintReport, Violation, check_constraints, is_skip_graph
from .membership import MembershipVector, common_prefix_len, mv_digit
from .oracle import build_oracle, restriction_search_path, skip_list_restriction
from .records import (
    LEFT,
    RIGHT,
    GraphSnapshot,
    Key,
    NodeRecord,
    flip,
    key_from_int,
    key_to_int,
    parse_key,
    render_key,
)

__all__ = [
    "ConstraintReport",
    "GraphSnapshot",
    "Key",
    "LEFT",
    "MembershipVector",
    "NodeRecord",
    "RIGHT",
    "Violation",
    "build_oracle",
    "check_constraints",
    "common_prefix_len",
    "flip",
    "is_skip_graph",
    "key_from_int",
    "key_to_int",
    "mv_digit",
    "parse_key",
    "render_key",
    "restriction_search_path",
    "skip_list_restriction",
]
