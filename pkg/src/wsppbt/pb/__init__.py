"""Pseudo-Boolean formulations of WSP, OPB I/O and a small exhaustive solver."""

from .encode import (EdgeBounds, decode_solution, edge_bounds, encode_atleast_general_perm,
                     encode_atmost_general, encode_counting_tvars, encode_edge_count, encode_pbpb,
                     encode_threshold, encode_udpb, exclude_pattern, m_only_model)
from .enumerate import solutions, solve_first
from .model import PBConstraint, PBError, PBModel, Tag
from .opb import emit_opb, parse_opb, read_solution, write_solution

__all__ = [
    "EdgeBounds", "decode_solution", "edge_bounds", "encode_atleast_general_perm",
    "encode_atmost_general", "encode_counting_tvars", "encode_edge_count", "encode_pbpb", "encode_threshold",
    "encode_udpb", "exclude_pattern", "m_only_model", "solutions", "solve_first",
    "PBConstraint", "PBError", "PBModel", "Tag", "emit_opb", "parse_opb", "read_solution",
    "write_solution",
]
