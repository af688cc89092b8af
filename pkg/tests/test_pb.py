from itertools import combinations

import pytest
from hypothesis import given, settings

from wsppbt import Constraint, Instance, Pattern
from wsppbt.core import Kind
from wsppbt.oracle import set_partitions, valid_plans
from wsppbt.pb import (PBError, PBModel, Tag, decode_solution, edge_bounds, emit_opb, encode_atleast_general_perm,
                       encode_atmost_general, encode_counting_tvars, encode_edge_count, encode_pbpb,
                       encode_threshold, encode_udpb, exclude_pattern, m_only_model, parse_opb,
                       read_solution, solutions, solve_first)
from wsppbt.pb.opb import write_solution

from conftest import FIG1_PLAN, small_instances


def m_patterns(model: PBModel) -> set[Pattern]:
    """Patterns described by the M-projection of every model solution."""
    out = set()
    for value in solutions(model, project=model.vars_of_kind("M")):
        out.add(decode_solution(model, value)[1])
    return out


def partitions_where(k, pred) -> set[Pattern]:
    return {p for p in set_partitions(k) if pred(p)}


def blocks_in(p: Pattern, scope) -> int:
    lab = p.labels()
    return len({lab[s] for s in scope})


def plan_set(model: PBModel, k: int) -> set[tuple[int, ...]]:
    out = set()
    for value in solutions(model, project=model.vars_of_kind("X")):
        plan, _ = decode_solution(model, value)
        out.add(tuple(plan[s] for s in range(k)))
    return out


# -- edge bounds -----------------------------------------------------------------

def test_edge_bounds_q5_row():
    assert [edge_bounds(5, r)[:2] for r in range(1, 6)] == [(10, 10), (4, 6), (2, 3), (1, 1), (0, 0)]


def test_edge_bounds_q6_overlap():
    b = edge_bounds(6, 3)
    assert b[:2] == (3, 6)
    assert 2 in b.overlaps and edge_bounds(6, 2)[:2] == (6, 10)


def test_edge_bounds_brute_force():
    for q in range(1, 7):
        by_r: dict[int, list[int]] = {}
        for p in set_partitions(q):
            edges = sum(len(b) * (len(b) - 1) // 2 for b in p.blocks)
            by_r.setdefault(len(p), []).append(edges)
        for r in range(1, q + 1):
            b = edge_bounds(q, r)
            assert (b.lower, b.upper) == (min(by_r[r]), max(by_r[r]))
            lo, hi = min(by_r[r]), max(by_r[r])
            expect = tuple(r2 for r2 in range(1, q + 1) if r2 != r
                           and min(by_r[r2]) <= hi and lo <= max(by_r[r2]))
            assert b.overlaps == expect


def test_edge_bounds_errors():
    with pytest.raises(PBError):
        edge_bounds(7, 2)
    with pytest.raises(PBError):
        edge_bounds(4, 5)


# -- pattern-level encoders ------------------------------------------------------

def test_m_only_model_is_partitions():
    for k in range(1, 6):
        assert m_patterns(m_only_model(k)) == set(set_partitions(k))


def test_exclude_pattern_constraint_shape():
    model = m_only_model(3)
    before = len(model.constraints)
    exclude_pattern(model, Pattern([[0, 1], [2]]))
    c = model.constraints[before]
    m = model.m
    assert sorted(c.terms) == sorted([(-1, m(0, 1)), (1, m(0, 2)), (1, m(1, 2))])
    assert (c.relation, c.rhs) == (">=", 0)


def test_exclude_singletons_pair():
    model = m_only_model(2)
    exclude_pattern(model, Pattern([[0], [1]]))
    assert model.constraints[-1].terms == ((1, model.m(0, 1)),) and model.constraints[-1].rhs == 1


def test_exclude_every_pattern_unsat():
    model = m_only_model(3)
    for p in set_partitions(3):
        exclude_pattern(model, p)
    assert solve_first(model) is None


def test_atmost_general():
    model = m_only_model(2)
    encode_atmost_general(model, 1, [0, 1])
    assert model.constraints[-1].terms == ((1, model.m(0, 1)),)
    model = m_only_model(5)
    before = len(model.constraints)
    encode_atmost_general(model, 3, range(5))
    assert len(model.constraints) - before == 5
    assert m_patterns(model) == partitions_where(5, lambda p: len(p) <= 3)
    model = m_only_model(4)
    before = len(model.constraints)
    encode_atmost_general(model, 4, range(4))
    assert len(model.constraints) == before


def test_atleast_perm():
    model = m_only_model(3)
    before = len(model.constraints)
    encode_atleast_general_perm(model, 3, range(3))
    assert len(model.constraints) - before == 1
    assert m_patterns(model) == {Pattern([[0], [1], [2]])}
    model = m_only_model(5)
    before = len(model.constraints)
    encode_atleast_general_perm(model, 3, range(5))
    assert len(model.constraints) - before == 12
    assert m_patterns(model) == partitions_where(5, lambda p: len(p) >= 3)
    model = m_only_model(4)
    encode_atleast_general_perm(model, 1, range(4))
    assert m_patterns(model) == set(set_partitions(4))


@pytest.mark.parametrize("q", [2, 3, 4, 5, 6])
def test_counting_encoders_match_partitions(q):
    for r in range(1, q + 1):
        for kind in (Kind.AT_MOST, Kind.AT_LEAST):
            want = partitions_where(q, (lambda p: len(p) <= r) if kind is Kind.AT_MOST
                                    else (lambda p: len(p) >= r))
            model = m_only_model(q)
            encode_counting_tvars(model, kind, r, range(q), 0)
            assert m_patterns(model) == want, (q, r, kind, "tvars")
            model = m_only_model(q)
            if kind is Kind.AT_MOST:
                encode_atmost_general(model, r, range(q))
            else:
                encode_atleast_general_perm(model, r, range(q))
            assert m_patterns(model) == want, (q, r, kind, "general")


def test_edge_count_matches_for_q5_r3():
    for kind, pred in ((Kind.AT_MOST, lambda p: len(p) <= 3), (Kind.AT_LEAST, lambda p: len(p) >= 3)):
        model = m_only_model(5)
        encode_edge_count(model, kind, 3, range(5))
        assert m_patterns(model) == partitions_where(5, pred)


def test_tvars_at_least_two_forces_split():
    model = m_only_model(2)
    encode_counting_tvars(model, Kind.AT_LEAST, 2, [0, 1], 0)
    assert m_patterns(model) == {Pattern([[0], [1]])}


def test_threshold():
    model = m_only_model(3)
    encode_threshold(model, 1, 1, range(3))
    assert m_patterns(model) == {Pattern([[0], [1], [2]])}
    model = m_only_model(3)
    encode_threshold(model, 3, 3, range(3))
    assert m_patterns(model) == {Pattern([[0, 1, 2]])}
    model = m_only_model(4)
    encode_threshold(model, 1, 2, range(4))
    assert m_patterns(model) == partitions_where(4, lambda p: all(len(b) <= 2 for b in p.blocks))


# -- whole-instance formulations -------------------------------------------------

def test_udpb_tiny():
    model = encode_udpb(Instance(1, 1, (frozenset({0}),)))
    assert len(model.constraints) == 1
    assert solve_first(model) == {1: 1}
    inst = Instance(2, 2, (frozenset({0, 1}),) * 2, (Constraint.not_equals(0, 1),))
    assert plan_set(encode_udpb(inst), 2) == {(0, 1), (1, 0)}


def test_udpb_no_constraints_only_one_hot():
    inst = Instance(3, 2, (frozenset({0, 1}), frozenset({1, 2})))
    model = encode_udpb(inst)
    assert len(model.constraints) == 3
    assert all(c.note == "one user per step" for c in model.constraints)


def test_fig1_models(fig1):
    expected = valid_plans(fig1)
    assert tuple(FIG1_PLAN[s] for s in range(5)) in expected
    for model in (encode_udpb(fig1), encode_pbpb(fig1), encode_pbpb(fig1, "tvars")):
        assert plan_set(model, 5) == expected


def test_pbpb_not_equals_fixes_m():
    inst = Instance(3, 1, (frozenset({0, 1, 2}),), (Constraint.not_equals(0, 1),))
    model = encode_pbpb(inst)
    c = [c for c in model.constraints if c.note == "not-equals"][0]
    assert c.terms == ((1, model.m(0, 1)),) and (c.relation, c.rhs) == ("=", 0)


def test_pbpb_at_most_edge_sum():
    inst = Instance(5, 1, (frozenset(range(5)),), (Constraint.at_most(3, range(5)),))
    model = encode_pbpb(inst)
    c = [c for c in model.constraints if c.note == "at-most edge count"][0]
    assert len(c.terms) == 10 and c.rhs == 2


def test_pbpb_variable_count():
    inst = Instance(5, 3, (frozenset({0, 1}), frozenset({2}), frozenset({0, 3, 4})),
                    (Constraint.at_most(3, range(5)),))
    model = encode_pbpb(inst)
    assert model.num_vars == 10 + 6
    model = encode_pbpb(inst, "tvars")
    assert model.num_vars == 10 + 6 + 5


def test_udpb_rejects_threshold():
    inst = Instance(3, 1, (frozenset({0}),), (Constraint.threshold(1, 2, range(3)),))
    with pytest.raises(PBError):
        encode_udpb(inst)


@settings(max_examples=100, deadline=None)
@given(small_instances(k_range=(1, 5), n_range=(1, 4)))
def test_formulations_agree_with_oracle(inst):
    expected = valid_plans(inst)
    for model in (encode_udpb(inst), encode_pbpb(inst), encode_pbpb(inst, "tvars")):
        assert plan_set(model, inst.k) == expected
    pats = m_patterns(encode_pbpb(inst))
    from wsppbt.oracle import valid_patterns
    assert pats == set(valid_patterns(inst))


# -- decoding --------------------------------------------------------------------

def _assignment_for(model: PBModel, plan: dict[int, int]) -> dict[int, int]:
    value = {}
    for vid, tag in enumerate(model.tags, start=1):
        if tag.kind == "X":
            value[vid] = int(plan[tag.a] == tag.b)
        elif tag.kind == "M":
            value[vid] = int(plan[tag.a] == plan[tag.b])
        else:
            value[vid] = 0
    return value


def test_decode_fig1_plan(fig1):
    model = encode_pbpb(fig1)
    plan, pat = decode_solution(model, _assignment_for(model, FIG1_PLAN))
    assert plan == FIG1_PLAN
    assert pat == Pattern([[0, 1], [2], [3, 4]])


def test_decode_all_singletons():
    inst = Instance(3, 3, (frozenset(range(3)),) * 3)
    model = encode_pbpb(inst)
    plan, pat = decode_solution(model, _assignment_for(model, {0: 0, 1: 1, 2: 2}))
    assert pat == Pattern([[0], [1], [2]])


def test_decode_errors():
    inst = Instance(2, 2, (frozenset({0, 1}),) * 2)
    model = encode_pbpb(inst)
    value = _assignment_for(model, {0: 0, 1: 1})
    bad = dict(value)
    for vid, tag in enumerate(model.tags, start=1):
        if tag == Tag("X", 0, 0):
            bad[vid] = 0
    with pytest.raises(PBError):
        decode_solution(model, bad)
    with pytest.raises(PBError):
        decode_solution(model, {1: 0})


# -- OPB text --------------------------------------------------------------------

def test_opb_line_format():
    model = PBModel(1, 2)
    a, b = model.var(Tag("X", 0, 0)), model.var(Tag("X", 0, 1))
    model.add([(1, a), (1, b)], "=", 1)
    text = emit_opb(model)
    assert "+1 x1 +1 x2 = 1 ;" in text.splitlines()
    assert text.startswith("* #variable= 2 #constraint= 1")


def test_opb_empty_model():
    text = emit_opb(PBModel())
    assert "#constraint= 0" in text.splitlines()[0]
    assert not [ln for ln in text.splitlines() if not ln.startswith("*")]


@settings(max_examples=60, deadline=None)
@given(small_instances(k_range=(1, 5), n_range=(1, 4)))
def test_opb_round_trip(inst):
    for model in (encode_udpb(inst), encode_pbpb(inst), encode_pbpb(inst, "tvars")):
        text = emit_opb(model)
        back = parse_opb(text)
        assert back.same_as(model)
        assert emit_opb(back) == text


def test_solution_text_round_trip():
    value = {1: 1, 2: 0, 3: 1}
    status, back = read_solution(write_solution(value))
    assert status == "SAT" and back == value
    assert read_solution("s UNSATISFIABLE\n")[0] == "UNSAT"


def test_parse_opb_accepts_le_and_foreign_files():
    model = parse_opb("* #variable= 2 #constraint= 1\n+1 x1 +1 x2 <= 1 ;\n")
    assert model.num_vars == 2
    assert model.satisfied_by({1: 1, 2: 0}) and not model.satisfied_by({1: 1, 2: 1})
    with pytest.raises(PBError):
        parse_opb("+1 x1 >= 1\n")
