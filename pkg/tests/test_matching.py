import random

from hypothesis import given, settings
from hypothesis import strategies as st

from wsppbt import Instance, Pattern
from wsppbt.core import mask_of
from wsppbt.matching import AssignmentState, BlockEdgeCache, candidate_users, is_authorised, witness_plan
from wsppbt.oracle import pattern_authorised

from conftest import small_instances


def test_candidate_users(fig1):
    assert candidate_users(fig1, mask_of([0, 1]), 5) == (2,)
    assert candidate_users(fig1, mask_of([2]), 5) == (0, 4, 5)
    assert candidate_users(fig1, mask_of(range(5)), 5) == ()
    assert candidate_users(fig1, mask_of([2]), 2) == (0, 4)


def test_candidate_cache_hits(fig1):
    cache = BlockEdgeCache(limit=2)
    a = candidate_users(fig1, mask_of([2]), 5, cache)
    assert cache.get(mask_of([2])) == a
    for m in (1, 2, 4):
        candidate_users(fig1, m, 5, cache)
    assert len(cache) <= 2


def test_fig1_patterns(fig1):
    ok, w = is_authorised(fig1, Pattern([[0, 1], [2], [3, 4]]))
    assert ok
    plan = witness_plan(Pattern([[0, 1], [2], [3, 4]]), w)
    assert plan[0] == plan[1] == 2 and plan[3] == plan[4]
    assert is_authorised(fig1, Pattern([[0, 1], [2], [3], [4]])) == (False, None)
    assert is_authorised(fig1, Pattern([])) == (True, {})


def test_push_new_block(fig1):
    st_ = AssignmentState(fig1)
    assert st_.push_new_block(0)
    assert st_.push_extend_block(0, 1)
    assert st_.push_new_block(2)
    assert st_.is_full()


def test_pigeonhole():
    inst = Instance(3, 2, (frozenset({0, 1, 2}), frozenset({0, 1, 2})))
    st_ = AssignmentState(inst)
    assert st_.push_new_block(0) and st_.push_new_block(1)
    assert not st_.push_new_block(2)


def test_extend_then_pop_restores(fig1):
    st_ = AssignmentState(fig1)
    st_.push_new_block(0)
    st_.push_new_block(2)
    before = st_.snapshot()
    assert st_.push_extend_block(0, 1)
    st_.pop()
    assert st_.snapshot() == before
    # {s2, s3} has candidate u4, {s2, s3, s0} has none
    st_.push_extend_block(1, 3)
    assert not st_.push_extend_block(1, 0)


def test_push_pop_sequence_restores(fig1):
    st_ = AssignmentState(fig1)
    empty = st_.snapshot()
    for s in range(5):
        st_.push_new_block(s)
    for _ in range(5):
        st_.pop()
    assert st_.snapshot() == empty


@settings(max_examples=120, deadline=None)
@given(small_instances(k_range=(1, 7), n_range=(1, 7), kinds=()), st.integers(0, 2**31))
def test_incremental_matches_scratch(inst, seed):
    """Random DFS of pushes and pops (failed pushes undone at once) agrees with a from-scratch matching at every node."""
    rnd = random.Random(seed)
    st_ = AssignmentState(inst, cap=inst.k)
    blocks: list[list[int]] = []
    stack: list[tuple[list[list[int]], tuple]] = []
    unplaced = list(range(inst.k))
    rnd.shuffle(unplaced)
    for _ in range(40):
        if unplaced and (not stack or rnd.random() < 0.7):
            s = unplaced.pop()
            stack.append(([list(b) for b in blocks], st_.snapshot(), s))
            b = rnd.randrange(len(blocks) + 1)
            if b == len(blocks):
                blocks.append([s])
                ok = st_.push_new_block(s)
            else:
                blocks[b].append(s)
                ok = st_.push_extend_block(b, s)
            assert ok == pattern_authorised(inst, Pattern(blocks))
            if ok:
                assert is_authorised(inst, Pattern(blocks))[0]
                plan = st_.plan()
                assert all(inst.auth_masks[u] >> s & 1 for s, u in plan.items())
            else:
                # a failed push is always undone before going on
                blocks, snap, s = stack.pop()
                st_.pop()
                unplaced.append(s)
                assert st_.snapshot() == snap
        elif stack:
            blocks, snap, s = stack.pop()
            st_.pop()
            unplaced.append(s)
            assert st_.snapshot() == snap
