"""Brute-force reference answers for small instances.

Enumerates every complete pattern as a restricted growth string, checks the
constraints directly and authorisation with a from-scratch matching on the
uncapped block-user graph.  Shares no search code with the solver.
"""

from __future__ import annotations

from typing import Iterator

from .core import Instance, Pattern, is_eligible_pattern


def restricted_growth_strings(k: int) -> Iterator[list[int]]:
    """All length-``k`` strings a with a[0]=0 and a[i] <= 1 + max(a[:i])."""
    if k == 0:
        yield []
        return
    a = [0] * k
    top = [0] * k  # top[i] = max(a[:i+1])

    def rec(i):
        if i == k:
            yield list(a)
            return
        for v in range(top[i - 1] + 2):
            a[i] = v
            top[i] = max(top[i - 1], v)
            yield from rec(i + 1)

    yield from rec(1)


def set_partitions(k: int) -> Iterator[Pattern]:
    for rgs in restricted_growth_strings(k):
        blocks = [0] * (max(rgs, default=-1) + 1)
        for s, b in enumerate(rgs):
            blocks[b] |= 1 << s
        yield Pattern(blocks)


def _matching_size(inst: Instance, masks) -> int:
    edges = [[u for u, m in enumerate(inst.auth_masks) if m & b == b] for b in masks]
    owner = [-1] * inst.n

    def try_block(b, seen):
        for u in edges[b]:
            if not seen[u]:
                seen[u] = True
                if owner[u] < 0 or try_block(owner[u], seen):
                    owner[u] = b
                    return True
        return False

    size = 0
    for b in range(len(masks)):
        if try_block(b, [False] * inst.n):
            size += 1
    return size


def pattern_authorised(inst: Instance, pattern: Pattern) -> bool:
    return _matching_size(inst, pattern.masks) == len(pattern)


def valid_patterns(inst: Instance) -> Iterator[Pattern]:
    for p in set_partitions(inst.k):
        if is_eligible_pattern(inst, p) and pattern_authorised(inst, p):
            yield p


def brute_force_sat(inst: Instance) -> bool:
    return next(valid_patterns(inst), None) is not None


def valid_plans(inst: Instance) -> set[tuple[int, ...]]:
    """Every complete valid plan as a tuple ``(user of s0, user of s1, ...)``."""
    out = set()
    for p in set_partitions(inst.k):
        if not is_eligible_pattern(inst, p):
            continue
        masks = p.masks
        cands = [[u for u, m in enumerate(inst.auth_masks) if m & b == b] for b in masks]
        chosen = [0] * len(masks)

        def rec(i, used):
            if i == len(masks):
                plan = [0] * inst.k
                for b, m in enumerate(masks):
                    for s in range(inst.k):
                        if m >> s & 1:
                            plan[s] = chosen[b]
                out.add(tuple(plan))
                return
            for u in cands[i]:
                if u not in used:
                    chosen[i] = u
                    used.add(u)
                    rec(i + 1, used)
                    used.discard(u)

        rec(0, set())
    return out
