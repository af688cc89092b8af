"""Domain types for workflow satisfiability instances, plans and patterns.

Steps and users are dense zero-based integers.  Step sets are handled as
Python ints used as bit sets, so an instance may have at most 64 steps.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

MAX_STEPS = 64


class WSPError(ValueError):
    """Structural problem with an instance, plan or pattern."""


class Kind(str, enum.Enum):
    NOT_EQUALS = "sod"
    EQUALS = "bod"
    AT_MOST = "atmost"
    AT_LEAST = "atleast"
    THRESHOLD = "threshold"


def mask_of(steps: Iterable[int]) -> int:
    m = 0
    for s in steps:
        m |= 1 << s
    return m


def steps_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class Constraint:
    """A user-independent constraint over a scope of steps.

    ``r`` is used by at-most/at-least, ``t_l``/``t_r`` by threshold.
    The scope is kept sorted; constraints do not depend on scope order.
    """

    kind: Kind
    scope: tuple[int, ...]
    r: int = 0
    t_l: int = 0
    t_r: int = 0

    def __post_init__(self):
        scope = tuple(sorted(self.scope))
        object.__setattr__(self, "scope", scope)
        if len(set(scope)) != len(scope):
            raise WSPError(f"duplicate step in scope {scope}")
        q = len(scope)
        if self.kind in (Kind.NOT_EQUALS, Kind.EQUALS):
            if q != 2:
                raise WSPError(f"{self.kind.value} needs exactly two steps, got {scope}")
        elif self.kind in (Kind.AT_MOST, Kind.AT_LEAST):
            if not 1 <= self.r <= q:
                raise WSPError(f"{self.kind.value}-{self.r} invalid on scope of size {q}")
        elif self.kind is Kind.THRESHOLD:
            if not 1 <= self.t_l <= self.t_r <= q:
                raise WSPError(f"threshold ({self.t_l},{self.t_r}) invalid on scope of size {q}")

    @classmethod
    def not_equals(cls, s: int, t: int) -> "Constraint":
        return cls(Kind.NOT_EQUALS, (s, t))

    @classmethod
    def equals(cls, s: int, t: int) -> "Constraint":
        return cls(Kind.EQUALS, (s, t))

    @classmethod
    def at_most(cls, r: int, scope: Iterable[int]) -> "Constraint":
        return cls(Kind.AT_MOST, tuple(scope), r=r)

    @classmethod
    def at_least(cls, r: int, scope: Iterable[int]) -> "Constraint":
        return cls(Kind.AT_LEAST, tuple(scope), r=r)

    @classmethod
    def threshold(cls, t_l: int, t_r: int, scope: Iterable[int]) -> "Constraint":
        return cls(Kind.THRESHOLD, tuple(scope), t_l=t_l, t_r=t_r)

    @property
    def mask(self) -> int:
        return mask_of(self.scope)

    def satisfied_by(self, users: Sequence[int]) -> bool:
        """Check the constraint given the users assigned to ``scope`` (same order)."""
        if self.kind is Kind.NOT_EQUALS:
            return users[0] != users[1]
        if self.kind is Kind.EQUALS:
            return users[0] == users[1]
        if self.kind is Kind.AT_MOST:
            return len(set(users)) <= self.r
        if self.kind is Kind.AT_LEAST:
            return len(set(users)) >= self.r
        counts: dict[int, int] = {}
        for u in users:
            counts[u] = counts.get(u, 0) + 1
        return all(self.t_l <= c <= self.t_r for c in counts.values())

    def __str__(self):
        steps = " ".join(f"s{s}" for s in self.scope)
        if self.kind in (Kind.AT_MOST, Kind.AT_LEAST):
            return f"{self.kind.value} {self.r} {steps}"
        if self.kind is Kind.THRESHOLD:
            return f"threshold {self.t_l} {self.t_r} {steps}"
        return f"{self.kind.value} {steps}"


@dataclass(frozen=True)
class Instance:
    """A WSP instance: ``k`` steps, ``n`` users, authorisation lists, constraints."""

    k: int
    n: int
    auth: tuple[frozenset[int], ...]
    constraints: tuple[Constraint, ...] = ()
    auth_masks: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.k <= MAX_STEPS:
            raise WSPError(f"k={self.k} outside supported range [0, {MAX_STEPS}]")
        if self.n < 0:
            raise WSPError(f"n={self.n} must be non-negative")
        auth = tuple(frozenset(a) for a in self.auth)
        if len(auth) != self.n:
            raise WSPError(f"expected {self.n} authorisation lists, got {len(auth)}")
        for u, a in enumerate(auth):
            if any(not 0 <= s < self.k for s in a):
                raise WSPError(f"user {u} authorised for a step outside [0, {self.k})")
        cons = tuple(self.constraints)
        seen = set()
        for c in cons:
            if any(not 0 <= s < self.k for s in c.scope):
                raise WSPError(f"constraint '{c}' refers to a step outside [0, {self.k})")
            key = (c.kind, c.scope)
            if key in seen:
                raise WSPError(f"duplicate {c.kind.value} scope {c.scope}")
            seen.add(key)
        object.__setattr__(self, "auth", auth)
        object.__setattr__(self, "constraints", cons)
        object.__setattr__(self, "auth_masks", tuple(mask_of(a) for a in auth))

    def authorised_users(self, s: int) -> list[int]:
        bit = 1 << s
        return [u for u, m in enumerate(self.auth_masks) if m & bit]

    def of_kind(self, kind: Kind) -> list[Constraint]:
        return [c for c in self.constraints if c.kind is kind]


class Pattern:
    """A partition of a subset of steps into non-empty blocks.

    Blocks are stored as bit sets in canonical order (by smallest step),
    so equal patterns compare and hash equal.
    """

    __slots__ = ("masks",)

    def __init__(self, blocks: Iterable[Iterable[int] | int]):
        masks = []
        covered = 0
        for b in blocks:
            m = b if isinstance(b, int) else mask_of(b)
            if m == 0:
                raise WSPError("pattern blocks must be non-empty")
            if m & covered:
                raise WSPError("pattern blocks must be disjoint")
            covered |= m
            masks.append(m)
        masks.sort(key=lambda m: m & -m)
        self.masks: tuple[int, ...] = tuple(masks)

    @property
    def blocks(self) -> list[frozenset[int]]:
        return [frozenset(steps_of(m)) for m in self.masks]

    @property
    def covered(self) -> int:
        out = 0
        for m in self.masks:
            out |= m
        return out

    def is_complete(self, k: int) -> bool:
        return self.covered == (1 << k) - 1

    def same_block(self, i: int, j: int) -> bool:
        """The M-matrix entry: do steps ``i`` and ``j`` share a block?"""
        both = (1 << i) | (1 << j)
        return any(m & both == both for m in self.masks)

    def labels(self) -> dict[int, int]:
        """Map each covered step to the index of its block."""
        return {s: b for b, m in enumerate(self.masks) for s in steps_of(m)}

    def __len__(self):
        return len(self.masks)

    def __eq__(self, other):
        return isinstance(other, Pattern) and self.masks == other.masks

    def __hash__(self):
        return hash(self.masks)

    def __repr__(self):
        inner = ", ".join("{" + ",".join(f"s{s}" for s in steps_of(m)) + "}" for m in self.masks)
        return f"Pattern({{{inner}}})"


Plan = Mapping[int, int]


@dataclass
class Verdict:
    authorised: bool
    eligible: bool
    violations: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.authorised and self.eligible


def verify_plan(inst: Instance, plan: Plan) -> Verdict:
    """Check authorisation and eligibility of a (possibly partial) plan.

    ``violations`` holds failing constraints and unauthorised ``(step, user)``
    pairs.  Only constraints whose whole scope is assigned are checked.
    """
    for s, u in plan.items():
        if not 0 <= s < inst.k:
            raise WSPError(f"step {s} out of range")
        if not 0 <= u < inst.n:
            raise WSPError(f"user {u} out of range")
    violations: list = []
    authorised = True
    for s, u in sorted(plan.items()):
        if not inst.auth_masks[u] >> s & 1:
            authorised = False
            violations.append((s, u))
    eligible = True
    for c in inst.constraints:
        if all(s in plan for s in c.scope):
            if not c.satisfied_by([plan[s] for s in c.scope]):
                eligible = False
                violations.append(c)
    return Verdict(authorised, eligible, violations)


def pattern_of_plan(plan: Plan) -> Pattern:
    groups: dict[int, int] = {}
    for s, u in plan.items():
        groups[u] = groups.get(u, 0) | (1 << s)
    return Pattern(groups.values())


def plans_equivalent(p1: Plan, p2: Plan) -> bool:
    return set(p1) == set(p2) and pattern_of_plan(p1) == pattern_of_plan(p2)


def is_eligible_pattern(inst: Instance, pattern: Pattern) -> bool:
    """Eligibility of any plan realising ``pattern`` (constraints are UI)."""
    labels = pattern.labels()
    for c in inst.constraints:
        if all(s in labels for s in c.scope):
            if not c.satisfied_by([labels[s] for s in c.scope]):
                return False
    return True


@dataclass(frozen=True)
class Reduction:
    """Result of merging binding-of-duty (equals) steps.

    ``step_map[s]`` is the merged step that original step ``s`` became.
    ``trivially_unsat`` flags contradictions found while merging.
    """

    instance: Instance
    step_map: tuple[int, ...]
    trivially_unsat: bool = False

    def lift_plan(self, plan: Plan) -> dict[int, int]:
        return {s: plan[t] for s, t in enumerate(self.step_map)}


def eliminate_equals(inst: Instance) -> Reduction:
    parent = list(range(inst.k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for c in inst.of_kind(Kind.EQUALS):
        a, b = find(c.scope[0]), find(c.scope[1])
        if a != b:
            parent[max(a, b)] = min(a, b)

    roots = sorted({find(s) for s in range(inst.k)})
    new_index = {r: i for i, r in enumerate(roots)}
    step_map = tuple(new_index[find(s)] for s in range(inst.k))
    k2 = len(roots)

    group_masks = [0] * k2
    for s, t in enumerate(step_map):
        group_masks[t] |= 1 << s
    auth = []
    for m in inst.auth_masks:
        auth.append(frozenset(t for t, g in enumerate(group_masks) if m & g == g))

    unsat = False
    threshold_merges = False
    sod: dict[tuple, Constraint] = {}
    at_most: dict[tuple, Constraint] = {}
    at_least: dict[tuple, Constraint] = {}
    other: dict[tuple, Constraint] = {}
    for c in inst.constraints:
        if c.kind is Kind.EQUALS:
            continue
        scope = tuple(sorted({step_map[s] for s in c.scope}))
        if c.kind is Kind.NOT_EQUALS:
            if len(scope) == 1:
                unsat = True
                continue
            sod.setdefault(scope, Constraint(Kind.NOT_EQUALS, scope))
        elif c.kind is Kind.AT_MOST:
            if len(scope) <= c.r:
                continue  # can never see more than r users
            prev = at_most.get(scope)
            if prev is None or c.r < prev.r:
                at_most[scope] = Constraint.at_most(c.r, scope)
        elif c.kind is Kind.AT_LEAST:
            if len(scope) < c.r:
                unsat = True
                continue
            prev = at_least.get(scope)
            if prev is None or c.r > prev.r:
                at_least[scope] = Constraint.at_least(c.r, scope)
        else:
            if len(scope) != len(c.scope):
                threshold_merges = True
            other.setdefault((c.kind, scope), Constraint(c.kind, scope, c.r, c.t_l, c.t_r))
    if threshold_merges:
        raise WSPError("threshold constraint over steps merged by equals is not supported")

    # keep the original relative order of surviving constraints
    ordered = []
    emitted = set()
    for c in inst.constraints:
        if c.kind is Kind.EQUALS:
            continue
        scope = tuple(sorted({step_map[s] for s in c.scope}))
        table = {Kind.NOT_EQUALS: sod, Kind.AT_MOST: at_most, Kind.AT_LEAST: at_least}.get(c.kind)
        key = scope if table is not None else (c.kind, scope)
        src = table if table is not None else other
        if key in src and (c.kind, key) not in emitted:
            emitted.add((c.kind, key))
            ordered.append(src[key])
    reduced = Instance(k2, inst.n, tuple(auth), tuple(ordered))
    return Reduction(reduced, step_map, unsat)
