"""User-driven (UDPB) and pattern-based (PBPB) pseudo-Boolean formulations.

Unauthorised (step, user) pairs get no x variable at all: every term that
would mention one is dropped, which is the same as fixing it to 0.  Same-user
variables M exist for step pairs i < j only.
"""

from __future__ import annotations

from itertools import combinations, permutations
from math import comb
from typing import NamedTuple

from ..core import Constraint, Instance, Kind, Pattern
from .model import PBError, PBModel, Tag

PERM_LIMIT = 8


class EdgeBounds(NamedTuple):
    lower: int
    upper: int
    overlaps: tuple[int, ...]  # other block counts whose edge range intersects this one


def _edge_range(q: int, r: int) -> tuple[int, int]:
    upper = comb(q - r + 1, 2)
    size, extra = divmod(q, r)
    lower = extra * comb(size + 1, 2) + (r - extra) * comb(size, 2)
    return lower, upper


def edge_bounds(q: int, r: int) -> EdgeBounds:
    """Fewest and most within-block pairs over partitions of q elements into exactly r blocks."""
    if not 1 <= r <= q:
        raise PBError(f"need 1 <= r <= q, got q={q}, r={r}")
    if q > 6:
        raise PBError(f"edge counting is only tabulated for q <= 6 (got q={q}); use the general encoders")
    lo, hi = _edge_range(q, r)
    overlaps = []
    for r2 in range(1, q + 1):
        if r2 != r:
            lo2, hi2 = _edge_range(q, r2)
            if lo2 <= hi and lo <= hi2:
                overlaps.append(r2)
    return EdgeBounds(lo, hi, tuple(overlaps))


def _x(model: PBModel, inst: Instance, s: int, u: int) -> int | None:
    if inst.auth_masks[u] >> s & 1:
        return model.var(Tag("X", s, u))
    return None


def _declare_x(model: PBModel, inst: Instance) -> None:
    for s in range(inst.k):
        for u in range(inst.n):
            _x(model, inst, s, u)


def _one_hot(model: PBModel, inst: Instance) -> None:
    for s in range(inst.k):
        model.add([(1, model.lookup(Tag("X", s, u))) for u in range(inst.n)], "=", 1, "one user per step")


def _scope_users(inst: Instance, c: Constraint) -> list[int]:
    return [u for u in range(inst.n) if inst.auth_masks[u] & c.mask]


def encode_udpb(inst: Instance) -> PBModel:
    model = PBModel(inst.k, inst.n, "udpb")
    model.notes.append("x(s,u) absent for unauthorised pairs (fixed to 0)")
    _declare_x(model, inst)
    _one_hot(model, inst)
    X = lambda s, u: model.lookup(Tag("X", s, u))  # noqa: E731
    for ci, c in enumerate(inst.constraints):
        if c.kind in (Kind.NOT_EQUALS, Kind.EQUALS):
            a, b = c.scope
            for u in range(inst.n):
                if c.kind is Kind.NOT_EQUALS:
                    model.add([(1, X(a, u)), (1, X(b, u))], "<=", 1, "not-equals")
                else:
                    model.add([(1, X(a, u)), (-1, X(b, u))], "=", 0, "equals")
        elif c.kind is Kind.AT_MOST:
            ys = []
            for u in _scope_users(inst, c):
                y = model.var(Tag("Y", ci, u))
                ys.append(y)
                for s in c.scope:
                    model.add([(1, y), (-1, X(s, u))], ">=", 0, "at-most link")
            model.add([(1, y) for y in ys], "<=", c.r, "at-most count")
        elif c.kind is Kind.AT_LEAST:
            zs = []
            for u in _scope_users(inst, c):
                z = model.var(Tag("Z", ci, u))
                zs.append(z)
                model.add([(1, X(s, u)) for s in c.scope] + [(-1, z)], ">=", 0, "at-least link")
            model.add([(1, z) for z in zs], ">=", c.r, "at-least count")
        else:
            raise PBError(f"user-driven formulation does not encode {c.kind.value}")
    return model


# -- pattern-based pieces -----------------------------------------------------

def add_transitivity(model: PBModel, k: int) -> None:
    for i, j, l in combinations(range(k), 3):
        mij, mjl, mil = model.m(i, j), model.m(j, l), model.m(i, l)
        model.add([(1, mij), (1, mjl), (-1, mil)], "<=", 1, "transitivity")
        model.add([(1, mij), (1, mil), (-1, mjl)], "<=", 1, "transitivity")
        model.add([(1, mil), (1, mjl), (-1, mij)], "<=", 1, "transitivity")


def exclude_pattern(model: PBModel, pattern: Pattern) -> None:
    """Forbid exactly ``pattern`` on the steps it covers."""
    labels = pattern.labels()
    steps = sorted(labels)
    terms, within = [], 0
    for i, j in combinations(steps, 2):
        if labels[i] == labels[j]:
            terms.append((-1, model.m(i, j)))
            within += 1
        else:
            terms.append((1, model.m(i, j)))
    model.add(terms, ">=", 1 - within, "excluded pattern")


def encode_edge_count(model: PBModel, kind: Kind, r: int, scope) -> None:
    scope = sorted(scope)
    lo, hi, _ = edge_bounds(len(scope), r)
    terms = [(1, model.m(i, j)) for i, j in combinations(scope, 2)]
    if kind is Kind.AT_MOST:
        model.add(terms, ">=", lo, "at-most edge count")
    elif kind is Kind.AT_LEAST:
        model.add(terms, "<=", hi, "at-least edge count")
    else:
        raise PBError(f"edge counting does not apply to {kind.value}")


def encode_atmost_general(model: PBModel, r: int, scope) -> None:
    """No r+1 scope steps are pairwise in different blocks."""
    for sub in combinations(sorted(scope), r + 1):
        model.add([(1, model.m(i, j)) for i, j in combinations(sub, 2)], ">=", 1, "at-most independent set")


def encode_atleast_general_perm(model: PBModel, r: int, scope) -> None:
    """Every cyclic order of the scope crosses between blocks at least r times.

    With r <= 1 nothing is emitted: the cyclic inequality would also reject
    the single-block pattern, which an at-least-1 constraint allows.
    """
    scope = sorted(scope)
    q = len(scope)
    if q > PERM_LIMIT:
        raise PBError(f"permutation encoding refused for q={q} > {PERM_LIMIT}; use t-variables")
    if r <= 1:
        return
    if q == 1:
        model.add([], ">=", 1, "at-least permutation")
        return
    first, rest = scope[0], scope[1:]
    for perm in permutations(rest):
        if len(perm) > 1 and perm[0] > perm[-1]:
            continue
        cycle = (first,) + perm
        terms = [(-1, model.m(cycle[i], cycle[(i + 1) % q])) for i in range(q)]
        model.add(terms, ">=", r - q, "at-least permutation")


def encode_counting_tvars(model: PBModel, kind: Kind, r: int, scope, cid: int) -> None:
    """t_i = 1 marks scope step i as the first of its block (in scope order)."""
    scope = sorted(scope)
    ts = [model.var(Tag("T", cid, i)) for i in range(len(scope))]
    model.add([(1, ts[0])], "=", 1, "t-variable first")
    for i in range(1, len(scope)):
        if kind is Kind.AT_LEAST:
            for j in range(i):
                model.add([(1, ts[i]), (1, model.m(scope[j], scope[i]))], "<=", 1, "t-variable at-least")
        else:
            model.add([(1, ts[i])] + [(1, model.m(scope[j], scope[i])) for j in range(i)],
                      ">=", 1, "t-variable at-most")
    if kind is Kind.AT_LEAST:
        model.add([(1, t) for t in ts], ">=", r, "t-variable at-least count")
    elif kind is Kind.AT_MOST:
        model.add([(1, t) for t in ts], "<=", r, "t-variable at-most count")
    else:
        raise PBError(f"t-variable counting does not apply to {kind.value}")


def encode_threshold(model: PBModel, t_l: int, t_r: int, scope) -> None:
    """Each scope step's block, restricted to the scope, has between t_l and t_r steps."""
    scope = sorted(scope)
    q = len(scope)
    for s in scope:
        terms = [(1, model.m(s, t)) for t in scope if t != s]
        if t_l - 1 > 0:
            model.add(terms, ">=", t_l - 1, "threshold lower")
        if t_r - 1 < q - 1:
            model.add(terms, "<=", t_r - 1, "threshold upper")


def _encode_counting(model: PBModel, c: Constraint, cid: int, counting: str) -> None:
    q = len(c.scope)
    if counting == "tvars":
        encode_counting_tvars(model, c.kind, c.r, c.scope, cid)
    elif q == 5 and c.r == 3:
        encode_edge_count(model, c.kind, c.r, c.scope)
    elif c.kind is Kind.AT_MOST:
        encode_atmost_general(model, c.r, c.scope)
    elif q <= PERM_LIMIT:
        encode_atleast_general_perm(model, c.r, c.scope)
    else:
        encode_counting_tvars(model, c.kind, c.r, c.scope, cid)


def encode_pbpb(inst: Instance, counting: str = "edges") -> PBModel:
    if counting not in ("edges", "tvars"):
        raise PBError(f"unknown counting encoding {counting!r}")
    k = inst.k
    model = PBModel(k, inst.n, "pbpb" if counting == "edges" else "pbpb-tvars")
    model.notes.append("x(s,u) absent for unauthorised pairs (fixed to 0)")
    for i, j in combinations(range(k), 2):
        model.m(i, j)
    _declare_x(model, inst)
    add_transitivity(model, k)
    _one_hot(model, inst)
    X = lambda s, u: model.lookup(Tag("X", s, u))  # noqa: E731
    for s1, s2 in combinations(range(k), 2):
        m = model.m(s1, s2)
        for u in range(inst.n):
            x1, x2 = X(s1, u), X(s2, u)
            model.add([(1, x1), (-1, x2), (1, m)], "<=", 1, "link same user")
            model.add([(1, x2), (-1, x1), (1, m)], "<=", 1, "link same user")
            model.add([(1, x1), (1, x2), (-1, m)], "<=", 1, "link different users")
    for ci, c in enumerate(inst.constraints):
        if c.kind is Kind.NOT_EQUALS:
            model.add([(1, model.m(*c.scope))], "=", 0, "not-equals")
        elif c.kind is Kind.EQUALS:
            model.add([(1, model.m(*c.scope))], "=", 1, "equals")
        elif c.kind in (Kind.AT_MOST, Kind.AT_LEAST):
            _encode_counting(model, c, ci, counting)
        else:
            encode_threshold(model, c.t_l, c.t_r, c.scope)
    return model


def m_only_model(k: int) -> PBModel:
    """M variables for k steps with transitivity only: its solutions are the patterns."""
    model = PBModel(k, 0, "patterns")
    for i, j in combinations(range(k), 2):
        model.m(i, j)
    add_transitivity(model, k)
    return model


# -- decoding -------------------------------------------------------------------

def decode_solution(model: PBModel, value) -> tuple[dict[int, int], Pattern | None]:
    """Plan from the x rows and, for pattern-based models, the pattern the M variables describe.

    ``value`` maps every variable id to 0/1.  Models without x variables
    decode to an empty plan.
    """
    missing = [v for v in range(1, model.num_vars + 1) if v not in value]
    if missing:
        raise PBError(f"assignment misses {len(missing)} variables (first x{missing[0]})")
    has_x = any(t.kind == "X" for t in model.tags)
    rows: dict[int, list[int]] = {s: [] for s in range(model.k)} if has_x else {}
    for vid, tag in enumerate(model.tags, start=1):
        if tag.kind == "X" and value[vid]:
            rows.setdefault(tag.a, []).append(tag.b)
    plan = {}
    for s, users in sorted(rows.items()):
        if len(users) != 1:
            raise PBError(f"step s{s} has {len(users)} users assigned; expected exactly one")
        plan[s] = users[0]
    m_vars = [(vid, t) for vid, t in enumerate(model.tags, start=1) if t.kind == "M"]
    if not m_vars and not model.formulation.startswith(("pbpb", "patterns")):
        return plan, None
    parent = list(range(model.k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for vid, t in m_vars:
        if value[vid]:
            parent[find(t.a)] = find(t.b)
    for vid, t in m_vars:
        if bool(value[vid]) != (find(t.a) == find(t.b)):
            raise PBError("same-user variables are not transitive")
    groups: dict[int, int] = {}
    for s in range(model.k):
        groups[find(s)] = groups.get(find(s), 0) | 1 << s
    return plan, Pattern(list(groups.values()))
