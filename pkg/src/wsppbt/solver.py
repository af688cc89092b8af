"""Pattern backtracking (PBT).

Depth-first search over patterns: each node picks an unassigned step and
either adds it to an existing block or opens a new block.  Children that
break a constraint are never generated; children whose block-user graph
has no full matching are pruned.  Two backends run the same search: the
compiled kernel in ``_pbt`` and the pure-Python ``SearchState`` below; they
visit identical trees.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

from .core import Instance, Kind, WSPError, eliminate_equals
from .matching import AssignmentState, BlockEdgeCache

try:  # compiled kernel; optional
    from . import _pbt as _kernel
except ImportError:  # pragma: no cover - depends on the build
    _kernel = None

SAT, UNSAT, TIMEOUT = "SAT", "UNSAT", "TIMEOUT"
AM, AL = 0, 1


class SolverConfigError(WSPError):
    pass


@dataclass(frozen=True)
class HeuristicWeights:
    a_ne: float = 3.0
    a_ne_le: float = 4.0
    a_ge_le: float = 2.0
    a0_le: float = 40.0
    a1_le: float = 4.0
    a2_le: float = 0.0

    def __post_init__(self):
        for name in ("a_ne", "a_ne_le", "a_ge_le", "a0_le", "a1_le", "a2_le"):
            v = getattr(self, name)
            if not (v >= 0 and v != float("inf")):
                raise SolverConfigError(f"weight {name}={v} must be finite and non-negative")


DEFAULT_WEIGHTS = HeuristicWeights()


@dataclass
class SearchStats:
    nodes: int = 0
    nodes_by_depth: list[int] = field(default_factory=list)
    max_depth: int = 0
    eligibility_prunes: int = 0
    authorisation_prunes: int = 0
    cache_clears: int = 0


@dataclass
class SolveResult:
    status: str
    plan: dict[int, int] | None
    stats: SearchStats
    wall_time: float
    backend: str

    @property
    def sat(self) -> bool:
        return self.status == SAT


def compiled_available() -> bool:
    return _kernel is not None


def default_backend() -> str:
    if os.environ.get("WSPPBT_PURE") or _kernel is None:
        return "python"
    return "compiled"


@dataclass
class Prepared:
    """Flat, index-based view of an instance for the search loops."""

    k: int
    n: int
    auth: list[int]
    ne_mask: list[int]
    kind: list[int]
    r: list[int]
    q: list[int]
    scope: list[int]
    step_cons: list[list[int]]
    static: list[float]


def prepare(inst: Instance, weights: HeuristicWeights = DEFAULT_WEIGHTS,
            ge_le_mode: str = "step") -> Prepared:
    if ge_le_mode not in ("step", "literal"):
        raise SolverConfigError(f"unknown ge_le_mode {ge_le_mode!r}")
    k = inst.k
    ne_mask = [0] * k
    kind, rr, qq, scope = [], [], [], []
    step_cons: list[list[int]] = [[] for _ in range(k)]
    ne_pairs = []
    for c in inst.constraints:
        if c.kind is Kind.NOT_EQUALS:
            a, b = c.scope
            ne_mask[a] |= 1 << b
            ne_mask[b] |= 1 << a
            ne_pairs.append(c.mask)
        elif c.kind in (Kind.AT_MOST, Kind.AT_LEAST):
            idx = len(kind)
            kind.append(AM if c.kind is Kind.AT_MOST else AL)
            rr.append(c.r)
            qq.append(len(c.scope))
            scope.append(c.mask)
            for s in c.scope:
                step_cons[s].append(idx)
        else:
            raise SolverConfigError(
                f"solver supports not-equals/at-most/at-least only; got {c.kind.value} "
                "(run eliminate_equals first)")

    am_scopes = [scope[i] for i in range(len(kind)) if kind[i] == AM]
    al_scopes = [scope[i] for i in range(len(kind)) if kind[i] == AL]
    n_ne = [0] * k
    n_ne_le = [0] * k
    for pm in ne_pairs:
        inside = any(pm & t == pm for t in am_scopes)
        for s in range(k):
            if pm >> s & 1:
                n_ne[s] += 1
                n_ne_le[s] += inside
    n_ge_le = [0] * k
    for t_le in am_scopes:
        for t_ge in al_scopes:
            inter = t_le & t_ge
            if bin(inter).count("1") >= 3:
                for s in range(k):
                    if ge_le_mode == "literal" or inter >> s & 1:
                        n_ge_le[s] += 1
    static = [weights.a_ne * n_ne[s] + weights.a_ne_le * n_ne_le[s] + weights.a_ge_le * n_ge_le[s]
              for s in range(k)]
    return Prepared(k, inst.n, list(inst.auth_masks), ne_mask, kind, rr, qq, scope,
                    step_cons, static)


def _popcount(x: int) -> int:
    return bin(x).count("1")


class SearchState:
    """Current pattern, per-constraint counters and the assignment graph."""

    def __init__(self, inst: Instance, weights: HeuristicWeights = DEFAULT_WEIGHTS,
                 ge_le_mode: str = "step", le_mode: str = "blocks",
                 prepared: Prepared | None = None):
        if le_mode not in ("blocks", "steps"):
            raise SolverConfigError(f"unknown le_mode {le_mode!r}")
        self.inst = inst
        self.weights = weights
        self.le_mode = le_mode
        self.p = prepared or prepare(inst, weights, ge_le_mode)
        self.blocks: list[int] = []
        self.block_of = [-1] * inst.k
        self.assigned_mask = 0
        m = len(self.p.kind)
        self.blockset = [0] * m
        self.assigned = [0] * m
        self.cache = BlockEdgeCache()
        self.graph = AssignmentState(inst, cap=inst.k, cache=self.cache)
        self._undo: list[tuple] = []

    # -- moves -----------------------------------------------------------
    def extensions(self, s: int) -> list[int]:
        """Moves that keep every constraint satisfiable: block index, or -1 for a new block."""
        p = self.p
        moves = []
        nb = len(self.blocks)
        for b in range(nb + 1):
            if b < nb and self.blocks[b] & p.ne_mask[s]:
                continue
            bit = 1 << b
            ok = True
            for c in p.step_cons[s]:
                distinct = _popcount(self.blockset[c] | bit)
                if p.kind[c] == AM:
                    if distinct > p.r[c]:
                        ok = False
                        break
                elif distinct + p.q[c] - self.assigned[c] - 1 < p.r[c]:
                    ok = False
                    break
            if ok:
                moves.append(b if b < nb else -1)
        return moves

    def apply(self, s: int, move: int) -> bool:
        """Apply a move; returns whether the extended pattern is still authorised."""
        b = len(self.blocks) if move < 0 else move
        saved = [(c, self.blockset[c]) for c in self.p.step_cons[s]]
        for c in self.p.step_cons[s]:
            self.blockset[c] |= 1 << b
            self.assigned[c] += 1
        self.block_of[s] = b
        self.assigned_mask |= 1 << s
        if move < 0:
            self.blocks.append(1 << s)
            ok = self.graph.push_new_block(s)
        else:
            self.blocks[b] |= 1 << s
            ok = self.graph.push_extend_block(b, s)
        self._undo.append((s, move, saved))
        return ok

    def undo(self) -> None:
        s, move, saved = self._undo.pop()
        self.graph.pop()
        for c, old in saved:
            self.blockset[c] = old
            self.assigned[c] -= 1
        b = self.block_of[s]
        self.block_of[s] = -1
        self.assigned_mask &= ~(1 << s)
        if move < 0:
            self.blocks.pop()
        else:
            self.blocks[b] &= ~(1 << s)

    # -- branching heuristic ---------------------------------------------
    def score(self, s: int) -> float:
        p, w = self.p, self.weights
        total = p.static[s]
        for c in p.step_cons[s]:
            if p.kind[c] != AM:
                continue
            used = _popcount(self.blockset[c]) if self.le_mode == "blocks" else self.assigned[c]
            i = p.r[c] - used
            if i == 0:
                total += w.a0_le
            elif i == 1:
                total += w.a1_le
            elif i == 2:
                total += w.a2_le
        return total

    def select_step(self, heuristic_on: bool = True) -> int:
        best, best_score = -1, -1.0
        for s in range(self.inst.k):
            if self.assigned_mask >> s & 1:
                continue
            if not heuristic_on:
                return s
            sc = self.score(s)
            if sc > best_score:
                best, best_score = s, sc
        if best < 0:
            raise WSPError("no unassigned step")
        return best

    def plan(self) -> dict[int, int]:
        return self.graph.plan()


class _Timeout(Exception):
    pass


def _search_python(inst, weights, heuristic_on, ge_le_mode, le_mode, node_limit, deadline):
    state = SearchState(inst, weights, ge_le_mode, le_mode)
    k = inst.k
    stats = SearchStats(nodes_by_depth=[0] * (k + 1))

    def rec(depth):
        stats.nodes += 1
        stats.nodes_by_depth[depth] += 1
        if depth > stats.max_depth:
            stats.max_depth = depth
        if node_limit and stats.nodes >= node_limit:
            raise _Timeout
        if deadline and stats.nodes % 1024 == 0 and time.perf_counter() > deadline:
            raise _Timeout
        if depth == k:
            return True
        s = state.select_step(heuristic_on)
        moves = state.extensions(s)
        stats.eligibility_prunes += len(state.blocks) + 1 - len(moves)
        for mv in moves:
            if state.apply(s, mv):
                if rec(depth + 1):
                    return True
            else:
                stats.authorisation_prunes += 1
            state.undo()
        return False

    try:
        found = rec(0)
        status = SAT if found else UNSAT
    except _Timeout:
        status, found = TIMEOUT, False
    stats.cache_clears = state.cache.clears
    return status, (state.plan() if found else None), stats


def solve(inst: Instance, weights: HeuristicWeights = DEFAULT_WEIGHTS,
          heuristic_on: bool = True, *, ge_le_mode: str = "step", le_mode: str = "blocks",
          backend: str | None = None, node_limit: int = 0,
          time_limit: float | None = None) -> SolveResult:
    """Find a complete valid plan or prove there is none.

    ``ge_le_mode`` / ``le_mode`` select readings of two heuristic terms
    (see README).  ``node_limit`` / ``time_limit`` (seconds) stop the search
    with status ``TIMEOUT``.
    """
    backend = backend or default_backend()
    if backend == "compiled" and _kernel is None:
        raise SolverConfigError("compiled kernel is not built")
    if le_mode not in ("blocks", "steps"):
        raise SolverConfigError(f"unknown le_mode {le_mode!r}")
    start = time.perf_counter()
    deadline = start + time_limit if time_limit else 0.0
    if backend == "python":
        status, plan, stats = _search_python(inst, weights, heuristic_on, ge_le_mode, le_mode,
                                             node_limit, deadline)
    elif backend == "compiled":
        p = prepare(inst, weights, ge_le_mode)
        out = _kernel.search(p.k, p.n, p.auth, p.ne_mask, p.kind, p.r, p.q, p.scope,
                             p.static, (weights.a0_le, weights.a1_le, weights.a2_le),
                             bool(heuristic_on), le_mode == "steps", int(node_limit),
                             float(time_limit or 0.0))
        code, plan_list, nodes, by_depth, max_depth, elig, auth, clears = out
        status = (UNSAT, SAT, TIMEOUT)[code]
        plan = dict(enumerate(plan_list)) if code == 1 else None
        stats = SearchStats(nodes, list(by_depth), max_depth, elig, auth, clears)
    else:
        raise SolverConfigError(f"unknown backend {backend!r}")
    return SolveResult(status, plan, stats, time.perf_counter() - start, backend)


@dataclass
class SearchReport:
    nodes: int
    nodes_by_depth: list[int]
    branching_by_depth: list[float]
    max_branching: float
    max_branching_depth: int


def search_stats(result: SolveResult) -> SearchReport:
    """Node counts per depth and the average branching factor nodes(d+1)/nodes(d)."""
    by = result.stats.nodes_by_depth
    branching = [by[d + 1] / by[d] if by[d] else 0.0 for d in range(len(by) - 1)]
    if branching:
        d = max(range(len(branching)), key=lambda i: (branching[i], -i))
        mx = branching[d]
    else:
        d, mx = 0, 0.0
    return SearchReport(result.stats.nodes, list(by), branching, mx, d)


def solve_instance(inst: Instance, **kw) -> SolveResult:
    """``solve`` for any instance: equals constraints are merged away first and the plan lifted back."""
    if not inst.of_kind(Kind.EQUALS):
        return solve(inst, **kw)
    red = eliminate_equals(inst)
    if red.trivially_unsat:
        return SolveResult(UNSAT, None, SearchStats(nodes_by_depth=[0]), 0.0,
                           kw.get("backend") or default_backend())
    res = solve(red.instance, **kw)
    if res.plan is not None:
        res.plan = red.lift_plan(res.plan)
    return res
