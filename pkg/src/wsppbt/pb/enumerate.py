"""Exhaustive solver for small PB models.

Depth-first over variables in a chosen order with bound propagation: a
partial assignment is abandoned once some constraint can no longer reach
its right-hand side.  Solutions are projected onto a chosen variable set;
the remaining variables only need one completion each.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .model import PBModel


class _Bounds:
    def __init__(self, model: PBModel):
        self.model = model
        n = model.num_vars
        self.occ: list[list[tuple[int, int]]] = [[] for _ in range(n + 1)]
        self.hi = []
        self.lo = []
        for ci, c in enumerate(model.constraints):
            self.hi.append(sum(max(a, 0) for a, _ in c.terms))
            self.lo.append(sum(min(a, 0) for a, _ in c.terms))
            for a, v in c.terms:
                self.occ[v].append((ci, a))
        self.value = [-1] * (n + 1)

    def feasible_all(self) -> bool:
        return all(self._ok(ci) for ci in range(len(self.model.constraints)))

    def _ok(self, ci: int) -> bool:
        c = self.model.constraints[ci]
        if self.hi[ci] < c.rhs:
            return False
        return c.relation == ">=" or self.lo[ci] <= c.rhs

    def assign(self, v: int, val: int) -> bool:
        self.value[v] = val
        ok = True
        for ci, a in self.occ[v]:
            self.hi[ci] += a * val - max(a, 0)
            self.lo[ci] += a * val - min(a, 0)
            if ok and not self._ok(ci):
                ok = False
        return ok

    def unassign(self, v: int) -> None:
        val = self.value[v]
        for ci, a in self.occ[v]:
            self.hi[ci] -= a * val - max(a, 0)
            self.lo[ci] -= a * val - min(a, 0)
        self.value[v] = -1


def solutions(model: PBModel, project: Iterable[int] | None = None) -> Iterator[dict[int, int]]:
    """Distinct satisfying assignments restricted to ``project`` (default: all variables).

    Each yielded dict is a full assignment of the model (one witness completion).
    """
    n = model.num_vars
    proj = list(range(1, n + 1)) if project is None else sorted(set(project))
    rest = [v for v in range(1, n + 1) if v not in set(proj)]
    order = proj + rest
    st = _Bounds(model)
    if not st.feasible_all():
        return

    def complete(i):
        if i == n:
            return {v: st.value[v] for v in range(1, n + 1)}
        v = order[i]
        for val in (0, 1):
            found = complete(i + 1) if st.assign(v, val) else None
            st.unassign(v)
            if found is not None:
                return found
        return None

    def rec(i):
        if i == len(proj):
            found = complete(i)
            if found is not None:
                yield found
            return
        v = order[i]
        for val in (0, 1):
            if st.assign(v, val):
                yield from rec(i + 1)
            st.unassign(v)

    yield from rec(0)


def solve_first(model: PBModel) -> dict[int, int] | None:
    return next(solutions(model, project=[]), None)
