"""Pseudo-Boolean model: variable catalogue plus linear constraints in >= / = form."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..core import WSPError


class PBError(WSPError):
    pass


_TAG_FMT = {
    "X": "X(s{a},u{b})",
    "M": "M(s{a},s{b})",
    "Y": "Y(c{a},u{b})",
    "Z": "Z(c{a},u{b})",
    "T": "T(c{a},{b})",
    "V": "V({a})",
}
_TAG_RE = re.compile(r"^([XMYZTV])\((?:[scu])?(\d+)(?:,(?:[scu])?(\d+))?\)$")


@dataclass(frozen=True, order=True)
class Tag:
    """What a variable means.

    X(step, user): user performs step.  M(i, j), i < j: steps i and j share a
    user.  Y/Z(constraint, user): user appears in the scope of an at-most /
    at-least constraint.  T(constraint, position): the position opens a new
    block in the scope.  V(id): anonymous, from a foreign OPB file.
    """

    kind: str
    a: int
    b: int = 0

    def __str__(self):
        return _TAG_FMT[self.kind].format(a=self.a, b=self.b)

    @classmethod
    def parse(cls, text: str) -> "Tag":
        m = _TAG_RE.match(text.strip())
        if not m or (m.group(1) != "V" and m.group(3) is None):
            raise PBError(f"bad variable tag {text!r}")
        return cls(m.group(1), int(m.group(2)), int(m.group(3) or 0))


@dataclass(frozen=True)
class PBConstraint:
    terms: tuple[tuple[int, int], ...]  # (coefficient, variable id), ids ascending
    relation: str                       # ">=" or "="
    rhs: int
    note: str = ""

    def holds(self, value) -> bool:
        total = sum(c * value[v] for c, v in self.terms)
        return total >= self.rhs if self.relation == ">=" else total == self.rhs

    def key(self):
        return (self.terms, self.relation, self.rhs)


class PBModel:
    """Variable catalogue (dense 1-based ids) and constraint list.

    ``add`` normalises ``<=`` to ``>=``, merges repeated variables, drops zero
    coefficients and silently skips constraints that every assignment satisfies.
    """

    def __init__(self, k: int = 0, n: int = 0, formulation: str = ""):
        self.k = k
        self.n = n
        self.formulation = formulation
        self.tags: list[Tag] = []
        self.ids: dict[Tag, int] = {}
        self.constraints: list[PBConstraint] = []
        self.notes: list[str] = []

    @property
    def num_vars(self) -> int:
        return len(self.tags)

    def var(self, tag: Tag) -> int:
        vid = self.ids.get(tag)
        if vid is None:
            self.tags.append(tag)
            vid = len(self.tags)
            self.ids[tag] = vid
        return vid

    def lookup(self, tag: Tag) -> int | None:
        return self.ids.get(tag)

    def tag(self, vid: int) -> Tag:
        return self.tags[vid - 1]

    def m(self, i: int, j: int) -> int:
        """Id of the same-user variable for steps i != j (canonical i < j)."""
        if i == j:
            raise PBError("no variable for a step paired with itself")
        if i > j:
            i, j = j, i
        return self.var(Tag("M", i, j))

    def add(self, terms, relation: str, rhs: int, note: str = "") -> PBConstraint | None:
        if relation not in (">=", "<=", "="):
            raise PBError(f"unknown relation {relation!r}")
        merged: dict[int, int] = {}
        for c, v in terms:
            if v is None:
                continue
            if not 1 <= v <= len(self.tags):
                raise PBError(f"variable x{v} is not in the catalogue")
            merged[v] = merged.get(v, 0) + c
        if relation == "<=":
            merged = {v: -c for v, c in merged.items()}
            rhs = -rhs
            relation = ">="
        items = tuple(sorted(((c, v) for v, c in merged.items() if c != 0), key=lambda t: t[1]))
        lo = sum(min(c, 0) for c, _ in items)
        hi = sum(max(c, 0) for c, _ in items)
        if relation == ">=" and lo >= rhs:
            return None
        if relation == "=" and lo == hi == rhs:
            return None
        con = PBConstraint(items, relation, rhs, note)
        self.constraints.append(con)
        return con

    def add_constraint(self, con: PBConstraint) -> None:
        for _, v in con.terms:
            if not 1 <= v <= len(self.tags):
                raise PBError(f"variable x{v} is not in the catalogue")
        self.constraints.append(con)

    def satisfied_by(self, value) -> bool:
        return all(c.holds(value) for c in self.constraints)

    def same_as(self, other: "PBModel") -> bool:
        """Equal catalogues and constraint lists (notes ignored)."""
        return (self.tags == other.tags
                and [c.key() for c in self.constraints] == [c.key() for c in other.constraints])

    def vars_of_kind(self, kind: str) -> list[int]:
        return [i + 1 for i, t in enumerate(self.tags) if t.kind == kind]

    def __repr__(self):
        return f"PBModel({self.formulation or 'custom'}, vars={self.num_vars}, constraints={len(self.constraints)})"
