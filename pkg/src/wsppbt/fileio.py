"""Plain-text instance and solution files.

Instance::

    wsp 1
    k 5
    n 6
    auth:
    u0: s2
    u1: s1
    constraints:
    bod s0 s1
    sod s1 s2
    atmost 3 s0 s1 s2 s3 s4

Step and user ids are zero-based.  ``#`` starts a comment.  The writer emits
users in ascending order and constraints in their stored order, so
``parse_instance(write_instance(i)) == i``.
"""

from __future__ import annotations

import re

from .core import Constraint, Instance, Kind, WSPError


class FormatError(WSPError):
    pass


_ID = re.compile(r"^([su])(\d+)$")


def _ident(tok: str, prefix: str, lineno: int) -> int:
    m = _ID.match(tok)
    if not m or m.group(1) != prefix:
        raise FormatError(f"line {lineno}: expected {prefix}<index>, got {tok!r}")
    return int(m.group(2))


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(f"line {lineno}: expected an integer, got {tok!r}") from None


def write_instance(inst: Instance) -> str:
    lines = ["wsp 1", f"k {inst.k}", f"n {inst.n}", "auth:"]
    for u, steps in enumerate(inst.auth):
        body = " ".join(f"s{s}" for s in sorted(steps))
        lines.append(f"u{u}: {body}".rstrip())
    lines.append("constraints:")
    lines += [str(c) for c in inst.constraints]
    return "\n".join(lines) + "\n"


def _constraint(toks: list[str], lineno: int) -> Constraint:
    word = toks[0]
    try:
        if word in ("sod", "bod"):
            if len(toks) != 3:
                raise FormatError(f"line {lineno}: {word} takes exactly two steps")
            a, b = (_ident(t, "s", lineno) for t in toks[1:])
            return Constraint.not_equals(a, b) if word == "sod" else Constraint.equals(a, b)
        if word in ("atmost", "atleast"):
            if len(toks) < 3:
                raise FormatError(f"line {lineno}: {word} needs a bound and a scope")
            r = _int(toks[1], lineno)
            scope = [_ident(t, "s", lineno) for t in toks[2:]]
            return Constraint.at_most(r, scope) if word == "atmost" else Constraint.at_least(r, scope)
        if word == "threshold":
            if len(toks) < 4:
                raise FormatError(f"line {lineno}: threshold needs two bounds and a scope")
            scope = [_ident(t, "s", lineno) for t in toks[3:]]
            return Constraint.threshold(_int(toks[1], lineno), _int(toks[2], lineno), scope)
    except FormatError:
        raise
    except WSPError as exc:
        raise FormatError(f"line {lineno}: {exc}") from None
    raise FormatError(f"line {lineno}: unknown constraint type {word!r}")


def parse_instance(text: str) -> Instance:
    k = n = None
    section = None
    auth: dict[int, frozenset[int]] = {}
    cons: list[Constraint] = []
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_header:
            if line.split() != ["wsp", "1"]:
                raise FormatError(f"line {lineno}: expected header 'wsp 1'")
            seen_header = True
            continue
        toks = line.split()
        if line == "auth:":
            section = "auth"
        elif line == "constraints:":
            section = "constraints"
        elif section is None and toks[0] in ("k", "n") and len(toks) == 2:
            val = _int(toks[1], lineno)
            if toks[0] == "k":
                k = val
            else:
                n = val
        elif section == "auth":
            head, _, rest = line.partition(":")
            if not _:
                raise FormatError(f"line {lineno}: expected 'u<index>: s<index> ...'")
            u = _ident(head.strip(), "u", lineno)
            if u in auth:
                raise FormatError(f"line {lineno}: user u{u} listed twice")
            auth[u] = frozenset(_ident(t, "s", lineno) for t in rest.split())
        elif section == "constraints":
            cons.append(_constraint(toks, lineno))
        else:
            raise FormatError(f"line {lineno}: unexpected {line!r}")
    if not seen_header:
        raise FormatError("empty file")
    if k is None or n is None:
        raise FormatError("missing 'k' or 'n' line")
    if set(auth) - set(range(n)):
        raise FormatError(f"user ids must lie in 0..{n - 1}")
    try:
        return Instance(k, n, tuple(auth.get(u, frozenset()) for u in range(n)), tuple(cons))
    except FormatError:
        raise
    except WSPError as exc:
        raise FormatError(str(exc)) from None


def read_instance(path: str) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def write_solution(status: str, plan: dict[int, int] | None = None) -> str:
    if status != "SAT":
        return f"{status}\n"
    return "SAT\n" + "".join(f"s{s} -> u{plan[s]}\n" for s in sorted(plan))


def parse_solution(text: str) -> tuple[str, dict[int, int] | None]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise FormatError("empty solution file")
    status = lines[0]
    if status in ("UNSAT", "TIMEOUT"):
        if len(lines) > 1:
            raise FormatError(f"{status} solution must be a single line")
        return status, None
    if status != "SAT":
        raise FormatError(f"unknown solution status {status!r}")
    plan = {}
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split("->")
        if len(parts) != 2:
            raise FormatError(f"line {i}: expected 's<i> -> u<j>'")
        s = _ident(parts[0].strip(), "s", i)
        if s in plan:
            raise FormatError(f"line {i}: step s{s} assigned twice")
        plan[s] = _ident(parts[1].strip(), "u", i)
    return "SAT", plan
