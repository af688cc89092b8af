"""OPB text format: writer, parser and solver-output reader."""

from __future__ import annotations

import re

from .model import PBConstraint, PBError, PBModel, Tag

_HEADER_RE = re.compile(r"^\*\s*#variable=\s*(\d+)\s+#constraint=\s*(\d+)")
_MAP_RE = re.compile(r"^\*\s*x(\d+)\s*=\s*(\S+)\s*$")
_META_RE = re.compile(r"^\*\s*wsp\s+k=(\d+)\s+n=(\d+)\s+formulation=(\S*)\s*$")
_NOTE_RE = re.compile(r"^\*\s*note:\s*(.*)$")
_TERM_RE = re.compile(r"^([+-]?\d+)$")


def emit_opb(model: PBModel) -> str:
    lines = [f"* #variable= {model.num_vars} #constraint= {len(model.constraints)}",
             f"* wsp k={model.k} n={model.n} formulation={model.formulation}"]
    lines += [f"* note: {note}" for note in model.notes]
    lines += [f"* x{i} = {tag}" for i, tag in enumerate(model.tags, start=1)]
    for c in model.constraints:
        terms = " ".join(f"{coef:+d} x{v}" for coef, v in c.terms)
        lines.append(f"{terms} {c.relation} {c.rhs} ;".lstrip())
    return "\n".join(lines) + "\n"


def parse_opb(text: str) -> PBModel:
    """Parse OPB text.  Variable tags come from ``* xN = TAG`` comments when present."""
    model = PBModel()
    declared = None
    tag_of: dict[int, Tag] = {}
    body: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("*"):
            if m := _HEADER_RE.match(line):
                declared = (int(m.group(1)), int(m.group(2)))
            elif m := _META_RE.match(line):
                model.k, model.n, model.formulation = int(m.group(1)), int(m.group(2)), m.group(3)
            elif m := _NOTE_RE.match(line):
                model.notes.append(m.group(1))
            elif m := _MAP_RE.match(line):
                tag_of[int(m.group(1))] = Tag.parse(m.group(2))
            continue
        body.append((lineno, line))
    if declared is None:
        raise PBError("missing '* #variable= V #constraint= C' header")
    nvars, ncons = declared
    for vid in range(1, nvars + 1):
        tag = tag_of.get(vid, Tag("V", vid))
        if model.var(tag) != vid:
            raise PBError(f"duplicate tag {tag} in variable map")
    for lineno, line in body:
        if not line.endswith(";"):
            raise PBError(f"line {lineno}: constraint must end with ';'")
        toks = line[:-1].split()
        rel_at = next((i for i, t in enumerate(toks) if t in (">=", "=", "<=")), None)
        if rel_at is None or rel_at != len(toks) - 2:
            raise PBError(f"line {lineno}: expected '<terms> >=|= <int> ;'")
        lhs, rel, rhs = toks[:rel_at], toks[rel_at], toks[-1]
        if len(lhs) % 2:
            raise PBError(f"line {lineno}: terms must be coefficient/variable pairs")
        terms = []
        try:
            for i in range(0, len(lhs), 2):
                if not _TERM_RE.match(lhs[i]) or not lhs[i + 1].startswith("x"):
                    raise ValueError
                terms.append((int(lhs[i]), int(lhs[i + 1][1:])))
            rhs_val = int(rhs)
        except ValueError:
            raise PBError(f"line {lineno}: malformed term or number") from None
        for _, v in terms:
            if not 1 <= v <= nvars:
                raise PBError(f"line {lineno}: x{v} outside the declared {nvars} variables")
        if rel == "<=":
            terms = [(-c, v) for c, v in terms]
            rhs_val, rel = -rhs_val, ">="
        model.add_constraint(PBConstraint(tuple(terms), rel, rhs_val))
    if len(model.constraints) != ncons:
        raise PBError(f"header declares {ncons} constraints, found {len(model.constraints)}")
    return model


def read_solution(text: str) -> tuple[str, dict[int, int]]:
    """Read solver output: ``s`` status line and ``v`` literal lines.

    Returns (status, assignment) with status one of SAT, UNSAT, UNKNOWN.
    """
    status = "UNKNOWN"
    value: dict[int, int] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("s "):
            word = line[2:].strip().upper()
            if word.startswith("UNSAT"):
                status = "UNSAT"
            elif word.startswith(("SAT", "OPTIMUM")):
                status = "SAT"
            elif word.startswith("UNKNOWN"):
                status = "UNKNOWN"
            else:
                raise PBError(f"unrecognised status line {line!r}")
        elif line.startswith("v ") or line == "v":
            for tok in line[1:].split():
                neg = tok.startswith("-")
                name = tok.lstrip("+-")
                if not name.startswith("x") or not name[1:].isdigit():
                    raise PBError(f"bad literal {tok!r}")
                value[int(name[1:])] = 0 if neg else 1
    if value and status == "UNKNOWN":
        status = "SAT"
    return status, value


def write_solution(value: dict[int, int], status: str = "SAT") -> str:
    if status != "SAT":
        return f"s {'UNSATISFIABLE' if status == 'UNSAT' else 'UNKNOWN'}\n"
    lits = [("" if value[v] else "-") + f"x{v}" for v in sorted(value)]
    lines = ["s SATISFIABLE"]
    for i in range(0, len(lits), 20):
        lines.append("v " + " ".join(lits[i:i + 20]))
    return "\n".join(lines) + "\n"
