"""Annealed (first-moment) estimate of satisfiability for random instances.

For each block count b: the expected number of eligible patterns, the chance
that such a pattern is authorised, and from those the chance that a valid
pattern with b blocks exists.  Large counts are carried as ``LogNumber``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, fields
from functools import lru_cache
from importlib import resources
from math import comb

from .core import WSPError

SCOPE = 5
COUNT_R = 3
AUTH_FRACTION = 0.25


class AnalysisError(WSPError):
    pass


class NoTransitionError(AnalysisError):
    pass


class LogNumber:
    """Non-negative real stored as its natural log; exact zero has log -inf."""

    __slots__ = ("log",)

    def __init__(self, log: float):
        if math.isnan(log) or log == math.inf:
            raise AnalysisError(f"invalid log magnitude {log}")
        self.log = log

    @classmethod
    def of(cls, x) -> "LogNumber":
        if x < 0:
            raise AnalysisError("LogNumber holds non-negative values only")
        return cls(math.log(x) if x else -math.inf)

    @classmethod
    def zero(cls) -> "LogNumber":
        return cls(-math.inf)

    @property
    def is_zero(self) -> bool:
        return self.log == -math.inf

    def __mul__(self, other):
        other = other if isinstance(other, LogNumber) else LogNumber.of(other)
        if self.is_zero or other.is_zero:
            return LogNumber.zero()
        return LogNumber(self.log + other.log)

    __rmul__ = __mul__

    def __add__(self, other):
        other = other if isinstance(other, LogNumber) else LogNumber.of(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        hi, lo = max(self.log, other.log), min(self.log, other.log)
        return LogNumber(hi + math.log1p(math.exp(lo - hi)))

    __radd__ = __add__

    def __pow__(self, p: float):
        if self.is_zero:
            return LogNumber(0.0) if p == 0 else LogNumber.zero()
        return LogNumber(self.log * p)

    def __float__(self):
        return math.exp(self.log) if self.log < 709.7 else math.inf

    def __lt__(self, other):
        other = other if isinstance(other, LogNumber) else LogNumber.of(other)
        return self.log < other.log

    def __eq__(self, other):
        other = other if isinstance(other, LogNumber) else LogNumber.of(other)
        return self.log == other.log

    def __hash__(self):
        return hash(self.log)

    def log10(self) -> float:
        return self.log / math.log(10)

    def sci(self, digits: int = 2) -> str:
        """Scientific notation without overflowing, e.g. '2.8e-02'."""
        if self.is_zero:
            return f"{0:.{digits - 1}e}"
        exp10 = math.floor(self.log10())
        mant = 10 ** (self.log10() - exp10)
        if round(mant, digits - 1) >= 10:
            mant, exp10 = mant / 10, exp10 + 1
        return f"{mant:.{digits - 1}f}e{exp10:+03d}"

    def __repr__(self):
        return f"LogNumber({self.sci(4)})"


@lru_cache(maxsize=None)
def stirling2(q: int, r: int) -> int:
    """Partitions of a q-set into r non-empty blocks (exact)."""
    if q < 0 or r < 0:
        raise AnalysisError("stirling2 needs non-negative arguments")
    if q == r:
        return 1
    if r == 0 or r > q:
        return 0
    row = [1] + [0] * r  # S(0, .)
    for i in range(1, q + 1):
        for j in range(min(i, r), 0, -1):
            row[j] = j * row[j] + row[j - 1]
        row[0] = 0
    return row[r]


def falling(n: int, b: int) -> int:
    """n (n-1) ... (n-b+1); zero when b > n."""
    out = 1
    for i in range(b):
        out *= n - i
    return out


def p_block_hit(q: int, r: int, b: int) -> float:
    """Chance that q fixed steps meet exactly r blocks under a uniform map to b blocks."""
    if q < 1 or r < 1 or b < 1:
        raise AnalysisError("p_block_hit needs q, r, b >= 1")
    if r > min(q, b):
        return 0.0
    return stirling2(q, r) * falling(b, r) / b ** q


def constraint_factors(b: int) -> tuple[float, float, float]:
    """Per-constraint satisfaction chances (not-equals, at-most-3, at-least-3) for b blocks."""
    p_ne = 1.0 - 1.0 / b
    p_le = sum(p_block_hit(SCOPE, r, b) for r in range(1, COUNT_R + 1))
    p_ge = 1.0 - sum(p_block_hit(SCOPE, r, b) for r in range(1, COUNT_R))
    return p_ne, min(p_le, 1.0), max(p_ge, 0.0)


def _pow(base: float, p: float) -> LogNumber:
    if p == 0:
        return LogNumber(0.0)
    if base <= 0:
        return LogNumber.zero()
    return LogNumber(p * math.log(base))


def expected_eligible_patterns(k: int, e: float, gamma: float, b: int,
                               gamma_le: float | None = None,
                               gamma_ge: float | None = None) -> LogNumber:
    """Expected number of b-block patterns satisfying every constraint.

    ``gamma_le`` / ``gamma_ge`` override the number of at-most / at-least
    constraints separately (both default to ``gamma``).
    """
    if not 1 <= b <= k:
        raise AnalysisError(f"need 1 <= b <= k, got b={b}, k={k}")
    p_ne, p_le, p_ge = constraint_factors(b)
    g_le = gamma if gamma_le is None else gamma_le
    g_ge = gamma if gamma_ge is None else gamma_ge
    return LogNumber.of(stirling2(k, b)) * _pow(p_ne, e) * _pow(p_le, g_le) * _pow(p_ge, g_ge)


def p_auth_pattern(k: int, n: int, b: int, auth_fraction: float = AUTH_FRACTION) -> float:
    """Chance that every block of a b-block pattern has some authorised user (blocks of size k/b)."""
    if b < 1:
        raise AnalysisError("b must be at least 1")
    return math.exp(_log_p_auth_pattern(k, n, b, auth_fraction))


def _log_p_auth_pattern(k, n, b, auth_fraction):
    per_user = auth_fraction ** (k / b)
    if n == 0 or per_user == 0:
        return -math.inf
    if per_user >= 1:
        return 0.0
    some_user = -math.expm1(n * math.log1p(-per_user))
    return b * math.log(some_user) if some_user > 0 else -math.inf


def auth_plans_per_pattern(k: int, n: int, b: int, auth_fraction: float = AUTH_FRACTION) -> LogNumber:
    """Expected authorised injective plans realising one b-block pattern."""
    return LogNumber.of(falling(n, b)) * _pow(auth_fraction, k)


def _p_sat_block(n_elig: LogNumber, log_pa: float) -> float:
    if n_elig.is_zero or log_pa == -math.inf:
        return 0.0
    if n_elig.log < 0:
        return min(1.0, math.exp(n_elig.log + log_pa))
    pa = math.exp(log_pa)
    if pa >= 1.0:
        return 1.0
    n_val = float(n_elig)
    return -math.expm1(n_val * math.log1p(-pa)) if n_val != math.inf else 1.0


@dataclass
class AnnealedRow:
    b: int
    p_ne: float
    p_le: float
    p_ge: float
    n_elig: LogNumber
    auth_plans: LogNumber
    n_valid_plans: LogNumber
    p_auth_pat: float
    p_sat: float


@dataclass
class AnnealedReport:
    k: int
    n: int
    e: float
    gamma: float
    rows: list[AnnealedRow]
    n_elig: LogNumber
    n_valid_plans: LogNumber
    p_sat: float

    def row(self, b: int) -> AnnealedRow:
        for r in self.rows:
            if r.b == b:
                return r
        raise KeyError(b)

    def to_csv(self, digits: int = 2) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f.name for f in fields(AnnealedRow)])
        fmt = lambda x: x.sci(digits) if isinstance(x, LogNumber) else LogNumber.of(x).sci(digits)  # noqa: E731
        for r in self.rows:
            w.writerow([r.b] + [fmt(getattr(r, f.name)) for f in fields(AnnealedRow)[1:]])
        w.writerow(["total", "", "", "", fmt(self.n_elig), "", fmt(self.n_valid_plans), "", fmt(self.p_sat)])
        return buf.getvalue()


def annealed_report(k: int, n: int, e: float, gamma: float, *,
                    gamma_le: float | None = None, gamma_ge: float | None = None,
                    auth_fraction: float = AUTH_FRACTION) -> AnnealedReport:
    """Per-b table.  Rows start at b=3 when counting constraints are present
    (fewer blocks cannot satisfy an at-least-3 constraint) and at b=1 otherwise."""
    if k < 1 or n < 0 or e < 0 or gamma < 0:
        raise AnalysisError("need k >= 1 and non-negative n, e, gamma")
    g_ge = gamma if gamma_ge is None else gamma_ge
    b_min = COUNT_R if g_ge > 0 else 1
    rows = []
    tot_elig, tot_valid = LogNumber.zero(), LogNumber.zero()
    log_unsat = 0.0
    for b in range(b_min, k + 1):
        p_ne, p_le, p_ge = constraint_factors(b)
        ne = expected_eligible_patterns(k, e, gamma, b, gamma_le, gamma_ge)
        plans = auth_plans_per_pattern(k, n, b, auth_fraction)
        valid = ne * plans
        log_pa = _log_p_auth_pattern(k, n, b, auth_fraction)
        ps = _p_sat_block(ne, log_pa)
        rows.append(AnnealedRow(b, p_ne, p_le, p_ge, ne, plans, valid,
                                math.exp(log_pa), ps))
        tot_elig += ne
        tot_valid += valid
        log_unsat = log_unsat + math.log1p(-ps) if ps < 1 else -math.inf
    total = -math.expm1(log_unsat) if log_unsat != -math.inf else 1.0
    return AnnealedReport(k, n, e, gamma, rows, tot_elig, tot_valid, total)


def expected_valid_plans(k: int, n: int, e: float, gamma: float, **kw) -> LogNumber:
    return annealed_report(k, n, e, gamma, **kw).n_valid_plans


def p_sat(k: int, n: int, e: float, gamma: float, **kw) -> float:
    return annealed_report(k, n, e, gamma, **kw).p_sat


def _bisect(f, lo: float, hi: float, tol_p: float, tol_x: float) -> float:
    """Root of the decreasing function f - 0.5 on [lo, hi]."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = f(mid)
        if abs(v - 0.5) < tol_p or hi - lo < tol_x:
            return mid
        if v > 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def predict_e50(k: int, n: int, gamma: float, **kw) -> float:
    """Real-valued e where the estimated satisfiability chance crosses 1/2."""
    top = comb(k, 2)
    f = lambda e: p_sat(k, n, e, gamma, **kw)  # noqa: E731
    if f(0.0) <= 0.5 or f(float(top)) >= 0.5:
        raise NoTransitionError(f"estimated p_sat does not cross 1/2 for e in [0, {top}]")
    return _bisect(f, 0.0, float(top), 1e-6, 1e-12)


def stored_e50(k: int, n: int | None = None, gamma: int | None = None,
               auth_sizes: str = "half") -> int | None:
    """Empirical e50 from the bundled table (measured with this package's harness)."""
    n = 10 * k if n is None else n
    gamma = k if gamma is None else gamma
    for row in load_e50_table():
        if (row["k"], row["n"], row["gamma"], row["auth_sizes"]) == (k, n, gamma, auth_sizes):
            return row["e50"]
    return None


@lru_cache(maxsize=1)
def _e50_rows() -> tuple:
    try:
        text = resources.files("wsppbt.data").joinpath("e50.csv").read_text()
    except (FileNotFoundError, ModuleNotFoundError):
        return ()
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {k: int(v) for k, v in rec.items() if k in ("k", "n", "gamma", "e50", "samples", "seed")}
        row["auth_sizes"] = rec.get("auth_sizes") or "half"
        out.append(row)
    return tuple(out)


def load_e50_table() -> list[dict]:
    return [dict(r) for r in _e50_rows()]


def predict_beta(k: int, e50: float | None = None, n: int | None = None,
                 auth_sizes: str = "half", **kw) -> float:
    """beta solving p_sat(k, n, beta*e50, beta*k) = 1/2 on (0, 3]; n defaults to 10k.

    Without an explicit e50, the bundled empirical table is consulted.
    """
    n = 10 * k if n is None else n
    if e50 is None:
        e50 = stored_e50(k, n, k, auth_sizes)
        if e50 is None:
            raise AnalysisError(f"no empirical e50 for k={k}, n={n}, gamma={k}; measure it first")
    if e50 <= 0:
        raise AnalysisError("e50 must be positive")
    f = lambda beta: p_sat(k, n, beta * e50, beta * k, **kw)  # noqa: E731
    lo, hi = 1e-9, 3.0
    if f(lo) <= 0.5 or f(hi) >= 0.5:
        raise NoTransitionError(f"estimated p_sat does not cross 1/2 for beta in (0, 3] at k={k}")
    return _bisect(f, lo, hi, 0.0, 1e-6)
