"""Phase-transition experiments: e50 search, slices, beta sweeps, forced pairs.

Instance seeds come from ``instance_seed(master, k, n, gamma, rep)``.  The
not-equals count e is deliberately not part of the seed: probes at different
e reuse the same authorisations and counting constraints, and the smaller
not-equals set is a prefix of the larger one, so satisfiability is monotone
in e replicate by replicate.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from .analysis import stored_e50
from .core import Constraint, Instance, Kind, WSPError, eliminate_equals
from .generator import GenConfig, generate
from .rng import derive_seed
from .solver import SAT, TIMEOUT, UNSAT, solve

PERCENTILES = (25, 35, 50, 65, 75)
WORKERS_ENV = "WSPPBT_WORKERS"


class ExperimentError(WSPError):
    pass


class NoTransitionError(ExperimentError):
    pass


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def instance_seed(master: int, k: int, n: int, gamma: int, rep: int) -> int:
    return derive_seed(master, k, n, gamma, rep)


def percentile(xs: Sequence[float], p: float) -> float:
    """Linear interpolation between closest ranks (numpy's default 'linear' method)."""
    if len(xs) == 0:
        raise ExperimentError("percentile of an empty sample")
    if not 0 <= p <= 100:
        raise ExperimentError(f"percentile p={p} outside [0, 100]")
    return float(np.percentile(np.asarray(xs, dtype=float), p))


# -- running batches ------------------------------------------------------------

@dataclass(frozen=True)
class Task:
    k: int
    n: int
    e: int
    gamma: int
    seed: int
    heuristic: bool = True
    time_limit: float = 0.0
    auth_sizes: str = "half"


@dataclass(frozen=True)
class Outcome:
    status: str
    nodes: int
    wall: float


def run_task(t: Task) -> Outcome:
    inst = generate(GenConfig(t.k, t.n, t.e, t.gamma, t.seed, t.auth_sizes))
    res = solve(inst, heuristic_on=t.heuristic, time_limit=t.time_limit or None)
    return Outcome(res.status, res.stats.nodes, res.wall_time)


def run_tasks(tasks: Sequence[Task], workers: int | None = None) -> list[Outcome]:
    """Solve a batch; results come back in task order whatever the worker count."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


# -- e50 -------------------------------------------------------------------------

@dataclass
class E50Result:
    k: int
    n: int
    gamma: int
    e50: int
    samples: int
    curve: list[tuple[int, float, int]]  # (e, sat fraction, samples), ascending e
    timeouts: int = 0

    def fraction(self, e: int) -> float:
        for ee, f, _ in self.curve:
            if ee == e:
                return f
        raise KeyError(e)


def find_e50(k: int, n: int, gamma: int, samples: int = 100, seed: int = 0, *,
             workers: int | None = None, time_limit: float = 0.0, auth_sizes: str = "half",
             progress: Callable[[int, float], None] | None = None) -> E50Result:
    """Empirical not-equals count at which half the instances are satisfiable.

    Coarse upward scan in steps of max(1, k(k-1)/40), then integer bisection
    between the last probe with fraction >= 1/2 and the first below it.  The
    estimate is the probed e whose fraction is nearest 1/2 (ties: smaller e).
    Timed-out solves count as unsatisfiable and are tallied in ``timeouts``.
    """
    if samples < 20:
        raise ExperimentError("find_e50 needs at least 20 samples per probe")
    top = math.comb(k, 2)
    step = max(1, k * (k - 1) // 40)
    probes: dict[int, float] = {}
    timeouts = 0

    def probe(e: int) -> float:
        nonlocal timeouts
        if e not in probes:
            tasks = [Task(k, n, e, gamma, instance_seed(seed, k, n, gamma, r), True, time_limit,
                          auth_sizes) for r in range(samples)]
            out = run_tasks(tasks, workers)
            timeouts += sum(o.status == TIMEOUT for o in out)
            probes[e] = sum(o.status == SAT for o in out) / samples
            if progress:
                progress(e, probes[e])
        return probes[e]

    if probe(0) == 0.0:
        raise NoTransitionError(f"no satisfiable instance even with e=0 (k={k}, n={n}, gamma={gamma})")
    lo, hi = None, None
    e = 0
    while True:
        f = probe(e)
        if f >= 0.5:
            lo = e
        else:
            hi = e
            break
        if e == top:
            break
        e = min(top, e + step)
    if hi is None:
        if probes[top] == 1.0:
            raise NoTransitionError(f"every instance satisfiable up to e={top}")
    else:
        while lo is not None and hi - lo > 1:
            mid = (lo + hi) // 2
            if probe(mid) >= 0.5:
                lo = mid
            else:
                hi = mid
    e50 = min(probes, key=lambda x: (abs(probes[x] - 0.5), x))
    curve = [(x, probes[x], samples) for x in sorted(probes)]
    return E50Result(k, n, gamma, e50, samples, curve, timeouts)


def e50_curve_csv(res: E50Result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "n", "gamma", "e", "sat_fraction", "samples"])
    for e, f, s in res.curve:
        w.writerow([res.k, res.n, res.gamma, e, f"{f:.4f}", s])
    return buf.getvalue()


# -- slices ----------------------------------------------------------------------

@dataclass
class SliceRow:
    k: int
    n: int
    e: int
    gamma: int
    samples: int
    sat: int
    unsat: int
    timeouts: int
    time_pct: dict[str, dict[int, float]] = field(default_factory=dict)   # verdict -> p -> seconds
    node_pct: dict[str, dict[int, float]] = field(default_factory=dict)   # verdict -> p -> nodes
    e50: int | None = None
    beta: float | None = None

    @property
    def sat_fraction(self) -> float:
        return self.sat / self.samples if self.samples else 0.0


def _summarise(k, n, e, gamma, outcomes: list[Outcome], **extra) -> SliceRow:
    row = SliceRow(k, n, e, gamma, len(outcomes),
                   sum(o.status == SAT for o in outcomes),
                   sum(o.status == UNSAT for o in outcomes),
                   sum(o.status == TIMEOUT for o in outcomes), **extra)
    groups = {"all": outcomes, "sat": [o for o in outcomes if o.status == SAT],
              "unsat": [o for o in outcomes if o.status == UNSAT]}
    for name, group in groups.items():
        if group:
            row.time_pct[name] = {p: percentile([o.wall for o in group], p) for p in PERCENTILES}
            row.node_pct[name] = {p: percentile([o.nodes for o in group], p) for p in PERCENTILES}
    return row


def _e50_for(k: int, n: int, gamma: int, e50: dict | Callable | None, samples: int, seed: int,
             workers, auth_sizes: str = "half") -> int:
    if callable(e50):
        return int(e50(k))
    if isinstance(e50, dict) and k in e50:
        return int(e50[k])
    cached = stored_e50(k, n, gamma, auth_sizes)
    if cached is not None:
        return cached
    return find_e50(k, n, gamma, max(20, samples), seed, workers=workers, auth_sizes=auth_sizes).e50


def run_slice_point(k: int, n: int, e: int, gamma: int, samples: int, seed: int, *,
                    heuristic: bool = True, workers: int | None = None,
                    time_limit: float = 0.0, auth_sizes: str = "half", **extra) -> SliceRow:
    tasks = [Task(k, n, e, gamma, instance_seed(seed, k, n, gamma, r), heuristic, time_limit,
                  auth_sizes) for r in range(samples)]
    return _summarise(k, n, e, gamma, run_tasks(tasks, workers), **extra)


def run_vary_k_slice(ks: Iterable[int], n_of_k: Callable[[int], int] = lambda k: 10 * k,
                     samples: int = 100, seed: int = 0, *, e50: dict | Callable | None = None,
                     workers: int | None = None, time_limit: float = 0.0,
                     heuristic: bool = True, auth_sizes: str = "half") -> list[SliceRow]:
    """WIG(k, n(k), e50, k) for each k.  e50 comes from ``e50`` or the bundled table,
    and is measured when neither has it."""
    rows = []
    for k in ks:
        n = n_of_k(k)
        e = _e50_for(k, n, k, e50, samples, seed, workers, auth_sizes)
        rows.append(run_slice_point(k, n, e, k, samples, seed, heuristic=heuristic,
                                    workers=workers, time_limit=time_limit,
                                    auth_sizes=auth_sizes, e50=e))
    return rows


def run_fixed_k_slice(k: int, ns: Iterable[int], samples: int = 50, seed: int = 0, *,
                      e50_samples: int = 100, workers: int | None = None,
                      time_limit: float = 0.0, auth_sizes: str = "half") -> list[SliceRow]:
    """WIG(k, n, e50(k, n, k), k) for each n; e50 is re-measured per n."""
    ns = list(ns)
    for n in ns:
        if n < k:
            raise ExperimentError(f"n={n} < k={k}: at least as many users as steps are assumed")
    rows = []
    for n in ns:
        e = find_e50(k, n, k, e50_samples, seed, workers=workers, time_limit=time_limit,
                     auth_sizes=auth_sizes).e50
        rows.append(run_slice_point(k, n, e, k, samples, seed, workers=workers,
                                    time_limit=time_limit, auth_sizes=auth_sizes, e50=e))
    return rows


def run_beta_sweep(k: int, betas: Iterable[float], samples: int = 100, seed: int = 0, *,
                   e50: int | None = None, n: int | None = None, heuristic: bool = True,
                   workers: int | None = None, time_limit: float = 0.0,
                   auth_sizes: str = "half") -> list[SliceRow]:
    """WIG(k, n, round(beta*e50), round(beta*k)) for each beta; n defaults to 10k."""
    n = 10 * k if n is None else n
    if e50 is None:
        e50 = _e50_for(k, n, k, None, samples, seed, workers, auth_sizes)
    rows = []
    for beta in betas:
        e = min(math.comb(k, 2), int(round(beta * e50)))
        g = min(math.comb(k, 5), int(round(beta * k)))
        rows.append(run_slice_point(k, n, e, g, samples, seed, heuristic=heuristic,
                                    workers=workers, time_limit=time_limit,
                                    auth_sizes=auth_sizes, e50=e50, beta=beta))
    return rows


SLICE_HEADER = (["k", "n", "e", "gamma", "beta", "e50", "samples", "sat", "unsat", "timeouts"]
                + [f"{v}_nodes_p{p}" for v in ("sat", "unsat") for p in PERCENTILES]
                + [f"{v}_time_p{p}" for v in ("sat", "unsat") for p in PERCENTILES])


def slice_csv(rows: Sequence[SliceRow], timings: bool = True) -> str:
    """One line per row.  With ``timings=False`` the wall-time columns are left
    empty, which makes the output byte-identical across runs."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SLICE_HEADER)
    for r in sorted(rows, key=lambda r: (r.k, r.n, r.beta or 0.0, r.e)):
        out = [r.k, r.n, r.e, r.gamma, "" if r.beta is None else f"{r.beta:g}",
               "" if r.e50 is None else r.e50, r.samples, r.sat, r.unsat, r.timeouts]
        for v in ("sat", "unsat"):
            out += [f"{r.node_pct[v][p]:g}" if v in r.node_pct else "" for p in PERCENTILES]
        for v in ("sat", "unsat"):
            out += [f"{r.time_pct[v][p]:.6f}" if timings and v in r.time_pct else "" for p in PERCENTILES]
        w.writerow(out)
    return buf.getvalue()


def plot_data_csv(rows: Sequence[SliceRow], x: str = "k", verdict: str = "unsat",
                  measure: str = "nodes") -> str:
    """x, y, lo, hi with y the median and [lo, hi] the 35-65 percentile band."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "lo", "hi"])
    for r in rows:
        pct = (r.node_pct if measure == "nodes" else r.time_pct).get(verdict)
        if not pct:
            continue
        xv = r.beta if x == "beta" else getattr(r, x)
        w.writerow([f"{xv:g}", f"{pct[50]:g}", f"{pct[35]:g}", f"{pct[65]:g}"])
    return buf.getvalue()


@dataclass
class ScalingFit:
    slope_k: float
    r2_k: float
    slope_klogk: float
    r2_klogk: float
    points: list[tuple[int, float]]


def _fit(x, y):
    slope, icept = np.polyfit(x, y, 1)
    pred = slope * np.asarray(x) + icept
    ss_res = float(np.sum((np.asarray(y) - pred) ** 2))
    ss_tot = float(np.sum((np.asarray(y) - np.mean(y)) ** 2))
    return float(slope), (1.0 - ss_res / ss_tot) if ss_tot > 0 else 1.0


def fit_scaling(rows: Sequence[SliceRow], verdict: str = "unsat", measure: str = "nodes") -> ScalingFit:
    """Least squares of log2(median) against k and against k*log2(k)."""
    pts = []
    for r in rows:
        pct = (r.node_pct if measure == "nodes" else r.time_pct).get(verdict)
        if pct and pct[50] > 0:
            pts.append((r.k, math.log2(pct[50])))
    if len(pts) < 3:
        raise ExperimentError("need at least three slice points with data to fit")
    ks = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    s1, r1 = _fit(ks, ys)
    s2, r2 = _fit([k * math.log2(k) for k in ks], ys)
    return ScalingFit(s1, r1, s2, r2, pts)


# -- forced pairs ------------------------------------------------------------------

@dataclass
class ForcedReport:
    k: int
    forced_equal: list[tuple[int, int]]
    forced_unequal: list[tuple[int, int]]
    free: list[tuple[int, int]]
    explicit: list[tuple[int, int]]
    instance_id: str = ""
    beta: float | None = None

    @property
    def counts(self) -> dict[str, int]:
        return {"forced_equal": len(self.forced_equal), "forced_unequal": len(self.forced_unequal),
                "free": len(self.free), "explicit": len(self.explicit)}


def _sat_with(inst: Instance, extra: Constraint, heuristic: bool) -> bool:
    inst2 = Instance(inst.k, inst.n, inst.auth, inst.constraints + (extra,))
    if extra.kind is Kind.EQUALS or inst2.of_kind(Kind.EQUALS):
        red = eliminate_equals(inst2)
        if red.trivially_unsat:
            return False
        inst2 = red.instance
    return solve(inst2, heuristic_on=heuristic).sat


def forced_m_probe(inst: Instance, *, heuristic: bool = True, use_witness: bool = True,
                   instance_id: str = "", beta: float | None = None) -> ForcedReport:
    """Classify every step pair as forced-equal, forced-unequal or free.

    A pair is forced-unequal when adding equals(i, j) makes the instance
    unsatisfiable, and forced-equal when adding not-equals(i, j) does.  Pairs
    with an explicit not-equals constraint are reported separately.  With
    ``use_witness`` the base solution settles one of the two questions for
    free (the pair is realised one way in it), saving one solve per pair.
    """
    base_inst = inst
    if inst.of_kind(Kind.EQUALS):
        red = eliminate_equals(inst)
        if red.trivially_unsat:
            raise ExperimentError("forced-pair probe is undefined on an unsatisfiable instance")
        base = solve(red.instance, heuristic_on=heuristic)
        plan = red.lift_plan(base.plan) if base.plan else None
    else:
        base = solve(inst, heuristic_on=heuristic)
        plan = base.plan
    if not base.sat:
        raise ExperimentError("forced-pair probe is undefined on an unsatisfiable instance")
    explicit = {c.scope for c in inst.of_kind(Kind.NOT_EQUALS)}
    eq, neq, free, expl = [], [], [], []
    for i, j in combinations(range(inst.k), 2):
        if (i, j) in explicit:
            expl.append((i, j))
            continue
        same = plan[i] == plan[j]
        can_equal = True if (use_witness and same) else _sat_with(base_inst, Constraint.equals(i, j), heuristic)
        can_differ = True if (use_witness and not same) else _sat_with(base_inst, Constraint.not_equals(i, j), heuristic)
        if not can_equal:
            neq.append((i, j))
        elif not can_differ:
            eq.append((i, j))
        else:
            free.append((i, j))
    return ForcedReport(inst.k, eq, neq, free, expl, instance_id, beta)


FORCED_HEADER = ["instance", "beta", "k", "forced_equal", "forced_unequal", "free", "explicit"]


def forced_csv(reports: Sequence[ForcedReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FORCED_HEADER)
    for r in reports:
        c = r.counts
        w.writerow([r.instance_id, "" if r.beta is None else f"{r.beta:g}", r.k,
                    c["forced_equal"], c["forced_unequal"], c["free"], c["explicit"]])
    return buf.getvalue()


def _probe_task(args) -> ForcedReport:
    k, n, e, g, seed, beta, rep, auth_sizes = args
    inst = generate(GenConfig(k, n, e, g, seed, auth_sizes))
    return forced_m_probe(inst, instance_id=f"k{k}-n{n}-e{e}-g{g}-r{rep}", beta=beta)


def run_forced_sweep(k: int, betas: Iterable[float], samples: int = 50, seed: int = 0, *,
                     e50: int | None = None, n: int | None = None,
                     workers: int | None = None, max_draws: int | None = None,
                     auth_sizes: str = "half") -> list[ForcedReport]:
    """Forced-pair reports for the first ``samples`` satisfiable instances per beta."""
    n = 10 * k if n is None else n
    if e50 is None:
        e50 = _e50_for(k, n, k, None, max(samples, 20), seed, workers, auth_sizes)
    max_draws = max_draws or 20 * samples
    reports = []
    for beta in betas:
        e = min(math.comb(k, 2), int(round(beta * e50)))
        g = min(math.comb(k, 5), int(round(beta * k)))
        chosen, rep = [], 0
        while len(chosen) < samples and rep < max_draws:
            batch = []
            while len(batch) < samples - len(chosen) and rep < max_draws:
                batch.append(Task(k, n, e, g, instance_seed(seed, k, n, g, rep),
                                  auth_sizes=auth_sizes))
                rep += 1
            for t, o in zip(batch, run_tasks(batch, workers)):
                if o.status == SAT:
                    chosen.append((k, n, e, g, t.seed, beta, len(chosen), auth_sizes))
        if len(chosen) < samples:
            raise ExperimentError(f"only {len(chosen)} satisfiable instances in {max_draws} draws at beta={beta}")
        workers_ = default_workers() if workers is None else workers
        if workers_ <= 1:
            reports += [_probe_task(a) for a in chosen]
        else:
            with ProcessPoolExecutor(max_workers=workers_) as pool:
                reports += list(pool.map(_probe_task, chosen))
    return reports
