"""Acceptance checks: one test per criterion, each printing a PASS/FAIL line.

    pytest tests/test_acceptance.py -v -s     # or
    python3 tests/test_acceptance.py

Experiments run at the phase transition of the default generator (uniform
authorisation sizes 1..k//2).  Where the alternative size range 1..(k-1)//2
changes the outcome, it is printed as a diagnostic on the same line; it never
decides PASS/FAIL.
"""

from __future__ import annotations

import csv
import io
import random
import statistics
import sys
import time
from functools import lru_cache
from math import comb
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from wsppbt import Constraint, Instance  # noqa: E402
from wsppbt import analysis as an  # noqa: E402
from wsppbt import experiments as ex  # noqa: E402
from wsppbt.cli import main as cli_main  # noqa: E402
from wsppbt.generator import GenConfig, generate  # noqa: E402
from wsppbt.oracle import brute_force_sat, set_partitions, valid_plans  # noqa: E402
from wsppbt.pb import decode_solution, edge_bounds, encode_pbpb, encode_udpb, solutions  # noqa: E402
from wsppbt.solver import TIMEOUT, solve  # noqa: E402

SEED = 1
TABLE = Path(__file__).parent / "data" / "annealed_k30_n300_e50_g30.csv"


def _line(n: int, ok: bool, detail: str) -> str:
    return f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def _emit(n, ok, detail, capsys=None):
    text = _line(n, ok, detail)
    if capsys is not None:
        with capsys.disabled():
            print("\n" + text, flush=True)
    else:
        print(text, flush=True)
    return ok


@lru_cache(maxsize=None)
def measured_e50(k: int, auth_sizes: str = "half") -> tuple[int, float]:
    t = time.perf_counter()
    res = ex.find_e50(k, 10 * k, k, samples=100, seed=SEED, auth_sizes=auth_sizes)
    return res.e50, time.perf_counter() - t


def _pt_e50(k: int) -> int:
    """Phase-transition e for the default generator: bundled table, else measured."""
    e = an.stored_e50(k)
    return e if e is not None else measured_e50(k)[0]


# -- checks ------------------------------------------------------------------------

def check_1():
    t = time.perf_counter()
    count = agree = 0
    for idx in range(560):
        k = 4 + idx % 4
        n = 6 + (idx // 4) % 7
        e = (idx * 7 + idx // 28) % (comb(k, 2) + 1)
        g = (idx // 2) % 2 if k >= 5 else 0
        inst = generate(GenConfig(k, n, e, g, idx))
        truth = brute_force_sat(inst)
        count += 1
        agree += (solve(inst).sat == truth) and (solve(inst, heuristic_on=False).sat == truth)
    dt = time.perf_counter() - t
    return agree == count and dt < 60, f"{agree}/{count} verdicts match the pattern oracle; {dt:.1f}s (limit 60s)"


def _plans(model, k):
    out = set()
    for value in solutions(model, project=model.vars_of_kind("X")):
        plan, _ = decode_solution(model, value)
        out.add(tuple(plan[s] for s in range(k)))
    return out


def _dense_instance(idx):
    """Small instance with ~60% authorisation density and mixed (in)equalities."""
    rng = random.Random(idx)
    k, n = 2 + idx % 4, 1 + (idx // 4) % 4
    auth = tuple(frozenset(s for s in range(k) if rng.random() < 0.6) for _ in range(n))
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    rng.shuffle(pairs)
    cons = tuple((Constraint.equals if rng.random() < 0.25 else Constraint.not_equals)(i, j)
                 for i, j in pairs[:rng.randint(0, len(pairs))])
    return Instance(k, n, auth, cons)


def check_2():
    t = time.perf_counter()
    insts = []
    for idx in range(60):
        k = 2 + idx % 4
        n = 1 + (idx // 4) % 4
        e = idx % (comb(k, 2) + 1)
        g = (idx // 16) % 2 if k == 5 else 0
        insts.append(generate(GenConfig(k, n, e, g, 1000 + idx)))
    insts += [_dense_instance(idx) for idx in range(100)]
    agree = nonempty = 0
    for inst in insts:
        want = valid_plans(inst)
        nonempty += bool(want)
        got = [_plans(m, inst.k) for m in
               (encode_udpb(inst), encode_pbpb(inst), encode_pbpb(inst, "tvars"))]
        agree += all(g_ == want for g_ in got)
    dt = time.perf_counter() - t
    return agree == len(insts) and dt < 300, (
        f"{agree}/{len(insts)} instances ({nonempty} satisfiable): oracle, UDPB and PBPB "
        f"plan sets coincide; {dt:.1f}s (limit 300s)")


def check_3():
    t = time.perf_counter()
    rep = an.annealed_report(30, 300, 50, 30)
    ours = {r["b"]: r for r in csv.DictReader(io.StringIO(rep.to_csv()))}
    total = match = 0
    with open(TABLE) as fh:
        for row in csv.DictReader(fh):
            if row["printed"] != "1":
                continue
            for col, val in row.items():
                if col in ("b", "printed"):
                    continue
                total += 1
                match += ours[row["b"]][col] == val
    dt = time.perf_counter() - t
    return match == total and dt < 1, f"{match}/{total} printed cells match at 2 s.f.; {dt:.3f}s"


def check_4():
    e30, dt = measured_e50(30)
    b30 = an.predict_beta(30, e30)
    e50 = an.stored_e50(50)
    b50 = an.predict_beta(50, e50) if e50 is not None else float("nan")
    ok30 = abs(b30 - 1.17) <= 0.02 and dt <= 600
    ok50 = e50 is not None and abs(b50 - 1.02) <= 0.02
    e30f, _ = measured_e50(30, "footnote")
    row50 = [r for r in an.load_e50_table() if r["k"] == 50 and r["auth_sizes"] == "half"]
    s50 = row50[0]["samples"] if row50 else 0
    detail = (f"k=30: e50={e30} ({dt:.0f}s, 100 samples) -> beta={b30:.3f} (want 1.17+-0.02); "
              f"k=50: e50={e50} (bundled, {s50} samples) -> beta={b50:.3f} (want 1.02+-0.02); "
              f"diagnostic sizes 1..(k-1)//2 at k=30: e50={e30f} -> beta={an.predict_beta(30, e30f):.3f}")
    return ok30 and ok50, detail


def check_5():
    t = time.perf_counter()
    ok = True
    for q in range(1, 7):
        edges_by_r: dict[int, list[int]] = {}
        for p in set_partitions(q):
            edges_by_r.setdefault(len(p), []).append(sum(len(b) * (len(b) - 1) // 2 for b in p.blocks))
        for r in range(1, q + 1):
            lo, hi = min(edges_by_r[r]), max(edges_by_r[r])
            b = edge_bounds(q, r)
            over = tuple(r2 for r2 in edges_by_r if r2 != r
                         and min(edges_by_r[r2]) <= hi and lo <= max(edges_by_r[r2]))
            ok &= (b.lower, b.upper) == (lo, hi) and b.overlaps == tuple(sorted(over))
    row5 = [edge_bounds(5, r)[:2] for r in range(1, 6)]
    ok &= row5 == [(10, 10), (4, 6), (2, 3), (1, 1), (0, 0)]
    ok &= 2 in edge_bounds(6, 3).overlaps
    dt = time.perf_counter() - t
    return ok and dt < 1, f"q<=6 bounds and overlaps match enumeration; q=5 row {row5}; {dt:.3f}s"


def check_6():
    e30, dt = measured_e50(30)
    e30f, dtf = measured_e50(30, "footnote")
    ok = 45 <= e30 <= 55 and dt <= 600
    return ok, (f"e50(30,300,30)={e30} with 100 samples/probe, {dt:.0f}s (want [45,55]); "
                f"diagnostic sizes 1..(k-1)//2: e50={e30f} ({dtf:.0f}s)")


def check_7():
    t = time.perf_counter()
    e = _pt_e50(25)
    rows = ex.run_beta_sweep(25, [0.5, 1.0, 1.5], samples=50, seed=SEED, e50=e)
    med = {r.beta: r.node_pct["all"][50] for r in rows}
    dt = time.perf_counter() - t
    ok = med[1.0] > med[0.5] and med[1.0] > med[1.5] and dt <= 300
    return ok, (f"k=25 e50={e}: median nodes beta=0.5 {med[0.5]:g}, 1.0 {med[1.0]:g}, 1.5 {med[1.5]:g}; "
                f"{dt:.0f}s")


def check_8():
    t = time.perf_counter()
    e = _pt_e50(25)
    seeds = [ex.instance_seed(SEED, 25, 250, 25, r) for r in range(50)]
    on = ex.run_tasks([ex.Task(25, 250, e, 25, s, True) for s in seeds])
    off = ex.run_tasks([ex.Task(25, 250, e, 25, s, False, 120.0) for s in seeds])
    m_on = statistics.median(o.nodes for o in on)
    m_off = statistics.median(o.nodes for o in off)
    cens = sum(o.status == TIMEOUT for o in off)
    dt = time.perf_counter() - t
    ratio = m_off / m_on
    ok = ratio >= 10 and dt <= 900
    return ok, (f"k=25 e50={e}: median nodes on {m_on:g}, off {m_off:g} (ratio {ratio:.0f}x, "
                f"{cens} censored at 120s); {dt:.0f}s")


def check_9():
    t = time.perf_counter()
    rows = ex.run_vary_k_slice(range(18, 31), samples=100, seed=SEED)
    fit = ex.fit_scaling(rows, "unsat", "nodes")
    dt = time.perf_counter() - t
    ok = fit.r2_klogk > fit.r2_k
    return ok, (f"k=18..30: R2 vs k*log2k {fit.r2_klogk:.4f} vs k {fit.r2_k:.4f}; "
                f"slope vs k*log2k {fit.slope_klogk:.4f} (1/13.2={1 / 13.2:.4f}); {dt:.0f}s")


def check_10():
    t = time.perf_counter()
    e = _pt_e50(20)
    betas = [0.8, 1.0, 1.2]
    reps = ex.run_forced_sweep(20, betas, samples=50, seed=SEED, e50=e, max_draws=10000)
    means = {}
    for b in betas:
        sel = [r.counts["forced_unequal"] for r in reps if r.beta == b]
        means[b] = statistics.fmean(sel) if sel else float("nan")
    dt = time.perf_counter() - t
    mono = means[0.8] < means[1.0] < means[1.2]
    near = 91 / 2 <= means[1.0] <= 91 * 2
    ok = mono and near and dt <= 1200
    counts = {b: sum(r.beta == b for r in reps) for b in betas}
    return ok, (f"k=20 e50={e}: mean forced-unequal " +
                ", ".join(f"beta={b} {means[b]:.1f} (n={counts[b]})" for b in betas) +
                f"; want increasing and beta=1 in [45.5, 182]; {dt:.0f}s")


def check_11():
    t = time.perf_counter()
    ns = [90, 180, 360, 720, 1440]
    rows = ex.run_fixed_k_slice(18, ns, samples=50, seed=SEED, e50_samples=100)
    med = [r.time_pct["all"][50] for r in rows]
    ratio = max(med) / min(med)
    dt = time.perf_counter() - t
    return ratio < 10, (f"k=18: e50 by n {[r.e for r in rows]}; median wall ms "
                        f"{[round(m * 1e3, 3) for m in med]}; max/min {ratio:.2f} (want <10); {dt:.0f}s")


def check_12(tmp: Path):
    def run_once(tag):
        d = tmp / tag
        d.mkdir(parents=True, exist_ok=True)
        inst = d / "i.wsp"
        cli_main(["generate", "--k", "20", "--n", "200", "--e", "38", "--gamma", "20", "--seed", "5",
                  "--out", str(inst)])
        cli_main(["solve", "--in", str(inst), "--out", str(d / "sol"), "--stats", str(d / "stats")])
        cli_main(["solve", "--in", str(inst), "--heuristic", "off", "--out", str(d / "sol_off")])
        small = d / "s.wsp"
        cli_main(["generate", "--k", "6", "--n", "8", "--e", "5", "--gamma", "1", "--seed", "5",
                  "--out", str(small)])
        for f, c in (("udpb", "edges"), ("pbpb", "edges"), ("pbpb", "tvars")):
            cli_main(["encode", "--in", str(small), "--formulation", f, "--counting", c,
                      "--out", str(d / f"{f}-{c}.opb")])
        cli_main(["slice", "vary-k", "--ks", "14-15", "--samples", "5", "--no-timings",
                  "--out", str(d / "slice.csv")])
        cli_main(["estimate", "--k", "30", "--n", "300", "--e", "50", "--gamma", "30", "--table",
                  "--out", str(d / "table.csv")])
        out = {}
        for p in sorted(d.iterdir()):
            data = p.read_text()
            if p.name == "stats":  # drop the wall-time column
                data = "\n".join(",".join(x for i, x in enumerate(line.split(",")) if i != 8)
                                 for line in data.splitlines())
            out[p.name] = data
        return out

    a, b = run_once("a"), run_once("b")
    same = [k for k in a if a[k] == b.get(k)]
    return len(same) == len(a), f"{len(same)}/{len(a)} outputs byte-identical across two runs"


# -- pytest wrappers -----------------------------------------------------------------

def _check(n, fn, capsys, *args):
    ok, detail = fn(*args)
    _emit(n, ok, detail, capsys)
    assert ok, detail


def test_criterion_01_oracle_equivalence(capsys):
    _check(1, check_1, capsys)


def test_criterion_02_encoding_equivalence(capsys):
    _check(2, check_2, capsys)


def test_criterion_03_annealed_table(capsys):
    _check(3, check_3, capsys)


def test_criterion_04_beta_prediction(capsys):
    _check(4, check_4, capsys)


def test_criterion_05_edge_bounds(capsys):
    _check(5, check_5, capsys)


def test_criterion_06_e50(capsys):
    _check(6, check_6, capsys)


def test_criterion_07_easy_hard_easy(capsys):
    _check(7, check_7, capsys)


def test_criterion_08_heuristic(capsys):
    _check(8, check_8, capsys)


def test_criterion_09_scaling_form(capsys):
    _check(9, check_9, capsys)


def test_criterion_10_forced_pairs(capsys):
    _check(10, check_10, capsys)


def test_criterion_11_fixed_k(capsys):
    _check(11, check_11, capsys)


def test_criterion_12_determinism(capsys, tmp_path):
    _check(12, check_12, capsys, tmp_path)


if __name__ == "__main__":
    import tempfile

    results = []
    checks = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9,
              check_10, check_11]
    for n, fn in enumerate(checks, start=1):
        results.append(_emit(n, *fn()))
    with tempfile.TemporaryDirectory() as d:
        results.append(_emit(12, *check_12(Path(d))))
    print(f"{sum(results)}/{len(results)} criteria pass")
