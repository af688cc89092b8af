"""Compare the compiled search kernel with the pure-Python search.

Instances sit at the empirical phase transition (bundled e50 table).  Both
backends must agree on verdict, plan and node count; the script reports
median wall time per backend and the speed-up.

    python3 bench/bench_backends.py --ks 14,18,22 --samples 10
"""

from __future__ import annotations

import argparse
import statistics
import sys

from wsppbt.analysis import stored_e50
from wsppbt.experiments import instance_seed
from wsppbt.generator import GenConfig, generate
from wsppbt.solver import compiled_available, solve


def bench(k: int, samples: int, seed: int, time_limit: float) -> dict:
    n = 10 * k
    e = stored_e50(k) or k * (k - 1) // 8
    times = {"compiled": [], "python": []}
    nodes = []
    for rep in range(samples):
        inst = generate(GenConfig(k, n, e, k, instance_seed(seed, k, n, k, rep)))
        res = {b: solve(inst, backend=b, time_limit=time_limit) for b in times}
        a, b = res["compiled"], res["python"]
        if "TIMEOUT" not in (a.status, b.status):
            if (a.status, a.plan, a.stats.nodes) != (b.status, b.plan, b.stats.nodes):
                raise SystemExit(f"backends disagree at k={k} rep={rep}")
        for name, r in res.items():
            times[name].append(r.wall_time)
        nodes.append(a.stats.nodes)
    med = {name: statistics.median(ts) for name, ts in times.items()}
    return {"k": k, "e": e, "median_nodes": statistics.median(nodes),
            "compiled_s": med["compiled"], "python_s": med["python"],
            "speedup": med["python"] / med["compiled"] if med["compiled"] else float("inf")}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ks", default="14,18,22")
    ap.add_argument("--samples", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--time-limit", type=float, default=120.0)
    args = ap.parse_args(argv)
    if not compiled_available():
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    print("k,e,median_nodes,compiled_s,python_s,speedup")
    for k in (int(x) for x in args.ks.split(",")):
        r = bench(k, args.samples, args.seed, args.time_limit)
        print(f"{r['k']},{r['e']},{r['median_nodes']:g},{r['compiled_s']:.5f},"
              f"{r['python_s']:.5f},{r['speedup']:.1f}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
