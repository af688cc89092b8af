"""Measure e50(k, n, gamma) with the package's harness and write the bundled table.

    python scripts/build_e50_table.py --ks 18-30 --samples 100 --seed 1
    python scripts/build_e50_table.py --ks 50 --samples 20 --time-limit 300 --seed 1

Rows already present for the same (k, n, gamma, auth_sizes) are replaced.
"""

import argparse
import csv
import sys
import time
from pathlib import Path

from wsppbt.experiments import find_e50

TABLE = Path(__file__).resolve().parents[1] / "src" / "wsppbt" / "data" / "e50.csv"
HEADER = ["k", "n", "gamma", "auth_sizes", "e50", "samples", "seed", "time_limit", "timeouts", "curve"]


def parse_ks(text):
    out = []
    for part in text.split(","):
        lo, _, hi = part.partition("-")
        out += list(range(int(lo), int(hi or lo) + 1))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ks", required=True)
    ap.add_argument("--n-factor", type=int, default=10)
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--time-limit", type=float, default=0.0)
    ap.add_argument("--auth-sizes", default="half", choices=["half", "footnote"])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    rows = {}
    if TABLE.exists():
        with TABLE.open() as fh:
            for r in csv.DictReader(fh):
                rows[(int(r["k"]), int(r["n"]), int(r["gamma"]), r["auth_sizes"])] = r
    for k in parse_ks(args.ks):
        n = args.n_factor * k
        t0 = time.perf_counter()
        res = find_e50(k, n, k, args.samples, args.seed, workers=args.workers,
                       time_limit=args.time_limit, auth_sizes=args.auth_sizes,
                       progress=lambda e, f: print(f"  k={k} e={e} sat={f:.2f}", file=sys.stderr, flush=True))
        curve = " ".join(f"{e}:{f:.2f}" for e, f, _ in res.curve)
        print(f"k={k} n={n} e50={res.e50} ({time.perf_counter() - t0:.0f}s) {curve}", flush=True)
        rows[(k, n, k, args.auth_sizes)] = {
            "k": k, "n": n, "gamma": k, "auth_sizes": args.auth_sizes, "e50": res.e50,
            "samples": args.samples, "seed": args.seed, "time_limit": f"{args.time_limit:g}",
            "timeouts": res.timeouts, "curve": curve}
        with TABLE.open("w", newline="") as fh:
            w = csv.DictWriter(fh, HEADER, lineterminator="\n")
            w.writeheader()
            for key in sorted(rows):
                w.writerow(rows[key])


if __name__ == "__main__":
    main()
