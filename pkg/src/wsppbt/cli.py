"""Command-line interface.

Exit codes: 0 success, 10 satisfiable, 20 unsatisfiable, 2 usage or parse
error, 3 verification failure, 4 timeout.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys

from . import analysis, experiments
from .core import WSPError, verify_plan
from .fileio import parse_solution, read_instance, write_instance, write_solution
from .generator import AUTH_SIZES, GenConfig, expected_auth_fraction, generate
from .pb import (PBError, decode_solution, emit_opb, encode_pbpb, encode_udpb, parse_opb,
                 read_solution, solve_first)
from .pb.opb import write_solution as write_pb_solution
from .solver import SAT, TIMEOUT, UNSAT, search_stats, solve_instance

EXIT_OK, EXIT_SAT, EXIT_UNSAT, EXIT_USAGE, EXIT_VERIFY, EXIT_TIMEOUT = 0, 10, 20, 2, 3, 4


class VerificationError(WSPError):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition("-")
        out += list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
    return out


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _timeout_s(args) -> float:
    return (args.timeout_ms or 0) / 1000.0


# -- commands --------------------------------------------------------------------

def cmd_generate(args) -> int:
    inst = generate(GenConfig(args.k, args.n, args.e, args.gamma, args.seed, args.auth_sizes))
    _write(args.out, write_instance(inst))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = read_instance(args.input)
    res = solve_instance(inst, heuristic_on=args.heuristic == "on", backend=args.backend,
                         time_limit=_timeout_s(args) or None)
    if res.status == SAT:
        verdict = verify_plan(inst, res.plan)
        if not verdict.valid:
            raise VerificationError(f"solver produced an invalid plan: {verdict.violations}")
    _write(args.out, write_solution(res.status, res.plan))
    if args.stats:
        rep = search_stats(res)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["status", "nodes", "max_depth", "eligibility_prunes", "authorisation_prunes",
                    "cache_clears", "max_branching", "max_branching_depth", "wall_time", "backend"])
        s = res.stats
        w.writerow([res.status, s.nodes, s.max_depth, s.eligibility_prunes, s.authorisation_prunes,
                    s.cache_clears, f"{rep.max_branching:.4f}", rep.max_branching_depth,
                    f"{res.wall_time:.6f}", res.backend])
        _write(args.stats, buf.getvalue())
    return {SAT: EXIT_SAT, UNSAT: EXIT_UNSAT, TIMEOUT: EXIT_TIMEOUT}[res.status]


def cmd_verify(args) -> int:
    inst = read_instance(args.input)
    status, plan = parse_solution(_read(args.solution))
    if status != "SAT":
        print(f"solution file says {status}; nothing to verify", file=sys.stderr)
        return EXIT_OK
    verdict = verify_plan(inst, plan)
    if verdict.valid:
        print("valid")
        return EXIT_OK
    for v in verdict.violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_VERIFY


def cmd_encode(args) -> int:
    inst = read_instance(args.input)
    if args.formulation == "udpb":
        if args.counting != "edges":
            raise PBError("--counting applies to the pbpb formulation only")
        model = encode_udpb(inst)
    else:
        model = encode_pbpb(inst, args.counting)
    _write(args.out, emit_opb(model))
    return EXIT_OK


def cmd_pbsolve(args) -> int:
    model = parse_opb(_read(args.model))
    value = solve_first(model)
    _write(args.out, write_pb_solution(value or {}, "SAT" if value is not None else "UNSAT"))
    return EXIT_SAT if value is not None else EXIT_UNSAT


def cmd_decode(args) -> int:
    model = parse_opb(_read(args.model_map))
    status, value = read_solution(_read(args.pbsolution))
    if status == "UNSAT":
        _write(args.out, write_solution("UNSAT"))
        return EXIT_OK
    if status != "SAT":
        raise PBError("solver output carries no solution")
    missing = [v for v in range(1, model.num_vars + 1) if v not in value]
    if missing:
        raise PBError(f"solver output misses x{missing[0]} and {len(missing) - 1} more variables")
    try:
        plan, _ = decode_solution(model, value)
        if not model.satisfied_by(value):
            raise PBError("assignment violates a model constraint")
    except PBError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if args.input:
        inst = read_instance(args.input)
        verdict = verify_plan(inst, plan)
        if not verdict.valid:
            for v in verdict.violations:
                print(f"violation: {v}", file=sys.stderr)
            return EXIT_VERIFY
    _write(args.out, write_solution("SAT", plan))
    return EXIT_OK


def cmd_estimate(args) -> int:
    frac = float(expected_auth_fraction(args.k)) if args.exact_auth else analysis.AUTH_FRACTION
    if args.predict_e50:
        gamma = args.k if args.gamma is None else args.gamma
        e = analysis.predict_e50(args.k, args.n, gamma, auth_fraction=frac)
        print(f"predicted_e50,{e:.4f}")
        return EXIT_OK
    if args.predict_beta is not None:
        b = analysis.predict_beta(args.k, args.predict_beta, args.n, auth_fraction=frac)
        print(f"predicted_beta,{b:.4f}")
        return EXIT_OK
    if args.e is None or args.gamma is None:
        raise WSPError("estimate needs --e and --gamma (or --predict-e50 / --predict-beta)")
    rep = analysis.annealed_report(args.k, args.n, args.e, args.gamma, auth_fraction=frac)
    if args.table:
        _write(args.out, rep.to_csv())
    else:
        _write(args.out, f"p_sat,{rep.p_sat:.6g}\nn_valid_plans,{rep.n_valid_plans.sci(4)}\n"
                         f"n_eligible_patterns,{rep.n_elig.sci(4)}\n")
    return EXIT_OK


def _progress(args):
    if args.quiet:
        return None
    return lambda e, f: print(f"e={e} sat_fraction={f:.3f}", file=sys.stderr, flush=True)


def cmd_e50(args) -> int:
    res = experiments.find_e50(args.k, args.n, args.gamma, args.samples, args.seed,
                               workers=args.workers, time_limit=_timeout_s(args),
                               auth_sizes=args.auth_sizes, progress=_progress(args))
    if args.curve:
        _write(args.curve, experiments.e50_curve_csv(res))
    print(f"e50,{res.e50}")
    return EXIT_OK


def cmd_slice(args) -> int:
    common = dict(workers=args.workers, time_limit=_timeout_s(args), auth_sizes=args.auth_sizes)
    if args.mode == "vary-k":
        rows = experiments.run_vary_k_slice(_int_list(args.ks), lambda k: args.n_factor * k,
                                            args.samples, args.seed, **common)
        x = "k"
    else:
        if args.k is None or not args.ns:
            raise WSPError("fixed-k needs --k and --ns")
        rows = experiments.run_fixed_k_slice(args.k, _int_list(args.ns), args.samples, args.seed,
                                             e50_samples=args.e50_samples, **common)
        x = "n"
    _write(args.out, experiments.slice_csv(rows, timings=not args.no_timings))
    if args.plot_data:
        _write(args.plot_data, experiments.plot_data_csv(rows, x=x))
    return EXIT_OK


def cmd_beta(args) -> int:
    rows = experiments.run_beta_sweep(args.k, _float_list(args.betas), args.samples, args.seed,
                                      e50=args.e50, heuristic=args.heuristic == "on",
                                      workers=args.workers, time_limit=_timeout_s(args),
                                      auth_sizes=args.auth_sizes)
    _write(args.out, experiments.slice_csv(rows, timings=not args.no_timings))
    if args.plot_data:
        _write(args.plot_data, experiments.plot_data_csv(rows, x="beta"))
    return EXIT_OK


def cmd_forced(args) -> int:
    if args.input:
        rep = experiments.forced_m_probe(read_instance(args.input), instance_id=args.input)
        _write(args.out, experiments.forced_csv([rep]))
        return EXIT_OK
    if args.k is None:
        raise WSPError("forced needs --in or --k")
    reps = experiments.run_forced_sweep(args.k, _float_list(args.betas), args.samples, args.seed,
                                        e50=args.e50, workers=args.workers,
                                        auth_sizes=args.auth_sizes)
    _write(args.out, experiments.forced_csv(reps))
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wsppbt", description="Workflow satisfiability tools.")
    sub = p.add_subparsers(dest="command", required=True)

    def runner_opts(sp):
        sp.add_argument("--workers", type=int, default=None,
                        help=f"worker processes (default ${experiments.WORKERS_ENV} or 1)")
        sp.add_argument("--timeout-ms", type=int, default=0, help="per-solve time limit; 0 = none")
        sp.add_argument("--auth-sizes", choices=sorted(AUTH_SIZES), default="half")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=100)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--e", type=int, required=True)
    g.add_argument("--gamma", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--auth-sizes", choices=sorted(AUTH_SIZES), default="half")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve an instance (exit 10 SAT, 20 UNSAT, 4 timeout)")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--heuristic", choices=["on", "off"], default="on")
    s.add_argument("--backend", choices=["compiled", "python"], default=None)
    s.add_argument("--timeout-ms", type=int, default=0)
    s.add_argument("--stats", help="write search statistics CSV here")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a solution file (exit 3 if invalid)")
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--solution", required=True)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("encode", help="write a pseudo-Boolean model in OPB format")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--formulation", choices=["udpb", "pbpb"], default="pbpb")
    e.add_argument("--counting", choices=["edges", "tvars"], default="edges")
    e.add_argument("--out")
    e.set_defaults(func=cmd_encode)

    ps = sub.add_parser("pbsolve", help="exhaustively solve a small OPB model (stand-in solver)")
    ps.add_argument("--model", required=True)
    ps.add_argument("--out")
    ps.set_defaults(func=cmd_pbsolve)

    d = sub.add_parser("decode", help="turn PB solver output into a solution file")
    d.add_argument("--model-map", required=True, help="the OPB file written by encode")
    d.add_argument("--pbsolution", required=True)
    d.add_argument("--in", dest="input", help="instance to verify the plan against")
    d.add_argument("--out")
    d.set_defaults(func=cmd_decode)

    es = sub.add_parser("estimate", help="annealed satisfiability estimate")
    es.add_argument("--k", type=int, required=True)
    es.add_argument("--n", type=int, required=True)
    es.add_argument("--e", type=float)
    es.add_argument("--gamma", type=float)
    es.add_argument("--table", action="store_true", help="print the per-block-count table as CSV")
    es.add_argument("--predict-e50", action="store_true")
    es.add_argument("--predict-beta", type=float, metavar="E50")
    es.add_argument("--exact-auth", action="store_true",
                    help="use the generator's exact authorisation fraction instead of 1/4")
    es.add_argument("--out")
    es.set_defaults(func=cmd_estimate)

    f = sub.add_parser("e50", help="measure e50 empirically")
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--gamma", type=int, required=True)
    f.add_argument("--curve", help="write the sat-fraction curve CSV here")
    f.add_argument("--quiet", action="store_true")
    runner_opts(f)
    f.set_defaults(func=cmd_e50)

    sl = sub.add_parser("slice", help="vary-k or fixed-k runtime slice")
    sl.add_argument("mode", choices=["vary-k", "fixed-k"])
    sl.add_argument("--ks", default="18-26")
    sl.add_argument("--n-factor", type=int, default=10)
    sl.add_argument("--k", type=int)
    sl.add_argument("--ns")
    sl.add_argument("--e50-samples", type=int, default=100)
    sl.add_argument("--no-timings", action="store_true", help="omit wall times (byte-stable output)")
    sl.add_argument("--plot-data")
    sl.add_argument("--out")
    runner_opts(sl)
    sl.set_defaults(func=cmd_slice)

    b = sub.add_parser("beta", help="sweep the constraint scaling factor beta")
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--betas", default="0.5,0.75,1,1.25,1.5")
    b.add_argument("--e50", type=int)
    b.add_argument("--heuristic", choices=["on", "off"], default="on")
    b.add_argument("--no-timings", action="store_true")
    b.add_argument("--plot-data")
    b.add_argument("--out")
    runner_opts(b)
    b.set_defaults(func=cmd_beta)

    fo = sub.add_parser("forced", help="count forced step pairs")
    fo.add_argument("--in", dest="input")
    fo.add_argument("--k", type=int)
    fo.add_argument("--betas", default="0.8,1,1.2")
    fo.add_argument("--e50", type=int)
    fo.add_argument("--out")
    runner_opts(fo)
    fo.set_defaults(func=cmd_forced)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VerificationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (WSPError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
