"""``minmax-paging`` command line."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import harness
from .adversaries import write_metadata
from .fractional import certify_dump, read_dump, run_fractional, write_certificate, write_dump
from .objectives import default_params, parse_objective
from .policies import POLICY_NAMES
from .report import CostSummary, ExperimentReport, emit, rows_to_csv
from .rounding import default_beta, round_deterministic, round_randomized, write_schedule
from .trace import MalformedTraceError, read_trace, write_trace

GLOBAL_DEFAULTS = {"seed": 0, "out": None, "format": "text", "tol": 1e-6}


def _global_parent() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    p.add_argument("--out", default=argparse.SUPPRESS, help="write output here instead of stdout")
    p.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS,
                   help="report format (default text)")
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS,
                   help="tolerance for certificate checks (default 1e-6)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parent = _global_parent()
    ap = argparse.ArgumentParser(prog="minmax-paging", parents=[parent],
                                 description="Min-max paging experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[parent], help="generate a request trace")
    g.add_argument("--adv", required=True, choices=harness.ADVERSARIES)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--m", type=int, default=1, help="number of layers")
    g.add_argument("--N", type=int, default=10, help="faults or passes per phase")
    g.add_argument("--n-pages", type=int, default=None)
    g.add_argument("--length", type=int, default=None)
    g.add_argument("--reps", type=int, default=1)
    g.add_argument("--vs", default="lru", help="policy an adaptive adversary plays against")
    g.add_argument("--meta", default=None, help="write layered phase metadata (JSON) here")

    r = sub.add_parser("run", parents=[parent], help="serve a trace with an online policy")
    r.add_argument("trace")
    r.add_argument("--policy", default="lru", help=f"one of {', '.join(POLICY_NAMES)}")

    f = sub.add_parser("frac", parents=[parent], help="solve the fractional problem online")
    f.add_argument("trace")
    f.add_argument("--objective", default="minmax", help="l1 | lq:<q> | minmax")
    f.add_argument("--max-step", type=float, default=None)
    f.add_argument("--dump", default=None, help="write the solution dump here")
    f.add_argument("--cert", default=None, help="write the dual certificate (JSON) here")

    rd = sub.add_parser("round", parents=[parent], help="round a fractional run to a schedule")
    rd.add_argument("trace")
    rd.add_argument("--objective", default="minmax")
    rd.add_argument("--scheme", choices=("det", "rand"), default="det")
    rd.add_argument("--beta", type=float, default=None)
    rd.add_argument("--max-step", type=float, default=None)
    rd.add_argument("--schedule", default=None, help="write the integral schedule here")

    d = sub.add_parser("duel", parents=[parent], help="adversary against policy ratio experiment")
    d.add_argument("--adv", required=True, choices=("det-layered", "rand-layered", "cruel"))
    d.add_argument("--policy", default="lru")
    d.add_argument("--k", type=int, default=2)
    d.add_argument("--m", type=int, default=1)
    d.add_argument("--N", type=int, default=10)
    d.add_argument("--length", type=int, default=1000)
    d.add_argument("--seeds", type=int, default=1, help="number of seeds, starting at --seed")
    d.add_argument("--slack", type=float, default=harness.DEFAULT_RATIO_SLACK)
    d.add_argument("--max-step", type=float, default=None)

    c = sub.add_parser("certify", parents=[parent], help="re-check a solution dump")
    c.add_argument("dump")

    b = sub.add_parser("bench", parents=[parent], help="run a JSON suite, one CSV row per cell")
    b.add_argument("suite")
    b.add_argument("--workers", type=int, default=None)
    return ap


def _report_rows(rep: ExperimentReport, seed: int) -> list[dict]:
    cfg = rep.config
    off = next(iter(rep.offline.values()), None)
    ratio = next(iter(rep.ratios.values()), None)
    bound = next(iter(rep.bounds.values()), None)
    rows = []
    for name, cs in rep.costs.items():
        rows.append({"suite": rep.command, "case": cfg.get("adv", rep.command), "algorithm": name,
                     "k": cfg.get("k"), "n": cfg.get("n"), "T": cfg.get("T", rep.details.get("T")),
                     "seed": seed, "minmax_cost": cs.minmax, "l1_cost": cs.l1,
                     "offline_minmax": off.minmax if off else None, "ratio": ratio, "bound": bound,
                     "pass": rep.passed, "runtime_ms": round(rep.wall_time_s * 1000.0, 3)})
    return rows


def _emit_report(rep: ExperimentReport, opts: dict) -> None:
    fmt = opts["format"]
    if fmt == "json":
        text = rep.to_json()
    elif fmt == "csv":
        text = rows_to_csv(_report_rows(rep, opts["seed"]))
    else:
        text = rep.to_text()
    emit(text, opts["out"])


def _params(trace, objective, max_step):
    obj = parse_objective(objective, trace.n)
    extra = {} if max_step is None else {"max_step": max_step}
    return obj, default_params(trace.k, obj.q, trace.T, **extra)


def _cmd_gen(a, opts) -> int:
    tr, meta, _ = harness.generate(a.adv, k=a.k, m=a.m, N=a.N, n_pages=a.n_pages, seed=opts["seed"],
                                   vs=a.vs, length=a.length, reps=a.reps)
    if opts["out"]:
        write_trace(tr, opts["out"])
    else:
        sys.stdout.write(f"paging-trace v1 k={tr.k} n={tr.n}\n")
        sys.stdout.write("".join(f"{p}\n" for p in tr.requests))
    if a.meta:
        if meta is None:
            print(f"warning: adversary {a.adv} has no phase metadata", file=sys.stderr)
        else:
            write_metadata(meta, a.meta)
    return 0


def _cmd_run(a, opts) -> int:
    rep = harness.cmd_run(read_trace(a.trace), a.policy)
    _emit_report(rep, opts)
    return 0 if rep.passed else 1


def _cmd_frac(a, opts) -> int:
    tr = read_trace(a.trace)
    rep, state = harness.cmd_frac(tr, a.objective, a.max_step, tol=opts["tol"])
    if a.dump:
        write_dump(state, a.dump)
    if a.cert:
        from .fractional import dual_objective
        write_certificate(dual_objective(state), a.cert)
    _emit_report(rep, opts)
    return 0 if rep.passed else 1


def _cmd_round(a, opts) -> int:
    t0 = time.perf_counter()
    tr = read_trace(a.trace)
    obj, params = _params(tr, a.objective, a.max_step)
    state, fcosts, _ = run_fractional(tr, obj, params)
    rep = ExperimentReport("round", {"scheme": a.scheme, "objective": a.objective, "k": tr.k,
                                     "n": tr.n, "T": tr.T})
    rep.costs["fractional"] = CostSummary.from_costs(fcosts)
    if a.scheme == "det":
        sched = round_deterministic(state, check=False)
        rep.checks["threshold_invariant"] = not sched.threshold_violations
        per_page_ok = all(sched.costs[p] <= tr.k * fcosts[p] + 1 + 1e-9 for p in range(1, tr.n + 1))
        rep.checks["per_page_bound"] = per_page_ok
    else:
        beta = default_beta(tr.n, tr.k) if a.beta is None else a.beta
        out = round_randomized(state, beta, opts["seed"])
        sched = out.schedule
        rep.config["beta"] = beta
        rep.seeds = [opts["seed"]]
        rep.details["max_shadow_count"] = float(out.shadow_per_page.max()) if tr.n else 0.0
    rep.costs[sched.algorithm] = CostSummary.from_costs(sched.costs)
    rep.checks["cache_bound"] = sched.max_cache <= tr.k
    if a.schedule:
        write_schedule(sched, a.schedule)
    rep.wall_time_s = time.perf_counter() - t0
    _emit_report(rep, opts)
    return 0 if rep.passed else 1


def _cmd_duel(a, opts) -> int:
    pkw = {"max_step": a.max_step} if a.max_step is not None and a.policy == "minmax-pd" else {}
    if a.adv == "det-layered":
        rep = harness.duel_det_layered(a.k, a.m, a.N, a.policy, slack=a.slack, **pkw)
    elif a.adv == "rand-layered":
        seeds = range(opts["seed"], opts["seed"] + a.seeds)
        rep = harness.duel_rand_layered(a.m, a.N, seeds, a.policy, k=a.k)
    else:
        rep = harness.duel_cruel(a.k, a.length, a.policy, **pkw)
    _emit_report(rep, opts)
    return 0 if rep.passed else 1


def _cmd_certify(a, opts) -> int:
    t0 = time.perf_counter()
    data = read_dump(a.dump)
    checks, cert = certify_dump(data, opts["tol"])
    rep = ExperimentReport("certify", {"dump": a.dump, "k": data.k, "n": data.n, "T": data.T,
                                       "q": data.q, "tol": opts["tol"]})
    rep.certificate = cert.to_dict()
    for chk in checks:
        rep.checks[chk.name] = chk.passed
        if not chk.passed:
            rep.details[f"{chk.name}_violations"] = chk.violations[:5]
    rep.wall_time_s = time.perf_counter() - t0
    _emit_report(rep, opts)
    return 0 if rep.passed else 1


def _cmd_bench(a, opts) -> int:
    suite = json.loads(Path(a.suite).read_text(encoding="utf-8"))
    rows = harness.run_suite(suite, workers=a.workers)
    if opts["format"] == "json":
        text = json.dumps(rows, indent=2)
    else:
        text = rows_to_csv(rows)
    emit(text, opts["out"])
    return 0 if all(r["pass"] for r in rows) else 1


COMMANDS = {"gen": _cmd_gen, "run": _cmd_run, "frac": _cmd_frac, "round": _cmd_round,
            "duel": _cmd_duel, "certify": _cmd_certify, "bench": _cmd_bench}


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    opts = {k: getattr(a, k, v) for k, v in GLOBAL_DEFAULTS.items()}
    try:
        return COMMANDS[a.command](a, opts)
    except (MalformedTraceError, ValueError, OSError) as exc:
        print(f"minmax-paging {a.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
