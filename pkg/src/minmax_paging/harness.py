"""Experiment drivers shared by the command line and the benchmark suites."""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import adversaries as adv
from .fractional import certify_state, run_fractional
from .objectives import default_params, minmax_fractional_bound, parse_objective
from .offline import (
    SearchSpaceTooLarge,
    brute_force_minmax_opt,
    det_layered_offline_bound,
    greedy_lfd,
    layered_offline_cost,
    lfd_upper_bound,
)
from .policies import make_policy, run_policy
from .report import CostSummary, ExperimentReport
from .trace import RequestTrace

DEFAULT_RATIO_SLACK = 0.9
ADVERSARIES = ("cruel", "det-layered", "rand-layered", "rand-uniform", "intro-lru", "intro-greedy", "random")


def det_layered_target(k: int, m: int, N: int) -> float:
    """Finite-N ratio the layered construction forces on any deterministic policy."""
    return (k - 1) * m * N / ((k - 1) * (m + 2) + 2 * (N - 1))


def random_trace(n: int, k: int, T: int, seed: int) -> RequestTrace:
    rng = np.random.default_rng(seed)
    return RequestTrace(k, n, tuple(int(p) for p in rng.integers(1, n + 1, size=T)))


def generate(kind: str, k: int = 2, m: int = 1, N: int = 10, n_pages: int | None = None,
             seed: int = 0, vs: str = "lru", length: int | None = None, reps: int = 1,
             policy_kwargs: dict | None = None):
    """Build a trace; adaptive kinds serve it to a fresh ``vs`` policy.

    Returns (trace, metadata or None, policy or None).
    """
    policy_kwargs = policy_kwargs or {}
    if kind == "cruel":
        pol = make_policy(vs, k, k + 1, **policy_kwargs)
        T = length if length is not None else None
        reqs = adv.cruel_sequence(pol, range(1, k + 2), fault_target=None if T else N, length=T)
        return RequestTrace(k, k + 1, tuple(reqs)), None, pol
    if kind == "det-layered":
        pol = make_policy(vs, k, (k + 1) ** m, **policy_kwargs)
        tr, meta = adv.det_layered(pol, k, m, N)
        return tr, meta, pol
    if kind == "rand-layered":
        tr, meta = adv.rand_layered_k2(m, N, seed, k=k)
        return tr, meta, None
    if kind == "rand-uniform":
        tr, meta = adv.rand_layered_uniform(k, m, N, seed)
        return tr, meta, None
    if kind == "intro-lru":
        return adv.intro_lru_bad(n_pages, k), None, None
    if kind == "intro-greedy":
        pol = make_policy(vs, k, 3 * (reps + 1), **policy_kwargs)
        tr = adv.intro_greedy_bad(pol, N, reps)
        return tr, None, pol
    if kind == "random":
        if n_pages is None or length is None:
            raise ValueError("random traces need --n-pages and a length")
        return random_trace(n_pages, k, length, seed), None, None
    raise ValueError(f"unknown adversary {kind!r}; choose from {', '.join(ADVERSARIES)}")


def _cost_summary(cv) -> CostSummary:
    return CostSummary.from_costs(cv)


def cmd_run(trace: RequestTrace, policy: str, **policy_kwargs) -> ExperimentReport:
    t0 = time.perf_counter()
    pol = make_policy(policy, trace.k, trace.n, **policy_kwargs)
    costs = run_policy(pol, trace)
    off = greedy_lfd(trace).costs
    rep = ExperimentReport("run", {"policy": policy, "k": trace.k, "n": trace.n, "T": trace.T})
    rep.costs[policy] = _cost_summary(costs)
    rep.offline["greedy-lfd"] = _cost_summary(off)
    rep.ratios["policy/greedy-lfd"] = costs.minmax / off.minmax if off.minmax else math.nan
    rep.checks["cache_bound"] = len(pol.cache()) <= trace.k
    rep.wall_time_s = time.perf_counter() - t0
    return rep


def cmd_frac(trace: RequestTrace, objective: str = "minmax", max_step: float | None = None,
             tol: float = 1e-6, opt_limit: int = 10**6) -> tuple[ExperimentReport, object]:
    t0 = time.perf_counter()
    obj = parse_objective(objective, trace.n)
    extra = {} if max_step is None else {"max_step": max_step}
    params = default_params(trace.k, obj.q, trace.T, **extra)
    state, costs, cert = run_fractional(trace, obj, params)
    rep = ExperimentReport("frac", {"objective": objective, "q": obj.q, "k": trace.k, "n": trace.n,
                                    "T": trace.T, "r": params.r, "delta": params.delta,
                                    "max_step": params.max_step})
    rep.costs["fractional"] = _cost_summary(costs)
    rep.certificate = cert.to_dict()
    rep.bounds["primal_dual"] = cert.bound
    if trace.n > 1:
        rep.bounds["minmax_fractional"] = minmax_fractional_bound(trace.n, trace.k)
    for chk in certify_state(state, tol):
        rep.checks[chk.name] = chk.passed
        if not chk.passed:
            rep.details[f"{chk.name}_violations"] = chk.violations[:5]
    rep.ratios["primal/dual"] = cert.ratio
    if trace.T and trace.n <= 8:
        try:
            opt = brute_force_minmax_opt(trace, "eviction", limit=opt_limit)
            opt_v = opt.eviction_costs().minmax
            rep.offline["brute-force"] = _cost_summary(opt.eviction_costs())
            if opt_v > 0:
                rep.ratios["fractional/opt"] = costs.minmax / opt_v
        except SearchSpaceTooLarge:
            rep.details["opt"] = "instance too large for exact search"
    rep.details["total_steps"] = int(state.steps.sum())
    rep.wall_time_s = time.perf_counter() - t0
    return rep, state


def duel_det_layered(k: int, m: int, N: int, policy: str, slack: float = DEFAULT_RATIO_SLACK,
                     **policy_kwargs) -> ExperimentReport:
    t0 = time.perf_counter()
    rep = ExperimentReport("duel", {"adv": "det-layered", "k": k, "m": m, "N": N, "policy": policy,
                                    "ratio_slack": slack, **policy_kwargs})
    if m == 0:
        rep.details["degenerate"] = "m=0 gives an empty trace; ratio undefined"
        rep.checks["nondegenerate"] = False
        return rep
    tr, meta, pol = generate("det-layered", k=k, m=m, N=N, vs=policy, policy_kwargs=policy_kwargs)
    costs = pol.faults(tr.n)
    off = layered_offline_cost(tr, meta)
    final = meta["final_page"]
    ratio = costs.minmax / off.minmax
    target = det_layered_target(k, m, N)
    rep.costs[policy] = _cost_summary(costs)
    rep.offline["layered"] = _cost_summary(off)
    rep.ratios["policy/offline"] = ratio
    rep.bounds["target_ratio"] = target
    rep.bounds["offline_bound"] = det_layered_offline_bound(m, N, k)
    rep.details.update({"T": tr.T, "final_page": final, "final_page_faults": pol.fault_count(final)})
    rep.checks["policy_cost_mN"] = costs.minmax == m * N and pol.fault_count(final) == m * N
    rep.checks["offline_bound"] = off.minmax <= rep.bounds["offline_bound"]
    rep.checks["ratio"] = ratio >= slack * target
    rep.wall_time_s = time.perf_counter() - t0
    return rep


def _rand_layered_trial(args):
    m, N, seed, policy, k = args
    tr, meta = adv.rand_layered_k2(m, N, seed, k=k)
    spec = f"marking:{seed}" if policy == "marking" else policy
    pol = make_policy(spec, k, tr.n)
    run_policy(pol, tr)
    off = layered_offline_cost(tr, meta)
    final = meta["final_page"]
    return pol.fault_count(final), pol.faults(tr.n).minmax, off.minmax


def workers_from_env(default: int | None = None) -> int:
    cap = os.environ.get("MINMAX_PAGING_WORKERS")
    n = default or os.cpu_count() or 1
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def duel_rand_layered(m: int, N: int, seeds, policy: str = "lru", k: int = 2,
                      mc_slack: float = 0.95, workers: int | None = None) -> ExperimentReport:
    t0 = time.perf_counter()
    seeds = list(seeds)
    rep = ExperimentReport("duel", {"adv": "rand-layered", "k": k, "m": m, "N": N, "policy": policy,
                                    "mc_slack": mc_slack}, seeds=seeds)
    if m == 0:
        rep.details["degenerate"] = "m=0 gives an empty trace; ratio undefined"
        rep.checks["nondegenerate"] = False
        return rep
    jobs = [(m, N, s, policy, k) for s in seeds]
    w = workers if workers is not None else workers_from_env()
    if w > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=w) as ex:
            results = list(ex.map(_rand_layered_trial, jobs, chunksize=max(1, len(jobs) // (4 * w))))
    else:
        results = [_rand_layered_trial(j) for j in jobs]
    final = np.array([r[0] for r in results], dtype=float)
    pol_mm = np.array([r[1] for r in results], dtype=float)
    off_mm = np.array([r[2] for r in results], dtype=float)
    mean = float(final.mean())
    se = float(final.std(ddof=1) / math.sqrt(len(final))) if len(final) > 1 else 0.0
    rep.details.update({
        "final_page_faults_mean": mean,
        "final_page_faults_stderr": se,
        "policy_minmax_mean": float(pol_mm.mean()),
        "offline_minmax_max": float(off_mm.max()),
        "per_seed_offline_minmax": off_mm.tolist(),
        "per_seed_final_faults": final.tolist(),
    })
    rep.bounds["final_page_target"] = mc_slack * m * N / 2
    rep.bounds["offline_bound"] = m + N
    rep.ratios["mean_final/offline_max"] = mean / float(off_mm.max())
    rep.checks["final_page_mean"] = mean >= mc_slack * m * N / 2
    rep.checks["offline_bound_every_seed"] = bool(np.all(off_mm <= m + N))
    rep.wall_time_s = time.perf_counter() - t0
    return rep


def duel_cruel(k: int, length: int, policy: str, **policy_kwargs) -> ExperimentReport:
    t0 = time.perf_counter()
    tr, _, pol = generate("cruel", k=k, length=length, vs=policy, policy_kwargs=policy_kwargs)
    costs = pol.faults(tr.n)
    off = greedy_lfd(tr).costs
    rep = ExperimentReport("duel", {"adv": "cruel", "k": k, "length": length, "policy": policy})
    rep.costs[policy] = _cost_summary(costs)
    rep.offline["greedy-lfd"] = _cost_summary(off)
    rep.ratios["policy/greedy-lfd"] = costs.minmax / off.minmax
    rep.bounds["greedy_lfd_bound"] = lfd_upper_bound(tr.T, k)
    rep.checks["every_request_faults"] = costs.l1 == tr.T
    rep.checks["greedy_lfd_bound"] = off.minmax <= lfd_upper_bound(tr.T, k)
    rep.wall_time_s = time.perf_counter() - t0
    return rep


# -- benchmark suites -----------------------------------------------------------

def run_cell(suite: str, cell: dict) -> list[dict]:
    """Run one suite cell; returns CSV rows (one per algorithm)."""
    t0 = time.perf_counter()
    kind = cell.get("adv", "random")
    policy = cell.get("policy", "lru")
    k = int(cell.get("k", 2))
    m = int(cell.get("m", 1))
    N = int(cell.get("N", 10))
    seed = int(cell.get("seed", 0))
    slack = float(cell.get("ratio_slack", DEFAULT_RATIO_SLACK))
    pkw = {"max_step": cell["max_step"]} if "max_step" in cell and policy == "minmax-pd" else {}
    row = {"suite": suite, "case": cell.get("case", kind), "algorithm": policy, "k": k, "seed": seed}

    if policy.startswith("frac"):
        objective = policy.split(":", 1)[1] if ":" in policy else "minmax"
        tr, _, _ = generate(kind, k=k, m=m, N=N, n_pages=cell.get("n_pages"), seed=seed,
                            length=cell.get("length"), reps=int(cell.get("reps", 1)))
        rep, _ = cmd_frac(tr, objective, cell.get("max_step"))
        row.update(n=tr.n, T=tr.T, minmax_cost=rep.costs["fractional"].minmax,
                   l1_cost=rep.costs["fractional"].l1,
                   offline_minmax=rep.offline["brute-force"].minmax if "brute-force" in rep.offline else None,
                   ratio=rep.certificate["ratio"], bound=rep.certificate["bound"], **{"pass": rep.passed})
    else:
        tr, meta, pol = generate(kind, k=k, m=m, N=N, n_pages=cell.get("n_pages"), seed=seed, vs=policy,
                                 length=cell.get("length"), reps=int(cell.get("reps", 1)),
                                 policy_kwargs=pkw)
        if pol is None:
            spec = f"marking:{seed}" if policy == "marking" else policy
            pol = make_policy(spec, k, tr.n, **pkw)
            run_policy(pol, tr)
        costs = pol.faults(tr.n)
        if meta is not None:
            off = layered_offline_cost(tr, meta).minmax
        else:
            off = greedy_lfd(tr).costs.minmax
        ratio = costs.minmax / off if off else math.nan
        bound, ok = None, True
        if kind == "det-layered":
            bound = slack * det_layered_target(k, m, N)
            ok = (costs.minmax == m * N and off <= det_layered_offline_bound(m, N, k)
                  and ratio >= bound)
        elif kind == "rand-layered":
            bound = float(m + N)
            ok = off <= bound
        elif kind == "cruel":
            bound = lfd_upper_bound(tr.T, k)
            ok = costs.l1 == tr.T and off <= bound
        row.update(n=tr.n, T=tr.T, minmax_cost=costs.minmax, l1_cost=costs.l1, offline_minmax=off,
                   ratio=ratio, bound=bound, **{"pass": ok})
    row["runtime_ms"] = round((time.perf_counter() - t0) * 1000.0, 3)
    return [row]


def _cell_job(args):
    return run_cell(*args)


def validate_suite(suite: dict) -> None:
    if not isinstance(suite, dict) or not isinstance(suite.get("cells"), list):
        raise ValueError("suite file must be a JSON object with a 'cells' list")
    for i, cell in enumerate(suite["cells"]):
        if not isinstance(cell, dict):
            raise ValueError(f"cell {i} is not an object")
        if cell.get("adv", "random") not in ADVERSARIES:
            raise ValueError(f"cell {i}: unknown adversary {cell.get('adv')!r}")


def run_suite(suite: dict, workers: int | None = None) -> list[dict]:
    validate_suite(suite)
    name = suite.get("suite", "suite")
    jobs = [(name, c) for c in suite["cells"]]
    w = workers if workers is not None else workers_from_env()
    if w > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=w) as ex:
            parts = list(ex.map(_cell_job, jobs))
    else:
        parts = [_cell_job(j) for j in jobs]
    return [r for p in parts for r in p]
