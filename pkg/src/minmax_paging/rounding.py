"""Turning fractional eviction schedules into integral caches.

Both schemes consume, for every round t, the vector x(t) of latest-variable
eviction fractions after round t.  Integral costs use the fetch model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .fractional import FractionalState
from .trace import CostVector, RequestTrace

PROB_TOL = 1e-12


class RoundingInvariantError(RuntimeError):
    pass


class TrajectoryCorruptionError(ValueError):
    pass


@dataclass
class ScheduleStep:
    t: int
    fault: bool
    evicted: tuple[int, ...]
    cache: tuple[int, ...]


@dataclass
class IntegralSchedule:
    trace: RequestTrace
    steps: list[ScheduleStep]
    costs: CostVector
    algorithm: str
    seed: int | None = None
    threshold_violations: list = field(default_factory=list)

    @property
    def max_cache(self) -> int:
        return max((len(s.cache) for s in self.steps), default=0)

    def dump_lines(self) -> list[str]:
        out = []
        for s in self.steps:
            ev = ",".join(map(str, s.evicted)) if s.evicted else "-"
            cache = ",".join(map(str, s.cache))
            out.append(f"t {s.t} fault={int(s.fault)} evict={ev} cache={cache}")
        return out


def write_schedule(sched: IntegralSchedule, path: str | Path) -> None:
    Path(path).write_text("\n".join(sched.dump_lines()) + "\n", encoding="utf-8")


def latest_x_matrix(state: FractionalState) -> np.ndarray:
    """Row t (1..T) holds x_{p, r(p,t)} after round t for every page; row 0 is zero.

    Pages not yet requested, and the page requested at t, read 0 (its fresh
    variable starts at the eps seed, which we treat as 0).
    """
    if state.changes is None:
        raise ValueError("run was not recorded; pass record=True")
    n, T = state.trace.n, state.T
    X = np.zeros((T + 1, n))
    cur_var = np.zeros(n + 1, dtype=np.int64)
    row = np.zeros(n)
    for t in range(1, T + 1):
        p_t = state.trace.requests[t - 1]
        for v, val in state.changes[t]:
            p = int(state.page_of[v])
            if v != t and cur_var[p] == v:
                row[p - 1] = val
        cur_var[p_t] = t
        row[p_t - 1] = 0.0
        X[t] = row
    return X


# -- deterministic threshold rounding ----------------------------------------

def round_deterministic(state: FractionalState, tol: float | None = None,
                        check: bool = True) -> IntegralSchedule:
    """Hold every page whose eviction fraction is below 1/k; evict the most-evicted page on a fault."""
    k = state.k
    tol = 2 * state.params.eps_feas(1.0) if tol is None else tol
    X = latest_x_matrix(state)
    thresh = 1.0 / k - tol
    cache: set[int] = set()
    faults = np.zeros(state.trace.n)
    steps = []
    viol = []
    seen: set[int] = set()
    for t, p in enumerate(state.trace.requests, start=1):
        row = X[t]
        seen.add(p)
        evicted: tuple[int, ...] = ()
        fault = p not in cache
        if fault:
            faults[p - 1] += 1
            if len(cache) >= k:
                best = None
                for q in sorted(cache):
                    xq = row[q - 1]
                    if xq >= thresh and (best is None or xq > row[best - 1]):
                        best = q
                if best is None:
                    raise RoundingInvariantError(
                        f"round {t}: no cached page with eviction fraction >= 1/k"
                    )
                cache.remove(best)
                evicted = (best,)
            cache.add(p)
        if check:
            held = [q for q in seen if row[q - 1] < thresh]
            if len(held) > k or any(q not in cache for q in held):
                viol.append({"t": t, "must_hold": sorted(held), "cache": sorted(cache)})
        steps.append(ScheduleStep(t, fault, evicted, tuple(sorted(cache))))
    return IntegralSchedule(state.trace, steps, CostVector(faults, "fetch"), "det-threshold",
                            threshold_violations=viol)


# -- randomized rounding -------------------------------------------------------

def default_beta(n: int, k: int) -> float:
    return 4.0 * math.log(n * k)


def scaled_trajectory(state: FractionalState, beta: float) -> np.ndarray:
    """y_p(t) = min(beta * x_p(t), 1), zero for the page requested at t."""
    return np.minimum(beta * latest_x_matrix(state), 1.0)


def eviction_probabilities(Y: np.ndarray, requests) -> np.ndarray:
    """P[t, p] = (y_p(t) - y_p(t-1)) / (1 - y_p(t-1)) for pages not requested at t."""
    prev = Y[:-1]
    cur = Y[1:]
    inc = cur - prev
    with np.errstate(divide="ignore", invalid="ignore"):
        P = np.where(prev < 1.0, inc / (1.0 - prev), 0.0)
    P = np.vstack([np.zeros((1, Y.shape[1])), P])
    req = np.asarray(requests, dtype=np.int64)
    P[np.arange(1, len(req) + 1), req - 1] = 0.0
    if np.any(P < -PROB_TOL) or np.any(P > 1 + PROB_TOL):
        t, p = np.argwhere((P < -PROB_TOL) | (P > 1 + PROB_TOL))[0]
        raise TrajectoryCorruptionError(f"round {t}, page {p + 1}: eviction probability {P[t, p]}")
    return np.clip(P, 0.0, 1.0)


def uniforms(seed: int, T: int, n: int) -> np.ndarray:
    """Per-seed uniform matrix; row t-1 drives round t."""
    return np.random.Generator(np.random.PCG64(seed)).random((T, n))


@dataclass
class RandomizedOutcome:
    schedule: IntegralSchedule
    shadow: np.ndarray          # shadow[v] = 1 if variable v's scheduled eviction event fired
    shadow_per_page: np.ndarray  # Y_p


def round_randomized(state: FractionalState, beta: float | None = None, seed: int = 0,
                     Y: np.ndarray | None = None, P: np.ndarray | None = None) -> RandomizedOutcome:
    """Randomized rounding of a recorded fractional run.

    Each page owns an independent uniform per round.  The scheduled eviction
    event of a page in round t is U[t, p] < P[t, p]; it evicts the page if cached.
    The event is also tracked while the page is out of the cache, which
    realises one independent Bernoulli draw per variable.
    """
    trace = state.trace
    n, k, T = trace.n, trace.k, trace.T
    beta = default_beta(n, k) if beta is None else beta
    if Y is None:
        Y = scaled_trajectory(state, beta)
    if P is None:
        P = eviction_probabilities(Y, trace.requests)
    U = uniforms(seed, T, n)
    cache: set[int] = set()
    faults = np.zeros(n)
    fired = np.zeros(n, dtype=bool)       # event of the current variable already fired
    cur_var = np.zeros(n + 1, dtype=np.int64)
    shadow = np.zeros(T + 1, dtype=np.int8)
    steps = []
    for t, p in enumerate(trace.requests, start=1):
        fault = p not in cache
        if fault:
            faults[p - 1] += 1
            cache.add(p)
        cur_var[p] = t
        fired[p - 1] = False
        hits = U[t - 1] < P[t]
        evicted = []
        for q in np.flatnonzero(hits & ~fired) + 1:
            q = int(q)
            fired[q - 1] = True
            shadow[cur_var[q]] = 1
            if q in cache:
                cache.remove(q)
                evicted.append(q)
        if len(cache) > k:
            yrow = Y[t]
            victim = max((q for q in cache if q != p), key=lambda q: (yrow[q - 1], -q))
            cache.remove(victim)
            evicted.append(victim)
        steps.append(ScheduleStep(t, fault, tuple(sorted(evicted)), tuple(sorted(cache))))
    per_page = np.zeros(n)
    np.add.at(per_page, state.page_of[1:] - 1, shadow[1:])
    sched = IntegralSchedule(trace, steps, CostVector(faults, "fetch"), "randomized", seed=seed)
    return RandomizedOutcome(sched, shadow, per_page)


@dataclass
class MonteCarloSummary:
    seeds: list[int]
    beta: float
    shadow_freq: np.ndarray     # per variable
    shadow_target: np.ndarray   # y_p(t(p,j+1)-1) per variable
    max_cache: int
    request_always_cached: bool
    mean_max_Y: float
    std_max_Y: float
    page_fault_means: np.ndarray


def monte_carlo_randomized(state: FractionalState, seeds, beta: float | None = None,
                           batch: int = 500) -> MonteCarloSummary:
    """Vectorised randomized rounding over many seeds; replay-identical to round_randomized."""
    trace = state.trace
    n, k, T = trace.n, trace.k, trace.T
    beta = default_beta(n, k) if beta is None else beta
    Y = scaled_trajectory(state, beta)
    P = eviction_probabilities(Y, trace.requests)
    seeds = list(seeds)
    req = np.asarray(trace.requests, dtype=np.int64)
    shadow_sum = np.zeros(T + 1)
    max_cache = 0
    req_ok = True
    maxY = []
    fault_sum = np.zeros(n)
    # reset victim preference: larger y first, then smaller id
    for b0 in range(0, len(seeds), batch):
        bs = seeds[b0:b0 + batch]
        S = len(bs)
        U = np.stack([uniforms(s, T, n) for s in bs])  # S x T x n
        cache = np.zeros((S, n), dtype=bool)
        fired = np.zeros((S, n), dtype=bool)
        cur_var = np.zeros(n, dtype=np.int64)
        shadow = np.zeros((S, T + 1), dtype=np.int8)
        faults = np.zeros((S, n))
        rows = np.arange(S)
        for t in range(1, T + 1):
            p = req[t - 1] - 1
            faults[:, p] += ~cache[:, p]
            cache[:, p] = True
            cur_var[p] = t
            fired[:, p] = False
            hits = (U[:, t - 1, :] < P[t]) & ~fired
            if hits.any():
                fired |= hits
                si, qi = np.nonzero(hits)
                shadow[si, cur_var[qi]] = 1
                cache &= ~hits
            over = cache.sum(axis=1) > k
            if over.any():
                score = np.where(cache, Y[t], -np.inf)
                score[:, p] = -np.inf
                victim = np.argmax(score, axis=1)
                cache[rows[over], victim[over]] = False
            max_cache = max(max_cache, int(cache.sum(axis=1).max()))
            req_ok &= bool(cache[:, p].all())
        shadow_sum += shadow.sum(axis=0)
        per_page = np.zeros((S, n))
        np.add.at(per_page.T, state.page_of[1:] - 1, shadow[:, 1:].T)
        maxY.extend(per_page.max(axis=1).tolist())
        fault_sum += faults.sum(axis=0)
    target = np.zeros(T + 1)
    for v in range(1, T + 1):
        p = int(state.page_of[v])
        end = int(state.end_round[v])
        target[v] = Y[end, p - 1] if end > v else 0.0
    maxY = np.asarray(maxY, dtype=float)
    return MonteCarloSummary(
        seeds=seeds,
        beta=beta,
        shadow_freq=shadow_sum / len(seeds),
        shadow_target=target,
        max_cache=max_cache,
        request_always_cached=req_ok,
        mean_max_Y=float(maxY.mean()),
        std_max_Y=float(maxY.std(ddof=1)) if len(maxY) > 1 else 0.0,
        page_fault_means=fault_sum / len(seeds),
    )


# -- discretization -----------------------------------------------------------

def discretize_quarter_k(x, k: int) -> list[Fraction]:
    """x* = 0 below 1/(8k), otherwise min(ceil(8k x) / (4k), 1), exactly."""
    out = []
    lo = Fraction(1, 8 * k)
    for v in x:
        fv = Fraction(float(v))
        if fv < lo:
            out.append(Fraction(0))
        else:
            out.append(min(Fraction(math.ceil(8 * k * fv), 4 * k), Fraction(1)))
    return out


def discretize_state(state: FractionalState) -> list[Fraction]:
    """Discretized final values, indexed like state.x (slot 0 is 0)."""
    return [Fraction(0)] + discretize_quarter_k(state.x[1:], state.k)


def rows_satisfied(state: FractionalState, values, slack: float = 0.0) -> list[dict]:
    """Rows t whose sum of ``values`` over the active set falls below rhs - slack."""
    idx = state.index
    bad = []
    latest: dict[int, int] = {}
    for t, p_t in enumerate(state.trace.requests, start=1):
        rhs = idx.rhs(t)
        if rhs > 0:
            total = sum(values[v] for q, v in latest.items() if q != p_t)
            if total < rhs - slack:
                bad.append({"t": t, "rhs": rhs, "sum": float(total)})
        latest[p_t] = t
    return bad


# -- max-of-sums concentration ------------------------------------------------

@dataclass
class ConcentrationReport:
    n: int
    trials: int
    mean_max: float
    stderr: float
    bound: float
    passed: bool


def max_fault_concentration_check(samples, means, slack_sigmas: float = 3.0) -> ConcentrationReport:
    """E[max_p Y_p] <= e max_p E[Y_p] + ln n on sampled sums.

    ``samples`` is a trials x n array of per-page sums, ``means`` their
    known expectations.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or not samples.shape[0]:
        raise ValueError("samples must be a nonempty trials x n array")
    trials, n = samples.shape
    mx = samples.max(axis=1)
    mean = float(mx.mean())
    se = float(mx.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    bound = math.e * float(np.max(means)) + math.log(n)
    return ConcentrationReport(n, trials, mean, se, bound, mean <= bound + slack_sigmas * se)
