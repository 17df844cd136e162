"""Offline reference schedules: GreedyLFD, Belady, the layered adversary's own strategy, and exact search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .trace import CostVector, RequestTrace

NEVER = math.inf
SEARCH_LIMIT = 10**7


class SearchSpaceTooLarge(ValueError):
    pass


class MissingMetadataError(ValueError):
    pass


@dataclass
class OfflineSchedule:
    """Per-round decisions; ``evictions[t-1]`` is the page evicted at round t or None."""

    trace: RequestTrace
    faults: list[bool]
    evictions: list[int | None]
    costs: CostVector
    algorithm: str
    final_cache: frozenset = field(default_factory=frozenset)

    @property
    def minmax(self) -> float:
        return self.costs.minmax

    def eviction_costs(self) -> CostVector:
        out = self.costs.faults.copy()
        for p in self.final_cache:
            out[p - 1] -= 1
        return CostVector(out, "eviction")


def replay_schedule(trace: RequestTrace, evictions: Sequence[int | None], k: int | None = None) -> CostVector:
    """Fetch-model costs of a schedule given as per-round evictions; checks validity."""
    k = trace.k if k is None else k
    cache: set[int] = set()
    faults = np.zeros(trace.n)
    for t, (p, ev) in enumerate(zip(trace.requests, evictions), start=1):
        if ev is not None:
            if ev not in cache or ev == p:
                raise ValueError(f"round {t}: cannot evict {ev}")
            cache.remove(ev)
        if p not in cache:
            faults[p - 1] += 1
            cache.add(p)
        if len(cache) > k:
            raise ValueError(f"round {t}: cache holds {len(cache)} > {k} pages")
    return CostVector(faults, "fetch")


def next_use(requests: Sequence[int]) -> list[float]:
    """nxt[i] = index of the next request to requests[i] after position i, or inf."""
    nxt: list[float] = [NEVER] * len(requests)
    last: dict[int, int] = {}
    for i in range(len(requests) - 1, -1, -1):
        p = requests[i]
        nxt[i] = last.get(p, NEVER)
        last[p] = i
    return nxt


def _greedy_lfd_core(requests: Sequence[int], k: int, n: int):
    """GreedyLFD over a request list (0-based positions).  Returns (faults, evictions, counts, cache)."""
    nxt = next_use(requests)
    counts = [0] * (n + 1)
    top = 0
    cache: dict[int, float] = {}  # page -> position of its next request
    faults = []
    evictions: list[int | None] = []
    for i, p in enumerate(requests):
        ev = None
        if p in cache:
            faults.append(False)
        else:
            faults.append(True)
            counts[p] += 1
            if counts[p] > top:
                top = counts[p]
            if len(cache) >= k:
                # pages never requested again go first, then pages below the max
                cands = ([q for q in cache if cache[q] == NEVER]
                         or [q for q in cache if counts[q] < top] or list(cache))
                ev = max(cands, key=lambda q: (cache[q], -q))
                del cache[ev]
        cache[p] = nxt[i]
        evictions.append(ev)
    return faults, evictions, counts, cache


def greedy_lfd(trace: RequestTrace, k: int | None = None) -> OfflineSchedule:
    """Among cached pages below the current maximum fault count, evict the one used farthest ahead."""
    k = trace.k if k is None else k
    faults, ev, counts, cache = _greedy_lfd_core(trace.requests, k, trace.n)
    return OfflineSchedule(trace, faults, ev, CostVector(np.asarray(counts[1:], float), "fetch"),
                           "greedy-lfd", frozenset(cache))


def belady(trace: RequestTrace, k: int | None = None) -> OfflineSchedule:
    """Classic farthest-in-future eviction; minimises total faults."""
    k = trace.k if k is None else k
    nxt = next_use(trace.requests)
    cache: dict[int, float] = {}
    counts = np.zeros(trace.n)
    faults, evictions = [], []
    for i, p in enumerate(trace.requests):
        ev = None
        if p in cache:
            faults.append(False)
        else:
            faults.append(True)
            counts[p - 1] += 1
            if len(cache) >= k:
                ev = max(cache, key=lambda q: (cache[q], -q))
                del cache[ev]
        cache[p] = nxt[i]
        evictions.append(ev)
    return OfflineSchedule(trace, faults, evictions, CostVector(counts, "fetch"), "belady",
                           frozenset(cache))


def lfd_upper_bound(T: int, k: int) -> float:
    """Worst-case GreedyLFD cost on k+1 pages and T requests."""
    return 2.0 * (T - 2 * k - 1) / (2 * k + k * (k + 1)) + 2.0


def layered_offline_cost(trace: RequestTrace, meta: dict | None) -> CostVector:
    """Cost of the clairvoyant strategy for a layered adversarial trace.

    In each phase the page that will be promoted is kept in cache from its
    first request on; the other pages of the phase share the remaining k-1
    slots under GreedyLFD.  The cache is emptied (free in the fetch model)
    between phases.
    """
    if not meta or "phases" not in meta:
        raise MissingMetadataError("layered offline cost needs the generator's phase metadata")
    k = trace.k
    costs = np.zeros(trace.n)
    for ph in meta["phases"]:
        start, end, promoted = int(ph["start"]), int(ph["end"]), int(ph["promoted"])
        seg = trace.requests[start - 1:end]
        if promoted in seg:
            costs[promoted - 1] += 1
        rest = [p for p in seg if p != promoted]
        if rest:
            if k - 1 < 1:
                for p in rest:
                    costs[p - 1] += 1
            else:
                _, _, counts, _ = _greedy_lfd_core(rest, k - 1, trace.n)
                costs += np.asarray(counts[1:], dtype=float)
    return CostVector(costs, "fetch")


def det_layered_offline_bound(m: int, N: int, k: int) -> float:
    return m + 2.0 * (N - 1) / (k - 1) + 2.0


def brute_force_minmax_opt(trace: RequestTrace, model: str = "fetch",
                           limit: int = SEARCH_LIMIT) -> OfflineSchedule:
    """Exact min-max optimum over demand-paging schedules by branch and bound.

    Demand schedules suffice: any schedule can be made lazy without adding
    a fetch of any page.  ``model='eviction'`` minimises the max eviction
    count (fetches minus final residency) instead.
    """
    if model not in ("fetch", "eviction"):
        raise ValueError(f"unknown cost model {model!r}")
    k, n, reqs = trace.k, trace.n, trace.requests
    seen: set[int] = set()
    full_at = None
    for t, p in enumerate(reqs):
        seen.add(p)
        if len(seen) > k:
            full_at = t
            break
    branching = 0 if full_at is None else len(reqs) - full_at
    if k > 1 and branching * math.log(k) > math.log(limit):
        raise SearchSpaceTooLarge(f"search space k^{branching} exceeds {limit}")

    def value(counts, cache):
        if model == "fetch":
            return max(counts[1:], default=0)
        return max((c - (1 if p in cache else 0) for p, c in enumerate(counts) if p), default=0)

    inc = greedy_lfd(trace)
    best = [inc.costs.minmax if model == "fetch" else inc.eviction_costs().minmax, list(inc.evictions)]
    slack = 0 if model == "fetch" else 1
    memo: dict[tuple, list[tuple]] = {}
    evs: list[int | None] = []

    def dominated(key, counts):
        lst = memo.setdefault(key, [])
        for other in lst:
            if all(a <= b for a, b in zip(other, counts)):
                return True
        lst.append(tuple(counts))
        return False

    def dfs(t, cache, counts, cur):
        if cur - slack >= best[0]:
            return
        if t == len(reqs):
            v = value(counts, cache)
            if v < best[0]:
                best[0] = v
                best[1] = list(evs)
            return
        if dominated((t, frozenset(cache)), counts):
            return
        p = reqs[t]
        if p in cache:
            evs.append(None)
            dfs(t + 1, cache, counts, cur)
            evs.pop()
            return
        counts[p] += 1
        ncur = max(cur, counts[p])
        if len(cache) < k:
            evs.append(None)
            dfs(t + 1, cache | {p}, counts, ncur)
            evs.pop()
        else:
            for q in sorted(cache):
                evs.append(q)
                dfs(t + 1, (cache - {q}) | {p}, counts, ncur)
                evs.pop()
        counts[p] -= 1

    dfs(0, frozenset(), [0] * (n + 1), 0)
    evictions = best[1]
    costs = replay_schedule(trace, evictions)
    final = _final_cache(trace, evictions)
    return OfflineSchedule(trace, _faults(trace, evictions), evictions, costs, "brute-force", final)


def _final_cache(trace: RequestTrace, evictions) -> frozenset:
    cache: set[int] = set()
    for p, ev in zip(trace.requests, evictions):
        if ev is not None:
            cache.discard(ev)
        cache.add(p)
    return frozenset(cache)


def _faults(trace: RequestTrace, evictions) -> list[bool]:
    cache: set[int] = set()
    out = []
    for p, ev in zip(trace.requests, evictions):
        if ev is not None:
            cache.discard(ev)
        out.append(p not in cache)
        cache.add(p)
    return out
