"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import math
from itertools import product

import numpy as np


def grid_conjugate_1d(v: float, q: float, hi: float = 10.0, step: float = 1e-4) -> float:
    """max over a grid on [0, hi] of v*u - u**q."""
    u = np.arange(0.0, hi + step / 2, step)
    return float(np.max(v * u - u ** q))


def enumerate_demand_schedules(requests, k):
    """Yield (fetch counts, final cache) for every demand-paging schedule.

    On a fault with a full cache every cached page is tried as the victim.
    """
    n = max(requests) if requests else 0

    def rec(i, cache, counts):
        if i == len(requests):
            yield tuple(counts), frozenset(cache)
            return
        p = requests[i]
        if p in cache:
            yield from rec(i + 1, cache, counts)
            return
        counts = list(counts)
        counts[p - 1] += 1
        if len(cache) < k:
            yield from rec(i + 1, cache | {p}, counts)
        else:
            for q in sorted(cache):
                yield from rec(i + 1, (cache - {q}) | {p}, counts)

    yield from rec(0, frozenset(), [0] * n)


def exhaustive_opt(requests, k):
    """(min total fetches, min max fetches, min max evictions) over demand schedules."""
    best_total = best_max = best_evict = math.inf
    for counts, final in enumerate_demand_schedules(requests, k):
        best_total = min(best_total, sum(counts))
        best_max = min(best_max, max(counts))
        ev = [c - (1 if p + 1 in final else 0) for p, c in enumerate(counts)]
        best_evict = min(best_evict, max(ev))
    return best_total, best_max, best_evict


def all_eviction_vectors(requests, k):
    """Every per-page eviction vector (fetches minus final residency) of a demand schedule."""
    out = set()
    for counts, final in enumerate_demand_schedules(requests, k):
        out.add(tuple(c - (1 if p + 1 in final else 0) for p, c in enumerate(counts)))
    return out


def reference_integrator(requests, k, q, dt=1e-5, eps_start=1e-9):
    """Explicit Euler integration of the continuous primal updates.

    Each page's newest variable grows at (x + 1/k) / (q * S_p^(q-1)) while
    its page is active in the current row, until the row is covered.  The
    clock step adapts so that no coordinate moves by more than ``dt``.
    Returns {(page, j): x}.
    """
    x: dict[tuple[int, int], float] = {}
    count: dict[int, int] = {}
    seen: list[int] = []
    for t, p in enumerate(requests, start=1):
        count[p] = count.get(p, 0) + 1
        if count[p] == 1:
            seen.append(p)
        x[(p, count[p])] = eps_start
        rhs = len(seen) - k
        if rhs <= 0:
            continue
        act = [(s, count[s]) for s in seen if s != p]
        while sum(x[v] for v in act) < rhs:
            sums = {}
            for (s, _), val in x.items():
                sums[s] = sums.get(s, 0.0) + val
            rates = {}
            for v in act:
                if x[v] < 1.0:
                    g = 1.0 if q == 1 else q * sums[v[0]] ** (q - 1)
                    rates[v] = (x[v] + 1.0 / k) / g
            # clock step chosen so no coordinate moves by more than dt
            dtau = dt / max(rates.values())
            for v, rate in rates.items():
                x[v] = min(1.0, x[v] + dtau * rate)
    return x


def lru_reference(requests, k):
    """LRU by timestamps, per-page fault counts."""
    last: dict[int, int] = {}
    cache: set[int] = set()
    faults: dict[int, int] = {}
    for t, p in enumerate(requests):
        if p not in cache:
            faults[p] = faults.get(p, 0) + 1
            if len(cache) == k:
                victim = min(cache, key=lambda c: last[c])
                cache.remove(victim)
            cache.add(p)
        last[p] = t
    return faults


def all_traces(n, T):
    for seq in product(range(1, n + 1), repeat=T):
        yield list(seq)
