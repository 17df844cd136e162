"""Online paging policies behind a common serve/cache interface."""

from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np

from .fractional import FractionalSolver
from .objectives import default_params, parse_objective
from .rounding import RoundingInvariantError
from .trace import CostVector, RequestTrace


class PolicyUsageError(RuntimeError):
    pass


class OnlinePolicy:
    """Base class: subclasses implement ``_on_hit`` and ``_choose_victim``."""

    name = "policy"

    def __init__(self, k: int | None = None):
        self.k: int | None = None
        if k is not None:
            self.init(k)

    def init(self, k: int) -> None:
        if k < 1:
            raise ValueError(f"cache size must be >= 1, got {k}")
        self.k = k
        self._cache: set[int] = set()
        self._faults: dict[int, int] = {}
        self.t = 0
        self._reset()

    def _reset(self) -> None:
        pass

    def cache(self) -> frozenset[int]:
        self._require_init()
        return frozenset(self._cache)

    def __contains__(self, page: int) -> bool:
        return page in self._cache

    def fault_count(self, page: int) -> int:
        return self._faults.get(page, 0)

    def faults(self, n: int | None = None) -> CostVector:
        n = max(self._faults, default=0) if n is None else n
        v = np.zeros(n)
        for p, c in self._faults.items():
            v[p - 1] = c
        return CostVector(v, "fetch")

    def _require_init(self) -> None:
        if self.k is None:
            raise PolicyUsageError(f"{self.name}: serve called before init(k)")

    def serve(self, page: int) -> tuple[bool, int | None]:
        """Serve one request; returns (fault, evicted page or None)."""
        self._require_init()
        self.t += 1
        self._observe(page)
        if page in self._cache:
            self._on_hit(page)
            return False, None
        self._faults[page] = self._faults.get(page, 0) + 1
        victim = None
        if len(self._cache) >= self.k:
            victim = self._choose_victim(page)
            self._cache.remove(victim)
            self._on_evict(victim)
        self._cache.add(page)
        self._on_insert(page)
        return True, victim

    # hooks
    def _observe(self, page: int) -> None:
        pass

    def _on_hit(self, page: int) -> None:
        pass

    def _on_insert(self, page: int) -> None:
        pass

    def _on_evict(self, page: int) -> None:
        pass

    def _choose_victim(self, page: int) -> int:
        raise NotImplementedError


class LRU(OnlinePolicy):
    name = "lru"

    def _reset(self):
        self._order: OrderedDict[int, None] = OrderedDict()

    def _on_hit(self, page):
        self._order.move_to_end(page)

    def _on_insert(self, page):
        self._order[page] = None

    def _on_evict(self, page):
        del self._order[page]

    def _choose_victim(self, page):
        return next(iter(self._order))


class FIFO(LRU):
    name = "fifo"

    def _on_hit(self, page):
        pass


class Marking(OnlinePolicy):
    """Randomized marking: evict a uniformly random unmarked page."""

    name = "marking"

    def __init__(self, k: int | None = None, seed: int = 0):
        self.seed = seed
        super().__init__(k)

    def _reset(self):
        self._rng = np.random.default_rng(self.seed)
        self._marked: set[int] = set()

    def _on_hit(self, page):
        self._marked.add(page)

    def _on_insert(self, page):
        self._marked.add(page)

    def _on_evict(self, page):
        self._marked.discard(page)

    def _choose_victim(self, page):
        unmarked = sorted(self._cache - self._marked)
        if not unmarked:
            self._marked.clear()
            unmarked = sorted(self._cache)
        return unmarked[int(self._rng.integers(len(unmarked)))]


class GreedyMinFaults(OnlinePolicy):
    """Keep the pages with the most faults so far: evict the fewest-faults page."""

    name = "greedy-min-faults"

    def _reset(self):
        self._last_use: dict[int, int] = {}

    def _observe(self, page):
        self._last_use[page] = self.t

    def _choose_victim(self, page):
        return min(self._cache, key=lambda q: (self._faults.get(q, 0), self._last_use[q], q))


class RoundedFractional(OnlinePolicy):
    """Primal-dual fractional solver rounded online with the 1/k threshold rule.

    After each request is solved fractionally, a fault evicts the cached page
    with the largest eviction fraction among those at or above 1/k.
    """

    name = "minmax-pd"

    def __init__(self, k: int | None = None, n: int | None = None, objective: str = "minmax",
                 max_step: float | None = None, backend: str | None = None,
                 tol: float | None = None):
        self.n = n
        self.objective = objective
        self.max_step = max_step
        self.backend = backend
        self.tol = tol
        super().__init__(k)

    def _reset(self):
        if self.n is None:
            raise PolicyUsageError("minmax-pd needs the page universe size n")
        obj = parse_objective(self.objective, self.n)
        extra = {} if self.max_step is None else {"max_step": self.max_step}
        params = default_params(self.k, obj.q, None, **extra)
        self.solver = FractionalSolver(self.k, obj, params, n=self.n, record=False,
                                       track_rates=False, backend=self.backend)
        tol = 2 * params.eps_feas(1.0) if self.tol is None else self.tol
        self._thresh = 1.0 / self.k - tol

    def _observe(self, page):
        self.solver.step(page)

    def _choose_victim(self, page):
        best, bx = None, -math.inf
        for q in sorted(self._cache):
            xq = self.solver.current_x(q)
            if xq >= self._thresh and xq > bx:
                best, bx = q, xq
        if best is None:
            raise RoundingInvariantError(f"round {self.t}: no cached page at or above the 1/k threshold")
        return best


POLICY_NAMES = ("lru", "fifo", "marking:<seed>", "greedy-min-faults", "minmax-pd")


def make_policy(spec: str, k: int, n: int | None = None, **kwargs) -> OnlinePolicy:
    s = spec.strip().lower()
    if s == "lru":
        return LRU(k)
    if s == "fifo":
        return FIFO(k)
    if s == "marking" or s.startswith("marking:"):
        seed = int(s.split(":", 1)[1]) if ":" in s else 0
        return Marking(k, seed=seed)
    if s == "greedy-min-faults":
        return GreedyMinFaults(k)
    if s == "minmax-pd":
        return RoundedFractional(k, n=n, **kwargs)
    raise ValueError(f"unknown policy {spec!r}; choose from {', '.join(POLICY_NAMES)}")


def run_policy(policy: OnlinePolicy, trace: RequestTrace) -> CostVector:
    for p in trace.requests:
        policy.serve(p)
    return policy.faults(trace.n)
