"""Convex objectives of the form f(x) = sum_p (sum_j x_{p,j})^q and solver parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

CONJUGATE_Q1_TOL = 1e-9


class ObjectiveDomainError(ValueError):
    pass


@dataclass(frozen=True)
class ConvexObjective:
    """Sum of q-th powers of per-page coordinate sums.

    ``partition[i]`` is the page owning coordinate i.  q == 1 is the linear
    (total fault) objective.
    """

    q: float
    kind: str = "lq"
    partition: np.ndarray | None = None

    def __post_init__(self):
        if not self.q >= 1:
            raise ObjectiveDomainError(f"growth exponent must be >= 1, got {self.q}")
        if self.kind not in ("lq", "linear"):
            raise ObjectiveDomainError(f"unknown objective kind {self.kind!r}")
        if self.kind == "linear" and self.q != 1:
            raise ObjectiveDomainError("linear objective has q == 1")

    @classmethod
    def linear(cls) -> "ConvexObjective":
        return cls(1.0, "linear")

    def with_partition(self, partition) -> "ConvexObjective":
        return replace(self, partition=np.asarray(partition, dtype=np.int64))

    @property
    def label(self) -> str:
        return "l1" if self.q == 1 else f"lq:{self.q:.17g}"

    def _pages(self, x: np.ndarray) -> np.ndarray:
        if self.partition is None:
            return np.zeros(len(x), dtype=np.int64)
        if len(self.partition) != len(x):
            raise ValueError("coordinate vector does not match the page partition")
        return self.partition

    def page_sums(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Return (inverse index per coordinate, per-page sums)."""
        x = np.asarray(x, dtype=float)
        _, inv = np.unique(self._pages(x), return_inverse=True)
        sums = np.bincount(inv, weights=x) if len(x) else np.zeros(0)
        return inv, sums

    def power(self, s):
        return np.power(s, self.q)

    def page_gradient(self, s):
        """d/ds of s**q, elementwise."""
        s = np.asarray(s, dtype=float)
        if self.q == 1:
            return np.ones_like(s)
        return self.q * np.power(s, self.q - 1)

    def page_conjugate(self, v):
        """sup_{u >= 0} v*u - u**q for each entry of v."""
        v = np.maximum(np.asarray(v, dtype=float), 0.0)
        if self.q == 1:
            return np.where(v <= 1.0 + CONJUGATE_Q1_TOL, 0.0, math.inf)
        q = self.q
        return (q - 1.0) * np.power(v / q, q / (q - 1.0))


def eval_f(obj: ConvexObjective, x) -> float:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ObjectiveDomainError("objective is defined on the nonnegative orthant")
    _, sums = obj.page_sums(x)
    return float(np.sum(obj.power(sums)))


def grad_f(obj: ConvexObjective, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inv, sums = obj.page_sums(x)
    return obj.page_gradient(sums)[inv] if len(x) else np.zeros(0)


def conjugate_f(obj: ConvexObjective, w) -> float:
    """Fenchel conjugate sup_{u >= 0} <w, u> - f(u); math.inf when unbounded.

    Within one page the supremum puts all mass on the largest coefficient.
    """
    w = np.asarray(w, dtype=float)
    if not len(w):
        return 0.0
    pages = obj._pages(w)
    _, inv = np.unique(pages, return_inverse=True)
    vmax = np.full(inv.max() + 1, -math.inf)
    np.maximum.at(vmax, inv, w)
    return float(np.sum(obj.page_conjugate(vmax)))


def growth_check(obj: ConvexObjective, x, rtol: float = 1e-9) -> bool:
    """<grad f(x), x> <= q f(x), up to relative tolerance."""
    x = np.asarray(x, dtype=float)
    lhs = float(np.dot(grad_f(obj, x), x))
    rhs = obj.q * eval_f(obj, x)
    return lhs <= rhs + rtol * max(abs(rhs), abs(lhs))


def parse_objective(spec: str, n: int) -> ConvexObjective:
    """``l1``, ``lq:<q>`` or ``minmax`` (lq with q = log2 n, at least 1)."""
    s = spec.strip().lower()
    if s == "l1":
        return ConvexObjective.linear()
    if s == "minmax":
        q = max(1.0, math.log2(n)) if n > 0 else 1.0
        return ConvexObjective.linear() if q == 1 else ConvexObjective(q)
    if s.startswith("lq:"):
        try:
            q = float(s[3:])
        except ValueError:
            raise ObjectiveDomainError(f"bad exponent in {spec!r}") from None
        return ConvexObjective.linear() if q == 1 else ConvexObjective(q)
    raise ObjectiveDomainError(f"unknown objective {spec!r}; use l1, lq:<q> or minmax")


@dataclass(frozen=True)
class SolverParams:
    r: float
    delta: float
    eps_start: float
    eps_feas_rel: float = 1e-9
    eps_feas_floor: float = 1e-12
    max_step: float = 1e-3

    def __post_init__(self):
        for name in ("r", "delta", "eps_start", "eps_feas_rel", "eps_feas_floor", "max_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def eps_feas(self, rhs: float) -> float:
        return max(self.eps_feas_rel * rhs, self.eps_feas_floor)


def optimal_delta(k: int, q: float) -> float:
    """Maximiser of delta/(2 ln(k+1)) - (q-1) delta^(q/(q-1))."""
    return (2.0 * q * math.log(k + 1)) ** (-(q - 1.0))


def competitive_bound(k: int, q: float) -> float:
    """(2 q ln(k+1))^q, the primal/dual ratio guaranteed with delta*."""
    return (2.0 * q * math.log(k + 1)) ** q


def minmax_fractional_bound(n: int, k: int) -> float:
    """2e ln(n) ln(k+1)."""
    return 2.0 * math.e * math.log(n) * math.log(k + 1)


def default_params(k: int, q: float, T: int | None = None, **overrides) -> SolverParams:
    if k < 1 or q < 1:
        raise ValueError("need k >= 1 and q >= 1")
    delta = optimal_delta(k, q)
    r = delta / math.log(k + 1)
    eps_start = 1e-6 / T if T else 1e-12
    return SolverParams(r=r, delta=delta, eps_start=eps_start, **overrides)
