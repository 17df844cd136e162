"""Request traces, derived request indices and per-page cost accounting.

Pages are dense 1-based integers.  Rounds are 1-based as well, so round ``t``
is ``trace.requests[t - 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

HEADER_PREFIX = "paging-trace v1"


class MalformedTraceError(ValueError):
    """Raised when a trace or trace file violates the format or id range."""


@dataclass(frozen=True)
class RequestTrace:
    k: int
    n: int
    requests: tuple[int, ...]

    def __post_init__(self):
        if self.k < 1:
            raise MalformedTraceError(f"cache size must be >= 1, got {self.k}")
        if self.n < 0:
            raise MalformedTraceError(f"page count must be >= 0, got {self.n}")
        object.__setattr__(self, "requests", tuple(int(p) for p in self.requests))
        for t, p in enumerate(self.requests, start=1):
            if not 1 <= p <= self.n:
                raise MalformedTraceError(
                    f"round {t}: page id {p} outside [1, {self.n}]"
                )

    @property
    def T(self) -> int:
        return len(self.requests)

    def __len__(self) -> int:
        return len(self.requests)

    @classmethod
    def from_ids(cls, ids: Iterable[Hashable], k: int) -> "RequestTrace":
        """Build a trace from arbitrary page identifiers.

        Identifiers are relabelled 1..n in order of first appearance.
        """
        mapping: dict[Hashable, int] = {}
        dense = []
        for pid in ids:
            if pid not in mapping:
                mapping[pid] = len(mapping) + 1
            dense.append(mapping[pid])
        return cls(k=k, n=len(mapping), requests=tuple(dense))

    def distinct_pages(self) -> int:
        return len(set(self.requests))


def write_trace(trace: RequestTrace, path: str | Path) -> None:
    lines = [f"{HEADER_PREFIX} k={trace.k} n={trace.n}"]
    lines.extend(str(p) for p in trace.requests)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_trace(text: str) -> RequestTrace:
    lines = text.splitlines()
    if not lines:
        raise MalformedTraceError("empty trace file")
    header = lines[0].strip().split()
    if " ".join(header[:2]) != HEADER_PREFIX or len(header) != 4:
        raise MalformedTraceError(f"bad header line: {lines[0]!r}")
    fields = {}
    for tok in header[2:]:
        key, sep, value = tok.partition("=")
        if not sep or key not in ("k", "n"):
            raise MalformedTraceError(f"bad header field: {tok!r}")
        try:
            fields[key] = int(value)
        except ValueError:
            raise MalformedTraceError(f"bad header value: {tok!r}") from None
    if set(fields) != {"k", "n"}:
        raise MalformedTraceError("header must carry k= and n=")
    requests = []
    for lineno, line in enumerate(lines[1:], start=2):
        s = line.strip()
        if not s:
            continue
        try:
            requests.append(int(s))
        except ValueError:
            raise MalformedTraceError(f"line {lineno}: not a page id: {s!r}") from None
    return RequestTrace(k=fields["k"], n=fields["n"], requests=tuple(requests))


def read_trace(path: str | Path) -> RequestTrace:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class ConstraintRowView:
    """Covering row of round t: sum of active x >= rhs."""

    t: int
    active: tuple[tuple[int, int], ...]
    rhs: int


@dataclass(frozen=True)
class RequestIndex:
    """Sparse realisation of r(p,t), t(p,j) and B(t).

    ``req_rounds[p]`` lists the rounds at which p is requested, so
    ``t(p, j) = req_rounds[p][j - 1]``.  ``rank[t]`` is r(p_t, t) and
    ``distinct[t]`` is |B(t)|.  Arrays are indexed by round with slot 0 unused.
    """

    trace: RequestTrace
    req_rounds: dict[int, tuple[int, ...]]
    rank: np.ndarray
    distinct: np.ndarray
    first_seen: np.ndarray = field(repr=False)

    @property
    def T(self) -> int:
        return self.trace.T

    @property
    def k(self) -> int:
        return self.trace.k

    def t_of(self, p: int, j: int) -> int:
        """Round of the j-th request to p (j is 1-based)."""
        return self.req_rounds[p][j - 1]

    def r_of(self, p: int, t: int) -> int:
        """Number of requests to p in rounds 1..t."""
        rounds = self.req_rounds.get(p, ())
        return int(np.searchsorted(np.asarray(rounds), t, side="right")) if rounds else 0

    def b_size(self, t: int) -> int:
        return int(self.distinct[t]) if t > 0 else 0

    def b_set(self, t: int) -> frozenset[int]:
        """Distinct pages seen in rounds 1..t."""
        return frozenset(p for p, rounds in self.req_rounds.items() if rounds[0] <= t)

    def next_request(self, p: int, j: int) -> int | None:
        """Round of request j+1 to p, or None if the j-th is the last one."""
        rounds = self.req_rounds[p]
        return rounds[j] if j < len(rounds) else None

    def column_interval(self, p: int, j: int) -> tuple[int, int]:
        """Rounds in which variable (p, j) is active, inclusive.

        The interval is t(p,j)+1 .. t(p,j+1)-1, running to T for the last
        request of p; it may be empty (start > end).
        """
        start = self.t_of(p, j) + 1
        nxt = self.next_request(p, j)
        end = self.T if nxt is None else nxt - 1
        return start, end

    def variables(self) -> list[tuple[int, int]]:
        """All variables (p, j) ordered by creation round."""
        out = [None] * self.T
        for p, rounds in self.req_rounds.items():
            for j, t in enumerate(rounds, start=1):
                out[t - 1] = (p, j)
        return out

    def rhs(self, t: int) -> int:
        return int(self.distinct[t]) - self.trace.k


def build_request_index(trace: RequestTrace) -> RequestIndex:
    T = trace.T
    rank = np.zeros(T + 1, dtype=np.int64)
    distinct = np.zeros(T + 1, dtype=np.int64)
    counts: dict[int, int] = {}
    rounds: dict[int, list[int]] = {}
    first_seen = np.zeros(trace.n + 1, dtype=np.int64)
    for t, p in enumerate(trace.requests, start=1):
        if not 1 <= p <= trace.n:
            raise MalformedTraceError(f"round {t}: page id {p} outside [1, {trace.n}]")
        c = counts.get(p, 0) + 1
        counts[p] = c
        if c == 1:
            rounds[p] = []
            first_seen[p] = t
        rounds[p].append(t)
        rank[t] = c
        distinct[t] = len(counts)
    req_rounds = {p: tuple(r) for p, r in rounds.items()}
    return RequestIndex(trace, req_rounds, rank, distinct, first_seen)


def constraint_row(index: RequestIndex, t: int) -> ConstraintRowView:
    if not 1 <= t <= index.T:
        raise IndexError(f"round {t} outside [1, {index.T}]")
    pt = index.trace.requests[t - 1]
    active = []
    for p, rounds in sorted(index.req_rounds.items()):
        if p == pt or rounds[0] > t:
            continue
        j = int(np.searchsorted(np.asarray(rounds), t, side="right"))
        active.append((p, j))
    return ConstraintRowView(t=t, active=tuple(active), rhs=index.rhs(t))


@dataclass
class CostVector:
    """Per-page fault counts; ``faults[p - 1]`` belongs to page p."""

    faults: np.ndarray
    model: str = "fetch"

    def __post_init__(self):
        self.faults = np.asarray(self.faults, dtype=float)
        if np.any(self.faults < 0):
            raise ValueError("fault counts must be nonnegative")

    @classmethod
    def zeros(cls, n: int, model: str = "fetch") -> "CostVector":
        return cls(np.zeros(n), model)

    def __getitem__(self, page: int) -> float:
        return float(self.faults[page - 1])

    @property
    def minmax(self) -> float:
        return minmax_cost(self.faults)

    @property
    def l1(self) -> float:
        return lq_cost(self.faults, 1.0)

    def to_list(self) -> list[float]:
        return [float(v) for v in self.faults]


def _as_array(cv) -> np.ndarray:
    if isinstance(cv, CostVector):
        return cv.faults
    return np.asarray(cv, dtype=float)


def minmax_cost(cv) -> float:
    v = _as_array(cv)
    return float(v.max()) if v.size else 0.0


def lq_cost(cv, q: float) -> float:
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    v = _as_array(cv)
    if not v.size:
        return 0.0
    if math.isinf(q):
        return float(v.max())
    if q == 1:
        return float(np.sum(v))
    top = float(v.max())
    if top == 0.0:
        return 0.0
    # scale by the max entry to keep v**q finite for large q
    return top * float(np.sum((v / top) ** q)) ** (1.0 / q)


def fetch_to_eviction(fetch: Sequence[float], final_cache: Iterable[int]) -> np.ndarray:
    """Eviction-model counts from fetch-model counts and the final cache."""
    out = np.asarray(fetch, dtype=float).copy()
    for p in final_cache:
        out[p - 1] -= 1
    return out
