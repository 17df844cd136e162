"""Adversarial request generators.

Adaptive generators drive a live policy instance and return the trace it
was served.  Layered generators also return phase metadata, which the
offline layered strategy needs to know which page each phase promotes.
Pages are 1-based; the layered universe at the top layer is 1..n.
"""

from __future__ import annotations

import json
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from .policies import OnlinePolicy
from .trace import RequestTrace


class PolicyInterfaceError(RuntimeError):
    pass


class UnsupportedConfigError(ValueError):
    pass


def cruel_sequence(policy: OnlinePolicy, page_set: Sequence[int], fault_target: int | None = None,
                   length: int | None = None, universe: set[int] | None = None) -> list[int]:
    """Always request the smallest-id page of ``page_set`` missing from the policy's cache.

    Every emitted request faults.  Stops once some page of the set has
    faulted ``fault_target`` times during this call, or after ``length``
    requests, whichever comes first.  The requests are served to ``policy``.
    """
    pages = sorted(page_set)
    if policy.k is None:
        raise PolicyInterfaceError("policy must be initialised")
    if len(pages) != policy.k + 1:
        raise ValueError(f"cruel sequence needs k+1 = {policy.k + 1} pages, got {len(pages)}")
    if fault_target is None and length is None:
        raise ValueError("give a fault target or a length")
    base = {p: policy.fault_count(p) for p in pages}
    out: list[int] = []
    _check_universe(policy, universe)
    while length is None or len(out) < length:
        nxt = None
        for p in pages:
            if p not in policy:
                nxt = p
                break
        if nxt is None:
            raise PolicyInterfaceError(f"policy holds all {len(pages)} pages with k={policy.k}")
        fault, _ = policy.serve(nxt)
        if not fault:
            raise PolicyInterfaceError(f"policy reported a hit on absent page {nxt}")
        out.append(nxt)
        if fault_target is not None and policy.fault_count(nxt) - base[nxt] >= fault_target:
            break
    _check_universe(policy, universe)
    return out


def _check_universe(policy: OnlinePolicy, universe: set[int] | None) -> None:
    if universe is not None and not policy.cache() <= universe:
        raise PolicyInterfaceError("policy cache holds pages outside the universe")


def _layer_meta(kind: str, k: int, m: int, N: int, seed: int | None, arity: int) -> dict:
    return {"generator": kind, "k": k, "m": m, "N": N, "seed": seed, "arity": arity,
            "layers": [], "phases": []}


def det_layered(policy: OnlinePolicy, k: int, m: int, N: int) -> tuple[RequestTrace, dict]:
    """Layered cruel construction; the last promoted page collects m*N policy faults."""
    if policy.k != k:
        raise ValueError("policy cache size does not match k")
    n = (k + 1) ** m
    meta = _layer_meta("det-layered", k, m, N, None, k + 1)
    if m > 0 and N < 10 * n:
        warnings.warn(f"N={N} is small relative to n={n}; bounds are loose", stacklevel=2)
    layer = list(range(1, n + 1))
    reqs: list[int] = []
    universe = set(layer)
    for ell in range(m, 0, -1):
        meta["layers"].append({"layer": ell, "pages": list(layer)})
        nxt_layer = []
        for i in range((k + 1) ** (ell - 1)):
            block = layer[(k + 1) * i:(k + 1) * (i + 1)]
            start = len(reqs) + 1
            seg = cruel_sequence(policy, block, fault_target=N, universe=universe)
            reqs.extend(seg)
            promoted = seg[-1]
            nxt_layer.append(promoted)
            meta["phases"].append({"layer": ell, "phase": i, "page_set": block,
                                   "promoted": promoted, "start": start, "end": len(reqs)})
        layer = nxt_layer
    meta["layers"].append({"layer": 0, "pages": list(layer)})
    meta["final_page"] = layer[0] if m > 0 else None
    return RequestTrace(k, n, tuple(reqs)), meta


def rand_layered_k2(m: int, N: int, seed: int, k: int = 2) -> tuple[RequestTrace, dict]:
    """Oblivious layered trace for k=2: N round-robin passes per phase, random promotion."""
    if k != 2:
        raise UnsupportedConfigError("the round-robin layered construction is defined for k=2")
    rng = np.random.default_rng(seed)
    n = 3 ** m
    meta = _layer_meta("rand-layered", k, m, N, seed, 3)
    layer = list(range(1, n + 1))
    reqs: list[int] = []
    for ell in range(m, 0, -1):
        meta["layers"].append({"layer": ell, "pages": list(layer)})
        nxt_layer = []
        for i in range(3 ** (ell - 1)):
            block = layer[3 * i:3 * (i + 1)]
            start = len(reqs) + 1
            reqs.extend(block * N)
            promoted = block[int(rng.integers(3))]
            nxt_layer.append(promoted)
            meta["phases"].append({"layer": ell, "phase": i, "page_set": block,
                                   "promoted": promoted, "start": start, "end": len(reqs)})
        layer = nxt_layer
    meta["layers"].append({"layer": 0, "pages": list(layer)})
    meta["final_page"] = layer[0] if m > 0 else None
    return RequestTrace(k, n, tuple(reqs)), meta


def rand_layered_uniform(k: int, m: int, N: int, seed: int) -> tuple[RequestTrace, dict]:
    """Layered trace with N uniform requests per phase; experimental, no bound attached."""
    rng = np.random.default_rng(seed)
    n = (k + 1) ** m
    meta = _layer_meta("rand-uniform", k, m, N, seed, k + 1)
    layer = list(range(1, n + 1))
    reqs: list[int] = []
    for ell in range(m, 0, -1):
        meta["layers"].append({"layer": ell, "pages": list(layer)})
        nxt_layer = []
        for i in range((k + 1) ** (ell - 1)):
            block = layer[(k + 1) * i:(k + 1) * (i + 1)]
            start = len(reqs) + 1
            reqs.extend(block[j] for j in rng.integers(k + 1, size=N))
            promoted = block[int(rng.integers(k + 1))]
            nxt_layer.append(promoted)
            meta["phases"].append({"layer": ell, "phase": i, "page_set": block,
                                   "promoted": promoted, "start": start, "end": len(reqs)})
        layer = nxt_layer
    meta["layers"].append({"layer": 0, "pages": list(layer)})
    meta["final_page"] = layer[0] if m > 0 else None
    return RequestTrace(k, n, tuple(reqs)), meta


def intro_lru_bad(n: int, k: int) -> RequestTrace:
    """p0, then k fresh pages, then p0 again, m times over; n = m*k + 1 pages.

    p0 is page 1 and p_i is page i+1.
    """
    if n < 1 or (n - 1) % k:
        raise ValueError(f"need n = m*k + 1, got n={n}, k={k}")
    m = (n - 1) // k
    reqs = [1]
    for b in range(m):
        reqs.extend(range(b * k + 2, (b + 1) * k + 2))
        reqs.append(1)
    return RequestTrace(k, n, tuple(reqs))


def intro_greedy_bad(policy: OnlinePolicy, N: int, repetitions: int,
                     max_pairs: int | None = None) -> RequestTrace:
    """Trace that keeps fault-count greedy paying for fresh pages (k=2).

    Step 1 requests pages 1,2,3 round-robin N times.  Each repetition then
    alternates two fresh pages until the policy holds both (capped at
    ``max_pairs`` pairs), followed by N round-robin passes over them and a
    third fresh page.
    """
    if policy.k != 2:
        raise UnsupportedConfigError("this construction is stated for k=2")
    cap = max_pairs if max_pairs is not None else 4 * N * (repetitions + 2) + 10
    reqs: list[int] = []

    def serve(p):
        policy.serve(p)
        reqs.append(p)

    for _ in range(N):
        for p in (1, 2, 3):
            serve(p)
    for r in range(1, repetitions + 1):
        a, b, c = 3 * r + 1, 3 * r + 2, 3 * r + 3
        for _ in range(cap):
            serve(a)
            serve(b)
            if a in policy and b in policy:
                break
        for _ in range(N):
            for p in (a, b, c):
                serve(p)
    return RequestTrace(2, 3 * (repetitions + 1), tuple(reqs))


def write_metadata(meta: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")


def read_metadata(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
