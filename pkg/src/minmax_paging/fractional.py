"""Online primal-dual solver for fractional paging with a convex objective.

Variables are identified by their creation round: request t creates
x_{p_t, r(p_t, t)}, stored at slot ``t`` of every per-variable array.  The
variable is active (appears in the covering row) in rounds t+1 up to the
round before the next request to p_t, or up to T.

The dual variables are kept implicitly: y_t = r * dtau_t, and z_{p,j}
accrues at rate r from the moment x_{p,j} saturates at 1 until the variable
stops being active.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .objectives import (
    ConvexObjective,
    SolverParams,
    competitive_bound,
    default_params,
)
from .trace import CostVector, RequestIndex, RequestTrace, build_request_index

DEFAULT_STEP_LIMIT = 50_000_000


class SolverError(RuntimeError):
    pass


class InfeasibleTraceError(SolverError):
    pass


class FractionalSolver:
    """Processes one request at a time; the state after each call is final for that round."""

    def __init__(
        self,
        k: int,
        obj: ConvexObjective,
        params: SolverParams,
        n: int | None = None,
        record: bool = False,
        track_rates: bool = True,
        backend: str | None = None,
        step_limit: int = DEFAULT_STEP_LIMIT,
    ):
        self.k = k
        self.obj = obj
        self.params = params
        self.q = float(obj.q)
        self.inv_k = 1.0 / k
        self.record = record
        self.track_rates = track_rates
        self.step_limit = step_limit
        self.backend = backend or kernels.BACKEND
        self._active = kernels.get_active_set(self.backend)(max(16, (n or 16) + 1))

        self.t = 0
        self.requests: list[int] = []
        self.cur_var: dict[int, int] = {}
        self.frozen_sum: dict[int, float] = {}
        self.n_sat_active = 0

        # per-variable, slot 0 unused
        self.var_page = [0]
        self.var_c = [0.0]
        self.var_x = [0.0]
        self.var_smin = [math.inf]
        self.var_sat_round = [0]
        self.var_sat_off = [0.0]
        self.var_end = [0]

        # per-round, slot 0 unused
        self.dtau = [0.0]
        self.rhs = [0]
        self.row_sum = [0.0]
        self.delta_f = [0.0]
        self.delta_lin_time = [0.0]
        self.steps = [0]
        self.changes: list[list[tuple[int, float]]] = [[]]

    # -- helpers -----------------------------------------------------------
    def _grad(self, s: float) -> float:
        return 1.0 if self.q == 1.0 else self.q * s ** (self.q - 1.0)

    def _close_var(self, v: int) -> None:
        """Freeze v at the end of its active interval."""
        if v in self._active:
            x = self._active.remove(v)
            self.var_x[v] = x
        else:
            x = self.var_x[v]
            if self.var_sat_round[v]:
                self.n_sat_active -= 1
        self.var_smin[v] = 1.0 / self._grad(self.var_c[v] + x)
        self.var_end[v] = self.t - 1

    def current_x(self, page: int) -> float:
        """Eviction fraction of the latest variable of ``page`` (0 if never requested)."""
        v = self.cur_var.get(page)
        if v is None:
            return 0.0
        if v in self._active:
            return self._active.get_x(v)
        return self.var_x[v]

    # -- one round -----------------------------------------------------------
    def step(self, page: int) -> None:
        self.t += 1
        t = self.t
        self.requests.append(page)
        old = self.cur_var.get(page)
        if old is None:
            self.frozen_sum[page] = 0.0
        else:
            self._close_var(old)
            self.frozen_sum[page] += self.var_x[old]
        rhs = len(self.cur_var) + (old is None) - self.k
        act = self._active
        m = len(act)
        dtau = 0.0
        nsteps = 0
        df = 0.0
        zinc_time = 0.0
        changed: list[tuple[int, float]] = []
        if rhs > 0:
            need = rhs - self.n_sat_active
            if need > m + 1e-12:
                raise InfeasibleTraceError(
                    f"round {t}: row needs {need} but only {m} free variables"
                )
            eps = self.params.eps_feas(rhs)
            if self.track_rates:
                f_before = act.power_sum(self.q)
            status, dtau, nsteps = act.advance(
                self.q, self.inv_k, float(need), self.params.max_step, eps, self.step_limit
            )
            if status == kernels.BAD_GRADIENT:
                raise SolverError(
                    f"round {t}: non-finite or zero gradient at q={self.q}; "
                    f"active variables {act.items()}"
                )
            if status == kernels.STEP_LIMIT:
                raise SolverError(f"round {t}: step limit {self.step_limit} exceeded")
            zinc_time = self.n_sat_active * dtau
            if self.track_rates and dtau > 0:
                df = act.power_sum(self.q) - f_before
            if self.record and dtau > 0:
                changed = act.items()
            for v, off in act.pop_saturated():
                zinc_time += dtau - off
                self.var_sat_round[v] = t
                self.var_sat_off[v] = off
                self.var_x[v] = 1.0
                self.n_sat_active += 1
        if self.track_rates:
            self.row_sum.append(act.sum_x() + self.n_sat_active if rhs > 0 else 0.0)
        # new variable for the requested page, active from round t+1
        c = self.frozen_sum[page]
        x0 = self.params.eps_start
        self.var_page.append(page)
        self.var_c.append(c)
        self.var_x.append(x0)
        self.var_smin.append(math.inf)
        self.var_sat_round.append(0)
        self.var_sat_off.append(0.0)
        self.var_end.append(0)
        self.cur_var[page] = t
        act.add(t, x0, c)
        if self.record:
            changed.append((t, x0))
            self.changes.append(changed)
        self.dtau.append(dtau)
        self.rhs.append(rhs)
        self.delta_f.append(df)
        self.delta_lin_time.append(rhs * dtau - zinc_time if rhs > 0 else 0.0)
        self.steps.append(nsteps)

    def finish(self, trace: RequestTrace | None = None) -> "FractionalState":
        """Close the run: last variables end at round T."""
        T = self.t
        for v, x in self._active.items():
            self.var_x[v] = x
        for page, v in self.cur_var.items():
            self.var_smin[v] = 1.0 / self._grad(self.var_c[v] + self.var_x[v])
            self.var_end[v] = T
        if trace is None:
            n = max(self.requests, default=0)
            trace = RequestTrace(self.k, n, tuple(self.requests))
        return FractionalState(
            trace=trace,
            index=build_request_index(trace),
            obj=self.obj,
            params=self.params,
            x=np.asarray(self.var_x),
            page_of=np.asarray(self.var_page, dtype=np.int64),
            s_min=np.asarray(self.var_smin),
            sat_round=np.asarray(self.var_sat_round, dtype=np.int64),
            sat_off=np.asarray(self.var_sat_off),
            end_round=np.asarray(self.var_end, dtype=np.int64),
            dtau=np.asarray(self.dtau),
            rhs=np.asarray(self.rhs, dtype=np.int64),
            row_sum=np.asarray(self.row_sum),
            delta_f=np.asarray(self.delta_f),
            delta_lin_time=np.asarray(self.delta_lin_time),
            steps=np.asarray(self.steps, dtype=np.int64),
            changes=self.changes if self.record else None,
            backend=self.backend,
        )


@dataclass
class DualCertificate:
    primal_value: float
    linear_term: float
    conjugate_term: float
    dual_value: float
    ratio: float
    bound: float
    usable: bool = True

    def to_dict(self) -> dict:
        return {
            "primal": self.primal_value,
            "dual_linear": self.linear_term,
            "dual_conjugate": self.conjugate_term,
            "dual": self.dual_value,
            "ratio": self.ratio,
            "bound": self.bound,
        }


@dataclass
class FractionalState:
    """Completed run.  Per-variable arrays are indexed by creation round (slot 0 unused)."""

    trace: RequestTrace
    index: RequestIndex
    obj: ConvexObjective
    params: SolverParams
    x: np.ndarray
    page_of: np.ndarray
    s_min: np.ndarray
    sat_round: np.ndarray
    sat_off: np.ndarray
    end_round: np.ndarray
    dtau: np.ndarray
    rhs: np.ndarray
    row_sum: np.ndarray
    delta_f: np.ndarray
    delta_lin_time: np.ndarray
    steps: np.ndarray
    changes: list | None = None
    backend: str = "python"
    _cum: np.ndarray | None = field(default=None, repr=False)

    @property
    def T(self) -> int:
        return self.trace.T

    @property
    def k(self) -> int:
        return self.trace.k

    @property
    def r(self) -> float:
        return self.params.r

    @property
    def y(self) -> np.ndarray:
        return self.params.r * self.dtau

    @property
    def tau_of_round(self) -> np.ndarray:
        return np.cumsum(self.dtau)

    def _interval_time(self, a: int, b: int) -> float:
        if self._cum is None:
            self._cum = np.concatenate([[0.0], np.cumsum(self.dtau[1:])])
        if b < a:
            return 0.0
        return float(self._cum[b] - self._cum[a - 1])

    def active_time(self) -> np.ndarray:
        """Clock time during which each variable grew (active and below 1)."""
        out = np.zeros(self.T + 1)
        for v in range(1, self.T + 1):
            ts = int(self.sat_round[v])
            if ts:
                out[v] = self._interval_time(v + 1, ts - 1) + float(self.sat_off[v])
            else:
                out[v] = self._interval_time(v + 1, int(self.end_round[v]))
        return out

    def z(self) -> np.ndarray:
        out = np.zeros(self.T + 1)
        for v in range(1, self.T + 1):
            ts = int(self.sat_round[v])
            if ts:
                out[v] = self.r * (
                    float(self.dtau[ts]) - float(self.sat_off[v])
                    + self._interval_time(ts + 1, int(self.end_round[v]))
                )
        return out

    def dual_slack(self) -> np.ndarray:
        """(A^T y - z) per variable."""
        return self.r * self.active_time()

    def page_costs(self) -> CostVector:
        sums = np.zeros(self.trace.n)
        np.add.at(sums, self.page_of[1:] - 1, self.x[1:])
        return CostVector(sums, model="eviction")

    def primal_value(self) -> float:
        s = self.page_costs().faults
        return float(np.sum(s ** self.obj.q))

    def final_gradient(self) -> np.ndarray:
        s = self.page_costs().faults
        g = self.obj.page_gradient(s)
        out = np.zeros(self.T + 1)
        out[1:] = g[self.page_of[1:] - 1]
        return out

    def x_at_rounds(self):
        """Yield (t, {var: x}) after each round, replaying recorded changes.

        The same dict is updated in place between yields.
        """
        if self.changes is None:
            raise ValueError("run was not recorded; pass record=True")
        cur: dict[int, float] = {}
        for t in range(1, self.T + 1):
            for v, val in self.changes[t]:
                cur[v] = val
            yield t, cur


def run_fractional(
    trace: RequestTrace,
    obj: ConvexObjective,
    params: SolverParams | None = None,
    record: bool = True,
    backend: str | None = None,
) -> tuple[FractionalState, CostVector, DualCertificate]:
    params = params or default_params(trace.k, obj.q, trace.T)
    solver = FractionalSolver(trace.k, obj, params, n=trace.n, record=record, backend=backend)
    for p in trace.requests:
        solver.step(p)
    state = solver.finish(trace)
    return state, state.page_costs(), dual_objective(state)


def dual_objective(state: FractionalState, index: RequestIndex | None = None,
                   obj: ConvexObjective | None = None) -> DualCertificate:
    obj = obj or state.obj
    rhs = state.rhs[1:].astype(float)
    y = state.y[1:]
    z = state.z()[1:]
    linear = float(np.dot(np.maximum(rhs, 0.0), y)) - float(np.sum(z))
    slack = state.dual_slack()[1:]
    conj = _conjugate_by_page(obj, slack, state.page_of[1:], state.trace.n)
    primal = state.primal_value()
    usable = math.isfinite(conj)
    dual = linear - conj if usable else -math.inf
    if dual > 0:
        ratio = primal / dual
    elif primal == 0 and dual == 0:
        ratio = 1.0
    else:
        ratio = math.inf
    return DualCertificate(primal, linear, conj, dual, ratio, competitive_bound(state.k, obj.q), usable)


def _conjugate_by_page(obj: ConvexObjective, w: np.ndarray, pages: np.ndarray, n: int) -> float:
    if not len(w):
        return 0.0
    vmax = np.full(n, -math.inf)
    np.maximum.at(vmax, pages - 1, w)
    vmax = vmax[np.isfinite(vmax)]
    return float(np.sum(obj.page_conjugate(vmax)))


# -- certificate checks ------------------------------------------------------

@dataclass
class CheckReport:
    name: str
    passed: bool
    checked: int
    violations: list = field(default_factory=list)
    worst: float = 0.0

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "worst": self.worst,
            "violations": self.violations[:20],
        }


def verify_feasibility(state: FractionalState) -> CheckReport:
    """Replay recorded x and re-evaluate every covering row."""
    viol = []
    worst = -math.inf
    idx = state.index
    n_checked = 0
    for t, cur in state.x_at_rounds():
        rhs = int(state.rhs[t])
        if rhs <= 0:
            continue
        pt = state.trace.requests[t - 1]
        total = 0.0
        for p in idx.req_rounds:
            if p == pt or idx.first_seen[p] > t:
                continue
            v = _latest_var(idx, p, t)
            total += cur.get(v, 0.0)
        eps = state.params.eps_feas(rhs)
        gap = rhs - total
        worst = max(worst, gap)
        n_checked += 1
        if gap > eps:
            viol.append({"t": t, "rhs": rhs, "sum": total})
    return CheckReport("feasibility", not viol, n_checked, viol, worst if n_checked else 0.0)


def _latest_var(idx: RequestIndex, p: int, t: int) -> int:
    rounds = idx.req_rounds[p]
    j = int(np.searchsorted(np.asarray(rounds), t, side="right"))
    return rounds[j - 1]


def verify_dual_slack(state: FractionalState, tol: float = 1e-6) -> CheckReport:
    slack = state.dual_slack()
    lnk = math.log(state.k + 1)
    viol = []
    worst = -math.inf
    for v in range(1, state.T + 1):
        bound = state.r / state.s_min[v] * lnk
        gap = slack[v] - bound
        worst = max(worst, gap)
        if gap > tol:
            viol.append({"var": _var_label(state, v), "slack": slack[v], "bound": bound})
    return CheckReport("dual_slack", not viol, state.T, viol, worst if state.T else 0.0)


def verify_x_lower_bound(state: FractionalState, index: RequestIndex | None = None,
                         params: SolverParams | None = None, tol: float | None = None) -> CheckReport:
    """x_bar >= (exp((s'/r)(sum y - z)) - 1)/k for every variable."""
    tol = 1e-6 * state.k if tol is None else tol
    act = state.active_time()
    viol = []
    worst = -math.inf
    for v in range(1, state.T + 1):
        expo = state.s_min[v] * act[v]
        lower = math.expm1(expo) / state.k
        gap = lower - state.x[v]
        worst = max(worst, gap)
        if gap > tol:
            viol.append({"var": _var_label(state, v), "x": state.x[v], "lower": lower})
    return CheckReport("x_lower_bound", not viol, state.T, viol, worst if state.T else 0.0)


def per_round_rate_check(state: FractionalState, tol: float = 1e-9) -> CheckReport:
    """Per round: increase of f <= (2/r) * increase of the linear dual term."""
    viol = []
    worst = -math.inf
    for t in range(1, state.T + 1):
        lhs = float(state.delta_f[t])
        rhs = 2.0 * float(state.delta_lin_time[t])
        gap = lhs - rhs
        worst = max(worst, gap)
        if gap > tol * max(1.0, abs(lhs)):
            viol.append({"t": t, "delta_f": lhs, "two_over_r_delta_linear": rhs})
    return CheckReport("per_round_rate", not viol, state.T, viol, worst if state.T else 0.0)


def verify_weak_duality(cert: DualCertificate, tol: float = 1e-9) -> CheckReport:
    ok = (not cert.usable) or cert.primal_value >= cert.dual_value - tol * max(1.0, abs(cert.primal_value))
    return CheckReport("weak_duality", ok, 1, [] if ok else [cert.to_dict()],
                       cert.dual_value - cert.primal_value)


def verify_competitive_ratio(cert: DualCertificate, min_dual: float = 1e-9) -> CheckReport:
    if cert.dual_value <= min_dual:
        return CheckReport("competitive_ratio", True, 0)
    ok = cert.primal_value <= cert.bound * cert.dual_value
    return CheckReport("competitive_ratio", ok, 1, [] if ok else [cert.to_dict()],
                       cert.primal_value - cert.bound * cert.dual_value)


def _var_label(state: FractionalState, v: int) -> tuple[int, int]:
    p = int(state.page_of[v])
    return p, int(state.index.rank[v])


def certify_state(state: FractionalState, tol: float = 1e-6) -> list[CheckReport]:
    cert = dual_objective(state)
    checks = [
        verify_dual_slack(state, tol),
        verify_x_lower_bound(state),
        verify_weak_duality(cert),
        per_round_rate_check(state),
        verify_competitive_ratio(cert),
    ]
    if state.changes is not None:
        checks.insert(0, verify_feasibility(state))
    return checks


# -- solution dump -------------------------------------------------------------

DUMP_HEADER = "frac-dump v1"


def write_dump(state: FractionalState, path: str | Path) -> None:
    if state.changes is None:
        raise ValueError("dump needs a recorded run")
    p = state.params
    lines = [
        f"{DUMP_HEADER} k={state.k} n={state.trace.n} T={state.T} q={state.obj.q:.17g} "
        f"r={p.r:.17g} delta={p.delta:.17g} eps_feas_rel={p.eps_feas_rel:.17g} "
        f"eps_feas_floor={p.eps_feas_floor:.17g}"
    ]
    y = state.y
    z = state.z()
    r = p.r
    zinc = r * (np.maximum(state.rhs, 0) * state.dtau) - r * state.delta_lin_time
    for t in range(1, state.T + 1):
        parts = [
            f"t {t} req={state.trace.requests[t - 1]} rhs={int(state.rhs[t])} "
            f"y={y[t]:.17g} dz={zinc[t]:.17g} df={state.delta_f[t]:.17g}"
        ]
        seen = {}
        for v, val in state.changes[t]:
            seen[v] = val
        for v in range(1, t + 1):
            if int(state.sat_round[v]) == t:
                seen[v] = 1.0
        for v, val in seen.items():
            pg, j = _var_label(state, v)
            parts.append(f"p={pg} j={j} x={val:.17g}")
        lines.append(" ".join(parts))
    for v in range(1, state.T + 1):
        pg, j = _var_label(state, v)
        lines.append(f"v p={pg} j={j} x={state.x[v]:.17g} z={z[v]:.17g} smin={state.s_min[v]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_certificate(cert: DualCertificate, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cert.to_dict(), indent=2) + "\n", encoding="utf-8")


class CorruptDumpError(ValueError):
    pass


@dataclass
class DumpData:
    k: int
    n: int
    T: int
    q: float
    r: float
    eps_feas_rel: float
    eps_feas_floor: float
    requests: list[int]
    rhs: list[int]
    y: list[float]
    dz: list[float]
    df: list[float]
    round_x: list[dict[tuple[int, int], float]]
    final: dict[tuple[int, int], tuple[float, float, float]]


def _kv(tokens):
    out = {}
    for tok in tokens:
        key, sep, val = tok.partition("=")
        if not sep:
            raise CorruptDumpError(f"bad token {tok!r}")
        out.setdefault(key, []).append(val)
    return out


def read_dump(path: str | Path) -> DumpData:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(DUMP_HEADER):
        raise CorruptDumpError("missing frac-dump header")
    try:
        h = {k: v[0] for k, v in _kv(lines[0][len(DUMP_HEADER):].split()).items()}
        data = DumpData(
            k=int(h["k"]), n=int(h["n"]), T=int(h["T"]), q=float(h["q"]), r=float(h["r"]),
            eps_feas_rel=float(h["eps_feas_rel"]), eps_feas_floor=float(h["eps_feas_floor"]),
            requests=[], rhs=[], y=[], dz=[], df=[], round_x=[], final={},
        )
        for ln in lines[1:]:
            tok = ln.split()
            if tok[0] == "t":
                if int(tok[1]) != len(data.requests) + 1:
                    raise CorruptDumpError(f"round {tok[1]} out of order")
                kv = _kv(tok[2:])
                data.requests.append(int(kv["req"][0]))
                data.rhs.append(int(kv["rhs"][0]))
                data.y.append(float(kv["y"][0]))
                data.dz.append(float(kv["dz"][0]))
                data.df.append(float(kv["df"][0]))
                data.round_x.append({
                    (int(p), int(j)): float(x)
                    for p, j, x in zip(kv.get("p", []), kv.get("j", []), kv.get("x", []))
                })
            elif tok[0] == "v":
                kv = _kv(tok[1:])
                key = (int(kv["p"][0]), int(kv["j"][0]))
                data.final[key] = (float(kv["x"][0]), float(kv["z"][0]), float(kv["smin"][0]))
            else:
                raise CorruptDumpError(f"unknown line kind {tok[0]!r}")
    except (KeyError, ValueError, IndexError) as exc:
        if isinstance(exc, CorruptDumpError):
            raise
        raise CorruptDumpError(str(exc)) from exc
    if len(data.requests) != data.T or len(data.final) != data.T:
        raise CorruptDumpError("dump is truncated")
    return data


def certify_dump(data: DumpData, tol: float = 1e-6) -> tuple[list[CheckReport], DualCertificate]:
    """Re-check a dumped run using only the dumped values."""
    k, r, q = data.k, data.r, data.q
    obj = ConvexObjective.linear() if q == 1 else ConvexObjective(q)
    trace = RequestTrace(k, data.n, tuple(data.requests))
    idx = build_request_index(trace)
    checks = []

    # feasibility, replaying x per round
    cur: dict[tuple[int, int], float] = {}
    viol = []
    for t in range(1, data.T + 1):
        cur.update(data.round_x[t - 1])
        rhs = data.rhs[t - 1]
        if rhs <= 0:
            continue
        pt = data.requests[t - 1]
        total = 0.0
        for p, rounds in idx.req_rounds.items():
            if p == pt or rounds[0] > t:
                continue
            j = int(np.searchsorted(np.asarray(rounds), t, side="right"))
            total += cur.get((p, j), 0.0)
        if rhs - total > max(data.eps_feas_rel * rhs, data.eps_feas_floor):
            viol.append({"t": t, "rhs": rhs, "sum": total})
    checks.append(CheckReport("feasibility", not viol, data.T, viol))

    y = np.concatenate([[0.0], np.asarray(data.y)])
    cum = np.cumsum(y)
    lnk = math.log(k + 1)
    slack_viol, xlb_viol = [], []
    slack_by_var = {}
    for p, rounds in idx.req_rounds.items():
        for j in range(1, len(rounds) + 1):
            a, b = idx.column_interval(p, j)
            ysum = float(cum[b] - cum[a - 1]) if b >= a else 0.0
            x, z, smin = data.final[(p, j)]
            slack = ysum - z
            slack_by_var[(p, j)] = slack
            bound = r / smin * lnk
            if slack - bound > tol:
                slack_viol.append({"var": (p, j), "slack": slack, "bound": bound})
            lower = math.expm1(min(smin / r * slack, 700.0)) / k
            if lower - x > 1e-6 * k:
                xlb_viol.append({"var": (p, j), "x": x, "lower": lower})
    checks.append(CheckReport("dual_slack", not slack_viol, data.T, slack_viol))
    checks.append(CheckReport("x_lower_bound", not xlb_viol, data.T, xlb_viol))

    rate_viol = []
    for t in range(1, data.T + 1):
        lin = max(data.rhs[t - 1], 0) * data.y[t - 1] - data.dz[t - 1]
        lhs = data.df[t - 1]
        if lhs - (2.0 / r) * lin > 1e-9 * max(1.0, abs(lhs)) + 1e-12:
            rate_viol.append({"t": t, "delta_f": lhs, "two_over_r_delta_linear": 2.0 / r * lin})
    checks.append(CheckReport("per_round_rate", not rate_viol, data.T, rate_viol))

    sums = np.zeros(data.n)
    zsum = 0.0
    for (p, _), (x, z, _) in data.final.items():
        sums[p - 1] += x
        zsum += z
    primal = float(np.sum(sums ** q))
    linear = float(np.dot(np.maximum(np.asarray(data.rhs, dtype=float), 0.0), data.y)) - zsum
    vmax = np.full(data.n, -math.inf)
    for (p, _), s in slack_by_var.items():
        vmax[p - 1] = max(vmax[p - 1], s)
    conj = float(np.sum(obj.page_conjugate(vmax[np.isfinite(vmax)]))) if data.T else 0.0
    usable = math.isfinite(conj)
    dual = linear - conj if usable else -math.inf
    ratio = primal / dual if dual > 0 else (1.0 if primal == 0 and dual == 0 else math.inf)
    cert = DualCertificate(primal, linear, conj, dual, ratio, competitive_bound(k, q), usable)
    checks.append(verify_weak_duality(cert))
    checks.append(verify_competitive_ratio(cert))
    return checks, cert
