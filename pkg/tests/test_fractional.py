import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minmax_paging import kernels
from minmax_paging.fractional import (
    CorruptDumpError,
    certify_dump,
    certify_state,
    per_round_rate_check,
    read_dump,
    run_fractional,
    verify_x_lower_bound,
    write_dump,
)
from minmax_paging.objectives import ConvexObjective, default_params, eval_f, parse_objective
from minmax_paging.trace import RequestTrace
from oracles import all_eviction_vectors

# Euler reference (tests/oracles.reference_integrator, dt=1e-6, eps_start=1e-6/12)
# for k=2, q=2 on the trace below.
REF_TRACE = (3, 4, 1, 4, 2, 3, 3, 2, 4, 1, 2, 2)
REF_X = {(1, 1): 1.0, (1, 2): 0.415341, (2, 1): 0.580365, (2, 2): 0.919175, (2, 3): 0.0,
         (2, 4): 0.0, (3, 1): 1.0, (3, 2): 0.0, (3, 3): 1.0, (4, 1): 0.5, (4, 2): 0.795529,
         (4, 3): 0.584661}

backends = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


def solve(reqs, k, objective="minmax", n=None, **kw):
    tr = RequestTrace(k, n or max(reqs), tuple(reqs))
    obj = parse_objective(objective, tr.n)
    return run_fractional(tr, obj, default_params(k, obj.q, tr.T), **kw)


def var_x(state):
    vs = state.index.variables()
    return {vs[v - 1]: float(state.x[v]) for v in range(1, state.T + 1)}


random_traces = st.tuples(st.integers(2, 3), st.integers(3, 7), st.integers(1, 60), st.integers(0, 10**6))


def make_random(k, n, T, seed):
    rng = np.random.default_rng(seed)
    return RequestTrace(k, n, tuple(int(p) for p in rng.integers(1, n + 1, size=T)))


def test_warmup_rounds_are_vacuous():
    state, costs, cert = solve([1, 2, 1, 2], 2)
    assert np.all(state.dtau == 0)
    # only the eps seeds remain, T * eps_start = 1e-6 in total
    assert cert.primal_value == pytest.approx(0, abs=1e-5)
    assert cert.dual_value == 0
    assert costs.minmax == pytest.approx(0, abs=1e-5)


def test_forced_saturation_k1():
    state, _, _ = solve([1, 2], 1)
    assert var_x(state)[(1, 1)] == 1.0


def test_symmetric_split():
    state, _, _ = solve([1, 2, 3], 2)
    x = var_x(state)
    assert 0 < x[(1, 1)] < 1 and 0 < x[(2, 1)] < 1
    assert x[(1, 1)] + x[(2, 1)] == pytest.approx(1, abs=1e-8)
    assert x[(1, 1)] == pytest.approx(0.5, abs=1e-9)


def test_alternating_k1():
    # every eviction variable closed by a later request is forced to 1
    state, costs, _ = solve([1, 2, 1, 2, 1, 2], 1)
    assert costs[1] == pytest.approx(3.0, abs=1e-9)
    assert costs[2] == pytest.approx(2.0, abs=1e-5)
    assert costs[2] <= 2.0 + 1e-5


def test_random_k2_ratio_within_bound():
    tr = make_random(2, 4, 40, 11)
    state, _, cert = run_fractional(tr, ConvexObjective(2))
    assert cert.dual_value > 0
    assert cert.ratio <= (2 * 2 * math.log(3)) ** 2


def test_zero_duals():
    state, _, cert = solve([1, 2, 3], 3)
    assert cert.dual_value == 0 and cert.linear_term == 0 and cert.conjugate_term == 0


def test_dual_below_integral_optimum():
    reqs = [1, 2, 3, 1, 2, 3]
    state, _, cert = solve(reqs, 1, objective="lq:2")
    best = min(sum(v ** 2 for v in vec) for vec in all_eviction_vectors(reqs, 1))
    assert cert.dual_value <= best + 1e-9


def test_matches_reference_integrator():
    state, _, _ = solve(list(REF_TRACE), 2, objective="lq:2", n=4)
    got = var_x(state)
    for key, val in REF_X.items():
        assert got[key] == pytest.approx(val, abs=2e-3), key


def test_x_lower_bound_never_active():
    state, _, _ = solve([1, 1, 2, 2], 1)
    rep = verify_x_lower_bound(state)
    assert rep.passed
    assert state.active_time()[1] == 0


def test_rate_check_vacuous_and_forced():
    state, _, _ = solve([1, 2, 1], 2)
    assert per_round_rate_check(state).passed
    state, _, _ = solve([1, 2, 1, 2, 3, 1], 1)
    assert per_round_rate_check(state).passed


def test_aggregate_rate_bound():
    tr = make_random(3, 8, 120, 4)
    state, _, cert = run_fractional(tr, ConvexObjective(2))
    assert cert.linear_term == pytest.approx(state.r * float(np.sum(state.delta_lin_time)), rel=1e-9)
    assert cert.primal_value <= 2 / state.r * cert.linear_term * (1 + 1e-9) + 1e-9


def test_default_slack_within_delta_gradient():
    tr = make_random(2, 6, 80, 9)
    state, _, cert = run_fractional(tr, ConvexObjective(2))
    grad = state.final_gradient()
    slack = state.dual_slack()
    d = state.params.delta
    assert np.all(slack[1:] <= d * grad[1:] + 1e-6)
    q = state.obj.q
    assert cert.conjugate_term <= d ** (q / (q - 1)) * (q - 1) * cert.primal_value + 1e-6


@settings(max_examples=40)
@given(random_traces, st.sampled_from(["minmax", "lq:2", "l1"]))
def test_certificates_hold(params, objective):
    tr = make_random(*params)
    obj = parse_objective(objective, tr.n)
    state, _, _ = run_fractional(tr, obj)
    for chk in certify_state(state):
        assert chk.passed, (chk.name, chk.violations[:3])


@settings(max_examples=40)
@given(random_traces)
def test_state_invariants(params):
    tr = make_random(*params)
    state, _, _ = run_fractional(tr, ConvexObjective(2))
    assert np.all(state.x >= 0) and np.all(state.x <= 1)
    assert np.all(state.dtau >= 0)
    z = state.z()
    assert np.all(z >= 0)
    assert np.all(state.x[z > 0] == 1.0)
    last = {}
    for t in range(1, tr.T + 1):
        for v, val in state.changes[t]:
            assert val >= last.get(v, 0.0)
            last[v] = val
    # no over-eviction beyond one step of growth per round
    for t, cur in state.x_at_rounds():
        rhs = state.rhs[t]
        if rhs > 0:
            pt = tr.requests[t - 1]
            total = sum(val for v, val in cur.items() if v < t and state.end_round[v] >= t
                        and state.page_of[v] != pt)
            assert total <= rhs + state.params.max_step * tr.n + 1e-9


@settings(max_examples=20)
@given(random_traces)
def test_backends_bit_identical(params):
    tr = make_random(*params)
    runs = [run_fractional(tr, ConvexObjective(2), backend=b)[0] for b in backends]
    for other in runs[1:]:
        assert np.array_equal(runs[0].x, other.x)
        assert np.array_equal(runs[0].dtau, other.dtau)
        assert np.array_equal(runs[0].s_min, other.s_min)


def test_replay_is_deterministic():
    tr = make_random(3, 9, 200, 1)
    a = run_fractional(tr, ConvexObjective(2))[0]
    b = run_fractional(tr, ConvexObjective(2))[0]
    assert np.array_equal(a.x, b.x) and np.array_equal(a.dtau, b.dtau)


def test_eps_start_is_negligible():
    tr = make_random(2, 5, 200, 2)
    state, costs, _ = run_fractional(tr, ConvexObjective(2))
    assert tr.T * state.params.eps_start < 1e-3 * max(costs.minmax, 1.0)


def test_dump_round_trip(tmp_path):
    tr = make_random(3, 7, 80, 5)
    state, _, cert = run_fractional(tr, ConvexObjective(2))
    write_dump(state, tmp_path / "d.txt")
    checks, cert2 = certify_dump(read_dump(tmp_path / "d.txt"))
    assert all(c.passed for c in checks)
    assert cert2.dual_value == pytest.approx(cert.dual_value, rel=1e-9)
    assert cert2.primal_value == pytest.approx(cert.primal_value, rel=1e-9)


def test_inflated_y_breaks_dual_slack(tmp_path):
    tr = make_random(2, 5, 60, 3)
    state, _, _ = run_fractional(tr, ConvexObjective(2))
    write_dump(state, tmp_path / "d.txt")
    data = read_dump(tmp_path / "d.txt")
    t = int(np.argmax(data.y))
    data.y[t] *= 10
    checks, _ = certify_dump(data)
    assert not {c.name: c.passed for c in checks}["dual_slack"]


def test_truncated_dump(tmp_path):
    tr = make_random(2, 5, 30, 3)
    state, _, _ = run_fractional(tr, ConvexObjective(2))
    write_dump(state, tmp_path / "d.txt")
    lines = (tmp_path / "d.txt").read_text().splitlines()
    (tmp_path / "bad.txt").write_text("\n".join(lines[:10]) + "\n")
    with pytest.raises(CorruptDumpError):
        read_dump(tmp_path / "bad.txt")
    (tmp_path / "bad2.txt").write_text("nonsense\n")
    with pytest.raises(CorruptDumpError):
        read_dump(tmp_path / "bad2.txt")


def test_primal_value_matches_objective():
    tr = make_random(2, 4, 30, 8)
    state, _, cert = run_fractional(tr, ConvexObjective(2))
    obj = ConvexObjective(2).with_partition(state.page_of[1:])
    assert cert.primal_value == pytest.approx(eval_f(obj, state.x[1:]))
