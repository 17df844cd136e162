import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minmax_paging.adversaries import det_layered, rand_layered_k2
from minmax_paging.offline import (
    MissingMetadataError,
    SearchSpaceTooLarge,
    belady,
    brute_force_minmax_opt,
    det_layered_offline_bound,
    greedy_lfd,
    layered_offline_cost,
    lfd_upper_bound,
    replay_schedule,
)
from minmax_paging.policies import LRU, make_policy
from minmax_paging.adversaries import cruel_sequence
from minmax_paging.trace import RequestTrace
from oracles import exhaustive_opt

# exhaustive demand-schedule enumeration: (min total, min max fetch, min max eviction)
FROZEN_OPT = {
    ((1, 2, 3, 1, 2, 3), 2): (4, 2, 1),
    ((1, 2, 1, 2), 1): (4, 2, 2),
    ((1, 2, 3, 4, 1, 2, 3, 4, 1), 2): (7, 2, 2),
    ((1, 2, 3, 1, 4, 2, 3, 4, 1, 3), 2): (7, 2, 2),
    ((2, 1, 3, 2, 4, 1, 3, 2), 2): (6, 2, 1),
}

tiny = st.integers(1, 3).flatmap(
    lambda k: st.lists(st.integers(1, k + 2), min_size=1, max_size=9).map(
        lambda r: RequestTrace(k, max(r), tuple(r))))


def cruel_trace(k, T, policy="lru"):
    pol = make_policy(policy, k, k + 1)
    return RequestTrace(k, k + 1, tuple(cruel_sequence(pol, range(1, k + 2), length=T)))


def test_greedy_lfd_examples():
    tr = cruel_trace(2, 105)
    assert greedy_lfd(tr).minmax <= 22
    assert lfd_upper_bound(105, 2) == 22
    assert greedy_lfd(RequestTrace(2, 3, (1, 2, 3, 1, 2, 3))).minmax == 2
    assert greedy_lfd(RequestTrace(3, 3, (1, 2, 3, 3, 1))).minmax == 1


def test_belady_examples():
    assert belady(RequestTrace(2, 3, (1, 2, 3, 1, 2, 3))).costs.l1 == 4
    assert belady(RequestTrace(4, 3, (1, 2, 3, 2, 1))).costs.l1 == 3
    N = 50
    assert belady(RequestTrace(2, 3, (1, 2, 3) * N)).costs.l1 >= 3 * N / 2


def test_brute_force_examples():
    assert brute_force_minmax_opt(RequestTrace(1, 2, (1, 2, 1, 2))).minmax == 2
    assert brute_force_minmax_opt(RequestTrace(2, 3, (1, 2, 3, 1, 2, 3))).minmax == 2
    assert brute_force_minmax_opt(RequestTrace(3, 2, (1, 2, 2, 1))).minmax == 1


@pytest.mark.parametrize("key", list(FROZEN_OPT))
def test_frozen_exhaustive_values(key):
    reqs, k = key
    tr = RequestTrace(k, max(reqs), reqs)
    total, mx, ev = FROZEN_OPT[key]
    assert belady(tr).costs.l1 == total
    assert brute_force_minmax_opt(tr).minmax == mx
    assert brute_force_minmax_opt(tr, "eviction").eviction_costs().minmax == ev


def test_search_guard():
    tr = RequestTrace(3, 4, (1, 2, 3, 4) * 10)
    with pytest.raises(SearchSpaceTooLarge):
        brute_force_minmax_opt(tr, limit=1000)


@settings(max_examples=60)
@given(tiny)
def test_offline_against_enumeration(tr):
    total, mx, ev = exhaustive_opt(list(tr.requests), tr.k)
    b = belady(tr)
    assert b.costs.l1 == total
    bf = brute_force_minmax_opt(tr)
    assert bf.minmax == mx
    assert greedy_lfd(tr).minmax >= mx
    assert brute_force_minmax_opt(tr, "eviction").eviction_costs().minmax == ev
    # returned schedules are valid and priced consistently
    assert np.array_equal(replay_schedule(tr, bf.evictions).faults, bf.costs.faults)
    g = greedy_lfd(tr)
    assert np.array_equal(replay_schedule(tr, g.evictions).faults, g.costs.faults)


@settings(max_examples=60)
@given(st.integers(2, 4), st.integers(10, 400), st.integers(0, 10**6))
def test_lfd_bound_random_traces(k, T, seed):
    rng = np.random.default_rng(seed)
    tr = RequestTrace(k, k + 1, tuple(int(p) for p in rng.integers(1, k + 2, size=T)))
    assert greedy_lfd(tr).minmax <= lfd_upper_bound(T, k)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("policy", ["lru", "fifo", "greedy-min-faults"])
def test_lfd_bound_cruel_traces(k, policy):
    for T in (10, 57, 300):
        tr = cruel_trace(k, T, policy)
        assert greedy_lfd(tr).minmax <= lfd_upper_bound(T, k)


def test_layered_costs_rand():
    for seed in range(5):
        tr, meta = rand_layered_k2(2, 40, seed)
        assert layered_offline_cost(tr, meta).minmax <= 2 + 40


def test_layered_costs_det():
    for k in (3, 4):
        tr, meta = det_layered(LRU(k), k, 2, 300)
        assert layered_offline_cost(tr, meta).minmax <= det_layered_offline_bound(2, 300, k)


def test_layered_single_phase_single_fault():
    with pytest.warns(UserWarning):
        tr, meta = det_layered(LRU(2), 2, 1, 1)
    cost = layered_offline_cost(tr, meta)
    assert cost[meta["final_page"]] == 1


def test_layered_needs_metadata():
    with pytest.raises(MissingMetadataError):
        layered_offline_cost(RequestTrace(2, 3, (1, 2, 3)), None)
