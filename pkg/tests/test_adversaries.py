import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minmax_paging.adversaries import (
    PolicyInterfaceError,
    UnsupportedConfigError,
    cruel_sequence,
    det_layered,
    intro_greedy_bad,
    intro_lru_bad,
    rand_layered_k2,
    rand_layered_uniform,
    read_metadata,
    write_metadata,
)
from minmax_paging.offline import belady, brute_force_minmax_opt
from minmax_paging.policies import FIFO, LRU, GreedyMinFaults, OnlinePolicy, make_policy, run_policy


def test_cruel_against_lru():
    pol = LRU(2)
    seq = cruel_sequence(pol, [1, 2, 3], length=30)
    assert len(seq) == 30
    assert pol.faults(3).l1 == 30
    assert pol.faults(3).minmax >= 10


def test_cruel_fault_target_one():
    # warm-up faults count toward the target
    seq = cruel_sequence(LRU(2), [1, 2, 3], fault_target=1)
    assert seq == [1]


def test_cruel_sequences_by_policy():
    # a cruel sequence never hits, so LRU and FIFO see the same evictions
    lru = cruel_sequence(LRU(2), [1, 2, 3], length=12)
    fifo = cruel_sequence(FIFO(2), [1, 2, 3], length=12)
    assert lru == fifo == [1, 2, 3] * 4
    pol = make_policy("marking:0", 2, 3)
    marking = cruel_sequence(pol, [1, 2, 3], length=12)
    assert marking != lru
    assert pol.faults(3).l1 == 12


@settings(max_examples=25)
@given(st.integers(1, 4), st.sampled_from(["lru", "fifo", "greedy-min-faults", "marking:1", "minmax-pd"]),
       st.integers(1, 80))
def test_cruel_faults_every_request(k, spec, length):
    pol = make_policy(spec, k, k + 1)
    seq = cruel_sequence(pol, range(1, k + 2), length=length)
    assert pol.faults(k + 1).l1 == len(seq) == length


def test_cruel_detects_broken_policy():
    class Hoarder(OnlinePolicy):
        def serve(self, page):
            self._cache.add(page)
            return True, None

    pol = Hoarder(2)
    with pytest.raises(PolicyInterfaceError):
        cruel_sequence(pol, [1, 2, 3], length=5)


def test_det_layered_single_layer():
    with pytest.warns(UserWarning):
        tr, meta = det_layered(LRU(2), 2, 1, 5)
    pol_final = meta["final_page"]
    pol = LRU(2)
    run_policy(pol, tr)
    assert pol.fault_count(pol_final) == 5
    assert tr.T <= 3 * 5 + 2


def test_det_layered_cost_is_mN():
    pol = LRU(3)
    tr, meta = det_layered(pol, 3, 2, 200)
    assert pol.faults(tr.n).minmax == 2 * 200
    assert pol.fault_count(meta["final_page"]) == 400
    assert [ph["layer"] for ph in meta["phases"]] == [2] * 4 + [1]


def test_det_layered_empty():
    tr, meta = det_layered(LRU(2), 2, 0, 10)
    assert tr.T == 0 and meta["final_page"] is None


def test_rand_layered_round_robin():
    tr, meta = rand_layered_k2(1, 4, seed=0)
    assert tr.requests == (1, 2, 3) * 4
    counts = np.zeros(3)
    for s in range(600):
        counts[rand_layered_k2(1, 4, seed=s)[1]["final_page"] - 1] += 1
    assert np.all(np.abs(counts / 600 - 1 / 3) < 0.06)


def test_rand_layered_single_phase_lower_bound():
    N = 40
    tr, _ = rand_layered_k2(1, N, seed=1)
    for spec in ("lru", "fifo", "greedy-min-faults"):
        assert run_policy(make_policy(spec, 2, 3), tr).l1 >= 3 * N / 2
    assert belady(tr).costs.l1 >= 3 * N / 2


def test_rand_layered_is_oblivious():
    a, _ = rand_layered_k2(2, 10, seed=7)
    b, _ = rand_layered_k2(2, 10, seed=7)
    assert a == b
    with pytest.raises(UnsupportedConfigError):
        rand_layered_k2(2, 10, seed=7, k=3)


def test_rand_uniform():
    tr, meta = rand_layered_uniform(2, 1, 10, seed=3)
    assert tr.T == 10 and set(tr.requests) <= {1, 2, 3}
    assert rand_layered_uniform(2, 1, 10, seed=3)[0] == tr
    big, _ = rand_layered_uniform(2, 1, 30000, seed=4)
    rate = run_policy(LRU(2), big).l1 / big.T
    assert abs(rate - 1 / 3) < 0.02


def test_intro_lru_bad():
    tr = intro_lru_bad(7, 2)
    pol = LRU(2)
    run_policy(pol, tr)
    assert pol.fault_count(1) == 4
    assert brute_force_minmax_opt(tr).minmax == 1
    with pytest.raises(ValueError):
        intro_lru_bad(6, 2)


def test_intro_greedy_zero_repetitions():
    tr = intro_greedy_bad(GreedyMinFaults(2), 5, 0)
    assert tr.requests == (1, 2, 3) * 5
    with pytest.raises(UnsupportedConfigError):
        intro_greedy_bad(LRU(3), 5, 1)


def test_metadata_round_trip(tmp_path):
    _, meta = rand_layered_k2(2, 5, seed=2)
    write_metadata(meta, tmp_path / "m.json")
    assert read_metadata(tmp_path / "m.json") == meta
