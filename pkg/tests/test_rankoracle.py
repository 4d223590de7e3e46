from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdbound.corpus import random_network
from fdbound.model import butterfly
from fdbound.rankoracle import (
    LinearCode,
    RankEntropy,
    achieved_rates,
    check_code,
    code_violations,
    dump_code,
    load_code,
    psi_containment_probe,
    rank,
    rank_mod,
    random_code,
    verify_determination,
)

from oracles import code_rank, gf_rank

# edge ids: 1:(1,6) 2:(1,3) 3:(2,3) 4:(2,5) 5:(3,4) 6:(4,6) 7:(4,5)
Y1, Y2, SUM = [1, 0], [0, 1], [1, 1]
XOR_ROWS = [[Y1], [Y1], [Y2], [Y2], [SUM], [SUM], [SUM]]


@pytest.fixture
def xor():
    return LinearCode.from_rows(2, [1, 1], XOR_ROWS)


def test_xor_code_valid(xor):
    assert check_code(xor, butterfly())


def test_wrong_middle_edge_fails():
    rows = [r[:] for r in XOR_ROWS]
    rows[4] = [Y1]
    rows[5] = [Y1]
    rows[6] = [Y1]
    bad = LinearCode.from_rows(2, [1, 1], rows)
    v = code_violations(bad, butterfly())
    assert v and all("cannot decode" in x for x in v)


def test_non_function_detected():
    rows = [r[:] for r in XOR_ROWS]
    rows[1] = [Y2]  # node 1 never sees Y2
    v = code_violations(LinearCode.from_rows(2, [1, 1], rows), butterfly())
    assert "e2: not a function of its inputs" in v


def test_zero_code_fails_decoding():
    zero = LinearCode.from_rows(2, [1, 1], [[[0, 0]]] * 7)
    assert not check_code(zero, butterfly())


def test_capacity_exceeded():
    rows = [r[:] for r in XOR_ROWS]
    rows[0] = [Y1, Y1]
    v = code_violations(LinearCode.from_rows(2, [1, 1], rows), butterfly())
    assert any("exceed capacity" in x for x in v)


def test_ranks(xor):
    h = RankEntropy(xor)
    assert rank(xor, [0, 1]) == 2
    assert rank(xor, [2 + 4]) == 1  # U5
    assert h(0b11) == 2
    assert h(1 << (2 + 4) | 1 << (2 + 5)) == 1
    assert h.cmi(0b01, 0b10, 0) == 0


def test_determination(xor):
    # U2 and U3 fix U5; U5 alone does not fix Y1
    assert verify_determination(xor, [3, 4], [6])
    assert not verify_determination(xor, [6], [0])
    assert verify_determination(xor, [3, 6], [1])


def test_rank_mod_prime_only():
    with pytest.raises(ValueError):
        rank_mod(np.eye(2, dtype=np.int64), 4)
    with pytest.raises(ValueError):
        LinearCode.from_rows(6, [1], [[[1]]])


def test_rank_mod_small_field():
    m = np.array([[1, 2], [2, 4]])
    assert rank_mod(m, 5) == 1
    assert rank_mod(m, 3) == 1
    assert rank_mod(np.array([[1, 2], [2, 1]]), 3) == 1
    assert rank_mod(np.array([[1, 2], [2, 1]]), 5) == 2


def test_dump_load(xor):
    text = dump_code(xor)
    assert text.startswith("q=2\ndims=1,1\n")
    again = load_code(text)
    assert dump_code(again) == text
    assert check_code(again, butterfly())


def test_achieved_rates():
    code = LinearCode.from_rows(3, [2, 1], [[[0, 0, 0]]], scale=2)
    assert achieved_rates(code) == (1, Fraction(1, 2))


def test_single_edge_identity_code():
    from fdbound.model import make_network

    net = make_network([1, 2], [(1, 2, 2)], [(1, [2])])
    code = LinearCode.from_rows(2, [2], [[[1, 0], [0, 1]]])
    assert check_code(code, net)
    assert random_code(net, q=2, dims=[2], attempts=50, seed=0) is not None


def test_random_code_on_butterfly():
    code = random_code(butterfly(), q=3, attempts=200, seed=1)
    assert code is not None and check_code(code, butterfly())


def test_probe_finds_witness(xor):
    net = butterfly()
    # U5 alone does not fix U1: the XOR code separates them
    res = psi_containment_probe(net, [4], 0, [xor])
    assert res.found and res.witness == 0 and not res.in_psi
    # U2,U3 fix U5 in every code and the closure agrees
    res = psi_containment_probe(net, [1, 2], 4, [xor])
    assert not res.found and res.in_psi


# ------------------------------------------------------------- properties

@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(0, 6), min_size=4, max_size=4), min_size=1, max_size=5),
       st.sampled_from([2, 3, 5, 7]))
def test_rank_matches_reference(rows, q):
    assert rank_mod(np.array(rows), q) == gf_rank(rows, q)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_code_ranks_match_reference(seed, q):
    rng = random.Random(seed)
    net = random_network(rng)
    code = random_code(net, q=q, attempts=20, seed=seed)
    if code is None:
        return
    n = net.n_sessions + net.n_edges
    for _ in range(10):
        sub = [x for x in range(n) if rng.random() < 0.4]
        assert rank(code, sub) == code_rank(code, sub)
