from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdbound.corpus import edgeless_graph, random_dag, random_network
from fdbound.fdg import (
    ClosureKind,
    Fdg,
    GraphKindError,
    NodeSet,
    _psi,
    ancestors,
    build_construction_a,
    build_construction_b,
    closure,
    closure_bits,
    d_separates,
    fd_separates,
    node_table,
    subgraph_gbar,
    to_dot,
    topological_sort,
)
from fdbound.model import butterfly

from oracles import estimate_groups, naive_ancestors, naive_phi, naive_separated


def ids(*one_based: int) -> NodeSet:
    return NodeSet(v - 1 for v in one_based)


@pytest.fixture(scope="module")
def ga():
    return build_construction_a(butterfly())


@pytest.fixture(scope="module")
def gb():
    return build_construction_b(butterfly())


# ------------------------------------------------------------- constructions

def test_construction_a_numbering(ga):
    assert [ga.label(v) for v in range(ga.n)] == ["Y1", "Y2"] + [f"U{k}" for k in range(1, 8)]


def test_construction_a_parents(ga):
    # [DERIVED] U5 is fed by U2 and U3; Y1 is decoded from U4 and U7
    assert NodeSet.from_bits(ga.parents[6]) == ids(4, 5)
    assert NodeSet.from_bits(ga.parents[0]) == ids(6, 9)


def test_construction_a_has_no_parentless_node(ga):
    assert all(ga.parents)


def test_construction_b_size(gb):
    assert gb.n == 11
    assert [gb.label(v) for v in (9, 10)] == ["Yhat1@5", "Yhat2@6"]


def test_two_sinks_two_estimates():
    from fdbound.model import make_network

    net = make_network([1, 2, 3], [(1, 2, 1), (1, 3, 1)], [(1, [2, 3])])
    g = build_construction_b(net)
    est = [v for v in range(g.n) if g.nodes[v].kind == "Yhat"]
    assert len(est) == 2
    assert all(g.parents[0] >> v & 1 for v in est)


def test_gbar_drops_estimate_edges(gb):
    gbar = subgraph_gbar(gb)
    assert len(gb.edges()) - len(gbar.edges()) == 2
    assert set(gb.edges()) - set(gbar.edges()) == {(9, 0), (10, 1)}
    order = topological_sort(gbar)
    assert order.acyclic
    assert set(order.order[:2]) == {0, 1}
    assert {v for v in range(gbar.n) if not gbar.parents[v]} == {0, 1}


def test_gbar_needs_construction_b(ga):
    with pytest.raises(GraphKindError):
        subgraph_gbar(ga)


def test_construction_a_cycle_witness(ga):
    res = topological_sort(ga)
    assert not res.acyclic
    cyc = res.cycle
    for u, v in zip(cyc, cyc[1:] + cyc[:1]):
        assert ga.parents[v] >> u & 1


def test_empty_graph_sort():
    assert topological_sort(edgeless_graph(0)).order == ()


# ------------------------------------------------------------------ closures

def test_sources_close_everything(ga):
    assert closure(ga, ids(1, 2), ClosureKind.PHI_A) == NodeSet(range(9))


def test_single_edge_closes_nothing(ga):
    assert closure(ga, ids(3), ClosureKind.PHI_A) == NodeSet()


def test_psi_strictly_stronger(gb):
    # [PAPER] U2 and U3 determine everything once sources are independent
    a = ids(4, 5)
    psi = closure(gb, a, ClosureKind.PSI)
    phib = closure(gb, a, ClosureKind.PHI_B)
    assert psi == NodeSet(range(11))
    assert phib < psi


def test_closure_kind_mismatch(ga):
    with pytest.raises(GraphKindError):
        closure(ga, ids(1), ClosureKind.PSI)


def test_bare_int_rejected(ga):
    with pytest.raises(TypeError):
        closure(ga, 3)


def test_ancestors_of_estimate(gb):
    gbar = subgraph_gbar(gb)
    want = NodeSet([0, 1, 3, 4, 5, 6, 8])  # Y1 Y2 U2 U3 U4 U5 U7
    assert ancestors(gbar, [9]) == want


def test_parentless_have_no_ancestors():
    g = random_dag(random.Random(3), 8)
    roots = [v for v in range(g.n) if not g.parents[v]]
    assert ancestors(g, roots) == NodeSet()
    assert ancestors(g, []) == NodeSet()


# ---------------------------------------------------------------- separation

def test_chain_blocked():
    g = Fdg.from_edges(3, [(0, 1), (1, 2)])
    assert d_separates(g, [0], [2], [1])


def test_open_fork():
    g = Fdg.from_edges(3, [(0, 1), (0, 2)])
    assert not d_separates(g, [1], [2], [])


def test_direct_feed_not_separated():
    g = Fdg.from_edges(3, [(0, 1), (0, 2)])
    assert not fd_separates(g, [1], [2], [])


def test_butterfly_middle_pair_does_not_d_separate(gb):
    gbar = subgraph_gbar(gb)
    assert not d_separates(gbar, [0], [9], ids(3, 7))


def test_overlap_rejected(gb):
    with pytest.raises(ValueError):
        d_separates(gb, [0], [0], [])


# --------------------------------------------------------------------- dumps

def test_dot_and_table(gb):
    dot = to_dot(gb)
    assert dot.startswith("digraph") and 'label="Yhat1@5"' in dot
    assert node_table(gb).splitlines()[0] == "1 Y1"


# ------------------------------------------------------ oracle-backed checks

def _nets(seed: int, count: int):
    rng = random.Random(seed)
    return [random_network(rng) for _ in range(count)]


def _subsets(rng: random.Random, n: int, k: int):
    for _ in range(k):
        yield sum(1 << v for v in range(n) if rng.random() < 0.3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_phi_matches_naive_cascade(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    for g in (build_construction_a(net), build_construction_b(net)):
        for a in _subsets(rng, g.n, 12):
            aset = {v for v in range(g.n) if a >> v & 1}
            assert closure_bits(g, a, ClosureKind.PHI_A) == sum(1 << v for v in naive_phi(g, aset))
            if g.estimates:
                want = naive_phi(g, aset, estimate_groups(g))
                assert closure_bits(g, a, ClosureKind.PHI_B) == sum(1 << v for v in want)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_separation_matches_networkx(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    gbar = subgraph_gbar(build_construction_b(net))
    nodes = list(range(gbar.n))
    for _ in range(10):
        rng.shuffle(nodes)
        k1, k2 = rng.randint(1, 2), rng.randint(1, 2)
        k3 = rng.randint(0, max(0, min(3, gbar.n - k1 - k2)))
        if k1 + k2 > gbar.n:
            continue
        x, y, c = set(nodes[:k1]), set(nodes[k1:k1 + k2]), set(nodes[k1 + k2:k1 + k2 + k3])
        d = d_separates(gbar, x, y, c)
        f = fd_separates(gbar, x, y, c)
        assert d == naive_separated(gbar, x, y, c, fd=False)
        assert f == naive_separated(gbar, x, y, c, fd=True)
        assert f or not d


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_ancestors_match_networkx(seed):
    rng = random.Random(seed)
    g = random_dag(rng, rng.randint(1, 12))
    for a in _subsets(rng, g.n, 5):
        aset = {v for v in range(g.n) if a >> v & 1}
        assert set(ancestors(g, aset)) == naive_ancestors(g, aset)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_closure_laws(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    g = build_construction_b(net)
    for a in _subsets(rng, g.n, 8):
        extra = next(_subsets(rng, g.n, 1))
        b = a | extra
        pa = closure_bits(g, a, ClosureKind.PHI_A)
        pb = closure_bits(g, a, ClosureKind.PHI_B)
        ps = closure_bits(g, a, ClosureKind.PSI)
        # nesting on Construction-B
        assert pa & ~pb == 0 and pb & ~ps == 0
        # monotone cascades
        assert pa & ~closure_bits(g, b, ClosureKind.PHI_A) == 0
        assert pb & ~closure_bits(g, b, ClosureKind.PHI_B) == 0
        # idempotence
        for kind, c in ((ClosureKind.PHI_A, pa), (ClosureKind.PHI_B, pb), (ClosureKind.PSI, ps)):
            assert closure_bits(g, a | c, kind) | c == closure_bits(g, a | c, kind)
            assert closure_bits(g, a | c, kind) & ~(a | c) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_psi_order_independent_and_monotone(seed):
    rng = random.Random(seed)
    net = random_network(rng)
    g = build_construction_b(net)
    est = [v for v in range(g.n) if g.nodes[v].kind == "Yhat"]
    for a in _subsets(rng, g.n, 6):
        base = _psi(g, a)
        shuffled = est[:]
        rng.shuffle(shuffled)
        assert _psi(g, a, shuffled) == base
        b = a | next(_subsets(rng, g.n, 1))
        assert base & ~_psi(g, b) == 0
