"""Acceptance criteria 1-11. Each test prints one PASS/FAIL/SKIP line; the
full list is repeated in the terminal summary."""
from __future__ import annotations

import itertools
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from fdbound.bounds import Mode, Region, cut_set_region, fd_region, network_sharing_region, pde_region, session_subsets
from fdbound.corpus import edgeless_graph, line_graph, random_network
from fdbound.fdg import (
    ClosureKind,
    build_construction_a,
    build_construction_b,
    closure_bits,
    fd_separates,
    subgraph_gbar,
)
from fdbound.maxsets import all_max_sets_acyclic, all_max_sets_cyclic, brute_force_max_sets
from fdbound.model import NotThreeLayerError, butterfly
from fdbound.polylp import (
    build_independent_lp,
    elemental_inequalities,
    evaluate,
    ingleton_inequalities,
    iter_elemental,
    solve_lp,
)
from fdbound.rankoracle import LinearCode, RankEntropy, achieved_rates, check_code, fdg_to_ground, random_code

from oracles import naive_max_sets_phi

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "scripts"))
from three_layer_sweep import SweepConfig, check_network, corpus as three_layer_corpus  # noqa: E402

S = frozenset({0, 1})
BUTTERFLY_A = [
    {1, 2}, {1, 5}, {1, 7}, {1, 8}, {2, 4}, {2, 7}, {2, 9}, {3, 4, 5},
    {3, 4, 8}, {3, 7}, {3, 8, 9}, {4, 5, 6}, {5, 6, 9}, {6, 7}, {6, 8, 9},
]
BUTTERFLY_PSI = [
    {1, 2}, {1, 5}, {1, 7}, {1, 8}, {2, 4}, {2, 7}, {2, 9}, {3, 7},
    {4, 5}, {4, 7}, {4, 8}, {5, 7}, {5, 9}, {6, 7}, {3, 8, 9}, {6, 8, 9},
]


def one_based(col):
    return {frozenset(v + 1 for v in m) for m in col}


def verdict(report, n, ok, detail):
    report(n, "PASS" if ok else "FAIL", detail)
    assert ok, detail


@pytest.fixture(scope="module")
def three_layer_nets():
    return three_layer_corpus(SweepConfig(count=100, seed=7))


# ------------------------------------------------------------------ 1-5

def test_criterion_01_butterfly_construction_a(report):
    g = build_construction_a(butterfly())
    t0 = time.perf_counter()
    col = all_max_sets_cyclic(g, (), ClosureKind.PHI_A)
    dt = time.perf_counter() - t0
    ok = one_based(col) == {frozenset(s) for s in BUTTERFLY_A} and len(col) == 15 and dt < 1
    verdict(report, 1, ok, f"{len(col)} sets in {dt:.3f}s")


def test_criterion_02_butterfly_independent_sets(report):
    g = build_construction_b(butterfly())
    col = all_max_sets_cyclic(g, (), ClosureKind.PSI)
    # the listed sets are the ones free of estimate nodes (10, 11)
    free = {m for m in one_based(col) if not m & {10, 11}}
    want = {frozenset(s) for s in BUTTERFLY_PSI}
    verdict(report, 2, free == want, f"{len(free)} estimate-free sets of {len(col)}")


def test_criterion_03_butterfly_fd_constants(report):
    rng = random.Random(3)
    bad = 0
    for _ in range(40):
        c = [Fraction(rng.randint(0, 12), rng.randint(1, 4)) for _ in range(7)]
        r = fd_region(butterfly(c), "phiB")
        C = dict(enumerate(c, 1))
        bad += r.constant({0}) != min(C[2], C[5], C[7])
        bad += r.constant({1}) != min(C[3], C[5], C[6])
    net = butterfly([1, 3, 3, 1, 3, 3, 3])
    fd_s, cs_s = fd_region(net, "phiB").constant(S), cut_set_region(net).constant(S)
    ok = bad == 0 and fd_s == 4 and cs_s == 5
    verdict(report, 3, ok, f"singleton mismatches={bad}, FD c_S={fd_s}, cut-set c_S={cs_s}")


def test_criterion_04_independent_equals_fd(report):
    net = butterfly()
    ps, pb = fd_region(net, "psi"), fd_region(net, "phiB")
    ok = dict(ps.constants) == dict(pb.constants)
    verdict(report, 4, ok, "psi " + " ".join(f"{v}" for v in ps.constants.values()))


def test_criterion_05_call_counts(report):
    calls = {n: all_max_sets_acyclic(line_graph(n)).calls for n in range(3, 11)}
    edgeless = {n: all_max_sets_cyclic(edgeless_graph(n), (), ClosureKind.PHI_A).calls for n in range(1, 8)}
    ok = all(c == n + 1 for n, c in calls.items()) and set(edgeless.values()) == {1}
    verdict(report, 5, ok, f"line calls {list(calls.values())}, edgeless calls {sorted(set(edgeless.values()))}")


# ------------------------------------------------------------------- 6

def test_criterion_06_oracle_equivalence(report):
    rng = random.Random(6)
    nets = [random_network(rng, max_total=10) for _ in range(200)]
    bad = 0
    for net in nets:
        ga, gb = build_construction_a(net), build_construction_b(net)
        a = all_max_sets_cyclic(ga, (), ClosureKind.PHI_A).as_frozensets()
        bad += a != brute_force_max_sets(ga, ClosureKind.PHI_A, acyclic=False).as_frozensets()
        bad += a != naive_max_sets_phi(ga)
        for kind in (ClosureKind.PHI_B, ClosureKind.PSI):
            fast = all_max_sets_cyclic(gb, (), kind).as_frozensets()
            bad += fast != brute_force_max_sets(gb, kind, acyclic=False).as_frozensets()
        gbar = subgraph_gbar(gb)
        bad += all_max_sets_acyclic(gbar).as_frozensets() != brute_force_max_sets(gbar, acyclic=True).as_frozensets()
    verdict(report, 6, bad == 0, f"{len(nets)} networks, {bad} discrepancies")


# ----------------------------------------------------------------- 7-8

def test_criterion_07_three_layer_equality(report, three_layer_nets):
    bad = sum("ns==phiB" in check_network(n) for n in three_layer_nets)
    sizes = sorted({n.n_sessions for n in three_layer_nets})
    verdict(report, 7, bad == 0, f"{len(three_layer_nets)} networks, sessions {sizes}, {bad} mismatches")


def test_criterion_08_bound_nesting(report, three_layer_nets):
    names = ("psi<=phiB", "phiB<=cutset", "psi<=pde", "ipde==psi")
    counts = dict.fromkeys(names, 0)
    for n in three_layer_nets:
        for name in check_network(n):
            if name in counts:
                counts[name] += 1
    ok = not any(counts.values())
    verdict(report, 8, ok, ", ".join(f"{k}:{v}" for k, v in counts.items()))


# ------------------------------------------------------------------- 9

def test_criterion_09_lp_sandwich(report):
    net = butterfly()
    xor = LinearCode.from_rows(2, [1, 1], [[[1, 0]], [[1, 0]], [[0, 1]], [[0, 1]], [[1, 1]], [[1, 1]], [[1, 1]]])
    lower = RankEntropy(xor)(0b11) if check_code(xor, net) else None
    fd = fd_region(net, "phiB").constant(S)
    upper = net.edges[0].capacity + net.edges[4].capacity
    t0 = time.perf_counter()
    sol = solve_lp(build_independent_lp(net, [1, 1]))
    dt = time.perf_counter() - t0
    counts = {n: sum(1 for _ in iter_elemental(n)) for n in (2, 3, 9)}
    ok = (
        sol.ok and sol.optimum == 2 and lower == 2 and fd == upper == 2
        and counts == {2: 3, 3: 9, 9: 4617} and dt <= 300
    )
    verdict(report, 9, ok, f"LP={sol.optimum} code={lower} FD={fd} rows={counts} solve={dt:.1f}s")


# ------------------------------------------------------------------ 10

INGLETON_SAMPLE = 1 << 18


def _entropy_table(h: RankEntropy, n: int) -> np.ndarray:
    return np.array([0] + [h(x) for x in range(1, 1 << n)], dtype=np.int64)


def _ingleton_violations(t: np.ndarray, n: int, rng: np.random.Generator) -> int:
    """Direct check of h(AB)+h(AC)+h(AD)+h(BC)+h(BD) >= h(A)+h(B)+h(CD)+h(ABC)+h(ABD)."""
    size = 1 << n
    if n <= 6:
        a = np.arange(size)[:, None, None, None]
        b = np.arange(size)[None, :, None, None]
        c = np.arange(size)[None, None, :, None]
        bad = 0
        for d0 in range(size):
            d = np.int64(d0)
            lhs = t[a | b] + t[a | c] + t[a | d] + t[b | c] + t[b | d]
            rhs = t[a] + t[b] + t[c | d] + t[a | b | c] + t[a | b | d]
            bad += int((lhs < rhs).sum())
        return bad
    a, b, c, d = (rng.integers(0, size, INGLETON_SAMPLE) for _ in range(4))
    lhs = t[a | b] + t[a | c] + t[a | d] + t[b | c] + t[b | d]
    rhs = t[a] + t[b] + t[c | d] + t[a | b | c] + t[a | b | d]
    return int((lhs < rhs).sum())


def test_criterion_10_rank_oracle_invariants(report):
    rng = random.Random(10)
    nrng = np.random.default_rng(10)
    small_ingleton = {n: ingleton_inequalities(n) for n in (1, 2, 3, 4)}
    codes = []
    tries = 0
    while len(codes) < 50 and tries < 2000:
        tries += 1
        net = random_network(rng, max_total=10, connected_demands=True)
        q = rng.choice([2, 3])
        dims = [rng.choice([1, 1, 2]) for _ in range(net.n_sessions)]
        code = random_code(net, q=q, dims=dims, attempts=20, seed=tries)
        if code is not None:
            codes.append((net, code))
    counts = dict.fromkeys(("elemental", "ingleton", "closure", "fdsep", "region"), 0)
    for net, code in codes:
        h = RankEntropy(code)
        n = net.n_sessions + net.n_edges
        vec = h.vector()
        counts["elemental"] += len(evaluate(elemental_inequalities(n), vec))
        if n in small_ingleton:
            counts["ingleton"] += len(evaluate(small_ingleton[n], vec))
        counts["ingleton"] += _ingleton_violations(_entropy_table(h, n), n, nrng)

        ga = build_construction_a(net)
        for _ in range(20):
            seed = sum(1 << v for v in range(ga.n) if rng.random() < 0.3)
            cl = closure_bits(ga, seed, ClosureKind.PHI_A)
            x, y = fdg_to_ground(ga, seed), fdg_to_ground(ga, cl)
            counts["closure"] += h(x | y) != h(x)

        gbar = subgraph_gbar(build_construction_b(net))
        nodes = list(range(gbar.n))
        for _ in range(20):
            rng.shuffle(nodes)
            k1, k2 = rng.randint(1, 2), rng.randint(1, 2)
            k3 = rng.randint(0, max(0, gbar.n - k1 - k2))
            xs, ys, cs = nodes[:k1], nodes[k1:k1 + k2], nodes[k1 + k2:k1 + k2 + k3]
            if fd_separates(gbar, xs, ys, cs):
                gx, gy, gc = (fdg_to_ground(gbar, sum(1 << v for v in part)) for part in (xs, ys, cs))
                counts["fdsep"] += h.cmi(gx, gy, gc) != 0

        rates = achieved_rates(code)
        regions = [
            fd_region(net, "phiA"), fd_region(net, "phiB"), fd_region(net, "psi"),
            cut_set_region(net), pde_region(net), pde_region(net, improved=True),
        ]
        try:
            regions.append(network_sharing_region(net))
        except NotThreeLayerError:
            pass
        counts["region"] += sum(not r.as_independent().contains(rates) for r in regions)
    ok = len(codes) >= 50 and not any(counts.values())
    verdict(report, 10, ok, f"{len(codes)} codes, violations " + ", ".join(f"{k}:{v}" for k, v in counts.items()))


# ------------------------------------------------------------------ 11

FIVE_SESSION_NETWORK = Path(__file__).parent / "data" / "five_session_pde.json"


def test_criterion_11_five_session_pde_gap(report):
    if not FIVE_SESSION_NETWORK.exists():
        report(11, "SKIP", "no topology reproducing the listed five-session system has been found")
        pytest.skip("reconstruction pending")
    from fdbound.model import parse_network

    net = parse_network(FIVE_SESSION_NETWORK.read_text())
    full = frozenset(range(5))
    listed = listed_five_session_system()
    plain = pde_region(net, guard=64).tightened()
    improved = pde_region(net, improved=True, guard=64).tightened()
    psi = fd_region(net, "psi", method="search", guard=64).tightened()
    off = [w for w in listed if plain[w] != listed[w]]
    off += [w for w in listed if w != full and not improved[w] == psi[w] == listed[w]]
    ok = not off and plain[full] == 5 and improved[full] == psi[full] == 4
    verdict(report, 11, ok, f"plain PdE {plain[full]}, improved {improved[full]}, psi {psi[full]}, subset mismatches {len(off)}")


def listed_five_session_system() -> dict:
    """[PAPER] plain PdE system for the five-session example, tightened."""
    c: dict = {}

    def put(w, v):
        w = frozenset(x - 1 for x in w)
        c[w] = min(c.get(w, v), v)

    for i in range(1, 5):
        put({i}, 1)
    put({5}, 2)
    for pair in itertools.combinations(range(1, 5), 2):
        put(set(pair), 2)
    for i in range(1, 5):
        put({i, 5}, 3)
    for i in (3, 4, 5):
        put({i, 1, 2}, 3)
    for i in (1, 2, 5):
        put({i, 3, 4}, 3)
    for i, j in ((1, 3), (1, 4), (2, 3), (2, 4)):
        put({i, j, 5}, 4)
    for quad in itertools.combinations(range(1, 6), 4):
        put(set(quad), 4)
    put(range(1, 6), 5)
    return Region(Mode.INDEPENDENT, 5, {w: c.get(w, float("inf")) for w in session_subsets(5)}).tightened()
