"""Seeded random instances: small networks, three-layer networks, DAGs."""
from __future__ import annotations

import random
from fractions import Fraction

from .fdg import Fdg
from .model import Network, make_network, validate_network

__all__ = ["demands_connected", "random_network", "random_three_layer", "three_layer_network", "random_dag", "line_graph", "edgeless_graph"]


def _prune(nodes, edges, sessions):
    """Drop edges on no source-sink path."""
    srcs = {a for a, _ in sessions}
    snks = {t for _, bs in sessions for t in bs}
    while True:
        fwd, bwd = set(srcs), set(snks)
        changed = True
        while changed:
            changed = False
            for t, h, _ in edges:
                if t in fwd and h not in fwd:
                    fwd.add(h)
                    changed = True
                if h in bwd and t not in bwd:
                    bwd.add(t)
                    changed = True
        keep = [(t, h, c) for t, h, c in edges if t in fwd and h in bwd]
        if len(keep) == len(edges):
            return keep
        edges = keep


def demands_connected(net: Network) -> bool:
    """Every sink is reachable from the source of its session."""
    succ: dict[int, list[int]] = {}
    for e in net.edges:
        succ.setdefault(e.tail, []).append(e.head)
    for s in net.sessions:
        seen, todo = {s.source}, [s.source]
        while todo:
            for w in succ.get(todo.pop(), ()):
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        if not set(s.sinks) <= seen:
            return False
    return True


def random_network(
    rng: random.Random,
    max_total: int = 10,
    max_nodes: int = 6,
    max_sessions: int = 3,
    caps=(1, 2, 3),
    connected_demands: bool = False,
) -> Network:
    """Valid acyclic network with ``|S| + |E| <= max_total``.

    With ``connected_demands`` every sink is reachable from its own source,
    so no demand is forced to rate zero by the topology alone.
    """
    while True:
        n = rng.randint(3, max_nodes)
        ns = rng.randint(1, min(max_sessions, max_total - 1))
        order = list(range(1, n + 1))
        rng.shuffle(order)
        pos = {v: i for i, v in enumerate(order)}
        pairs = [(u, v) for u in order for v in order if pos[u] < pos[v]]
        rng.shuffle(pairs)
        m = rng.randint(1, max(1, min(len(pairs), max_total - ns)))
        edges = [(u, v, rng.choice(caps)) for u, v in pairs[:m]]
        sessions = []
        for _ in range(ns):
            a = rng.choice(order[:-1])
            later = [v for v in order if pos[v] > pos[a]]
            k = 1 if rng.random() < 0.7 else min(2, len(later))
            sessions.append((a, rng.sample(later, k)))
        edges = _prune(list(range(1, n + 1)), edges, sessions)
        if not edges:
            continue
        net = make_network(range(1, n + 1), edges, sessions)
        if connected_demands and not demands_connected(net):
            continue
        if net.n_sessions + net.n_edges <= max_total and validate_network(net).ok:
            return net


def three_layer_network(ns: int, middle, big=None) -> Network:
    """Three-layer unicast network from middle-edge descriptions.

    ``middle`` holds ``(alpha, beta, capacity)`` triples with 1-based
    session ids. Sources are nodes ``1..ns`` and sinks ``ns+1..2ns``.
    Middle edges with equal ``alpha`` share a tail node, those with equal
    ``beta`` share a head node. Connection edges get capacity ``big``,
    by default one more than the total middle capacity.
    """
    middle = [(frozenset(a), frozenset(b), Fraction(c)) for a, b, c in middle]
    if big is None:
        big = sum((c for _, _, c in middle), Fraction(0)) + 1
    nxt = 2 * ns + 1
    tail_of: dict[frozenset, int] = {}
    head_of: dict[frozenset, int] = {}
    edges = []
    for a, b, c in middle:
        if a not in tail_of:
            tail_of[a] = nxt
            nxt += 1
        if b not in head_of:
            head_of[b] = nxt
            nxt += 1
        edges.append((tail_of[a], head_of[b], c))
    for a, t in tail_of.items():
        edges.extend((s, t, big) for s in sorted(a))
    for b, h in head_of.items():
        edges.extend((h, ns + s, big) for s in sorted(b))
    return make_network(range(1, nxt), edges, [(s, [ns + s]) for s in range(1, ns + 1)])


def random_three_layer(
    rng: random.Random,
    max_sessions: int = 4,
    max_middle: int = 6,
    caps=(1, 2, 3),
    max_fdg_nodes: int = 16,
    min_sessions: int = 1,
) -> Network:
    """Random three-layer unicast network, see :func:`three_layer_network`.

    Every session is connected on both sides. Instances whose
    Construction-B graph would exceed ``max_fdg_nodes`` nodes are redrawn.
    """
    if not 1 <= min_sessions <= max_sessions:
        raise ValueError("need 1 <= min_sessions <= max_sessions")
    while True:
        ns = rng.randint(min_sessions, max_sessions)
        nm = rng.randint(1, max_middle)
        sess = range(1, ns + 1)
        middle = [
            (frozenset(rng.sample(sess, rng.randint(1, ns))), frozenset(rng.sample(sess, rng.randint(1, ns))), rng.choice(caps))
            for _ in range(nm)
        ]
        alphas = {a for a, _, _ in middle}
        betas = {b for _, b, _ in middle}
        if set().union(*alphas) != set(sess) or set().union(*betas) != set(sess):
            continue
        n_conn = sum(len(a) for a in alphas) + sum(len(b) for b in betas)
        if 2 * ns + nm + n_conn > max_fdg_nodes:
            continue
        net = three_layer_network(ns, middle)
        if validate_network(net).ok:
            return net


def random_dag(rng: random.Random, n: int, p: float = 0.35) -> Fdg:
    """Generic acyclic FDG on nodes ``0..n-1`` with edges from lower to higher ids."""
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Fdg.from_edges(n, edges)


def line_graph(n: int) -> Fdg:
    return Fdg.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def edgeless_graph(n: int) -> Fdg:
    return Fdg.from_edges(n, [])
