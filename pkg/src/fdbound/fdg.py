"""Functional dependence graphs, determination closures and separation tests.

Node sets are stored as Python ints used as bitmasks (bit ``v`` set iff
node ``v`` is a member); :class:`NodeSet` is a thin immutable wrapper used
at the public boundary.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .model import Network

__all__ = [
    "NodeSet",
    "FdgNode",
    "GraphKind",
    "ClosureKind",
    "Fdg",
    "TopoResult",
    "GraphKindError",
    "build_construction_a",
    "build_construction_b",
    "subgraph_gbar",
    "closure",
    "ancestors",
    "ancestral_graph",
    "d_separates",
    "fd_separates",
    "topological_sort",
    "to_dot",
    "node_table",
    "members",
    "as_bits",
]


class GraphKindError(ValueError):
    pass


# ------------------------------------------------------------------ bitmasks

def members(bits: int) -> Iterator[int]:
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def _mask(items: Iterable[int]) -> int:
    m = 0
    for v in items:
        if v < 0:
            raise ValueError(f"negative node id {v}")
        m |= 1 << v
    return m


class NodeSet:
    """Immutable set of FDG node ids backed by an int bitmask."""

    __slots__ = ("bits",)

    def __init__(self, items: Iterable[int] = ()):
        object.__setattr__(self, "bits", _mask(items))

    @classmethod
    def from_bits(cls, bits: int) -> "NodeSet":
        ns = cls.__new__(cls)
        object.__setattr__(ns, "bits", bits)
        return ns

    def __setattr__(self, key, value):
        raise AttributeError("NodeSet is immutable")

    def __iter__(self) -> Iterator[int]:
        return members(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, v: object) -> bool:
        return isinstance(v, int) and v >= 0 and bool(self.bits >> v & 1)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, NodeSet):
            return self.bits == other.bits
        if isinstance(other, (set, frozenset)):
            return set(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.bits)

    def __or__(self, other) -> "NodeSet":
        return NodeSet.from_bits(self.bits | as_bits(other))

    def __and__(self, other) -> "NodeSet":
        return NodeSet.from_bits(self.bits & as_bits(other))

    def __sub__(self, other) -> "NodeSet":
        return NodeSet.from_bits(self.bits & ~as_bits(other))

    def __le__(self, other) -> bool:
        return self.bits & ~as_bits(other) == 0

    def __lt__(self, other) -> bool:
        o = as_bits(other)
        return self.bits != o and self.bits & ~o == 0

    def sort_key(self) -> tuple[int, ...]:
        return tuple(self)

    def format(self) -> str:
        """1-based listing, e.g. ``{3,7}``."""
        return "{" + ",".join(str(v + 1) for v in self) + "}"

    def __repr__(self) -> str:
        return f"NodeSet({sorted(self)})"


def as_bits(x) -> int:
    """Bitmask of a NodeSet or an iterable of node ids."""
    if isinstance(x, NodeSet):
        return x.bits
    if isinstance(x, int):
        raise TypeError("pass a NodeSet or an iterable of node ids, not a bare int")
    return _mask(x)


# --------------------------------------------------------------------- graph

class GraphKind(enum.Enum):
    A = "ConstructionA"
    B = "ConstructionB"
    GENERIC = "Generic"


class ClosureKind(enum.Enum):
    PHI_A = "phiA"
    PHI_B = "phiB"
    PSI = "psi"

    @classmethod
    def parse(cls, text: str) -> "ClosureKind":
        for k in cls:
            if k.value.lower() == text.lower():
                return k
        raise ValueError(f"unknown closure kind {text!r}")


@dataclass(frozen=True)
class FdgNode:
    """``kind`` is ``"Y"`` (source), ``"U"`` (edge) or ``"Yhat"`` (estimate)."""

    kind: str
    index: int = 0
    sink: int | None = None
    sink_label: int | None = None

    def label(self) -> str:
        if self.kind == "Y":
            return f"Y{self.index + 1}"
        if self.kind == "U":
            return f"U{self.index + 1}"
        if self.kind == "Yhat":
            return f"Yhat{self.index + 1}@{self.sink_label}"
        return f"X{self.index + 1}"


@dataclass(frozen=True, eq=False)
class Fdg:
    """Directed graph over pseudo-variable nodes with parent/child bitmasks."""

    nodes: tuple[FdgNode, ...]
    parents: tuple[int, ...]
    kind: GraphKind = GraphKind.GENERIC
    children: tuple[int, ...] = field(default=())

    def __post_init__(self):
        n = len(self.nodes)
        if len(self.parents) != n:
            raise ValueError("parents length mismatch")
        full = (1 << n) - 1
        for v, p in enumerate(self.parents):
            if p & ~full:
                raise ValueError(f"node {v} has out-of-range parents")
        if not self.children:
            ch = [0] * n
            for v, p in enumerate(self.parents):
                for u in members(p):
                    ch[u] |= 1 << v
            object.__setattr__(self, "children", tuple(ch))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], nodes: Sequence[FdgNode] | None = None) -> "Fdg":
        par = [0] * n
        for u, v in edges:
            par[v] |= 1 << u
        if nodes is None:
            nodes = [FdgNode("X", i) for i in range(n)]
        return cls(tuple(nodes), tuple(par))

    # -- basic structure
    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def full(self) -> int:
        return (1 << len(self.nodes)) - 1

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for v, p in enumerate(self.parents) for u in members(p)]

    @cached_property
    def has_parents(self) -> int:
        return _mask(v for v, p in enumerate(self.parents) if p)

    @cached_property
    def sources(self) -> int:
        """Mask of source-variable nodes Y_s."""
        return _mask(v for v, nd in enumerate(self.nodes) if nd.kind == "Y")

    @cached_property
    def estimates(self) -> int:
        return _mask(v for v, nd in enumerate(self.nodes) if nd.kind == "Yhat")

    @cached_property
    def source_node(self) -> dict[int, int]:
        """Session index -> node id of Y_s."""
        return {nd.index: v for v, nd in enumerate(self.nodes) if nd.kind == "Y"}

    @cached_property
    def estimate_group(self) -> tuple[int, ...]:
        """Per node: mask of all estimates of the same session (0 for non-estimates)."""
        by_s: dict[int, int] = {}
        for v, nd in enumerate(self.nodes):
            if nd.kind == "Yhat":
                by_s[nd.index] = by_s.get(nd.index, 0) | 1 << v
        return tuple(by_s[nd.index] if nd.kind == "Yhat" else 0 for nd in self.nodes)

    @cached_property
    def gbar(self) -> "Fdg":
        return subgraph_gbar(self)

    def label(self, v: int) -> str:
        return self.nodes[v].label()

    def nodeset(self, items: Iterable[int] = ()) -> NodeSet:
        ns = NodeSet(items)
        if ns.bits & ~self.full:
            raise ValueError("node id out of range")
        return ns

    def all_nodes(self) -> NodeSet:
        return NodeSet.from_bits(self.full)


@dataclass(frozen=True)
class TopoResult:
    order: tuple[int, ...] | None = None
    cycle: tuple[int, ...] | None = None

    @property
    def acyclic(self) -> bool:
        return self.order is not None


# -------------------------------------------------------------- constructions

def _base_nodes(net: Network) -> list[FdgNode]:
    return [FdgNode("Y", s.id) for s in net.sessions] + [FdgNode("U", e.id) for e in net.edges]


def _encoder_edges(net: Network) -> list[tuple[int, int]]:
    ns = net.n_sessions
    out = []
    for e in net.edges:
        for s in net.sessions:
            if s.source == e.tail:
                out.append((s.id, ns + e.id))
        for f in net.edges:
            if f.head == e.tail:
                out.append((ns + f.id, ns + e.id))
    return out


def build_construction_a(net: Network) -> Fdg:
    """Sources and edge variables; edges into each U_e from its local inputs,
    and from every edge entering a sink of s into Y_s."""
    ns = net.n_sessions
    edges = _encoder_edges(net)
    for s in net.sessions:
        for e in net.edges:
            if e.head in s.sinks:
                edges.append((ns + e.id, s.id))
    nodes = _base_nodes(net)
    g = Fdg.from_edges(len(nodes), edges, nodes)
    return Fdg(g.nodes, g.parents, GraphKind.A)


def build_construction_b(net: Network) -> Fdg:
    """Construction-A's encoder part plus one estimate node per (session, sink)."""
    ns = net.n_sessions
    nodes = _base_nodes(net)
    edges = _encoder_edges(net)
    for s in net.sessions:
        for t in s.sinks:
            v = len(nodes)
            nodes.append(FdgNode("Yhat", s.id, t, net.nodes[t]))
            edges.extend((ns + e.id, v) for e in net.edges if e.head == t)
            edges.append((v, s.id))
    g = Fdg.from_edges(len(nodes), edges, nodes)
    return Fdg(g.nodes, g.parents, GraphKind.B)


def subgraph_gbar(g: Fdg) -> Fdg:
    """Construction-B without the estimate -> source edges (acyclic)."""
    if g.kind is not GraphKind.B:
        raise GraphKindError("subgraph_gbar needs a Construction-B graph")
    est = g.estimates
    par = tuple(p & ~est if nd.kind == "Y" else p for nd, p in zip(g.nodes, g.parents))
    return Fdg(g.nodes, par, GraphKind.GENERIC)


# ------------------------------------------------------------------ closures

def _cascade(g: Fdg, cut: int, dead: int, todo: int, grouped: bool) -> tuple[int, int]:
    """Delete every node that had parents and has none outside ``cut`` left.

    ``cut`` holds the nodes whose out-edges are gone (seed set plus
    deleted nodes). With ``grouped`` the deletion of one estimate deletes
    all estimates of its session.
    """
    par, ch, hp = g.parents, g.children, g.has_parents
    group = g.estimate_group if grouped else None
    todo &= ~dead
    while todo:
        low = todo & -todo
        todo ^= low
        v = low.bit_length() - 1
        if dead & low or not hp & low or par[v] & ~cut:
            continue
        kill = low
        if group is not None and group[v]:
            kill |= group[v] & ~dead
        dead |= kill
        cut |= kill
        for w in members(kill):
            todo |= ch[w]
        todo &= ~dead
    return cut, dead


def _phi(g: Fdg, a: int, grouped: bool) -> int:
    todo = a
    for v in members(a):
        todo |= g.children[v]
    return _cascade(g, a, 0, todo, grouped)[1]


def _forward_from(ch: Sequence[int], start: int, allowed_tail: int, within: int) -> int:
    """Nodes reached from ``start`` along edges whose tail is in ``allowed_tail``."""
    seen = start
    todo = start
    while todo:
        low = todo & -todo
        todo ^= low
        v = low.bit_length() - 1
        if not allowed_tail & low:
            continue
        new = ch[v] & within & ~seen
        seen |= new
        todo |= new
    return seen


def _ancestral(par: Sequence[int], seeds: int, alive: int, blocked: int) -> int:
    """``seeds`` plus all their ancestors along edges u->v with u alive and not blocked."""
    anc = seeds & alive
    todo = anc
    while todo:
        low = todo & -todo
        todo ^= low
        v = low.bit_length() - 1
        new = par[v] & alive & ~blocked & ~anc
        anc |= new
        todo |= new
    return anc


def _connected(par: Sequence[int], ch: Sequence[int], x: int, y: int, nodes: int, ok_tail: int) -> bool:
    """Undirected reachability from ``x`` to ``y`` inside ``nodes`` using edges
    u->v with u in ``ok_tail``."""
    seen = x & nodes
    todo = seen
    while todo:
        if seen & y:
            return True
        low = todo & -todo
        todo ^= low
        v = low.bit_length() - 1
        nb = par[v] & ok_tail
        if ok_tail & low:
            nb |= ch[v]
        nb &= nodes & ~seen
        seen |= nb
        todo |= nb
    return bool(seen & y)


def _separated(host: Fdg, x: int, y: int, cond: int, alive: int, blocked: int, fd: bool) -> bool:
    """Core of d-/fd-separation on ``host`` restricted to ``alive`` nodes,
    with out-edges of ``blocked`` (which includes ``cond``) removed."""
    blocked |= cond
    anc = _ancestral(host.parents, x | y | cond, alive, 0)
    ok_tail = anc & ~blocked
    if fd:
        src = anc & ~host.has_parents
        ok_tail &= _forward_from(host.children, src, ok_tail, anc)
    return not _connected(host.parents, host.children, x, y, anc, ok_tail)


def _psi(g: Fdg, a: int, order: Sequence[int] | None = None) -> int:
    gb = g.gbar
    par, ch, hp = g.parents, g.children, g.has_parents
    ynode = g.source_node
    group = g.estimate_group
    todo = a
    for v in members(a):
        todo |= ch[v]
    cut, dead = _cascade(g, a, 0, todo, False)
    # step 1: prune nodes left without a source ancestor
    while True:
        live_src = g.sources & ~dead
        reached = _forward_from(ch, live_src, ~cut, ~dead)
        orphan = ~reached & ~dead & hp & g.full
        if not orphan:
            break
        dead |= orphan
        cut |= orphan
        t = 0
        for w in members(orphan):
            t |= ch[w]
        cut, dead = _cascade(g, cut, dead, t, False)
    # step 2: separation of each source from its estimates
    pairs = list(members(g.estimates)) if order is None else list(order)
    changed = True
    while changed:
        changed = False
        for v in pairs:
            grp = group[v]
            if not grp & ~dead:
                continue
            y = 1 << ynode[g.nodes[v].index]
            vb = 1 << v
            if not (dead & (vb | y)):
                alive = g.full & ~dead
                anc = _ancestral(gb.parents, y | vb | (a & alive), alive, cut)
                ok_tail = anc & ~cut
                src = anc & ~gb.has_parents
                ok_tail &= _forward_from(gb.children, src, ok_tail, anc)
                if _connected(gb.parents, gb.children, y, vb, anc, ok_tail):
                    continue
            kill = grp & ~dead
            dead |= kill
            cut |= kill
            t = 0
            for w in members(kill):
                t |= ch[w]
            cut, dead = _cascade(g, cut, dead, t, False)
            changed = True
            break
    return dead


def _check_kind(g: Fdg, kind: ClosureKind) -> None:
    if kind is not ClosureKind.PHI_A and g.kind is not GraphKind.B:
        raise GraphKindError(f"{kind.value} closure needs a Construction-B graph")


def closure_bits(g: Fdg, a: int, kind: ClosureKind) -> int:
    """Bitmask version of :func:`closure` (no argument checks)."""
    if kind is ClosureKind.PHI_A:
        return _phi(g, a, False)
    if kind is ClosureKind.PHI_B:
        return _phi(g, a, True)
    return _psi(g, a)


def closure(g: Fdg, a, kind: ClosureKind | str = ClosureKind.PHI_A) -> NodeSet:
    """Set of nodes deleted by the determination procedure seeded with ``a``.

    The result may contain members of ``a``. PhiB and Psi need a
    Construction-B graph.
    """
    if isinstance(kind, str):
        kind = ClosureKind.parse(kind)
    _check_kind(g, kind)
    bits = as_bits(a)
    if bits & ~g.full:
        raise ValueError("seed set out of range")
    return NodeSet.from_bits(closure_bits(g, bits, kind))


# ------------------------------------------------------------ ancestry, d-sep

def ancestors(g: Fdg, a) -> NodeSet:
    """All nodes with a directed path into ``a``, members of ``a`` excluded."""
    bits = as_bits(a)
    seen = 0
    todo = 0
    for v in members(bits):
        todo |= g.parents[v]
    while todo:
        low = todo & -todo
        todo ^= low
        if seen & low:
            continue
        seen |= low
        todo |= g.parents[low.bit_length() - 1] & ~seen
    return NodeSet.from_bits(seen & ~bits)


def ancestral_graph(g: Fdg, a) -> Fdg:
    """Induced subgraph on ``a`` and its ancestors (node ids preserved)."""
    keep = as_bits(a) | ancestors(g, a).bits
    par = tuple(p & keep if keep >> v & 1 else 0 for v, p in enumerate(g.parents))
    return Fdg(g.nodes, par, GraphKind.GENERIC)


def _sep_args(g: Fdg, a, b, c) -> tuple[int, int, int]:
    x, y, z = as_bits(a), as_bits(b), as_bits(c)
    if x & y or x & z or y & z:
        raise ValueError("separation arguments must be pairwise disjoint")
    if (x | y | z) & ~g.full:
        raise ValueError("node id out of range")
    return x, y, z


def d_separates(g: Fdg, a, b, c) -> bool:
    """True iff ``a`` and ``b`` are disconnected in the ancestral graph of
    ``a ∪ b ∪ c`` once the out-edges of ``c`` are removed."""
    x, y, z = _sep_args(g, a, b, c)
    return _separated(g, x, y, z, g.full, 0, fd=False)


def fd_separates(g: Fdg, a, b, c) -> bool:
    """As :func:`d_separates`, then also drop edges with no parentless ancestor."""
    x, y, z = _sep_args(g, a, b, c)
    return _separated(g, x, y, z, g.full, 0, fd=True)


def topological_sort(g: Fdg) -> TopoResult:
    """Kahn's algorithm (smallest ready node first); a directed cycle otherwise."""
    import heapq

    indeg = [p.bit_count() for p in g.parents]
    ready = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in members(g.children[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    if len(order) == g.n:
        return TopoResult(order=tuple(order))
    # walk parents inside the leftover part until a node repeats
    rest = g.full & ~_mask(order)
    v = next(members(rest))
    path: list[int] = []
    pos: dict[int, int] = {}
    while v not in pos:
        pos[v] = len(path)
        path.append(v)
        v = next(members(g.parents[v] & rest))
    cyc = path[pos[v]:][::-1]
    return TopoResult(cycle=tuple(cyc))


# --------------------------------------------------------------------- dumps

def to_dot(g: Fdg, name: str = "fdg") -> str:
    lines = [f"digraph {name} {{"]
    for v in range(g.n):
        lines.append(f'  n{v + 1} [label="{g.label(v)}"];')
    for u, v in sorted(g.edges()):
        lines.append(f"  n{u + 1} -> n{v + 1};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def node_table(g: Fdg) -> str:
    return "".join(f"{v + 1} {g.label(v)}\n" for v in range(g.n))
