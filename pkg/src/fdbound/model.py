"""Communication-network data model: parsing, validation, three-layer view."""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Edge",
    "Session",
    "Network",
    "ValidationReport",
    "ThreeLayerView",
    "NetworkFormatError",
    "NotThreeLayerError",
    "parse_capacity",
    "format_rational",
    "parse_network",
    "serialize_network",
    "validate_network",
    "three_layer_view",
    "butterfly",
    "make_network",
]


class NetworkFormatError(ValueError):
    """Raised when a network document cannot be turned into a Network."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class NotThreeLayerError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    id: int
    tail: int
    head: int
    capacity: Fraction


@dataclass(frozen=True)
class Session:
    id: int
    source: int
    sinks: tuple[int, ...]


@dataclass(frozen=True)
class Network:
    """A capacitated DAG with multicast sessions.

    ``tail``/``head``/``source``/``sinks`` are internal node indices into
    ``nodes``; ``nodes`` holds the document labels.
    """

    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    sessions: tuple[Session, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_sessions(self) -> int:
        return len(self.sessions)

    def label(self, v: int) -> int:
        return self.nodes[v]

    def capacities(self) -> tuple[Fraction, ...]:
        return tuple(e.capacity for e in self.edges)

    def in_edges(self, v: int) -> list[int]:
        return [e.id for e in self.edges if e.head == v]

    def out_edges(self, v: int) -> list[int]:
        return [e.id for e in self.edges if e.tail == v]

    def with_capacities(self, caps: Sequence) -> "Network":
        if len(caps) != len(self.edges):
            raise ValueError("capacity vector length mismatch")
        edges = tuple(
            Edge(e.id, e.tail, e.head, parse_capacity(c)) for e, c in zip(self.edges, caps)
        )
        return Network(self.nodes, edges, self.sessions)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "ok" if self.ok else "\n".join(self.violations)


@dataclass(frozen=True)
class ThreeLayerView:
    """Source/sink connections of the middle-layer edges (session indices)."""

    alpha: Mapping[int, frozenset[int]]
    beta: Mapping[int, frozenset[int]]
    middle: tuple[int, ...] = field(default=())


# ----------------------------------------------------------------- rationals

def parse_capacity(value) -> Fraction:
    """Exact rational from an int, Decimal, ``"p/q"`` or decimal string."""
    if isinstance(value, bool):
        raise NetworkFormatError(f"bad capacity {value!r}")
    if isinstance(value, (int, Fraction, Decimal)):
        return Fraction(value)
    if isinstance(value, float):
        # only reachable for Python callers; documents are parsed with Decimal
        return Fraction(Decimal(repr(value)))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise NetworkFormatError(f"bad capacity {value!r}")


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ------------------------------------------------------------------- parsing

def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise NetworkFormatError(msg)


def _as_int(x, what: str) -> int:
    _require(isinstance(x, int) and not isinstance(x, bool), f"{what} must be an integer, got {x!r}")
    return x


def parse_network(text: str) -> Network:
    """Parse a JSON network document.

    Node labels are kept as given; edge and session ids are renumbered
    densely in input order. Raises :class:`NetworkFormatError` on syntax
    errors, duplicate ids and dangling node references.
    """
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    _require(isinstance(doc, dict), "document must be a JSON object")
    for key in ("nodes", "edges", "sessions"):
        _require(key in doc, f"missing key '{key}'")
        _require(isinstance(doc[key], list), f"'{key}' must be an array")

    labels = [_as_int(v, "node id") for v in doc["nodes"]]
    index: dict[int, int] = {}
    for v in labels:
        _require(v not in index, f"duplicate node id {v}")
        index[v] = len(index)

    def node(ref, where: str) -> int:
        ref = _as_int(ref, where)
        if ref not in index:
            raise NetworkFormatError(f"dangling node reference {ref} in {where}")
        return index[ref]

    edges = []
    seen_edges: set[int] = set()
    for raw in doc["edges"]:
        _require(isinstance(raw, list) and len(raw) == 4, f"edge entry must be [id, tail, head, capacity], got {raw!r}")
        eid = _as_int(raw[0], "edge id")
        _require(eid not in seen_edges, f"duplicate edge id {eid}")
        seen_edges.add(eid)
        edges.append(Edge(len(edges), node(raw[1], f"edge {eid}"), node(raw[2], f"edge {eid}"), parse_capacity(raw[3])))

    sessions = []
    seen_sessions: set[int] = set()
    for raw in doc["sessions"]:
        _require(isinstance(raw, dict), "session entry must be an object")
        for key in ("id", "source", "sinks"):
            _require(key in raw, f"session entry missing '{key}'")
        sid = _as_int(raw["id"], "session id")
        _require(sid not in seen_sessions, f"duplicate session id {sid}")
        seen_sessions.add(sid)
        _require(isinstance(raw["sinks"], list), f"session {sid}: sinks must be an array")
        sinks = sorted({node(t, f"session {sid}") for t in raw["sinks"]})
        sessions.append(Session(len(sessions), node(raw["source"], f"session {sid}"), tuple(sinks)))

    return Network(tuple(labels), tuple(edges), tuple(sessions))


def serialize_network(net: Network) -> str:
    """Inverse of :func:`parse_network` (1-based edge and session ids)."""
    lab = net.nodes
    edges = ",\n    ".join(
        json.dumps([e.id + 1, lab[e.tail], lab[e.head], format_rational(e.capacity)]) for e in net.edges
    )
    sessions = ",\n    ".join(
        json.dumps({"id": s.id + 1, "source": lab[s.source], "sinks": [lab[t] for t in s.sinks]})
        for s in net.sessions
    )
    return (
        "{\n"
        f'  "nodes": {json.dumps(list(lab))},\n'
        f'  "edges": [\n    {edges}\n  ],\n'
        f'  "sessions": [\n    {sessions}\n  ]\n'
        "}\n"
    )


def make_network(
    nodes: Iterable[int],
    edges: Iterable[tuple[int, int, object]],
    sessions: Iterable[tuple[int, Iterable[int]]],
) -> Network:
    """Build a Network from node labels, ``(tail, head, cap)`` and ``(source, sinks)`` triples."""
    labels = list(nodes)
    idx = {v: i for i, v in enumerate(labels)}
    es = tuple(Edge(i, idx[t], idx[h], parse_capacity(c)) for i, (t, h, c) in enumerate(edges))
    ss = tuple(Session(i, idx[a], tuple(sorted(idx[b] for b in set(bs)))) for i, (a, bs) in enumerate(sessions))
    return Network(tuple(labels), es, ss)


def butterfly(caps: Sequence | None = None) -> Network:
    """The canonical two-session butterfly (unit capacities by default)."""
    caps = [1] * 7 if caps is None else list(caps)
    topo = [(1, 6), (1, 3), (2, 3), (2, 5), (3, 4), (4, 6), (4, 5)]
    return make_network(range(1, 7), [(t, h, c) for (t, h), c in zip(topo, caps)], [(1, [5]), (2, [6])])


# ---------------------------------------------------------------- validation

def _find_cycle(n: int, succ: list[list[int]]) -> list[int] | None:
    color = [0] * n
    parent = [-1] * n
    for root in range(n):
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            for w in it:
                if color[w] == 0:
                    color[w] = 1
                    parent[w] = v
                    stack.append((w, iter(succ[w])))
                    break
                if color[w] == 1:
                    cyc = [v]
                    while cyc[-1] != w:
                        cyc.append(parent[cyc[-1]])
                    return cyc[::-1]
            else:
                color[v] = 2
                stack.pop()
    return None


def _reach(n: int, succ: list[list[int]], start: Iterable[int]) -> set[int]:
    seen = set(start)
    todo = list(seen)
    while todo:
        v = todo.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def validate_network(net: Network) -> ValidationReport:
    """Check every Network invariant; violations are returned, never raised."""
    out: list[str] = []
    n = net.n_nodes
    if len(set(net.nodes)) != n:
        out.append("duplicate node id")
    succ: list[list[int]] = [[] for _ in range(n)]
    pred: list[list[int]] = [[] for _ in range(n)]
    for i, e in enumerate(net.edges):
        name = f"edge e{e.id + 1}"
        if e.id != i:
            out.append(f"{name}: ids are not dense")
        if not (0 <= e.tail < n and 0 <= e.head < n):
            out.append(f"{name}: dangling node reference")
            continue
        if e.tail == e.head:
            out.append(f"{name}: self-loop")
        if e.capacity < 0:
            out.append(f"{name}: negative capacity")
        succ[e.tail].append(e.head)
        pred[e.head].append(e.tail)
    cyc = _find_cycle(n, succ)
    if cyc is not None:
        labels = [net.nodes[v] for v in cyc]
        k = labels.index(min(labels))
        labels = labels[k:] + labels[:k]
        out.append("cycle detected: " + ",".join(map(str, labels)))
    for i, s in enumerate(net.sessions):
        name = f"session {s.id + 1}"
        if s.id != i:
            out.append(f"{name}: ids are not dense")
        if not (0 <= s.source < n):
            out.append(f"{name}: dangling source reference")
        if not s.sinks:
            out.append(f"{name}: no sink")
        if any(not (0 <= t < n) for t in s.sinks):
            out.append(f"{name}: dangling sink reference")
        if s.source in s.sinks:
            out.append(f"{name}: source ∈ sinks")
    srcs = {s.source for s in net.sessions if 0 <= s.source < n}
    snks = {t for s in net.sessions for t in s.sinks if 0 <= t < n}
    fwd = _reach(n, succ, srcs)
    bwd = _reach(n, pred, snks)
    for e in net.edges:
        if 0 <= e.tail < n and 0 <= e.head < n and not (e.tail in fwd and e.head in bwd):
            out.append(f"edge e{e.id + 1} on no source-sink path")
    return ValidationReport(tuple(out))


# ---------------------------------------------------------- three-layer view

def three_layer_view(net: Network) -> ThreeLayerView:
    """Source and sink connections of a three-layer unicast network.

    Raises :class:`NotThreeLayerError` if some session is not unicast or
    some source-to-sink path does not have length exactly three.
    """
    if any(len(s.sinks) != 1 for s in net.sessions):
        raise NotThreeLayerError("not three-layer: sessions must be unicast")
    src = {s.source for s in net.sessions}
    snk = {s.sinks[0] for s in net.sessions}
    if src & snk:
        raise NotThreeLayerError("not three-layer: a node is both source and sink")
    layer1 = {e.head for e in net.edges if e.tail in src}
    layer2 = {e.tail for e in net.edges if e.head in snk}
    if layer1 & (src | snk | layer2) or layer2 & (src | snk):
        raise NotThreeLayerError("not three-layer: layers overlap")
    middle = []
    for e in net.edges:
        if e.tail in src and e.head in layer1:
            continue
        if e.tail in layer2 and e.head in snk:
            continue
        if e.tail in layer1 and e.head in layer2:
            middle.append(e.id)
            continue
        raise NotThreeLayerError(f"not three-layer: edge e{e.id + 1} breaks the layering")
    # every edge must lie on a length-3 path
    mid_tails = {net.edges[m].tail for m in middle}
    mid_heads = {net.edges[m].head for m in middle}
    for e in net.edges:
        if (e.tail in src and e.head not in mid_tails) or (e.head in snk and e.tail not in mid_heads):
            raise NotThreeLayerError(f"not three-layer: edge e{e.id + 1} is on no length-3 path")
    feeds: dict[int, set[int]] = defaultdict(set)   # layer-1 node -> sessions available
    drains: dict[int, set[int]] = defaultdict(set)  # layer-2 node -> sessions demanded downstream
    for e in net.edges:
        for s in net.sessions:
            if e.tail == s.source:
                feeds[e.head].add(s.id)
            if e.head == s.sinks[0]:
                drains[e.tail].add(s.id)
    alpha = {m: frozenset(feeds[net.edges[m].tail]) for m in middle}
    beta = {m: frozenset(drains[net.edges[m].head]) for m in middle}
    return ThreeLayerView(alpha, beta, tuple(middle))
