"""Outer-bound regions on session rates and their comparison.

A :class:`Region` stores one constant per nonempty session subset ``W``.
In independent mode the constraint is ``sum_{s in W} R_s <= c_W``; in
correlated mode it is ``h(Y_W | Y_{W^c}) <= c_W``. Constants are raw
minima and may be loose; :meth:`Region.tightened` gives the implied ones.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Iterable, Iterator, Mapping, Sequence

from .fdg import (
    ClosureKind,
    Fdg,
    build_construction_a,
    build_construction_b,
    closure_bits,
    members,
)
from .maxsets import all_max_sets_cyclic
from .model import Network, format_rational, three_layer_view
from .simplex import OPTIMAL, UNBOUNDED, simplex_max

__all__ = [
    "INF",
    "Mode",
    "Region",
    "PermutationOrder",
    "Comparison",
    "fd_region",
    "cut_set_region",
    "network_sharing_region",
    "pde_region",
    "pde_passes",
    "compare_regions",
    "parse_region",
    "session_subsets",
    "PDE_GUARD",
    "SEARCH_GUARD",
]

INF = math.inf
PDE_GUARD = 16
CUTSET_GUARD = 22
SEARCH_GUARD = 40


class Mode(enum.Enum):
    CORRELATED = "correlated"
    INDEPENDENT = "independent"


def session_subsets(ns: int) -> list[frozenset[int]]:
    """Nonempty subsets ordered by size, then lexicographically."""
    subs = [frozenset(i for i in range(ns) if w >> i & 1) for w in range(1, 1 << ns)]
    return sorted(subs, key=lambda w: (len(w), sorted(w)))


def _fmt_value(v) -> str:
    return "inf" if v == INF else format_rational(v)


def _fmt_set(w: Iterable[int]) -> str:
    return ",".join(str(i + 1) for i in sorted(w))


@dataclass(frozen=True)
class Region:
    mode: Mode
    n_sessions: int
    constants: Mapping[frozenset[int], Fraction | float]
    provenance: str = ""

    def __post_init__(self):
        want = set(session_subsets(self.n_sessions))
        if set(self.constants) != want:
            raise ValueError("region needs exactly one constant per nonempty session subset")
        for w, v in self.constants.items():
            if v != INF and Fraction(v) < 0:
                raise ValueError(f"negative constant for {sorted(w)}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        return self.mode == other.mode and dict(self.constants) == dict(other.constants)

    __hash__ = None

    def constant(self, w: Iterable[int]) -> Fraction | float:
        return self.constants[frozenset(w)]

    def items(self) -> list[tuple[frozenset[int], Fraction | float]]:
        return [(w, self.constants[w]) for w in session_subsets(self.n_sessions)]

    def format(self) -> str:
        lines = []
        everyone = frozenset(range(self.n_sessions))
        for w, v in self.items():
            if self.mode is Mode.INDEPENDENT:
                lines.append(f"sum{{{_fmt_set(w)}}} <= {_fmt_value(v)}")
            else:
                lines.append(f"H{{{_fmt_set(w)}|{_fmt_set(everyone - w)}}} <= {_fmt_value(v)}")
        return "\n".join(lines) + "\n"

    def as_independent(self) -> "Region":
        """Read every constant as a sum-rate bound (valid for independent sources)."""
        return Region(Mode.INDEPENDENT, self.n_sessions, dict(self.constants), self.provenance)

    def tightened(self) -> dict[frozenset[int], Fraction | float]:
        """Largest value of each constrained quantity over the region."""
        if self.mode is Mode.CORRELATED:
            # h(Y_W|Y_{W^c}) grows with W, and min over supersets is attained
            out = {}
            for w in session_subsets(self.n_sessions):
                out[w] = min(v for w2, v in self.constants.items() if w <= w2)
            return out
        return {w: self._max_sum(w) for w in session_subsets(self.n_sessions)}

    def _max_sum(self, w: frozenset[int]) -> Fraction | float:
        rows = [({s: 1 for s in w2}, "<=", v) for w2, v in self.constants.items() if v != INF]
        res = simplex_max([1 if s in w else 0 for s in range(self.n_sessions)], rows, self.n_sessions)
        if res.status == UNBOUNDED:
            return INF
        assert res.status == OPTIMAL
        return res.value

    def contains(self, rates: Sequence) -> bool:
        """Membership of a nonnegative rate tuple (independent sources)."""
        r = [Fraction(x) for x in rates]
        if len(r) != self.n_sessions or any(x < 0 for x in r):
            raise ValueError("rate tuple must be nonnegative with one entry per session")
        return all(sum(r[s] for s in w) <= v for w, v in self.constants.items())


def parse_region(text: str, n_sessions: int, provenance: str = "") -> Region:
    """Inverse of :meth:`Region.format`."""
    consts: dict[frozenset[int], Fraction | float] = {}
    mode = None
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        lhs, sep, rhs = ln.partition("<=")
        if not sep:
            raise ValueError(f"bad region line {ln!r}")
        lhs, rhs = lhs.strip(), rhs.strip()
        value = INF if rhs == "inf" else Fraction(rhs)
        if lhs.startswith("sum{") and lhs.endswith("}"):
            m, body = Mode.INDEPENDENT, lhs[4:-1]
        elif lhs.startswith("H{") and lhs.endswith("}"):
            m, body = Mode.CORRELATED, lhs[2:-1].split("|")[0]
        else:
            raise ValueError(f"bad region line {ln!r}")
        if mode not in (None, m):
            raise ValueError("mixed region modes")
        mode = m
        consts[frozenset(int(t) - 1 for t in body.split(",") if t)] = value
    if mode is None:
        raise ValueError("empty region")
    return Region(mode, n_sessions, consts, provenance)


@dataclass(frozen=True)
class PermutationOrder:
    """Bijection from a session subset onto ``1..|W|``; ``order[k]`` is the
    session at position ``k+1``."""

    order: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("a permutation order must not repeat sessions")

    @property
    def sessions(self) -> frozenset[int]:
        return frozenset(self.order)

    def position(self, s: int) -> int:
        return self.order.index(s) + 1

    @classmethod
    def all_of(cls, w: Iterable[int]) -> Iterator["PermutationOrder"]:
        for p in permutations(sorted(w)):
            yield cls(p)


# ------------------------------------------------------------ FD bounds

def _edge_cost(net: Network, bits: int, ns: int) -> Fraction:
    return sum((net.edges[v - ns].capacity for v in members(bits >> ns << ns)), Fraction(0))


def fd_region(
    net: Network,
    kind: ClosureKind | str = ClosureKind.PHI_B,
    method: str = "maxsets",
    guard: int = SEARCH_GUARD,
) -> Region:
    """Functional dependence bound.

    With ``method="maxsets"`` the constant of ``W`` is the least capacity
    of the edge part of a maximal irreducible set whose source part is
    exactly ``Y_{W^c}`` and which holds no estimate node. With
    ``method="search"`` edge sets ``A`` are scanned in increasing capacity
    and the constant is the first cost for which ``A ∪ Y_{W^c}`` closes
    onto every node. The raw constants of the two methods can differ but
    their implied (tightened) constants agree; the search avoids the
    exponential enumeration on larger graphs.

    PhiA uses Construction-A, PhiB and Psi Construction-B. Psi yields an
    independent-mode region, the others correlated.
    """
    if isinstance(kind, str):
        kind = ClosureKind.parse(kind)
    if method not in ("maxsets", "search"):
        raise ValueError("method must be 'maxsets' or 'search'")
    g = build_construction_a(net) if kind is ClosureKind.PHI_A else build_construction_b(net)
    ns = net.n_sessions
    mode = Mode.INDEPENDENT if kind is ClosureKind.PSI else Mode.CORRELATED
    if method == "search":
        return Region(mode, ns, _fd_search(net, g, kind, guard), f"fd-{kind.value}")
    col = all_max_sets_cyclic(g, (), kind)
    best: dict[frozenset[int], Fraction | float] = {w: INF for w in session_subsets(ns)}
    src_mask = (1 << ns) - 1
    for m in col.sets:
        bits = m.bits
        if bits & g.estimates:
            continue
        known = {s for s in range(ns) if bits >> s & 1}
        w = frozenset(range(ns)) - known
        if not w:
            continue
        cost = _edge_cost(net, bits & ~src_mask, ns)
        if cost < best[w]:
            best[w] = cost
    return Region(mode, ns, best, f"fd-{kind.value}")


def _fd_search(net: Network, g: Fdg, kind: ClosureKind, guard: int) -> dict:
    if net.n_edges > guard:
        raise ValueError(f"FD search guard exceeded: {net.n_edges} edges > {guard}")
    ns = net.n_sessions
    everyone = (1 << ns) - 1

    def covers(bits: int) -> bool:
        return bits | closure_bits(g, bits, kind) == g.full

    consts: dict[frozenset[int], Fraction | float] = {}
    open_w: dict[frozenset[int], int] = {}
    all_edges = ((1 << net.n_edges) - 1) << ns
    for w in session_subsets(ns):
        known = everyone & ~sum(1 << s for s in w)
        # a W that even the full edge set cannot pin down stays unbounded
        if covers(all_edges | known):
            open_w[w] = known
        else:
            consts[w] = INF
    for cost, emask in _subsets_by_cost([e.capacity for e in net.edges]):
        if not open_w:
            break
        a_bits = emask << ns
        done = [w for w, known in open_w.items() if covers(a_bits | known)]
        for w in done:
            consts[w] = cost
            del open_w[w]
    return consts


def cut_set_region(net: Network) -> Region:
    """Exhaustive node-cut bound (correlated mode)."""
    n = net.n_nodes
    if n > CUTSET_GUARD:
        raise ValueError(f"cut-set enumeration guard exceeded: {n} nodes > {CUTSET_GUARD}")
    ns = net.n_sessions
    best_by_sep: dict[int, Fraction] = {}
    src_bit = [1 << s.source for s in net.sessions]
    sink_bits = [sum(1 << t for t in s.sinks) for s in net.sessions]
    for t in range(1 << n):
        sep = 0
        for s in range(ns):
            if t & src_bit[s] and sink_bits[s] & ~t:
                sep |= 1 << s
        if not sep:
            continue
        val = sum((e.capacity for e in net.edges if t >> e.tail & 1 and not t >> e.head & 1), Fraction(0))
        if sep not in best_by_sep or val < best_by_sep[sep]:
            best_by_sep[sep] = val
    consts: dict[frozenset[int], Fraction | float] = {}
    for w in session_subsets(ns):
        wb = sum(1 << s for s in w)
        vals = [v for sep, v in best_by_sep.items() if sep & wb == wb]
        consts[w] = min(vals) if vals else INF
    return Region(Mode.CORRELATED, ns, consts, "cutset")


def network_sharing_region(net: Network, quantifier: str = "all") -> Region:
    """Permutation-minimised middle-edge bound for three-layer networks.

    ``quantifier`` decides how ``W[beta(e)]`` reads the order condition:
    ``"all"`` keeps sessions ordered before every session of
    ``beta(e) ∩ W``, ``"exists"`` before at least one.
    """
    if quantifier not in ("all", "exists"):
        raise ValueError("quantifier must be 'all' or 'exists'")
    view = three_layer_view(net)
    ns = net.n_sessions
    consts: dict[frozenset[int], Fraction | float] = {}
    for w in session_subsets(ns):
        best: Fraction | float = INF
        for sigma in PermutationOrder.all_of(w):
            pos = {s: i for i, s in enumerate(sigma.order)}
            total = Fraction(0)
            for e in view.middle:
                bw = view.beta[e] & w
                if not bw:
                    continue
                if quantifier == "all":
                    before = {s for s in w if all(pos[s] < pos[t] for t in bw)}
                else:
                    before = {s for s in w if any(pos[s] < pos[t] for t in bw)}
                if not (view.alpha[e] & w) <= before:
                    total += net.edges[e].capacity
            best = min(best, total)
        consts[w] = best
    return Region(Mode.INDEPENDENT, ns, consts, f"ns-{quantifier}")


# ------------------------------------------------------------------ PdE

def _reach_live(gb: Fdg, kept: int, blocked: int) -> int:
    """Tails of surviving edges: kept nodes reachable from an unblocked
    source through unblocked nodes, themselves unblocked."""
    start = gb.sources & kept & ~blocked
    seen = start
    todo = start
    while todo:
        low = todo & -todo
        todo ^= low
        v = low.bit_length() - 1
        new = gb.children[v] & kept & ~blocked & ~seen
        seen |= new
        todo |= new
    return seen


def _undirected(gb: Fdg, x: int, y: int, nodes: int, tails: int) -> bool:
    seen = x
    todo = x
    while todo:
        if seen & y:
            return True
        low = todo & -todo
        todo ^= low
        v = low.bit_length() - 1
        nb = gb.parents[v] & tails
        if tails & low:
            nb |= gb.children[v]
        nb &= nodes & ~seen
        seen |= nb
        todo |= nb
    return bool(seen & y)


def _ancestral_within(gb: Fdg, seeds: int, nodes: int, tails: int) -> int:
    anc = seeds & nodes
    todo = anc
    while todo:
        low = todo & -todo
        todo ^= low
        v = low.bit_length() - 1
        new = gb.parents[v] & tails & nodes & ~anc
        anc |= new
        todo |= new
    return anc


def pde_passes(g: Fdg, a_bits: int, order: Sequence[int], improved: bool = False) -> bool:
    """Run the progressive separation procedure on Ḡ of a Construction-B graph.

    ``a_bits`` is a mask of edge-variable nodes, ``order`` lists the
    sessions of ``W`` in the order they are processed.
    """
    gb = g.gbar
    ynode = g.source_node
    est_of: dict[int, list[int]] = {}
    for v in members(g.estimates):
        est_of.setdefault(g.nodes[v].index, []).append(v)
    w = set(order)
    y_w = sum(1 << ynode[s] for s in w)
    y_wc = sum(1 << v for s, v in ynode.items() if s not in w)
    est_w = sum(1 << v for s in w for v in est_of.get(s, ()))
    seeds = a_bits | y_w | est_w
    kept = _ancestral_within(gb, seeds, gb.full, gb.full)
    blocked = a_bits | y_wc
    tails = _reach_live(gb, kept, blocked)
    for s in order:
        y = 1 << ynode[s]
        cut_off = False
        for v in est_of.get(s, ()):
            vb = 1 << v
            if improved:
                nodes = _ancestral_within(gb, y | vb | (a_bits & kept), kept, tails)
            else:
                nodes = kept
            if not _undirected(gb, y, vb, nodes, tails):
                cut_off = True
                break
        if not cut_off:
            return False
        blocked |= y
        tails = _reach_live(gb, kept, blocked)
    return True


def _subsets_by_cost(costs: Sequence[Fraction]) -> Iterator[tuple[Fraction, int]]:
    """All index subsets in nondecreasing total cost (bitmask over indices)."""
    idx = sorted(range(len(costs)), key=lambda i: (costs[i], i))
    yield Fraction(0), 0
    if not idx:
        return
    heap = [(costs[idx[0]], 0, 1 << idx[0])]
    while heap:
        total, last, mask = heapq.heappop(heap)
        yield total, mask
        if last + 1 < len(idx):
            nxt = idx[last + 1]
            heapq.heappush(heap, (total + costs[nxt], last + 1, mask | 1 << nxt))
            heapq.heappush(heap, (total - costs[idx[last]] + costs[nxt], last + 1, mask & ~(1 << idx[last]) | 1 << nxt))


def pde_region(net: Network, improved: bool = False, guard: int = PDE_GUARD) -> Region:
    """Exhaustive progressive d-separating edge-set bound (independent mode).

    Edge sets are scanned in increasing capacity so the first set that
    passes for some order gives the constant of ``W``.
    """
    if net.n_edges > guard:
        raise ValueError(f"PdE search guard exceeded: {net.n_edges} edges > {guard}")
    g = build_construction_b(net)
    ns = net.n_sessions
    consts: dict[frozenset[int], Fraction | float] = {w: INF for w in session_subsets(ns)}
    open_w = {w: [p.order for p in PermutationOrder.all_of(w)] for w in consts}
    for cost, emask in _subsets_by_cost([e.capacity for e in net.edges]):
        if not open_w:
            break
        a_bits = emask << ns
        done = []
        for w, orders in open_w.items():
            if any(pde_passes(g, a_bits, o, improved) for o in orders):
                consts[w] = cost
                done.append(w)
        for w in done:
            del open_w[w]
    return Region(Mode.INDEPENDENT, ns, consts, "ipde" if improved else "pde")


# ------------------------------------------------------------ comparison

@dataclass(frozen=True)
class Comparison:
    """``relation`` is ``"equal"``, ``"r1⊆r2"``, ``"r2⊆r1"`` or ``"incomparable"``."""

    relation: str
    witness: frozenset[int] | None = None
    witness2: frozenset[int] | None = None
    tight1: Mapping = field(default_factory=dict, compare=False)
    tight2: Mapping = field(default_factory=dict, compare=False)


def compare_regions(r1: Region, r2: Region) -> Comparison:
    """Containment test via region-implied constants.

    Both regions are boxes over the same family of sums, so ``r1 ⊆ r2``
    exactly when every implied constant of ``r1`` is at most that of
    ``r2``. Raw constants are not compared directly: a loose raw constant
    does not enlarge a region.
    """
    if r1.mode != r2.mode:
        raise ValueError("regions have different modes")
    if r1.n_sessions != r2.n_sessions:
        raise ValueError("regions have different session sets")
    t1, t2 = r1.tightened(), r2.tightened()
    less = [w for w in t1 if t1[w] < t2[w]]
    more = [w for w in t1 if t1[w] > t2[w]]
    if not less and not more:
        return Comparison("equal", None, None, t1, t2)
    if not more:
        return Comparison("r1⊆r2", less[0], None, t1, t2)
    if not less:
        return Comparison("r2⊆r1", more[0], None, t1, t2)
    return Comparison("incomparable", less[0], more[0], t1, t2)
