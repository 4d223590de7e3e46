"""Linear network codes over GF(q) and their rank entropy functions.

Ground-set element ``i`` is ``Y_{i+1}`` for ``i < |S|`` and edge variable
``U_{i-|S|+1}`` otherwise, matching :mod:`fdbound.polylp` and the node
numbering of Construction-A.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Iterable, Mapping, Sequence

import numpy as np

from .fdg import ClosureKind, Fdg, build_construction_b, closure_bits
from .model import Network

__all__ = [
    "LinearCode",
    "RankEntropy",
    "ProbeResult",
    "rank_mod",
    "check_code",
    "code_violations",
    "rank",
    "random_code",
    "verify_determination",
    "psi_containment_probe",
    "fdg_to_ground",
    "dump_code",
    "load_code",
    "achieved_rates",
]

MAX_Q = 251


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    f = 2
    while f * f <= q:
        if q % f == 0:
            return False
        f += 1
    return True


def _check_q(q: int) -> None:
    if not (isinstance(q, int) and _is_prime(q) and q <= MAX_Q):
        raise ValueError(f"field size must be a prime <= {MAX_Q}, got {q!r}")


def rank_mod(m: np.ndarray, q: int) -> int:
    """Rank of an integer matrix over GF(q) by Gaussian elimination."""
    _check_q(q)
    a = np.array(m, dtype=np.int64) % q
    if a.size == 0:
        return 0
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        a[r] = a[r] * pow(int(a[r, c]), q - 2, q) % q
        below = a[r + 1:, c]
        if below.any():
            a[r + 1:] = (a[r + 1:] - np.outer(below, a[r])) % q
        r += 1
    return r


@dataclass(frozen=True, eq=False)
class LinearCode:
    """Global encoding matrices, one ``d_e × K`` array per edge, ``K = sum(dims)``.

    Edge ``e`` carries ``matrices[e] @ y`` for the stacked message ``y``.
    """

    q: int
    dims: tuple[int, ...]
    matrices: tuple[np.ndarray, ...]
    scale: int = 1

    def __post_init__(self):
        _check_q(self.q)
        if any(k < 0 for k in self.dims):
            raise ValueError("negative message dimension")
        if self.scale < 1:
            raise ValueError("scale must be a positive integer")
        mats = []
        for m in self.matrices:
            a = np.array(m, dtype=np.int64).reshape(-1, self.width) % self.q
            a.setflags(write=False)
            mats.append(a)
        object.__setattr__(self, "matrices", tuple(mats))

    @classmethod
    def from_rows(cls, q: int, dims: Sequence[int], rows: Sequence[Sequence[Sequence[int]]], scale: int = 1) -> "LinearCode":
        return cls(q, tuple(dims), tuple(np.array(r, dtype=np.int64).reshape(-1, sum(dims)) for r in rows), scale)

    @property
    def width(self) -> int:
        return sum(self.dims)

    @property
    def n_sessions(self) -> int:
        return len(self.dims)

    def offsets(self) -> list[int]:
        out, acc = [], 0
        for k in self.dims:
            out.append(acc)
            acc += k
        return out

    def source_block(self, s: int) -> np.ndarray:
        off = self.offsets()[s]
        blk = np.zeros((self.dims[s], self.width), dtype=np.int64)
        for i in range(self.dims[s]):
            blk[i, off + i] = 1
        return blk

    def element_matrix(self, i: int) -> np.ndarray:
        ns = self.n_sessions
        return self.source_block(i) if i < ns else self.matrices[i - ns]

    def stack(self, elements: Iterable[int]) -> np.ndarray:
        parts = [self.element_matrix(i) for i in elements]
        if not parts:
            return np.zeros((0, self.width), dtype=np.int64)
        return np.vstack(parts)


def _elements(x) -> list[int]:
    if isinstance(x, int):
        return [i for i in range(x.bit_length()) if x >> i & 1]
    return sorted(set(x))


def rank(code: LinearCode, elements) -> int:
    """Rank of the stacked matrices of ``elements`` (ids or a bitmask)."""
    return rank_mod(code.stack(_elements(elements)), code.q)


class RankEntropy:
    """Memoised rank function of a code, keyed by ground-set bitmask."""

    def __init__(self, code: LinearCode):
        self.code = code
        self.n = code.n_sessions + len(code.matrices)
        self._memo: dict[int, int] = {0: 0}

    def __call__(self, mask: int) -> int:
        r = self._memo.get(mask)
        if r is None:
            r = self._memo[mask] = rank(self.code, mask)
        return r

    def vector(self) -> dict[int, int]:
        return {x: self(x) for x in range(1, 1 << self.n)}

    def cmi(self, a: int, b: int, c: int) -> int:
        return self(a | c) + self(b | c) - self(c) - self(a | b | c)


# ------------------------------------------------------------------ checks

def _in_edges(net: Network, v: int) -> list[int]:
    return [e.id for e in net.edges if e.head == v]


def _input_elements(net: Network, v: int) -> list[int]:
    ns = net.n_sessions
    return [s.id for s in net.sessions if s.source == v] + [ns + f for f in _in_edges(net, v)]


def code_violations(code: LinearCode, net: Network) -> list[str]:
    """Human-readable reasons why ``code`` is not a valid code for ``net``."""
    if code.n_sessions != net.n_sessions or len(code.matrices) != net.n_edges:
        raise ValueError("code dimensions do not match the network")
    out = []
    q = code.q
    for e in net.edges:
        m = code.matrices[e.id]
        if m.shape[0] > e.capacity * code.scale:
            out.append(f"e{e.id + 1}: {m.shape[0]} symbols exceed capacity")
        inputs = code.stack(_input_elements(net, e.tail))
        if rank_mod(np.vstack([inputs, m]), q) != rank_mod(inputs, q):
            out.append(f"e{e.id + 1}: not a function of its inputs")
    for s in net.sessions:
        blk = code.source_block(s.id)
        for t in s.sinks:
            inc = code.stack(code.n_sessions + f for f in _in_edges(net, t))
            if rank_mod(np.vstack([inc, blk]), q) != rank_mod(inc, q):
                out.append(f"session {s.id + 1}: sink {net.nodes[t]} cannot decode")
    return out


def check_code(code: LinearCode, net: Network) -> bool:
    return not code_violations(code, net)


def _edge_order(net: Network) -> list[int]:
    indeg = [0] * net.n_nodes
    for e in net.edges:
        indeg[e.head] += 1
    ready = [v for v in range(net.n_nodes) if indeg[v] == 0]
    order_nodes = []
    while ready:
        v = ready.pop()
        order_nodes.append(v)
        for e in net.edges:
            if e.tail == v:
                indeg[e.head] -= 1
                if indeg[e.head] == 0:
                    ready.append(e.head)
    pos = {v: i for i, v in enumerate(order_nodes)}
    return sorted(range(net.n_edges), key=lambda e: (pos[net.edges[e].tail], e))


def random_code(
    net: Network,
    q: int = 2,
    dims: Sequence[int] | Mapping[int, int] | None = None,
    attempts: int = 100,
    seed: int | None = 0,
    scale: int = 1,
) -> LinearCode | None:
    """Sample uniformly random local maps; return the first valid code.

    Every edge carries ``floor(C_e * scale)`` symbols.
    """
    _check_q(q)
    if dims is None:
        dims = [1] * net.n_sessions
    if isinstance(dims, Mapping):
        dims = [dims.get(s, 1) for s in range(net.n_sessions)]
    dims = tuple(int(k) for k in dims)
    if len(dims) != net.n_sessions or any(k < 1 for k in dims):
        raise ValueError("dims must give a positive dimension per session")
    rng = np.random.default_rng(seed)
    order = _edge_order(net)
    width = sum(dims)
    proto = LinearCode(q, dims, tuple(np.zeros((0, width), dtype=np.int64) for _ in net.edges), scale)
    for _ in range(attempts):
        mats: list[np.ndarray] = [np.zeros((0, width), dtype=np.int64)] * net.n_edges
        for e in order:
            edge = net.edges[e]
            d = floor(Fraction(edge.capacity) * scale)
            parts = [proto.source_block(s.id) for s in net.sessions if s.source == edge.tail]
            parts += [mats[f] for f in _in_edges(net, edge.tail)]
            inputs = np.vstack(parts) if parts else np.zeros((0, width), dtype=np.int64)
            local = rng.integers(0, q, size=(d, inputs.shape[0]))
            mats[e] = (local @ inputs) % q if inputs.shape[0] else np.zeros((d, width), dtype=np.int64)
        code = LinearCode(q, dims, tuple(mats), scale)
        if check_code(code, net):
            return code
    return None


def verify_determination(code: LinearCode, a, b) -> bool:
    """``rank(a ∪ b) == rank(a)``."""
    ea, eb = _elements(a), _elements(b)
    return rank(code, sorted(set(ea) | set(eb))) == rank(code, ea)


def fdg_to_ground(g: Fdg, bits: int) -> int:
    """Map FDG nodes to ground-set elements (estimates stand for their source)."""
    ns = len(g.source_node)
    out = 0
    for v, nd in enumerate(g.nodes):
        if bits >> v & 1:
            if nd.kind == "Y":
                out |= 1 << nd.index
            elif nd.kind == "U":
                out |= 1 << (ns + nd.index)
            elif nd.kind == "Yhat":
                out |= 1 << nd.index
            else:
                raise ValueError("generic nodes have no pseudo-variable")
    return out


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of a best-effort search for a code separating ``e`` from ``a``.

    ``witness`` is the index of a code with ``rank(a ∪ {e}) > rank(a)``.
    Absence of a witness proves nothing: domination quantifies over all
    zero-error codes, nonlinear ones included.
    """

    witness: int | None
    in_psi: bool

    @property
    def found(self) -> bool:
        return self.witness is not None


def psi_containment_probe(net: Network, a: Iterable[int], e: int, codes: Sequence[LinearCode]) -> ProbeResult:
    edges = sorted(set(a))
    ns = net.n_sessions
    g = build_construction_b(net)
    seed = sum(1 << (ns + f) for f in edges)
    in_psi = bool(closure_bits(g, seed, ClosureKind.PSI) >> (ns + e) & 1)
    ga = [ns + f for f in edges]
    for i, code in enumerate(codes):
        if rank(code, ga + [ns + e]) > rank(code, ga):
            return ProbeResult(i, in_psi)
    return ProbeResult(None, in_psi)


def achieved_rates(code: LinearCode) -> tuple[Fraction, ...]:
    """Per-session rate ``k_s / scale`` in units of ``log q`` per channel use."""
    return tuple(Fraction(k, code.scale) for k in code.dims)


# ------------------------------------------------------------------ dumps

def dump_code(code: LinearCode) -> str:
    lines = [f"q={code.q}", "dims=" + ",".join(map(str, code.dims))]
    if code.scale != 1:
        lines.append(f"scale={code.scale}")
    for i, m in enumerate(code.matrices):
        rows = "; ".join(" ".join(str(int(x)) for x in row) for row in m)
        lines.append(f"e{i + 1}: {rows}".rstrip())
    return "\n".join(lines) + "\n"


def load_code(text: str) -> LinearCode:
    q = None
    dims: tuple[int, ...] = ()
    scale = 1
    mats: dict[int, list[list[int]]] = {}
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln:
            continue
        if ln.startswith("q="):
            q = int(ln[2:])
        elif ln.startswith("dims="):
            dims = tuple(int(t) for t in ln[5:].split(",") if t)
        elif ln.startswith("scale="):
            scale = int(ln[6:])
        elif ln.startswith("e") and ":" in ln:
            head, _, body = ln.partition(":")
            rows = [[int(t) for t in r.split()] for r in body.split(";") if r.strip()]
            mats[int(head[1:]) - 1] = rows
        else:
            raise ValueError(f"bad code line {ln!r}")
    if q is None:
        raise ValueError("missing q=")
    if sorted(mats) != list(range(len(mats))):
        raise ValueError("edge lines must be numbered densely from e1")
    return LinearCode.from_rows(q, dims, [mats[i] for i in range(len(mats))], scale)
