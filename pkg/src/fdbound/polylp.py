"""Linear-programming outer bounds over the polymatroid cone.

Coordinates of an entropy vector are the nonempty subsets of the ground
set written as bitmasks, so coordinate ``X`` holds ``h(X)``. For a network
the ground set is ``Y_1..Y_|S|`` followed by ``U_1..U_|E|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

from .model import Network, format_rational
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, simplex_max

__all__ = [
    "EntropyIndex",
    "LinearConstraint",
    "LpProblem",
    "LpSolution",
    "GuardError",
    "elemental_count",
    "iter_elemental",
    "elemental_inequalities",
    "ingleton_inequalities",
    "build_independent_lp",
    "build_correlated_lp",
    "solve_lp",
    "lp_region_probe",
    "dump_lp",
    "load_lp",
    "network_fds",
    "evaluate",
]

ELEMENTAL_GUARD = 14
INGLETON_GUARD = 6
NETWORK_GUARD = 12


class GuardError(ValueError):
    pass


@dataclass(frozen=True)
class EntropyIndex:
    """Nonempty subsets of an ``n``-element ground set in binary order."""

    n: int
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative ground-set size")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(self.n)))
        elif len(self.names) != self.n:
            raise ValueError("names length mismatch")

    @property
    def size(self) -> int:
        return (1 << self.n) - 1

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def coordinates(self) -> range:
        return range(1, 1 << self.n)

    def coord(self, elements: Iterable[int]) -> int:
        x = 0
        for i in elements:
            if not 0 <= i < self.n:
                raise ValueError(f"element {i} outside ground set")
            x |= 1 << i
        if x == 0:
            raise ValueError("the empty set has no coordinate")
        return x

    def subset(self, coord: int) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if coord >> i & 1)

    def label(self, coord: int) -> str:
        return "h(" + ",".join(self.names[i] for i in self.subset(coord)) + ")"


def _combine(terms: Iterable[tuple[int, int]]) -> dict[int, Fraction]:
    d: dict[int, Fraction] = {}
    for coef, x in terms:
        if x:
            d[x] = d.get(x, 0) + coef
    return {k: Fraction(v) for k, v in d.items() if v}


@dataclass(frozen=True)
class LinearConstraint:
    """``sum coeffs[X]·h(X)  rel  rhs``."""

    coeffs: tuple[tuple[int, Fraction], ...]
    relation: str
    rhs: Fraction = Fraction(0)

    def __post_init__(self):
        if self.relation not in (">=", "=", "<="):
            raise ValueError(f"bad relation {self.relation!r}")
        if not self.coeffs or any(c == 0 for _, c in self.coeffs):
            raise ValueError("constraint needs nonzero coefficients")

    @classmethod
    def of(cls, coeffs: Mapping[int, object], relation: str, rhs=0) -> "LinearConstraint":
        items = tuple(sorted((k, Fraction(v)) for k, v in coeffs.items() if v))
        return cls(items, relation, Fraction(rhs))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    def lhs(self, h: Mapping[int, object]) -> Fraction:
        return sum((c * Fraction(h.get(x, 0)) for x, c in self.coeffs), Fraction(0))

    def holds(self, h: Mapping[int, object]) -> bool:
        v = self.lhs(h)
        if self.relation == ">=":
            return v >= self.rhs
        if self.relation == "<=":
            return v <= self.rhs
        return v == self.rhs


def evaluate(rows: Iterable[LinearConstraint], h: Mapping[int, object]) -> list[LinearConstraint]:
    """Rows violated by ``h`` (exact arithmetic)."""
    return [r for r in rows if not r.holds(h)]


# ---------------------------------------------------------- Shannon rows

def elemental_count(n: int) -> int:
    return n + (n * (n - 1) // 2) * (1 << (n - 2)) if n >= 2 else n


def iter_elemental(n: int) -> Iterator[LinearConstraint]:
    """Elemental rows lazily: ``h(i | rest) >= 0`` then ``I(i;j|K) >= 0``."""
    if not 1 <= n <= ELEMENTAL_GUARD:
        raise GuardError(f"elemental inequalities need 1 <= n <= {ELEMENTAL_GUARD}, got {n}")
    full = (1 << n) - 1
    for i in range(n):
        rest = full & ~(1 << i)
        yield LinearConstraint.of(_combine([(1, full), (-1, rest)]), ">=")
    for i, j in combinations(range(n), 2):
        others = full & ~(1 << i) & ~(1 << j)
        k = others
        while True:
            yield LinearConstraint.of(
                _combine([(1, k | 1 << i), (1, k | 1 << j), (-1, k | 1 << i | 1 << j), (-1, k)]), ">="
            )
            if k == 0:
                break
            k = (k - 1) & others


def elemental_inequalities(n: int) -> list[LinearConstraint]:
    return list(iter_elemental(n))


def ingleton_inequalities(n: int) -> list[LinearConstraint]:
    """Ingleton rows over all subset quadruples, with duplicates and
    vacuous rows removed. Quadruples are taken up to the swaps A<->B and
    C<->D, which leave the inequality unchanged."""
    if not 1 <= n <= INGLETON_GUARD:
        raise GuardError(f"Ingleton inequalities need 1 <= n <= {INGLETON_GUARD}, got {n}")
    size = 1 << n
    seen: set[tuple] = set()
    out = []
    for a in range(size):
        for b in range(a, size):
            ab = a | b
            for c in range(size):
                ac, bc, abc = a | c, b | c, ab | c
                for d in range(c, size):
                    coeffs = _combine(
                        [(1, ab), (1, ac), (1, a | d), (1, bc), (1, b | d),
                         (-1, a), (-1, b), (-1, c | d), (-1, abc), (-1, ab | d)]
                    )
                    if not coeffs:
                        continue
                    key = tuple(sorted(coeffs.items()))
                    if key in seen:
                        continue
                    seen.add(key)
                    out.append(LinearConstraint(tuple((k, Fraction(v)) for k, v in key), ">="))
    return out


# ------------------------------------------------------------- problems

@dataclass(frozen=True)
class LpProblem:
    """Maximise ``objective·h`` subject to ``constraints``; all ``h >= 0``.

    ``fds`` optionally lists functional dependencies ``(lhs, rhs)`` (bitmasks)
    that the constraint set forces; the solver uses them to merge
    coordinates with equal closures before pivoting.
    """

    index: EntropyIndex
    objective: tuple[tuple[int, Fraction], ...]
    constraints: tuple[LinearConstraint, ...]
    fds: tuple[tuple[int, int], ...] | None = None
    sense: str = "max"

    def __post_init__(self):
        top = 1 << self.index.n
        for x, _ in self.objective:
            if not 0 < x < top:
                raise ValueError(f"objective coordinate {x:x} out of range")
        for r in self.constraints:
            for x, _ in r.coeffs:
                if not 0 < x < top:
                    raise ValueError(f"constraint coordinate {x:x} out of range")


@dataclass(frozen=True)
class LpSolution:
    status: str
    optimum: Fraction | None = None
    certificate: Mapping[int, Fraction] | None = field(default=None, compare=False)
    reduced_size: tuple[int, int] = (0, 0)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def network_fds(net: Network) -> list[tuple[int, int]]:
    """Encoder and per-(sink, session) decoder dependencies as bitmask pairs."""
    ns = net.n_sessions
    fds = []
    for e in net.edges:
        lhs = 0
        for s in net.sessions:
            if s.source == e.tail:
                lhs |= 1 << s.id
        for f in net.edges:
            if f.head == e.tail:
                lhs |= 1 << (ns + f.id)
        fds.append((lhs, 1 << (ns + e.id)))
    for s in net.sessions:
        for t in s.sinks:
            lhs = 0
            for f in net.edges:
                if f.head == t:
                    lhs |= 1 << (ns + f.id)
            fds.append((lhs, 1 << s.id))
    return fds


def _network_index(net: Network) -> EntropyIndex:
    names = [f"Y{s.id + 1}" for s in net.sessions] + [f"U{e.id + 1}" for e in net.edges]
    return EntropyIndex(len(names), tuple(names))


def _network_rows(net: Network, fds: Sequence[tuple[int, int]]) -> list[LinearConstraint]:
    ns = net.n_sessions
    rows = []
    for lhs, rhs in fds:
        coeffs = _combine([(1, lhs | rhs), (-1, lhs)])
        rows.append(LinearConstraint.of(coeffs, "="))
    for e in net.edges:
        rows.append(LinearConstraint.of({1 << (ns + e.id): 1}, "<=", e.capacity))
    return rows


def _guard(net: Network, guard: int) -> EntropyIndex:
    idx = _network_index(net)
    if idx.n > guard:
        raise GuardError(f"ground set has {idx.n} elements, guard is {guard}")
    if idx.n == 0:
        raise GuardError("empty ground set")
    return idx


def build_independent_lp(net: Network, weights: Mapping[int, object] | Sequence, guard: int = NETWORK_GUARD) -> LpProblem:
    """Weighted sum-rate LP: Shannon rows, source independence, encoding and
    decoding equalities, edge capacities. ``weights`` maps session index to
    a nonnegative rational (a sequence is read positionally)."""
    idx = _guard(net, guard)
    if not isinstance(weights, Mapping):
        weights = dict(enumerate(weights))
    ns = net.n_sessions
    for s, w in weights.items():
        if not 0 <= s < ns:
            raise ValueError(f"weight for unknown session {s}")
        if Fraction(w) < 0:
            raise ValueError("weights must be nonnegative")
    rows = list(iter_elemental(idx.n))
    if ns > 1:
        src_all = (1 << ns) - 1
        rows.append(LinearConstraint.of(_combine([(1, src_all)] + [(-1, 1 << s) for s in range(ns)]), "="))
    fds = network_fds(net)
    rows.extend(_network_rows(net, fds))
    obj = tuple(sorted((1 << s, Fraction(w)) for s, w in weights.items() if Fraction(w) != 0))
    return LpProblem(idx, obj, tuple(rows), tuple(fds))


def _check_joint(ns: int, joint: Mapping[frozenset, object]) -> dict[int, Fraction]:
    h: dict[int, Fraction] = {}
    for w in range(1, 1 << ns):
        key = frozenset(i for i in range(ns) if w >> i & 1)
        if key not in joint:
            raise ValueError(f"joint entropy missing for sessions {sorted(key)}")
        h[w] = Fraction(joint[key])
    bad = evaluate(iter_elemental(ns), h) if ns else []
    if bad:
        raise ValueError("joint source entropies are not polymatroidal")
    return h


def build_correlated_lp(
    net: Network,
    joint_entropies: Mapping[frozenset, object],
    objective: Mapping[int, object] | None = None,
    guard: int = NETWORK_GUARD,
) -> LpProblem:
    """Correlated-source LP: Shannon rows, ``h(Y_W) = H(Y_W)`` for every
    session subset, encoding/decoding equalities, capacity rows. The
    default objective is zero (a feasibility check)."""
    idx = _guard(net, guard)
    ns = net.n_sessions
    h = _check_joint(ns, joint_entropies)
    rows = list(iter_elemental(idx.n))
    for w, val in h.items():
        rows.append(LinearConstraint.of({w: 1}, "=", val))
    fds = network_fds(net)
    rows.extend(_network_rows(net, fds))
    obj = tuple(sorted((int(k), Fraction(v)) for k, v in (objective or {}).items() if Fraction(v) != 0))
    return LpProblem(idx, obj, tuple(rows), tuple(fds))


# ---------------------------------------------------------------- solving

def _fd_closure(fds: Sequence[tuple[int, int]]):
    def cl(x: int) -> int:
        changed = True
        while changed:
            changed = False
            for lhs, rhs in fds:
                if lhs & x == lhs and rhs & ~x:
                    x |= rhs
                    changed = True
        return x

    return cl


def solve_lp(p: LpProblem) -> LpSolution:
    """Exact optimum of ``p``.

    When ``p.fds`` is set, every coordinate is first identified with the
    coordinate of its closure under those dependencies (an equivalent LP
    for any polymatroid meeting the dependency equalities). The returned
    certificate is the full vector and is checked against every original
    row before being returned.
    """
    coords = list(p.index.coordinates())
    if p.fds:
        cl = _fd_closure(p.fds)
        rep = {x: cl(x) for x in coords}
    else:
        rep = {x: x for x in coords}
    used = sorted(set(rep.values()))
    col = {x: i for i, x in enumerate(used)}

    def reduce(coeffs) -> dict[int, Fraction]:
        d: dict[int, Fraction] = {}
        for x, c in coeffs:
            j = col[rep[x]]
            d[j] = d.get(j, 0) + c
        return {j: c for j, c in d.items() if c}

    rows = []
    seen = set()
    for r in p.constraints:
        d = reduce(r.coeffs)
        key = (tuple(sorted(d.items())), r.relation, r.rhs)
        if key in seen:
            continue
        seen.add(key)
        rows.append((d, r.relation, r.rhs))
    cost = [Fraction(0)] * len(used)
    for j, c in reduce(p.objective).items():
        cost[j] = c
    res = simplex_max(cost, rows, len(used))
    size = (len(rows), len(used))
    if res.status != OPTIMAL:
        return LpSolution(res.status, reduced_size=size)
    cert = {x: res.x[col[rep[x]]] for x in coords}
    bad = evaluate(p.constraints, cert)
    if bad:
        raise ArithmeticError(f"certificate violates {len(bad)} rows")
    value = sum((c * cert[x] for x, c in p.objective), Fraction(0))
    if value != res.value:
        raise ArithmeticError("objective mismatch after expansion")
    return LpSolution(OPTIMAL, value, cert, size)


def lp_region_probe(net: Network, sessions: Iterable[int], guard: int = NETWORK_GUARD) -> Fraction | float:
    """Largest ``sum_{s in W} h(Y_s)`` over the independent-source LP
    (``inf`` if unbounded)."""
    w = sorted(set(sessions))
    if not w:
        return Fraction(0)
    sol = solve_lp(build_independent_lp(net, {s: 1 for s in w}, guard))
    if sol.status == UNBOUNDED:
        return float("inf")
    if sol.status == INFEASIBLE:
        raise ValueError("independent-source LP is infeasible")
    return sol.optimum


# ------------------------------------------------------------------ dumps

def _terms(pairs) -> str:
    return " ".join(f"{x:x}={format_rational(c)}" for x, c in pairs)


def dump_lp(p: LpProblem) -> str:
    lines = [f"n={p.index.n}", "obj: " + _terms(p.objective)]
    if p.fds:
        lines.append("fd: " + " ".join(f"{a:x}>{b:x}" for a, b in p.fds))
    for r in p.constraints:
        lines.append(f"{_terms(r.coeffs)} {r.relation} {format_rational(r.rhs)}")
    return "\n".join(lines) + "\n"


def _parse_terms(tokens: Sequence[str]) -> list[tuple[int, Fraction]]:
    out = []
    for t in tokens:
        x, _, c = t.partition("=")
        out.append((int(x, 16), Fraction(c)))
    return out


def load_lp(text: str) -> LpProblem:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError("missing header n=<k>")
    n = int(lines[0][2:])
    if len(lines) < 2 or not lines[1].startswith("obj:"):
        raise ValueError("missing objective line")
    obj = tuple(sorted(_parse_terms(lines[1][4:].split())))
    fds = None
    rest = lines[2:]
    if rest and rest[0].startswith("fd:"):
        fds = tuple((int(a, 16), int(b, 16)) for a, b in (t.split(">") for t in rest[0][3:].split()))
        rest = rest[1:]
    rows = []
    for ln in rest:
        toks = ln.split()
        if len(toks) < 3 or toks[-2] not in (">=", "=", "<="):
            raise ValueError(f"bad constraint line {ln!r}")
        rows.append(LinearConstraint(tuple(sorted(_parse_terms(toks[:-2]))), toks[-2], Fraction(toks[-1])))
    return LpProblem(EntropyIndex(n), obj, tuple(rows), fds)
