"""Enumeration of maximal irreducible sets.

Two recursive enumerators (augmentation for acyclic graphs, exclusion for
cyclic ones) plus an exhaustive oracle for small graphs.
"""
from __future__ import annotations

from dataclasses import dataclass

from .fdg import (
    ClosureKind,
    Fdg,
    GraphKindError,
    NodeSet,
    _check_kind,
    as_bits,
    closure_bits,
    members,
    topological_sort,
)

__all__ = [
    "MaxSetCollection",
    "is_irreducible",
    "is_maximal_irreducible",
    "all_max_sets_acyclic",
    "all_max_sets_cyclic",
    "brute_force_max_sets",
    "format_collection",
    "parse_collection",
    "BRUTE_FORCE_GUARD",
]

BRUTE_FORCE_GUARD = 20


@dataclass(frozen=True, eq=False)
class MaxSetCollection:
    graph: Fdg
    kind: ClosureKind
    sets: tuple[NodeSet, ...]
    calls: int = 0
    warning: str | None = None
    acyclic: bool = False

    def __iter__(self):
        return iter(self.sets)

    def __len__(self) -> int:
        return len(self.sets)

    def as_frozensets(self) -> set[frozenset[int]]:
        return {frozenset(s) for s in self.sets}

    def format(self) -> str:
        return format_collection(self.sets)


def _canonical(bits_list) -> tuple[NodeSet, ...]:
    uniq = {b for b in bits_list}
    return tuple(sorted((NodeSet.from_bits(b) for b in uniq), key=NodeSet.sort_key))


def format_collection(sets) -> str:
    """One set per line, 1-based ids, e.g. ``{3,7}``."""
    return "".join(s.format() + "\n" for s in sets)


def parse_collection(text: str) -> list[NodeSet]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if not (line.startswith("{") and line.endswith("}")):
            raise ValueError(f"bad set line {line!r}")
        body = line[1:-1].strip()
        out.append(NodeSet(int(t) - 1 for t in body.split(",")) if body else NodeSet())
    return out


# ------------------------------------------------------------- definitions

def _subsets_proper(bits: int):
    """Proper subsets of ``bits`` (largest first)."""
    if bits == 0:
        return
    sub = (bits - 1) & bits
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & bits


def _irreducible_bits(g: Fdg, b: int, kind: ClosureKind, cache: dict | None = None) -> bool:
    if cache is None:
        cache = {}

    def cl(x: int) -> int:
        r = cache.get(x)
        if r is None:
            r = cache[x] = closure_bits(g, x, kind)
        return r

    # single removals first: the cheap necessary condition
    for v in members(b):
        if cl(b & ~(1 << v)) >> v & 1:
            return False
    for a in _subsets_proper(b):
        if b & ~a & ~cl(a) == 0:
            return False
    return True


def is_irreducible(g: Fdg, b, kind: ClosureKind = ClosureKind.PHI_A) -> bool:
    """No proper subset ``a`` of ``b`` has ``b ⊆ a ∪ closure(a)``."""
    _check_kind(g, kind)
    return _irreducible_bits(g, as_bits(b), kind)


def _acyclic_mode(g: Fdg, kind: ClosureKind, acyclic: bool | None) -> bool:
    if acyclic is None:
        return kind is ClosureKind.PHI_A and topological_sort(g).acyclic
    if acyclic and kind is not ClosureKind.PHI_A:
        raise GraphKindError("the acyclic maximality test is defined for PhiA only")
    return acyclic


def _ancestors_bits(g: Fdg, a: int) -> int:
    seen = 0
    todo = 0
    for v in members(a):
        todo |= g.parents[v]
    while todo:
        low = todo & -todo
        todo ^= low
        if not seen & low:
            seen |= low
            todo |= g.parents[low.bit_length() - 1] & ~seen
    return seen


def _covered(g: Fdg, a: int, kind: ClosureKind, acyclic: bool, cl: int | None = None) -> bool:
    if cl is None:
        cl = closure_bits(g, a, kind)
    rest = g.full & ~a & ~cl
    if acyclic:
        rest &= ~_ancestors_bits(g, a)
    return rest == 0


def is_maximal_irreducible(g: Fdg, a, kind: ClosureKind = ClosureKind.PHI_A, acyclic: bool | None = None) -> bool:
    """Maximality test.

    Cyclic reading: ``a`` is irreducible and ``a ∪ closure(a)`` covers every
    node. Acyclic reading (PhiA on a DAG, chosen automatically): ``a`` is
    irreducible and every node outside ``a`` is in ``closure(a)`` or is an
    ancestor of ``a``.
    """
    _check_kind(g, kind)
    acyclic = _acyclic_mode(g, kind, acyclic)
    bits = as_bits(a)
    return _covered(g, bits, kind, acyclic) and _irreducible_bits(g, bits, kind)


# -------------------------------------------------------------- algorithms

def all_max_sets_acyclic(g: Fdg, seed=()) -> MaxSetCollection:
    """Augmentation recursion from an irreducible seed on an acyclic graph.

    ``calls`` counts executed invocations; repeated arguments are served
    from a memo and not counted again.
    """
    if not topological_sort(g).acyclic:
        raise GraphKindError("all_max_sets_acyclic needs an acyclic graph")
    seed_bits = as_bits(seed)
    kind = ClosureKind.PHI_A
    out: set[int] = set()
    visited: set[int] = set()
    calls = 0
    stack = [seed_bits]
    while stack:
        a = stack.pop()
        if a in visited:
            continue
        visited.add(a)
        calls += 1
        cand = g.full & ~a & ~closure_bits(g, a, kind) & ~_ancestors_bits(g, a)
        if not cand:
            out.add(a)
            continue
        for b in sorted(members(cand), reverse=True):
            stack.append(a | 1 << b)
    return MaxSetCollection(g, kind, _canonical(out), calls, None, True)


def all_max_sets_cyclic(g: Fdg, excluded=(), kind: ClosureKind = ClosureKind.PHI_A) -> MaxSetCollection:
    """Exclusion recursion: all maximal irreducible sets avoiding ``excluded``.

    If the complement of ``excluded`` is not closure-complete the
    precondition fails and an empty collection with a warning is returned.
    """
    _check_kind(g, kind)
    ex0 = as_bits(excluded)
    full = g.full
    cache: dict[int, int] = {}

    def cl(x: int) -> int:
        r = cache.get(x)
        if r is None:
            r = cache[x] = closure_bits(g, x, kind)
        return r

    start = full & ~ex0
    if start | cl(start) != full:
        return MaxSetCollection(
            g, kind, (), 0, "precondition failed: complement of the excluded set is not complete", False
        )
    out: set[int] = set()
    visited: set[int] = set()
    calls = 0
    stack = [ex0]
    while stack:
        ex = stack.pop()
        if ex in visited:
            continue
        visited.add(ex)
        calls += 1
        comp = full & ~ex
        det = [v for v in members(comp) if cl(comp & ~(1 << v)) >> v & 1]
        if not det:
            out.add(comp)
            continue
        for v in reversed(det):
            stack.append(ex | 1 << v)
    return MaxSetCollection(g, kind, _canonical(out), calls, None, False)


def brute_force_max_sets(
    g: Fdg,
    kind: ClosureKind = ClosureKind.PHI_A,
    acyclic: bool | None = None,
    guard: int = BRUTE_FORCE_GUARD,
) -> MaxSetCollection:
    """Exhaustive reference enumeration over all node subsets.

    Every subset is screened with the covering condition; survivors are
    checked for irreducibility against all of their proper subsets, so the
    answer does not rely on any monotonicity of the closure.
    """
    _check_kind(g, kind)
    if g.n > guard:
        raise ValueError(f"brute force guard exceeded: {g.n} nodes > {guard}")
    acyclic = _acyclic_mode(g, kind, acyclic)
    size = 1 << g.n
    cls = [closure_bits(g, m, kind) for m in range(size)]
    cache = dict(enumerate(cls))
    anc = [_ancestors_bits(g, m) for m in range(size)] if acyclic else None
    full = g.full
    out = []
    for m in range(size):
        rest = full & ~m & ~cls[m]
        if anc is not None:
            rest &= ~anc[m]
        if rest:
            continue
        if _irreducible_bits(g, m, kind, cache):
            out.append(m)
    return MaxSetCollection(g, kind, _canonical(out), 0, None, acyclic)
