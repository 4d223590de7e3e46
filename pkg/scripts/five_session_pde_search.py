"""Exhaustive search for a five-session three-layer unit-capacity network
whose PdE constants match a target system, whose independent-source FD bound
on the full session set is 4, and whose plain PdE bound there is 5.

Two butterflies on sessions 1,2 and 3,4 are cross-linked by two side edges.
Session 5 is grafted on by adding it to the alpha sets of the four inner
edges and to any beta sets. Every edge carrying session 5 then stays a
function of the inner edges, which is what the FD bound of 4 needs. The
1024 placements are scanned in order and the first match is written to
tests/data/five_session_pde.json, which enables the matching acceptance test.

Usage: python scripts/five_session_pde_search.py [--guard G]
"""
from __future__ import annotations

import argparse
import itertools
import time
from dataclasses import dataclass
from pathlib import Path

from fdbound.bounds import Mode, Region, fd_region, pde_region, session_subsets
from fdbound.corpus import three_layer_network
from fdbound.model import serialize_network

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "five_session_pde.json"
FULL = frozenset(range(5))
BASE = [({1}, {2, 3, 4}), ({1, 2}, {1, 2}), ({2}, {1}), ({3}, {4}), ({3, 4}, {3, 4}), ({4}, {1, 2, 3})]


@dataclass
class SearchConfig:
    guard: int = 80
    inner: tuple = (1, 2, 3, 4)


def target() -> dict:
    """Tightened constants of the listed PdE system (1-based sessions)."""
    c: dict = {}

    def put(w, v):
        w = frozenset(x - 1 for x in w)
        c[w] = min(c.get(w, v), v)

    for i in range(1, 5):
        put({i}, 1)
    put({5}, 2)
    for i, j in itertools.combinations(range(1, 5), 2):
        put({i, j}, 2)
    for i in range(1, 5):
        put({i, 5}, 3)
    for i in (3, 4, 5):
        put({i, 1, 2}, 3)
    for i in (1, 2, 5):
        put({i, 3, 4}, 3)
    for i, j in ((1, 3), (1, 4), (2, 3), (2, 4)):
        put({i, j, 5}, 4)
    for q in itertools.combinations(range(1, 6), 4):
        put(set(q), 4)
    put(range(1, 6), 5)
    return Region(Mode.INDEPENDENT, 5, {w: c.get(w, float("inf")) for w in session_subsets(5)}).tightened()


def placements(cfg: SearchConfig):
    """Yield middle-edge lists with session 5 added to alpha and beta sets."""
    for am in range(1 << len(cfg.inner)):
        alpha5 = {e for k, e in enumerate(cfg.inner) if am >> k & 1}
        for bm in range(1 << len(BASE)):
            mid = [(set(a) | ({5} if i in alpha5 else set()), set(b) | ({5} if bm >> i & 1 else set())) for i, (a, b) in enumerate(BASE)]
            if any(5 in a for a, _ in mid) and any(5 in b for _, b in mid):
                yield mid


def check(mid, tgt, guard: int):
    """Return (matches, plain PdE on S, psi on S) for one placement."""
    net = three_layer_network(5, [(a, b, 1) for a, b in mid])
    p = pde_region(net, guard=guard).tightened()
    if any(p[w] != tgt[w] for w in tgt):
        return False, p[FULL], None
    s = fd_region(net, "psi", method="search", guard=guard).tightened()
    ok = all(s[w] == tgt[w] for w in tgt if w != FULL) and s[FULL] == 4
    return ok, p[FULL], s[FULL]


def search(cfg: SearchConfig):
    tgt = target()
    for n, mid in enumerate(placements(cfg), 1):
        ok, plain, psi = check(mid, tgt, cfg.guard)
        if psi is not None:
            print(f"{n}: plain {plain} psi {psi}", [(sorted(a), sorted(b)) for a, b in mid], flush=True)
        if ok:
            return mid
    return None


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--guard", type=int, default=SearchConfig.guard)
    a = ap.parse_args()
    t0 = time.time()
    mid = search(SearchConfig(guard=a.guard))
    print(f"{'found' if mid else 'no match'} after {time.time() - t0:.0f}s")
    if mid:
        OUT.write_text(serialize_network(three_layer_network(5, [(a, b, 1) for a, b in mid])))
        print(f"wrote {OUT}")
