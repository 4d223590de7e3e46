"""Network-sharing vs FD and the bound chain on random three-layer networks.

Usage: python scripts/three_layer_sweep.py [--count N] [--seed S] [--max-fdg-nodes K]
"""
from __future__ import annotations

import argparse
import random
import time
from collections import Counter
from dataclasses import dataclass

from fdbound.bounds import cut_set_region, fd_region, network_sharing_region, pde_region
from fdbound.corpus import random_three_layer
from fdbound.fdg import build_construction_b

MAXSETS_NODE_LIMIT = 14


@dataclass
class SweepConfig:
    count: int = 100
    seed: int = 7
    max_sessions: int = 4
    max_middle: int = 6
    max_fdg_nodes: int = 20


def fd_method(net) -> str:
    """Algorithm-based enumeration on small graphs, edge-subset search otherwise."""
    return "maxsets" if build_construction_b(net).n <= MAXSETS_NODE_LIMIT else "search"


def check_network(net) -> list[str]:
    """Names of every relation that fails on ``net`` (tightened constants)."""
    m = fd_method(net)
    ns = network_sharing_region(net).tightened()
    pb = fd_region(net, "phiB", method=m).as_independent().tightened()
    ps = fd_region(net, "psi", method=m).tightened()
    cs = cut_set_region(net).as_independent().tightened()
    pde = pde_region(net, guard=64).tightened()
    ipde = pde_region(net, improved=True, guard=64).tightened()
    bad = []
    if ns != pb:
        bad.append("ns==phiB")
    if any(ps[w] > pb[w] for w in ps):
        bad.append("psi<=phiB")
    if any(pb[w] > cs[w] for w in pb):
        bad.append("phiB<=cutset")
    if any(ps[w] > pde[w] for w in ps):
        bad.append("psi<=pde")
    if ipde != ps:
        bad.append("ipde==psi")
    return bad


def corpus(cfg: SweepConfig):
    """``count`` networks split evenly over session counts ``1..max_sessions``."""
    rng = random.Random(cfg.seed)
    out = []
    for i in range(cfg.count):
        k = 1 + i % cfg.max_sessions
        out.append(random_three_layer(rng, k, cfg.max_middle, max_fdg_nodes=cfg.max_fdg_nodes, min_sessions=k))
    return out


def run(cfg: SweepConfig) -> Counter:
    fails: Counter = Counter()
    sizes: Counter = Counter()
    t0 = time.time()
    for net in corpus(cfg):
        sizes[net.n_sessions] += 1
        for name in check_network(net):
            fails[name] += 1
    print(f"networks={cfg.count} sessions={dict(sorted(sizes.items()))} seconds={time.time() - t0:.1f}")
    for name in ("ns==phiB", "psi<=phiB", "phiB<=cutset", "psi<=pde", "ipde==psi"):
        print(f"{name}: {fails[name]} violations")
    return fails


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=SweepConfig.count)
    ap.add_argument("--seed", type=int, default=SweepConfig.seed)
    ap.add_argument("--max-fdg-nodes", type=int, default=SweepConfig.max_fdg_nodes)
    a = ap.parse_args()
    run(SweepConfig(count=a.count, seed=a.seed, max_fdg_nodes=a.max_fdg_nodes))
