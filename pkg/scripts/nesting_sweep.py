"""Pointwise comparison of FD, cut-set and PdE constants on random networks.

Also checks the two FD enumeration methods against each other. Counts are
reported both for networks where every sink is reachable from its source
and for unrestricted draws.

Usage: python scripts/nesting_sweep.py [--count N] [--seed S]
"""
from __future__ import annotations

import argparse
import random
from collections import Counter
from dataclasses import dataclass

from fdbound.bounds import cut_set_region, fd_region, pde_region
from fdbound.corpus import demands_connected, random_network


@dataclass
class NestingConfig:
    count: int = 150
    seed: int = 1
    max_total: int = 10
    connected_demands: bool = True


def relations(net) -> Counter:
    t = {k: fd_region(net, k).as_independent().tightened() for k in ("phiA", "phiB", "psi")}
    t["cut"] = cut_set_region(net).as_independent().tightened()
    t["pde"] = pde_region(net).tightened()
    t["ipde"] = pde_region(net, improved=True).tightened()
    out: Counter = Counter()
    le = lambda x, y: all(t[x][w] <= t[y][w] for w in t[x])  # noqa: E731
    out["psi<=phiB"] += not le("psi", "phiB")
    out["phiB<=phiA"] += not le("phiB", "phiA")
    out["phiB<=cut"] += not le("phiB", "cut")
    out["phiA<=cut"] += not le("phiA", "cut")
    out["psi<=pde"] += not le("psi", "pde")
    out["ipde==psi"] += t["ipde"] != t["psi"]
    for k in ("phiA", "phiB", "psi"):
        if fd_region(net, k, method="search").as_independent().tightened() != t[k]:
            out[f"search!={k}"] += 1
    return out


def run(cfg: NestingConfig) -> Counter:
    rng = random.Random(cfg.seed)
    total: Counter = Counter()
    unreachable = 0
    for _ in range(cfg.count):
        net = random_network(rng, max_total=cfg.max_total, connected_demands=cfg.connected_demands)
        unreachable += not demands_connected(net)
        total += relations(net)
    print(f"networks={cfg.count} connected_demands={cfg.connected_demands} with_unreachable_sink={unreachable}")
    for k in ("psi<=phiB", "phiB<=phiA", "phiB<=cut", "phiA<=cut", "psi<=pde", "ipde==psi",
              "search!=phiA", "search!=phiB", "search!=psi"):
        print(f"{k}: {total[k]}")
    return total


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=NestingConfig.count)
    ap.add_argument("--seed", type=int, default=NestingConfig.seed)
    ap.add_argument("--any-demands", action="store_true", help="allow sinks unreachable from their source")
    a = ap.parse_args()
    run(NestingConfig(count=a.count, seed=a.seed, connected_demands=not a.any_demands))
