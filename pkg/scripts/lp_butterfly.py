"""Exact LP outer bound on the butterfly, compared with the FD and cut-set
constants, for a few weight vectors and capacity assignments.

Usage: python scripts/lp_butterfly.py
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from fdbound.bounds import cut_set_region, fd_region
from fdbound.model import butterfly, format_rational
from fdbound.polylp import build_independent_lp, solve_lp


@dataclass
class LpConfig:
    capacities: list[list[int]] = field(default_factory=lambda: [[1] * 7, [1, 3, 3, 1, 3, 3, 3]])
    weights: list[tuple[int, int]] = field(default_factory=lambda: [(1, 1), (1, 0), (0, 1), (2, 1)])


def run(cfg: LpConfig) -> None:
    for caps in cfg.capacities:
        net = butterfly(caps)
        fd = fd_region(net, "psi").tightened()
        cut = cut_set_region(net).as_independent().tightened()
        print(f"capacities {caps}")
        for w in cfg.weights:
            t0 = time.perf_counter()
            sol = solve_lp(build_independent_lp(net, w))
            rows, cols = sol.reduced_size
            # region constants compare directly only for 0/1 weights
            ws = frozenset(i for i, x in enumerate(w) if x)
            extra = ""
            if set(w) <= {0, 1}:
                extra = f" fd={format_rational(Fraction(fd[ws]))} cut={format_rational(Fraction(cut[ws]))}"
            print(f"  w={w} lp={format_rational(sol.optimum)}{extra} reduced={rows}x{cols} {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    run(LpConfig())
