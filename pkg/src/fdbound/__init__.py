"""Outer bounds on multi-source network coding rates from functional
dependence graphs, with exact LP and linear-code cross-checks."""
from __future__ import annotations

from .bounds import (
    INF,
    Comparison,
    Mode,
    PermutationOrder,
    Region,
    compare_regions,
    cut_set_region,
    fd_region,
    network_sharing_region,
    parse_region,
    pde_region,
)
from .fdg import (
    ClosureKind,
    Fdg,
    GraphKind,
    NodeSet,
    build_construction_a,
    build_construction_b,
    closure,
    d_separates,
    fd_separates,
    subgraph_gbar,
    topological_sort,
)
from .maxsets import (
    MaxSetCollection,
    all_max_sets_acyclic,
    all_max_sets_cyclic,
    brute_force_max_sets,
    is_irreducible,
    is_maximal_irreducible,
)
from .model import (
    Edge,
    Network,
    NetworkFormatError,
    Session,
    butterfly,
    make_network,
    parse_network,
    serialize_network,
    three_layer_view,
    validate_network,
)
from .polylp import (
    LpProblem,
    LpSolution,
    build_correlated_lp,
    build_independent_lp,
    elemental_inequalities,
    ingleton_inequalities,
    lp_region_probe,
    solve_lp,
)
from .rankoracle import LinearCode, RankEntropy, check_code, random_code, rank

__version__ = "0.1.0"
