"""Command-line front end.

Exit codes: 0 success, 1 domain error (unreadable or invalid network,
guard exceeded, failed check), 2 usage error. Diagnostics go to stderr;
stdout carries only the module text formats.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Sequence

from .bounds import (
    Mode,
    Region,
    compare_regions,
    cut_set_region,
    fd_region,
    network_sharing_region,
    pde_region,
    session_subsets,
)
from .fdg import ClosureKind, build_construction_a, build_construction_b, node_table, to_dot
from .maxsets import all_max_sets_cyclic, brute_force_max_sets
from .model import Network, format_rational, parse_capacity, parse_network, validate_network
from .polylp import NETWORK_GUARD, build_independent_lp, dump_lp, solve_lp
from .rankoracle import achieved_rates, code_violations, dump_code, random_code

COMMANDS = ("validate", "fdg-dump", "maxsets", "bound", "lp", "compare", "oracle")
BOUNDS = ("fd", "cutset", "ns", "pde", "ipde", "lp")


class DomainError(Exception):
    pass


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fdbound", description="Functional dependence bounds for network coding.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--net", help="network document (JSON)")
    p.add_argument("--construction", choices=("A", "B"), default=None)
    p.add_argument("--kind", choices=[k.value for k in ClosureKind], default=None)
    p.add_argument("--bound", default=None, help="region: fd|cutset|ns|pde|ipde|lp; compare takes two, comma separated")
    p.add_argument("--W", dest="w", default=None, help="comma list of 1-based session ids, or 'all'")
    p.add_argument("--independent", action="store_true")
    p.add_argument("--improved", action="store_true")
    p.add_argument("--weights", default=None, help="comma list of nonnegative rationals, one per session")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--guard", type=int, default=None)
    p.add_argument("--method", choices=("maxsets", "search"), default="maxsets", help="fd: how constants are found")
    p.add_argument("--brute", action="store_true", help="maxsets: use the exhaustive oracle")
    p.add_argument("--table", action="store_true", help="fdg-dump: print the node table instead of DOT")
    p.add_argument("--dump", action="store_true", help="lp: print the problem instead of solving it")
    return p


def _load(path: str | None) -> Network:
    if path is None:
        raise UsageError("--net is required")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DomainError(f"cannot read network document: {exc}") from None
    try:
        net = parse_network(text)
    except ValueError as exc:
        raise DomainError(f"cannot read network document: {exc}") from None
    return net


def _require_valid(net: Network) -> None:
    rep = validate_network(net)
    if not rep.ok:
        raise DomainError("invalid network: " + "; ".join(rep.violations))


def _kind(args) -> ClosureKind:
    if args.kind is not None:
        return ClosureKind.parse(args.kind)
    return ClosureKind.PSI if args.independent else ClosureKind.PHI_B


def _sessions(args, ns: int) -> list[frozenset[int]] | None:
    """Selected W sets; ``None`` means every subset."""
    if args.w is None:
        return None
    if args.w.strip() == "all":
        return [frozenset(range(ns))]
    try:
        ids = {int(t) for t in args.w.split(",") if t.strip()}
    except ValueError:
        raise UsageError(f"bad --W value {args.w!r}") from None
    if not ids or any(not 1 <= i <= ns for i in ids):
        raise UsageError(f"--W must name sessions among 1..{ns}")
    return [frozenset(i - 1 for i in ids)]


def _region(net: Network, which: str, args) -> Region:
    if which == "fd":
        kind = _kind(args)
        r = fd_region(net, kind, method=args.method)
    elif which == "cutset":
        r = cut_set_region(net)
    elif which == "ns":
        r = network_sharing_region(net)
    elif which in ("pde", "ipde"):
        kw = {} if args.guard is None else {"guard": args.guard}
        r = pde_region(net, improved=args.improved or which == "ipde", **kw)
    elif which == "lp":
        consts = {w: _lp_value(net, {s: 1 for s in w}, args) for w in session_subsets(net.n_sessions)}
        r = Region(Mode.INDEPENDENT, net.n_sessions, consts, "lp")
    else:
        raise UsageError(f"unknown bound {which!r}; choose from {', '.join(BOUNDS)}")
    if args.independent and r.mode is Mode.CORRELATED:
        r = r.as_independent()
    return r


def _lp_value(net: Network, weights, args):
    guard = NETWORK_GUARD if args.guard is None else args.guard
    sol = solve_lp(build_independent_lp(net, weights, guard))
    if sol.status == "unbounded":
        return float("inf")
    if sol.status != "optimal":
        raise DomainError(f"LP {sol.status}")
    return sol.optimum


def _filter(text: str, region: Region, selected) -> str:
    if selected is None:
        return text
    lines = text.splitlines()
    order = session_subsets(region.n_sessions)
    return "".join(lines[order.index(w)] + "\n" for w in selected)


def _weights(args, ns: int) -> list[Fraction]:
    if args.weights is not None:
        try:
            ws = [parse_capacity(t.strip()) for t in args.weights.split(",")]
        except ValueError:
            raise UsageError(f"bad --weights value {args.weights!r}") from None
        if len(ws) != ns:
            raise UsageError(f"--weights needs {ns} entries")
        return ws
    sel = _sessions(args, ns)
    w = sel[0] if sel else frozenset(range(ns))
    return [Fraction(1 if s in w else 0) for s in range(ns)]


def _run(args, out) -> int:
    if args.command == "validate":
        net = _load(args.net)
        rep = validate_network(net)
        if rep.ok:
            out.write("ok\n")
            return 0
        for v in rep.violations:
            out.write(v + "\n")
        return 1

    net = _load(args.net)
    _require_valid(net)

    if args.command in ("fdg-dump", "maxsets"):
        cons = args.construction or ("A" if _kind(args) is ClosureKind.PHI_A else "B")
        g = build_construction_a(net) if cons == "A" else build_construction_b(net)
        if args.command == "fdg-dump":
            out.write(node_table(g) if args.table else to_dot(g))
            return 0
        kind = ClosureKind.parse(args.kind) if args.kind else (ClosureKind.PHI_A if cons == "A" else ClosureKind.PHI_B)
        if args.brute:
            kw = {} if args.guard is None else {"guard": args.guard}
            col = brute_force_max_sets(g, kind, acyclic=False, **kw)
        else:
            col = all_max_sets_cyclic(g, (), kind)
        if col.warning:
            sys.stderr.write(col.warning + "\n")
        out.write(col.format())
        return 0

    if args.command == "bound":
        which = args.bound or "fd"
        if which == "lp" and args.weights is not None:
            out.write(format_rational(_lp_value(net, _weights(args, net.n_sessions), args)) + "\n")
            return 0
        r = _region(net, which, args)
        out.write(_filter(r.format(), r, _sessions(args, net.n_sessions)))
        return 0

    if args.command == "lp":
        ws = _weights(args, net.n_sessions)
        guard = NETWORK_GUARD if args.guard is None else args.guard
        p = build_independent_lp(net, ws, guard)
        if args.dump:
            out.write(dump_lp(p))
            return 0
        sol = solve_lp(p)
        if sol.status == "unbounded":
            out.write("inf\n")
        elif sol.status != "optimal":
            raise DomainError(f"LP {sol.status}")
        else:
            out.write(format_rational(sol.optimum) + "\n")
        return 0

    if args.command == "compare":
        spec = (args.bound or "fd,cutset").split(",")
        if len(spec) != 2:
            raise UsageError("compare needs --bound r1,r2")
        r1, r2 = (_region(net, b.strip(), args) for b in spec)
        if r1.mode != r2.mode:
            r1, r2 = r1.as_independent(), r2.as_independent()
        c = compare_regions(r1, r2)
        line = c.relation
        for wit in (c.witness, c.witness2):
            if wit is not None:
                line += " {" + ",".join(str(s + 1) for s in sorted(wit)) + "}"
        out.write(line + "\n")
        return 0

    if args.command == "oracle":
        attempts = 100 if args.guard is None else args.guard
        code = random_code(net, q=2, attempts=attempts, seed=args.seed)
        if code is None:
            raise DomainError(f"no valid code found in {attempts} attempts")
        out.write(dump_code(code))
        bad = code_violations(code, net)
        for v in bad:
            sys.stderr.write(v + "\n")
        rates = ",".join(format_rational(r) for r in achieved_rates(code))
        sys.stderr.write(f"rates {rates}\n")
        return 1 if bad else 0

    raise UsageError(f"unknown command {args.command!r}")  # pragma: no cover


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = _parser().parse_args(argv)
        return _run(args, out)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except DomainError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
