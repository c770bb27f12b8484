"""Command line interface.

Exit codes: 0 success, 2 invalid input, 3 a cap or budget was hit,
4 an internal consistency check failed.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import catalog
from .census import run_census
from .core import BinaryOperation, elements_of, is_uniformity_preserving, load_table, parse_table
from .errors import CapExceeded, ErgopsError, InputError, VerificationFailed
from .graph import is_ergodic, is_irreducible
from .partitions import (
    Partition,
    SubsetFamily,
    cover_orbit_analysis,
    enumerate_stable_partitions,
    generated_partition,
    partition_period,
)
from .product import ProductSpace, canonical_factorization, decompose, tensor_ops
from .report import Limits, classify, render_text
from .residue import is_strongly_ergodic, residue_chain

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_VERIFY = 0, 2, 3, 4


def _read_op(arg: str, limits: Limits) -> BinaryOperation:
    """A table file path, ``-`` for stdin, or ``name:<catalog entry>``."""
    if arg.startswith("name:"):
        key = arg[5:]
        if key not in catalog.NAMED:
            raise InputError(f"unknown named table {key!r}; known: {', '.join(sorted(catalog.NAMED))}")
        return catalog.NAMED[key]
    if arg == "-":
        return parse_table(sys.stdin.read(), max_q=limits.max_q)
    return load_table(arg, max_q=limits.max_q)


def _read_sets(arg: str, q: int) -> list[list[int]]:
    text = arg if arg.lstrip().startswith("[") else open(arg).read()
    sets = json.loads(text)
    if not isinstance(sets, list) or not all(isinstance(s, list) for s in sets):
        raise InputError("expected a JSON list of lists of element indices")
    for s in sets:
        for x in s:
            if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < q:
                raise InputError(f"element {x!r} is outside 0..{q - 1}")
    return sets


def _read_family(arg: str, q: int) -> SubsetFamily:
    return SubsetFamily.from_sets(q, _read_sets(arg, q))


def _read_partition(arg: str, q: int) -> Partition:
    sets = _read_sets(arg, q)
    if sorted(x for s in sets for x in s) != list(range(q)):
        raise InputError(f"{sets} is not a partition of 0..{q - 1}")
    return Partition.from_sets(q, sets)


def _limits(ns) -> Limits:
    return Limits(max_q=ns.max_q, monoid_budget=ns.monoid_budget, orbit_budget=ns.orbit_budget)


def _emit(ns, payload, text: str | None = None):
    if ns.format == "text" and text is not None:
        print(text)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_classify(ns) -> int:
    limits = _limits(ns)
    op = _read_op(ns.table, limits)
    report = classify(op, limits, timings=ns.timings)
    _emit(ns, report, render_text(report))
    return EXIT_OK


def cmd_census(ns) -> int:
    summary = run_census(ns.q, ns.family, jobs=ns.jobs, out_path=ns.out, oracle=ns.oracle,
                         canonical=ns.canonical, budget=ns.monoid_budget)
    text = "\n".join([f"{summary['family']} tables with q={summary['q']}: {summary['tables']}"]
                     + [f"  {k:<22} {v}" for k, v in summary["counts"].items()]
                     + [f"  inverse asymmetry      {len(summary['inverse_strong_ergodicity_asymmetric'])}",
                        f"  residual degree >= 2   {len(summary['residual_degree_at_least_2'])}"])
    _emit(ns, summary, text)
    return EXIT_OK


def cmd_residue(ns) -> int:
    limits = _limits(ns)
    op = _read_op(ns.table, limits)
    H = _read_partition(ns.partition, op.q)
    chain = residue_chain(op, H, limits.monoid_budget)
    out = chain.to_json()
    text = "\n".join([f"partition     {out['partition']}", f"first residue {out['first_residue']}",
                      f"degree        {out['degree']}"] + [f"  R_{i} = {p}" for i, p in enumerate(out["chain"])])
    _emit(ns, out, text)
    return EXIT_OK


def cmd_stable_partitions(ns) -> int:
    limits = _limits(ns)
    op = _read_op(ns.table, limits)
    parts = enumerate_stable_partitions(op, max_q=limits.enumeration_q)
    rows = [{"blocks": p.to_lists(), "period": partition_period(op, p), "size": p.norm} for p in parts]
    _emit(ns, rows, "\n".join(f"{r['blocks']}  period {r['period']}  size {r['size']}" for r in rows))
    return EXIT_OK


def cmd_generated_partition(ns) -> int:
    limits = _limits(ns)
    op = _read_op(ns.table, limits)
    fam = _read_family(ns.family, op.q)
    result = generated_partition(op, fam, max_q=limits.enumeration_q, method=ns.method, stable=ns.stable)
    out = {"family": fam.to_lists(), "generated": result.to_lists(), "period": partition_period(op, result)}
    _emit(ns, out, f"{out['generated']}  period {out['period']}")
    return EXIT_OK


def cmd_cover_orbit(ns) -> int:
    limits = _limits(ns)
    op = _read_op(ns.table, limits)
    fam = _read_family(ns.family, op.q)
    rep = cover_orbit_analysis(op, fam, max_iter=limits.orbit_budget, require_strong=not ns.allow_weak)
    out = {
        "cover": fam.to_lists(),
        "generated": rep.generated.to_lists(),
        "generated_period": rep.generated_period,
        "witness": rep.witness,
        "preperiod": rep.preperiod,
        "cycle_length": rep.cycle_length,
        "periodic_iterate_is_stable": rep.periodic_iterate_is_stable,
        "components_commute": rep.components_commute,
    }
    text = (f"generated {out['generated']} (period {out['generated_period']}); "
            + (f"reached at n = {rep.witness}" if rep.witness is not None else "never reached"))
    _emit(ns, out, text)
    return EXIT_OK


def _product_flags(op: BinaryOperation) -> dict:
    up = is_uniformity_preserving(op)
    irr = up and is_irreducible(op)
    erg = irr and is_ergodic(op)
    return {"uniformity_preserving": up, "irreducible": irr, "ergodic": erg,
            "strongly_ergodic": erg and is_strongly_ergodic(op)}


def _render_blocks(blocks: list[list[int]], space: ProductSpace, tuples: bool):
    return [[list(space.unflat(x)) for x in b] for b in blocks] if tuples else blocks


def cmd_product(ns) -> int:
    limits = _limits(ns)
    ops = [_read_op(t, limits) for t in ns.tables]
    space = ProductSpace.of(ops)
    prod_op = tensor_ops(ops, max_q=limits.max_q)
    if ns.action == "tensor":
        out = prod_op.to_json()
        out["factors"] = list(space.sizes)
        _emit(ns, out)
        return EXIT_OK
    if ns.action == "check":
        factors = [_product_flags(op) for op in ops]
        whole = _product_flags(prod_op)
        out = {"factors": factors, "product": whole,
               "equivalent": {k: whole[k] == all(f[k] for f in factors) for k in ("uniformity_preserving", "ergodic", "strongly_ergodic")}}
        _emit(ns, out)
        return EXIT_OK
    if ns.partition is None:
        raise InputError(f"product {ns.action} needs --partition")
    H = _read_partition(ns.partition, space.q)
    if ns.action == "factorize":
        factors = canonical_factorization(H, space)
        out = {"factors": [f.to_lists() for f in factors], "sizes": [len(f) for f in factors], "blocks": len(H)}
        _emit(ns, out)
        return EXIT_OK
    first = [int(c) for c in ns.split.split(",")] if ns.split else [0]
    dec = decompose(H, space, first)
    out = {
        "split": [list(dec.first), list(dec.second)],
        "correlation": dec.correlation,
        "L_first": dec.L_first.to_lists(),
        "U_first": dec.U_first.to_lists(),
        "L_second": dec.L_second.to_lists(),
        "U_second": dec.U_second.to_lists(),
        "blocks": [{"block": _render_blocks([elements_of(b.block)], space, ns.tuples)[0],
                    "pieces": [[elements_of(a), elements_of(c)] for a, c in b.pieces]} for b in dec.blocks],
    }
    _emit(ns, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergops", description=__doc__.splitlines()[0])
    parser.add_argument("--max-q", type=int, default=Limits.max_q, help="largest accepted alphabet")
    parser.add_argument("--monoid-budget", type=int, default=Limits.monoid_budget,
                        help="maximum number of matrices in a residue monoid")
    parser.add_argument("--orbit-budget", type=int, default=Limits.orbit_budget,
                        help="maximum iterations when following a cover orbit")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for the census")
    parser.add_argument("--format", choices=("json", "text"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)
    table_help = "table JSON file, '-' for stdin, or name:<entry> for a built-in table"

    p = sub.add_parser("classify", help="classify one operation")
    p.add_argument("table", help=table_help)
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (not byte-stable)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("census", help="classify every small table of a family")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--family", choices=("up", "latin", "all"), default="up")
    p.add_argument("--out", help="append per-table JSON lines to this file")
    p.add_argument("--oracle", action="store_true", help="cross-check against the definitional test")
    p.add_argument("--canonical", action="store_true", help="keep one table per relabelling class")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("residue", help="residue chain of a stable partition")
    p.add_argument("table", help=table_help)
    p.add_argument("--partition", required=True, help="JSON list of blocks or a file holding one")
    p.set_defaults(func=cmd_residue)

    p = sub.add_parser("stable-partitions", help="list all stable partitions")
    p.add_argument("table", help=table_help)
    p.set_defaults(func=cmd_stable_partitions)

    p = sub.add_parser("generated-partition", help="finest periodic partition coarser than a family")
    p.add_argument("table", help=table_help)
    p.add_argument("--family", required=True, help="JSON list of subsets or a file holding one")
    p.add_argument("--method", choices=("auto", "wedge", "closure"), default="auto")
    p.add_argument("--stable", action="store_true", help="require the generated stable partition")
    p.set_defaults(func=cmd_generated_partition)

    p = sub.add_parser("cover-orbit", help="iterate a cover until it reaches its generated partition")
    p.add_argument("table", help=table_help)
    p.add_argument("--family", required=True, help="JSON list of subsets or a file holding one")
    p.add_argument("--allow-weak", action="store_true", help="analyse operations that are not strongly ergodic")
    p.set_defaults(func=cmd_cover_orbit)

    p = sub.add_parser("product", help="tensor products of operations")
    p.add_argument("action", choices=("tensor", "check", "decompose", "factorize"))
    p.add_argument("tables", nargs="+", help=table_help)
    p.add_argument("--partition", help="partition of the product in flat indices")
    p.add_argument("--split", help="comma-separated 0-based factor indices of the first part (default 0)")
    p.add_argument("--tuples", action="store_true", help="render product blocks as coordinate tuples")
    p.set_defaults(func=cmd_product)
    return parser


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CAP
    except VerificationFailed as exc:
        print(f"internal check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ErgopsError as exc:  # pragma: no cover - every error belongs to a family above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
