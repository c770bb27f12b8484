"""Exhaustive classification of small operation tables."""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from itertools import permutations, product
from math import factorial
from typing import Iterator

import numpy as np

from .core import BinaryOperation, inverse_op, is_quasigroup, is_uniformity_preserving
from .errors import AlphabetTooLarge, VerificationFailed
from .graph import connectability, is_ergodic, is_irreducible, period
from .partitions import enumerate_stable_partitions
from .residue import MONOID_BUDGET, definitional_strong_ergodicity, is_strongly_ergodic, residue_chain

FAMILY_MAX_Q = {"up": 4, "latin": 4, "all": 3}


def up_tables(q: int, shard: int | None = None) -> Iterator[np.ndarray]:
    """Tables whose columns are permutations; ``shard`` fixes column 0 to the
    ``shard``-th permutation in lexicographic order."""
    perms = [np.array(p, dtype=np.int64) for p in permutations(range(q))]
    first = perms if shard is None else [perms[shard]]
    for col0 in first:
        for rest in product(perms, repeat=q - 1):
            yield np.stack((col0, *rest), axis=1)


def latin_squares(q: int, shard: int | None = None) -> Iterator[np.ndarray]:
    for t in up_tables(q, shard):
        if all(len(set(row)) == q for row in t.tolist()):
            yield t


def all_tables(q: int, shard: int | None = None) -> Iterator[np.ndarray]:
    """Every q x q table; ``shard`` fixes the first column by its index in base q."""
    cols = list(product(range(q), repeat=q))
    first = cols if shard is None else [cols[shard]]
    for col0 in first:
        for rest in product(cols, repeat=q - 1):
            yield np.array((col0, *rest), dtype=np.int64).T


def shard_count(q: int, family: str) -> int:
    return q ** q if family == "all" else factorial(q)


def canonical_form(table: np.ndarray) -> bytes:
    """Least relabelled table bytes, used to keep one table per isomorphism class."""
    q = table.shape[0]
    best = None
    for p in permutations(range(q)):
        s = np.array(p, dtype=np.int64)
        inv = np.argsort(s)
        relabelled = s[table[np.ix_(inv, inv)]]
        key = relabelled.tobytes()
        if best is None or key < best:
            best = key
    return best


def classify_record(op: BinaryOperation, oracle: bool = False, budget: int = MONOID_BUDGET) -> dict:
    # the irreducibility notions are only meaningful for bijective columns
    up = is_uniformity_preserving(op)
    irr = up and is_irreducible(op)
    erg = irr and is_ergodic(op)
    rec = {
        "q": op.q,
        "digest": op.digest,
        "table": op.table.tolist(),
        "uniformity_preserving": up,
        "quasigroup": is_quasigroup(op),
        "irreducible": irr,
        "ergodic": erg,
        "period": period(op) if irr else None,
        "connectability": connectability(op) if irr else None,
        "strongly_ergodic": False,
    }
    if up:
        inv = inverse_op(op)
        rec["inverse_irreducible"] = is_irreducible(inv)
        rec["inverse_ergodic"] = rec["inverse_irreducible"] and is_ergodic(inv)
        rec["inverse_strongly_ergodic"] = is_strongly_ergodic(inv, budget)
    if up and erg:
        degrees = [residue_chain(op, H, budget).degree for H in enumerate_stable_partitions(op)]
        rec["strongly_ergodic"] = max(degrees) == 0
        rec["max_residual_degree"] = max(degrees)
        if oracle:
            rec["definitional_strongly_ergodic"] = definitional_strong_ergodicity(op)
    return rec


def _run_shard(args) -> list[dict]:
    q, family, shard, oracle, canonical, budget = args
    gen = {"up": up_tables, "latin": latin_squares, "all": all_tables}[family]
    out = []
    for t in gen(q, shard):
        if canonical and canonical_form(t) != t.tobytes():
            continue
        out.append(classify_record(BinaryOperation(t), oracle, budget))
    return out


def run_census(q: int, family: str = "up", jobs: int = 1, out_path: str | None = None,
               oracle: bool = False, canonical: bool = False, budget: int = MONOID_BUDGET) -> dict:
    """Classify every table of a family and return a summary.

    ``family`` is ``"up"`` (bijective columns), ``"latin"`` or ``"all"``.
    Records are written to ``out_path`` as JSON lines when given.
    Summary checks that must hold raise ``VerificationFailed`` on violation.
    """
    if family not in FAMILY_MAX_Q:
        raise ValueError(f"unknown family {family!r}")
    if not 1 <= q <= FAMILY_MAX_Q[family]:
        raise AlphabetTooLarge(f"{family} census is capped at q={FAMILY_MAX_Q[family]}")
    tasks = [(q, family, s, oracle, canonical, budget) for s in range(shard_count(q, family))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            shards = list(pool.map(_run_shard, tasks))
    else:
        shards = [_run_shard(t) for t in tasks]
    records = [r for shard in shards for r in shard]
    if out_path:
        with open(out_path, "a") as fh:
            for r in records:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
    return summarize(records, q, family)


def summarize(records: list[dict], q: int, family: str) -> dict:
    flags = ("uniformity_preserving", "quasigroup", "irreducible", "ergodic", "strongly_ergodic")
    combos = Counter(",".join(f for f in flags if r[f]) or "none" for r in records)
    violations = []
    asymmetric = []
    deep = []
    for r in records:
        if r["quasigroup"] and not r["strongly_ergodic"]:
            violations.append(("quasigroup but not strongly ergodic", r["digest"]))
        if r["strongly_ergodic"] and not r["ergodic"]:
            violations.append(("strongly ergodic but not ergodic", r["digest"]))
        if r["ergodic"] and r["period"] != 1:
            violations.append(("ergodic with period > 1", r["digest"]))
        if r["uniformity_preserving"]:
            if r["irreducible"] != r["inverse_irreducible"]:
                violations.append(("irreducibility differs from the inverse", r["digest"]))
            if r["ergodic"] != r["inverse_ergodic"]:
                violations.append(("ergodicity differs from the inverse", r["digest"]))
            if r["strongly_ergodic"] != r["inverse_strongly_ergodic"]:
                asymmetric.append(r["digest"])
        if r["ergodic"] and (r["connectability"] == 1) != r["quasigroup"]:
            violations.append(("connectability 1 does not match quasigroup", r["digest"]))
        if "definitional_strongly_ergodic" in r and r["definitional_strongly_ergodic"] != r["strongly_ergodic"]:
            violations.append(("residue test disagrees with the definition", r["digest"]))
        if r.get("max_residual_degree", 0) >= 2:
            deep.append({"digest": r["digest"], "degree": r["max_residual_degree"]})
    summary = {
        "q": q,
        "family": family,
        "tables": len(records),
        "counts": {f: sum(bool(r[f]) for r in records) for f in flags},
        "combinations": dict(sorted(combos.items())),
        "inverse_strong_ergodicity_asymmetric": asymmetric,
        "residual_degree_at_least_2": deep,
        "violations": violations,
    }
    if violations:
        raise VerificationFailed(f"census found {len(violations)} violated implications: {violations[:3]}")
    return summary
