"""Full classification of one operation as a JSON-ready dict."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .core import BinaryOperation, is_quasigroup, is_uniformity_preserving
from .errors import VerificationFailed
from .graph import connectability, ergodic_classes, is_ergodic, is_irreducible, period
from .partitions import ENUMERATION_MAX_Q, ORBIT_BUDGET, enumerate_stable_partitions, partition_period
from .residue import MONOID_BUDGET, ORACLE_MAX_Q, residue_chain, strong_connectability


@dataclass(frozen=True)
class Limits:
    max_q: int = 16
    enumeration_q: int = ENUMERATION_MAX_Q
    oracle_q: int = ORACLE_MAX_Q
    monoid_budget: int = MONOID_BUDGET
    orbit_budget: int = ORBIT_BUDGET


def classify(op: BinaryOperation, limits: Limits = Limits(), timings: bool = False,
             stable_detail: bool = True) -> dict:
    """Flags, numbers and structures of ``op``.

    Stable partitions and residues are included for ergodic operations.
    Output is deterministic unless ``timings`` is set.
    """
    clock = {}
    t0 = time.perf_counter()
    up = is_uniformity_preserving(op)
    qg = is_quasigroup(op)
    irr = up and is_irreducible(op)
    erg = irr and is_ergodic(op)
    report: dict = {
        "digest": op.digest,
        "q": op.q,
        "flags": {
            "uniformity_preserving": up,
            "quasigroup": qg,
            "irreducible": irr,
            "ergodic": erg,
            "strongly_ergodic": False,
        },
        "numbers": {},
        "structures": {},
    }
    if op.labels is not None:
        report["labels"] = list(op.labels)
    if irr:
        report["numbers"]["period"] = period(op)
        report["numbers"]["connectability"] = connectability(op)
        report["structures"]["ergodic_classes"] = [_elements(c) for c in ergodic_classes(op)]
    clock["graph"] = time.perf_counter() - t0
    if erg:
        t1 = time.perf_counter()
        stable = enumerate_stable_partitions(op, max_q=limits.enumeration_q)
        rows = []
        strong = True
        for H in stable:
            chain = residue_chain(op, H, limits.monoid_budget)
            strong &= chain.degree == 0
            if stable_detail:
                rows.append({
                    "blocks": H.to_lists(),
                    "period": partition_period(op, H),
                    "size": H.norm,
                    "residue": chain.to_json(),
                })
        report["flags"]["strongly_ergodic"] = strong
        report["structures"]["stable_partitions"] = rows if stable_detail else len(stable)
        clock["residue"] = time.perf_counter() - t1
        if strong and op.q <= limits.oracle_q:
            report["numbers"]["strong_connectability"] = strong_connectability(op, max_q=limits.oracle_q)
    _check_implications(report["flags"])
    if timings:
        report["timings"] = {k: round(v, 6) for k, v in clock.items()}
    return report


def _elements(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _check_implications(flags: dict):
    chain = [("quasigroup", "strongly_ergodic"), ("strongly_ergodic", "ergodic"), ("ergodic", "irreducible")]
    for a, b in chain:
        if flags[a] and not flags[b]:
            raise VerificationFailed(f"{a} holds but {b} does not")
    if flags["quasigroup"] and not flags["uniformity_preserving"]:
        raise VerificationFailed("a Latin square must have bijective columns")


def render_text(report: dict) -> str:
    lines = [f"q = {report['q']}  digest {report['digest'][:16]}"]
    for k, v in report["flags"].items():
        lines.append(f"  {k:<22} {'yes' if v else 'no'}")
    for k, v in report["numbers"].items():
        lines.append(f"  {k:<22} {v}")
    classes = report["structures"].get("ergodic_classes")
    if classes is not None:
        lines.append(f"  ergodic classes        {classes}")
    for row in report["structures"].get("stable_partitions", []) or []:
        if isinstance(row, dict):
            res = row["residue"]
            lines.append(f"  stable {row['blocks']} period {row['period']} size {row['size']} "
                         f"residue {res['chain'][-1]} degree {res['degree']}")
    if "timings" in report:
        lines.append("  timings " + ", ".join(f"{k} {v:.4f}s" for k, v in report["timings"].items()))
    return "\n".join(lines)

