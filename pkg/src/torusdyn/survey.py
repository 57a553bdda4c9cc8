"""Survey of companion-matrix automorphisms over coefficient boxes.

Enumerates monic degree-N integer polynomials with constant term +-1 and
middle coefficients bounded by a height, classifies each companion
matrix, and aggregates class counts.  Enumeration order is fixed, so
catalogs are byte-reproducible; with several worker processes the merge
preserves that order.
"""
from __future__ import annotations

import itertools
import multiprocessing
from typing import Iterator, Optional

from .intmatrix import IntMatrix
from .intpoly import IntPoly
from .lattice import invariant_factors
from .splitting import classify


def enumerate_polynomials(dim: int, height: int, reciprocal_only: bool = False,
                          limit: Optional[int] = None) -> Iterator[tuple[int, tuple[int, ...]]]:
    """(index, ascending coefficients) for monic degree-dim polynomials with
    constant term +-1 and |middle coefficients| <= height."""
    count = 0
    index = 0
    span = range(-height, height + 1)
    for a0 in (1, -1):
        for mid in itertools.product(span, repeat=dim - 1):
            coeffs = (a0, *mid, 1)
            index += 1
            if reciprocal_only and coeffs != tuple(reversed(coeffs)):
                continue
            yield index - 1, coeffs
            count += 1
            if limit is not None and count >= limit:
                return


def classify_entry(item: tuple[int, tuple[int, ...]]) -> dict:
    """Worker: classification record for one polynomial (picklable)."""
    index, coeffs = item
    p = IntPoly(coeffs)
    a = IntMatrix.companion(p)
    report = classify(a)
    a_minus_i = a - IntMatrix.identity(a.n)
    key = f"cp:{list(coeffs)}|snf:{invariant_factors(a_minus_i.rows)}"
    return {
        "index": index,
        "coeffs": list(coeffs),
        "conjugacy_key": key,
        "report": report.to_json(),
    }


def run_survey(dim: int, height: int, limit: Optional[int] = None,
               reciprocal_only: bool = False, jobs: int = 1) -> tuple[list[dict], dict]:
    """Classify the whole coefficient box; returns (entries, summary)."""
    items = enumerate_polynomials(dim, height, reciprocal_only, limit)
    if jobs <= 1:
        entries = [classify_entry(it) for it in items]
    else:
        with multiprocessing.Pool(jobs) as pool:
            entries = list(pool.imap(classify_entry, items, chunksize=256))
    summary = summarize(entries, dim=dim, height=height,
                        reciprocal_only=reciprocal_only, limit=limit)
    return entries, summary


def summarize(entries: list[dict], **config) -> dict:
    by_center: dict[str, int] = {}
    ergodic = anosov = pa = 0
    ergodic_center_ok = 0
    keys = set()
    for e in entries:
        r = e["report"]
        by_center[str(r["dim_center"])] = by_center.get(str(r["dim_center"]), 0) + 1
        if r["ergodic"]:
            ergodic += 1
            if r["dim_center"] in (0, 2):
                ergodic_center_ok += 1
        if r["anosov"]:
            anosov += 1
        if r["pseudo_anosov"]:
            pa += 1
        keys.add(e["conjugacy_key"])
    return {
        "config": config,
        "total": len(entries),
        "ergodic": ergodic,
        "anosov": anosov,
        "pseudo_anosov": pa,
        "by_dim_center": dict(sorted(by_center.items())),
        "ergodic_with_center_0_or_2": ergodic_center_ok,
        "distinct_conjugacy_keys": len(keys),
    }
