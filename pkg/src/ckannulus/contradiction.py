"""Length estimates for the waist curves of the degree-n covers.

Under a hypothetical equality of the Carathéodory and Kobayashi metrics, the
waist curve of the n-fold cover ``A_{r^n}`` would obey two lower bounds that
grow linearly in ``n`` and one upper bound ``M = r / (r - 1)`` that does not.
This module evaluates all three and finds the first ``n`` at which they
conflict.  It also reports the hyperbolic length of one core traversal of
``A_{r^n}``, computed directly from the core density, which does not depend on ``n``.
"""

from __future__ import annotations

import math
from typing import Literal, NamedTuple

from . import io
from .annulus import AnnulusSpec, kobayashi_core

__all__ = ["LedgerRow", "ledger", "ledger_csv", "ledger_json", "crossing_index", "LEDGER_HEADER", "N_GUARD"]

N_GUARD = 10**9

Which = Literal["201", "above"]


class LedgerRow(NamedTuple):
    n: int
    lower_201: float
    lower_above: float
    upper_M: float
    hyp_core_length: float


LEDGER_HEADER = LedgerRow._fields


def upper_M(a: AnnulusSpec) -> float:
    """``r / (r - 1)``, written as ``1 / (1 - 1/r)`` so it stays finite for huge r."""
    return 1.0 / -math.expm1(-a.log_r)


def _slope(a: AnnulusSpec, which: Which) -> float:
    if which == "201":
        return math.pi / (4.0 * a.log_r)
    if which == "above":
        return 1.0 / (2.0 * a.log_r)
    raise ValueError(f"which must be '201' or 'above', got {which!r}")


def ledger(a: AnnulusSpec, n_max: int) -> list[LedgerRow]:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    M = upper_M(a)
    rows = []
    for n in range(1, n_max + 1):
        cover = a.power(n)
        # one core traversal of A_{r^n} has zeta-length 2 pi n
        hyp = 2.0 * math.pi * n * kobayashi_core(cover)
        rows.append(LedgerRow(n, n * _slope(a, "201"), n * _slope(a, "above"), M, hyp))
    return rows


def ledger_csv(rows) -> str:
    return io.to_csv(LEDGER_HEADER, rows)


def ledger_json(rows) -> str:
    return io.to_json(io.table_to_records(LEDGER_HEADER, rows))


def crossing_index(a: AnnulusSpec, which: Which = "above") -> int:
    """Least ``n`` with ``n * slope > M``.

    Raises ``OverflowError`` if that ``n`` exceeds ``N_GUARD``.
    """
    slope, M = _slope(a, which), upper_M(a)
    ratio = M / slope
    if not ratio < N_GUARD:
        raise OverflowError(f"crossing index exceeds {N_GUARD} (M/slope = {ratio:.3g})")
    n = max(1, math.floor(ratio) + 1)
    # floor can be off by one in floating point; settle it by direct comparison
    while n > 1 and (n - 1) * slope > M:
        n -= 1
    while not n * slope > M:
        n += 1
    return n
