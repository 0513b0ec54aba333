"""Waist lengths on the n-fold covers.

If Carathéodory equalled Kobayashi, the core of A_{r^n} would have length
growing linearly in n, yet it is also bounded by r/(r-1).  The ledger shows
where the two lower bounds pass that ceiling, and that the hyperbolic
length of one traversal does not depend on n at all.
"""

import math

from ckannulus.annulus import AnnulusSpec
from ckannulus.contradiction import crossing_index, ledger, ledger_csv

a = AnnulusSpec(math.e)
print(ledger_csv(ledger(a, 6)), end="")
print()
print("r        first n (201)   first n (above)")
for r in (1.001, 1.5, math.e, 10.0, 1000.0):
    b = AnnulusSpec(r)
    print(f"{r:<8.4g} {crossing_index(b, '201'):<15d} {crossing_index(b, 'above')}")
