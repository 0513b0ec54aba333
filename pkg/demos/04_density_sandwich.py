"""Bracketing the Teichmüller density at a point of the core.

The lower bound maximises a residue over an L1 ball of integrable
meromorphic functions (IRLS over a truncated Laurent basis).  The upper
bound minimises sup |dbar V| over a three-parameter family of vector fields
vanishing on the boundary.  Both are compared with the Poincaré density.
Expect about ten seconds per radius.
"""

import math

from ckannulus.annulus import AnnulusSpec
from ckannulus.density import ResidueProblem, residue_lower_bounds, sandwich_report

for r in (math.e, math.e**2):
    a = AnnulusSpec(r)
    lows = residue_lower_bounds(ResidueProblem(a, 1.0), [0, 1, 5, 10, 20])
    print(f"r = {r:.4f}")
    for N, res in zip([0, 1, 5, 10, 20], lows):
        print(f"  N = {N:<3d} lower {res.value:.6f}  (quadrature {res.quad_error:.1e}, {res.iterations} IRLS steps)")
    br = sandwich_report(a, 1.0, basis_size=20)
    print(f"  lower {br.lower:.6f} <= upper {br.upper:.6f};  rho = {br.rho:.6f}, rho/2 = {br.rho / 2:.6f}")
    print(f"  passed: {br.passed}; clears half the doubled density: {br.k1_floor_holds}")
