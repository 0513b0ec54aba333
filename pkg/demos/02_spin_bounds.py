"""The spin map and the two-sided bounds on its modulus ratio.

Spin_t shears the strip so the core slides by t while both boundary lines
stay put.  Its Beltrami coefficient is constant on each half, and the
modulus ratio r(t) is trapped between two closed-form bounds.  For fat
annuli the printed lower bound overtakes the upper one; the refined form
(divided by log r) does not.
"""

import math

from ckannulus.annulus import AnnulusSpec, StripPoint
from ckannulus.spin import (
    SpinParams,
    rt_lower_bound,
    rt_lower_bound_refined,
    rt_upper_bound,
    spin_beltrami,
    spin_beltrami_fd,
    spin_beltrami_sup,
)

a = AnnulusSpec(math.e)
p = SpinParams(4 * math.pi, a)
mu = spin_beltrami(p, 0.5)
fd = spin_beltrami_fd(p, StripPoint(1.0, 0.5))
print(f"mu on the upper half: {mu:.12f}")
print(f"finite differences:   {fd:.12f}")
print(f"sup |mu| = {spin_beltrami_sup(p):.12f}")
print()

print("r      t         lower      refined    upper")
for r in (2.0, math.e, 10.0):
    for t in (4 * math.pi, 20.0, 100 * math.pi):
        q = SpinParams(t, AnnulusSpec(r))
        lo, ref, up = rt_lower_bound(q), rt_lower_bound_refined(q), rt_upper_bound(q)
        flag = "  <- lower > upper" if lo > up else ""
        print(f"{r:<6.3g} {t:<9.4g} {lo:<10.5g} {ref:<10.5g} {up:<10.5g}{flag}")
