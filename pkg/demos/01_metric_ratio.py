"""Carathéodory versus Kobayashi on the core circle of an annulus.

The Carathéodory density comes from Simha's infinite product, the Kobayashi
density in closed form.  Their ratio starts at 1/2 for thin annuli (with the
doubled Kobayashi normalization used throughout) and decays like
(4/pi) log r / r for fat ones.
"""

import math

from ckannulus.annulus import AnnulusSpec, caratheodory_core_simha, kobayashi_core, ratio_curve, simha_quotient

print("r          C_r(1)        K_r(1)        C/K          product terms")
for r in (1.05, 1.5, 2.0, math.e, 10.0, 100.0):
    a = AnnulusSpec(r)
    q = simha_quotient(a)
    c, k = caratheodory_core_simha(a), kobayashi_core(a)
    print(f"{r:<10.4g} {c:<13.6g} {k:<13.6g} {c / k:<12.6g} {q.terms}")

curve = ratio_curve(1.05, 100.0, 200)
print()
print(f"200 log-spaced samples, strictly decreasing at {curve.dps} digits: {curve.strictly_decreasing()}")

# the float column cannot see the decrease near r = 1
flat = sum(1 for row in curve if row.ratio == 0.5)
print(f"samples whose double-precision ratio is exactly 1/2: {flat}")

row = curve.rows[-1]
print(f"at r = {row.r:g}: ratio {row.ratio:.6g}, asymptote {4 / math.pi * math.log(row.r) / row.r:.6g}")
