"""Invariant suites behind ``ckannulus verify-all``.

Each check returns a :class:`Check`; ``run_all`` collects them.  The quick
tier uses reduced grids and basis sizes, the full tier the sizes of the
acceptance criteria.  No timings are recorded, so reports are reproducible
byte for byte.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np

from . import contradiction, density, foliation, modulus, spin
from .annulus import (
    AnnulusSpec,
    StripPoint,
    car_decay_bound,
    caratheodory_core_simha,
    covering_contraction_check,
    ratio_curve,
)

__all__ = ["Check", "run_all", "CHECK_HEADER"]

CHECK_HEADER = ("name", "passed", "value", "target", "detail")


class Check(NamedTuple):
    name: str
    passed: bool
    value: float
    target: float
    detail: str


def _ratio(quick: bool) -> Check:
    steps = 40 if quick else 200
    curve = ratio_curve(1.05, 100.0, steps)
    ratio = curve.column("ratio")
    r = curve.column("r")
    tail = r >= 50
    asym = 4 / math.pi * np.log(r[tail]) / r[tail]
    err = float(np.max(np.abs(ratio[tail] / asym - 1.0)))
    ok = bool(np.all((ratio > 0) & (ratio < 1)) and curve.strictly_decreasing() and err <= 0.01)
    return Check("ratio_curve", ok, err, 0.01, f"{steps} samples, max rel. deviation from (4/pi) log r / r for r >= 50")


def _decay(quick: bool) -> Check:
    worst = math.inf
    for r in (2.0, math.e, 10.0):
        a = AnnulusSpec(r)
        for n in range(1, 11):
            c = caratheodory_core_simha(a.power(n))
            worst = min(worst, car_decay_bound(a, n) - c)
    return Check("car_decay_bound", worst > 0, worst, 0.0, "min over r in {2, e, 10}, n <= 10 of bound - C")


def _covering(quick: bool) -> Check:
    worst_k, ok = 0.0, True
    for r in (2.0, math.e, 10.0):
        for n in range(1, 11):
            rep = covering_contraction_check(AnnulusSpec(r), n)
            worst_k = max(worst_k, rep.kob_rel_diff)
            ok &= rep.holds
    return Check("covering", ok, worst_k, 1e-14, "max relative defect of n K_{r^n} = K_r")


def _beltrami(quick: bool) -> Check:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100 if quick else 1000):
        a = AnnulusSpec(float(rng.uniform(1.5, 20.0)))
        p = spin.SpinParams(float(rng.uniform(-50, 50)), a)
        eta = float(rng.uniform(0.01, 0.99)) * a.log_r * (1 if rng.random() < 0.5 else -1)
        z = StripPoint(float(rng.uniform(0, 2 * math.pi)), eta)
        worst = max(worst, abs(spin.spin_beltrami(p, z.eta) - spin.spin_beltrami_fd(p, z, h=1e-3 * a.log_r)))
    return Check("beltrami_fd", worst <= 1e-10, worst, 1e-10, "max |closed form - finite differences|")


def _dirichlet(quick: bool) -> Check:
    n = 64 if quick else 256
    a = AnnulusSpec(math.e)
    worst, ok = 0.0, True
    for t in (3 * math.pi, 4 * math.pi, 10 * math.pi):
        p = spin.SpinParams(t, a)
        u = foliation.sheared_xi(p, n, n)
        v = foliation.sheared_eta(p, n, n)
        exact = 4 * math.pi * a.log_r * (1 + t * t / a.log_r**2)
        worst = max(worst, abs(foliation.dirichlet_integral(u, a) / exact - 1))
        ok &= foliation.cauchy_schwarz_check(u, v, a).holds
    rng = np.random.default_rng(11)
    for _ in range(5 if quick else 20):
        u = foliation.random_smooth_foliation(a, n, n, rng)
        v = foliation.random_smooth_foliation(a, n, n, rng)
        ok &= foliation.cauchy_schwarz_check(u, v, a).holds
    return Check("dirichlet_cs", ok and worst <= 0.01, worst, 0.01, f"{n}^2 grid; Dirichlet rel. error, Cauchy-Schwarz on all pairs")


def _bounds(quick: bool) -> Check:
    rng = np.random.default_rng(3)
    bad = []
    ts = rng.uniform(2 * math.pi, 100 * math.pi, 100)
    for r in (2.0, math.e, 10.0):
        for t in ts:
            p = spin.SpinParams(float(t), AnnulusSpec(r))
            if not spin.rt_lower_bound(p) <= spin.rt_upper_bound(p):
                bad.append((r, float(t)))
    p = spin.SpinParams(4 * math.pi, AnnulusSpec(math.e))
    rel = abs(spin.rt_lower_bound_refined(p) / spin.rt_lower_bound(p) - 1)
    detail = f"refined vs plain at t=4pi, r=e: rel. diff {rel:.3g}; lower > upper in {len(bad)}/300 samples"
    if bad:
        detail += f" (all at r={bad[0][0]:g}, smallest t={min(t for _, t in bad):.6g})"
    return Check("rt_bounds", not bad and rel <= 0.01, float(len(bad)), 0.0, detail)


def _solver(quick: bool) -> Check:
    a = AnnulusSpec(math.e)
    n = 32 if quick else 128
    free = modulus.solve_modulus(modulus.SolverProblem(a, grid=(n, n)))
    e1 = abs(free.modulus / a.modulus - 1)
    pinned = modulus.solve_modulus(modulus.SolverProblem(a, bc_mode="pinned", shear=1.5, grid=(n, n)))
    e2 = abs(pinned.modulus / modulus.pinned_flat_modulus(2 * math.pi, 2 * a.log_r, 1.5) - 1)

    def f(X, E):
        return 0.4 * np.exp(1j * X) * np.cos(np.pi * E / (2 * a.log_r))

    n0 = 16
    mu = spin.BeltramiField.from_function(a, n0, n0, f)
    study = modulus.convergence_study(modulus.SolverProblem(a, mu, grid=(n0, n0)), 3 if quick else 4, f)
    ok = e1 <= 0.005 and e2 <= 0.01 and study.observed_order >= 1.8
    return Check("solver", ok, study.observed_order, 1.8,
                 f"free rel. err {e1:.3g}, pinned rel. err {e2:.3g}, smooth-mu order {study.observed_order:.3f}")


def _density(quick: bool) -> Check:
    sizes = [1, 5] if quick else [1, 5, 10, 20]
    ok, worst = True, math.inf
    for r in (math.e, math.e**2):
        a = AnnulusSpec(r)
        lows = density.residue_lower_bounds(density.ResidueProblem(a, 1.0, sizes[-1]), sizes)
        ok &= all(y.value >= x.value for x, y in zip(lows, lows[1:]))
        up = density.vectorfield_upper_bound(a, 1.0, grid=(128, 32) if quick else (256, 64))
        br = density.DensityBracket(a.r, 1.0, sizes[-1], lows[-1].value, up.upper,
                                    math.pi / (4 * a.log_r), math.pi / (2 * a.log_r), lows[-1].quad_error)
        ok &= br.passed
        worst = min(worst, up.upper - lows[-1].value)
    return Check("density_sandwich", ok, worst, 0.0, f"r in {{e, e^2}}, N in {sizes}; value = min bracket width")


def _ledger(quick: bool) -> Check:
    a = AnnulusSpec(math.e)
    above = contradiction.crossing_index(a, "above")
    c201 = contradiction.crossing_index(a, "201")
    rows = contradiction.ledger(a, 10)
    M = math.e / (math.e - 1)
    dev = max(max(abs(row.lower_201 - row.n * math.pi / 4), abs(row.lower_above - row.n / 2),
                  abs(row.upper_M - M), abs(row.hyp_core_length - math.pi**2)) for row in rows)
    ok = above == 4 and c201 == 3 and dev <= 1e-14
    return Check("contradiction", ok, float(dev), 1e-14, f"crossing indices above={above}, 201={c201}")


SUITES: list[Callable[[bool], Check]] = [
    _ratio, _decay, _covering, _beltrami, _dirichlet, _bounds, _solver, _density, _ledger,
]


def run_all(quick: bool = True) -> list[Check]:
    return [suite(quick) for suite in SUITES]
