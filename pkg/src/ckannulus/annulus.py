"""Poincaré, Kobayashi and Carathéodory quantities on the disc and on annuli.

Conventions
-----------
The annulus ``A_r = {1/r < |z| < r}`` is uniformised by the strip coordinate
``zeta = xi + i*eta = -i log z`` (so ``xi = arg z`` and ``eta = -log|z|``),
factored by ``zeta -> zeta + 2*pi``.  Every density returned here is measured
against ``|d zeta|`` unless the function name says otherwise; use
:func:`density_strip_to_plane` / :func:`density_plane_to_strip` to change
coordinates (the factor is ``|d zeta / dz| = 1/|z|``).

Two normalisations of the hyperbolic density on the annulus appear:

* :func:`kobayashi_annulus` / :func:`kobayashi_core` evaluate
  ``pi |v| / (2 log r cos(pi eta / (2 log r)))``, the formula the proof
  arithmetic is written in;
* :func:`poincare_annulus` is the pull-back of the disc metric
  ``|dz| / (1 - |z|^2)`` (curvature -4), which is exactly half of the above.
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence

import mpmath
import numpy as np

from . import io
from .errors import DomainError, SlowConvergenceError

__all__ = [
    "AnnulusSpec",
    "StripPoint",
    "TangentSample",
    "poincare_disc",
    "poincare_global_disc",
    "kobayashi_annulus",
    "kobayashi_core",
    "poincare_annulus",
    "strip_point_from_plane",
    "plane_point_from_strip",
    "density_strip_to_plane",
    "density_plane_to_strip",
    "simha_quotient",
    "caratheodory_core_simha",
    "metric_ratio_core",
    "car_decay_bound",
    "covering_contraction_check",
    "CoveringReport",
    "ratio_curve",
    "RatioCurve",
]

DEFAULT_MAX_TERMS = 10**6


class AnnulusSpec:
    """The round annulus ``{1/r < |z| < r}`` with ``r > 1``.

    Construct from the radius, ``AnnulusSpec(2.0)``, or from ``log r`` with
    ``AnnulusSpec(log_r=40.0)``; the latter is exact for covering annuli
    ``A_{r^n}`` whose radius would overflow a float.
    """

    __slots__ = ("_log_r", "_r")

    def __init__(self, r: float | None = None, *, log_r: float | None = None):
        if (r is None) == (log_r is None):
            raise TypeError("give exactly one of r or log_r")
        if r is not None:
            r = float(r)
            if not r > 1.0 or math.isnan(r):
                raise DomainError(f"annulus radius must satisfy r > 1, got r={r!r}")
            log_r = math.log(r)
        log_r = float(log_r)
        # keep the radius as given so reports echo it exactly
        object.__setattr__(self, "_r", r)
        if not log_r > 0.0 or not math.isfinite(log_r):
            raise DomainError(f"annulus needs 0 < log r < inf, got log r={log_r!r}")
        object.__setattr__(self, "_log_r", log_r)

    def __setattr__(self, name, value):
        raise AttributeError("AnnulusSpec is immutable")

    @property
    def log_r(self) -> float:
        return self._log_r

    @property
    def r(self) -> float:
        # inf for covering annuli beyond float range; every formula uses log_r
        if self._r is not None:
            return self._r
        try:
            return math.exp(self._log_r)
        except OverflowError:
            return math.inf

    @property
    def modulus(self) -> float:
        return self._log_r / math.pi

    def power(self, n: int) -> "AnnulusSpec":
        """The covering annulus ``A_{r^n}`` (image of ``z -> z^n``)."""
        if n < 1:
            raise DomainError(f"covering degree must be >= 1, got {n}")
        return AnnulusSpec(log_r=n * self._log_r)

    def contains(self, p: "StripPoint", closed: bool = False) -> bool:
        if closed:
            return abs(p.eta) <= self._log_r
        return abs(p.eta) < self._log_r

    def __eq__(self, other):
        return isinstance(other, AnnulusSpec) and other._log_r == self._log_r

    def __hash__(self):
        return hash(("AnnulusSpec", self._log_r))

    def __repr__(self):
        return f"AnnulusSpec(r={self.r!r})"


@dataclass(frozen=True)
class StripPoint:
    """A point ``zeta = xi + i*eta`` of the strip covering an annulus."""

    xi: float
    eta: float

    @property
    def zeta(self) -> complex:
        return complex(self.xi, self.eta)

    def check_in(self, a: AnnulusSpec) -> "StripPoint":
        if not abs(self.eta) <= a.log_r:
            raise DomainError(f"|eta|={abs(self.eta)!r} exceeds log r={a.log_r!r}")
        return self


@dataclass(frozen=True)
class TangentSample:
    """A tangent vector ``vector`` attached to ``point`` (a StripPoint or a disc point)."""

    point: StripPoint | complex
    vector: complex

    def __post_init__(self):
        v = complex(self.vector)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise DomainError("tangent vector must be finite")

    def require_nonzero(self) -> "TangentSample":
        if self.vector == 0:
            raise DomainError("a norm was requested for the zero vector")
        return self


# -- coordinates ------------------------------------------------------------


def strip_point_from_plane(z: complex) -> StripPoint:
    """``zeta = -i log z`` with the principal branch of the argument."""
    z = complex(z)
    if z == 0:
        raise DomainError("z = 0 has no strip coordinate")
    return StripPoint(cmath.phase(z), -math.log(abs(z)))


def plane_point_from_strip(p: StripPoint) -> complex:
    return cmath.exp(1j * p.zeta)


def density_strip_to_plane(density: float, z: complex) -> float:
    """Convert a density against ``|d zeta|`` into one against ``|dz|`` at ``z``."""
    return density / abs(z)


def density_plane_to_strip(density: float, z: complex) -> float:
    return density * abs(z)


# -- the disc -----------------------------------------------------------------


def poincare_disc(p: complex, v: complex) -> float:
    """Infinitesimal Poincaré norm ``|v| / (1 - |p|^2)`` on the unit disc."""
    p = complex(p)
    m = abs(p)
    if not m < 1.0:
        raise DomainError(f"point must lie in the open unit disc, |p|={m!r}")
    return abs(complex(v)) / (1.0 - m * m)


def poincare_global_disc(z1: complex, z2: complex) -> float:
    """Global distance ``(1/2) log((1+s)/(1-s))``, ``s = |z1-z2| / |1 - conj(z1) z2|``."""
    z1, z2 = complex(z1), complex(z2)
    if not (abs(z1) < 1.0 and abs(z2) < 1.0):
        raise DomainError("both points must lie in the open unit disc")
    s = abs(z1 - z2) / abs(1.0 - z1.conjugate() * z2)
    return math.atanh(s)


# -- Kobayashi / Poincaré on the annulus ----------------------------------------


def _cos_factor(a: AnnulusSpec, eta: float) -> float:
    if not abs(eta) < a.log_r:
        raise DomainError(
            f"density is infinite on the boundary: |eta|={abs(eta)!r} >= log r={a.log_r!r}"
        )
    return math.cos(eta * math.pi / (2.0 * a.log_r))


def kobayashi_annulus(a: AnnulusSpec, p: StripPoint, v: complex) -> float:
    """``pi |v| / (2 log r cos(eta pi / (2 log r)))`` against ``|d zeta|``."""
    c = _cos_factor(a, p.eta)
    return math.pi * abs(complex(v)) / (2.0 * a.log_r * c)


def kobayashi_core(a: AnnulusSpec) -> float:
    return math.pi / (2.0 * a.log_r)


def poincare_annulus(a: AnnulusSpec, p: StripPoint, v: complex = 1.0) -> float:
    """Pull-back of ``|dz|/(1-|z|^2)`` to the annulus, against ``|d zeta|``.

    Equal to ``kobayashi_annulus(a, p, v) / 2``.
    """
    c = _cos_factor(a, p.eta)
    return math.pi * abs(complex(v)) / (4.0 * a.log_r * c)


# -- Carathéodory at the core -----------------------------------------------------


class _Quotient(NamedTuple):
    value: float
    bound: float
    terms: int


def simha_quotient(
    a: AnnulusSpec,
    rel_tol: float = 1e-15,
    max_terms: int = DEFAULT_MAX_TERMS,
    dps: int | None = None,
) -> _Quotient:
    """Evaluate the infinite-product quotient in Simha's formula.

    With ``q = r^-4`` the n-th factor is
    ``(1+q^n)^2 (1-q^n)^2 / ((1+q^n r^2)^2 (1-q^n r^2)^2)
    = ((1 - q^{2n}) / (1 - q^{2n-1}))^2``.  Factors exceed 1 and approach it
    geometrically, so the neglected tail ``T`` satisfies
    ``log T <= 2 q^{2N+1} / ((1-q)(1-q^{2N+1}))``.  Truncation stops once the
    last factor is within ``rel_tol/10`` of 1 *and* ``expm1`` of the tail bound
    is at most ``rel_tol``.

    Returns ``(value, bound, terms)``; with ``dps`` set the value is an
    ``mpmath.mpf`` evaluated at that many decimal digits.
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    if dps is not None:
        return _simha_quotient_mp(a, rel_tol, max_terms, dps)
    q = math.exp(-4.0 * a.log_r)
    one_minus_q = -math.expm1(-4.0 * a.log_r)
    log_terms = []
    bound = math.inf
    n = 0
    while True:
        n += 1
        if n > max_terms:
            raise SlowConvergenceError(
                f"product did not reach rel_tol={rel_tol:g} within {max_terms} terms "
                f"(r={a.r!r}); achieved bound {bound:.3g}",
                achieved_bound=bound,
                terms=max_terms,
            )
        q_odd = q ** (2 * n - 1)
        q_even = q_odd * q
        log_factor = 2.0 * (math.log1p(-q_even) - math.log1p(-q_odd))
        log_terms.append(log_factor)
        q_next = q_even * q
        tail = 2.0 * q_next / (one_minus_q * (1.0 - q_next))
        bound = math.expm1(tail) if tail < 700.0 else math.inf
        if math.expm1(log_factor) < rel_tol / 10.0 and bound <= rel_tol:
            break
    return _Quotient(math.exp(math.fsum(log_terms)), bound, n)


def _simha_quotient_mp(a, rel_tol, max_terms, dps):
    with mpmath.workdps(dps):
        q = mpmath.exp(-4 * mpmath.mpf(a.log_r))
        one_minus_q = -mpmath.expm1(-4 * mpmath.mpf(a.log_r))
        tol = mpmath.mpf(rel_tol)
        total = mpmath.mpf(0)
        q_odd = q
        bound = mpmath.inf
        for n in range(1, max_terms + 1):
            q_even = q_odd * q
            log_factor = 2 * (mpmath.log1p(-q_even) - mpmath.log1p(-q_odd))
            total += log_factor
            q_next = q_even * q
            bound = mpmath.expm1(2 * q_next / (one_minus_q * (1 - q_next)))
            if mpmath.expm1(log_factor) < tol / 10 and bound <= tol:
                return _Quotient(mpmath.exp(total), bound, n)
            q_odd = q_next
    raise SlowConvergenceError(
        f"product did not reach rel_tol={rel_tol:g} within {max_terms} terms",
        achieved_bound=float(bound),
        terms=max_terms,
    )


def _check_rel_tol(rel_tol):
    if not 0.0 < rel_tol <= 1e-3:
        raise ValueError(f"rel_tol must lie in (0, 1e-3], got {rel_tol!r}")


def caratheodory_core_simha(
    a: AnnulusSpec, rel_tol: float = 1e-15, max_terms: int = DEFAULT_MAX_TERMS
) -> float:
    """Carathéodory density ``C_r(1)`` at the core circle (Simha's product)."""
    _check_rel_tol(rel_tol)
    value, _, _ = simha_quotient(a, rel_tol, max_terms)
    return 2.0 * math.exp(-a.log_r) * value


def metric_ratio_core(
    a: AnnulusSpec, rel_tol: float = 1e-15, max_terms: int = DEFAULT_MAX_TERMS
) -> float:
    """``C_r / K_r`` on the core: ``(4/pi) (log r / r) * quotient``."""
    _check_rel_tol(rel_tol)
    value, _, _ = simha_quotient(a, rel_tol, max_terms)
    return 4.0 / math.pi * a.log_r * math.exp(-a.log_r) * value


def car_decay_bound(a: AnnulusSpec, n: int) -> float:
    """Upper bound ``(1/n) r/(r-1)`` for ``C_{r^n}(1)``."""
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    # r/(r-1) = 1/(1 - 1/r), stable for huge r
    return 1.0 / (n * -math.expm1(-a.log_r))


@dataclass(frozen=True)
class CoveringReport:
    """Both sides of the two covering facts for ``z -> z^n : A_r -> A_{r^n}``.

    ``car_lhs = C_{r^n}(1)`` and ``car_rhs = C_r(1)/n`` (contraction);
    ``kob_lhs = n K_{r^n}(1)`` and ``kob_rhs = K_r(1)`` (isometry).
    """

    r: float
    n: int
    car_lhs: float
    car_rhs: float
    car_holds: bool
    kob_lhs: float
    kob_rhs: float
    kob_rel_diff: float
    kob_holds: bool

    @property
    def holds(self) -> bool:
        return self.car_holds and self.kob_holds

    @property
    def car_gap(self) -> float:
        return self.car_rhs - self.car_lhs


def covering_contraction_check(
    a: AnnulusSpec, n: int, rel_tol: float = 1e-15, kob_tol: float = 1e-14
) -> CoveringReport:
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    cover = a.power(n)
    c_small = caratheodory_core_simha(cover, rel_tol)
    c_base = caratheodory_core_simha(a, rel_tol)
    car_rhs = c_base / n
    # the product values carry relative error <= rel_tol each
    car_holds = c_small <= car_rhs * (1.0 + 2.0 * rel_tol)
    k_lhs = n * kobayashi_core(cover)
    k_rhs = kobayashi_core(a)
    rel = abs(k_lhs - k_rhs) / k_rhs
    return CoveringReport(a.r, n, c_small, car_rhs, bool(car_holds), k_lhs, k_rhs, rel, rel <= kob_tol)


# -- the ratio curve ---------------------------------------------------------------


class RatioRow(NamedTuple):
    r: float
    caratheodory: float
    kobayashi: float
    ratio: float


@dataclass
class RatioCurve:
    """Sampled ``(r, C, K, C/K)`` on a log-spaced grid.

    ``ratio_hp`` keeps the ratio at ``dps`` decimal digits.  Near ``r = 1`` the
    ratio differs from 1/2 by roughly ``exp(-pi^2 / (2 log r))``, far below
    double resolution, so monotonicity is judged on the extended values.
    """

    rows: list[RatioRow]
    ratio_hp: list
    dps: int

    CSV_HEADER = ("r", "caratheodory", "kobayashi", "ratio")

    def __len__(self):
        return len(self.rows)

    def __iter__(self) -> Iterator[RatioRow]:
        return iter(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows])

    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.ratio_hp, self.ratio_hp[1:]))

    def to_csv(self) -> str:
        return io.to_csv(self.CSV_HEADER, self.rows)

    def to_json(self) -> str:
        return io.to_json(io.table_to_records(self.CSV_HEADER, self.rows))


def _auto_dps(log_r_min: float) -> int:
    # resolve exp(-pi^2/(2 log r)) with ~30 spare digits
    return int(math.ceil(math.pi**2 / (2.0 * log_r_min) / math.log(10.0))) + 30


def ratio_curve(
    r_min: float,
    r_max: float,
    steps: int,
    rel_tol: float = 1e-15,
    dps: int | None = None,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> RatioCurve:
    """Sample ``C_r(1)``, ``K_r(1)`` and their ratio at ``steps`` log-spaced radii."""
    if not (1.0 < r_min < r_max):
        raise DomainError(f"need 1 < r_min < r_max, got {r_min!r}, {r_max!r}")
    if int(steps) != steps or steps < 2:
        raise ValueError(f"steps must be an integer >= 2, got {steps!r}")
    _check_rel_tol(rel_tol)
    radii = np.geomspace(r_min, r_max, int(steps))
    radii[0], radii[-1] = r_min, r_max
    if dps is None:
        dps = _auto_dps(math.log(r_min))
    rows, hp = [], []
    hp_tol = mpmath.mpf(10) ** (-(dps - 5))
    for r in radii:
        a = AnnulusSpec(float(r))
        c = caratheodory_core_simha(a, rel_tol, max_terms)
        k = kobayashi_core(a)
        with mpmath.workdps(dps):
            value, _, _ = simha_quotient(a, hp_tol, max_terms, dps=dps)
            # a.log_r is taken as exact so prefactor and product see the same annulus
            log_r = mpmath.mpf(a.log_r)
            hp.append(4 / mpmath.pi * log_r * mpmath.exp(-log_r) * value)
        # rounding the extended value keeps the float column non-increasing
        rows.append(RatioRow(float(r), c, k, float(hp[-1])))
    return RatioCurve(rows, hp, dps)


def ratio_table(radii: Sequence[float], rel_tol: float = 1e-15) -> list[RatioRow]:
    """Unsorted convenience variant of :func:`ratio_curve` for explicit radii."""
    out = []
    for r in radii:
        a = AnnulusSpec(r)
        out.append(
            RatioRow(float(r), caratheodory_core_simha(a, rel_tol), kobayashi_core(a), metric_ratio_core(a, rel_tol))
        )
    return out
