"""Two-sided numerical bounds for the Teichmüller density of an annulus.

For a point ``p`` of ``A_r = {1/r < |z| < r}`` the density ``lambda(p)`` (against
``|dz|``) is bracketed by two dual extremal problems.

Lower bound
    ``pi |res_p phi| / ||phi||_1`` for any integrable ``phi`` holomorphic on
    ``A_r - {p}`` with at most a simple pole at ``p``.  We take

        phi(z) = 1/(z - p) + sum_{k=-N}^{N} b_k z^(k-2) / r^|k-2|

    and minimise ``||phi||_1`` over the ``b_k`` by iteratively reweighted least
    squares.  The Laurent window is centred on ``z^-2`` because ``phi dz^2``
    with ``phi = z^-2`` is the quadratic differential ``-d zeta^2`` that
    dominates far from ``p``.  ``N = 0`` keeps the pole term alone.

Upper bound
    ``sup |dbar V|`` for any continuous vector field ``V`` on the closed
    annulus with ``V = 0`` on both boundary circles and ``V(p) = 1``.  Fields
    are written in the strip coordinate ``zeta = -i log z`` and converted with
    ``|dz| = |z| |d zeta|``.

``sandwich_report`` compares both against the Poincaré density ``rho``:
``rho / 2 <= lambda <= rho``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import io
from .annulus import (
    AnnulusSpec,
    StripPoint,
    kobayashi_annulus,
    poincare_annulus,
    strip_point_from_plane,
)
from .errors import DomainError, QuadratureError, VerificationFailure

__all__ = [
    "Quadrature",
    "ResidueProblem",
    "ResidueResult",
    "quadrature_nodes",
    "l1_norm",
    "residue_lower_bound",
    "residue_lower_bounds",
    "TwistFamily",
    "VectorFieldResult",
    "band_field_bound",
    "vectorfield_upper_bound",
    "DensityBracket",
    "sandwich_report",
]


# -- quadrature ---------------------------------------------------------------------


def _smooth_step(s):
    """C-infinity step: 1 for ``s <= 0.3``, 0 for ``s >= 1``."""
    s = np.clip((np.asarray(s, dtype=float) - 0.3) / 0.7, 0.0, 1.0)

    def f(x):
        return np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)

    a, b = f(1.0 - s), f(s)
    return a / (a + b)


@dataclass(frozen=True)
class Quadrature:
    """Node counts.  The global grid is Gauss-Legendre in ``log |z|`` times the
    trapezoid rule in ``arg z``; a polar patch of radius ``delta`` around the
    pole uses the local counts.  The two are blended by a smooth partition of unity.
    """

    radial: int = 64
    angular: int = 512
    local_radial: int = 32
    local_angular: int = 128

    def __post_init__(self):
        if min(self.radial, self.angular, self.local_radial, self.local_angular) < 4:
            raise ValueError("every quadrature node count must be at least 4")

    @classmethod
    def for_annulus(cls, a: AnnulusSpec) -> "Quadrature":
        """Defaults with the radial count scaled by ``max(1, log r)``."""
        base = cls()
        return cls(int(math.ceil(base.radial * max(1.0, a.log_r))), base.angular, base.local_radial, base.local_angular)

    def scaled(self, factor: float) -> "Quadrature":
        return Quadrature(*(max(4, int(round(n * factor))) for n in
                            (self.radial, self.angular, self.local_radial, self.local_angular)))


def _patch_radius(a: AnnulusSpec, p: complex) -> float:
    gap = min(abs(p) - 1.0 / a.r, a.r - abs(p))
    return min(0.3, 0.45 * gap)


def quadrature_nodes(a: AnnulusSpec, p: complex, q: Quadrature) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for ``integral f dx dy`` over ``A_r`` for ``f ~ 1/|z - p|``."""
    L = a.log_r
    x, w = np.polynomial.legendre.leggauss(q.radial)
    R = np.exp(L * x)
    th = 2.0 * np.pi * np.arange(q.angular) / q.angular
    Z = (R[:, None] * np.exp(1j * th)[None, :]).ravel()
    W = np.repeat(R**2 * L * w * (2.0 * np.pi / q.angular), q.angular)
    delta = _patch_radius(a, p)
    W = W * (1.0 - _smooth_step(np.abs(Z - p) / delta))
    x2, w2 = np.polynomial.legendre.leggauss(q.local_radial)
    rho = 0.5 * delta * (x2 + 1.0)
    th2 = 2.0 * np.pi * np.arange(q.local_angular) / q.local_angular
    Z2 = (p + rho[:, None] * np.exp(1j * th2)[None, :]).ravel()
    W2 = np.repeat(rho * 0.5 * delta * w2 * (2.0 * np.pi / q.local_angular), q.local_angular)
    W2 = W2 * _smooth_step(rho / delta).repeat(q.local_angular)
    keep = W > 0
    return np.concatenate([Z[keep], Z2]), np.concatenate([W[keep], W2])


# -- residue lower bound ---------------------------------------------------------


@dataclass(frozen=True)
class ResidueProblem:
    annulus: AnnulusSpec
    p: complex = 1.0
    basis_size: int = 5
    quadrature: Quadrature | None = None
    max_iters: int = 200
    rel_tol: float = 1e-11

    def __post_init__(self):
        object.__setattr__(self, "p", complex(self.p))
        m = abs(self.p)
        if not (1.0 / self.annulus.r < m < self.annulus.r):
            raise DomainError(f"p = {self.p!r} is not interior to the annulus")
        if self.basis_size < 0:
            raise ValueError("basis_size must be >= 0")
        if self.quadrature is None:
            object.__setattr__(self, "quadrature", Quadrature.for_annulus(self.annulus))

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(-self.basis_size, self.basis_size + 1) - 2 if self.basis_size else np.zeros(0, int)


def _basis(prob: ResidueProblem, Z: np.ndarray) -> np.ndarray:
    ks = prob.exponents
    if ks.size == 0:
        return np.zeros((Z.size, 0), dtype=complex)
    return Z[:, None] ** ks[None, :] / prob.annulus.r ** np.abs(ks)[None, :]


def l1_norm(prob: ResidueProblem, coeffs: np.ndarray | None = None, quadrature: Quadrature | None = None) -> float:
    """``||phi||_1`` over ``A_r`` for the given Laurent coefficients."""
    Z, W = quadrature_nodes(prob.annulus, prob.p, quadrature or prob.quadrature)
    phi = 1.0 / (Z - prob.p)
    if coeffs is not None and len(coeffs):
        phi = phi + _basis(prob, Z) @ coeffs
    return float(np.sum(W * np.abs(phi)))


@dataclass
class ResidueResult:
    value: float  # pi / ||phi||_1, a lower bound for lambda against |dz|
    norm: float
    coeffs: np.ndarray
    quad_error: float  # estimate for |value error| from halving the node counts
    norm_quad_error: float  # the same estimate for ||phi||_1
    iterations: int
    stalled: bool  # True if reweighting never improved on the starting point

    def __float__(self):
        return self.value


def _irls(f, A, W, b0, max_iters, rel_tol):
    """Minimise ``sum W |f + A b|``; returns the best iterate seen."""
    def norm(b):
        return float(np.sum(W * np.abs(f + A @ b)))

    best_b, best = b0.copy(), norm(b0)
    start = best
    b = b0.copy()
    it = 0
    for it in range(1, max_iters + 1):
        res = np.abs(f + A @ b)
        wt = W / np.maximum(res, 1e-12 * max(float(res.max()), 1e-300))
        sw = np.sqrt(wt)
        b, *_ = np.linalg.lstsq(A * sw[:, None], -f * sw, rcond=None)
        n = norm(b)
        improved = best - n
        if n < best:
            best_b, best = b.copy(), n
        if abs(improved) <= rel_tol * best:
            break
    return best_b, best, it, not best < start


def residue_lower_bounds(prob: ResidueProblem, sizes: Sequence[int]) -> list[ResidueResult]:
    """Lower bounds for nested bases ``N in sizes`` (sorted ascending).

    Each run is warm-started from the previous optimum embedded in the larger
    basis, so the values are nondecreasing in ``N``.
    """
    sizes = sorted(sizes)
    a, p, q = prob.annulus, prob.p, prob.quadrature
    Z, W = quadrature_nodes(a, p, q)
    Zh, Wh = quadrature_nodes(a, p, q.scaled(0.5))
    f, fh = 1.0 / (Z - p), 1.0 / (Zh - p)
    out = []
    prev_k, prev_b = np.zeros(0, int), np.zeros(0, complex)
    for N in sizes:
        sub = ResidueProblem(a, p, N, q, prob.max_iters, prob.rel_tol)
        ks = sub.exponents
        A = _basis(sub, Z)
        b0 = np.zeros(ks.size, complex)
        if prev_k.size:
            b0[np.searchsorted(ks, prev_k)] = prev_b
        if ks.size:
            b, norm, its, stalled = _irls(f, A, W, b0, prob.max_iters, prob.rel_tol)
            stalled = stalled and N != sizes[0]
        else:
            b, norm, its, stalled = b0, float(np.sum(W * np.abs(f))), 0, False
        coarse = float(np.sum(Wh * np.abs(fh + _basis(sub, Zh) @ b))) if ks.size else float(np.sum(Wh * np.abs(fh)))
        value = math.pi / norm
        qerr = abs(value - math.pi / coarse)
        out.append(ResidueResult(value, norm, b, qerr, abs(norm - coarse), its, stalled))
        prev_k, prev_b = ks, b
    return out


def residue_lower_bound(prob: ResidueProblem, max_quad_rel: float = 1e-3) -> ResidueResult:
    """Best ``pi |res_p phi| / ||phi||_1`` over the truncated basis.

    Raises :class:`QuadratureError` if halving the node counts moves the value
    by more than ``max_quad_rel`` relative.
    """
    res = residue_lower_bounds(prob, [prob.basis_size])[-1]
    if res.quad_error > max_quad_rel * res.value:
        raise QuadratureError(
            f"quadrature unresolved: halving the nodes changes the bound by {res.quad_error:.3g}"
        )
    return res


# -- vector-field upper bound -----------------------------------------------------


@dataclass(frozen=True)
class TwistFamily:
    """Vector fields on the strip, relative to ``p = xi_p + i eta_p``:

        V = T(U) ((1 - s) + s cos X) + i a sgn sin X P(U),

    with ``X = xi - xi_p``, ``sgn = sign(eta - eta_p)``, ``U = |eta - eta_p| / l``
    (``l`` the distance from ``eta_p`` to the boundary line on that side),
    ``T(U) = 1 - U + c sin(2 pi U) / (2 pi)`` and ``P(U) = 4 U (1 - U)``.

    ``V(p) = 1`` and ``V = 0`` on both boundary lines for every parameter
    value; ``s = a = c = 0`` is the band field ``1 - U``.  The imaginary
    twist lets ``Im V_xi`` cancel part of ``Re V_eta``, which no real field
    can do.
    """

    s: float = 0.0
    a: float = 0.0
    c: float = 0.0

    BOX = {"s": (0.0, 0.95), "a": (0.0, 2.0), "c": (-0.95, 0.95)}

    def __post_init__(self):
        for name, (lo, hi) in self.BOX.items():
            v = getattr(self, name)
            if not (math.isfinite(v) and lo <= v <= hi):
                raise DomainError(f"parameter {name}={v!r} outside [{lo}, {hi}]")

    def params(self) -> dict:
        return {"s": self.s, "a": self.a, "c": self.c}

    def _parts(self, X, U, sgn, ell):
        twopi = 2.0 * np.pi
        T = 1.0 - U + self.c * np.sin(twopi * U) / twopi
        dT = -1.0 + self.c * np.cos(twopi * U)
        P = 4.0 * U * (1.0 - U)
        dP = 4.0 * (1.0 - 2.0 * U)
        mod = (1.0 - self.s) + self.s * np.cos(X)
        V = T * mod + 1j * self.a * sgn * np.sin(X) * P
        V_xi = -self.s * T * np.sin(X) + 1j * self.a * sgn * np.cos(X) * P
        V_eta = (sgn * dT * mod + 1j * self.a * np.sin(X) * dP) / ell
        return V, V_xi, V_eta

    def value(self, a: AnnulusSpec, p: StripPoint, xi, eta):
        X = np.asarray(xi, float) - p.xi
        d = np.asarray(eta, float) - p.eta
        sgn = np.where(d >= 0, 1.0, -1.0)
        ell = np.where(d >= 0, a.log_r - p.eta, a.log_r + p.eta)
        return self._parts(X, np.abs(d) / ell, sgn, ell)[0]

    def dbar(self, a: AnnulusSpec, p: StripPoint, xi, eta, side: float | None = None):
        """``(V_xi + i V_eta) / 2``; on ``eta = eta_p`` pass ``side=+-1`` for the one-sided limit."""
        X = np.asarray(xi, float) - p.xi
        d = np.asarray(eta, float) - p.eta
        sgn = np.where(d > 0, 1.0, -1.0) if side is None else np.full(np.shape(d), float(side))
        ell = np.where(sgn > 0, a.log_r - p.eta, a.log_r + p.eta)
        _, V_xi, V_eta = self._parts(X, np.abs(d) / ell, sgn, ell)
        return 0.5 * (V_xi + 1j * V_eta)


# fixed restart points (deterministic); the band field sits at a nonsmooth
# corner where single-coordinate moves cannot descend
_STARTS = [(0.2, 0.1, 0.05), (0.4, 0.3, 0.3), (0.1, 0.5, -0.3)]


def _coordinate_descent(g, fam, sweeps, tol, trace):
    cur = g.sup(fam)
    for sweep in range(1, sweeps + 1):
        start = cur
        for name, (lo, hi) in TwistFamily.BOX.items():
            params = fam.params()

            def obj(x, name=name, params=params):
                return g.sup(TwistFamily(**{**params, name: x}))

            r = minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
            if r.fun < cur:
                fam, cur = TwistFamily(**{**params, name: float(r.x)}), float(r.fun)
            trace.append((sweep, name, getattr(fam, name), cur))
        if start - cur <= tol * cur:
            break
    return fam, cur


def _polish(g, fam, cur):
    """Nelder-Mead on all three parameters jointly; points outside the box score +inf."""
    box = list(TwistFamily.BOX.values())

    def obj(x):
        if not all(lo <= v <= hi for v, (lo, hi) in zip(x, box)):
            return math.inf
        return g.sup(TwistFamily(*x))

    r = minimize(obj, [fam.s, fam.a, fam.c], method="Nelder-Mead",
                 options={"maxiter": 600, "xatol": 1e-7, "fatol": 1e-11})
    if r.fun < cur:
        return TwistFamily(*map(float, r.x)), float(r.fun)
    return fam, cur


class _SupGrid:
    """Precomputed sampling grid: each closed half-strip, kinks on grid lines."""

    def __init__(self, a: AnnulusSpec, p: StripPoint, n_xi: int, n_eta: int):
        self.X = 2.0 * np.pi * np.arange(n_xi) / n_xi
        self.U = np.linspace(0.0, 1.0, n_eta + 1)
        self.sides = [(1.0, a.log_r - p.eta), (-1.0, a.log_r + p.eta)]

    def sup(self, fam: TwistFamily) -> float:
        X, U = self.X[None, :], self.U[:, None]
        best = 0.0
        for sgn, ell in self.sides:
            _, V_xi, V_eta = fam._parts(X, U, sgn, ell)
            best = max(best, float(np.max(np.abs(0.5 * (V_xi + 1j * V_eta)))))
        return best


@dataclass
class VectorFieldResult:
    upper: float  # against |dz| at p
    upper_strip: float  # against |d zeta|
    family: TwistFamily
    trace: list  # (sweep, parameter, value, sup) after every coordinate update
    grid: tuple[int, int]


def band_field_bound(a: AnnulusSpec, p: StripPoint) -> float:
    """``sup |dbar V|`` for the real band field ``1 - U`` against ``|d zeta|``: ``1 / (2 min l)``."""
    return 0.5 / min(a.log_r - p.eta, a.log_r + p.eta)


def vectorfield_upper_bound(
    a: AnnulusSpec,
    p: complex = 1.0,
    family: TwistFamily | None = None,
    grid: tuple[int, int] = (256, 64),
    sweeps: int = 12,
    optimize: bool = True,
    tol: float = 1e-7,
) -> VectorFieldResult:
    """Smallest sampled ``sup |dbar V|`` over :class:`TwistFamily`.

    Coordinate descent (bounded Brent line searches) runs from ``family`` and
    from fixed restart points, each followed by a joint Nelder-Mead polish.

    The final field is re-sampled on a grid twice as fine in each direction
    and the larger of the two sups is reported.
    """
    p = complex(p)
    if not (1.0 / a.r < abs(p) < a.r):
        raise DomainError(f"p = {p!r} is not interior to the annulus")
    sp_ = strip_point_from_plane(p)
    fam = family or TwistFamily()
    v_p = complex(fam.value(a, sp_, sp_.xi, sp_.eta))
    if not abs(v_p - 1.0) < 1e-12:
        raise DomainError(f"degenerate field: V(p) = {v_p!r}")
    g = _SupGrid(a, sp_, *grid)
    best_fam, best = fam, g.sup(fam)
    trace = [(0, None, None, best)]
    if optimize:
        starts = [fam] + [TwistFamily(*x) for x in _STARTS]
        for start in starts:
            f, cur = _coordinate_descent(g, start, sweeps, tol, trace)
            f, cur = _polish(g, f, cur)
            trace.append((-1, "polish", None, cur))
            if cur < best:
                best_fam, best = f, cur
    fam, cur = best_fam, best
    fine = _SupGrid(a, sp_, 2 * grid[0], 2 * grid[1]).sup(fam)
    upper_strip = max(cur, fine)
    return VectorFieldResult(upper_strip / abs(p), upper_strip, fam, trace, grid)


# -- sandwich -------------------------------------------------------------------------


@dataclass
class DensityBracket:
    r: float
    p: complex
    N: int
    lower: float
    upper: float
    rho: float  # Poincare density |dz|/(1-|w|^2) pulled back, against |dz|
    rho_k1: float  # the doubled normalization pi/(2 log r cos) for comparison
    quad_error: float
    tol: float = 1e-3

    @property
    def ordered(self) -> bool:
        return self.lower <= self.upper

    @property
    def below_cap(self) -> bool:
        return self.lower <= self.rho * (1.0 + self.tol)

    @property
    def above_floor(self) -> bool:
        return self.upper >= 0.5 * self.rho * (1.0 - self.tol)

    @property
    def passed(self) -> bool:
        return self.ordered and self.below_cap and self.above_floor

    @property
    def k1_floor_holds(self) -> bool:
        """Whether the upper bound also clears half of the doubled density."""
        return self.upper >= 0.5 * self.rho_k1 * (1.0 - self.tol)

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "p": self.p,
            "N": self.N,
            "lower": self.lower,
            "upper": self.upper,
            "rho": self.rho,
            "quad_error": self.quad_error,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return io.to_json(self.to_dict())


def sandwich_report(
    a: AnnulusSpec,
    p: complex = 1.0,
    basis_size: int = 10,
    quadrature: Quadrature | None = None,
    grid: tuple[int, int] = (256, 64),
    tol: float = 1e-3,
    strict: bool = True,
) -> DensityBracket:
    """Assemble ``lower``, ``upper`` and ``rho`` at ``p`` against ``|dz|``.

    With ``strict`` a failed invariant raises :class:`VerificationFailure`
    carrying the three numbers.
    """
    p = complex(p)
    prob = ResidueProblem(a, p, basis_size, quadrature)
    low = residue_lower_bounds(prob, [basis_size])[-1]
    up = vectorfield_upper_bound(a, p, grid=grid)
    z = strip_point_from_plane(p)
    rho = poincare_annulus(a, z) / abs(p)
    rho_k1 = kobayashi_annulus(a, z, 1.0) / abs(p)
    br = DensityBracket(a.r, p, basis_size, low.value, up.upper, rho, rho_k1, low.quad_error, tol)
    if strict and not br.passed:
        raise VerificationFailure(
            "density bracket violates lower <= upper, lower <= rho, upper >= rho/2",
            lower=br.lower, upper=br.upper, rho=br.rho,
        )
    return br
