"""The spin shear of the annulus, its Beltrami coefficient, and modulus bounds.

In the strip coordinate the spin map is the piecewise-affine shear

    Spin_t(xi + i eta) = xi + t (1 - |eta| / log r) + i eta,

which fixes both boundary lines, commutes with ``xi -> xi + 2 pi`` and moves
the core point ``0`` to ``t``.  Its Beltrami coefficient is constant on each
half-strip; :func:`spin_beltrami` gives the closed form and
:func:`spin_beltrami_fd` an independent finite-difference estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import io
from .annulus import AnnulusSpec, StripPoint
from .errors import DomainError

__all__ = [
    "SpinParams",
    "BeltramiField",
    "BoundPair",
    "spin_map",
    "spin_map_inverse",
    "spin_displacement",
    "spin_beltrami",
    "spin_beltrami_fd",
    "spin_beltrami_sup",
    "spin_beltrami_field",
    "rt_upper_bound",
    "rt_lower_bound",
    "rt_lower_bound_refined",
    "bound_pair",
    "bounds_table",
    "bounds_table_csv",
]


@dataclass(frozen=True)
class SpinParams:
    t: float
    annulus: AnnulusSpec

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise DomainError(f"spin amount must be finite, got t={self.t!r}")

    @property
    def slope(self) -> float:
        """``t / log r``: horizontal displacement per unit height."""
        return self.t / self.annulus.log_r


def spin_displacement(p: SpinParams, eta):
    """Horizontal shift ``t (1 - |eta|/log r)``; accepts scalars or arrays."""
    return p.t * (1.0 - np.abs(eta) / p.annulus.log_r)


def spin_map(p: SpinParams, z: StripPoint) -> StripPoint:
    if abs(z.eta) > p.annulus.log_r:
        raise DomainError(f"|eta|={abs(z.eta)!r} outside the closed strip of half-height {p.annulus.log_r!r}")
    return StripPoint(z.xi + float(spin_displacement(p, z.eta)), z.eta)


def spin_map_inverse(p: SpinParams, z: StripPoint) -> StripPoint:
    if abs(z.eta) > p.annulus.log_r:
        raise DomainError(f"|eta|={abs(z.eta)!r} outside the closed strip of half-height {p.annulus.log_r!r}")
    return StripPoint(z.xi - float(spin_displacement(p, z.eta)), z.eta)


def _open_half(p: SpinParams, eta: float) -> None:
    if eta == 0.0:
        raise DomainError("the spin map is not differentiable on the crease eta = 0")
    if abs(eta) >= p.annulus.log_r:
        raise DomainError("the Beltrami coefficient is only defined for 0 < |eta| < log r")


def spin_beltrami(p: SpinParams, eta: float) -> complex:
    """``mu_t = -i s / (2 + i s)`` with ``s = sign(eta) t / log r``.

    On each half the map is ``f = zeta + t -/+ (t/log r)(zeta - conj(zeta))/(2i)``,
    so ``f_zeta = 1 + i s/2`` and ``f_conj(zeta) = -i s/2``.
    """
    _open_half(p, eta)
    s = math.copysign(1.0, eta) * p.slope
    return (-1j * s) / (2.0 + 1j * s)


def spin_beltrami_sup(p: SpinParams) -> float:
    s = abs(p.slope)
    return s / math.sqrt(4.0 + s * s)


def spin_beltrami_fd(p: SpinParams, z: StripPoint, h: float = 1e-4) -> complex:
    """Beltrami coefficient of ``spin_map`` from centred differences with step ``h``."""
    if not h > 0:
        raise ValueError("h must be positive")
    if abs(z.eta) <= h:
        raise DomainError(f"stencil of half-width {h} straddles the crease at eta={z.eta}")
    if abs(z.eta) + h >= p.annulus.log_r:
        raise DomainError(f"stencil of half-width {h} leaves the strip at eta={z.eta}")

    def f(xi, eta):
        w = spin_map(p, StripPoint(xi, eta))
        return complex(w.xi, w.eta)

    f_xi = (f(z.xi + h, z.eta) - f(z.xi - h, z.eta)) / (2 * h)
    f_eta = (f(z.xi, z.eta + h) - f(z.xi, z.eta - h)) / (2 * h)
    f_z = 0.5 * (f_xi - 1j * f_eta)
    f_zbar = 0.5 * (f_xi + 1j * f_eta)
    return f_zbar / f_z


# -- Beltrami fields on the fundamental rectangle -----------------------------------


@dataclass(frozen=True)
class BeltramiField:
    """Cell-centred Beltrami coefficients on ``[0, 2 pi) x [-log r, log r]``.

    ``values[j, i]`` is ``mu`` at ``(xi_i, eta_j)`` with
    ``xi_i = 2 pi (i + 1/2) / nx`` and ``eta_j = -log r + 2 log r (j + 1/2) / ny``.
    The grid is periodic in ``xi``.  Cell centres never sit on the spin crease
    when ``ny`` is even.
    """

    values: np.ndarray
    annulus: AnnulusSpec

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2:
            raise ValueError("Beltrami values must be a 2-D array (ny, nx)")
        if not np.all(np.isfinite(v)):
            raise ValueError("Beltrami values must be finite")
        if v.size and np.max(np.abs(v)) >= 1.0:
            raise DomainError(f"sup|mu| = {np.max(np.abs(v))!r} is not < 1")
        object.__setattr__(self, "values", v)

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def periodic(self) -> bool:
        return True

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    @staticmethod
    def cell_centres(a: AnnulusSpec, nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
        xi = 2.0 * np.pi * (np.arange(nx) + 0.5) / nx
        eta = -a.log_r + 2.0 * a.log_r * (np.arange(ny) + 0.5) / ny
        return xi, eta

    @classmethod
    def zeros(cls, a: AnnulusSpec, nx: int, ny: int) -> "BeltramiField":
        return cls(np.zeros((ny, nx), dtype=complex), a)

    @classmethod
    def constant(cls, a: AnnulusSpec, nx: int, ny: int, mu: complex) -> "BeltramiField":
        return cls(np.full((ny, nx), complex(mu)), a)

    @classmethod
    def from_function(cls, a: AnnulusSpec, nx: int, ny: int, func: Callable) -> "BeltramiField":
        """Sample ``func(xi, eta)`` (vectorised) at the cell centres."""
        xi, eta = cls.cell_centres(a, nx, ny)
        X, E = np.meshgrid(xi, eta)
        return cls(np.broadcast_to(np.asarray(func(X, E), dtype=complex), X.shape).copy(), a)

    def resample(self, nx: int, ny: int, func: Callable | None = None) -> "BeltramiField":
        """Same field on another grid; needs the generating ``func`` unless nx, ny are multiples."""
        if func is not None:
            return BeltramiField.from_function(self.annulus, nx, ny, func)
        if nx % self.nx or ny % self.ny:
            raise ValueError("piecewise-constant refinement needs integer multiples of the grid")
        return BeltramiField(np.kron(self.values, np.ones((ny // self.ny, nx // self.nx))), self.annulus)


def spin_beltrami_field(p: SpinParams, nx: int, ny: int) -> BeltramiField:
    if ny % 2:
        raise ValueError("ny must be even so that the crease eta = 0 is a cell edge")
    s = p.slope
    mu_up = (-1j * s) / (2.0 + 1j * s)
    mu_down = (1j * s) / (2.0 - 1j * s)
    vals = np.empty((ny, nx), dtype=complex)
    vals[: ny // 2] = mu_down
    vals[ny // 2 :] = mu_up
    return BeltramiField(vals, p.annulus)


# -- modulus bounds ---------------------------------------------------------------------


def rt_upper_bound(p: SpinParams) -> float:
    """``t sqrt(1/t^2 + 1/(log r)^2) = sqrt(1 + (t/log r)^2)``, bound on ``log r(t) / log r``."""
    if not p.t > 0:
        raise DomainError(f"upper bound needs t > 0, got t={p.t!r}")
    return math.hypot(1.0, p.slope)


def _need_large_t(p: SpinParams) -> None:
    if not p.t > 2.0 * math.pi:
        raise DomainError(f"lower bounds are only asserted for t > 2 pi, got t={p.t!r}")


def rt_lower_bound(p: SpinParams) -> float:
    """``t ((1 - 2 pi/t)^2 + (log r/t)^2) / sqrt(1 + (log r/t)^2)``."""
    _need_large_t(p)
    t, L = p.t, p.annulus.log_r
    u = L / t
    return t * ((1.0 - 2.0 * math.pi / t) ** 2 + u * u) / math.sqrt(1.0 + u * u)


def rt_lower_bound_refined(p: SpinParams) -> float:
    """The explicit fraction
    ``(2 sqrt((t - 2 pi)^2 + (log r)^2))^2 / (4 sqrt(t^2 + (log r)^2) log r)``.

    Algebraically this equals ``rt_lower_bound(p) / log r``; the two agree only
    when ``log r = 1``.
    """
    _need_large_t(p)
    t, L = p.t, p.annulus.log_r
    num = (2.0 * math.hypot(t - 2.0 * math.pi, L)) ** 2
    return num / (4.0 * math.hypot(t, L) * L)


class BoundPair(NamedTuple):
    lower: float
    upper: float


def bound_pair(p: SpinParams) -> BoundPair:
    return BoundPair(rt_lower_bound(p), rt_upper_bound(p))


class BoundRow(NamedTuple):
    t: float
    r: float
    lower: float
    refined_lower: float
    upper: float


BOUNDS_HEADER = ("t", "r", "lower", "refined_lower", "upper")


def bounds_table(ts: Iterable[float], radii: Sequence[float]) -> list[BoundRow]:
    rows = []
    for r in radii:
        a = AnnulusSpec(r)
        for t in ts:
            p = SpinParams(float(t), a)
            rows.append(BoundRow(p.t, a.r, rt_lower_bound(p), rt_lower_bound_refined(p), rt_upper_bound(p)))
    return rows


def bounds_table_csv(rows: Sequence[BoundRow]) -> str:
    return io.to_csv(BOUNDS_HEADER, rows)
