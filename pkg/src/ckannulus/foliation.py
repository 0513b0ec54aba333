"""Measured foliations on the fundamental rectangle and their integrals.

A foliation ``|du|`` is stored through samples of a level function ``u`` on
the node grid ``xi_i = 2 pi i / nx`` (periodic, ``i < nx``) and
``eta_j = -log r + 2 log r j / ny`` (``j <= ny``).  Level functions that are
multivalued on the annulus, such as ``xi`` itself, are stored on one sheet
together with their period ``xi_jump``: ``u(xi + 2 pi, eta) = u(xi, eta) + xi_jump``.
Only gradients enter the integrals, so this loses nothing.

``ny`` must be even.  The rectangle is split at the crease ``eta = 0`` and each
half is differentiated with second-order one-sided stencils at its edges, so
fields that are merely Lipschitz across the crease (anything pulled back by the
spin map) are integrated without smearing the kink.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np

from . import io
from .annulus import AnnulusSpec
from .errors import DomainError
from .spin import SpinParams, spin_displacement

__all__ = [
    "FoliationGrid",
    "grid_nodes",
    "sheared_xi",
    "sheared_eta",
    "dirichlet_integral",
    "wedge_integral",
    "cauchy_schwarz_check",
    "CauchySchwarzReport",
    "random_smooth_foliation",
    "save_grid",
    "load_grid",
]

MIN_RESOLUTION = 16


def grid_nodes(a: AnnulusSpec, nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
    xi = 2.0 * np.pi * np.arange(nx) / nx
    eta = np.linspace(-a.log_r, a.log_r, ny + 1)
    return xi, eta


@dataclass(frozen=True)
class FoliationGrid:
    values: np.ndarray  # shape (ny + 1, nx)
    xi_jump: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError("foliation samples must be a 2-D array (ny + 1, nx)")
        if np.isnan(v).any():
            raise ValueError("foliation samples contain NaN")
        if not np.all(np.isfinite(v)):
            raise ValueError("foliation samples must be finite")
        object.__setattr__(self, "values", v)

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0] - 1

    @classmethod
    def from_function(cls, a: AnnulusSpec, nx: int, ny: int, func: Callable, xi_jump: float = 0.0) -> "FoliationGrid":
        """Sample ``func(xi, eta)`` (vectorised) on the node grid."""
        xi, eta = grid_nodes(a, nx, ny)
        X, E = np.meshgrid(xi, eta)
        return cls(np.broadcast_to(np.asarray(func(X, E), dtype=float), X.shape).copy(), xi_jump)


def sheared_xi(p: SpinParams, nx: int, ny: int) -> FoliationGrid:
    """``xi o Spin_t^{-1} = xi - t (1 - |eta| / log r)``, period ``2 pi``."""
    return FoliationGrid.from_function(p.annulus, nx, ny, lambda X, E: X - spin_displacement(p, E), 2.0 * np.pi)


def sheared_eta(p: SpinParams, nx: int, ny: int) -> FoliationGrid:
    """``eta o Spin_t^{-1} = eta`` (the shear is horizontal)."""
    return FoliationGrid.from_function(p.annulus, nx, ny, lambda X, E: E)


def _check(u: FoliationGrid, a: AnnulusSpec) -> None:
    if u.nx < MIN_RESOLUTION or u.ny < MIN_RESOLUTION:
        raise ValueError(f"grid resolution must be at least {MIN_RESOLUTION}x{MIN_RESOLUTION}")
    if u.ny % 2:
        raise ValueError("ny must be even so that eta = 0 is a grid line")


def _gradients(u: FoliationGrid, a: AnnulusSpec):
    """Per-half gradients ``[(u_xi, u_eta), (u_xi, u_eta)]`` for eta <= 0 and eta >= 0."""
    _check(u, a)
    nx, ny = u.nx, u.ny
    h_xi = 2.0 * np.pi / nx
    h_eta = 2.0 * a.log_r / ny
    v = u.values
    # periodic centred difference; the sheet jump is added across the seam
    ahead = np.roll(v, -1, axis=1)
    ahead[:, -1] += u.xi_jump
    behind = np.roll(v, 1, axis=1)
    behind[:, 0] -= u.xi_jump
    u_xi = (ahead - behind) / (2.0 * h_xi)
    mid = ny // 2
    halves = []
    for rows in (slice(0, mid + 1), slice(mid, ny + 1)):
        u_eta = np.gradient(v[rows], h_eta, axis=0, edge_order=2)
        halves.append((u_xi[rows], u_eta))
    return halves


def _weights(a: AnnulusSpec, nx: int, ny: int) -> np.ndarray:
    """Trapezoid weights in eta for one half (ny/2 intervals), times the xi cell width."""
    h_eta = 2.0 * a.log_r / ny
    w = np.full(ny // 2 + 1, h_eta)
    w[0] = w[-1] = 0.5 * h_eta
    return w * (2.0 * np.pi / nx)


def _integrate(halves_integrand, a: AnnulusSpec, nx: int, ny: int) -> float:
    w = _weights(a, nx, ny)
    return float(sum(np.sum(w[:, None] * f) for f in halves_integrand))


def dirichlet_integral(u: FoliationGrid, a: AnnulusSpec) -> float:
    """``integral (u_xi^2 + u_eta^2) d xi d eta`` over the fundamental rectangle."""
    halves = _gradients(u, a)
    return _integrate([gx**2 + ge**2 for gx, ge in halves], a, u.nx, u.ny)


def wedge_integral(u: FoliationGrid, v: FoliationGrid, a: AnnulusSpec) -> float:
    """``integral |u_xi v_eta - u_eta v_xi| d xi d eta``."""
    if u.values.shape != v.values.shape:
        raise ValueError("foliation grids must match")
    hu, hv = _gradients(u, a), _gradients(v, a)
    return _integrate([np.abs(ux * ve - ue * vx) for (ux, ue), (vx, ve) in zip(hu, hv)], a, u.nx, u.ny)


class CauchySchwarzReport(NamedTuple):
    lhs_squared: float
    rhs: float
    holds: bool
    margin: float

    @property
    def slack(self) -> float:
        """``rhs / lhs^2 - 1``; zero at equality."""
        return self.rhs / self.lhs_squared - 1.0 if self.lhs_squared else math.inf


def cauchy_schwarz_check(u: FoliationGrid, v: FoliationGrid, a: AnnulusSpec, margin: float = 0.01) -> CauchySchwarzReport:
    """Check ``(wedge)^2 <= Dir(u) Dir(v)`` allowing ``margin`` relative quadrature error."""
    w = wedge_integral(u, v, a)
    rhs = dirichlet_integral(u, a) * dirichlet_integral(v, a)
    lhs2 = w * w
    return CauchySchwarzReport(lhs2, rhs, bool(lhs2 <= rhs * (1.0 + margin)), margin)


def random_smooth_foliation(a: AnnulusSpec, nx: int, ny: int, rng: np.random.Generator, modes: int = 3) -> FoliationGrid:
    """A random smooth level function: ``c xi`` plus a few Fourier-Chebyshev modes."""
    c = rng.integers(-1, 2)
    coeff = rng.normal(size=(modes, modes, 2)) / (1.0 + np.arange(modes))[:, None, None]

    def func(X, E):
        s = E / a.log_r
        out = c * X
        for m in range(modes):
            for k in range(modes):
                cheb = np.cos(k * np.arccos(np.clip(s, -1.0, 1.0)))
                out = out + cheb * (coeff[m, k, 0] * np.cos(m * X) + coeff[m, k, 1] * np.sin(m * X))
        return out

    return FoliationGrid.from_function(a, nx, ny, func, xi_jump=2.0 * np.pi * c)


# -- snapshots ------------------------------------------------------------------------


def save_grid(path, grid: FoliationGrid, a: AnnulusSpec, t: float | None = None, fmt: str | None = None) -> Path:
    """Write a row-major snapshot: CSV (``# {...}`` header line) or flat binary.

    The binary layout is one JSON header line terminated by ``\\n`` followed by
    ``(ny + 1) * nx`` little-endian float64 values.
    """
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "bin")
    header = {"nx": grid.nx, "ny": grid.ny, "r": a.r, "log_r": a.log_r, "t": t, "xi_jump": grid.xi_jump}
    if fmt == "csv":
        text = "# " + json.dumps(header, sort_keys=True) + "\n"
        text += "\n".join(",".join(io.format_float(x) for x in row) for row in grid.values) + "\n"
        path.write_text(text, encoding="utf-8", newline="\n")
    elif fmt == "bin":
        with open(path, "wb") as fh:
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes())
    else:
        raise ValueError(f"unknown snapshot format {fmt!r}")
    return path


def load_grid(path) -> tuple[FoliationGrid, dict]:
    path = Path(path)
    raw = path.read_bytes()
    first, _, rest = raw.partition(b"\n")
    if first.startswith(b"# "):
        header = json.loads(first[2:])
        values = np.array([[float(x) for x in line.split(",")] for line in rest.decode().splitlines() if line])
    else:
        header = json.loads(first)
        values = np.frombuffer(rest, dtype="<f8").reshape(header["ny"] + 1, header["nx"])
    return FoliationGrid(values, header.get("xi_jump", 0.0)), header
