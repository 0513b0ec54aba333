"""Conformal modulus of the annulus under a Beltrami structure.

The strip rectangle ``[0, 2 pi) x [-log r, log r]`` is triangulated (two
right triangles per grid cell) and the Dirichlet energy

    E[u] = integral <A_mu grad u, grad u> d xi d eta

is minimised over continuous piecewise-linear ``u`` by preconditioned
conjugate gradients.  ``A_mu`` is the unit-determinant tensor of the
structure ``|d zeta + mu d conj(zeta)|^2``:

    A_mu = [[|1 - mu|^2, -2 Im mu], [-2 Im mu, |1 + mu|^2]] / (1 - |mu|^2).

It is the pull-back ``|J| Df^{-1} Df^{-T}`` of the Euclidean energy under the
affine map ``f(zeta) = zeta + mu conj(zeta)``.

Two boundary regimes are provided.

``free``
    ``u = 0`` on ``eta = -log r``, ``u = 1`` on ``eta = log r``, periodic in
    ``xi``.  The minimum energy is the capacity, and ``modulus = 1 / E``.

``pinned``
    Conjugate formulation with every boundary point pinned. ``v`` increases
    by 1 around the annulus, ``v = xi / 2 pi`` on the bottom edge and
    ``v = (xi - s) / 2 pi`` on the top edge, so level lines join each bottom
    point to the top point displaced by ``s``. Then ``modulus = E``. For
    ``mu = 0`` this is ``(h^2 + s^2) / (c h)`` with ``c = 2 pi`` and
    ``h = 2 log r``.

Both are written as ``u = lift + w``, where ``lift`` is affine (so its
gradient ``G`` is constant) and ``w`` is periodic and vanishes on the top
and bottom edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, NamedTuple

import numpy as np
import scipy.sparse as sp

from . import io
from .annulus import AnnulusSpec
from .errors import DomainError
from .spin import (
    BeltramiField,
    SpinParams,
    rt_lower_bound,
    rt_upper_bound,
    spin_beltrami_field,
)

__all__ = [
    "SolverProblem",
    "SolverResult",
    "modulus_flat",
    "pinned_flat_modulus",
    "beltrami_tensor",
    "discrete_energy",
    "solve_modulus",
    "ConvergenceTable",
    "convergence_study",
    "AuditReport",
    "paper_bound_audit",
]

MU_CAP = 0.95

BCMode = Literal["free", "pinned"]


def modulus_flat(circumference: float, height: float) -> float:
    """Modulus ``height / circumference`` of a flat cylinder."""
    if not (circumference > 0 and height > 0):
        raise DomainError("circumference and height must be positive")
    return height / circumference


def pinned_flat_modulus(circumference: float, height: float, shear: float) -> float:
    """``(h^2 + s^2) / (c h)``: extremal length of arcs joining each bottom point to the top point ``s`` further along.

    Straight slanted segments of length ``sqrt(h^2 + s^2)`` foliate the
    cylinder evenly, which makes the flat metric extremal.
    """
    modulus_flat(circumference, height)
    return (height**2 + shear**2) / (circumference * height)


@dataclass(frozen=True)
class SolverProblem:
    annulus: AnnulusSpec
    mu: BeltramiField | None = None
    bc_mode: BCMode = "free"
    shear: float = 0.0
    grid: tuple[int, int] = (64, 64)
    tol: float = 1e-10
    max_iters: int = 5000
    mu_cap: float = MU_CAP

    def __post_init__(self):
        nx, ny = self.grid
        if nx < 16 or ny < 16:
            raise ValueError(f"grid must be at least 16x16, got {self.grid}")
        if ny % 2:
            raise ValueError("ny must be even")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.bc_mode not in ("free", "pinned"):
            raise ValueError(f"unknown boundary mode {self.bc_mode!r}")
        if self.mu is not None:
            if self.mu.annulus != self.annulus:
                raise ValueError("Beltrami field belongs to a different annulus")
            if (self.mu.ny, self.mu.nx) != (ny, nx):
                raise ValueError(f"Beltrami grid {(self.mu.nx, self.mu.ny)} does not match solver grid {self.grid}")
            if self.mu.sup > self.mu_cap:
                raise DomainError(f"sup|mu| = {self.mu.sup:.6g} exceeds the solver cap {self.mu_cap}")

    def with_grid(self, nx: int, ny: int, mu: BeltramiField | None = None) -> "SolverProblem":
        return replace(self, grid=(nx, ny), mu=mu)


@dataclass
class SolverResult:
    modulus: float
    energy: float
    iterations: int
    residual: float
    converged: bool
    grid_sequence: list = field(default_factory=list)
    energy_history: list = field(default_factory=list)
    solution: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self, problem: SolverProblem, t: float | None = None) -> dict:
        return {
            "modulus": self.modulus,
            "energy": self.energy,
            "iterations": self.iterations,
            "residual": self.residual,
            "grid": list(problem.grid),
            "mode": problem.bc_mode,
            "t": t,
            "r": problem.annulus.r,
        }

    def to_json(self, problem: SolverProblem, t: float | None = None) -> str:
        return io.to_json(self.to_dict(problem, t))


def beltrami_tensor(mu):
    """Entries ``(a11, a12, a22)`` of ``A_mu``; vectorised over arrays of mu."""
    mu = np.asarray(mu, dtype=complex)
    d = 1.0 - np.abs(mu) ** 2
    a11 = np.abs(1.0 - mu) ** 2 / d
    a22 = np.abs(1.0 + mu) ** 2 / d
    a12 = -2.0 * mu.imag / d
    return a11, a12, a22


class _Mesh(NamedTuple):
    Dx: sp.csr_matrix  # (ntri, nnodes) xi-derivative of the P1 interpolant
    Dy: sp.csr_matrix
    area: float
    nx: int
    ny: int
    interior: np.ndarray  # node indices with free values


def _mesh(a: AnnulusSpec, nx: int, ny: int) -> _Mesh:
    """Gradient operators on the periodic triangulation.

    Node ``(j, i)`` has index ``j * nx + i``.  Cell ``(j, i)`` is split along its
    SW-NE diagonal into lower triangle ``(SW, SE, NE)`` and upper ``(SW, NE, NW)``;
    triangle ``2 * (j * nx + i) + k``, k = 0 lower, 1 upper.
    """
    hx = 2.0 * np.pi / nx
    hy = 2.0 * a.log_r / ny
    J, I = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
    J, I = J.ravel(), I.ravel()
    sw = J * nx + I
    se = J * nx + (I + 1) % nx
    nw = (J + 1) * nx + I
    ne = (J + 1) * nx + (I + 1) % nx
    ncell = nx * ny
    lower = 2 * np.arange(ncell)
    upper = lower + 1
    # lower: grad = ((SE - SW)/hx, (NE - SE)/hy); upper: ((NE - NW)/hx, (NW - SW)/hy)
    rows_x = np.concatenate([lower, lower, upper, upper])
    cols_x = np.concatenate([se, sw, ne, nw])
    vals_x = np.concatenate([np.full(ncell, 1 / hx), np.full(ncell, -1 / hx)] * 2)
    rows_y = np.concatenate([lower, lower, upper, upper])
    cols_y = np.concatenate([ne, se, nw, sw])
    vals_y = np.concatenate([np.full(ncell, 1 / hy), np.full(ncell, -1 / hy)] * 2)
    nn = nx * (ny + 1)
    Dx = sp.csr_matrix((vals_x, (rows_x, cols_x)), shape=(2 * ncell, nn))
    Dy = sp.csr_matrix((vals_y, (rows_y, cols_y)), shape=(2 * ncell, nn))
    interior = np.arange(nx, nn - nx)
    return _Mesh(Dx, Dy, 0.5 * hx * hy, nx, ny, interior)


def _triangle_tensor(problem: SolverProblem):
    nx, ny = problem.grid
    ntri = 2 * nx * ny
    if problem.mu is None:
        return np.ones(ntri), np.zeros(ntri), np.ones(ntri)
    cell_mu = np.repeat(problem.mu.values.ravel(), 2)  # both triangles share the cell value
    return beltrami_tensor(cell_mu)


def _lift_gradient(problem: SolverProblem) -> tuple[float, float]:
    L = problem.annulus.log_r
    if problem.bc_mode == "free":
        return 0.0, 1.0 / (2.0 * L)
    return 1.0 / (2.0 * np.pi), -problem.shear / (4.0 * np.pi * L)


def _lift_values(problem: SolverProblem) -> np.ndarray:
    """Nodal values of the lift on one sheet (``xi`` in ``[0, 2 pi)``)."""
    nx, ny = problem.grid
    L = problem.annulus.log_r
    xi = 2.0 * np.pi * np.arange(nx) / nx
    eta = np.linspace(-L, L, ny + 1)
    X, E = np.meshgrid(xi, eta)
    gx, gy = _lift_gradient(problem)
    base = 0.0 if problem.bc_mode == "free" else 0.0
    return (base + gx * X + gy * (E + L)).ravel()


def _assemble(problem: SolverProblem):
    mesh = _mesh(problem.annulus, *problem.grid)
    a11, a12, a22 = _triangle_tensor(problem)
    gx, gy = _lift_gradient(problem)
    w11, w12, w22 = (mesh.area * a11, mesh.area * a12, mesh.area * a22)
    Dx, Dy = mesh.Dx, mesh.Dy
    K = Dx.T @ sp.diags(w11) @ Dx + Dx.T @ sp.diags(w12) @ Dy + Dy.T @ sp.diags(w12) @ Dx + Dy.T @ sp.diags(w22) @ Dy
    g = Dx.T @ (w11 * gx + w12 * gy) + Dy.T @ (w12 * gx + w22 * gy)
    c = float(np.sum(w11 * gx * gx + 2.0 * w12 * gx * gy + w22 * gy * gy))
    idx = mesh.interior
    return mesh, K.tocsr()[idx][:, idx].tocsr(), g[idx], c


def discrete_energy(problem: SolverProblem, w_interior: np.ndarray) -> float:
    """Energy of ``lift + w`` for given interior values (zero on the edges)."""
    _, K, g, c = _assemble(problem)
    return float(w_interior @ (K @ w_interior) + 2.0 * g @ w_interior + c)


def _pcg(K, b, M, tol, max_iters, energy):
    """Preconditioned CG for ``K x = b``; records the energy after every step."""
    x = np.zeros_like(b)
    r = b.copy()
    bnorm = float(np.linalg.norm(b))
    history = [energy(x)]
    if bnorm == 0.0:
        return x, 0, 0.0, True, history
    z = M(r)
    d = z.copy()
    rz = float(r @ z)
    for k in range(1, max_iters + 1):
        Kd = K @ d
        alpha = rz / float(d @ Kd)
        x += alpha * d
        r -= alpha * Kd
        history.append(energy(x))
        res = float(np.linalg.norm(r)) / bnorm
        if res <= tol:
            return x, k, res, True, history
        z = M(r)
        rz_new = float(r @ z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    return x, max_iters, res, False, history


def _preconditioner(K):
    try:
        import pyamg
    except ImportError:  # pragma: no cover - pyamg is a declared dependency
        diag = K.diagonal()
        return lambda r: r / diag
    ml = pyamg.smoothed_aggregation_solver(K, symmetry="symmetric", max_coarse=200)
    P = ml.aspreconditioner(cycle="V")
    return lambda r: P @ r


def solve_modulus(problem: SolverProblem, keep_solution: bool = False) -> SolverResult:
    """Minimise the discrete energy and convert it to a modulus.

    Returns a result with ``converged=False`` (and the best iterate) if the
    residual does not fall below ``tol`` within ``max_iters``.
    """
    mesh, K, g, c = _assemble(problem)
    rhs = -g

    def energy(w):
        return float(w @ (K @ w) + 2.0 * g @ w + c)

    w, iters, res, ok, hist = _pcg(K, rhs, _preconditioner(K), problem.tol, problem.max_iters, energy)
    E = hist[-1]
    modulus = 1.0 / E if problem.bc_mode == "free" else E
    h = 2.0 * problem.annulus.log_r / problem.grid[1]
    sol = None
    if keep_solution:
        full = _lift_values(problem)
        full[mesh.interior] += w
        sol = full.reshape(problem.grid[1] + 1, problem.grid[0])
    return SolverResult(modulus, E, iters, res, ok, [(h, modulus)], hist, sol)


def _conjugate_free_modulus(problem: SolverProblem) -> float:
    """Modulus from the conjugate problem with free (natural) top/bottom edges.

    ``v`` jumps by 1 around the annulus and is unconstrained on the edges; the
    minimum energy equals the modulus.  Discretely it bounds the modulus from
    above while the ``free`` mode bounds it from below.
    """
    mesh = _mesh(problem.annulus, *problem.grid)
    a11, a12, a22 = _triangle_tensor(problem)
    gx, gy = 1.0 / (2.0 * np.pi), 0.0
    w11, w12, w22 = mesh.area * a11, mesh.area * a12, mesh.area * a22
    Dx, Dy = mesh.Dx, mesh.Dy
    K = (Dx.T @ sp.diags(w11) @ Dx + Dx.T @ sp.diags(w12) @ Dy + Dy.T @ sp.diags(w12) @ Dx + Dy.T @ sp.diags(w22) @ Dy).tocsr()
    g = Dx.T @ (w11 * gx + w12 * gy) + Dy.T @ (w12 * gx + w22 * gy)
    c = float(np.sum(w11 * gx * gx))
    # constants are in the kernel; pin one node
    keep = np.arange(1, K.shape[0])
    Kk, gk = K[keep][:, keep].tocsr(), g[keep]
    w, _, _, _, hist = _pcg(Kk, -gk, _preconditioner(Kk), problem.tol, problem.max_iters,
                            lambda w: float(w @ (Kk @ w) + 2.0 * gk @ w + c))
    return hist[-1]


# -- refinement ----------------------------------------------------------------------


@dataclass
class ConvergenceTable:
    h: list
    modulus: list
    observed_order: float
    extrapolated: float
    exact_representation: bool

    CSV_HEADER = ("h", "modulus")

    def rows(self):
        return list(zip(self.h, self.modulus))

    def to_csv(self) -> str:
        return io.to_csv(self.CSV_HEADER, self.rows())


def convergence_study(problem: SolverProblem, levels: int = 3, mu_func=None) -> ConvergenceTable:
    """Solve on ``levels`` dyadically refined grids starting from ``problem.grid``.

    ``mu_func(xi, eta)`` regenerates the Beltrami field on each grid; without
    it a piecewise-constant field is refined by replication.  The observed
    order comes from the last three levels.  When successive moduli agree to
    rounding (the exact solution is piecewise linear on the mesh) the order is
    reported as ``inf`` and ``exact_representation`` is set.
    """
    if levels < 3:
        raise ValueError("need at least 3 levels")
    nx0, ny0 = problem.grid
    hs, ms, seq = [], [], []
    for k in range(levels):
        nx, ny = nx0 * 2**k, ny0 * 2**k
        mu = None
        if problem.mu is not None:
            mu = problem.mu.resample(nx, ny, mu_func) if k else problem.mu
        res = solve_modulus(problem.with_grid(nx, ny, mu))
        if not res.converged:
            raise ArithmeticError(f"solver did not converge on the {nx}x{ny} grid (residual {res.residual:.3g})")
        hs.append(2.0 * problem.annulus.log_r / ny)
        ms.append(res.modulus)
    d1, d2 = ms[-2] - ms[-3], ms[-1] - ms[-2]
    scale = max(abs(m) for m in ms)
    if abs(d1) <= 1e-11 * scale and abs(d2) <= 1e-11 * scale:
        return ConvergenceTable(hs, ms, math.inf, ms[-1], True)
    order = math.log2(abs(d1 / d2)) if d2 != 0 else math.inf
    extrap = ms[-1] + d2 / (2.0**order - 1.0) if math.isfinite(order) and order > 0 else ms[-1]
    return ConvergenceTable(hs, ms, order, extrap, False)


# -- audit of the r(t) bracket ------------------------------------------------------


@dataclass
class AuditReport:
    """Where solver-based ``log r(.) / log r`` ratios fall relative to the bound bracket.

    Diagnostic only.  ``free_ratio`` is ~1 for every t, because Spin_t is a
    homeomorphism of the unmarked annulus.  ``pinned_ratio`` is
    ``1 + s^2 / (4 log^2 r)`` in the continuum, because Spin_t fixes the
    boundary pointwise.
    """

    t: float
    r: float
    shear: float
    lower: float
    upper: float
    free_ratio: float
    pinned_ratio: float
    free_position: str
    pinned_position: str
    free: SolverResult
    pinned: SolverResult

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "r": self.r,
            "shear": self.shear,
            "lower": self.lower,
            "upper": self.upper,
            "free_ratio": self.free_ratio,
            "pinned_ratio": self.pinned_ratio,
            "free_position": self.free_position,
            "pinned_position": self.pinned_position,
            "free_iterations": self.free.iterations,
            "pinned_iterations": self.pinned.iterations,
        }


def _position(x, lo, hi, tol):
    if x < lo * (1 - tol):
        return "below"
    if x > hi * (1 + tol):
        return "above"
    return "inside"


def paper_bound_audit(
    t: float,
    a: AnnulusSpec,
    grid: tuple[int, int] = (64, 64),
    shear: float | None = None,
    tol: float = 1e-10,
    mu_cap: float = MU_CAP,
    position_tol: float = 1e-6,
) -> AuditReport:
    """Solve both boundary regimes for ``mu_t`` and place them against the bracket.

    ``shear`` defaults to ``t``, the displacement of the spun core point.
    """
    p = SpinParams(t, a)
    lower, upper = rt_lower_bound(p), rt_upper_bound(p)
    s = t if shear is None else shear
    mu = spin_beltrami_field(p, *grid)
    base = SolverProblem(a, mu, "free", 0.0, grid, tol, 20000, mu_cap)
    free = solve_modulus(base)
    pinned = solve_modulus(replace(base, bc_mode="pinned", shear=s))
    flat = a.modulus
    # pinned ratio is measured against the unsheared pinned value (s = 0), which is the flat modulus
    fr, pr = free.modulus / flat, pinned.modulus / flat
    return AuditReport(
        t, a.r, s, lower, upper, fr, pr,
        _position(fr, lower, upper, position_tol),
        _position(pr, lower, upper, position_tol),
        free, pinned,
    )
