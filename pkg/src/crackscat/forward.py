"""Nystrom solver for plane-wave scattering by sound-soft cracks.

The first-kind system ``S_k psi = -u^i`` is collocated at the cosine grid
nodes.  On a crack's own block the kernel ``Phi_k / 2`` of the even
2pi-periodic extension is split as

    A(t, tau) [ln 4 sin^2((t - tau)/2) + ln 4 sin^2((t + tau)/2)] + B(t, tau)

with ``A = -J0(kr)/(8 pi)`` handled by trigonometric log weights and the
smooth remainder ``B`` by the trapezoid rule.  Because ``A`` and ``B``
depend on ``tau`` only through ``cos tau`` the 2n-point rule folds onto an
``n x n`` block with weights ``2 [R_j(t) + R_j(-t)]``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .geometry import CrackSet, GeometryError, NystromGrid, build_grid, sample_polyline
from .numerics import LUFactorization, hankel1, kernel_parts, log_quad_weights

INV4PI = 1.0 / (4 * np.pi)


def observation_directions(count: int = 32) -> np.ndarray:
    """Evenly spaced directions ``(cos 2 pi j/N, sin 2 pi j/N)``, j = 1..N."""
    ang = 2 * np.pi * np.arange(1, count + 1) / count
    return np.stack([np.cos(ang), np.sin(ang)], axis=-1)


def farfield_constant(k: float) -> complex:
    return np.exp(1j * np.pi / 4) / np.sqrt(8 * np.pi * k)


@lru_cache(maxsize=16)
def folded_log_weights(n: int) -> np.ndarray:
    """``W[i, j] = 2 (R_j(t_i) + R_j(-t_i))`` on the first n grid nodes."""
    t = (2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n)
    return _folded_weights_at(n, t)


def _folded_weights_at(n, t):
    r_plus = log_quad_weights(n, t)[..., :n]
    r_minus = log_quad_weights(n, -np.asarray(t))[..., :n]
    out = 2.0 * (r_plus + r_minus)
    out.setflags(write=False)
    return out


@dataclass
class SelfGeometry:
    """Pairwise geometry between target parameters and one crack's nodes."""

    diff: np.ndarray  # (m, n, 2) target minus source
    r: np.ndarray
    logq4: np.ndarray  # ln(Q / 4), analytic limit where the points coincide
    coincide: np.ndarray  # bool mask, cos t == cos tau


def self_geometry(tgt_points, tgt_s, tgt_speed, grid: NystromGrid, atol: float = 1e-14) -> SelfGeometry:
    diff = tgt_points[:, None, :] - grid.points[None, :, :]
    r2 = (diff**2).sum(-1)
    dc = tgt_s[:, None] - grid.s[None, :]
    coincide = np.abs(dc) <= atol
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(coincide, (tgt_speed**2)[:, None], r2 / np.where(coincide, 1.0, dc) ** 2)
    return SelfGeometry(diff, np.sqrt(r2), np.log(q / 4.0), coincide)


def self_kernel(k: float, geo: SelfGeometry, tgt_speed):
    """Return ``(A, B)`` of the log split; ``k = 0`` gives the Laplace kernel."""
    if k == 0:
        a = np.full(geo.r.shape, -1.0 / (8 * np.pi))
        b = -geo.logq4 / (8 * np.pi)
        # ln(Q/4) already holds the limit, so B reduces to -(1/4pi) ln(|z'|/2) there
        return a, b
    j0, _, g, _ = kernel_parts(k * geo.r)
    a = -j0 / (8 * np.pi)
    b = -INV4PI * j0 * (np.log(k) + 0.5 * geo.logq4) + 0.5 * g
    return a, b


def assemble_selfblock(grid: NystromGrid, k: float) -> np.ndarray:
    """Collocation matrix of the crack's own single-layer block."""
    if k < 0:
        raise ValueError("wavenumber must be non-negative")
    geo = self_geometry(grid.points, grid.s, grid.speed, grid)
    assert not np.any(geo.coincide & ~np.eye(grid.n, dtype=bool)), "grid node at a crack tip"
    a, b = self_kernel(k, geo, grid.speed)
    return a * folded_log_weights(grid.n) + (2 * np.pi / grid.n) * b


def fundamental(k: float, r):
    """``Phi_k`` at distance ``r``; ``k = 0`` gives ``-ln(r)/(2 pi)``."""
    if k == 0:
        return -np.log(r) / (2 * np.pi)
    h0, _ = hankel1(k * r)
    return 0.25j * h0


def assemble_crossblock(grid_i: NystromGrid, grid_j: NystromGrid, k: float, d_min: float = 0.0) -> np.ndarray:
    """Block coupling density on crack ``j`` to collocation points on crack ``i``."""
    diff = grid_i.points[:, None, :] - grid_j.points[None, :, :]
    r = np.sqrt((diff**2).sum(-1))
    if d_min > 0 and r.min() < d_min:
        raise GeometryError(f"crack nodes closer than d_min ({r.min():.3e} < {d_min})")
    return grid_j.spacing * fundamental(k, r)


def assemble_matrix(grids, k: float, d_min: float = 0.0) -> np.ndarray:
    n = grids[0].n
    m = len(grids)
    out = np.empty((m * n, m * n), dtype=complex if k > 0 else float)
    for i, gi in enumerate(grids):
        for j, gj in enumerate(grids):
            blk = assemble_selfblock(gi, k) if i == j else assemble_crossblock(gi, gj, k, d_min)
            out[i * n:(i + 1) * n, j * n:(j + 1) * n] = blk
    return out


def incident(k: float, d, points) -> np.ndarray:
    return np.exp(1j * k * (points @ np.asarray(d, dtype=float)))


class ForwardSystem:
    """Assembled and factorized single-layer system for fixed cracks and k."""

    def __init__(self, cracks: CrackSet, n: int, k: float):
        if k <= 0:
            raise ValueError("wavenumber must be positive")
        self.cracks = cracks
        self.n = n
        self.k = float(k)
        self.grids = [build_grid(c, n) for c in cracks]
        self.points = np.concatenate([g.points for g in self.grids])
        self.matrix = assemble_matrix(self.grids, self.k, cracks.d_min)
        self.lu = LUFactorization(self.matrix)

    @property
    def size(self) -> int:
        return self.n * len(self.grids)

    def solve_rhs(self, rhs):
        return self.lu.solve(rhs)

    def solve(self, d, scale: complex = 1.0) -> "DensitySolution":
        d = _unit(d)
        psi = self.solve_rhs(-scale * incident(self.k, d, self.points))
        return DensitySolution(self.k, d, self.grids, psi, self)

    def farfield_matrix(self, directions) -> np.ndarray:
        """Matrix mapping stacked psi to far-field values at ``directions``."""
        directions = np.asarray(directions, dtype=float)
        w = np.concatenate([np.full(g.n, g.spacing) for g in self.grids])
        phase = np.exp(-1j * self.k * directions @ self.points.T)
        return farfield_constant(self.k) * phase * w


def _unit(d):
    d = np.asarray(d, dtype=float)
    nrm = np.linalg.norm(d)
    if not np.isclose(nrm, 1.0, atol=1e-12):
        raise ValueError("direction must be a unit vector")
    return d


@dataclass
class DensitySolution:
    """Density psi (stacked over cracks) in cosine-transformed coordinates."""

    k: float
    d: np.ndarray
    grids: list
    psi: np.ndarray
    system: ForwardSystem | None = None

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("wavenumber must be positive")
        if self.psi.shape[0] != sum(g.n for g in self.grids):
            raise ValueError("density length does not match the grids")

    def blocks(self) -> list[np.ndarray]:
        n = self.grids[0].n
        return [self.psi[i * n:(i + 1) * n] for i in range(len(self.grids))]

    def physical_density(self) -> list[np.ndarray]:
        """phi at the nodes: psi / (|z'| sin t)."""
        return [p / g.arcw for p, g in zip(self.blocks(), self.grids)]


def solve_density(cracks: CrackSet, n: int, k: float, d) -> DensitySolution:
    return ForwardSystem(cracks, n, k).solve(d)


@dataclass
class FarFieldSet:
    """Far-field samples at fixed wavenumber and incident direction."""

    k: float
    d: np.ndarray
    directions: np.ndarray
    values: np.ndarray
    delta: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=float)
        self.directions = np.asarray(self.directions, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.directions.ndim != 2 or self.directions.shape[1] != 2:
            raise ValueError("directions must have shape (N, 2)")
        if self.values.shape != (self.directions.shape[0],):
            raise ValueError("values must match directions")
        if not np.allclose(np.linalg.norm(self.directions, axis=1), 1.0, atol=1e-12):
            raise ValueError("observation directions must be unit vectors")

    def __len__(self):
        return len(self.values)


def far_field(sol: DensitySolution, directions=None) -> FarFieldSet:
    """``u_inf(xhat) = C_k sum (pi/n) exp(-i k xhat.y_j) psi_j``."""
    if directions is None:
        directions = observation_directions()
    directions = np.asarray(directions, dtype=float)
    pts = np.concatenate([g.points for g in sol.grids])
    w = np.concatenate([np.full(g.n, g.spacing) for g in sol.grids])
    phase = np.exp(-1j * sol.k * directions @ pts.T)
    values = farfield_constant(sol.k) * phase @ (w * sol.psi)
    return FarFieldSet(sol.k, sol.d, directions, values)


def synthesize(cracks: CrackSet, k: float, d, n: int = 64, directions=None) -> FarFieldSet:
    """Noise-free far field of ``cracks`` for one incident plane wave."""
    return far_field(solve_density(cracks, n, k, d), directions)


@dataclass
class FieldValues:
    scattered: np.ndarray
    total: np.ndarray
    near: np.ndarray  # True where the point is inside the accuracy guard


def field_at(sol: DensitySolution, points) -> FieldValues:
    """Scattered and total field at points off the cracks (smooth rule)."""
    points = np.asarray(points, dtype=float)
    shape = points.shape[:-1]
    pts = points.reshape(-1, 2)
    us = np.zeros(len(pts), dtype=complex)
    near = np.zeros(len(pts), dtype=bool)
    for g, psi in zip(sol.grids, sol.blocks()):
        diff = pts[:, None, :] - g.points[None, :, :]
        r = np.sqrt((diff**2).sum(-1))
        us += fundamental(sol.k, r) @ (g.spacing * psi)
        guard = 10 * g.spacing * g.arcw.max()
        near |= r.min(axis=1) < guard
    total = us + incident(sol.k, sol.d, pts)
    return FieldValues(us.reshape(shape), total.reshape(shape), near.reshape(shape))


def boundary_potential(grids, densities, k: float, crack_index: int, s) -> np.ndarray:
    """Single-layer potential on crack ``crack_index`` at arbitrary ``s``.

    The target's own crack is handled with the log-split rule at the
    off-grid parameter ``t = arccos s``; the other cracks by the smooth rule.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    g = grids[crack_index]
    t = np.arccos(np.clip(s, -1, 1))
    crack_pts = None
    out = np.zeros(len(s), dtype=complex)
    for j, (gj, psi) in enumerate(zip(grids, densities)):
        if j == crack_index:
            continue
        if crack_pts is None:
            crack_pts = _target_points(grids, crack_index, s)[0]
        diff = crack_pts[:, None, :] - gj.points[None, :, :]
        r = np.sqrt((diff**2).sum(-1))
        out += fundamental(k, r) @ (gj.spacing * psi)
    pts, speed = _target_points(grids, crack_index, s)
    geo = self_geometry(pts, s, speed, g)
    a, b = self_kernel(k, geo, speed)
    wts = _folded_weights_at(g.n, t)
    out += (a * wts + (2 * np.pi / g.n) * b) @ densities[crack_index]
    return out


def _target_points(grids, crack_index, s):
    crack = grids[crack_index].crack
    return crack.point(s), np.linalg.norm(crack.deriv(s), axis=-1)


def boundary_residual(sol: DensitySolution, crack_index: int, s) -> np.ndarray:
    """Total field ``u^i + S_k psi`` at boundary parameters ``s`` (should vanish)."""
    us = boundary_potential(sol.grids, sol.blocks(), sol.k, crack_index, s)
    pts = sol.grids[crack_index].crack.point(np.atleast_1d(s))
    return us + incident(sol.k, sol.d, pts)


def add_noise(data: FarFieldSet, delta: float, seed: int | None = None) -> FarFieldSet:
    """``F + delta ||F|| R / ||R||`` with complex standard-normal ``R``."""
    if delta < 0:
        raise ValueError("noise level must be non-negative")
    if delta == 0:
        return replace(data, values=data.values.copy(), delta=0.0, seed=seed)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(data)) + 1j * rng.standard_normal(len(data))
    values = data.values + delta * np.linalg.norm(data.values) * noise / np.linalg.norm(noise)
    return replace(data, values=values, delta=float(delta), seed=seed)


def min_distance_to_cracks(cracks: CrackSet, points) -> np.ndarray:
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    best = np.full(len(points), np.inf)
    for c in cracks:
        line = sample_polyline(c, 2048, eps=0.0)
        diff = points[:, None, :] - line[None, :, :]
        best = np.minimum(best, np.sqrt((diff**2).sum(-1)).min(axis=1))
    return best
