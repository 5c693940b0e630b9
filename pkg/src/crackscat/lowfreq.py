"""Laplace limit operators and the small-k expansion of the total field.

All densities live in psi-coordinates on the cosine grid, so a physical
density ``phi`` corresponds to ``psi_j = phi(z(s_j)) m_j`` with arc weights
``m_j = |z'(s_j)| sin t_j``.  In these coordinates

    L psi   = sum (pi/n) psi_j
    W psi   = psi - (L psi / |Sigma|) m
    A       = S_0 W + 1 (pi/n)^T          (rank-one L term)

with ``|Sigma| = L m`` the discrete total length, so ``L W = 0`` and
``W^2 = W`` hold exactly in the discrete algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forward import (DensitySolution, ForwardSystem, assemble_matrix, boundary_potential, fundamental,
                      incident)
from .geometry import CrackSet, build_grid
from .numerics import LUFactorization


@dataclass
class LaplaceSystem:
    cracks: CrackSet
    n: int
    grids: list
    s0: np.ndarray
    arcw: np.ndarray  # stacked m_j
    weights: np.ndarray  # stacked pi/n
    length: float
    a: np.ndarray
    s0_one: np.ndarray  # S_0 applied to the constant density 1
    rho: np.ndarray  # A^{-1} S_0(1)

    def apply_L(self, psi):
        return apply_L(self.weights, psi)

    def apply_W(self, psi):
        return apply_W(self.weights, self.arcw, psi)


def apply_L(weights, psi):
    """Integral of the physical density: ``sum (pi/n) psi_j``."""
    return np.tensordot(weights, psi, axes=(0, 0))


def apply_W(weights, arcw, psi):
    """Subtract the mean density, mapped through the arc weights."""
    length = float(weights @ arcw)
    psi = np.asarray(psi)
    lp = apply_L(weights, psi)
    return psi - np.multiply.outer(arcw, lp) / length


def w_matrix(weights, arcw):
    return np.eye(len(arcw)) - np.outer(arcw, weights) / float(weights @ arcw)


def _stack(grids):
    arcw = np.concatenate([g.arcw for g in grids])
    weights = np.concatenate([np.full(g.n, g.spacing) for g in grids])
    return arcw, weights


def solve_profile(cracks: CrackSet, n: int) -> LaplaceSystem:
    """Assemble ``S_0``, ``A`` and solve ``A rho = S_0(1)``."""
    grids = [build_grid(c, n) for c in cracks]
    s0 = assemble_matrix(grids, 0.0, cracks.d_min)
    arcw, weights = _stack(grids)
    length = float(weights @ arcw)
    a = s0 @ w_matrix(weights, arcw) + np.outer(np.ones(len(arcw)), weights)
    s0_one = s0 @ arcw
    rho = LUFactorization(a).solve(s0_one)
    return LaplaceSystem(cracks, n, grids, s0, arcw, weights, length, a, s0_one, rho)


def single_layer(grids, psi, k: float, points) -> np.ndarray:
    """Smooth-rule single layer ``sum (pi/n) Phi_k(x, y_j) psi_j`` at ``points``."""
    points = np.asarray(points, dtype=float)
    pts = points.reshape(-1, 2)
    out = np.zeros(len(pts), dtype=complex if (k > 0 or np.iscomplexobj(psi)) else float)
    off = 0
    for g in grids:
        diff = pts[:, None, :] - g.points[None, :, :]
        r = np.sqrt((diff**2).sum(-1))
        out = out + fundamental(k, r) @ (g.spacing * psi[off:off + g.n])
        off += g.n
    return out.reshape(points.shape[:-1])


def eval_v(system: LaplaceSystem, points) -> np.ndarray:
    """Harmonic profile ``v = [S_0(W rho) + L rho - S_0(1)] / |Sigma|`` off the cracks."""
    wrho = system.apply_W(system.rho)
    lr = system.apply_L(system.rho)
    val = single_layer(system.grids, wrho - system.arcw, 0.0, points) + lr
    return val / system.length


def eval_v_boundary(system: LaplaceSystem, crack_index: int, s) -> np.ndarray:
    """``v`` at boundary parameters via the log-split rule (should vanish)."""
    wrho = system.apply_W(system.rho) - system.arcw
    n = system.n
    dens = [wrho[i * n:(i + 1) * n] for i in range(len(system.grids))]
    val = boundary_potential(system.grids, dens, 0.0, crack_index, s).real
    return (val + system.apply_L(system.rho)) / system.length


@dataclass
class ModifiedSolution:
    """Density of the representation ``u = u^i + S_k (W - 2pi/ln k) phi``."""

    k: float
    d: np.ndarray
    grids: list
    phi: np.ndarray  # psi-coordinates
    effective: np.ndarray  # (W - 2pi/ln k I) phi
    matrix: np.ndarray

    def total_field(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        us = single_layer(self.grids, self.effective, self.k, points)
        return us + incident(self.k, self.d, points.reshape(-1, 2)).reshape(points.shape[:-1])

    def as_density(self) -> DensitySolution:
        return DensitySolution(self.k, self.d, self.grids, self.effective)


def modified_solve(cracks: CrackSet, n: int, k: float, d) -> ModifiedSolution:
    """Solve ``S_k (W - 2pi/ln k I) phi = -u^i`` for ``0 < k < 1``."""
    if not 0 < k < 1:
        raise ValueError("modified representation requires 0 < k < 1")
    grids = [build_grid(c, n) for c in cracks]
    sk = assemble_matrix(grids, k, cracks.d_min)
    arcw, weights = _stack(grids)
    op = w_matrix(weights, arcw) - (2 * np.pi / np.log(k)) * np.eye(len(arcw))
    m = sk @ op
    d = np.asarray(d, dtype=float)
    pts = np.concatenate([g.points for g in grids])
    phi = LUFactorization(m).solve(-incident(k, d, pts))
    return ModifiedSolution(k, d, grids, phi, op @ phi, m)


def plain_matrix(cracks: CrackSet, n: int, k: float) -> np.ndarray:
    return ForwardSystem(cracks, n, k).matrix


def asymptotic_check(cracks: CrackSet, ks, points, n: int = 64, d=(1.0, 0.0)):
    """Table of ``(k, e(k))`` with ``e(k) = max |(-ln k / 2pi) u(x, k) - v(x)|``."""
    ks = [float(k) for k in ks]
    if any(k >= 0.1 for k in ks):
        raise ValueError("asymptotic check expects k < 0.1")
    prof = solve_profile(cracks, n)
    v = eval_v(prof, points)
    rows = []
    for k in ks:
        u = modified_solve(cracks, n, k, d).total_field(points)
        rows.append((k, float(np.abs(-np.log(k) / (2 * np.pi) * u - v).max())))
    return rows
