"""Frechet derivative of the crack-to-far-field map.

For a displacement field ``h`` the derivative is assembled as the sum of

* ``v1`` -- far field of the moved single-layer sources,
* ``v2 = -S_k^{-1} S_k' psi`` pushed to the far field,
* ``v3 = S_k^{-1} (h . grad(-u^i))`` pushed to the far field,

where ``S_k'`` is the derivative of the collocation matrix.  Every block of
``S_k'`` has the form ``K_x * (hx_i - hx_j) + K_y * (hy_i - hy_j)`` with
``K = dPhi/dr / r * (x_i - x_j)``; on a crack's own block the log split of
the forward solver is kept and the diagonal carries the limit
``-(1/4pi) z'.h' / |z'|^2`` of the smooth part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .forward import (DensitySolution, ForwardSystem, folded_log_weights, incident, observation_directions,
                      self_geometry)
from .geometry import Crack, CrackSet
from .numerics import hankel1, kernel_parts


@dataclass(frozen=True)
class Displacement:
    """Displacement ``h(s)`` of one crack and its derivative ``h'(s)``."""

    h: Callable
    dh: Callable

    def __call__(self, s):
        return np.asarray(self.h(np.asarray(s, dtype=float)), dtype=float)

    def scaled(self, alpha: float) -> "Displacement":
        return Displacement(lambda s: alpha * self.h(s), lambda s: alpha * self.dh(s))


def _pair(a, b):
    return np.stack(np.broadcast_arrays(a, b), axis=-1)


def vertical_mode(i: int) -> Displacement:
    """``(0, T_i(s))``."""
    c = np.zeros(i + 1)
    c[i] = 1.0
    dc = npcheb.chebder(c) if i > 0 else np.zeros(1)
    return Displacement(lambda s: _pair(0.0 * s, npcheb.chebval(s, c)),
                        lambda s: _pair(0.0 * s, npcheb.chebval(s, dc)))


def horizontal_mode(i: int) -> Displacement:
    """``(s^i, 0)`` for ``i`` in ``{0, 1}``."""
    if i == 0:
        return Displacement(lambda s: _pair(1.0 + 0.0 * s, 0.0 * s), lambda s: _pair(0.0 * s, 0.0 * s))
    if i == 1:
        return Displacement(lambda s: _pair(s, 0.0 * s), lambda s: _pair(1.0 + 0.0 * s, 0.0 * s))
    raise ValueError("horizontal modes are (1, 0) and (s, 0)")


def tangential_field(crack: Crack, weight: Callable | None = None,
                     dweight: Callable | None = None) -> Displacement:
    """``w(s) z'(s)``; ``weight`` defaults to 1 and needs ``dweight`` when given.

    With ``w = 1`` the tips slide along the tangent, which changes the crack
    and hence the far field.  A weight vanishing at ``s = +-1`` only
    reparametrizes the curve, so its derivative is zero.
    """
    if weight is None:
        return Displacement(crack.deriv, crack.deriv2)
    if dweight is None:
        raise ValueError("dweight is required with a custom weight")

    def h(s):
        return weight(s)[..., None] * crack.deriv(s)

    def dh(s):
        return dweight(s)[..., None] * crack.deriv(s) + weight(s)[..., None] * crack.deriv2(s)

    return Displacement(h, dh)


def reparametrization_field(crack: Crack) -> Displacement:
    """Tangential field ``(1 - s^2) z'(s)`` that keeps both tips fixed."""
    return tangential_field(crack, lambda s: 1 - s**2, lambda s: -2 * s)


def normal_field(crack: Crack) -> Displacement:
    """``|z'| nu = (-y', x')``, the normal field with the tangent's magnitude."""
    def h(s):
        d = crack.deriv(s)
        return _pair(-d[..., 1], d[..., 0])

    def dh(s):
        d = crack.deriv2(s)
        return _pair(-d[..., 1], d[..., 0])

    return Displacement(h, dh)


# A perturbation is a sequence with one Displacement (or None) per crack.
Perturbation = Sequence


class PerturbedCrack(Crack):
    """``z(s) + eps h(s)``."""

    def __init__(self, base: Crack, disp: Displacement, eps: float):
        self.base = base
        self.disp = disp
        self.eps = eps

    def _xy(self, s):
        p = self.base.point(s) + self.eps * self.disp(s)
        return p[..., 0], p[..., 1]

    def _dxy(self, s):
        p = self.base.deriv(s) + self.eps * np.asarray(self.disp.dh(s))
        return p[..., 0], p[..., 1]


def perturb(cracks: CrackSet, h: Perturbation, eps: float) -> CrackSet:
    out = [c if d is None else PerturbedCrack(c, d, eps) for c, d in zip(cracks, h)]
    return CrackSet(out, cracks.d_min)


def _nodes_of(system: ForwardSystem, h: Perturbation):
    """Stack ``h`` and ``h'`` at the grid nodes, shape (N, 2) each."""
    vals, ders = [], []
    for g, d in zip(system.grids, h):
        if d is None:
            vals.append(np.zeros((g.n, 2)))
            ders.append(np.zeros((g.n, 2)))
        else:
            vals.append(np.asarray(d(g.s), dtype=float).reshape(g.n, 2))
            ders.append(np.asarray(d.dh(g.s), dtype=float).reshape(g.n, 2))
    return np.concatenate(vals), np.concatenate(ders)


def dZ_trace(system: ForwardSystem, h: Perturbation, grad) -> np.ndarray:
    """``h(s_j) . grad f(z(s_j))`` at all nodes; ``grad`` is (N, 2) or callable."""
    hv, _ = _nodes_of(system, h)
    g = grad(system.points) if callable(grad) else np.asarray(grad)
    return (hv * g).sum(-1)


def incident_gradient(k: float, d, points) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    return 1j * k * incident(k, d, points)[:, None] * d[None, :]


class DerivativeKernels:
    """Geometry-dependent factors of ``S_k'`` for one :class:`ForwardSystem`."""

    def __init__(self, system: ForwardSystem):
        self.system = system
        k = system.k
        n = system.n
        grids = system.grids
        size = system.size
        kx = np.zeros((size, size), dtype=complex)
        ky = np.zeros((size, size), dtype=complex)
        diag = np.zeros(size)
        for a, ga in enumerate(grids):
            ra = slice(a * n, (a + 1) * n)
            for b, gb in enumerate(grids):
                rb = slice(b * n, (b + 1) * n)
                if a == b:
                    fac, dx = self._self_factor(ga, k)
                    diag[ra] = -1.0 / (2 * n * ga.speed**2)
                else:
                    dx = ga.points[:, None, :] - gb.points[None, :, :]
                    r = np.sqrt((dx**2).sum(-1))
                    _, h1 = hankel1(k * r)
                    fac = gb.spacing * (-0.25j * k) * h1 / r
                kx[ra, rb] = fac * dx[..., 0]
                ky[ra, rb] = fac * dx[..., 1]
        self.kx = kx
        self.ky = ky
        self.diag = diag
        self.dz = np.concatenate([g.dz for g in grids])

    @staticmethod
    def _self_factor(grid, k):
        geo = self_geometry(grid.points, grid.s, grid.speed, grid)
        off = ~geo.coincide
        r = np.where(off, geo.r, 1.0)
        _, j1, _, g1 = kernel_parts(k * r)
        da = k / (8 * np.pi) * j1 / r
        db = (-(k / 2) * g1 / r + k / (4 * np.pi) * (j1 / r) * (np.log(k) + 0.5 * geo.logq4)
              - 1.0 / (4 * np.pi * r * r))
        fac = da * folded_log_weights(grid.n) + (2 * np.pi / grid.n) * db
        fac = np.where(off, fac, 0.0)
        return fac, geo.diff

    def apply(self, hv, dhv, psi):
        """``S_k' psi`` for node values ``hv``/``dhv`` of shape (N, 2, C)."""
        psi = np.asarray(psi)
        out = self.diag[:, None] * (self.dz[:, :, None] * dhv).sum(1) * psi[:, None]
        for comp, kk in ((0, self.kx), (1, self.ky)):
            hc = hv[:, comp]
            out += hc * (kk @ psi)[:, None] - kk @ (hc * psi[:, None])
        return out

    def matrix(self, hv, dhv) -> np.ndarray:
        hx = hv[:, 0]
        hy = hv[:, 1]
        m = self.kx * (hx[:, None] - hx[None, :]) + self.ky * (hy[:, None] - hy[None, :])
        m[np.diag_indices_from(m)] += self.diag * (self.dz * dhv).sum(-1)
        return m


def _kernels(system: ForwardSystem) -> DerivativeKernels:
    cached = getattr(system, "_derivative_kernels", None)
    if cached is None:
        cached = DerivativeKernels(system)
        system._derivative_kernels = cached
    return cached


def dS_assemble(system: ForwardSystem, h: Perturbation) -> np.ndarray:
    """Matrix ``S_k'`` for the perturbation ``h`` (one Displacement or None per crack)."""
    hv, dhv = _nodes_of(system, h)
    return _kernels(system).matrix(hv, dhv)


def _frechet_nodes(sol: DensitySolution, hv, dhv, directions):
    """Far-field derivative for node displacements of shape (N, 2, C)."""
    system = sol.system
    if system is None:
        raise ValueError("density solution does not retain its forward system")
    k = sol.k
    directions = np.asarray(directions, dtype=float)
    emat = system.farfield_matrix(directions)
    psi = sol.psi[:, None]
    # moving a source by h multiplies exp(-i k xhat.y) by -i k xhat.h
    v1 = -1j * k * (directions[:, 0, None] * (emat @ (hv[:, 0] * psi))
                    + directions[:, 1, None] * (emat @ (hv[:, 1] * psi)))
    ui_grad = incident_gradient(k, sol.d, system.points)
    dui = (hv * ui_grad[:, :, None]).sum(1)
    rhs = -_kernels(system).apply(hv, dhv, sol.psi) - dui
    return v1 + emat @ system.solve_rhs(rhs)


def frechet_farfield(sol: DensitySolution, h: Perturbation, directions=None) -> np.ndarray:
    """Directional derivative of the far field at ``directions`` along ``h``."""
    if directions is None:
        directions = observation_directions()
    if sol.system is None:
        raise ValueError("density solution does not retain its forward system")
    hv, dhv = _nodes_of(sol.system, h)
    return _frechet_nodes(sol, hv[..., None], dhv[..., None], directions)[:, 0]


@dataclass
class JacobianBlock:
    """Complex Jacobian with column labels ``(crack, kind, index)``."""

    matrix: np.ndarray
    labels: list = field(default_factory=list)

    @property
    def shape(self):
        return self.matrix.shape

    def columns(self, kind: str) -> np.ndarray:
        return np.array([lab[1] == kind for lab in self.labels], dtype=bool)


def basis_labels(orders, horizontal) -> list:
    labels = []
    for j, (p, hz) in enumerate(zip(orders, horizontal)):
        if p is not None and p >= 0:
            labels += [(j, "vertical", i) for i in range(p + 1)]
        if hz:
            labels += [(j, "horizontal", 0), (j, "horizontal", 1)]
    return labels


def basis_displacement(label) -> Displacement:
    _, kind, i = label
    return vertical_mode(i) if kind == "vertical" else horizontal_mode(i)


def _broadcast(value, count):
    if isinstance(value, (list, tuple, np.ndarray)):
        if len(value) != count:
            raise ValueError("per-crack setting has the wrong length")
        return list(value)
    return [value] * count


def jacobian(sol: DensitySolution, p, horizontal=True, directions=None) -> JacobianBlock:
    """Columns ``F'(h)`` over the Chebyshev vertical and affine horizontal basis.

    Column order per crack: ``(0, T_0) .. (0, T_p)`` then ``(1, 0), (s, 0)``.
    """
    if directions is None:
        directions = observation_directions()
    ncr = len(sol.grids)
    labels = basis_labels(_broadcast(p, ncr), _broadcast(horizontal, ncr))
    ndir = len(directions)
    if not labels:
        return JacobianBlock(np.zeros((ndir, 0), dtype=complex), [])
    size = sol.psi.shape[0]
    n = sol.grids[0].n
    hv = np.zeros((size, 2, len(labels)))
    dhv = np.zeros((size, 2, len(labels)))
    for c, lab in enumerate(labels):
        j = lab[0]
        g = sol.grids[j]
        disp = basis_displacement(lab)
        hv[j * n:(j + 1) * n, :, c] = disp(g.s)
        dhv[j * n:(j + 1) * n, :, c] = disp.dh(g.s)
    return JacobianBlock(_frechet_nodes(sol, hv, dhv, directions), labels)


def fd_jacobian(cracks: CrackSet, n: int, k: float, d, p, horizontal=True, eps: float = 1e-5,
                directions=None) -> JacobianBlock:
    """Central-difference Jacobian of the forward map over the same basis."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if directions is None:
        directions = observation_directions()
    ncr = len(cracks)
    labels = basis_labels(_broadcast(p, ncr), _broadcast(horizontal, ncr))
    cols = []
    for idx, lab in enumerate(labels):
        h = [None] * ncr
        h[lab[0]] = basis_displacement(lab)
        try:
            fp = ForwardSystem(perturb(cracks, h, eps), n, k).solve(d)
            fm = ForwardSystem(perturb(cracks, h, -eps), n, k).solve(d)
        except Exception as exc:
            raise RuntimeError(f"forward solve failed for basis column {idx} {lab}") from exc
        emat_p = ForwardSystem.farfield_matrix(fp.system, directions)
        emat_m = ForwardSystem.farfield_matrix(fm.system, directions)
        cols.append((emat_p @ fp.psi - emat_m @ fm.psi) / (2 * eps))
    mat = np.stack(cols, axis=1) if cols else np.zeros((len(directions), 0), dtype=complex)
    return JacobianBlock(mat, labels)


def farfield_map(cracks: CrackSet, n: int, k: float, d, directions=None) -> np.ndarray:
    if directions is None:
        directions = observation_directions()
    sol = ForwardSystem(cracks, n, k).solve(d)
    return sol.system.farfield_matrix(directions) @ sol.psi
