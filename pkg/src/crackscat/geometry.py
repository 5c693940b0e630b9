"""Parametric cracks, Nystrom grids and admissibility checks.

Every crack is a map ``z: [-1, 1] -> R^2``.  Three concrete kinds exist:

* :class:`TrigCrack` -- graph over an affine x-axis with a trigonometric
  y-profile on the half-integer frequency lattice ``m * pi/2``; used for
  the synthetic "true" cracks.
* :class:`ChebCrack` -- affine x-axis with a Chebyshev y-profile; the
  reconstruction unknowns.
* :class:`ParametricCrack` -- any regular injective arc given by callables.

Grids use the cosine substitution ``s = cos t`` with nodes
``t_j = (2j - 1) pi / (2n)``, so the tips ``t = 0, pi`` are never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb

REGULARITY_SAMPLES = 512
DERIV_TOL = 1e-12


class GeometryError(ValueError):
    """Invalid or degenerate crack geometry."""


def _as_param(s):
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) > 1.0 + 1e-14):
        raise GeometryError("parameter s must lie in [-1, 1]")
    return s


class Crack:
    """Base interface: vectorized point and derivative evaluation."""

    def _xy(self, s):
        raise NotImplementedError

    def _dxy(self, s):
        raise NotImplementedError

    def _ddxy(self, s):
        raise NotImplementedError

    def point(self, s):
        s = _as_param(s)
        x, y = self._xy(s)
        return np.stack(np.broadcast_arrays(x, y), axis=-1)

    def deriv(self, s):
        s = _as_param(s)
        x, y = self._dxy(s)
        return np.stack(np.broadcast_arrays(x, y), axis=-1)

    def deriv2(self, s):
        s = _as_param(s)
        x, y = self._ddxy(s)
        return np.stack(np.broadcast_arrays(x, y), axis=-1)

    def translated(self, shift) -> "Crack":
        raise NotImplementedError


@dataclass(frozen=True)
class TrigCrack(Crack):
    """``x = ax0 + ax1 s``, ``y = ay0 + sum coef * kind(m pi s / 2)``."""

    ax0: float
    ax1: float
    terms: tuple = ()
    ay0: float = 0.0

    def __post_init__(self):
        terms = tuple((str(kind), int(m), float(c)) for kind, m, c in self.terms)
        for kind, m, _ in terms:
            if kind not in ("cos", "sin"):
                raise GeometryError(f"unknown term kind {kind!r}")
            if m < 1:
                raise GeometryError("frequency index m must be a positive integer")
        object.__setattr__(self, "terms", terms)

    def _xy(self, s):
        y = np.full_like(s, self.ay0)
        for kind, m, c in self.terms:
            w = m * np.pi / 2
            y = y + c * (np.cos(w * s) if kind == "cos" else np.sin(w * s))
        return self.ax0 + self.ax1 * s, y

    def _dxy(self, s):
        y = np.zeros_like(s)
        for kind, m, c in self.terms:
            w = m * np.pi / 2
            y = y + (-c * w * np.sin(w * s) if kind == "cos" else c * w * np.cos(w * s))
        return np.full_like(s, self.ax1), y

    def _ddxy(self, s):
        y = np.zeros_like(s)
        for kind, m, c in self.terms:
            w = m * np.pi / 2
            y = y - c * w * w * (np.cos(w * s) if kind == "cos" else np.sin(w * s))
        return np.zeros_like(s), y

    def translated(self, shift):
        return TrigCrack(self.ax0 + shift[0], self.ax1, self.terms, self.ay0 + shift[1])


@dataclass(frozen=True)
class ChebCrack(Crack):
    """``x = d0 + d1 s``, ``y = sum_i c_i T_i(s)``."""

    d0: float
    d1: float
    c: tuple = (0.0,)

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.c))
        if len(c) == 0:
            raise GeometryError("ChebCrack needs at least one coefficient")
        object.__setattr__(self, "c", c)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def _xy(self, s):
        return self.d0 + self.d1 * s, npcheb.chebval(s, self.c)

    def _dxy(self, s):
        return np.full_like(s, self.d1), npcheb.chebval(s, npcheb.chebder(self.c)) if len(self.c) > 1 else np.zeros_like(s)

    def _ddxy(self, s):
        dd = npcheb.chebder(self.c, 2) if len(self.c) > 2 else [0.0]
        return np.zeros_like(s), npcheb.chebval(s, dd)

    def padded(self, p: int) -> "ChebCrack":
        """Same curve with coefficients zero-padded to order ``p``."""
        if p < self.order:
            raise ValueError("cannot pad to a lower order")
        return ChebCrack(self.d0, self.d1, self.c + (0.0,) * (p - self.order))

    def translated(self, shift):
        c = list(self.c)
        c[0] += shift[1]
        return ChebCrack(self.d0 + shift[0], self.d1, tuple(c))

    @property
    def params(self) -> np.ndarray:
        return np.array((self.d0, self.d1) + self.c)


@dataclass(frozen=True)
class ParametricCrack(Crack):
    """Arbitrary arc from vectorized callables ``z``, ``dz`` and ``ddz``.

    Each callable maps an array of ``s`` to an array of shape ``s.shape + (2,)``.
    """

    z: Callable
    dz: Callable
    ddz: Callable | None = None

    def _xy(self, s):
        p = np.asarray(self.z(s))
        return p[..., 0], p[..., 1]

    def _dxy(self, s):
        p = np.asarray(self.dz(s))
        return p[..., 0], p[..., 1]

    def _ddxy(self, s):
        if self.ddz is None:
            raise GeometryError("second derivative not supplied")
        p = np.asarray(self.ddz(s))
        return p[..., 0], p[..., 1]

    def translated(self, shift):
        shift = np.asarray(shift, dtype=float)
        return ParametricCrack(lambda s: self.z(s) + shift, self.dz, self.ddz)


def eval_crack(crack: Crack, s) -> np.ndarray:
    """Point(s) on ``crack`` at parameter ``s`` in ``[-1, 1]``."""
    return crack.point(s)


def eval_tangent_normal(crack: Crack, s):
    """Unit tangent and unit normal (tangent rotated by +pi/2)."""
    d = crack.deriv(s)
    speed = np.linalg.norm(d, axis=-1, keepdims=True)
    if np.any(speed < DERIV_TOL):
        raise GeometryError("degenerate curve: |z'(s)| below tolerance")
    tangent = d / speed
    normal = np.stack([-tangent[..., 1], tangent[..., 0]], axis=-1)
    return tangent, normal


@dataclass(frozen=True)
class NystromGrid:
    """Cosine-substituted collocation grid on one crack."""

    n: int
    t: np.ndarray
    s: np.ndarray
    points: np.ndarray
    dz: np.ndarray
    speed: np.ndarray
    arcw: np.ndarray
    crack: Crack | None = None

    @property
    def spacing(self) -> float:
        return np.pi / self.n


def grid_nodes(n: int) -> np.ndarray:
    return (2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n)


def build_grid(crack: Crack, n: int) -> NystromGrid:
    if n < 2:
        raise ValueError("build_grid: n must be >= 2")
    t = grid_nodes(n)
    s = np.cos(t)
    pts = crack.point(s)
    dz = crack.deriv(s)
    speed = np.linalg.norm(dz, axis=-1)
    if np.any(speed < DERIV_TOL):
        raise GeometryError("degenerate curve: |z'| vanishes at a grid node")
    return NystromGrid(n, t, s, pts, dz, speed, speed * np.sin(t), crack)


@dataclass
class CrackSet:
    """Collection of pairwise separated cracks."""

    cracks: list
    d_min: float = 0.05

    def __post_init__(self):
        self.cracks = list(self.cracks)
        if self.d_min <= 0:
            raise GeometryError("d_min must be positive")

    def __len__(self):
        return len(self.cracks)

    def __iter__(self):
        return iter(self.cracks)

    def __getitem__(self, i):
        return self.cracks[i]

    def grids(self, n: int) -> list[NystromGrid]:
        return [build_grid(c, n) for c in self.cracks]

    def translated(self, shift) -> "CrackSet":
        return CrackSet([c.translated(shift) for c in self.cracks], self.d_min)


def fejer_weights(n: int) -> np.ndarray:
    """Fejer's first rule on the grid nodes ``s_j = cos t_j`` for integrals over ``[-1, 1]``."""
    t = grid_nodes(n)
    k = np.arange(1, n // 2 + 1)
    return (2.0 / n) * (1.0 - 2.0 * (np.cos(2 * np.outer(t, k)) / (4 * k * k - 1)).sum(axis=1))


def total_length(cracks: CrackSet | Sequence[Crack], n: int) -> float:
    """Total arc length, ``sum_j w_j |z'(s_j)|`` with Fejer weights per crack.

    The plain rectangle sum ``(pi/n) sum_j m_j`` only converges like
    ``1/n^2`` because ``|z'(cos t)| sin t`` has a kink at the tips.
    """
    w = fejer_weights(n)
    return float(sum(w @ g.speed for g in (build_grid(c, n) for c in cracks)))


def sample_polyline(crack: Crack, m: int = REGULARITY_SAMPLES, eps: float = 1e-6) -> np.ndarray:
    return crack.point(np.linspace(-1 + eps, 1 - eps, m))


def polyline_distance(a: np.ndarray, b: np.ndarray) -> float:
    diff = a[:, None, :] - b[None, :, :]
    return float(np.sqrt((diff**2).sum(-1).min()))


@dataclass
class ValidityReport:
    ok: bool = True
    violations: list = field(default_factory=list)

    def add(self, kind: str, detail: str):
        self.ok = False
        self.violations.append((kind, detail))

    def __bool__(self):
        return self.ok


def validity_check(cracks: CrackSet, reference: Sequence[Crack] | None = None,
                   tol: float = DERIV_TOL) -> ValidityReport:
    """Report separation, regularity and axis-orientation violations.

    ``reference`` (typically the initial guess) enables the ``d1`` sign-flip
    test for :class:`ChebCrack` entries.
    """
    report = ValidityReport()
    s = np.linspace(-1 + 1e-6, 1 - 1e-6, REGULARITY_SAMPLES)
    lines = []
    for i, c in enumerate(cracks):
        if isinstance(c, ChebCrack) and c.d1 == 0:
            report.add("degenerate-axis", f"crack {i}: d1 = 0")
        pts = c.point(s)
        if not np.all(np.isfinite(pts)):
            report.add("non-finite", f"crack {i}: non-finite points")
            lines.append(None)
            continue
        speed = np.linalg.norm(c.deriv(s), axis=-1)
        if speed.min() < tol:
            report.add("degenerate-derivative", f"crack {i}: min |z'| = {speed.min():.3e}")
        lines.append(pts)
    if reference is not None:
        for i, (c, r) in enumerate(zip(cracks, reference)):
            if isinstance(c, ChebCrack) and isinstance(r, ChebCrack) and np.sign(c.d1) != np.sign(r.d1):
                report.add("axis-flip", f"crack {i}: d1 changed sign ({r.d1:+.3g} -> {c.d1:+.3g})")
    sub = lines
    for i in range(len(sub)):
        for j in range(i + 1, len(sub)):
            if sub[i] is None or sub[j] is None:
                continue
            dist = polyline_distance(sub[i], sub[j])
            if dist < cracks.d_min:
                report.add("separation", f"cracks {i},{j}: distance {dist:.3e} < {cracks.d_min}")
    return report
