"""Special functions, log-kernel quadrature weights and small dense solvers.

Bessel functions of order 0 and 1 are evaluated with ascending series for
``x <= 12`` and with the Hankel asymptotic expansion beyond.  The series
branch keeps the logarithmic part of ``Y0``/``Y1`` separate so that the
kernel-splitting functions

    G(z)  = (i/4) H0(z) + (1/2pi) J0(z) ln z
    G1(z) = (i/4) H1(z) + (1/2pi) J1(z) ln z - 1/(2pi z)

can be evaluated at small ``z`` without cancellation.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
import scipy.linalg

EULER_GAMMA = 0.5772156649015329
# Constant term in the small-argument law Phi_k = Phi_0 - ln(k)/(2pi) + C.
C_LOG = complex(math.log(2.0) / (2 * math.pi) - EULER_GAMMA / (2 * math.pi), 0.25)

SERIES_CUTOFF = 12.0
_NTERMS = 48


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when an LU factorization hits a pivot below tolerance."""

    def __init__(self, pivot: float, index: int):
        super().__init__(f"singular matrix: pivot {pivot:.3e} at index {index}")
        self.pivot = pivot
        self.index = index


def _series_tables():
    m = np.arange(_NTERMS)
    fact = np.array([math.factorial(int(i)) for i in m], dtype=float)
    digamma = -EULER_GAMMA + np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, _NTERMS + 1))])
    sign = (-1.0) ** m
    c_j0 = sign / fact**2
    c_j1 = sign / (fact * fact * (m + 1))
    # Y0 = (2/pi) ln(x/2) J0 + sum c_y0[m] (x/2)^(2m)
    c_y0 = -(2 / np.pi) * sign * digamma[:_NTERMS] / fact**2
    # Y1 = -2/(pi x) + (2/pi) ln(x/2) J1 + sum c_y1[m] (x/2)^(2m+1)
    c_y1 = -(1 / np.pi) * sign * (digamma[:_NTERMS] + digamma[1 : _NTERMS + 1]) / (fact * fact * (m + 1))
    return c_j0, c_j1, c_y0, c_y1


_C_J0, _C_J1, _C_Y0, _C_Y1 = _series_tables()


def _horner(coef, w):
    out = np.full_like(w, coef[-1])
    for c in coef[-2::-1]:
        out = out * w + c
    return out


def _series(x):
    """Return J0, J1 and the log-free parts of Y0, Y1 for small x."""
    h = 0.5 * x
    w = h * h
    j0 = _horner(_C_J0, w)
    j1 = h * _horner(_C_J1, w)
    y0s = _horner(_C_Y0, w)
    y1s = h * _horner(_C_Y1, w)
    return j0, j1, y0s, y1s


def _asymptotic(x):
    """Hankel asymptotic expansion, truncated at the smallest term."""
    out = []
    for nu in (0, 1):
        mu = 4.0 * nu * nu
        p = np.ones_like(x)
        q = np.zeros_like(x)
        term = np.ones_like(x)
        active = np.ones(x.shape, dtype=bool)
        last = np.full_like(x, np.inf)
        for kk in range(1, 60):
            new = term * (mu - (2 * kk - 1) ** 2) / (kk * 8.0 * x)
            mag = np.abs(new)
            active &= mag < last
            if not active.any():
                break
            last = np.where(active, mag, last)
            term = np.where(active, new, term)
            contrib = np.where(active, new, 0.0)
            # terms alternate between Q (odd k) and P (even k) with sign (-1)^floor(k/2)
            sgn = -1.0 if (kk // 2) % 2 else 1.0
            if kk % 2:
                q = q + sgn * contrib
            else:
                p = p + sgn * contrib
        chi = x - (2 * nu + 1) * np.pi / 4
        amp = np.sqrt(2.0 / (np.pi * x))
        c, s = np.cos(chi), np.sin(chi)
        out.append(amp * (p * c - q * s))
        out.append(amp * (p * s + q * c))
    j0, y0, j1, y1 = out
    return j0, j1, y0, y1


def bessel(x):
    """Return ``(J0, J1, Y0, Y1)`` at real ``x``.

    ``J`` values are defined for ``x >= 0``; ``Y`` values require ``x > 0``
    and are ``nan`` at zero.  Raises ``ValueError`` for negative input.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel: argument must be non-negative")
    shape = x.shape
    x = x.ravel()
    j0 = np.empty_like(x)
    j1 = np.empty_like(x)
    y0 = np.empty_like(x)
    y1 = np.empty_like(x)
    small = x <= SERIES_CUTOFF
    if small.any():
        xs = x[small]
        a0, a1, s0, s1 = _series(xs)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.log(0.5 * xs)
            y0[small] = (2 / np.pi) * lg * a0 + s0
            y1[small] = -2 / (np.pi * xs) + (2 / np.pi) * lg * a1 + s1
        j0[small] = a0
        j1[small] = a1
        zero = xs == 0
        if zero.any():
            idx = np.flatnonzero(small)[zero]
            y0[idx] = np.nan
            y1[idx] = np.nan
    big = ~small
    if big.any():
        j0[big], j1[big], y0[big], y1[big] = _asymptotic(x[big])
    return tuple(a.reshape(shape) for a in (j0, j1, y0, y1))


def hankel1(x):
    """Return ``(H0^(1)(x), H1^(1)(x))`` for ``x > 0``."""
    j0, j1, y0, y1 = bessel(x)
    return j0 + 1j * y0, j1 + 1j * y1


def kernel_parts(x):
    """Return ``(J0, J1, G, G1)`` with the smooth splitting functions G, G1.

    At ``x = 0`` the limits ``G(0) = C`` and ``G1(0) = 0`` are returned.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("kernel_parts: argument must be non-negative")
    shape = x.shape
    x = x.ravel()
    j0 = np.empty_like(x)
    j1 = np.empty_like(x)
    g = np.empty(x.shape, dtype=complex)
    g1 = np.empty(x.shape, dtype=complex)
    small = x <= SERIES_CUTOFF
    ln2 = math.log(2.0) / (2 * math.pi)
    if small.any():
        a0, a1, s0, s1 = _series(x[small])
        j0[small] = a0
        j1[small] = a1
        g[small] = (0.25j + ln2) * a0 - 0.25 * s0
        g1[small] = (0.25j + ln2) * a1 - 0.25 * s1
    big = ~small
    if big.any():
        xb = x[big]
        b0, b1, z0, z1 = _asymptotic(xb)
        j0[big] = b0
        j1[big] = b1
        lg = np.log(xb) / (2 * np.pi)
        g[big] = 0.25j * (b0 + 1j * z0) + lg * b0
        g1[big] = 0.25j * (b1 + 1j * z1) + lg * b1 - 1 / (2 * np.pi * xb)
    return j0.reshape(shape), j1.reshape(shape), g.reshape(shape), g1.reshape(shape)


def log_quad_weights(n: int, t) -> np.ndarray:
    """Trigonometric weights for the kernel ln(4 sin^2((t - tau)/2)).

    The quadrature nodes are the 2n shifted points ``tau_j = (2j-1)pi/(2n)``
    on ``[0, 2pi)``.  For a scalar ``t`` the result has shape ``(2n,)``; for
    an array of targets it has shape ``t.shape + (2n,)``.
    """
    if n < 2:
        raise ValueError("log_quad_weights: n must be >= 2")
    tau = (2 * np.arange(1, 2 * n + 1) - 1) * np.pi / (2 * n)
    t = np.asarray(t, dtype=float)
    diff = t[..., None] - tau
    m = np.arange(1, n)
    acc = np.cos(diff[..., None] * m) @ (2.0 / m)
    acc = acc + np.cos(n * diff) / n
    return -(np.pi / n) * acc


class LUFactorization:
    """Reusable LU factorization of a dense (complex) square matrix."""

    def __init__(self, matrix, rtol: float = 1e-14):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"matrix must be square, got shape {matrix.shape}")
        self.shape = matrix.shape
        scale = np.abs(matrix).max() if matrix.size else 0.0
        with warnings.catch_warnings():
            # exact zero pivots are reported below as SingularMatrixError
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(matrix, check_finite=True)
        diag = np.abs(np.diag(lu))
        i = int(np.argmin(diag)) if diag.size else 0
        if diag.size and (scale == 0.0 or diag[i] <= rtol * scale):
            raise SingularMatrixError(float(diag[i]), i)
        self._lu = (lu, piv)

    def solve(self, rhs):
        return scipy.linalg.lu_solve(self._lu, rhs)


def complex_dense_solve(matrix, rhs):
    """Solve ``matrix @ x = rhs`` (one or several right-hand sides)."""
    return LUFactorization(matrix).solve(rhs)


def tikhonov_lstsq(a, b, lam: float = 0.0) -> np.ndarray:
    """Minimize ``||a x - b||^2 + lam ||x||^2`` for real ``a``, ``b``.

    ``lam > 0`` uses the normal equations with ``lam`` on the diagonal;
    ``lam == 0`` returns the minimum-norm least-squares solution.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("tikhonov_lstsq: a must be a non-empty 2-D array")
    if lam < 0:
        raise ValueError("tikhonov_lstsq: lam must be non-negative")
    if lam == 0:
        return np.linalg.lstsq(a, b, rcond=None)[0]
    ata = a.T @ a
    ata[np.diag_indices_from(ata)] += lam
    return scipy.linalg.solve(ata, a.T @ b, assume_a="pos")
