"""Quadrature rules shared by the models: exp-sinh, Filon-type rule for
``exp(-i w k^2)`` oscillations, and log-log fitting."""

from __future__ import annotations

import math

import numpy as np

from .specfun import EIPI4, SQRT_PI, faddeeva

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


class QuadratureError(ArithmeticError):
    """Raised when a quadrature fails to reach its tolerance."""


def exp_sinh(f, tol=1e-13, max_level=10):
    """Integrate a vectorised ``f`` over ``[0, inf)`` by the exp-sinh rule.

    The substitution ``x = exp(pi/2 sinh t)`` is a member of the tanh-sinh
    family; the trapezoid step is halved until successive estimates agree.
    """

    def nodes(h, tmax=4.5):
        t = np.arange(-tmax, tmax + 0.5 * h, h)
        u = 0.5 * np.pi * np.sinh(t)
        x = np.exp(u)
        w = x * 0.5 * np.pi * np.cosh(t) * h
        keep = (x > 1e-300) & (x < 1e300) & (w > 0)
        return x[keep], w[keep]

    h = 0.5
    x, w = nodes(h)
    est = np.sum(f(x) * w)
    for _ in range(max_level):
        h *= 0.5
        x, w = nodes(h)
        new = np.sum(f(x) * w)
        if abs(new - est) <= tol * max(1.0, abs(new)):
            return new
        est = new
    raise QuadratureError(f"exp-sinh did not converge (last change {abs(new - est):.3e})")


def _int_gauss(omega, t):
    """``int_0^t exp(-i omega k^2) dk`` (zero-safe, vectorised in ``t``)."""
    sw = math.sqrt(omega)
    z = EIPI4 * sw * t
    erfc = np.exp(-1j * omega * t * t) * faddeeva(1j * z)
    return 0.5 * SQRT_PI / sw * np.conj(EIPI4), erfc


def chirp_weights(k, omega):
    """Weights ``w`` such that ``sum(w * f(k)) ~ int f(k) exp(-i omega k^2) dk``.

    ``f`` is taken piecewise linear on the (strictly increasing) grid ``k``
    and each panel is integrated exactly against the chirp; panels with a
    small phase excursion fall back to 8-point Gauss-Legendre.
    """
    k = np.asarray(k, dtype=float)
    a, b = k[:-1], k[1:]
    h = b - a
    w = np.zeros(k.shape, dtype=complex)
    small = omega * (b * b - a * a) < 0.2
    m0 = np.empty(a.shape, dtype=complex)
    m1 = np.empty(a.shape, dtype=complex)  # int (k - a) e^{..} dk
    if np.any(small):
        aa, hh = a[small], h[small]
        xs = aa[:, None] + 0.5 * hh[:, None] * (_GL_X[None, :] + 1.0)
        ph = np.exp(-1j * omega * xs * xs) * (0.5 * hh[:, None] * _GL_W[None, :])
        m0[small] = ph.sum(axis=1)
        m1[small] = (ph * (xs - aa[:, None])).sum(axis=1)
    big = ~small
    if np.any(big):
        aa, bb = a[big], b[big]
        pref, ea = _int_gauss(omega, aa)
        _, eb = _int_gauss(omega, bb)
        m0b = pref * (ea - eb)
        mk = (np.exp(-1j * omega * aa * aa) - np.exp(-1j * omega * bb * bb)) / (2j * omega)
        m0[big] = m0b
        m1[big] = mk - aa * m0b
    w[:-1] += m0 - m1 / h
    w[1:] += m1 / h
    return w


def chirp_integral(f_vals, k, omega):
    return np.dot(chirp_weights(k, omega), f_vals)


def loglog_fit(x, y):
    """Least-squares fit of ``y = c x^slope``; returns ``(slope, c)``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, icpt = np.polyfit(lx, ly, 1)
    return float(slope), float(math.exp(icpt))


def local_maxima(y):
    """Indices of strict interior local maxima of a sampled curve."""
    y = np.asarray(y)
    return np.nonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
