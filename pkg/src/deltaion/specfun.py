"""Special functions used throughout the package.

Complex error functions are evaluated through the scaled Faddeeva function
``w(z) = exp(-z**2) erfc(-iz)`` so that products such as
``exp(i x**2) erfc(exp(i pi/4) x)`` never overflow or cancel.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

SQRT_PI = math.sqrt(math.pi)
EIPI4 = np.exp(0.25j * np.pi)  # sqrt(i)

__all__ = [
    "faddeeva",
    "cerfc",
    "cerf",
    "fresnel",
    "kernel_M",
    "kernel_M_moments",
    "bessel_half",
    "riccati_j",
    "riccati_n",
]


def faddeeva(z):
    """Scaled complementary error function ``w(z) = exp(-z^2) erfc(-iz)``."""
    return special.wofz(z)


def cerfc(z):
    """Complementary error function of a complex argument.

    Raises ``OverflowError`` when the result is not representable, which
    happens for ``Re z`` strongly negative with large ``|Im z|``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1e8):
        raise ValueError("cerfc argument out of range (|z| >= 1e8)")
    with np.errstate(over="ignore", invalid="ignore"):
        out = special.erfc(z)
    if not np.all(np.isfinite(out)):
        raise OverflowError("cerfc overflow")
    return out[()] if out.ndim == 0 else out


def cerf(z):
    return 1.0 - cerfc(z)


def fresnel(x):
    """Fresnel integrals ``C(x) = int_0^x cos(pi t^2/2) dt`` and ``S(x)``.

    Uses ``C + iS = (1+i)/2 * erf(sqrt(pi)/2 * (1-i) x)``.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("fresnel requires finite input")
    z = 0.5 * SQRT_PI * (1 - 1j) * np.abs(x)
    # erf(z) = 1 - exp(-z^2) w(iz); z^2 is purely imaginary so this is stable
    erf = 1.0 - np.exp(-z * z) * faddeeva(1j * z)
    val = 0.5 * (1 + 1j) * erf * np.sign(x)
    c, s = val.real, val.imag
    if x.ndim == 0:
        return float(c), float(s)
    return c, s


def _check_positive(s, name="s"):
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise ValueError(f"{name} must be > 0")
    return s


def kernel_M(s):
    """Memory kernel of the one-dimensional amplitude equation.

    ``M(s) = 1/2 sqrt(i/pi) int_s^inf exp(-iu) u^(-3/2) du``, evaluated via
    ``M(s) = exp(i pi/4) exp(-is)/sqrt(pi s) - i erfc(exp(i pi/4) sqrt(s))``.
    """
    s = _check_positive(s)
    rs = np.sqrt(s)
    out = np.exp(-1j * s) * (EIPI4 / (SQRT_PI * rs) - 1j * faddeeva(1j * EIPI4 * rs))
    return out[()] if out.ndim == 0 else out


def _erf_rot(s):
    """``erf(exp(i pi/4) sqrt(s))`` for ``s >= 0``."""
    rs = np.sqrt(s)
    return 1.0 - np.exp(-1j * s) * faddeeva(1j * EIPI4 * rs)


def kernel_M_moments(s):
    """Cumulative moments ``F0 = int_0^s M(u) du`` and ``F1 = int_0^s u M(u) du``.

    Exchanging the order of integration in the tail representation gives
    ``F0 = erf(e^{i pi/4} sqrt s)/2 + s M(s)`` and
    ``F1 = e^{i pi/4}/(4 sqrt pi) * B(s) + s^2 M(s)/2`` with
    ``B(s) = int_0^s e^{-iv} sqrt(v) dv``. Both vanish at ``s = 0``.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("moments need s >= 0")
    F0 = np.zeros(s.shape, dtype=complex)
    F1 = np.zeros(s.shape, dtype=complex)
    pos = s > 0
    sp = s[pos]
    M = kernel_M(sp)
    erf = _erf_rot(sp)
    A = SQRT_PI * np.conj(EIPI4) * erf  # int_0^s e^{-iv} v^{-1/2} dv
    B = 1j * np.sqrt(sp) * np.exp(-1j * sp) - 0.5j * A
    F0[pos] = 0.5 * erf + sp * M
    F1[pos] = EIPI4 / (4 * SQRT_PI) * B + 0.5 * sp * sp * M
    if s.ndim == 0:
        return F0[()], F1[()]
    return F0, F1


# --- half-integer order Bessel functions --------------------------------


def _coef(n: int, k: int) -> float:
    return math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k))


def _series(nu: float, x: float, sign: int) -> float:
    """Ascending series of J (sign=-1) or I (sign=+1) of order ``nu``."""
    half = 0.5 * x
    term = math.exp(nu * math.log(half) - math.lgamma(nu + 1.0))
    total = term
    q = half * half
    k = 0
    while True:
        k += 1
        term *= sign * q / (k * (k + nu))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            return total
        if k > 500:
            raise ArithmeticError("Bessel series did not converge")


def _hankel1(n: int, x: float) -> complex:
    acc = 0j
    for k in range(n + 1):
        acc += (1j) ** k * _coef(n, k) / (2 * x) ** k
    return math.sqrt(2 / (math.pi * x)) * (-1j) ** (n + 1) * np.exp(1j * x) * acc


def bessel_half(kind: str, l: int, x: float) -> float:
    """Cylinder Bessel function of order ``l + 1/2``.

    ``kind`` is one of ``"J"``, ``"N"`` (Neumann, Y), ``"I"``, ``"K"``.
    Finite spherical closed forms are used where they are free of cancellation,
    ascending series otherwise.
    """
    if kind not in ("J", "N", "I", "K"):
        raise ValueError(f"unknown Bessel kind {kind!r}")
    l = int(l)
    if l < 0 or l > 10:
        raise ValueError("order index l must lie in [0, 10]")
    x = float(x)
    if not x > 0:
        raise ValueError("x must be > 0")
    nu = l + 0.5
    if kind == "K":
        acc = sum(_coef(l, k) / (2 * x) ** k for k in range(l + 1))
        return math.sqrt(math.pi / (2 * x)) * math.exp(-x) * acc
    if kind == "I":
        if x <= 30.0:
            return _series(nu, x, +1)
        plus = sum((-1) ** k * _coef(l, k) / (2 * x) ** k for k in range(l + 1))
        minus = sum(_coef(l, k) / (2 * x) ** k for k in range(l + 1))
        return (math.exp(x) * plus - (-1) ** l * math.exp(-x) * minus) / math.sqrt(2 * math.pi * x)
    if kind == "J":
        if l == 0:
            return math.sqrt(2 / (math.pi * x)) * math.sin(x)
        if x < l + 1.0:
            return _series(nu, x, -1)
        return _hankel1(l, x).real
    return _hankel1(l, x).imag


def riccati_j(l: int, x: float) -> float:
    """``x j_l(x) = sqrt(pi x / 2) J_{l+1/2}(x)``."""
    return math.sqrt(0.5 * math.pi * x) * bessel_half("J", l, x)


def riccati_n(l: int, x: float) -> float:
    """``x y_l(x) = sqrt(pi x / 2) N_{l+1/2}(x)``."""
    return math.sqrt(0.5 * math.pi * x) * bessel_half("N", l, x)
