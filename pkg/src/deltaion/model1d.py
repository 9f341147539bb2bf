"""Closed-form results for the 1D delta-potential under a rectangular pulse.

Internally everything uses the reduced units hbar = 2m = 1, g = 2, so that
the bound momentum p = 1, the binding energy E0 = 1 and omega0 = 1.
:class:`Atom1D` converts physical parameters onto this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .quadrature import QuadratureError, chirp_integral
from .specfun import EIPI4, SQRT_PI, faddeeva

T_SWITCH = 50.0


class DomainError(ValueError):
    """An asymptotic or limiting formula was used outside its range."""


@dataclass(frozen=True)
class Atom1D:
    """Bound state of ``H0 = -hbar^2/2m d^2/dx^2 - g delta(x)``."""

    g: float = 2.0
    hbar: float = 1.0
    m: float = 0.5

    def __post_init__(self):
        if not (self.g > 0 and self.hbar > 0 and self.m > 0):
            raise ValueError("g, hbar and m must be positive")

    @classmethod
    def physical(cls, g, hbar, m):
        return cls(g=g, hbar=hbar, m=m)

    @property
    def p(self) -> float:
        return self.m * self.g / self.hbar**2

    @property
    def E0(self) -> float:
        return self.hbar**2 * self.p**2 / (2 * self.m)

    @property
    def omega0(self) -> float:
        return self.E0 / self.hbar

    @property
    def is_reduced(self) -> bool:
        return math.isclose(self.p, 1.0) and math.isclose(self.hbar / (2 * self.m), 1.0)

    def to_reduced_time(self, t):
        return np.asarray(t) * self.omega0

    def to_reduced_momentum(self, k):
        return np.asarray(k) / self.p


REDUCED = Atom1D()


@dataclass(frozen=True)
class RectPulse:
    r: float
    tau: float

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("pulse duration must be >= 0")


@dataclass
class AmplitudeRecord:
    """Survival and continuum amplitudes on time/momentum grids."""

    times: np.ndarray
    theta: np.ndarray
    path: str
    momenta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    Theta: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), complex))

    @property
    def survival(self):
        return np.abs(self.theta) ** 2


# --- survival amplitude --------------------------------------------------


def _pole_weight(r: float) -> float:
    b = r + 1.0
    return 2.0 * (b + abs(b)) / (r + 2.0) ** 2 if b > 0 else 0.0


def _rect_integral(r: float, t: float) -> complex:
    """The u-integral term of theta(t).

    Rotating ``u = exp(-i pi/4) v`` (no poles are crossed: they sit at
    ``u = +-i, +-i|r+1|``) turns the chirp ``exp(-i u^2 t)`` into the
    Gaussian ``exp(-v^2 t)``.
    """
    if r == 0.0:
        return 0j
    b2 = (r + 1.0) ** 2
    rot = np.conj(EIPI4)

    def f(v):
        if v > 1e30:
            return 0j
        u2 = -1j * v * v
        if b2 == 0.0:
            core = 1.0 / (1.0 + u2) ** 2
        else:
            core = u2 / ((1.0 + u2) ** 2 * (b2 + u2))
        return np.exp(-v * v * t) * core

    pts = [math.sqrt(b2)] if 0 < b2 < 1e3 else None
    brk = min(1.0 / math.sqrt(t), 1e8) if t > 0 else 1e8
    decades = 10.0 ** np.arange(0, math.log10(brk)) if brk > 1 else []
    val = 0j
    edges = sorted({0.0, brk, *decades, *(pts or [])})
    for lo, hi in zip(edges, edges[1:] + [np.inf]):
        res, err, info = integrate.quad(
            f, lo, hi, complex_func=True, epsabs=1e-14, epsrel=1e-12, limit=400, full_output=True
        )
        val += res
    return 4.0 * r * r / math.pi * rot * np.exp(-1j * t) * val


def theta_rect(r: float, t, t_switch: float | None = None):
    """Survival amplitude after a rectangular pulse of height ``r`` and length ``t``.

    Interaction picture: ``theta = 1`` for ``r = 0``. If ``t_switch`` is
    given, times beyond it (and satisfying ``t (r+1)^2 > 10``) use the
    leading asymptotic form instead of the exact integral.
    """
    r = float(r)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ValueError("t must be >= 0")
    out = np.empty(ts.shape, dtype=complex)
    pw = _pole_weight(r)
    lam = r * (r + 2.0)
    for i, ti in enumerate(ts):
        if t_switch is not None and _asymptotic_ok(r, ti, t_switch):
            out[i] = theta_asymptotic(r, ti, t_switch=t_switch)
        else:
            out[i] = _rect_integral(r, ti) + pw * np.exp(1j * lam * ti)
    return out[0] if np.ndim(t) == 0 else out


def _asymptotic_ok(r, t, t_switch=T_SWITCH):
    b = r + 1.0
    return t >= t_switch and (b == 0.0 or t * b * b > 10.0)


def theta_asymptotic(r: float, t, t_switch: float = T_SWITCH):
    """Leading large-``t`` form of the survival amplitude.

    ``r = -1``: ``2 exp(-i pi/4) exp(-it)/sqrt(pi t)`` so ``|theta|^2 = 4/(pi t)``.
    Otherwise the pole term plus ``r^2 exp(-3i pi/4) exp(-it) / ((r+1)^2 sqrt(pi) t^1.5)``.
    """
    r = float(r)
    ts = np.asarray(t, dtype=float)
    if not all(_asymptotic_ok(r, x, t_switch) for x in np.atleast_1d(ts)):
        raise DomainError(f"asymptotic form needs t >= {t_switch} and t (r+1)^2 > 10")
    b = r + 1.0
    if b == 0.0:
        return 2.0 * np.conj(EIPI4) * np.exp(-1j * ts) / np.sqrt(math.pi * ts)
    corr = r * r * np.exp(-0.75j * math.pi) * np.exp(-1j * ts) / (b * b * SQRT_PI * ts**1.5)
    return _pole_weight(r) * np.exp(1j * r * (r + 2.0) * ts) + corr


def survival_inf(r: float) -> float:
    """``|theta(inf)|^2 = 16 (r+1)^2 / (r+2)^4`` for ``r >= -1``, else 0."""
    if r < -1.0:
        return 0.0
    return 16.0 * (r + 1.0) ** 2 / (r + 2.0) ** 4


def survival_asymptotic_rate(r: float):
    """Coefficient and exponent of the decay of ``|theta|^2 - |theta(inf)|^2``.

    For ``r > -1`` the coefficient is the oscillation envelope.
    """
    b = r + 1.0
    if b == 0.0:
        return 4.0 / math.pi, -1.0
    if b < 0:
        return r**4 / (b**4 * math.pi), -3.0
    return 8.0 * r * r / (b * (r + 2.0) ** 2 * SQRT_PI), -1.5


# --- ejected-electron spectrum ------------------------------------------


def _chirp_pair(c, k, tau):
    """``J(c) = int_0^inf (exp(i(k^2-u^2)tau) - 1) / (i (c^2+u^2)(k^2-u^2)) du``
    split as ``(A, B)`` with ``J = A + B exp(i k^2 tau)``.

    Uses ``1/((c^2+u^2)(k^2-u^2)) = [1/(c^2+u^2) + 1/(k^2-u^2)] / (c^2+k^2)``,
    ``int exp(-i u^2 tau)/(c^2+u^2) du = pi/(2c) w(i c e^{i pi/4} sqrt tau)`` and
    ``int (exp(i(k^2-u^2)tau) - 1)/(k^2-u^2) du = i pi/(2k) erf(e^{-i pi/4} k sqrt tau)``.
    """
    st = EIPI4 * math.sqrt(tau)
    wc = faddeeva(1j * c * st)
    wk = faddeeva(EIPI4 * k * math.sqrt(tau))
    den = -1j / (c * c + k * k)
    A = den * (-math.pi / (2 * c) + 0.5j * math.pi / k)
    B = den * (math.pi / (2 * c) * wc - 0.5j * math.pi / k * wk)
    return A, B


def _continuum_pair(r, k, tau):
    """``int_0^inf u^2/((1+u^2)(b^2+u^2)) E(k^2-u^2) du`` as ``(A, B)``, ``b = |r+1|``."""
    b2 = (r + 1.0) ** 2
    if b2 == 0.0:
        return _chirp_pair(1.0, k, tau)
    if abs(b2 - 1.0) < 1e-4:
        # [J(1) - x J(sqrt x)] / (1 - x) at x -> 1 is d/dx (x J(sqrt x))
        d = 1e-5
        Ap, Bp = _chirp_pair(math.sqrt(1 + d), k, tau)
        Am, Bm = _chirp_pair(math.sqrt(1 - d), k, tau)
        fA = ((1 + d) * Ap - (1 - d) * Am) / (2 * d)
        fB = ((1 + d) * Bp - (1 - d) * Bm) / (2 * d)
        return fA, fB
    A1, B1 = _chirp_pair(1.0, k, tau)
    Ab, Bb = _chirp_pair(math.sqrt(b2), k, tau)
    return (A1 - b2 * Ab) / (1 - b2), (B1 - b2 * Bb) / (1 - b2)


def _spectrum_parts(k, r, tau):
    """Reduced-unit ``Theta(k, tau) = A(k) + B(k) exp(i k^2 tau)``.

    Obtained from ``Y = theta'/(2i)`` with ``theta`` the closed form above, so
    ``Theta = sqrt(2/pi) k/(1-ik) int_0^tau Y(t) exp(i(1+k^2)t) dt``. Both
    parts are smooth in ``k``; the chirp is kept separate for quadrature.
    """
    k = np.abs(np.asarray(k, dtype=float))
    shape = k.shape
    k = np.atleast_1d(k)
    A = np.zeros(k.shape, dtype=complex)
    B = np.zeros(k.shape, dtype=complex)
    nz = k > 0
    if r != 0.0 and tau > 0 and np.any(nz):
        kk = k[nz]
        pre = math.sqrt(2 / math.pi) * kk / (1 - 1j * kk)
        cA, cB = _continuum_pair(r, kk, tau)
        A[nz] = -2 * r * r / math.pi * cA
        B[nz] = -2 * r * r / math.pi * cB
        pw = _pole_weight(r)
        if pw:
            b2 = (r + 1.0) ** 2
            lam = r * (r + 2.0)
            A[nz] += 0.5 * lam * pw * 1j / (kk * kk + b2)
            B[nz] += 0.5 * lam * pw * np.exp(1j * b2 * tau) / (1j * (kk * kk + b2))
        A[nz] *= pre
        B[nz] *= pre
    return A.reshape(shape), B.reshape(shape)


def spectrum_rect(k, r: float, tau: float, atom: Atom1D = REDUCED):
    """Continuum amplitude ``Theta(k, t)``, frozen for ``t >= tau``, after a
    rectangular pulse of relative height ``r``.

    ``k`` and ``tau`` are in the units of ``atom``; for a physical atom the
    amplitude is normalised so that ``int |Theta|^2 dk`` is a probability.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    kr = atom.to_reduced_momentum(k)
    tr = float(atom.to_reduced_time(tau))
    A, B = _spectrum_parts(kr, r, tr)
    out = (A + B * np.exp(1j * kr * kr * tr)) / math.sqrt(atom.p)
    return out[()] if np.ndim(out) == 0 else out


def k_grid(kmax: float = 50.0, h: float = 0.005):
    fine = np.geomspace(1e-6, 1.0, 600)
    return np.unique(np.concatenate([[0.0], fine, np.arange(1.0, kmax + 0.5 * h, h)]))


def _weighted_norm(r, tau, weight_power, kmax):
    """``2 int_0^inf k^n |Theta|^2 dk`` with the ``k^-4`` tail added in closed form."""
    k = k_grid(kmax)
    A, B = _spectrum_parts(k, r, tau)
    kw = k**weight_power
    smooth = kw * (np.abs(A) ** 2 + np.abs(B) ** 2)
    body = integrate.simpson(smooth, x=k)
    osc = 2.0 * chirp_integral(kw * A * np.conj(B), k, tau).real
    C = kmax**4 * smooth[-1] / kmax**weight_power
    tail = C / (3 * kmax**3) if weight_power == 0 else C / kmax
    return 2.0 * (body + osc + tail)


def spectrum_norm(r: float, tau: float, kmax: float = 50.0) -> float:
    """``int |Theta(k, tau)|^2 dk`` over the real line, with analytic ``k^-4`` tail."""
    if tau == 0:
        return 0.0
    return float(_weighted_norm(r, tau, 0, kmax))


class IonizationCheck(NamedTuple):
    P: float
    P_spectral: float
    discrepancy: float


class DataQualityError(ArithmeticError):
    pass


def ionization_prob(r: float, t: float, verify: bool = False, tol: float = 1e-3, kmax: float = 50.0):
    """``P(t) = 1 - |theta(t)|^2``; with ``verify`` also integrate the spectrum."""
    if t < 0:
        raise ValueError("t must be >= 0")
    P = 1.0 - abs(theta_rect(r, t)) ** 2
    if not verify:
        return P
    Ps = spectrum_norm(r, t, kmax) if t > 0 else 0.0
    d = abs(P - Ps)
    if d > tol:
        raise DataQualityError(f"ionization paths disagree by {d:.3e} (r={r}, t={t})")
    return IonizationCheck(P, Ps, d)


def ejected_energy(r: float, tau: float, kmax: float = 50.0) -> float:
    """Energy (units of E0) carried by electrons ejected by a pulse of length ``tau``."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0:
        return 0.0
    E = float(_weighted_norm(r, tau, 2, kmax))
    if not np.isfinite(E):
        raise QuadratureError("energy quadrature failed")
    return E


def ejected_energy_inf(r: float) -> float:
    """Energy of ejected electrons after an infinitely long pulse, units of E0."""
    b = abs(r + 1.0)
    bound = 4.0 * b * b * (r + 3.0) / (r + 2.0) ** 2 if r > -1.0 else 0.0
    return (r / (b + 1.0)) ** 2 * (1.0 + 2.0 * b + bound)


class ShortPulse(NamedTuple):
    exact: float
    small_a: float
    large_a: float
    a: float


def short_pulse_prob(r: float, t: float) -> ShortPulse:
    """Ionization by a short pulse with both limiting branches, ``a = r sqrt(t)``."""
    if not (0 <= t <= 0.05):
        raise ValueError("short-pulse formulas need 0 <= t <= 0.05")
    a = r * math.sqrt(t)
    base = 4.0 * math.sqrt(2.0 * t / math.pi)
    exact = 1.0 - abs(theta_rect(r, t)) ** 2 if r != 0 else 0.0
    return ShortPulse(exact, base * 2.0 * a * a / 3.0, base, a)
