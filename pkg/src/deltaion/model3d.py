"""Three-dimensional model: a particle bound by an attractive delta shell of
radius ``a``, perturbed by a change of the shell strength.

Units are hbar = 2m = 1, so energies are squared momenta and the shell
strength is ``g = Q/a``. All public times (pulse widths, evaluation times,
kernel lags) are dimensionless ``omega0 * t`` with ``omega0 = p^2`` the
binding energy of the unperturbed l = 0 state.

Shell values ``phi^2 = u(a)^2`` of the reduced radial functions ``u = r R``
carry the whole dynamics: the bound state has ``phi_b^2 = 4p sinh^2(pa)/E``
with ``E = exp(2pa) - 1 - 2pa``, the delta-normalised continuum has
``phi_k^2 = (2/pi) rj_l(ka)^2 A_l(k)^2`` with ``rj_l`` the Riccati-Bessel
function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .model1d import AmplitudeRecord, DomainError
from .quadrature import chirp_weights
from .specfun import EIPI4, SQRT_PI, _erf_rot, bessel_half, riccati_j
from .volterra import Kernel, PulseProgram, VolterraProblem, solve

_ZERO_ENERGY_TOL = 1e-9


def _bessel_sums(l: int, x: float):
    """``S_K = sum c_k (2x)^-k`` and ``P = sum (-1)^k c_k (2x)^-k``."""
    sk = p = 0.0
    for k in range(l + 1):
        c = math.factorial(l + k) / (math.factorial(k) * math.factorial(l - k)) / (2 * x) ** k
        sk += c
        p += (-1) ** k * c
    return sk, p


def _ki(l: int, x: float) -> float:
    """``K_{l+1/2}(x) I_{l+1/2}(x)`` without overflow."""
    if x <= 30.0:
        return bessel_half("K", l, x) * bessel_half("I", l, x)
    sk, p = _bessel_sums(l, x)
    return sk * (p - (-1) ** l * math.exp(-2 * x) * sk) / (2 * x)


def bound_momentum(Q: float, a: float, l: int = 0) -> float | None:
    """Bound-state momentum ``p_l`` solving ``Q K I = 1``, or ``None`` if ``Q <= 2l+1``."""
    if not (Q > 0 and a > 0):
        raise ValueError("Q and a must be positive")
    if Q <= 2 * l + 1:
        return None
    if l == 0:
        # Q = 2x / (1 - exp(-2x)); written with expm1 to keep precision near threshold
        f = lambda x: 2 * x + Q * math.expm1(-2 * x)  # noqa: E731
    else:
        f = lambda x: Q * _ki(l, x) - 1.0  # noqa: E731
    # Q K I decreases from Q/(2l+1) > 1 to about Q/(2x), so [tiny, Q] brackets the root
    lo, hi = 1e-14, max(Q, 1.0)
    while f(lo) * f(hi) > 0:
        lo *= 1e-2
        if lo < 1e-300:
            return None
    x = optimize.brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return x / a


@dataclass(frozen=True)
class Atom3D:
    Q: float
    a: float = 1.0
    l_max: int = 0
    p_l: tuple = field(init=False)

    def __post_init__(self):
        if not (self.Q > 0 and self.a > 0):
            raise ValueError("Q and a must be positive")
        if not (0 <= self.l_max <= 10):
            raise ValueError("l_max must lie in [0, 10]")
        object.__setattr__(self, "p_l", tuple(bound_momentum(self.Q, self.a, l) for l in range(self.l_max + 1)))

    @property
    def g(self) -> float:
        return self.Q / self.a

    @property
    def p(self) -> float:
        if self.p_l[0] is None:
            raise DomainError(f"no l = 0 bound state for Q = {self.Q} <= 1")
        return self.p_l[0]

    @property
    def omega0(self) -> float:
        return self.p**2

    def bound(self, l: int) -> float:
        if l > self.l_max:
            p = bound_momentum(self.Q, self.a, l)
        else:
            p = self.p_l[l]
        if p is None:
            raise DomainError(f"no bound state with l = {l} for Q = {self.Q}")
        return p

    def with_strength(self, Q: float) -> Atom3D:
        return Atom3D(Q, self.a, self.l_max)


# --- radial functions ----------------------------------------------------


def _bound_norm(l: int, p: float, a: float) -> float:
    x = p * a
    K = bessel_half("K", l, x)
    i_up = bessel_half("I", l + 1, x)
    i_down = i_up + (2 * l + 1) / x * bessel_half("I", l, x)  # I_{l-1/2} by recurrence
    return math.sqrt(2.0) * K / math.sqrt(1.0 - x * K * (i_down + i_up))


def _continuum_norm(l: int, Q: float, x: float) -> float:
    J = bessel_half("J", l, x)
    N = bessel_half("N", l, x)
    return (1.0 + Q * math.pi * J * N + Q * Q * math.pi**2 / 4 * J * J * (J * J + N * N)) ** -0.5


@dataclass(frozen=True)
class RadialState:
    """Radial eigenfunction ``R(r)``; ``momentum`` is ``p_l`` for bound states, ``k`` otherwise."""

    l: int
    kind: str
    momentum: float
    norm: float
    Q: float
    a: float

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.array([self._value(x) for x in r])
        return out[0] if out.size == 1 else out

    def _value(self, r: float) -> float:
        if r <= 0:
            raise ValueError("r must be > 0")
        l, m, a = self.l, self.momentum, self.a
        if self.kind == "bound":
            if r <= a:
                return self.norm * m / math.sqrt(r) * bessel_half("I", l, m * r)
            # I(pa) K(pr) / K(pa), written to avoid exp overflow
            ratio = math.exp(-m * (r - a)) * _bessel_sums(l, m * r)[0] / _bessel_sums(l, m * a)[0] * math.sqrt(a / r)
            return self.norm * m / math.sqrt(r) * bessel_half("I", l, m * a) * ratio
        k = m
        val = bessel_half("J", l, k * r)
        if r > a:
            Ja, Na = bessel_half("J", l, k * a), bessel_half("N", l, k * a)
            val += 0.5 * math.pi * self.Q * Ja * (Na * bessel_half("J", l, k * r) - Ja * bessel_half("N", l, k * r))
        return self.norm * math.sqrt(k / r) * val

    def u(self, r):
        """Reduced radial function ``r R(r)``."""
        return np.asarray(r, dtype=float) * self(r)


def radial_eigenfunctions(atom: Atom3D, l: int, k: float | None = None) -> RadialState:
    """Bound state (``k=None``) or delta-normalised scattering state of angular momentum ``l``."""
    if k is None:
        p = atom.bound(l)
        return RadialState(l, "bound", p, _bound_norm(l, p, atom.a), atom.Q, atom.a)
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return RadialState(l, "continuum", 0.0, 0.0, atom.Q, atom.a)
    return RadialState(l, "continuum", float(k), _continuum_norm(l, atom.Q, k * atom.a), atom.Q, atom.a)


def bound_shell_density(Q: float, a: float, l: int = 0) -> float:
    """``u_b(a)^2`` of the normalised bound state."""
    p = bound_momentum(Q, a, l)
    if p is None:
        raise DomainError(f"no bound state with l = {l} for Q = {Q}")
    x = p * a
    if l == 0:
        return 4 * p * math.sinh(x) ** 2 / (math.expm1(2 * x) - 2 * x)
    B = _bound_norm(l, p, a)
    return (B * p * math.sqrt(a) * bessel_half("I", l, x)) ** 2


def shell_density(k, Q: float, a: float, l: int = 0):
    """``u_k(a)^2`` of the delta-normalised scattering states (vectorised in ``k``)."""
    k = np.asarray(k, dtype=float)
    x = k * a
    if l == 0:
        s = np.sin(x)
        with np.errstate(invalid="ignore", divide="ignore"):
            sx = np.where(x > 0, s / np.where(x > 0, x, 1), 1.0)
            s2x = np.where(x > 0, np.sin(2 * x) / np.where(x > 0, x, 1), 2.0)
        D2 = 1 - Q * s2x + Q * Q * sx * sx
        return 2 / np.pi * s * s / D2
    flat = np.ravel(x)
    out = np.array(
        [(2 / math.pi) * riccati_j(l, xi) ** 2 * _continuum_norm(l, Q, xi) ** 2 if xi > 0 else 0.0 for xi in flat]
    )
    return out.reshape(k.shape)


# --- rectangular pulse by projection ------------------------------------


def _projection(atom: Atom3D, r: float, k):
    """``|<b1|b>|^2``, the new bound momentum ``q`` and ``|<k1|b>|^2`` on ``k``."""
    Q1 = (1 + r) * atom.Q
    if Q1 <= 0:
        raise DomainError("perturbed strength (1+r)Q must stay positive")
    p, a = atom.p, atom.a
    phib2 = bound_shell_density(atom.Q, a)
    lam2 = (r * atom.Q / a) ** 2
    f = lam2 * phib2 * shell_density(k, Q1, a) / (k * k + p * p) ** 2
    q = bound_momentum(Q1, a) if not math.isclose(Q1, 1.0, abs_tol=_ZERO_ENERGY_TOL) else None
    cb = 0.0
    if q is not None:
        cb = lam2 * phib2 * bound_shell_density(Q1, a) / (p * p - q * q) ** 2 if r != 0 else 1.0
    return cb, q, f


def _k_grid_3d(kmax: float = 40.0, h: float = 0.005):
    return np.unique(np.concatenate([np.geomspace(1e-6, 0.5, 2000), np.arange(0.5, kmax + h / 2, h)]))


def _tail(k, f, a):
    """``int_K^inf f`` for ``f ~ C(k) k^-4`` with ``C`` averaged over the last oscillation."""
    last = k >= k[-1] - math.pi / a
    return float(np.mean(f[last] * k[last] ** 4)) / (3 * k[-1] ** 3)


def completeness(atom: Atom3D, r: float, kmax: float = 40.0) -> float:
    """``|<b1|b>|^2 + int |<k1|b>|^2 dk``; equals 1 up to quadrature error."""
    k = _k_grid_3d(kmax)
    cb, _, f = _projection(atom, r, k)
    return float(cb + np.trapezoid(f, k) + _tail(k, f, atom.a))


def theta3d_rect(atom: Atom3D, r: float, tau, kmax: float = 40.0):
    """Survival amplitude during a step of the shell strength ``Q -> (1+r) Q``.

    Evaluated in the interaction picture: the discrete term carries the
    phase ``exp(i(q^2-p^2)t)``, the continuum term ``exp(-i(k^2+p^2)t)``.
    """
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(taus < 0):
        raise ValueError("tau must be >= 0")
    if r == 0:
        out = np.ones(taus.shape, complex)
        return out[0] if np.ndim(tau) == 0 else out
    p2 = atom.omega0
    k = _k_grid_3d(kmax)
    cb, q, f = _projection(atom, r, k)
    out = np.empty(taus.shape, complex)
    for i, T in enumerate(taus):
        t = T / p2
        val = cb * np.exp(1j * (q * q - p2) * t) if q is not None else 0j
        if t == 0:
            cont = np.trapezoid(f, k) + _tail(k, f, atom.a)
        else:
            cont = np.dot(chirp_weights(k, t), f) * np.exp(-1j * p2 * t)
        out[i] = val + cont
    return out[0] if np.ndim(tau) == 0 else out


def asymptotic_coefficients(atom: Atom3D, r: float):
    """Small-``k`` behaviour of ``|<k1|b>|^2``: ``(c, power)`` with ``f ~ c k^power``."""
    Q1 = (1 + r) * atom.Q
    p, a = atom.p, atom.a
    base = (r * atom.Q / a) ** 2 * bound_shell_density(atom.Q, a) * (2 / math.pi) / p**4
    if math.isclose(Q1, 1.0, abs_tol=_ZERO_ENERGY_TOL):
        return base, 0
    return base * a * a / (1 - Q1) ** 2, 2


def theta3d_asymptotic(atom: Atom3D, r: float, t):
    """Large-time form of :func:`theta3d_rect` (``t >= 50``)."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 50):
        raise DomainError("asymptotic form requires t >= 50")
    p2 = atom.omega0
    tn = ts / p2
    Q1 = (1 + r) * atom.Q
    c, power = asymptotic_coefficients(atom, r)
    if power == 0:
        corr = c * 0.5 * SQRT_PI * np.conj(EIPI4) / np.sqrt(tn)
    else:
        corr = c * 0.25 * SQRT_PI * np.exp(-0.75j * np.pi) / tn**1.5
    out = corr * np.exp(-1j * p2 * tn)
    if Q1 > 1 and power != 0:
        cb, q, _ = _projection(atom, r, np.array([1.0]))
        out = out + cb * np.exp(1j * (q * q - p2) * tn)
    return out[0] if np.ndim(t) == 0 else out


# --- memory kernel and evolution ----------------------------------------


class ShellKernel(Kernel):
    """Kernel of the l-wave amplitude equation in ``omega0`` time units.

    The memory part is ``i g int phi_k^2 exp(-i(k^2+p^2) s) dk``. The large-``k``
    value ``1/pi`` of ``phi_k^2`` is integrated in closed form, which carries the
    ``s^-1/2`` singularity; the remainder is smooth and goes through the chirp rule.
    """

    def __init__(self, atom: Atom3D, l: int = 0, kmax: float = 100.0, h: float = 0.01):
        self.atom, self.l = atom, l
        self.p = atom.bound(l)
        self.w0 = atom.omega0
        self.phib2 = bound_shell_density(atom.Q, atom.a, l)
        g = atom.g
        self.constant = 1j * g * self.phib2 / self.w0
        self.coupling = self.constant
        self.ig = 1j * g
        self.k = np.unique(np.concatenate([np.geomspace(1e-5, 0.5, 300), np.arange(0.5, kmax + h / 2, h)]))
        self.rho = shell_density(self.k, atom.Q, atom.a, l) - 1 / math.pi
        omega = self.k**2 + self.p**2
        self.inv1 = self.rho / omega
        self.inv2 = self.rho / omega**2
        w0 = chirp_weights(self.k, 0.0)
        self.static1 = np.dot(w0, self.inv1)
        self.static2 = np.dot(w0, self.inv2)

    def _free(self, s):
        """Closed-form moments of ``(1/pi) int exp(-i(k^2+p^2)u) dk``."""
        x = self.p**2 * s
        erf = _erf_rot(x)
        A = SQRT_PI * np.conj(EIPI4) * erf
        B = 1j * np.sqrt(x) * np.exp(-1j * x) - 0.5j * A
        pref = np.conj(EIPI4) / (2 * SQRT_PI)
        return pref * A / self.p, pref * B / self.p**3

    def memory_moments_natural(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        F0 = np.zeros(s.shape, complex)
        F1 = np.zeros(s.shape, complex)
        for i, si in enumerate(s):
            if si <= 0:
                continue
            f0, f1 = self._free(si)
            w = chirp_weights(self.k, si) * np.exp(-1j * self.p**2 * si)
            c1 = np.dot(w, self.inv1)
            c2 = np.dot(w, self.inv2)
            F0[i] = f0 + (self.static1 - c1) / 1j
            F1[i] = f1 + 1j * si * c1 + (c2 - self.static2)
        return self.ig * F0, self.ig * F1

    def memory_moments(self, s):
        F0, F1 = self.memory_moments_natural(np.asarray(s, dtype=float) / self.w0)
        return F0, self.w0 * F1

    def value(self, lag):
        """``K(lag)`` with the lag in ``omega0`` units (natural-unit kernel value)."""
        s = float(lag) / self.w0
        free = np.conj(EIPI4) / (2 * SQRT_PI) / math.sqrt(s) * np.exp(-1j * self.p**2 * s)
        w = chirp_weights(self.k, s) * np.exp(-1j * self.p**2 * s)
        rest = np.dot(w, self.rho)
        kmax = self.k[-1]
        if 2 * s * kmax > 20 * self.atom.a:
            # leading endpoint term of the truncated chirp tail
            rest += self.rho[-1] * np.exp(-1j * (kmax**2 + self.p**2) * s) / (2j * s * kmax)
        return complex(self.phib2 + free + rest) / self.atom.a**2


def kernel_K(atom: Atom3D, l: int, theta_lag: float) -> complex:
    """``K_l(lag) = R_b(a)^2 + int |R_l(k,a)|^2 exp(-i(k^2+p_l^2) lag) dk``."""
    if not theta_lag > 0:
        raise ValueError("lag must be > 0")
    return ShellKernel(atom, l).value(theta_lag)


def evolve3d(
    atom: Atom3D,
    program: PulseProgram,
    l: int = 0,
    t_end: float | None = None,
    step: float = 5e-3,
    theta0: complex = 1.0,
    experimental: bool = False,
    times=None,
    tolerance: float = 1e-6,
) -> AmplitudeRecord:
    """Amplitude of the ``(l, m)`` bound state under a shell-strength modulation ``eta(t)``.

    Returned at the solver nodes, or at ``times`` when given.
    """
    if l != 0 and not experimental:
        raise NotImplementedError("only l = 0 is supported; pass experimental=True for higher l")
    t_end = program.end if t_end is None else t_end
    t_end = max(t_end, step)
    if times is not None:
        times = np.asarray(times, dtype=float)
    if theta0 == 0:
        ts = np.linspace(0, t_end, 2) if times is None else times
        return AmplitudeRecord(ts, np.zeros(ts.shape, complex), path="volterra-3d")
    sol = solve(VolterraProblem(program, t_end, step=step, tolerance=tolerance, kernel=ShellKernel(atom, l)))
    if times is None:
        ts, theta = sol.times, sol.theta_nodes
    else:
        ts, theta = times, sol.theta(times)
    # the equation is linear in the initial amplitude
    return AmplitudeRecord(ts, theta0 * theta, path="volterra-3d")
