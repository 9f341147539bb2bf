"""Product-integration solver for the amplitude integral equation

    Y(t) = eta(t) * {1 + int_0^t K(t - t') Y(t') dt'},   theta = 1 + c int_0^t Y,

with a kernel ``K = constant + memory(s)`` whose memory part may diverge like
``s^-1/2``, plus the Laplace-domain representation for rectangular pulses.

The unknown is represented piecewise linearly between lattice nodes and the
kernel is integrated exactly against that representation using closed-form
cumulative moments, so the singularity costs nothing in accuracy. ``Y`` may
jump where ``eta`` does; the braced factor ``Z`` is continuous and is what the
step equation solves for.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .model1d import AmplitudeRecord
from .quadrature import QuadratureError, exp_sinh
from .specfun import EIPI4, kernel_M_moments

logger = logging.getLogger(__name__)


class SolverError(ArithmeticError):
    """The implicit step equation could not be solved to tolerance."""


# --- pulse programs ------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    eta: Callable[[np.ndarray], np.ndarray]


def _const(v):
    return lambda t: np.full(np.shape(t), float(v))


@dataclass(frozen=True)
class PulseProgram:
    """Relative perturbation ``eta(t) = R(t)/g`` as a list of support segments.

    ``eta`` vanishes outside the segments. Build with :meth:`rect`,
    :meth:`train` or :meth:`sampled`.
    """

    kind: str
    segments: tuple[Segment, ...]
    params: dict = field(default_factory=dict, compare=False)

    @classmethod
    def rect(cls, r: float, tau: float) -> PulseProgram:
        if tau < 0:
            raise ValueError("tau must be >= 0")
        segs = (Segment(0.0, float(tau), _const(r)),) if (r != 0 and tau > 0) else ()
        return cls("rect", segs, {"r": r, "tau": tau})

    @classmethod
    def train(cls, r: float, tau: float, sigma: float, n_pulses: int) -> PulseProgram:
        if not (0 < tau < sigma):
            raise ValueError("need 0 < tau < sigma")
        if n_pulses < 1:
            raise ValueError("n_pulses must be >= 1")
        segs = ()
        if r != 0:
            segs = tuple(Segment(n * sigma, n * sigma + tau, _const(r)) for n in range(n_pulses))
        return cls("train", segs, {"r": r, "tau": tau, "sigma": sigma, "n_pulses": n_pulses})

    @classmethod
    def sampled(cls, t: Sequence[float], eta: Sequence[float], rule: str = "linear") -> PulseProgram:
        """Samples ``(t_i, eta_i)``; ``rule`` is ``"linear"`` or ``"previous"`` (zero-order hold).

        ``eta`` is taken as zero before ``t_0`` and after the last sample.
        """
        t = np.asarray(t, dtype=float)
        eta = np.asarray(eta, dtype=float)
        if t.ndim != 1 or t.shape != eta.shape or t.size < 2:
            raise ValueError("need at least two (t, eta) samples of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if t[0] < 0:
            raise ValueError("sample times must be >= 0")
        if rule == "linear":
            tt, ee = t.copy(), eta.copy()
            segs = (Segment(float(t[0]), float(t[-1]), lambda x: np.interp(x, tt, ee)),)
        elif rule == "previous":
            segs = tuple(Segment(float(a), float(b), _const(v)) for a, b, v in zip(t[:-1], t[1:], eta[:-1]) if v != 0)
        else:
            raise ValueError(f"unknown interpolation rule {rule!r}")
        return cls("sampled", segs, {"rule": rule, "n": int(t.size)})

    @property
    def end(self) -> float:
        return max((s.end for s in self.segments), default=0.0)

    def __call__(self, t):
        """Right-continuous evaluation of ``eta``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for s in self.segments:
            inside = (t >= s.start) & (t < s.end)
            if np.any(inside):
                out[inside] = s.eta(t[inside])
        return out[()] if out.ndim == 0 else out

    def breakpoints(self):
        return sorted({0.0, *(s.start for s in self.segments), *(s.end for s in self.segments)})


# --- kernels -------------------------------------------------------------


class Kernel:
    """Kernel ``K(s) = constant + memory(s)`` and the amplitude coupling ``c``.

    Subclasses provide cumulative moments of the memory part,
    ``F0(s) = int_0^s m(u) du`` and ``F1(s) = int_0^s u m(u) du``.
    """

    constant: complex = 0j
    coupling: complex = 0j

    def memory_moments(self, s: np.ndarray):
        raise NotImplementedError


class MemoryKernel1D(Kernel):
    """``2i + M(s)`` of the one-dimensional model, ``theta = 1 + 2i int Y``."""

    constant = 2j
    coupling = 2j

    def memory_moments(self, s):
        return kernel_M_moments(s)


KERNEL_1D = MemoryKernel1D()


@dataclass
class VolterraProblem:
    forcing: PulseProgram
    t_end: float
    step: float = 5e-3
    tolerance: float = 1e-6
    kernel: Kernel = field(default=KERNEL_1D)
    memory_cutoff: float | None = None  # drop memory (not constant) contributions beyond this lag

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.t_end < self.step:
            raise ValueError("t_end must be >= step")


@dataclass
class YSolution:
    """Solution on the lattice nodes. ``Y`` has left/right limits at every node."""

    times: np.ndarray
    Z: np.ndarray
    Y_minus: np.ndarray
    Y_plus: np.ndarray
    theta_nodes: np.ndarray
    step: float
    coupling: complex
    t_end: float
    # intervals as (left node position); Y is linear from Y_plus[j] to Y_minus[j+1]
    intervals: np.ndarray = field(repr=False)

    @property
    def Y(self):
        """Right limits of ``Y`` (equal to ``eta(0) * 1`` at the first node)."""
        return self.Y_plus

    def theta(self, t=None):
        """Survival amplitude at arbitrary times in ``[0, t_end]``."""
        if t is None:
            return self.theta_nodes
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.shape, dtype=complex)
        if self.times.size == 0:
            out[:] = 1.0
            return out
        cum = np.concatenate([[0j], np.cumsum(self._interval_integrals())])
        starts = self.times[self.intervals]
        for i, ti in enumerate(t):
            n = int(np.searchsorted(starts, ti, side="right"))  # intervals starting at or before ti
            acc = cum[max(n - 1, 0)] if n > 0 else 0j
            if n > 0:
                j = self.intervals[n - 1]
                a = self.times[j]
                x = min(ti - a, self.step)
                ya, yb = self.Y_plus[j], self.Y_minus[j + 1]
                acc += ya * x + 0.5 * (yb - ya) * x * x / self.step
            out[i] = 1.0 + self.coupling * acc
        return out

    def _interval_integrals(self):
        j = self.intervals
        return 0.5 * self.step * (self.Y_plus[j] + self.Y_minus[j + 1])


def _lattice_step(program: PulseProgram, t_end: float, step: float) -> float:
    """Largest step <= ``step`` that puts every breakpoint on the lattice."""
    pts = [Fraction(b).limit_denominator(10**9) for b in program.breakpoints() + [t_end] if b > 0]
    if not pts:
        return step
    den = 1
    for f in pts:
        den = den * f.denominator // math.gcd(den, f.denominator)
    num = 0
    for f in pts:
        num = math.gcd(num, f.numerator * (den // f.denominator))
    g = num / den
    n = math.ceil(g / step - 1e-9)
    if g / n < 1e-3 * step:
        raise ValueError(f"pulse edges share no lattice with step ~{step:g} (common divisor {g:.3g})")
    return g / n


def _build_grid(program: PulseProgram, t_end: float, h: float):
    segs = [s for s in program.segments if s.start < t_end]
    nodes = {}
    for s in segs:
        a = int(round(s.start / h))
        b = int(round(min(s.end, t_end) / h))
        for L in (a, b):
            nodes.setdefault(L, [0.0, 0.0])
        idx = np.arange(a, b + 1)
        vals = s.eta(idx * h)
        for L, v in zip(idx[1:-1], vals[1:-1]):
            nodes[L] = [v, v]
        # one-sided limits at the segment edges
        nodes[a][1] = float(vals[0])
        nodes[b][0] = float(s.eta(np.array([b * h - 1e-12 * h]))[0]) if b > a else nodes[b][0]
    lat = np.array(sorted(nodes), dtype=np.int64)
    eta_m = np.array([nodes[L][0] for L in lat])
    eta_p = np.array([nodes[L][1] for L in lat])
    # an interval exists where both ends lie in the same segment
    inside = np.zeros(max(lat.size - 1, 0), dtype=bool)
    for s in segs:
        a = int(round(s.start / h))
        b = int(round(min(s.end, t_end) / h))
        ja, jb = np.searchsorted(lat, [a, b])
        inside[ja:jb] = True
    inside &= np.diff(lat) == 1
    return lat, eta_m, eta_p, np.nonzero(inside)[0]


def _weight_tables(kernel: Kernel, lat, intervals, h, cutoff):
    """Weights ``wA[d], wB[d]`` for lag index ``d = L_node - L_left - 1``.

    Only lags that actually occur are evaluated; ``pos`` maps a lag to its row.
    """
    if intervals.size == 0:
        return np.zeros(1, np.int64), np.zeros(1, complex), np.zeros(1, complex)
    dmax = int(lat[-1] - lat[intervals[0]])
    need = np.zeros(dmax + 2, dtype=bool)
    # group lattice nodes into contiguous runs; lags between runs form ranges
    run_breaks = np.nonzero(np.diff(lat) != 1)[0]
    run_lo = np.concatenate([[lat[0]], lat[run_breaks + 1]])
    run_hi = np.concatenate([lat[run_breaks], [lat[-1]]])
    for i in range(run_lo.size):
        lo = run_lo[i:] - run_hi[i]
        hi = run_hi[i:] - run_lo[i]
        for a, b in zip(np.maximum(lo - 1, 0), np.minimum(hi, dmax + 1)):
            need[a : b + 1] = True
    d = np.nonzero(need)[0]
    pos = np.full(dmax + 2, -1, dtype=np.int64)
    pos[d] = np.arange(d.size)
    pts = np.union1d(d, d + 1)
    F0, F1 = kernel.memory_moments(pts * h)
    F0 = np.asarray(F0, complex)
    F1 = np.asarray(F1, complex)
    where = np.searchsorted(pts, d)
    where1 = np.searchsorted(pts, d + 1)
    D0 = F0[where1] - F0[where]
    D1 = F1[where1] - F1[where]
    sa = d * h
    sb = (d + 1) * h
    wA = (D1 - sa * D0) / h
    wB = (sb * D0 - D1) / h
    if cutoff is not None:
        drop = sa > cutoff
        wA[drop] = 0
        wB[drop] = 0
    wA = wA + 0.5 * h * kernel.constant
    wB = wB + 0.5 * h * kernel.constant
    return pos, wA, wB


def solve(problem: VolterraProblem, history: YSolution | None = None) -> YSolution:
    """Solve the amplitude equation on a uniform lattice aligned with every pulse edge.

    ``history`` is an earlier solution of the same forcing over a shorter
    horizon on the same lattice; its nodes are reused and the solve resumes
    after them with the full memory retained.
    """
    prog = problem.forcing
    h = _lattice_step(prog, problem.t_end, problem.step)
    if history is not None and not math.isclose(history.step, h, rel_tol=1e-12):
        raise ValueError(f"history lattice step {history.step} differs from {h}")
    lat, eta_m, eta_p, intervals = _build_grid(prog, problem.t_end, h)
    n_hist = 0
    if history is not None:
        n_hist = history.times.size
        if n_hist > lat.size or not np.allclose(history.times, lat[:n_hist] * h, rtol=0, atol=1e-9 * h):
            raise ValueError("history does not match the lattice of this problem")
    kern = problem.kernel
    n = lat.size
    Z = np.zeros(n, complex)
    Ym = np.zeros(n, complex)
    Yp = np.zeros(n, complex)
    if n == 0:
        return YSolution(np.zeros(0), Z, Ym, Yp, np.zeros(0, complex), h, kern.coupling, problem.t_end, intervals)
    pos, wA, wB = _weight_tables(kern, lat, intervals, h, problem.memory_cutoff)
    left_lat = lat[intervals]
    right_pos = intervals + 1
    iA = np.zeros(intervals.size, complex)  # Y_plus at the interval's left node
    iB = np.zeros(intervals.size, complex)  # Y_minus at its right node
    k_done = 0
    w0A, w0B = wA[pos[0]], wB[pos[0]]

    def _step(c, k_done, last):
        S = 0j
        if k_done:
            rows = pos[lat[c] - left_lat[:k_done] - 1]
            S = np.dot(wA[rows], iA[:k_done]) + np.dot(wB[rows], iB[:k_done])
        implicit = 0j
        if last:
            S += w0A * iA[k_done]
            implicit = w0B * eta_m[c]
        den = 1.0 - implicit
        if abs(den) < 1e-12:
            raise SolverError(f"singular step equation at t={lat[c] * h:.6g}")
        z = (1.0 + S) / den
        resid = abs(z - (1.0 + S + implicit * z))
        if resid > problem.tolerance * max(1.0, abs(z)):
            raise SolverError(f"step residual {resid:.3e} at t={lat[c] * h:.6g}")
        return z

    for c in range(n):
        while k_done < intervals.size and right_pos[k_done] < c:
            k_done += 1
        last = k_done < intervals.size and right_pos[k_done] == c
        if c < n_hist:
            Z[c] = history.Z[c]
        else:
            Z[c] = _step(c, k_done, last)
        Ym[c] = eta_m[c] * Z[c]
        Yp[c] = eta_p[c] * Z[c]
        if last:
            iB[k_done] = Ym[c]
        # intervals starting at c
        j = np.searchsorted(intervals, c)
        if j < intervals.size and intervals[j] == c:
            iA[j] = Yp[c]
    times = lat * h
    incr = 0.5 * h * (Yp[intervals] + Ym[intervals + 1])
    theta = np.ones(n, complex)
    acc = np.zeros(n, complex)
    acc[intervals + 1] = incr
    theta += kern.coupling * np.cumsum(acc)
    sol = YSolution(times, Z, Ym, Yp, theta, h, kern.coupling, problem.t_end, intervals)
    if np.any(np.abs(theta) > 1 + 5 * max(problem.tolerance, 1e-3)):
        logger.warning("|theta| exceeds 1 by %.2e", np.abs(theta).max() - 1)
    return sol


def _linear_chirp_weights(a, h, omega):
    """``int_a^{a+h} {1 - x, x} exp(i omega t) dt`` with ``x = (t-a)/h``."""
    x = omega * h
    Ea = np.exp(1j * omega * a)
    small = np.abs(x) < 1e-3
    xs = np.where(small, 1.0, x)
    e = np.exp(1j * xs)
    m0 = (e - 1) / (1j * xs)
    m1 = e / (1j * xs) - (e - 1) / (1j * xs) ** 2
    ser0 = 1 + 0.5j * x - x * x / 6
    ser1 = 0.5 + 1j * x / 3 - x * x / 8
    m0 = np.where(small, ser0, m0)
    m1 = np.where(small, ser1, m1)
    return h * Ea * (m0 - m1), h * Ea * m1


def amplitudes_from_Y(sol: YSolution, momenta=None) -> AmplitudeRecord:
    """Survival amplitude and 1D continuum amplitudes ``Theta(k, t)`` at the nodes."""
    rec = AmplitudeRecord(times=sol.times, theta=sol.theta_nodes, path="volterra")
    if momenta is None or len(momenta) == 0:
        return rec
    k = np.abs(np.asarray(momenta, dtype=float))
    j = sol.intervals
    a = sol.times[j]
    ya, yb = sol.Y_plus[j], sol.Y_minus[j + 1]
    out = np.zeros((k.size, sol.times.size), complex)
    for i, kk in enumerate(k):
        wa, wb = _linear_chirp_weights(a, sol.step, 1.0 + kk * kk)
        inc = np.zeros(sol.times.size, complex)
        inc[j + 1] = wa * ya + wb * yb
        out[i] = math.sqrt(2 / math.pi) * kk / (1 - 1j * kk) * np.cumsum(inc)
    rec.momenta = k
    rec.Theta = out
    return rec


# --- Laplace representation ---------------------------------------------


def _sqrt_branch(s):
    """``sqrt(is - 1)`` on the branch with positive imaginary part."""
    return 1j * np.sqrt(1.0 - 1j * np.asarray(s, dtype=complex))


def laplace_rect(s, r: float):
    """Laplace transform of ``Y`` for a step perturbation of height ``r``."""
    s = np.asarray(s, dtype=complex)
    on_cut = (np.abs(s.real) < 1e-14) & (s.imag <= -1.0)
    if np.any(on_cut):
        raise ValueError("Laplace transform evaluated on the branch cut")
    out = r / (s - r * (1j + _sqrt_branch(s)))
    return out[()] if out.ndim == 0 else out


def laplace_pole(r: float):
    """The simple pole ``s = i r (r+2)`` of the transform, or ``None`` for ``r <= -1``."""
    if r <= -1.0 or r == 0.0:
        return None
    return 1j * r * (r + 2.0)


def invert_laplace_theta(r: float, t: float, tol: float = 1e-12) -> complex:
    """``theta(t)`` by contour inversion of the step-pulse transform.

    The Bromwich line is folded onto the two banks of the cut
    ``s = -i y, y > 1`` plus the residue at the pole. On the banks
    ``sqrt(1 - is) = +-i u`` with ``y = 1 + u^2``; the bank integral is then
    taken along the ray ``u = exp(-i pi/4) v`` (no singularity lies between
    the ray and the real axis) with exp-sinh quadrature.
    """
    if not (0 < t <= 50):
        raise ValueError("inversion supports 0 < t <= 50")
    if r == 0.0:
        return 1.0 + 0j
    s_star = laplace_pole(r)
    total = 1.0 + 0j
    if s_star is not None:
        dD = 1.0 - r / (2.0 * (r + 1.0))
        res = (np.exp(s_star * t) - 1.0) / s_star * r / dD
        total += 2j * res
    rot = np.conj(EIPI4)

    def bank_difference(v):
        u = rot * v
        s = -1j * (1.0 + u * u)
        left = r / (s - r * 1j * (1.0 + 1j * u))  # sqrt(1 - is) -> +iu
        right = r / (s - r * 1j * (1.0 - 1j * u))
        g = (np.exp(s * t) - 1.0) / s
        return g * (left - right) * 2.0 * u * rot

    try:
        val = exp_sinh(bank_difference, tol=tol)
    except QuadratureError as exc:
        raise QuadratureError(f"contour quadrature failed for r={r}, t={t}: {exc}") from exc
    # Bromwich = 2 pi i Res - i int_1^inf (F_left - F_right) dy
    return complex(total - 1j / math.pi * val)
