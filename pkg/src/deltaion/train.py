"""Periodic trains of short rectangular pulses.

A train is ``n_pulses`` copies of a pulse of height ``r`` and width ``tau``,
repeated with period ``sigma``. In the short-pulse regime the per-pulse
integrals ``J_n = int_pulse Y dt`` obey the geometric law
``J_n ~ rho (1 + 2i rho)^n``, so the survival probability decays
exponentially with rate ``2 gamma`` per pulse. The full solution is obtained
from the Volterra engine and compared against that law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .volterra import PulseProgram, VolterraProblem, solve

MARGIN = 50.0  # factor standing in for ">>" in the validity condition
_C = 3.0 * math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class TrainSpec:
    r: float
    tau: float
    sigma: float = 1.0
    n_pulses: int = 100

    def __post_init__(self):
        if not (0 < self.tau <= 0.05):
            raise ValueError("tau must lie in (0, 0.05]")
        if self.sigma < 1:
            raise ValueError("sigma must be >= 1")
        if not self.tau < self.sigma:
            raise ValueError("tau must be smaller than sigma")
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ValueError("n_pulses must be a positive integer")

    @property
    def program(self) -> PulseProgram:
        return PulseProgram.train(self.r, self.tau, self.sigma, int(self.n_pulses))


@dataclass
class TrainDiagnostics:
    rho: complex
    gamma: float
    J: np.ndarray
    theta_n: np.ndarray
    validity_horizon: int
    path: str = "simplified"
    times: np.ndarray | None = None
    reference: np.ndarray | None = None  # simplified theta_n on the same pulses

    @property
    def survival(self) -> np.ndarray:
        return np.abs(self.theta_n) ** 2

    def decay_fit(self, n_max: int | None = None):
        """Least-squares slope of ``log |theta_n|^2`` against ``n`` with its standard error."""
        from scipy import stats

        n = np.arange(1, self.theta_n.size + 1)
        P = self.survival
        if n_max is not None:
            n, P = n[:n_max], P[:n_max]
        res = stats.linregress(n, np.log(P))
        return float(res.slope), float(res.stderr)

    def max_deviation(self) -> float | None:
        if self.reference is None:
            return None
        return float(np.max(np.abs(self.theta_n - self.reference)))


def rho_gamma(r: float, tau: float) -> tuple[complex, float]:
    """Per-pulse amplitude ``rho`` and decay rate ``gamma``."""
    rho = r * tau * (1 + 4 * r * math.sqrt(tau) * (1 + 1j) / _C)
    gamma = 8 * r * r * tau**1.5 / _C
    return complex(rho), float(gamma)


def k_m(m: float) -> float:
    """``sqrt(pi) Gamma(m+1) / Gamma(m+3/2)``."""
    return math.sqrt(math.pi) * math.exp(math.lgamma(m + 1) - math.lgamma(m + 1.5))


def validity_horizon(spec: TrainSpec) -> int:
    """Largest ``n`` with ``exp(-n gamma) >= MARGIN * n * tau^2``.

    For ``r = 0`` nothing decays and the horizon is the train length.
    """
    _, gamma = rho_gamma(spec.r, spec.tau)
    if gamma == 0:
        return int(spec.n_pulses)
    c = MARGIN * spec.tau**2

    def ok(n):
        return math.exp(-n * gamma) >= c * n

    if not ok(1):
        return 0
    hi = 2
    while ok(hi):
        hi *= 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def simplified_train(spec: TrainSpec) -> TrainDiagnostics:
    """Geometric solution ``J_n = rho (1 + 2i rho)^n`` and the resulting ``theta_n``."""
    rho, gamma = rho_gamma(spec.r, spec.tau)
    n = np.arange(int(spec.n_pulses))
    J = rho * (1 + 2j * rho) ** n
    theta = 1 + 2j * np.cumsum(J)
    return TrainDiagnostics(rho, gamma, J, theta, validity_horizon(spec), "simplified")


def full_train_survival(spec: TrainSpec, nodes_per_pulse: int = 40, tolerance: float = 1e-6) -> TrainDiagnostics:
    """Exact ``theta`` at every pulse end from a full memory-kernel solve."""
    if spec.n_pulses * spec.sigma > 1e3:
        raise ValueError("n_pulses * sigma must not exceed 1e3")
    n = int(spec.n_pulses)
    t_end = (n - 1) * spec.sigma + spec.tau
    sol = solve(VolterraProblem(spec.program, t_end, step=spec.tau / nodes_per_pulse, tolerance=tolerance))
    ends = np.arange(n) * spec.sigma + spec.tau
    theta = sol.theta(ends)
    # J_n^0 is the integral of Y over pulse n
    J = np.diff(np.concatenate([[1.0], theta])) / 2j
    ref = simplified_train(spec)
    return TrainDiagnostics(ref.rho, ref.gamma, J, theta, ref.validity_horizon, "volterra", ends, ref.theta_n)
