"""Closed-form bound states for a single delta defect ``alpha_bar * delta(tau)``.

Two families:

* bright solitons (``gamma < 0``): two sech halves glued at the defect,
  pushed apart by a repulsive defect or pulled together by an attractive one;
* the logarithmic-quadrature family (``gamma > 0``, attractive defect): zero
  quasi-energy on both sides, which integrates to
  ``psi = sqrt(2|E|/gamma) * csch(kappa (|tau| + tau_bar))``.

The energy ``E`` is an input; the amplitude at the defect follows from
``E = -alpha_bar^2/4 + gamma psi0^2 / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ImaginaryAmplitudeError, NoBoundStateError, WrongBranchError

BRANCHES = ("bright-repulsive", "bright-attractive", "log-quadrature")


def energy_relation(alpha_bar: float, gamma: float, psi0: float) -> float:
    return -0.25 * alpha_bar**2 + 0.5 * gamma * psi0**2


def amplitude_from_energy(alpha_bar: float, gamma: float, E: float) -> float:
    """Invert the energy relation for the (non-negative) amplitude at the defect."""
    if gamma == 0.0:
        raise DomainError("amplitude is undetermined at gamma = 0")
    sq = 2.0 * (E + 0.25 * alpha_bar**2) / gamma
    if sq < 0.0:
        raise ImaginaryAmplitudeError(f"psi0^2 = {sq:.6g} < 0")
    return math.sqrt(sq)


def alpha_crit(gamma: float, psi0: float) -> float:
    """Largest defect strength that still binds at amplitude ``psi0`` (gamma > 0)."""
    return -math.sqrt(2.0 * gamma) * psi0


def _sech(x):
    return 1.0 / np.cosh(x)


def _csch(x):
    # 2 e^{-x} / (1 - e^{-2x}) avoids overflow of sinh for large x
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        e = np.exp(-x)
        return 2.0 * e / (1.0 - e * e)


@dataclass(frozen=True)
class DeltaSolution:
    alpha_bar: float
    gamma: float
    E: float
    tau_bar: float
    branch: str
    psi0: float

    @property
    def kappa(self) -> float:
        return math.sqrt(-self.E) if self.E < 0 else 0.0

    def psi(self, tau):
        t = np.abs(np.asarray(tau, dtype=float))
        k = self.kappa
        if self.branch == "log-quadrature":
            if self.E == 0.0:
                out = self.psi0 / (1.0 + math.sqrt(0.5 * self.gamma) * self.psi0 * t)
            elif math.isinf(self.tau_bar):
                out = np.zeros_like(t)
            else:
                out = math.sqrt(2.0 * abs(self.E) / self.gamma) * _csch(k * (t + self.tau_bar))
        else:
            A = math.sqrt(2.0 * self.E / self.gamma)
            shift = self.tau_bar if self.branch == "bright-repulsive" else -self.tau_bar
            out = A * _sech(k * (t - shift)) if not math.isinf(shift) else np.zeros_like(t)
        return float(out) if np.ndim(tau) == 0 else out

    def dpsi(self, tau, side: int = 1):
        """Derivative; at ``tau == 0`` ``side`` selects the one-sided limit."""
        tau = np.asarray(tau, dtype=float)
        sgn = np.where(tau > 0, 1.0, np.where(tau < 0, -1.0, float(np.sign(side) or 1)))
        t = np.abs(tau)
        k = self.kappa
        if self.branch == "log-quadrature":
            if self.E == 0.0:
                c = math.sqrt(0.5 * self.gamma)
                d = -c * self.psi0**2 / (1.0 + c * self.psi0 * t) ** 2
            elif math.isinf(self.tau_bar):
                d = np.zeros_like(t)
            else:
                x = k * (t + self.tau_bar)
                d = -k * math.sqrt(2.0 * abs(self.E) / self.gamma) * _csch(x) / np.tanh(x)
        else:
            A = math.sqrt(2.0 * self.E / self.gamma)
            shift = self.tau_bar if self.branch == "bright-repulsive" else -self.tau_bar
            if math.isinf(shift):
                d = np.zeros_like(t)
            else:
                x = k * (t - shift)
                d = -A * k * _sech(x) * np.tanh(x)
        out = sgn * d
        return float(out) if out.ndim == 0 else out

    def jump(self) -> float:
        """``psi'(0+) - psi'(0-) - alpha_bar psi(0)``; zero for a valid solution."""
        return self.dpsi(0.0, +1) - self.dpsi(0.0, -1) - self.alpha_bar * self.psi(0.0)


def solve_bright(alpha_bar: float, gamma: float, E: float) -> DeltaSolution:
    """Bright soliton bound to a delta defect (``gamma < 0``, ``E < 0``).

    Repulsive defects bind only while ``alpha_bar <= 2 sqrt|E|``; the shift
    ``tau_bar`` diverges at that threshold and the two peaks run off.
    """
    if gamma >= 0.0:
        raise WrongBranchError("bright solitons need gamma < 0")
    if not E < 0.0:
        raise DomainError("bound states need E < 0")
    k = math.sqrt(-E)
    ratio = abs(alpha_bar) / (2.0 * k)
    if alpha_bar > 0 and ratio > 1.0:
        raise NoBoundStateError(f"repulsive defect {alpha_bar} exceeds 2 sqrt|E| = {2 * k}")
    if ratio > 1.0:
        # attractive and too strong for this E: psi0^2 would be negative
        raise ImaginaryAmplitudeError(f"|alpha_bar| = {-alpha_bar} exceeds 2 sqrt|E| = {2 * k}")
    if ratio >= 1.0:
        tau_bar = math.inf  # threshold: the wave vanishes
    else:
        tau_bar = math.atanh(ratio) / k
    branch = "bright-repulsive" if alpha_bar >= 0 else "bright-attractive"
    A = math.sqrt(2.0 * E / gamma)
    psi0 = 0.0 if math.isinf(tau_bar) else A / math.cosh(k * tau_bar)
    return DeltaSolution(alpha_bar, gamma, E, tau_bar, branch, psi0)


def solve_log_quadrature(alpha_bar: float, gamma: float, E: float) -> DeltaSolution:
    """Zero-quasi-energy solution for ``gamma > 0`` and an attractive defect.

    ``E == 0`` is the threshold case ``alpha_bar == alpha_crit``, where the
    tail decays algebraically.
    """
    if gamma <= 0.0:
        raise WrongBranchError("the logarithmic-quadrature family needs gamma > 0")
    if E > 0.0:
        raise NoBoundStateError("bound states need E <= 0")
    if alpha_bar >= 0.0:
        raise NoBoundStateError("gamma > 0 needs an attractive defect (alpha_bar < 0)")
    k = math.sqrt(-E)
    if alpha_bar**2 < 4.0 * k * k:
        raise ImaginaryAmplitudeError(f"alpha_bar^2 = {alpha_bar**2:.6g} < 4|E| = {4 * k * k:.6g}")
    psi0 = math.sqrt((alpha_bar**2 - 4.0 * k * k) / (2.0 * gamma))
    if alpha_bar > alpha_crit(gamma, psi0) * (1.0 - 1e-14):
        raise NoBoundStateError(f"alpha_bar = {alpha_bar} above alpha_crit = {alpha_crit(gamma, psi0)}")
    if E == 0.0:
        tau_bar = 0.0
    elif -alpha_bar == 2.0 * k:
        tau_bar = math.inf
    else:
        # coth(kappa tau_bar) = |alpha_bar| / (2 kappa)
        tau_bar = math.atanh(2.0 * k / -alpha_bar) / k
    return DeltaSolution(alpha_bar, gamma, E, tau_bar, "log-quadrature", psi0)


def solve_log_quadrature_amplitude(alpha_bar: float, gamma: float, psi0: float) -> DeltaSolution:
    """Same family, parameterised by the amplitude at the defect.

    Binding requires ``alpha_bar <= alpha_crit(gamma, psi0)``; equality gives
    the ``E = 0`` solution.
    """
    if gamma <= 0.0:
        raise WrongBranchError("the logarithmic-quadrature family needs gamma > 0")
    if psi0 < 0.0:
        raise DomainError("psi0 must be non-negative")
    crit = alpha_crit(gamma, psi0)
    if alpha_bar > crit + 1e-14 * abs(crit):
        raise NoBoundStateError(f"alpha_bar = {alpha_bar} above alpha_crit = {crit}")
    E = energy_relation(alpha_bar, gamma, psi0)
    if E > 0.0:
        # only rounding can land here once alpha_bar <= alpha_crit
        E = 0.0
    if E == 0.0:
        return DeltaSolution(alpha_bar, gamma, 0.0, 0.0, "log-quadrature", psi0)
    return solve_log_quadrature(alpha_bar, gamma, E)


def solve(alpha_bar: float, gamma: float, E: float) -> DeltaSolution:
    """Dispatch on the sign of ``gamma``."""
    if gamma < 0.0:
        return solve_bright(alpha_bar, gamma, E)
    if gamma > 0.0:
        return solve_log_quadrature(alpha_bar, gamma, E)
    raise WrongBranchError("gamma = 0 is the linear problem: E = -alpha_bar^2/4 for alpha_bar < 0")
