"""Bound states of the GP equation in a finite square well.

The well is ``V = -V0`` on ``|tau| <= tau0`` and zero outside.  The wave is
pinned to the amplitude ``phi_b`` at the left wall.  Outside, it sits on the
zero-quasi-energy decaying tail.  Inside, the quasi-energy is
``U = V0 phi_b^2 / 2``, and ``eta = psi^2`` obeys ``eta'^2 = 2 P(eta)`` with

    P(eta) = eta (g eta^2 - 2 (E + V0) eta + 2 V0 phi_b^2).

The interior wave is a Jacobi sn (``g > 0``) or cn (``g < 0``) whose phase
``alpha`` sets the quantization: ``alpha(0) = n pi`` for symmetric states
and ``(n + 1/2) pi`` for antisymmetric ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import elliptic
from .errors import BoundaryAmplitudeError, DomainError, NoTurningPointError
from .model import exterior_tail as _tail
from .roots import bisect, grid_map

PARITIES = ("symmetric", "antisymmetric")
# keeps E away from the turning-point degeneracies at -V0 and 0
EDGE_MARGIN = 1e-12


@dataclass(frozen=True)
class WellConfig:
    V0: float
    tau0: float
    g: float
    phi_b: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.V0, self.tau0, self.g, self.phi_b)):
            raise DomainError("well parameters must be finite")
        if self.V0 <= 0 or self.tau0 <= 0 or self.phi_b <= 0:
            raise DomainError("need V0 > 0, tau0 > 0 and phi_b > 0")

    def with_g(self, g: float) -> "WellConfig":
        return WellConfig(self.V0, self.tau0, g, self.phi_b)


@dataclass(frozen=True)
class EtaRoots:
    eta1: float
    eta2: float
    eta3: float


def cubic(cfg: WellConfig, E: float, eta):
    """``P(eta)``; its roots are the turning points of ``psi^2``."""
    eta = np.asarray(eta, dtype=float)
    out = eta * (cfg.g * eta**2 - 2.0 * (E + cfg.V0) * eta + 2.0 * cfg.V0 * cfg.phi_b**2)
    return float(out) if out.ndim == 0 else out


def eta_roots(cfg: WellConfig, E: float) -> EtaRoots:
    """Closed-form turning points of ``eta = psi^2`` inside the well.

    The small root is formed from the product of the non-zero roots so that
    it stays accurate as ``g -> 0``.
    """
    g = cfg.g
    if g == 0.0:
        raise DomainError("the cubic degenerates at g = 0; use the linear well")
    b = E + cfg.V0
    c = 2.0 * cfg.V0 * cfg.phi_b**2
    if g > 0:
        disc = b * b - g * c
        if disc < 0.0 or b <= 0.0:
            raise NoTurningPointError(f"no real interior turning points at E = {E} (discriminant {disc:.6g})")
        big = b + math.sqrt(disc)
        return EtaRoots(0.0, c / big, big / g)
    # sqrt(disc) > |b|, so big > 0 for either sign of b
    big = b + math.sqrt(b * b + abs(g) * c)
    eta1, eta3 = -big / abs(g), c / big
    return EtaRoots(eta1, 0.0, eta3)


@dataclass(frozen=True)
class InteriorWave:
    """Interior solution ``psi = amp * f(k (tau + tau0) + u0; m)`` and its phase."""

    kind: str  # sn | cn | cos
    amp: float
    k: float
    m: float
    u0: float
    tau0: float

    def _u(self, tau):
        return self.k * (np.asarray(tau, dtype=float) + self.tau0) + self.u0

    def alpha(self, tau):
        u = self._u(tau)
        if self.kind == "cos":
            return u
        am = elliptic.jacobi_am(u, self.m)
        return am - 0.5 * np.pi if self.kind == "sn" else am

    def psi(self, tau):
        return self.amp * np.cos(self.alpha(tau))

    def dpsi(self, tau):
        u = self._u(tau)
        if self.kind == "cos":
            return -self.amp * self.k * np.sin(u)
        t = elliptic.jacobi_sn_cn_dn(u, self.m)
        if self.kind == "sn":
            return self.amp * self.k * t.cn * t.dn
        return -self.amp * self.k * t.sn * t.dn


def interior_wave(cfg: WellConfig, E: float) -> InteriorWave:
    """Interior solution leaving the left wall with amplitude ``phi_b``.

    The slope at the wall is positive, matching the exterior tail that grows
    toward the well.
    """
    if not E < 0 or (cfg.g >= 0 and not E > -cfg.V0):
        # for g < 0 the cn wave stays valid below the well bottom
        raise DomainError(f"E = {E} outside the bound-state window")
    if cfg.g == 0.0:
        k = math.sqrt(E + cfg.V0)
        amp = cfg.phi_b * math.sqrt(cfg.V0) / k
        return InteriorWave("cos", amp, k, 0.0, -math.acos(min(1.0, k / math.sqrt(cfg.V0))), cfg.tau0)
    r = eta_roots(cfg, E)
    phi2 = cfg.phi_b**2
    if cfg.g > 0:
        if phi2 > r.eta2 * (1.0 + 1e-14):
            raise BoundaryAmplitudeError(f"phi_b^2 = {phi2:.6g} exceeds eta2 = {r.eta2:.6g}")
        m = math.sqrt(min(1.0, r.eta2 / r.eta3))
        k = math.sqrt(0.5 * cfg.g * r.eta3)
        u0 = elliptic.ellip_F(math.asin(min(1.0, cfg.phi_b / math.sqrt(r.eta2))), m)
        return InteriorWave("sn", math.sqrt(r.eta2), k, m, u0, cfg.tau0)
    if phi2 > r.eta3 * (1.0 + 1e-14):
        raise BoundaryAmplitudeError(f"phi_b^2 = {phi2:.6g} exceeds eta3 = {r.eta3:.6g}")
    span = r.eta3 - r.eta1
    m = math.sqrt(min(1.0, r.eta3 / span))
    k = math.sqrt(0.5 * abs(cfg.g) * span)
    u0 = -elliptic.ellip_F(math.asin(math.sqrt(max(0.0, 1.0 - phi2 / r.eta3))), m)
    return InteriorWave("cn", math.sqrt(r.eta3), k, m, u0, cfg.tau0)


def alpha_interior(cfg: WellConfig, E: float, tau):
    """Interior phase ``alpha(tau)``; the wave is ``amplitude * cos(alpha)``."""
    return interior_wave(cfg, E).alpha(tau)


def exterior_tail(cfg: WellConfig, E: float, tau):
    """Decaying tail on the left (``tau <= -tau0``) equal to ``phi_b`` at the wall."""
    psi, _ = _tail(E, cfg.g, cfg.phi_b, np.asarray(tau, dtype=float) + cfg.tau0)
    return psi


def quantization_phase(cfg: WellConfig, E: float) -> float:
    """``Q(E) = alpha(0)``; NaN where no interior wave exists."""
    try:
        return float(interior_wave(cfg, E).alpha(0.0))
    except (DomainError, NoTurningPointError, BoundaryAmplitudeError):
        return math.nan


def _target(parity: str, n: int) -> float:
    return (n + (0.5 if parity == "antisymmetric" else 0.0)) * math.pi


@dataclass(frozen=True)
class WellBoundState:
    E: float
    n: int
    parity: str
    cfg: WellConfig
    interior: InteriorWave = field(repr=False)
    bracket: tuple[float, float] = (math.nan, math.nan)
    iterations: int = 0

    @property
    def sign(self) -> float:
        return 1.0 if self.parity == "symmetric" else -1.0

    def psi(self, tau):
        t = np.asarray(tau, dtype=float)
        out = np.empty_like(t)
        a = self.cfg.tau0
        left, right, mid = t < -a, t > a, (t >= -a) & (t <= a)
        if np.any(left):
            out[left] = _tail(self.E, self.cfg.g, self.cfg.phi_b, t[left] + a)[0]
        if np.any(right):
            out[right] = self.sign * _tail(self.E, self.cfg.g, self.cfg.phi_b, a - t[right])[0]
        if np.any(mid):
            out[mid] = self.interior.psi(t[mid])
        return float(out) if out.ndim == 0 else out

    def dpsi(self, tau):
        t = np.asarray(tau, dtype=float)
        out = np.empty_like(t)
        a = self.cfg.tau0
        left, right, mid = t < -a, t > a, (t >= -a) & (t <= a)
        if np.any(left):
            out[left] = _tail(self.E, self.cfg.g, self.cfg.phi_b, t[left] + a)[1]
        if np.any(right):
            out[right] = -self.sign * _tail(self.E, self.cfg.g, self.cfg.phi_b, a - t[right])[1]
        if np.any(mid):
            out[mid] = self.interior.dpsi(t[mid])
        return float(out) if out.ndim == 0 else out

    def parity_residual(self) -> float:
        """``psi'(0)`` for symmetric states, ``psi(0)`` for antisymmetric ones."""
        return float(self.interior.dpsi(0.0) if self.parity == "symmetric" else self.interior.psi(0.0))

    def wall_mismatch(self) -> tuple[float, float]:
        """Interior minus exterior ``(psi, psi')`` at the right wall."""
        a = self.cfg.tau0
        ext_psi, ext_d = _tail(self.E, self.cfg.g, self.cfg.phi_b, 0.0)
        return (
            float(self.interior.psi(a)) - self.sign * ext_psi,
            float(self.interior.dpsi(a)) + self.sign * ext_d,
        )


def default_range(cfg: WellConfig) -> tuple[float, float]:
    return -cfg.V0 + EDGE_MARGIN * max(1.0, cfg.V0), -EDGE_MARGIN


def quantization_scan(
    cfg: WellConfig,
    parity: str,
    E_range: tuple[float, float] | None = None,
    n_grid: int = 400,
    xtol: float = 1e-14,
) -> list[WellBoundState]:
    """Graphic method: sample ``Q(E)`` and bisect every crossing of a quantization level.

    The default window is ``(-V0, 0)``.  For ``g < 0`` an explicit ``E_range``
    may reach below ``-V0``, where attractive states with a large wall
    amplitude live.
    """
    if parity not in PARITIES:
        raise DomainError(f"parity must be one of {PARITIES}")
    if n_grid < 2:
        raise DomainError("n_grid must be at least 2")
    lo, hi = default_range(cfg)
    if E_range is not None:
        lo = E_range[0] if cfg.g < 0 else max(lo, E_range[0])
        hi = min(hi, E_range[1])
    if not lo < hi:
        return []
    grid = np.linspace(lo, hi, n_grid)
    Q = np.asarray(grid_map(lambda E: quantization_phase(cfg, E), grid))
    offset = 0.5 if parity == "antisymmetric" else 0.0
    states = []
    for i in range(n_grid - 1):
        qa, qb = Q[i], Q[i + 1]
        if not (np.isfinite(qa) and np.isfinite(qb)):
            continue
        lo_q, hi_q = min(qa, qb), max(qa, qb)
        for n in range(max(0, math.ceil(lo_q / math.pi - offset)), math.floor(hi_q / math.pi - offset) + 1):
            target = _target(parity, n)
            if target == qb and i + 1 < n_grid - 1:
                continue  # counted as the left end of the next pair
            fn = lambda E, t=target: quantization_phase(cfg, E) - t
            if qa == target:
                E, it = float(grid[i]), 0
            elif qb == target:
                E, it = float(grid[i + 1]), 0
            else:
                E, it = bisect(fn, grid[i], grid[i + 1], xtol)
            states.append(
                WellBoundState(E, n, parity, cfg, interior_wave(cfg, E), (float(grid[i]), float(grid[i + 1])), it)
            )
    states.sort(key=lambda s: (s.n, s.E))
    return states


def linear_levels(V0: float, tau0: float) -> dict[str, list[float]]:
    """Eigenvalues of the linear well from ``k tan(k tau0) = kappa`` and its cotangent partner.

    Independent of the elliptic path; used as the reference at ``g = 0``.
    """
    from scipy import optimize

    def even(E):
        k, kap = math.sqrt(E + V0), math.sqrt(-E)
        return k * math.sin(k * tau0) - kap * math.cos(k * tau0)

    def odd(E):
        k, kap = math.sqrt(E + V0), math.sqrt(-E)
        return k * math.cos(k * tau0) + kap * math.sin(k * tau0)

    out = {}
    grid = np.linspace(-V0 + 1e-13 * V0, -1e-13, 4001)
    for name, fn in (("symmetric", even), ("antisymmetric", odd)):
        vals = [fn(E) for E in grid]
        found = []
        for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
            if fa == 0.0:
                found.append(float(a))
            elif fa * fb < 0:
                found.append(float(optimize.brentq(fn, a, b, xtol=1e-15, rtol=1e-15)))
        out[name] = found
    return out


def level_energy(
    cfg: WellConfig,
    parity: str,
    n: int,
    n_grid: int = 400,
    E_range: tuple[float, float] | None = None,
    near: float | None = None,
) -> float:
    """Energy of level ``n`` (the one closest to ``near``, else the lowest); NaN if unbound."""
    Es = [s.E for s in quantization_scan(cfg, parity, E_range, n_grid) if s.n == n]
    if not Es:
        return math.nan
    return min(Es) if near is None else min(Es, key=lambda E: abs(E - near))


@dataclass(frozen=True)
class SlopeReport:
    """One-sided derivatives of a sampled function at a point.

    ``plus``/``minus`` are Richardson-extrapolated slopes from steps
    ``h, h/2, h/4``.  ``noise_floor`` is how much each extrapolated slope
    still moves under that refinement.  ``kink`` is ``|plus - minus|``.
    """

    h: float
    plus: float
    minus: float
    raw_plus: tuple[float, ...]
    raw_minus: tuple[float, ...]
    noise_floor: float
    kink: float

    @property
    def significant(self) -> bool:
        return self.kink > 10.0 * self.noise_floor


def one_sided_slopes(fn, x0: float = 0.0, h: float = 1e-2, f0: float | None = None) -> SlopeReport:
    f0 = fn(x0) if f0 is None else f0
    steps = (h, h / 2, h / 4)
    dp = tuple((fn(x0 + s) - f0) / s for s in steps)
    dm = tuple((f0 - fn(x0 - s)) / s for s in steps)
    # first-order error in the step, so one Richardson pass per halving
    rp = (2 * dp[1] - dp[0], 2 * dp[2] - dp[1])
    rm = (2 * dm[1] - dm[0], 2 * dm[2] - dm[1])
    floor = max(abs(rp[1] - rp[0]), abs(rm[1] - rm[0]))
    return SlopeReport(h, rp[1], rm[1], dp, dm, floor, abs(rp[1] - rm[1]))


@dataclass(frozen=True)
class EnergyCurve:
    g: np.ndarray
    E: np.ndarray
    truncated: np.ndarray  # level unbound at that g
    slopes: SlopeReport | None


def energy_vs_g_curve(
    V0: float,
    tau0: float,
    phi_b: float,
    parity: str,
    n: int,
    g_values,
    slope_step: float | None = 1e-2,
    n_grid: int = 400,
) -> EnergyCurve:
    """Level ``n`` as a function of the coupling, with one-sided slopes at ``g = 0``.

    The level is followed by continuation outward from the linear value, so
    for ``g < 0`` it may be tracked below ``-V0``.
    """
    base = WellConfig(V0, tau0, 0.0, phi_b)
    gs = np.asarray(g_values, dtype=float)
    E0 = level_energy(base, parity, n, n_grid)
    wide = (-V0 * 4.0, -EDGE_MARGIN)

    def at(g: float, near: float) -> float:
        if g == 0.0:
            return E0
        return level_energy(base.with_g(g), parity, n, n_grid, wide if g < 0 else None, near)

    Es = np.full(gs.shape, np.nan)
    order = np.argsort(np.abs(gs), kind="stable")
    last = {1: E0, -1: E0}
    for i in order:
        side = 1 if gs[i] >= 0 else -1
        prev = last[side]
        if not np.isfinite(prev):
            continue  # level already lost on this side
        Es[i] = at(float(gs[i]), prev)
        last[side] = Es[i]
    slopes = None
    if slope_step is not None and np.isfinite(E0):
        slopes = one_sided_slopes(lambda g: at(g, E0), 0.0, slope_step, E0)
    return EnergyCurve(gs, Es, ~np.isfinite(Es), slopes)
