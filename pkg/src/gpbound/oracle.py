"""Brute-force reference solvers used to check every closed form and propagator.

Nothing here touches the splitting/transfer-matrix path: waves are integrated
with a classical fourth-order Runge-Kutta scheme on the spinor ODE

    psi' = phi,   phi' = (V - E) psi + g psi^3,

with delta defects inserted as exact derivative jumps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numba
import numpy as np
from scipy.integrate import simpson

from .model import Potential, StateVector, Trajectory, build_mesh, decaying_mismatch, launch_state, window
from .roots import Root, safe, sign_change_roots

_BLOWUP = 1e150
DEFAULT_FD_STEP = 1e-3


@numba.njit(cache=True, nogil=True)
def _rk4_kernel(nodes, vl, vm, vr, kicks, kick_end, E, g, psi, phi, record):
    n = nodes.shape[0] - 1
    size = n + 1 if record else 1
    out_psi = np.full(size, np.nan)
    out_phi = np.full(size, np.nan)
    diverged = False
    for j in range(n):
        phi += kicks[j] * psi
        if record:
            out_psi[j] = psi
            out_phi[j] = phi
        h = nodes[j + 1] - nodes[j]
        a, b, c = vl[j] - E, vm[j] - E, vr[j] - E
        k1p = phi
        k1f = a * psi + g * psi * psi * psi
        p2 = psi + 0.5 * h * k1p
        f2 = phi + 0.5 * h * k1f
        k2p = f2
        k2f = b * p2 + g * p2 * p2 * p2
        p3 = psi + 0.5 * h * k2p
        f3 = phi + 0.5 * h * k2f
        k3p = f3
        k3f = b * p3 + g * p3 * p3 * p3
        p4 = psi + h * k3p
        f4 = phi + h * k3f
        k4p = f4
        k4f = c * p4 + g * p4 * p4 * p4
        psi += h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        phi += h * (k1f + 2.0 * k2f + 2.0 * k3f + k4f) / 6.0
        if not (abs(psi) < _BLOWUP and abs(phi) < _BLOWUP):
            diverged = True
            break
    if not diverged:
        phi += kick_end * psi
        if record:
            out_psi[n] = psi
            out_phi[n] = phi
    if not record:
        out_psi[0] = psi
        out_phi[0] = phi
    return out_psi, out_phi, diverged


def integrate_gp(
    V: Potential,
    E: float,
    g: float,
    s0: StateVector,
    tau_from: float,
    tau_to: float,
    dtau: float = 1e-3,
    include_end: bool = False,
    record: bool = True,
) -> Trajectory:
    """RK4 trajectory from ``s0`` at ``tau_from`` to ``tau_to``.

    Steps are aligned to every breakpoint of ``V`` (walls, deltas, sample
    edges) and are at most ``dtau`` long.  Deltas in ``[tau_from, tau_to)``
    are applied as jumps; recorded states are right limits at each node.
    """
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    n = max(1, math.ceil((tau_to - tau_from) / dtau - 1e-9))
    mesh = build_mesh(V, tau_from, tau_to, n, include_end=include_end)
    psi, phi, div = _rk4_kernel(
        mesh.nodes, mesh.v_left, mesh.v_mid, mesh.v_right, mesh.kicks, mesh.kick_end,
        float(E), float(g), float(s0.psi), float(s0.dpsi), record,
    )
    tau = mesh.nodes if record else mesh.nodes[-1:]
    return Trajectory(tau, psi, phi, diverged=bool(div))


integrate = integrate_gp


def second_derivative(wave: Callable, tau, h: float = DEFAULT_FD_STEP):
    """Five-point central second difference."""
    t = np.asarray(tau, dtype=float)
    return (-wave(t + 2 * h) + 16 * wave(t + h) - 30 * wave(t) + 16 * wave(t - h) - wave(t - 2 * h)) / (12 * h * h)


def gp_residual(wave: Callable, V: Potential, E: float, g: float, grid, h: float = DEFAULT_FD_STEP) -> float:
    """``max |-psi'' + (V + g psi^2) psi - E psi|`` over ``grid``.

    Grid points closer than ``2.5 h`` to a breakpoint of ``V`` (wall or
    delta) are skipped because the stencil would straddle the jump.
    """
    t = np.asarray(grid, dtype=float)
    brk = V.breakpoints()
    if brk.size:
        dist = np.min(np.abs(t[:, None] - brk[None, :]), axis=1)
        t = t[dist > 2.5 * h]
    if t.size == 0:
        return 0.0
    psi = wave(t)
    res = -second_derivative(wave, t, h) + (V.value(t) + g * psi**2) * psi - E * psi
    return float(np.max(np.abs(res)))


@dataclass(frozen=True)
class ParticleNumber:
    N: float
    tail: float
    tail_warning: bool


def particle_number(wave: Callable, tau_range: tuple[float, float], dtau: float = 1e-3) -> ParticleNumber:
    """Simpson integral of ``psi^2`` plus an exponential estimate of the two tails."""
    a, b = tau_range
    n = max(2, math.ceil((b - a) / dtau))
    n += n % 2
    t = np.linspace(a, b, n + 1)
    dens = np.asarray(wave(t), dtype=float) ** 2
    N = float(simpson(dens, x=t))
    tail, warn = 0.0, False
    step = t[1] - t[0]
    for end, inner in ((dens[0], dens[1]), (dens[-1], dens[-2])):
        if end == 0.0:
            continue
        if end >= inner:
            warn = True
            continue
        rate = math.log(inner / end) / step  # decay rate of psi^2
        tail += end / rate
    if tail > 1e-12:
        warn = True
    return ParticleNumber(N + tail, tail, warn)


# ---------------------------------------------------------------------------
# shooting


def shooting_mismatch(
    V: Potential,
    E: float,
    g: float,
    psi_seed: float = 1.0,
    parity: str | None = None,
    anchor: float | None = None,
    tau_max: float = 20.0,
    dtau: float = 1e-3,
) -> float:
    """Boundary mismatch whose zeros are bound-state energies (NaN on blow-up)."""
    if not E < 0:
        return math.nan
    try:
        left, s0 = launch_state(V, E, g, psi_seed, anchor, tau_max)
    except (ValueError, ArithmeticError):
        return math.nan
    _, right = window(V, tau_max)
    if parity is None:
        tr = integrate_gp(V, E, g, s0, left, right, dtau, include_end=True, record=False)
        if tr.diverged:
            return math.nan
        return decaying_mismatch(tr.final, E, g)
    center = 0.5 * (left + right)
    tr = integrate_gp(V, E, g, s0, left, center, dtau, record=False)
    if tr.diverged:
        return math.nan
    s = tr.final
    norm = math.hypot(s.psi, s.dpsi)
    if parity == "symmetric":
        half_kick = 0.5 * sum(d.strength for d in V.deltas if d.at == center)
        return (s.dpsi + half_kick * s.psi) / norm
    if parity == "antisymmetric":
        return s.psi / norm
    raise ValueError(f"unknown parity {parity!r}")


def shooting_eigenvalues(
    V: Potential,
    g: float,
    psi_seed: float,
    parity: str | None,
    E_range: tuple[float, float],
    n_grid: int = 200,
    anchor: float | None = None,
    tau_max: float = 20.0,
    dtau: float = 1e-3,
    accept_tol: float = 1e-6,
) -> list[Root]:
    """Energies where the RK4 shooting mismatch changes sign.

    ``parity`` (``"symmetric"``/``"antisymmetric"``) shoots to the centre of a
    mirror-symmetric potential; ``None`` shoots across the whole support.
    """
    grid = np.linspace(E_range[0], E_range[1], n_grid)
    fn = safe(lambda E: shooting_mismatch(V, E, g, psi_seed, parity, anchor, tau_max, dtau))
    return sign_change_roots(fn, grid, accept=lambda E, f: abs(f) <= accept_tol)
