"""Transfer matrices, ordered exponentials, Trotter products and spectral functions.

States are ordered ``(psi', psi)``, derivative first.  On an interval of
constant potential the linear flow is ``r' = M r`` with
``M = [[0, V - E], [1, 0]]``.  A delta of strength ``v`` is the shear
``[[1, v], [0, 1]]``, and the cubic term acts over a step ``dtau`` like a
delta of strength ``g psi^2 dtau``.

A smooth potential is layered into a comb of constant slices.  Bound-state
energies are the zeros of the growing-mode coefficient left over when the
decaying tail from the far left is carried across the potential.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
from scipy import optimize

from .errors import DomainError
from .model import (
    Potential,
    StateVector,
    Trajectory,
    build_mesh,
    decay_rate,
    decaying_mismatch,
    launch_state,
    window,
)
from .roots import Root, grid_map, sign_change_roots

_BLOWUP = 1e150
# beyond this |(V-E) dtau^2| the closed form is used instead of the series
_SERIES_LIMIT = 1e-3
DEFAULT_STEPS = 100_000
DEFAULT_TAU_MAX = 20.0
SCHEMES = ("lie", "strang")


# ---------------------------------------------------------------------------
# 2x2 algebra


@dataclass(frozen=True)
class TransferMatrix:
    m11: float
    m12: float
    m21: float
    m22: float

    @classmethod
    def identity(cls) -> "TransferMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, a) -> "TransferMatrix":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0, 0]), float(a[0, 1]), float(a[1, 0]), float(a[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def apply(self, s: StateVector) -> StateVector:
        return StateVector(self.m21 * s.dpsi + self.m22 * s.psi, self.m11 * s.dpsi + self.m12 * s.psi)


@numba.njit(cache=True, nogil=True)
def _interval(w2, d):
    # (cosh, w sinh, sinh / w) of w d, analytically continued for w2 < 0
    z = w2 * d * d
    if abs(z) < _SERIES_LIMIT:
        c = 1.0 + z / 2.0 * (1.0 + z / 12.0 * (1.0 + z / 30.0 * (1.0 + z / 56.0)))
        sw = d * (1.0 + z / 6.0 * (1.0 + z / 20.0 * (1.0 + z / 42.0 * (1.0 + z / 72.0))))
    elif w2 > 0.0:
        w = math.sqrt(w2)
        c = math.cosh(w * d)
        sw = math.sinh(w * d) / w
    else:
        w = math.sqrt(-w2)
        c = math.cos(w * d)
        sw = math.sin(w * d) / w
    return c, w2 * sw, sw


def interval_propagator(V_const: float, E: float, dtau: float) -> TransferMatrix:
    """Exact ``exp(dtau M)`` on a slice of constant potential."""
    if dtau < 0:
        raise DomainError("dtau must be non-negative")
    c, ws, sw = _interval(float(V_const) - float(E), float(dtau))
    return TransferMatrix(c, ws, sw, c)


def delta_kick(strength: float) -> TransferMatrix:
    """Derivative jump ``psi' -> psi' + strength psi``."""
    return TransferMatrix(1.0, float(strength), 0.0, 1.0)


@dataclass(frozen=True)
class CombLayering:
    """Uniform Dirac comb: a kick ``V(tau_i) dtau`` at each ``tau_i = start + i dtau``."""

    positions: np.ndarray
    strengths: np.ndarray
    dtau: float

    @property
    def N(self) -> int:
        return len(self.positions)


def comb_layering(V: Potential, tau_from: float, tau_to: float, n_steps: int) -> CombLayering:
    """Midpoint comb of the continuous part of ``V``; deltas are added at the nearest tooth."""
    if n_steps < 1 or not tau_to > tau_from:
        raise DomainError("need n_steps >= 1 and tau_to > tau_from")
    dtau = (tau_to - tau_from) / n_steps
    pos = tau_from + (np.arange(n_steps) + 0.5) * dtau
    strengths = V.value(pos) * dtau
    for d in V.deltas_in(tau_from, tau_to):
        strengths[min(n_steps - 1, int((d.at - tau_from) / dtau))] += d.strength
    return CombLayering(pos, strengths, dtau)


@numba.njit(cache=True, nogil=True)
def _product_kernel(nodes, vm, kicks, kick_end, E):
    a11, a12, a21, a22 = 1.0, 0.0, 0.0, 1.0
    for j in range(nodes.shape[0] - 1):
        k = kicks[j]
        if k != 0.0:
            a11 += k * a21
            a12 += k * a22
        c, ws, sw = _interval(vm[j] - E, nodes[j + 1] - nodes[j])
        a11, a12, a21, a22 = c * a11 + ws * a21, c * a12 + ws * a22, sw * a11 + c * a21, sw * a12 + c * a22
    if kick_end != 0.0:
        a11 += kick_end * a21
        a12 += kick_end * a22
    return a11, a12, a21, a22


def ordered_exponential(
    V: Potential, E: float, tau_from: float, tau_to: float, n_steps: int = 1000, include_end: bool = False
) -> TransferMatrix:
    """Position-ordered product of slice propagators and delta kicks over ``[tau_from, tau_to)``.

    Slices are aligned to every breakpoint of ``V``, so piecewise-constant
    potentials are propagated exactly for any ``n_steps``.
    """
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")
    if tau_to == tau_from:
        k = sum(d.strength for d in V.deltas if d.at == tau_from) if include_end else 0.0
        return delta_kick(k)
    if tau_to < tau_from:
        raise DomainError("ordered_exponential runs forward in tau")
    mesh = build_mesh(V, tau_from, tau_to, n_steps, include_end=include_end)
    return TransferMatrix(*_product_kernel(mesh.nodes, mesh.v_mid, mesh.kicks, mesh.kick_end, float(E)))


# ---------------------------------------------------------------------------
# linear spectral function


@numba.njit(cache=True, nogil=True)
def _linear_state_kernel(nodes, vm, kicks, kick_end, E, phi, psi):
    log_scale = 0.0
    for j in range(nodes.shape[0] - 1):
        phi += kicks[j] * psi
        c, ws, sw = _interval(vm[j] - E, nodes[j + 1] - nodes[j])
        phi, psi = c * phi + ws * psi, sw * phi + c * psi
        n = abs(phi) + abs(psi)
        if n > 1e100 or (n < 1e-100 and n > 0.0):
            phi /= n
            psi /= n
            log_scale += math.log(n)
    phi += kick_end * psi
    return phi, psi, log_scale


def propagate_linear(
    V: Potential, E: float, s0: StateVector, tau_from: float, tau_to: float, n_steps: int = 1000
) -> tuple[StateVector, float]:
    """Carry ``s0`` across ``[tau_from, tau_to]`` (deltas at both ends included).

    The state is renormalised on the way; the physical state is
    ``exp(scale_log) * state``.
    """
    mesh = build_mesh(V, tau_from, tau_to, n_steps, include_end=True)
    phi, psi, log_scale = _linear_state_kernel(
        mesh.nodes, mesh.v_mid, mesh.kicks, mesh.kick_end, float(E), float(s0.dpsi), float(s0.psi)
    )
    return StateVector(psi, phi), log_scale


def _growing_coefficient(s: StateVector, kappa: float) -> float:
    norm = math.hypot(s.psi, s.dpsi)
    return 0.0 if norm == 0.0 else (s.dpsi + kappa * s.psi) / (2.0 * kappa * norm)


def spectral_function_linear_signed(
    V: Potential, E: float, tau_max: float = DEFAULT_TAU_MAX, n_steps: int = 1000, seed: float = 1.0
) -> float:
    kappa = decay_rate(E)
    left, right = window(V, tau_max)
    s0 = StateVector(seed, kappa * seed)
    s, _ = propagate_linear(V, E, s0, left, right, n_steps)
    return _growing_coefficient(s, kappa)


def spectral_function_linear(
    V: Potential, E: float, tau_max: float = DEFAULT_TAU_MAX, n_steps: int = 1000, seed: float = 1.0
) -> float:
    """Normalised growing-mode coefficient on the right; zero exactly at eigenvalues.

    The decaying tail ``(psi', psi) = seed (kappa, 1)`` is launched at the
    left edge of the potential.  Because the exterior is flat, carrying it in
    from ``-tau_max`` would only rescale it.
    """
    return abs(spectral_function_linear_signed(V, E, tau_max, n_steps, seed))


# ---------------------------------------------------------------------------
# nonlinear splitting


@numba.njit(cache=True, nogil=True)
def _trotter_kernel(nodes, vm, kicks, kick_end, E, g, phi, psi, strang, record):
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
        d = nodes[j + 1] - nodes[j]
        if strang:
            phi += 0.5 * d * g * psi * psi * psi
        else:
            phi += d * g * psi * psi * psi
        c, ws, sw = _interval(vm[j] - E, d)
        phi, psi = c * phi + ws * psi, sw * phi + c * psi
        if strang:
            phi += 0.5 * d * g * psi * psi * psi
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


def nonlinear_kick(s: StateVector, g: float, dtau: float) -> StateVector:
    """``I + dtau g psi^2 sigma``: the cubic term frozen at the current amplitude."""
    return StateVector(s.psi, s.dpsi + dtau * g * s.psi**3)


def nonlinear_step(
    s: StateVector, V_local: float, E: float, g: float, dtau: float, scheme: str = "lie"
) -> StateVector:
    """One splitting step: cubic kick, then the exact linear slice.

    ``scheme="strang"`` uses half kicks on both sides of the slice instead.
    """
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}")
    R = interval_propagator(V_local, E, dtau)
    if scheme == "lie":
        return R.apply(nonlinear_kick(s, g, dtau))
    return nonlinear_kick(R.apply(nonlinear_kick(s, g, 0.5 * dtau)), g, 0.5 * dtau)


def trotter_propagate(
    s0: StateVector,
    V: Potential,
    E: float,
    g: float,
    tau_from: float,
    tau_to: float,
    n_steps: int = DEFAULT_STEPS,
    scheme: str = "lie",
    include_end: bool = False,
    record: bool = True,
) -> Trajectory:
    """Ordered Trotter product over ``n_steps`` slices (breakpoint aligned).

    Stops with ``diverged=True`` once ``|psi|`` or ``|psi'|`` passes 1e150.
    """
    if scheme not in SCHEMES:
        raise DomainError(f"scheme must be one of {SCHEMES}")
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")
    mesh = build_mesh(V, tau_from, tau_to, n_steps, include_end=include_end)
    psi, phi, div = _trotter_kernel(
        mesh.nodes, mesh.v_mid, mesh.kicks, mesh.kick_end, float(E), float(g),
        float(s0.dpsi), float(s0.psi), scheme == "strang", record,
    )
    tau = mesh.nodes if record else mesh.nodes[-1:]
    return Trajectory(tau, psi, phi, diverged=bool(div))


# blow-up is reported as this signed value so brackets stay usable
DIVERGED_F = 1e3


def spectral_function_nonlinear_signed(
    V: Potential,
    E: float,
    g: float,
    psi_seed: float = 1.0,
    tau_max: float = DEFAULT_TAU_MAX,
    n_steps: int = DEFAULT_STEPS,
    anchor: float | None = None,
    scheme: str = "lie",
) -> float:
    left, s0 = launch_state(V, E, g, psi_seed, anchor, tau_max)
    _, right = window(V, tau_max)
    tr = trotter_propagate(s0, V, E, g, left, right, n_steps, scheme, include_end=True, record=False)
    if tr.diverged:
        last = tr.psi[-1] if np.isfinite(tr.psi[-1]) else 1.0
        return math.copysign(DIVERGED_F, last)
    return decaying_mismatch(tr.final, E, g)


def spectral_function_nonlinear(
    V: Potential,
    E: float,
    g: float,
    psi_seed: float = 1.0,
    tau_max: float = DEFAULT_TAU_MAX,
    n_steps: int = DEFAULT_STEPS,
    anchor: float | None = None,
    scheme: str = "lie",
) -> float:
    """Distance of the right-hand state from the decaying manifold, after a Trotter sweep.

    The launch is the exact decaying tail with amplitude ``psi_seed`` at
    ``anchor`` (default ``-tau_max``).  Amplitude matters here, so zeros are
    bound states at that amplitude only.
    """
    return abs(spectral_function_nonlinear_signed(V, E, g, psi_seed, tau_max, n_steps, anchor, scheme))


# ---------------------------------------------------------------------------
# scans


@dataclass
class SpectralScan:
    E: np.ndarray
    F: np.ndarray
    roots: list[Root] = field(default_factory=list)
    kind: str = "linear"

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["E", "F"])
            for e, f in zip(self.E, self.F):
                w.writerow([repr(float(e)), repr(float(f))])

    def manifest(self) -> dict:
        return {"kind": self.kind, "roots": [r.as_dict() for r in self.roots]}

    def write_manifest(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.manifest(), indent=2) + "\n")


def _refine_minimum(fn, a: float, b: float, xtol: float) -> float:
    res = optimize.minimize_scalar(fn, bounds=(a, b), method="bounded", options={"xatol": xtol})
    return float(res.x)


def find_spectrum(
    V: Potential,
    E_grid,
    g: float = 0.0,
    psi_seed: float = 1.0,
    tau_max: float = DEFAULT_TAU_MAX,
    n_steps: int | None = None,
    kind: str | None = None,
    root_tol: float = 1e-10,
    bracket_tol: float = 1e-3,
    xtol: float = 1e-14,
    anchor: float | None = None,
    scheme: str = "lie",
    richardson: bool | None = None,
) -> SpectralScan:
    """Sample ``F`` on ``E_grid`` and refine its zeros.

    Sign changes of the signed growing-mode coefficient are bisected.  Local
    minima of ``F`` that dip below ``bracket_tol`` without a sign change are
    refined by bounded minimisation.  A root is kept only if
    ``F <= root_tol`` there.

    With ``richardson`` on (the default for the nonlinear Lie scheme) every
    root is recomputed on a mesh twice as fine and extrapolated as
    ``2 E(2n) - E(n)``, which cancels the first-order splitting error.
    """
    E_grid = np.asarray(E_grid, dtype=float)
    if E_grid.ndim != 1 or len(E_grid) < 2 or np.any(np.diff(E_grid) <= 0):
        raise DomainError("E_grid must be sorted with at least 2 points")
    kind = kind or ("linear" if g == 0.0 else "nonlinear")
    if richardson is None:
        richardson = kind == "nonlinear" and scheme == "lie"
    if kind == "linear":
        steps = n_steps or 1000

        def signed_at(E, steps=steps):
            return spectral_function_linear_signed(V, E, tau_max, steps, psi_seed)
    else:
        steps = n_steps or DEFAULT_STEPS

        def signed_at(E, steps=steps):
            return spectral_function_nonlinear_signed(V, E, g, psi_seed, tau_max, steps, anchor, scheme)

    def safe_signed(E, steps=steps):
        try:
            return signed_at(E, steps)
        except (ValueError, ArithmeticError):
            return math.nan

    signed = np.asarray(grid_map(safe_signed, E_grid), dtype=float)
    F = np.abs(signed)
    roots = sign_change_roots(safe_signed, E_grid, signed, xtol, accept=lambda E, f: abs(f) <= root_tol)
    taken = [r.bracket for r in roots]
    for i in range(1, len(E_grid) - 1):
        if not (F[i] <= F[i - 1] and F[i] <= F[i + 1] and F[i] < bracket_tol):
            continue
        if signed[i - 1] * signed[i] <= 0 or signed[i] * signed[i + 1] <= 0:
            continue  # already handled as a sign change
        x = _refine_minimum(lambda E: abs(safe_signed(E)), E_grid[i - 1], E_grid[i + 1], xtol)
        fx = abs(safe_signed(x))
        if fx <= root_tol and all(not (a <= x <= b) for a, b in taken):
            roots.append(Root(x, (float(E_grid[i - 1]), float(E_grid[i + 1])), 0, fx))
    if richardson and kind == "nonlinear":
        refined = []
        for r in roots:
            fine = lambda E: safe_signed(E, 2 * steps)
            a, b = r.bracket
            if fine(a) * fine(b) < 0:
                x2, _ = optimize.bisect(fine, a, b, xtol=xtol, full_output=True, disp=False)
                refined.append(Root(2.0 * float(x2) - r.E, r.bracket, r.iterations, r.residual))
            else:
                refined.append(r)
        roots = refined
    roots.sort(key=lambda r: r.E)
    return SpectralScan(E_grid, F, roots, kind)
