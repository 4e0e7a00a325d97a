"""Jacobi elliptic functions and the incomplete integral of the first kind.

Every function here takes the elliptic *modulus* ``m`` (often written k in
references).  The "parameter" used by scipy, mpmath and DLMF tables is
``m**2``; convert before cross-checking, e.g.
``scipy.special.ellipkinc(phi, m**2) == ellip_F(phi, m)``.

With this convention ``y = sn(u; m)`` solves ``y'' = 2 m^2 y^3 - (1 + m^2) y``.

Arguments ``u`` and ``phi`` may be scalars or numpy arrays; the modulus is
always a scalar.  Scalars in give floats out.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DivergenceError, DomainError

# below this modulus the first-order series in m^2 is exact to double precision
_SERIES_MODULUS = 1e-8
# complete_K refuses moduli this close to 1
_K_LIMIT = 1.0 - 1e-14
_RF_ERRTOL = 8e-4


@dataclass(frozen=True)
class EllipticTriple:
    sn: float | np.ndarray
    cn: float | np.ndarray
    dn: float | np.ndarray


def _check_modulus(m: float, allow_one: bool = False) -> float:
    m = float(m)
    if not np.isfinite(m) or m < 0.0 or m > 1.0 or (m == 1.0 and not allow_one):
        raise DomainError(f"modulus must lie in [0, 1{']' if allow_one else ')'}, got {m!r}")
    return m


def _complementary(m: float) -> float:
    # sqrt(1 - m^2) without cancellation near m = 1
    return float(np.sqrt((1.0 - m) * (1.0 + m)))


def _scalarize(x, like):
    return float(x) if np.ndim(like) == 0 else x


@lru_cache(maxsize=256)
def _landen(m: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """AGM sequences (a_n, c_n) of the descending Landen transformation."""
    a, b, c = 1.0, _complementary(m), m
    aa, cc = [a], [c]
    for _ in range(64):
        if abs(c) <= 1e-17 * a:
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        aa.append(float(a))
        cc.append(float(c))
    return tuple(aa), tuple(cc)


def complete_K(m: float) -> float:
    """Complete elliptic integral of the first kind by arithmetic-geometric mean."""
    m = _check_modulus(m, allow_one=True)
    if m >= _K_LIMIT:
        raise DivergenceError(f"K(m) diverges as m -> 1 (m = {m!r})")
    a, _ = _landen(m)
    return float(np.pi / (2.0 * a[-1]))


def _carlson_rf(x, y, z):
    x, y, z = (np.array(v, dtype=float, copy=True) for v in np.broadcast_arrays(x, y, z))
    for _ in range(100):
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * (sy + sz) + sy * sz
        x, y, z = 0.25 * (x + lam), 0.25 * (y + lam), 0.25 * (z + lam)
        ave = (x + y + z) / 3.0
        dx, dy, dz = (ave - x) / ave, (ave - y) / ave, (ave - z) / ave
        if np.max(np.abs([dx, dy, dz])) < _RF_ERRTOL:
            break
    e2 = dx * dy - dz * dz
    e3 = dx * dy * dz
    return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / np.sqrt(ave)


def ellip_F(phi, m: float):
    """Incomplete elliptic integral ``F(phi, m) = int_0^phi dt / sqrt(1 - m^2 sin^2 t)``.

    ``phi`` outside [-pi/2, pi/2] is reduced with ``F(phi + j pi) = F(phi) + 2 j K``.
    At ``m == 1`` only ``|phi| < pi/2`` is finite.
    """
    m = _check_modulus(m, allow_one=True)
    phi_arr = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi_arr)):
        raise DomainError("phi must be finite")
    if m == 1.0:
        if np.any(np.abs(phi_arr) >= np.pi / 2):
            raise DivergenceError("F(phi, 1) diverges for |phi| >= pi/2")
        return _scalarize(np.arctanh(np.sin(phi_arr)), phi)
    j = np.rint(phi_arr / np.pi)
    r = phi_arr - j * np.pi
    s, c = np.sin(r), np.cos(r)
    kp2 = (1.0 - m) * (1.0 + m)
    # 1 - m^2 s^2 written as c^2 + k'^2 s^2 stays accurate near m = 1
    out = s * _carlson_rf(c * c, c * c + kp2 * s * s, 1.0)
    if np.any(j != 0):
        out = out + 2.0 * j * complete_K(m)
    return _scalarize(out, phi)


def _am_reduced(r: np.ndarray, m: float) -> np.ndarray:
    # amplitude for |r| <= K(m)
    if m < _SERIES_MODULUS:
        return r - 0.25 * m * m * (r - np.sin(r) * np.cos(r))
    a, c = _landen(m)
    n = len(a) - 1
    phi = (2.0**n) * a[n] * r
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[i] / a[i] * np.sin(phi)))
    return phi


def jacobi_am(u, m: float):
    """Jacobi amplitude, the inverse of ``ellip_F`` in its first argument.

    Continuous and increasing in ``u`` with ``am(u + 2K) = am(u) + pi``.
    """
    m = _check_modulus(m, allow_one=True)
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)):
        raise DomainError("u must be finite")
    if m >= _K_LIMIT:
        # 1 - m^2 < 2e-14: the hyperbolic limit is exact to that order
        return _scalarize(2.0 * np.arctan(np.tanh(0.5 * u_arr)), u)
    if m < _SERIES_MODULUS:
        return _scalarize(_am_reduced(u_arr, m), u)
    K = complete_K(m)
    j = np.rint(u_arr / (2.0 * K))
    am = _am_reduced(u_arr - 2.0 * j * K, m) + j * np.pi
    return _scalarize(am, u)


def jacobi_sn_cn_dn(u, m: float) -> EllipticTriple:
    """``(sn, cn, dn)`` at ``(u, m)``; reduces to ``(tanh, sech, sech)`` at ``m = 1``."""
    m = _check_modulus(m, allow_one=True)
    u_arr = np.asarray(u, dtype=float)
    if m >= _K_LIMIT:
        t = np.tanh(u_arr)
        sech = 1.0 / np.cosh(u_arr)
        return EllipticTriple(_scalarize(t, u), _scalarize(sech, u), _scalarize(sech, u))
    am = np.asarray(jacobi_am(u_arr, m))
    sn, cn = np.sin(am), np.cos(am)
    # 1 - m^2 sn^2 == cn^2 + k'^2 sn^2, free of cancellation
    dn = np.sqrt(cn * cn + (1.0 - m) * (1.0 + m) * sn * sn)
    return EllipticTriple(_scalarize(sn, u), _scalarize(cn, u), _scalarize(dn, u))
