"""Grid scanning and bisection shared by the eigenvalue searches."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import optimize


def n_threads() -> int:
    """Worker cap from ``GPBOUND_THREADS`` (defaults to the CPU count)."""
    raw = os.environ.get("GPBOUND_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def grid_map(fn: Callable[[float], float], grid: Iterable[float]) -> list:
    """``[fn(x) for x in grid]``, threaded when allowed; order is preserved."""
    items = list(grid)
    workers = min(n_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def safe(fn: Callable[[float], float]) -> Callable[[float], float]:
    """Wrap ``fn`` so domain failures turn into NaN (no sign information)."""

    def wrapped(x):
        try:
            v = float(fn(x))
        except (ValueError, ArithmeticError):
            return math.nan
        return v

    return wrapped


@dataclass(frozen=True)
class Root:
    E: float
    bracket: tuple[float, float]
    iterations: int
    residual: float = math.nan

    def as_dict(self) -> dict:
        return {"E": self.E, "bracket": list(self.bracket), "iterations": self.iterations}


def bisect(fn: Callable[[float], float], a: float, b: float, xtol: float = 1e-14) -> tuple[float, int]:
    """Bisection on a bracketed sign change; returns ``(root, iterations)``."""
    x, res = optimize.bisect(fn, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=400, full_output=True, disp=False)
    return float(x), int(res.iterations)


def sign_change_roots(
    fn: Callable[[float], float],
    grid: Sequence[float],
    values: Sequence[float] | None = None,
    xtol: float = 1e-14,
    accept: Callable[[float, float], bool] | None = None,
) -> list[Root]:
    """Bracket sign changes of ``fn`` on ``grid`` and refine each by bisection.

    NaN samples break brackets.  ``accept(E, value_at_E)`` can veto spurious
    crossings (e.g. jumps through a divergence).
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.asarray(grid_map(fn, grid) if values is None else values, dtype=float)
    roots = []
    for i in range(len(grid) - 1):
        fa, fb = vals[i], vals[i + 1]
        if not (np.isfinite(fa) and np.isfinite(fb)):
            continue
        if fa == 0.0:
            roots.append(Root(float(grid[i]), (float(grid[i]), float(grid[i])), 0, 0.0))
            continue
        if fa * fb > 0.0:
            continue
        if fb == 0.0:
            continue  # picked up as the left end of the next pair
        x, it = bisect(fn, grid[i], grid[i + 1], xtol)
        fx = float(fn(x))
        if accept is not None and not accept(x, fx):
            continue
        roots.append(Root(x, (float(grid[i]), float(grid[i + 1])), it, fx))
    if len(grid) and np.isfinite(vals[-1]) and vals[-1] == 0.0:
        roots.append(Root(float(grid[-1]), (float(grid[-1]), float(grid[-1])), 0, 0.0))
    return roots
