"""Command-line front end.

Every command writes plain data into ``--out-dir``: CSV with a one-line
header for sampled curves and JSON for scalars and manifests.  A JSON summary
is also printed on stdout.  Exit status: 0 success, 1 verification failure,
2 invalid input, 3 no solution found.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import delta_defect, oracle, propagator, square_well
from .errors import DomainError, GPBoundError, NoBoundStateError, PotentialSchemaError
from .model import Potential, QuasiParams, Segment, StateVector, critical_points, window

EXIT_OK, EXIT_VERIFY, EXIT_INVALID, EXIT_NO_SOLUTION = 0, 1, 2, 3


class NoSolution(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    out_dir: Path
    root_tol: float = 1e-10
    residual_tol: float = 1e-7
    tau_max: float = propagator.DEFAULT_TAU_MAX
    n_steps: int = propagator.DEFAULT_STEPS
    length_scale: float | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("root_tol", "residual_tol", "tau_max"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.n_steps < 1:
            raise DomainError("n_steps must be >= 1")
        if self.length_scale is not None and not self.length_scale > 0:
            raise DomainError("length_scale must be positive")


# ---------------------------------------------------------------------------
# output helpers


def _num(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: Sequence[str], columns: Sequence) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) if not isinstance(v, (bool, np.bool_)) else int(v) for v in row])


def _write_wave(cfg: RunConfig, name: str, tau, psi, dpsi, sidecar: dict) -> str:
    tau = np.asarray(tau, dtype=float)
    header, cols = ["tau", "psi", "dpsi"], [tau, psi, dpsi]
    if cfg.length_scale is not None:
        header.append("x")
        cols.append(tau / cfg.length_scale)
    path = cfg.out_dir / f"{name}.csv"
    _write_csv(path, header, cols)
    _write_json(path.with_suffix(".json"), sidecar)
    return path.name


# ---------------------------------------------------------------------------
# commands


def cmd_delta(cfg: RunConfig) -> dict:
    p = cfg.params
    sol = delta_defect.solve(p["alpha"], p["gamma"], p["energy"])
    lo, hi = p["tau_range"]
    tau = np.linspace(lo, hi, p["points"])
    pn = oracle.particle_number(sol.psi, (lo, hi))
    V = Potential.single_delta(sol.alpha_bar)
    meta = {
        "alpha_bar": sol.alpha_bar,
        "gamma": sol.gamma,
        "E": sol.E,
        "branch": sol.branch,
        "tau_bar": _num(sol.tau_bar),
        "psi0": sol.psi0,
        "N": pn.N,
        "N_tail_warning": pn.tail_warning,
        "jump_residual": sol.jump(),
    }
    wave = _write_wave(cfg, "delta_wave", tau, sol.psi(tau), sol.dpsi(tau), {"potential": V.to_dict(), "E": sol.E, "g": sol.gamma})
    meta["wave_file"] = wave
    _write_json(cfg.out_dir / "delta.json", meta)
    return meta


def cmd_well(cfg: RunConfig) -> dict:
    p = cfg.params
    wc = square_well.WellConfig(p["v0"], p["tau0"], p["g"], p["phi_b"])
    parities = square_well.PARITIES if p["parity"] == "both" else (p["parity"],)
    E_range = None if p["e_min"] is None and p["e_max"] is None else (
        -wc.V0 if p["e_min"] is None else p["e_min"],
        0.0 if p["e_max"] is None else p["e_max"],
    )
    V = Potential.square_well(wc.V0, wc.tau0)
    states = []
    for par in parities:
        states += square_well.quantization_scan(wc, par, E_range, p["n_grid"])
    if not states:
        raise NoSolution("no quantization crossing in the scanned energy window")
    span = wc.tau0 + p["tail"]
    tau = np.linspace(-span, span, p["points"])
    out = []
    for s in states:
        name = f"well_{s.parity}_n{s.n}"
        wave = _write_wave(cfg, name, tau, s.psi(tau), s.dpsi(tau), {"potential": V.to_dict(), "E": s.E, "g": wc.g})
        pn = oracle.particle_number(s.psi, (-span, span))
        out.append({
            "E": s.E,
            "n": s.n,
            "parity": s.parity,
            "parity_residual": s.parity_residual(),
            "N": pn.N,
            "bracket": list(s.bracket),
            "iterations": s.iterations,
            "wave_file": wave,
        })
    doc = {"V0": wc.V0, "tau0": wc.tau0, "g": wc.g, "phi_b": wc.phi_b, "states": out}
    _write_json(cfg.out_dir / "well.json", doc)
    return doc


def cmd_scan(cfg: RunConfig) -> dict:
    p = cfg.params
    grid = np.linspace(p["e_min"], p["e_max"], p["steps"])
    if p["potential"] is None:
        if p["v0"] is None:
            raise DomainError("scan needs --potential, or --v0/--tau0/--phi-b for the quantization phase")
        wc = square_well.WellConfig(p["v0"], p["tau0"], p["g"], p["phi_b"])
        Q = np.array([square_well.quantization_phase(wc, E) for E in grid])
        _write_csv(cfg.out_dir / "scan.csv", ["E", "Q"], [grid, Q])
        states = []
        for par in square_well.PARITIES:
            states += square_well.quantization_scan(wc, par, (grid[0], grid[-1]), p["steps"])
        roots = [{"E": s.E, "n": s.n, "parity": s.parity, "bracket": list(s.bracket), "iterations": s.iterations} for s in states]
        doc = {"kind": "quantization", "roots": sorted(roots, key=lambda r: r["E"])}
    else:
        V = Potential.load(p["potential"])
        sc = propagator.find_spectrum(
            V,
            grid,
            g=p["g"],
            psi_seed=p["psi_seed"],
            tau_max=cfg.tau_max,
            n_steps=p["n_steps"] or (cfg.n_steps if p["g"] != 0 else None),
            root_tol=cfg.root_tol,
            anchor=p["anchor"],
            scheme=p["scheme"],
        )
        sc.write_csv(cfg.out_dir / "scan.csv")
        doc = sc.manifest()
    _write_json(cfg.out_dir / "roots.json", doc)
    if not doc["roots"]:
        raise NoSolution("no root in the scanned energy window")
    return doc


def cmd_wave(cfg: RunConfig) -> dict:
    p = cfg.params
    V = Potential.load(p["potential"])
    E, g = p["energy"], p["g"]
    left, s0 = oracle.launch_state(V, E, g, p["psi_seed"], p["anchor"], cfg.tau_max)
    lo, hi = p["tau_range"] or (left, window(V, cfg.tau_max)[1])
    if lo < left:
        raise DomainError(f"tau range must start inside the launch point {left}")
    if lo > left:
        pre = oracle.integrate_gp(V, E, g, s0, left, lo, p["dtau"], record=False)
        s0 = pre.final
    if p["method"] == "rk4":
        tr = oracle.integrate_gp(V, E, g, s0, lo, hi, p["dtau"], include_end=True)
    else:
        n = max(1, math.ceil((hi - lo) / p["dtau"]))
        tr = propagator.trotter_propagate(s0, V, E, g, lo, hi, n, p["scheme"], include_end=True)
    wave = _write_wave(cfg, "wave", tr.tau, tr.psi, tr.dpsi, {"potential": V.to_dict(), "E": E, "g": g})
    return {"wave_file": wave, "diverged": tr.diverged, "points": len(tr)}


def cmd_phase(cfg: RunConfig) -> dict:
    p = cfg.params
    q = QuasiParams(p["energy"], p["g"])
    pts = critical_points(q, p["v"])
    lo, hi = p["tau_range"]
    flat = Potential(segments=(Segment(lo, hi, p["v"]),)) if p["v"] != 0 else Potential()
    tr = oracle.integrate_gp(flat, q.E, q.g, StateVector(p["x0"], p["p0"]), lo, hi, p["dtau"])
    path = cfg.out_dir / "phase.csv"
    _write_csv(path, ["tau", "X", "P"], [tr.tau, tr.psi, tr.dpsi])
    doc = {
        "E": q.E,
        "g": q.g,
        "V": p["v"],
        "critical_points": [
            {"x": c.x, "p": c.p, "kind": c.kind, "stability": c.stability, "eigenvalue_sq": c.eigenvalue_sq} for c in pts
        ],
        "trajectory_file": path.name,
        "diverged": tr.diverged,
    }
    _write_json(cfg.out_dir / "phase.json", doc)
    return doc


def cmd_curve(cfg: RunConfig) -> dict:
    p = cfg.params
    gs = np.linspace(p["g_min"], p["g_max"], p["g_steps"])
    curve = square_well.energy_vs_g_curve(
        p["v0"], p["tau0"], p["phi_b"], p["parity"], p["n"], gs, p["slope_step"], p["n_grid"]
    )
    _write_csv(cfg.out_dir / "curve.csv", ["g", "E", "truncated"], [curve.g, curve.E, curve.truncated])
    s = curve.slopes
    doc = {
        "V0": p["v0"],
        "tau0": p["tau0"],
        "phi_b": p["phi_b"],
        "parity": p["parity"],
        "n": p["n"],
        "truncated_at": [float(g) for g, t in zip(curve.g, curve.truncated) if t],
        "slopes": None
        if s is None
        else {
            "h": s.h,
            "plus": s.plus,
            "minus": s.minus,
            "noise_floor": s.noise_floor,
            "kink": s.kink,
            "kink_significant": s.significant,
        },
    }
    _write_json(cfg.out_dir / "curve.json", doc)
    return doc


# ---------------------------------------------------------------------------
# verification


def _sample_residual(tau, psi, V: Potential, E: float, g: float) -> float:
    """Five-point residual on the samples themselves; only evenly spaced stencils count."""
    tau, psi = np.asarray(tau), np.asarray(psi)
    if len(tau) < 5:
        return math.nan
    h = tau[2:-2] - tau[1:-3]
    even = np.ones(len(h), dtype=bool)
    for a, b in ((0, 1), (1, 2), (3, 4)):
        dh = tau[b : len(tau) - 4 + b] - tau[a : len(tau) - 4 + a]
        even &= np.abs(dh - h) <= 1e-9 * np.abs(h)
    t = tau[2:-2]
    brk = V.breakpoints()
    if brk.size:
        even &= np.min(np.abs(t[:, None] - brk[None, :]), axis=1) > 2.5 * np.abs(h)
    d2 = (-psi[4:] + 16 * psi[3:-1] - 30 * psi[2:-2] + 16 * psi[1:-3] - psi[:-4]) / (12 * h * h)
    res = -d2 + (V.value(t) + g * psi[2:-2] ** 2) * psi[2:-2] - E * psi[2:-2]
    res = np.abs(res[even])
    return float(res.max()) if res.size else math.nan


def verify_wave(path: Path, tol: float) -> tuple[bool, float]:
    meta = json.loads(path.with_suffix(".json").read_text())
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    V = Potential.from_dict(meta["potential"])
    r = _sample_residual(data[:, 0], data[:, 1], V, meta["E"], meta["g"])
    return bool(np.isfinite(r) and r <= tol), r


def builtin_checks(cfg: RunConfig) -> list[tuple[str, bool, float, float]]:
    """(name, passed, value, tolerance) rows of the built-in oracle suite."""
    rows = []
    grid = np.linspace(-5, 5, 1001)
    sol = delta_defect.solve_bright(1.0, -1.0, -1.0)
    r = oracle.gp_residual(sol.psi, Potential.single_delta(1.0), -1.0, -1.0, grid)
    rows.append(("delta bright residual", r <= cfg.residual_tol, r, cfg.residual_tol))
    sol = delta_defect.solve_log_quadrature(-2.0, 1.0, -0.5)
    r = oracle.gp_residual(sol.psi, Potential.single_delta(-2.0), -0.5, 1.0, grid)
    rows.append(("delta log-quadrature residual", r <= cfg.residual_tol, r, cfg.residual_tol))

    V = Potential.square_well(6.0, 1.0)
    ref = square_well.linear_levels(6.0, 1.0)
    ref_all = sorted(ref["symmetric"] + ref["antisymmetric"])
    sc = propagator.find_spectrum(V, np.linspace(-5.99, -0.01, 300), root_tol=cfg.root_tol)
    err = max(abs(a.E - b) for a, b in zip(sc.roots, ref_all)) if len(sc.roots) == len(ref_all) else math.inf
    rows.append(("linear well spectrum vs transcendental roots", err <= 1e-8, err, 1e-8))
    sh = oracle.shooting_eigenvalues(V, 0.0, 1.0, None, (-5.99, -0.01), 200)
    err = max(abs(a.E - b) for a, b in zip(sh, ref_all)) if len(sh) == len(ref_all) else math.inf
    rows.append(("linear well shooting vs transcendental roots", err <= 1e-8, err, 1e-8))

    wc = square_well.WellConfig(6.0, 1.0, 4.0, 0.5)
    st = square_well.quantization_scan(wc, "symmetric")
    if st:
        s = st[0]
        r = oracle.gp_residual(s.psi, V, s.E, wc.g, np.linspace(-4, 4, 801))
        rows.append(("well g=4 ground-state residual", r <= cfg.residual_tol, r, cfg.residual_tol))
        sh = oracle.shooting_eigenvalues(V, 4.0, 0.5, "symmetric", (s.E - 0.05, s.E + 0.05), 5, anchor=-1.0)
        err = abs(sh[0].E - s.E) if sh else math.inf
        rows.append(("well g=4 ground state vs shooting", err <= 1e-6, err, 1e-6))
    else:
        rows.append(("well g=4 ground state exists", False, math.nan, 0.0))
    return rows


def cmd_verify(cfg: RunConfig) -> dict:
    rows = []
    for w in cfg.params.get("wave") or []:
        ok, r = verify_wave(Path(w), cfg.residual_tol)
        rows.append((f"residual {Path(w).name}", ok, r, cfg.residual_tol))
    if not cfg.params.get("wave") or cfg.params.get("suite"):
        rows += builtin_checks(cfg)
    width = max(len(r[0]) for r in rows)
    for name, ok, val, tol in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {val:.3e}  (tol {tol:.1e})", file=sys.stderr)
    doc = {"checks": [{"name": n, "passed": bool(ok), "value": _num(v), "tol": t} for n, ok, v, t in rows]}
    doc["passed"] = all(c["passed"] for c in doc["checks"])
    _write_json(cfg.out_dir / "verify.json", doc)
    return doc


COMMANDS = {
    "delta": cmd_delta,
    "well": cmd_well,
    "scan": cmd_scan,
    "wave": cmd_wave,
    "phase": cmd_phase,
    "curve": cmd_curve,
    "verify": cmd_verify,
}


def run(cfg: RunConfig) -> int:
    """Dispatch one command and map failures onto exit codes."""
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        doc = COMMANDS[cfg.command](cfg)
    except NoSolution as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except NoBoundStateError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (PotentialSchemaError, DomainError, GPBoundError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(json.dumps(doc, indent=2, sort_keys=True))
    if cfg.command == "verify" and not doc["passed"]:
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _range(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    if not b > a:
        raise argparse.ArgumentTypeError("need LO < HI")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", type=Path, default=Path("."), help="directory for output files")
    common.add_argument("--root-tol", type=float, default=1e-10)
    common.add_argument("--residual-tol", type=float, default=1e-7)
    common.add_argument("--tau-max", type=float, default=propagator.DEFAULT_TAU_MAX)
    common.add_argument("--length-scale", type=float, default=None, help="l = sqrt(2m)/hbar; adds a column x = tau / l")

    ap = argparse.ArgumentParser(prog="gpbound", description="Bound states of the 1D stationary GP equation.")
    sub = ap.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("delta", parents=[common], formatter_class=fmt, help="closed-form delta-defect state",
                       description="Writes delta_wave.csv (tau,psi,dpsi[,x]), its JSON sidecar and delta.json.")
    p.add_argument("--alpha", type=float, required=True, help="defect strength alpha_bar")
    p.add_argument("--gamma", type=float, required=True, help="coupling gamma")
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--tau-range", type=_range, default=(-20.0, 20.0))
    p.add_argument("--points", type=int, default=4001)

    p = sub.add_parser("well", parents=[common], formatter_class=fmt, help="square-well bound states",
                       description="Writes well.json and one well_<parity>_n<n>.csv (tau,psi,dpsi[,x]) per state.")
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--tau0", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--phi-b", type=float, required=True, help="wave amplitude at the walls")
    p.add_argument("--parity", choices=("symmetric", "antisymmetric", "both"), default="both")
    p.add_argument("--e-min", type=float, default=None, help="below -V0 is allowed for g < 0")
    p.add_argument("--e-max", type=float, default=None)
    p.add_argument("--n-grid", type=int, default=400)
    p.add_argument("--tail", type=float, default=8.0, help="exterior length written on each side")
    p.add_argument("--points", type=int, default=4001)

    p = sub.add_parser("scan", parents=[common], formatter_class=fmt, help="spectral scan",
                       description="With --potential: scan.csv (E,F) and roots.json. "
                       "With --v0/--tau0/--phi-b: scan.csv (E,Q) of the quantization phase and roots.json.")
    p.add_argument("--potential", type=Path, default=None, help="potential JSON document")
    p.add_argument("--g", type=float, default=0.0)
    p.add_argument("--e-min", type=float, required=True)
    p.add_argument("--e-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=600)
    p.add_argument("--psi-seed", type=float, default=1.0)
    p.add_argument("--anchor", type=float, default=None, help="where the seed amplitude is imposed (default -tau-max)")
    p.add_argument("--n-steps", type=int, default=None)
    p.add_argument("--scheme", choices=propagator.SCHEMES, default="lie")
    p.add_argument("--v0", type=float, default=None)
    p.add_argument("--tau0", type=float, default=1.0)
    p.add_argument("--phi-b", type=float, default=0.5)

    p = sub.add_parser("wave", parents=[common], formatter_class=fmt, help="integrate a wave through a potential",
                       description="Writes wave.csv (tau,psi,dpsi[,x]) and its JSON sidecar.")
    p.add_argument("--potential", type=Path, required=True)
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--g", type=float, default=0.0)
    p.add_argument("--psi-seed", type=float, default=1.0)
    p.add_argument("--anchor", type=float, default=None)
    p.add_argument("--tau-range", type=_range, default=None)
    p.add_argument("--dtau", type=float, default=1e-3)
    p.add_argument("--method", choices=("rk4", "trotter"), default="rk4")
    p.add_argument("--scheme", choices=propagator.SCHEMES, default="lie")

    p = sub.add_parser("phase", parents=[common], formatter_class=fmt, help="phase-space trajectory and equilibria",
                       description="Writes phase.csv (tau,X,P) and phase.json with the critical points.")
    p.add_argument("--energy", type=float, required=True)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--v", type=float, default=0.0, help="local potential value")
    p.add_argument("--x0", type=float, default=0.1)
    p.add_argument("--p0", type=float, default=0.0)
    p.add_argument("--tau-range", type=_range, default=(0.0, 10.0))
    p.add_argument("--dtau", type=float, default=1e-3)

    p = sub.add_parser("curve", parents=[common], formatter_class=fmt, help="energy against coupling",
                       description="Writes curve.csv (g,E,truncated) and curve.json with one-sided slopes at g = 0.")
    p.add_argument("--v0", type=float, required=True)
    p.add_argument("--tau0", type=float, required=True)
    p.add_argument("--phi-b", type=float, required=True)
    p.add_argument("--parity", choices=square_well.PARITIES, default="symmetric")
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--g-min", type=float, default=-1.0)
    p.add_argument("--g-max", type=float, default=4.0)
    p.add_argument("--g-steps", type=int, default=51)
    p.add_argument("--slope-step", type=float, default=1e-2)
    p.add_argument("--n-grid", type=int, default=400)

    p = sub.add_parser("verify", parents=[common], formatter_class=fmt, help="oracle checks",
                       description="Prints a PASS/FAIL table on stderr and writes verify.json.")
    p.add_argument("--wave", type=Path, action="append", help="wave CSV with JSON sidecar to check (repeatable)")
    p.add_argument("--suite", action="store_true", help="also run the built-in suite when --wave is given")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    shared = {"command", "out_dir", "root_tol", "residual_tol", "tau_max", "length_scale"}
    params = {k: v for k, v in vars(ns).items() if k not in shared}
    return RunConfig(
        command=ns.command,
        out_dir=ns.out_dir,
        root_tol=ns.root_tol,
        residual_tol=ns.residual_tol,
        tau_max=ns.tau_max,
        length_scale=ns.length_scale,
        params=params,
    )


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except DomainError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
