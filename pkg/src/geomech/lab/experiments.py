"""Canned experiments behind the command-line interface.

Each experiment writes its artifacts (trajectory CSVs, events JSON, manifest
JSON, reports) into the output directory and returns a summary dict; the CLI
maps failures onto exit codes.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from dataclasses import dataclass

import numpy as np

from .. import __version__
from ..dynamics import (
    IntegratorOptions,
    critical_entry,
    integrate,
    integrate_planar,
    scatter_batch,
)
from ..errors import ConfigError, GeomechError
from ..fields import PhasePoint, closure_residuals, double_monopole, momentum_monopole_uniform_E
from ..linalg import pfaffian
from ..poisson import (
    angular_momentum,
    cosymplectic_double_monopole,
    cosymplectic_planar,
    jacobi_residual,
)
from .config import ExperimentConfig, InitialsSpec, emit_config
from .generators import build_model, integrator_options, make_initials, random_regular_points, rng_for
from .io import (
    event_record,
    fmt,
    planar_trajectory_csv,
    trajectory_csv,
    write_json,
    write_text,
)

_COORD_NAMES = {6: ("r1", "r2", "r3", "p1", "p2", "p3"),
                4: ("x1", "x2", "p1", "p2")}


# ---------------------------------------------------------------------------
# anomalous shift
# ---------------------------------------------------------------------------

@dataclass
class ShiftResult:
    delta: float                 # measured transverse displacement
    delta_vec: np.ndarray
    target: float                # closed-form 2 theta / p0
    direction_cosine: float      # against E x p0
    status: str                  # ok | inconclusive
    window: float


def shift_experiment(theta: float, p0: float, E_mag: float = 1.0,
                     window_factor: float = 50.0,
                     rel_tol: float = 1e-10) -> ShiftResult:
    """Measure the transverse shift of the momentum-monopole model.

    The particle is integrated over a symmetric momentum window around the
    configuration where p equals p0 x-hat and E is transverse; subtracting
    the exactly known uniform-field parabola from the endpoints isolates the
    anomalous displacement, which is the asymptote offset.
    """
    if p0 <= 0 or E_mag <= 0:
        raise ValueError("p0 and E_mag must be positive")
    E = np.array([0.0, E_mag, 0.0])
    p_center = np.array([p0, 0.0, 0.0])
    model = momentum_monopole_uniform_E(theta=theta, E=E)
    charge = model.params["charge"]
    T = window_factor * p0 / E_mag
    p_start = p_center - charge * E * T

    opts = IntegratorOptions(rel_tol=rel_tol, abs_tol=1e-12)
    initial = PhasePoint(r=np.zeros(3), p=p_start, t=0.0)
    traj = integrate(model, initial, 2.0 * T, opts)
    if traj.t[-1] < 2.0 * T or any(ev.kind != "invariant-drift-alarm"
                                   for ev in traj.events):
        return ShiftResult(delta=float("nan"), delta_vec=np.full(3, np.nan),
                           target=2.0 * theta / p0, direction_cosine=float("nan"),
                           status="inconclusive", window=T)

    final = traj.final_state
    delta_vec = final.r - initial.r - 2.0 * T * p_center
    cross = np.cross(E, p_center)
    # asymptotic only if the anomalous velocity has died off at the ends
    tail_ratio = (p0 / np.linalg.norm(final.p)) ** 3
    status = "ok" if tail_ratio < 1e-3 else "inconclusive"
    delta = float(np.linalg.norm(delta_vec))
    if delta > 0:
        cosang = float(delta_vec @ cross / (delta * np.linalg.norm(cross)))
    else:
        cosang = 0.0
    return ShiftResult(delta=delta, delta_vec=delta_vec,
                       target=2.0 * theta / p0, direction_cosine=cosang,
                       status=status, window=T)


# ---------------------------------------------------------------------------
# bracket tables
# ---------------------------------------------------------------------------

def _structure_builder(name, params):
    if name == "canonical":
        def build(point):
            return cosymplectic_double_monopole(point, 0.0, 0.0)
        return build, 6
    if name == "double-monopole":
        e = float(params.get("e", 1.0))
        theta = float(params.get("theta", 1.0))
        return (lambda point: cosymplectic_double_monopole(point, e, theta)), 6
    if name == "exotic-planar":
        e = float(params.get("e", 1.0))
        theta = float(params.get("theta", 0.5))
        B = float(params.get("B", 1.0))
        return (lambda point: cosymplectic_planar(B, e, theta)), 4
    raise ConfigError(f"unknown structure {name!r}")


def bracket_table(structure: str, points, params=None, step: float = 1e-5):
    """All independent coordinate brackets plus diagnostics, one row per point.

    Singular points are marked in the status column and kept in the table.
    """
    params = params or {}
    build, dim = _structure_builder(structure, params)
    names = _COORD_NAMES[dim]
    pairs = list(itertools.combinations(range(dim), 2))
    rows = []
    for point in points:
        coords = point.coords() if isinstance(point, PhasePoint) else np.asarray(point, float)
        row = {"structure": structure, "status": "ok"}
        for k, name in enumerate(names):
            row[name] = float(coords[k])
        try:
            w = build(point)
            arr = w.A.array
            for a, b in pairs:
                row[f"{{{names[a]},{names[b]}}}"] = float(arr[a, b])
            row["jacobi"] = jacobi_residual(build, point, step)
            row["pfaffian"] = pfaffian(w.A)
            row["degeneracy_factor"] = w.degeneracy_factor
        except GeomechError as exc:
            row["status"] = "singular"
            row["detail"] = str(exc)
            for a, b in pairs:
                row[f"{{{names[a]},{names[b]}}}"] = float("nan")
            row["jacobi"] = row["pfaffian"] = row["degeneracy_factor"] = float("nan")
        rows.append(row)
    return rows


def _bracket_rows_to_csv(rows):
    if not rows:
        return "\n"
    cols = [c for c in rows[0] if c not in ("structure", "status", "detail")]
    header = ["structure", "status"] + cols
    lines = [",".join(header)]
    for row in rows:
        vals = [row["structure"], row["status"]]
        vals += [fmt(row[c]) if not math.isnan(row[c]) else "nan" for c in cols]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# experiment drivers
# ---------------------------------------------------------------------------

def _write_trajectories(out_dir, trajs, planar=False):
    paths = []
    for i, traj in enumerate(trajs):
        path = os.path.join(out_dir, f"trajectory_{i:03d}.csv")
        write_text(path, planar_trajectory_csv(traj) if planar else trajectory_csv(traj))
        paths.append(path)
    return paths


def _events_of(trajs):
    return [event_record(i, ev) for i, traj in enumerate(trajs)
            for ev in traj.events]


def _traj_summary(traj):
    out = {
        "n_samples": int(len(traj.t)),
        "phase": traj.phase,
        "events": [ev.kind for ev in traj.events],
        "max_drift": traj.max_drift() if hasattr(traj, "max_drift") else {},
    }
    if len(traj.t):
        out["final_state"] = {
            "t": float(traj.t[-1]),
            "y": [float(v) for v in traj.y[-1]],
        }
    return out


def _manifest(cfg, started, trajs=None, extra=None):
    man = {
        "config": emit_config(cfg),
        "version": __version__,
        "wall_time_s": time.time() - started,
    }
    if trajs is not None:
        man["trajectories"] = [_traj_summary(t) for t in trajs]
    if extra:
        man.update(extra)
    return man


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Dispatch one experiment; returns a result summary with 'failures' count."""
    started = time.time()
    out_dir = out_dir or cfg.output.dir
    os.makedirs(out_dir, exist_ok=True)
    name = cfg.experiment
    if name == "simulate":
        result = _run_simulate(cfg, out_dir)
    elif name == "scatter":
        result = _run_scatter(cfg, out_dir)
    elif name == "shift":
        result = _run_shift(cfg, out_dir)
    elif name == "capture":
        result = _run_capture(cfg, out_dir)
    elif name == "closure-check":
        result = _run_closure(cfg, out_dir)
    elif name == "brackets":
        result = _run_brackets(cfg, out_dir)
    else:  # pragma: no cover - parse_config guards this
        raise ConfigError(f"unknown experiment {name!r}")
    write_json(os.path.join(out_dir, "manifest.json"),
               _manifest(cfg, started, result.pop("_trajs", None),
                         extra=result.get("report")))
    return result


def _is_failure(traj):
    return any(ev.kind == "domain-exit" or "integrator:" in ev.detail
               for ev in traj.events)


def _run_simulate(cfg, out_dir):
    model = build_model(cfg.model)
    opts = integrator_options(cfg)
    if cfg.model.name == "exotic-planar":
        states = make_initials(cfg, model, opts)
        trajs = [integrate_planar(model, s, cfg.t_end, opts) for s in states]
        _write_trajectories(out_dir, trajs, planar=True)
        write_json(os.path.join(out_dir, "events.json"), _events_of(trajs))
        return {"failures": 0, "_trajs": []}
    initials = make_initials(cfg, model, opts)
    trajs = [integrate(model, ic, cfg.t_end, opts) for ic in initials]
    _write_trajectories(out_dir, trajs)
    write_json(os.path.join(out_dir, "events.json"), _events_of(trajs))
    return {"failures": sum(_is_failure(t) for t in trajs), "_trajs": trajs}


def _run_scatter(cfg, out_dir):
    model = build_model(cfg.model)
    opts = integrator_options(cfg)
    initials = make_initials(cfg, model, opts)
    trajs = scatter_batch(model, initials, cfg.t_end, opts)
    _write_trajectories(out_dir, trajs)
    write_json(os.path.join(out_dir, "events.json"), _events_of(trajs))
    return {"failures": sum(_is_failure(t) for t in trajs), "_trajs": trajs}


def _run_shift(cfg, out_dir):
    kw = dict(cfg.shift)
    res = shift_experiment(theta=float(kw["theta"]), p0=float(kw["p0"]),
                           E_mag=float(kw.get("E_mag", 1.0)),
                           window_factor=float(kw.get("window_factor", 50.0)),
                           rel_tol=cfg.integrator.rel_tol)
    report = {
        "measured_delta": res.delta,
        "delta_vec": list(map(float, res.delta_vec)),
        "target_delta": res.target,
        "relative_error": (abs(res.delta - res.target) / res.target
                           if res.target else 0.0),
        "direction_cosine": res.direction_cosine,
        "status": res.status,
        "window": res.window,
    }
    write_json(os.path.join(out_dir, "shift.json"), report)
    return {"failures": int(res.status != "ok"), "report": {"report": report}}


def _run_capture(cfg, out_dir):
    model = build_model(cfg.model)
    if cfg.model.name != "double-monopole":
        raise ConfigError("config.model.name: the capture experiment needs the double monopole")
    opts = integrator_options(cfg)
    block = dict(cfg.capture)
    energy = float(block.get("energy", 0.5))
    alpha = float(block.get("alpha", math.pi / 2))
    factors = [float(f) for f in block.get("j_factors", [1.0, 1.05, 1.2])]
    refine = bool(block.get("refine", True))

    cfg2 = ExperimentConfig(experiment="scatter", model=cfg.model,
                            t_end=cfg.t_end, integrator=cfg.integrator,
                            output=cfg.output, seed=cfg.seed)
    cfg2.initials = InitialsSpec(kind="angular-momentum", energy=energy,
                                 alpha=alpha, j_factors=factors, refine=refine)
    initials = make_initials(cfg2, model, opts)
    trajs = scatter_batch(model, initials, cfg.t_end, opts)
    _write_trajectories(out_dir, trajs)
    write_json(os.path.join(out_dir, "events.json"), _events_of(trajs))

    e = float(model.params["e"])
    theta = float(model.params["theta"])
    members = []
    for factor, ic, traj in zip(factors, initials, trajs):
        captures = [ev for ev in traj.events if ev.kind == "capture"]
        entry = {}
        if captures:
            ev = captures[0]
            j0 = angular_momentum(ic, e, theta)
            E0 = 0.5 * float(ic.p @ ic.p)
            r_cr, v_cr = critical_entry(j0, E0, e, theta, tol=1e-3)
            entry = {
                "time": ev.time,
                "r_entry": list(map(float, ev.state.r)),
                "r_cr_closed_form": list(map(float, r_cr)),
                "relative_entry_error": float(np.linalg.norm(ev.state.r - r_cr)
                                              / np.linalg.norm(r_cr)),
            }
        members.append({
            "j_factor": factor,
            "initial": {"r": list(map(float, ic.r)), "p": list(map(float, ic.p))},
            "capture_events": len(captures),
            "event_kinds": [ev.kind for ev in traj.events],
            "entry": entry,
        })
    report = {"members": members}
    write_json(os.path.join(out_dir, "capture.json"), report)
    return {"failures": sum(_is_failure(t) for t in trajs), "_trajs": trajs,
            "report": {"report": report}}


def _run_closure(cfg, out_dir):
    block = dict(cfg.closure)
    names = block.get("models", ["double-monopole", "momentum-monopole-uniform-E"])
    n_points = int(block.get("points", 20))
    step = float(block.get("step", 1e-3))
    r_range = block.get("r_range", [1.5, 3.0])
    p_range = block.get("p_range", [1.5, 3.0])
    rng = rng_for(cfg.seed)

    report = {"step": step, "models": {}}
    worst_overall = 0.0
    for name in names:
        if name == "double-monopole":
            model = double_monopole(**{k: float(v) for k, v in
                                       cfg.model.params.items()}) \
                if cfg.model.name == "double-monopole" else double_monopole(1.0, 1.0)
        elif name in ("momentum-monopole-uniform-E", "momentum-monopole"):
            model = momentum_monopole_uniform_E(theta=0.1, E=[0.0, 1.0, 0.0])
        else:
            raise ConfigError(f"config.closure.models: unknown built-in {name!r}")
        pts = random_regular_points(rng, n_points, r_range, p_range)
        worst = 0.0
        ratios = []
        for pt in pts:
            res = closure_residuals(model, pt, step)
            res_half = closure_residuals(model, pt, step / 2.0)
            worst = max(worst, res.max_abs())
            if res.max_abs() > 1e-10:
                ratios.append(res.max_abs() / max(res_half.max_abs(), 1e-300))
        report["models"][model.name] = {
            "points": n_points,
            "max_residual": worst,
            "refinement_ratios": ratios,
        }
        worst_overall = max(worst_overall, worst)
    report["max_residual"] = worst_overall
    report["passed"] = bool(worst_overall <= 1e-6)
    write_json(os.path.join(out_dir, "closure.json"), report)
    return {"failures": 0, "report": {"report": report}}


def _run_brackets(cfg, out_dir):
    block = dict(cfg.brackets)
    structure = block.get("structure", "double-monopole")
    params = dict(block.get("params", {})) or dict(cfg.model.params)
    step = float(block.get("step", 1e-5))
    if "points" in block and block["points"]:
        pts = [PhasePoint(r=st["r"], p=st["p"]) if len(st["r"]) == 3 else
               np.array(st["r"] + st["p"], dtype=float)
               for st in block["points"]]
    else:
        count = int(block.get("count", 10))
        rng = rng_for(cfg.seed)
        if structure == "exotic-planar":
            raw = random_regular_points(rng, count, [0.5, 2.0], [0.5, 2.0])
            pts = [np.array([q.r[0], q.r[1], q.p[0], q.p[1]]) for q in raw]
        else:
            e = float(params.get("e", 0.0))
            theta = float(params.get("theta", 0.0))
            pts = random_regular_points(rng, count, [0.5, 2.0], [0.5, 2.0],
                                        e=e, theta=theta, min_mstar_rel=0.1)
    rows = bracket_table(structure, pts, params=params, step=step)
    write_text(os.path.join(out_dir, "brackets.csv"), _bracket_rows_to_csv(rows))
    return {"failures": 0,
            "report": {"report": {"rows": len(rows), "structure": structure}}}
