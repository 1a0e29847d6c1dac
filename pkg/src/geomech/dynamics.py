"""Trajectory integration with invariant monitoring and capture handling.

Integration uses an adaptive embedded Runge-Kutta pair (DOP853) with dense
output; events are localized by the solver's root finding on the dense
interpolant.  Near the vanishing-effective-mass manifold the double-monopole
equations are singular (velocities scale as 1/M*), so the integrator switches
to the rescaled parameter s defined by dt = M* ds, in which the flow is
regular; the physical time is carried along as a state component so the s-t
map is recorded rather than presumed.

Capture is a saddle passage: the parallelism points are fixed points of the
rescaled flow, and only the stable set reaches them.  A trajectory is
declared captured when both capture residuals fall below their thresholds;
transversal M* = 0 crossings without parallelism terminate integration with a
singular-approach report.  After capture the motion is the analytic reduced
dynamics: fixed direction, linearly growing radius.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoCaptureError, SingularPointError
from .fields import FieldModel, PhasePoint, PlanarModel
from .poisson import desingularized_double_monopole, mstar_scalar
from .twoform import PhaseVelocity, assemble_sigma, kernel_velocity

__all__ = [
    "Event",
    "IntegratorOptions",
    "Trajectory",
    "capture_condition",
    "critical_entry",
    "double_monopole_initial",
    "hall_reduced_planar",
    "integrate",
    "integrate_planar",
    "reduced_evolve",
    "refine_capture_initial",
    "scatter_batch",
]

#: relative drift that raises an invariant-drift-alarm event
DRIFT_ALARM = 1e-6

#: floor on |r|, |p| before integration is abandoned as a singular approach
_DOMAIN_FLOOR = 1e-9


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    initial_step: Optional[float] = None
    capture_tol: float = 1e-8       # threshold on |M*| / (|r|^3 |p|^3)
    parallel_tol: float = 1e-6      # threshold on the parallelism residual
    reparameterize_near_singularity: bool = True

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "capture_tol", "parallel_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Event:
    kind: str        # capture | singular-approach | domain-exit | invariant-drift-alarm
    time: float
    state: PhasePoint
    detail: str = ""


@dataclass
class Trajectory:
    """Time-ordered states with per-sample diagnostics and detected events."""

    t: np.ndarray
    y: np.ndarray                 # (n, 6) rows (r1, r2, r3, p1, p2, p3)
    H: np.ndarray
    j: np.ndarray                 # (n, 3)
    mstar: np.ndarray
    step: np.ndarray
    sample_phase: np.ndarray      # 'free' or 'captured' per sample
    events: list = field(default_factory=list)
    phase: str = "free"
    model_name: str = ""
    params: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.t)

    def point(self, i) -> PhasePoint:
        return PhasePoint(r=self.y[i, 0:3], p=self.y[i, 3:6], t=float(self.t[i]))

    @property
    def final_state(self) -> PhasePoint:
        return self.point(len(self.t) - 1)

    def max_drift(self) -> dict:
        """Per-invariant max relative drift over the free (pre-capture) part."""
        free = self.sample_phase == "free"
        if not np.any(free):
            return {}
        out = {}
        H0 = self.H[free][0]
        if H0 != 0:
            out["H"] = float(np.max(np.abs(self.H[free] - H0)) / abs(H0))
        j0 = self.j[free][0]
        jn = np.linalg.norm(j0)
        if jn > 0:
            out["j"] = float(np.max(np.abs(self.j[free] - j0)) / jn)
        return out


def _diagnostics(y, e, theta):
    """(H, j, M*) columns for trajectory samples, vectorized over rows."""
    r = y[:, 0:3]
    p = y[:, 3:6]
    H = 0.5 * np.sum(p * p, axis=1)
    nr = np.linalg.norm(r, axis=1)
    npp = np.linalg.norm(p, axis=1)
    j = np.cross(r, p)
    if theta != 0.0:
        j = j - theta * p / npp[:, None]
    if e != 0.0:
        j = j - e * r / nr[:, None]
    mstar = nr**3 * npp**3 - e * theta * np.sum(r * p, axis=1)
    return H, j, mstar


def capture_condition(state: PhasePoint, e: float, theta: float):
    """Normalized residuals (mstar_rel, parallel_rel) used to declare capture.

    mstar_rel is |M*|/(|r|^3 |p|^3); parallel_rel is the relative deviation
    of p from the reduction constraint sign(e theta) sqrt|e theta| r/|r|^2.
    """
    nr = np.linalg.norm(state.r)
    npp = np.linalg.norm(state.p)
    if nr == 0.0 or npp == 0.0:
        raise SingularPointError("r=0 or p=0")
    big = nr**3 * npp**3
    mrel = abs(big - e * theta * float(state.r @ state.p)) / big
    target = math.copysign(1.0, e * theta) * math.sqrt(abs(e * theta)) * state.r / nr**2
    prel = float(np.linalg.norm(state.p - target)) / npp
    return mrel, prel


def critical_entry(j0, E0: float, e: float, theta: float, tol: float = 1e-6):
    """Closed-form entry point and velocity on the critical manifold.

    Requires |j0| = |theta| + |e| within ``tol`` (relative) -- the necessary
    condition for the manifold to be reachable -- and E0 > 0.
    """
    if e * theta == 0.0:
        raise NoCaptureError("no critical manifold without both couplings")
    if E0 <= 0:
        raise NoCaptureError("E0 must be positive")
    j0 = np.asarray(j0, dtype=float)
    jmin = abs(theta) + abs(e)
    if abs(np.linalg.norm(j0) - jmin) > tol * jmin:
        raise NoCaptureError(
            f"|j0| = {np.linalg.norm(j0):.12g} differs from |theta|+|e| = {jmin:.12g}"
        )
    r_cr = -math.copysign(1.0, e) * math.sqrt(abs(e * theta)) / jmin * j0 / math.sqrt(2.0 * E0)
    v_cr = math.sqrt(2.0 * E0) * r_cr / np.linalg.norm(r_cr)
    return r_cr, v_cr


def reduced_evolve(entry, t_end: float, e: float, theta: float,
                   t_start: float = 0.0, n_samples: int = 200) -> Trajectory:
    """Analytic reduced dynamics after capture.

    Direction is fixed at r_cr/|r_cr|; the radius grows linearly as
    sqrt(2 E0) (t - t_start) + |r_cr|; momentum follows the reduction
    constraint, so the effective mass vanishes identically along the branch.
    """
    r_cr, v_cr = (np.asarray(entry[0], dtype=float), np.asarray(entry[1], dtype=float))
    E0 = 0.5 * float(v_cr @ v_cr)
    rmag0 = float(np.linalg.norm(r_cr))
    u = r_cr / rmag0
    speed = math.sqrt(2.0 * E0)
    pmag_sign = math.copysign(1.0, e * theta) * math.sqrt(abs(e * theta))

    ts = np.linspace(t_start, t_end, max(2, n_samples)) if t_end > t_start \
        else np.array([t_start])
    radii = speed * (ts - t_start) + rmag0
    y = np.zeros((len(ts), 6))
    y[:, 0:3] = radii[:, None] * u[None, :]
    y[:, 3:6] = (pmag_sign / radii)[:, None] * u[None, :]

    H, j, mstar = _diagnostics(y, e, theta)
    step = np.diff(ts, prepend=ts[0])
    return Trajectory(
        t=ts, y=y, H=H, j=j, mstar=mstar, step=step,
        sample_phase=np.full(len(ts), "captured"),
        events=[], phase="captured",
        model_name="double-monopole", params={"e": e, "theta": theta},
    )


def hall_reduced_planar(E, e: float, theta: float) -> np.ndarray:
    """Hall momentum of the reduced planar system at the critical field.

    p_i = eps_ij E_j e theta with eps_12 = +1.
    """
    E = np.asarray(E, dtype=float).reshape(2)
    return e * theta * np.array([E[1], -E[0]])


# ---------------------------------------------------------------------------
# velocity routes
# ---------------------------------------------------------------------------

def _rhs_closed(model):
    vel = model.velocity

    def rhs(t, y):
        v = vel(PhasePoint.from_coords(y, t=t))
        return np.concatenate([v[0], v[1]])

    return rhs


def _rhs_kernel(model):
    e = float(model.params.get("e", 1.0))
    theta = model.params.get("theta")

    def rhs(t, y):
        point = PhasePoint.from_coords(y, t=t)
        sigma = assemble_sigma(model.sample(point), e, theta)
        v = kernel_velocity(sigma)
        if not isinstance(v, PhaseVelocity):
            raise SingularPointError(
                f"kernel dimension {v.kernel_dim} at t={t:.6g}: no regular velocity"
            )
        return np.concatenate([v.rdot, v.pdot])

    return rhs


def _rhs_bracket(model):
    e = float(model.params.get("e", 0.0))
    theta = float(model.params.get("theta", 0.0))

    def rhs(t, y):
        point = PhasePoint.from_coords(y, t=t)
        w = desingularized_double_monopole(point, e, theta)
        grad = np.concatenate([np.zeros(3), point.p])
        return (w @ grad) / mstar_scalar(point, e, theta)

    return rhs


def _pick_rhs(model, route):
    if route == "auto":
        route = "closed" if model.velocity is not None else "kernel"
    if route == "closed":
        if model.velocity is None:
            raise ValueError(f"model {model.name} provides no closed-form velocity")
        return _rhs_closed(model)
    if route == "kernel":
        return _rhs_kernel(model)
    if route == "bracket":
        if model.name != "double-monopole":
            raise ValueError("bracket route is defined for the double monopole")
        return _rhs_bracket(model)
    raise ValueError(f"unknown velocity route {route!r}")


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def _terminal(fn, direction=0.0):
    fn.terminal = True
    fn.direction = direction
    return fn


def _domain_guard_events():
    def r_floor(t, y):
        return y[0] * y[0] + y[1] * y[1] + y[2] * y[2] - _DOMAIN_FLOOR**2

    def p_floor(t, y):
        return y[3] * y[3] + y[4] * y[4] + y[5] * y[5] - _DOMAIN_FLOOR**2

    return [_terminal(r_floor, -1.0), _terminal(p_floor, -1.0)]


class _Leg:
    __slots__ = ("t", "y", "phase")

    def __init__(self, t, y, phase="free"):
        self.t = np.asarray(t, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self.phase = phase


def _assemble(model, legs, events, phase, captured_tail=None):
    e = float(model.params.get("e", 0.0))
    theta = float(model.params.get("theta", 0.0))
    ts, ys, phases = [], [], []
    t_last = None
    for leg in legs:
        t, y = leg.t, leg.y
        if t_last is not None and len(t) and t[0] <= t_last:
            keep = t > t_last
            t, y = t[keep], y[keep]
        if len(t) == 0:
            continue
        ts.append(t)
        ys.append(y)
        phases.append(np.full(len(t), leg.phase))
        t_last = t[-1]
    t = np.concatenate(ts) if ts else np.array([])
    y = np.vstack(ys) if ys else np.zeros((0, 6))
    phase_col = np.concatenate(phases) if phases else np.array([], dtype="<U8")
    H, j, mstar = _diagnostics(y, e, theta) if len(t) else (np.array([]),) * 3
    step = np.diff(t, prepend=t[0]) if len(t) else np.array([])
    traj = Trajectory(
        t=t, y=y, H=H, j=j, mstar=mstar, step=step, sample_phase=phase_col,
        events=list(events), phase=phase, model_name=model.name,
        params=dict(model.params),
    )
    if captured_tail is not None and len(captured_tail.t):
        traj = _concat(traj, captured_tail)
    _monitor_drift(model, traj)
    return traj


def _concat(a: Trajectory, b: Trajectory) -> Trajectory:
    keep = b.t > (a.t[-1] if len(a.t) else -math.inf)
    return Trajectory(
        t=np.concatenate([a.t, b.t[keep]]),
        y=np.vstack([a.y, b.y[keep]]),
        H=np.concatenate([a.H, b.H[keep]]),
        j=np.vstack([a.j, b.j[keep]]),
        mstar=np.concatenate([a.mstar, b.mstar[keep]]),
        step=np.concatenate([a.step, np.diff(b.t[keep], prepend=a.t[-1])]),
        sample_phase=np.concatenate([a.sample_phase, b.sample_phase[keep]]),
        events=a.events + b.events,
        phase=b.phase,
        model_name=a.model_name,
        params=a.params,
    )


def _monitor_drift(model, traj: Trajectory):
    """Append an invariant-drift-alarm event on the first 1e-6 exceedance."""
    if not model.conserved or len(traj.t) == 0:
        return
    free = np.flatnonzero(traj.sample_phase == "free")
    if len(free) < 2:
        return
    p0 = traj.point(int(free[0]))
    for name, fn in model.conserved.items():
        ref = fn(p0)
        scale = max(abs(ref), 1e-30)
        for i in free[1:]:
            val = fn(traj.point(int(i)))
            if abs(val - ref) / scale > DRIFT_ALARM:
                traj.events.append(Event(
                    kind="invariant-drift-alarm",
                    time=float(traj.t[i]),
                    state=traj.point(int(i)),
                    detail=f"{name} drifted by {abs(val - ref) / scale:.3e}",
                ))
                return


def integrate(model: FieldModel, initial: PhasePoint, t_end: float,
              opts: Optional[IntegratorOptions] = None,
              velocity_route: str = "auto") -> Trajectory:
    """Integrate one trajectory from ``initial`` up to ``t_end``.

    The velocity field comes from the model's closed forms when available,
    otherwise from the kernel of the assembled 2-form.  For the double
    monopole the integration switches to the rescaled parameter near the
    critical manifold and hands off to the analytic reduced dynamics on
    capture.  Singularities terminate integration with an event, never with
    silent NaNs.
    """
    opts = opts or IntegratorOptions()
    if t_end < initial.t:
        raise ValueError("t_end precedes the initial time")

    e = float(model.params.get("e", 0.0))
    theta = float(model.params.get("theta", 0.0))
    capture_capable = (
        model.scaled_velocity is not None
        and model.mstar_rel is not None
        and e * theta != 0.0
        and opts.reparameterize_near_singularity
        and velocity_route in ("auto", "closed")
    )
    if capture_capable:
        mrel0 = abs(model.mstar_rel(initial))
        if mrel0 <= opts.capture_tol:
            raise ValueError(
                f"initial point is not regular: |M*| relative {mrel0:.3e}"
            )

    rhs = _pick_rhs(model, velocity_route)
    switch_thr = 100.0 * opts.capture_tol
    exit_thr = 10.0 * switch_thr
    par_thr = min(opts.parallel_tol, 10.0 * opts.capture_tol)

    ivp_kw = dict(method="DOP853", rtol=opts.rel_tol, atol=opts.abs_tol,
                  max_step=opts.max_step)
    if opts.initial_step:
        ivp_kw["first_step"] = opts.initial_step

    legs, events = [], []
    t_cur = float(initial.t)
    y_cur = initial.coords()
    transitions = 0

    def point_of(y, t):
        return PhasePoint.from_coords(y, t=t)

    while True:
        # ---- phase A: physical time --------------------------------------
        ev_list = _domain_guard_events()
        if capture_capable:
            def switch_ev(t, y, _m=model.mstar_rel):
                return abs(_m(PhasePoint.from_coords(y, t=t))) - switch_thr
            ev_list.append(_terminal(switch_ev, -1.0))
        try:
            sol = solve_ivp(rhs, (t_cur, t_end), y_cur, events=ev_list, **ivp_kw)
        except SingularPointError as exc:
            events.append(Event("singular-approach", t_cur, point_of(y_cur, t_cur),
                                detail=str(exc)))
            return _assemble(model, legs, events, "free")
        legs.append(_Leg(sol.t, sol.y.T))
        if sol.status == 0:
            return _assemble(model, legs, events, "free")
        if sol.status == -1:
            events.append(Event("singular-approach", float(sol.t[-1]),
                                point_of(sol.y[:, -1], float(sol.t[-1])),
                                detail=f"integrator: {sol.message}"))
            return _assemble(model, legs, events, "free")
        fired = [k for k, te in enumerate(sol.t_events) if len(te)]
        k = fired[0]
        t_ev = float(sol.t_events[k][0])
        y_ev = sol.y_events[k][0]
        if k < 2:  # domain floor
            events.append(Event("domain-exit", t_ev, point_of(y_ev, t_ev),
                                detail="|r| or |p| reached the excluded locus"))
            return _assemble(model, legs, events, "free")

        # ---- phase B: rescaled parameter, dt = M* ds ---------------------
        transitions += 1
        if transitions > 50:
            events.append(Event("singular-approach", t_ev, point_of(y_ev, t_ev),
                                detail="too many reparameterization transitions"))
            return _assemble(model, legs, events, "free")

        scaled = model.scaled_velocity

        def rhs_s(s, z):
            rd, pd, ms = scaled(z[0:6])
            return np.concatenate([rd, pd, [ms]])

        def cap_ev(s, z):
            c = capture_condition(PhasePoint.from_coords(z[0:6], t=z[6]), e, theta)
            return max(c[0] / opts.capture_tol, c[1] / par_thr) - 1.0

        def zero_ev(s, z, _m=model.mstar_rel):
            return _m(PhasePoint.from_coords(z[0:6], t=z[6]))

        def exit_ev(s, z, _m=model.mstar_rel):
            return abs(_m(PhasePoint.from_coords(z[0:6], t=z[6]))) - exit_thr

        def tend_ev(s, z):
            return z[6] - t_end

        evs = [_terminal(cap_ev, -1.0), _terminal(zero_ev, 0.0),
               _terminal(exit_ev, 1.0), _terminal(tend_ev, 1.0)]
        z0 = np.concatenate([y_ev, [t_ev]])
        s_budget = 1e7
        solb = solve_ivp(rhs_s, (0.0, s_budget), z0, events=evs,
                         method="DOP853", rtol=max(opts.rel_tol, 1e-13),
                         atol=opts.abs_tol)
        legs.append(_Leg(solb.y[6], solb.y[0:6].T))
        if solb.status != 1:
            detail = ("rescaled-parameter budget exhausted" if solb.status == 0
                      else f"integrator: {solb.message}")
            tl = float(solb.y[6, -1])
            events.append(Event("singular-approach", tl,
                                point_of(solb.y[0:6, -1], tl), detail=detail))
            return _assemble(model, legs, events, "free")
        firedb = [k for k, te in enumerate(solb.t_events) if len(te)]
        kb = firedb[0]
        z_ev = solb.y_events[kb][0]
        t_ev = float(z_ev[6])
        y_ev = z_ev[0:6]
        state_ev = point_of(y_ev, t_ev)
        if kb == 0:
            # capture: hand off to the analytic reduced dynamics
            events.append(Event("capture", t_ev, state_ev,
                                detail="both capture residuals below tolerance"))
            E0 = 0.5 * float(state_ev.p @ state_ev.p)
            v_cr = math.sqrt(2.0 * E0) * state_ev.r / np.linalg.norm(state_ev.r)
            tail = reduced_evolve((state_ev.r, v_cr), t_end, e, theta,
                                  t_start=t_ev)
            return _assemble(model, legs, events, "captured", captured_tail=tail)
        if kb == 1:
            events.append(Event("singular-approach", t_ev, state_ev,
                                detail="M* crossed zero without parallelism"))
            return _assemble(model, legs, events, "free")
        if kb == 3:
            return _assemble(model, legs, events, "free")
        # kb == 2: left the near-critical band; resume physical time
        t_cur, y_cur = t_ev, y_ev


def scatter_batch(model: FieldModel, ensemble, t_end: float,
                  opts: Optional[IntegratorOptions] = None,
                  velocity_route: str = "auto", max_workers: Optional[int] = None):
    """Independent integrations of an ensemble, order-preserving.

    Per-trajectory failures are isolated: a failing member yields an empty
    trajectory carrying a domain-exit event with the failure message.
    """
    ensemble = list(ensemble)
    if not ensemble:
        return []

    def one(initial):
        try:
            return integrate(model, initial, t_end, opts, velocity_route)
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            return Trajectory(
                t=np.array([initial.t]), y=initial.coords()[None, :],
                H=np.array([0.5 * float(initial.p @ initial.p)]),
                j=np.zeros((1, 3)), mstar=np.array([0.0]),
                step=np.array([0.0]), sample_phase=np.array(["free"]),
                events=[Event("domain-exit", initial.t, initial, detail=str(exc))],
                phase="free", model_name=model.name, params=dict(model.params),
            )

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, ensemble))


# ---------------------------------------------------------------------------
# capture experiment construction
# ---------------------------------------------------------------------------

def double_monopole_initial(e: float, theta: float, energy: float, alpha: float,
                            j_factor: float = 1.0) -> PhasePoint:
    """Initial condition with |j| = j_factor (|theta| + |e|), by construction.

    r points along x, p lies in the xy-plane at angle ``alpha`` from r; the
    radius is solved from the angular-momentum magnitude.  With j_factor = 1
    the necessary capture condition holds exactly.
    """
    if energy <= 0 or not (0.0 < alpha < math.pi):
        raise ValueError("need energy > 0 and 0 < alpha < pi")
    pmag = math.sqrt(2.0 * energy)
    jsq = (j_factor * (abs(theta) + abs(e))) ** 2
    s = jsq - theta**2 - e**2 - 2.0 * e * theta * math.cos(alpha)
    if s <= 0:
        raise ValueError("requested |j| is unreachable at this angle")
    rmag = math.sqrt(s) / (pmag * math.sin(alpha))
    r = np.array([rmag, 0.0, 0.0])
    p = pmag * np.array([math.cos(alpha), math.sin(alpha), 0.0])
    return PhasePoint(r=r, p=p, t=0.0)


def _classify_capture(model, initial, t_end, opts):
    traj = integrate(model, initial, t_end, opts)
    kinds = {ev.kind for ev in traj.events}
    detail = " ".join(ev.detail for ev in traj.events)
    if "capture" in kinds:
        return "capture", traj
    if "singular-approach" in kinds and "crossed zero" in detail:
        return "crossed", traj
    return "flyby", traj


def refine_capture_initial(model: FieldModel, energy: float, alpha: float,
                           opts: IntegratorOptions, t_end: float = 10.0,
                           span: float = 1e-6, max_iter: int = 60):
    """Shoot onto the capture separatrix by bisecting the momentum scale.

    The parallelism points are saddles of the rescaled flow, so the exact
    |j| = |theta| + |e| trajectory is a separatrix: integration noise pushes
    any single run off it.  One side of the separatrix crosses M* = 0, the
    other flies by; bisection on a relative momentum-scale perturbation u
    drives the passage deep enough for the capture event to fire.

    Returns (initial, trajectory) of the first captured run.
    """
    e = float(model.params["e"])
    theta = float(model.params["theta"])
    base = double_monopole_initial(e, theta, energy, alpha)

    def make(u):
        return PhasePoint(r=base.r, p=base.p * (1.0 + u), t=0.0)

    lo, hi = -span, span
    kind_lo, _ = _classify_capture(model, make(lo), t_end, opts)
    kind_hi, _ = _classify_capture(model, make(hi), t_end, opts)
    if kind_lo == kind_hi:
        raise NoCaptureError(
            f"shooting bracket does not straddle the separatrix ({kind_lo})"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        kind, traj = _classify_capture(model, make(mid), t_end, opts)
        if kind == "capture":
            return make(mid), traj
        if kind == kind_lo:
            lo = mid
        else:
            hi = mid
        if lo == hi:
            break
    raise NoCaptureError(
        "bisection exhausted without a capture event; "
        "capture_tol may be below the integration noise floor"
    )


# ---------------------------------------------------------------------------
# planar integration
# ---------------------------------------------------------------------------

@dataclass
class PlanarTrajectory:
    t: np.ndarray
    y: np.ndarray        # (n, 4) rows (x1, x2, p1, p2)
    H: np.ndarray
    mstar: np.ndarray
    events: list = field(default_factory=list)


def integrate_planar(model: PlanarModel, initial, t_end: float,
                     opts: Optional[IntegratorOptions] = None) -> PlanarTrajectory:
    """Integrate the planar exotic model; m* sign changes terminate with an event.

    ``initial`` is a 4-vector (x1, x2, p1, p2).  At the critical field the
    closed-form velocity is singular everywhere and the reduced Hall motion
    applies instead (see hall_reduced_planar).
    """
    opts = opts or IntegratorOptions()
    y0 = np.asarray(initial, dtype=float).reshape(4)
    ms0 = model.mstar(y0[0:2])
    if ms0 == 0.0:
        raise SingularPointError(
            "effective mass vanishes at the initial point (critical field)"
        )

    def rhs(t, y):
        xd, pd = model.velocity(y[0:2], y[2:4])
        return np.concatenate([xd, pd])

    def ms_ev(t, y):
        return model.mstar(y[0:2])

    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853",
                    rtol=opts.rel_tol, atol=opts.abs_tol,
                    max_step=opts.max_step, events=[_terminal(ms_ev, 0.0)])
    events = []
    if sol.t_events[0].size:
        te = float(sol.t_events[0][0])
        ye = sol.y_events[0][0]
        events.append(Event(
            kind="singular-approach", time=te,
            state=PhasePoint(r=np.array([ye[0], ye[1], 0.0]),
                             p=np.array([ye[2], ye[3], 0.0]), t=te),
            detail="planar effective mass crossed zero",
        ))
    elif sol.status == -1:
        te = float(sol.t[-1])
        ye = sol.y[:, -1]
        events.append(Event(
            kind="singular-approach", time=te,
            state=PhasePoint(r=np.array([ye[0], ye[1], 0.0]),
                             p=np.array([ye[2], ye[3], 0.0]), t=te),
            detail=f"integrator: {sol.message}",
        ))
    y = sol.y.T
    H = np.array([model.hamiltonian(row[0:2], row[2:4]) for row in y])
    ms = np.array([model.mstar(row[0:2]) for row in y])
    return PlanarTrajectory(t=sol.t, y=y, H=H, mstar=ms, events=events)
