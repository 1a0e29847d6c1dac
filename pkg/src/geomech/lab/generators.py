"""Initial-condition generators and model construction from config specs."""

from __future__ import annotations

import numpy as np

from ..dynamics import IntegratorOptions, double_monopole_initial, refine_capture_initial
from ..errors import ConfigError
from ..fields import (
    PhasePoint,
    double_monopole,
    exotic_planar,
    free_particle,
    momentum_monopole_uniform_E,
    uniform_fields,
)
from ..poisson import angular_momentum
from .config import ExperimentConfig, InitialsSpec, ModelSpec


def rng_for(seed: int):
    """Counter-based generator so randomized reports are reproducible."""
    return np.random.Generator(np.random.Philox(key=seed))


def build_model(spec: ModelSpec):
    p = dict(spec.params)
    try:
        if spec.name == "double-monopole":
            return double_monopole(e=float(p.pop("e", 1.0)),
                                   theta=float(p.pop("theta", 1.0)))
        if spec.name == "momentum-monopole-uniform-E":
            return momentum_monopole_uniform_E(
                theta=float(p.pop("theta", 0.1)),
                E=p.pop("E", [0.0, 1.0, 0.0]),
                charge=float(p.pop("charge", -1.0)),
            )
        if spec.name == "uniform":
            return uniform_fields(E=p.pop("E", [0.0] * 3), B=p.pop("B", [0.0] * 3),
                                  kappa=p.pop("kappa", [0.0] * 3))
        if spec.name == "free":
            return free_particle()
        if spec.name == "exotic-planar":
            return exotic_planar(m=float(p.pop("m", 1.0)), e=float(p.pop("e", 1.0)),
                                 theta=float(p.pop("theta", 0.5)),
                                 B=float(p.pop("B", 1.0)),
                                 V=float(p.pop("V", 0.0)),
                                 E=p.pop("E", None))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config.model.params: {exc}") from exc
    raise ConfigError(f"config.model.name: unknown model {spec.name!r}")


def integrator_options(cfg: ExperimentConfig) -> IntegratorOptions:
    spec = cfg.integrator
    kw = dict(rel_tol=spec.rel_tol, abs_tol=spec.abs_tol,
              capture_tol=spec.capture_tol, parallel_tol=spec.parallel_tol,
              reparameterize_near_singularity=spec.reparameterize_near_singularity)
    if spec.max_step is not None:
        kw["max_step"] = spec.max_step
    if spec.initial_step is not None:
        kw["initial_step"] = spec.initial_step
    return IntegratorOptions(**kw)


def random_regular_points(rng, count, r_range, p_range, e=0.0, theta=0.0,
                          min_j_factor=None, min_mstar_rel=None):
    """Seeded points with |r|, |p| in the given ranges.

    Optional rejection rules keep the sample regular: a minimum |j| relative
    to |theta|+|e| (which bounds trajectories away from both the origin and
    the critical manifold), or a minimum relative effective mass.
    """
    pts = []
    jmin = abs(theta) + abs(e)
    while len(pts) < count:
        u = rng.normal(size=3)
        v = rng.normal(size=3)
        r = u / np.linalg.norm(u) * rng.uniform(*r_range)
        p = v / np.linalg.norm(v) * rng.uniform(*p_range)
        pt = PhasePoint(r=r, p=p)
        if min_j_factor is not None and jmin > 0:
            if np.linalg.norm(angular_momentum(pt, e, theta)) < min_j_factor * jmin:
                continue
        if min_mstar_rel is not None:
            big = np.linalg.norm(r) ** 3 * np.linalg.norm(p) ** 3
            if abs(big - e * theta * float(r @ p)) / big < min_mstar_rel:
                continue
        pts.append(pt)
    return pts


def make_initials(cfg: ExperimentConfig, model, opts: IntegratorOptions):
    """Realize the initials spec into PhasePoints (or planar 4-vectors).

    For the angular-momentum generator, members with j_factor == 1 are
    refined onto the capture separatrix when refinement is enabled; other
    factors use the closed-form construction directly.
    """
    spec: InitialsSpec = cfg.initials
    if spec is None:
        raise ConfigError("config.initials: required for this experiment")
    if spec.kind == "explicit":
        out = []
        for st in spec.states:
            if len(st["r"]) == 2:
                out.append(np.array(st["r"] + st["p"], dtype=float))
            else:
                out.append(PhasePoint(r=st["r"], p=st["p"], t=st["t"]))
        return out
    if spec.kind == "angular-momentum":
        e = float(model.params["e"])
        theta = float(model.params["theta"])
        out = []
        for f in spec.j_factors:
            if f == 1.0 and spec.refine:
                ic, _ = refine_capture_initial(model, spec.energy, spec.alpha,
                                               opts, t_end=min(cfg.t_end, 10.0))
                out.append(ic)
            else:
                out.append(double_monopole_initial(e, theta, spec.energy,
                                                   spec.alpha, j_factor=f))
        return out
    # random-ball
    rng = rng_for(cfg.seed)
    e = float(model.params.get("e", 0.0))
    theta = float(model.params.get("theta", 0.0))
    return random_regular_points(rng, spec.count, spec.r_range, spec.p_range,
                                 e=e, theta=theta, min_j_factor=spec.min_j_factor)
