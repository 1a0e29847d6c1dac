"""Experiment configuration: strict JSON schema with canonical round-tripping.

Unknown keys are rejected everywhere so a typo in a physics parameter fails
loudly instead of running the wrong experiment.  Parsing and emission are
inverse to each other (canonical serialization), which the manifest relies on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Optional

from ..errors import ConfigError

EXPERIMENTS = ("simulate", "scatter", "shift", "capture", "closure-check", "brackets")

MODEL_NAMES = (
    "double-monopole",
    "momentum-monopole-uniform-E",
    "uniform",
    "free",
    "exotic-planar",
)

STRUCTURES = ("canonical", "double-monopole", "exotic-planar")


def _require(cond, path, msg):
    if not cond:
        raise ConfigError(f"{path}: {msg}")


def _check_keys(d, allowed, path):
    _require(isinstance(d, dict), path, f"expected an object, got {type(d).__name__}")
    unknown = set(d) - set(allowed)
    _require(not unknown, path, f"unknown keys {sorted(unknown)}")


def _finite_number(x, path):
    _require(isinstance(x, (int, float)) and not isinstance(x, bool), path,
             "expected a number")
    _require(math.isfinite(x), path, "must be finite")
    return float(x)


def _vector(x, path, length):
    _require(isinstance(x, list) and len(x) == length, path,
             f"expected a list of {length} numbers")
    return [_finite_number(v, f"{path}[{i}]") for i, v in enumerate(x)]


@dataclass
class ModelSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class InitialsSpec:
    kind: str                      # explicit | angular-momentum | random-ball
    states: list = field(default_factory=list)
    energy: Optional[float] = None
    alpha: Optional[float] = None
    j_factors: list = field(default_factory=list)
    refine: bool = True
    count: Optional[int] = None
    r_range: list = field(default_factory=lambda: [1.0, 2.0])
    p_range: list = field(default_factory=lambda: [1.0, 2.0])
    min_j_factor: Optional[float] = None


@dataclass
class IntegratorSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: Optional[float] = None
    initial_step: Optional[float] = None
    capture_tol: float = 1e-8
    parallel_tol: float = 1e-6
    reparameterize_near_singularity: bool = True


@dataclass
class OutputSpec:
    dir: str = "out"
    formats: list = field(default_factory=lambda: ["csv", "json"])


@dataclass
class ExperimentConfig:
    experiment: str
    model: ModelSpec = field(default_factory=lambda: ModelSpec("double-monopole",
                                                               {"e": 1.0, "theta": 1.0}))
    initials: Optional[InitialsSpec] = None
    t_end: float = 10.0
    integrator: IntegratorSpec = field(default_factory=IntegratorSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    seed: int = 0
    shift: dict = field(default_factory=dict)
    closure: dict = field(default_factory=dict)
    brackets: dict = field(default_factory=dict)
    capture: dict = field(default_factory=dict)


_TOP_KEYS = ("experiment", "model", "initials", "t_end", "integrator", "output",
             "seed", "shift", "closure", "brackets", "capture")


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a parsed JSON object into an ExperimentConfig."""
    _check_keys(data, _TOP_KEYS, "config")
    _require("experiment" in data, "config", "missing required key 'experiment'")
    exp = data["experiment"]
    _require(exp in EXPERIMENTS, "config.experiment",
             f"must be one of {list(EXPERIMENTS)}, got {exp!r}")

    model = ModelSpec("double-monopole", {"e": 1.0, "theta": 1.0})
    if "model" in data:
        _check_keys(data["model"], ("name", "params"), "config.model")
        name = data["model"].get("name")
        _require(name in MODEL_NAMES, "config.model.name",
                 f"must be one of {list(MODEL_NAMES)}, got {name!r}")
        params = data["model"].get("params", {})
        _require(isinstance(params, dict), "config.model.params", "expected an object")
        for k, v in params.items():
            if isinstance(v, list):
                _vector(v, f"config.model.params.{k}", len(v))
            elif not isinstance(v, str):
                _finite_number(v, f"config.model.params.{k}")
        model = ModelSpec(name=name, params=dict(params))

    initials = None
    if "initials" in data:
        d = data["initials"]
        _check_keys(d, ("kind", "states", "energy", "alpha", "j_factors", "refine",
                        "count", "r_range", "p_range", "min_j_factor"),
                    "config.initials")
        kind = d.get("kind")
        _require(kind in ("explicit", "angular-momentum", "random-ball"),
                 "config.initials.kind", f"unknown generator kind {kind!r}")
        initials = InitialsSpec(kind=kind)
        if kind == "explicit":
            states = d.get("states", [])
            _require(isinstance(states, list), "config.initials.states",
                     "expected a list")
            parsed = []
            for i, st in enumerate(states):
                path = f"config.initials.states[{i}]"
                _check_keys(st, ("r", "p", "t"), path)
                _require("r" in st and "p" in st, path, "needs 'r' and 'p'")
                dim = len(st["r"]) if isinstance(st["r"], list) else 0
                _require(dim in (2, 3), f"{path}.r", "expected a 2- or 3-vector")
                parsed.append({
                    "r": _vector(st["r"], f"{path}.r", dim),
                    "p": _vector(st["p"], f"{path}.p", dim),
                    "t": _finite_number(st.get("t", 0.0), f"{path}.t"),
                })
            initials.states = parsed
        elif kind == "angular-momentum":
            initials.energy = _finite_number(d.get("energy", 0.5),
                                             "config.initials.energy")
            _require(initials.energy > 0, "config.initials.energy", "must be > 0")
            initials.alpha = _finite_number(d.get("alpha", math.pi / 2),
                                            "config.initials.alpha")
            factors = d.get("j_factors", [1.0])
            _require(isinstance(factors, list) and factors,
                     "config.initials.j_factors", "expected a non-empty list")
            initials.j_factors = [
                _finite_number(f, f"config.initials.j_factors[{i}]")
                for i, f in enumerate(factors)
            ]
            initials.refine = bool(d.get("refine", True))
        else:  # random-ball
            initials.count = int(d.get("count", 10))
            _require(initials.count >= 0, "config.initials.count", "must be >= 0")
            initials.r_range = _vector(d.get("r_range", [1.0, 2.0]),
                                       "config.initials.r_range", 2)
            initials.p_range = _vector(d.get("p_range", [1.0, 2.0]),
                                       "config.initials.p_range", 2)
            if d.get("min_j_factor") is not None:
                initials.min_j_factor = _finite_number(
                    d["min_j_factor"], "config.initials.min_j_factor")

    t_end = _finite_number(data.get("t_end", 10.0), "config.t_end")

    integ = IntegratorSpec()
    if "integrator" in data:
        d = data["integrator"]
        _check_keys(d, ("rel_tol", "abs_tol", "max_step", "initial_step",
                        "capture_tol", "parallel_tol",
                        "reparameterize_near_singularity"), "config.integrator")
        kw = {}
        for k in ("rel_tol", "abs_tol", "capture_tol", "parallel_tol"):
            if k in d:
                kw[k] = _finite_number(d[k], f"config.integrator.{k}")
                _require(kw[k] > 0, f"config.integrator.{k}", "must be > 0")
        for k in ("max_step", "initial_step"):
            if k in d and d[k] is not None:
                kw[k] = _finite_number(d[k], f"config.integrator.{k}")
        if "reparameterize_near_singularity" in d:
            kw["reparameterize_near_singularity"] = bool(
                d["reparameterize_near_singularity"])
        integ = IntegratorSpec(**kw)

    output = OutputSpec()
    if "output" in data:
        d = data["output"]
        _check_keys(d, ("dir", "formats"), "config.output")
        output = OutputSpec(dir=str(d.get("dir", "out")),
                            formats=list(d.get("formats", ["csv", "json"])))
        for f in output.formats:
            _require(f in ("csv", "json"), "config.output.formats",
                     f"unknown format {f!r}")

    seed = data.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool), "config.seed",
             "expected an integer")

    cfg = ExperimentConfig(experiment=exp, model=model, initials=initials,
                           t_end=t_end, integrator=integ, output=output, seed=seed)

    for block, allowed in (
        ("shift", ("theta", "p0", "E_mag", "window_factor")),
        ("closure", ("models", "points", "step", "r_range", "p_range")),
        ("brackets", ("structure", "points", "count", "step", "params")),
        ("capture", ("energy", "alpha", "j_factors", "refine")),
    ):
        if block in data:
            _check_keys(data[block], allowed, f"config.{block}")
            setattr(cfg, block, dict(data[block]))

    if exp == "shift":
        _require(cfg.shift, "config.shift", "the shift experiment needs a 'shift' block")
        for k in ("theta", "p0"):
            _require(k in cfg.shift, f"config.shift.{k}", "required")
            _finite_number(cfg.shift[k], f"config.shift.{k}")
        _require(cfg.shift["p0"] > 0, "config.shift.p0", "must be > 0")
    if exp in ("simulate", "scatter"):
        _require(cfg.initials is not None, "config.initials",
                 f"the {exp} experiment needs initial conditions")
        if cfg.initials.kind == "explicit":
            _require(len(cfg.initials.states) > 0, "config.initials.states",
                     "no initial conditions")
    if exp == "brackets":
        _require(cfg.brackets.get("structure", "double-monopole") in STRUCTURES,
                 "config.brackets.structure", f"must be one of {list(STRUCTURES)}")
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file; parse errors carry line/column info."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config(data)


def emit_config(cfg: ExperimentConfig) -> str:
    """Canonical serialization; parse(emit(cfg)) round-trips exactly."""
    data = {"experiment": cfg.experiment,
            "model": {"name": cfg.model.name, "params": cfg.model.params},
            "t_end": cfg.t_end,
            "integrator": asdict(cfg.integrator),
            "output": asdict(cfg.output),
            "seed": cfg.seed}
    if cfg.initials is not None:
        ini = {"kind": cfg.initials.kind}
        if cfg.initials.kind == "explicit":
            ini["states"] = cfg.initials.states
        elif cfg.initials.kind == "angular-momentum":
            ini.update(energy=cfg.initials.energy, alpha=cfg.initials.alpha,
                       j_factors=cfg.initials.j_factors, refine=cfg.initials.refine)
        else:
            ini.update(count=cfg.initials.count, r_range=cfg.initials.r_range,
                       p_range=cfg.initials.p_range)
            if cfg.initials.min_j_factor is not None:
                ini["min_j_factor"] = cfg.initials.min_j_factor
        data["initials"] = ini
    for block in ("shift", "closure", "brackets", "capture"):
        if getattr(cfg, block):
            data[block] = getattr(cfg, block)
    return json.dumps(data, indent=2, sort_keys=True)
