"""Experiment configuration: a single JSON document per run.

Schema (all fields shown; see README for details):

    {
      "domain":       {"dim": 1, "modes_per_dim": 8, "grid_factor": 4},
      "gamma":        1.0,
      "nonlinearity": {"type": "polynomial", "coeffs": [0, 0, 0, 0, 0, 1]},
      "forcing":      {"modes": [{"mode": [1], "amplitude": 1.0}]},
      "initial":      {"modes": [{"mode": [1], "u": 1.0, "ut": 0.0}]}
                      or {"random": {"seed": 7, "e_norm": 0.5, "max_mode": 4}},
      "time":         {"dt": 0.01, "T": 1.0, "record_stride": 1},
      "galerkin_n":   null,
      "experiment":   {"name": "simulate", "parameters": {}},
      "output_dir":   "out"
    }

Overrides are dotted key=value pairs applied after the file parse
(values parsed as JSON, falling back to bare strings).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .nonlinearity import NonlinearitySpec
from .solver import ProblemSpec
from .spectral import Basis, StatePair, field_from_modes, make_basis, random_state, zero_field

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "apply_overrides", "validate_config", "EXPERIMENTS"]

EXPERIMENTS = (
    "simulate",
    "energy-report",
    "perturbed-energy",
    "splitting",
    "galerkin-convergence",
    "strichartz-probe",
    "continuous-dependence",
    "m-energy",
    "attractor",
    "h2-check",
)


class ConfigError(Exception):
    """Invalid configuration; `field` names the offending entry."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


def load_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError("config", f"file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as err:
        raise ConfigError("config", f"not valid JSON: {err}") from err


def apply_overrides(cfg: dict, overrides) -> dict:
    """key=value pairs with dotted paths, e.g. time.dt=1e-4."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError("overrides", f"expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(key, "path collides with a non-object entry")
        node[parts[-1]] = value
    return cfg


def _require(cfg: dict, field: str, kind, path: str):
    if field not in cfg:
        raise ConfigError(path, "missing")
    val = cfg[field]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigError(path, f"expected a number, got {val!r}")
        return float(val)
    if kind is int:
        if not isinstance(val, int) or isinstance(val, bool):
            raise ConfigError(path, f"expected an integer, got {val!r}")
        return val
    if not isinstance(val, kind):
        raise ConfigError(path, f"expected {kind.__name__}, got {type(val).__name__}")
    return val


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration with builders for the solver objects."""

    raw: dict
    dim: int
    modes_per_dim: int
    grid_factor: int
    gamma: float
    nl_coeffs: tuple[float, ...]
    forcing_modes: tuple[tuple[tuple[int, ...], float], ...]
    initial: dict
    dt: float
    T: float
    record_stride: int
    galerkin_n: int | None
    experiment: str
    parameters: dict
    output_dir: str

    def build_basis(self) -> Basis:
        return make_basis(self.dim, self.modes_per_dim, self.grid_factor)

    def build_problem(self, basis: Basis | None = None) -> ProblemSpec:
        basis = basis or self.build_basis()
        forcing = zero_field(basis)
        if self.forcing_modes:
            forcing = field_from_modes(
                basis, {mode: amp for mode, amp in self.forcing_modes}
            )
        n = self.galerkin_n if self.galerkin_n is not None else basis.n_modes
        return ProblemSpec(
            basis=basis,
            gamma=self.gamma,
            forcing=forcing,
            nonlinearity=NonlinearitySpec(self.nl_coeffs),
            galerkin_n=n,
        )

    def build_initial(self, basis: Basis, seed_offset: int = 0) -> StatePair:
        if "modes" in self.initial:
            u_entries, ut_entries = {}, {}
            for item in self.initial["modes"]:
                mode = tuple(item["mode"])
                u_entries[mode] = float(item.get("u", 0.0))
                ut_entries[mode] = float(item.get("ut", 0.0))
            return StatePair(
                field_from_modes(basis, u_entries), field_from_modes(basis, ut_entries)
            )
        spec = self.initial["random"]
        rng = np.random.default_rng(int(spec["seed"]) + seed_offset)
        return random_state(
            basis,
            rng,
            e_norm=float(spec.get("e_norm", 1.0)),
            max_mode=spec.get("max_mode"),
        )


def validate_config(cfg: dict) -> ExperimentConfig:
    """Check the document against the module preconditions before any compute."""
    domain = _require(cfg, "domain", dict, "domain")
    dim = _require(domain, "dim", int, "domain.dim")
    if dim not in (1, 2, 3):
        raise ConfigError("domain.dim", f"must be 1, 2 or 3, got {dim}")
    n = _require(domain, "modes_per_dim", int, "domain.modes_per_dim")
    if n < 1:
        raise ConfigError("domain.modes_per_dim", f"must be >= 1, got {n}")
    gf = domain.get("grid_factor", 4)
    if not isinstance(gf, int) or gf < 2:
        raise ConfigError("domain.grid_factor", f"must be an integer >= 2, got {gf}")

    gamma = _require(cfg, "gamma", float, "gamma")
    if not gamma > 0:
        raise ConfigError("gamma", f"must be strictly positive, got {gamma}")

    nl = _require(cfg, "nonlinearity", dict, "nonlinearity")
    if nl.get("type") != "polynomial":
        raise ConfigError("nonlinearity.type", f"only 'polynomial' is supported, got {nl.get('type')!r}")
    coeffs = nl.get("coeffs")
    if not isinstance(coeffs, list) or not coeffs or not all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in coeffs
    ):
        raise ConfigError("nonlinearity.coeffs", "must be a nonempty list of numbers")

    total_modes = n**dim
    forcing_modes: list[tuple[tuple[int, ...], float]] = []
    if "forcing" in cfg and cfg["forcing"]:
        for i, item in enumerate(_require(cfg["forcing"], "modes", list, "forcing.modes")):
            path = f"forcing.modes[{i}]"
            mode = item.get("mode")
            if not isinstance(mode, list) or len(mode) != dim:
                raise ConfigError(path + ".mode", f"must be a list of {dim} indices")
            if not all(isinstance(k, int) and 1 <= k <= n for k in mode):
                raise ConfigError(path + ".mode", f"indices must lie in 1..{n}")
            amp = item.get("amplitude")
            if not isinstance(amp, (int, float)) or isinstance(amp, bool):
                raise ConfigError(path + ".amplitude", "must be a number")
            forcing_modes.append((tuple(mode), float(amp)))

    initial = _require(cfg, "initial", dict, "initial")
    if ("modes" in initial) == ("random" in initial):
        raise ConfigError("initial", "exactly one of 'modes' or 'random' is required")
    if "random" in initial:
        rnd = initial["random"]
        if "seed" not in rnd:
            raise ConfigError("initial.random.seed", "missing (seeds are mandatory for reproducibility)")
        if not isinstance(rnd["seed"], int):
            raise ConfigError("initial.random.seed", "must be an integer")
        mm = rnd.get("max_mode")
        if mm is not None and not (isinstance(mm, int) and 1 <= mm <= total_modes):
            raise ConfigError("initial.random.max_mode", f"must lie in 1..{total_modes}")
    else:
        for i, item in enumerate(initial["modes"]):
            path = f"initial.modes[{i}]"
            mode = item.get("mode")
            if not isinstance(mode, list) or len(mode) != dim:
                raise ConfigError(path + ".mode", f"must be a list of {dim} indices")
            if not all(isinstance(k, int) and 1 <= k <= n for k in mode):
                raise ConfigError(path + ".mode", f"indices must lie in 1..{n}")

    time_cfg = _require(cfg, "time", dict, "time")
    dt = _require(time_cfg, "dt", float, "time.dt")
    if not dt > 0:
        raise ConfigError("time.dt", f"must be positive, got {dt}")
    T = _require(time_cfg, "T", float, "time.T")
    if not T > 0:
        raise ConfigError("time.T", f"must be positive, got {T}")
    n_steps = round(T / dt)
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-12 * max(1.0, T):
        raise ConfigError("time.dt", f"dt={dt} does not divide T={T}")
    stride = time_cfg.get("record_stride", 1)
    if not isinstance(stride, int) or stride < 1 or n_steps % stride != 0:
        raise ConfigError("time.record_stride", f"must divide the {n_steps} steps")

    gal = cfg.get("galerkin_n")
    if gal is not None and not (isinstance(gal, int) and 1 <= gal <= total_modes):
        raise ConfigError("galerkin_n", f"must lie in 1..{total_modes}")

    exp = _require(cfg, "experiment", dict, "experiment")
    name = exp.get("name")
    if name not in EXPERIMENTS:
        raise ConfigError("experiment.name", f"unknown experiment {name!r}; see list-experiments")
    params = exp.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("experiment.parameters", "must be an object")

    output_dir = cfg.get("output_dir", "out")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir", "must be a string")

    return ExperimentConfig(
        raw=cfg,
        dim=dim,
        modes_per_dim=n,
        grid_factor=gf,
        gamma=gamma,
        nl_coeffs=tuple(float(c) for c in coeffs),
        forcing_modes=tuple(forcing_modes),
        initial=initial,
        dt=dt,
        T=T,
        record_stride=stride,
        galerkin_n=gal,
        experiment=name,
        parameters=params,
        output_dir=output_dir,
    )
