"""JSON run configuration and model construction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from gibbs import catalog
from gibbs import models as M
from gibbs.engine import ThermoModel

MODEL_NAMES = (
    "ideal_gas", "gravity_gas", "relativistic_gas", "massless_gas",
    "photon_gas", "solid", "sphere", "vessel",
)


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class ModelSetup:
    """A model plus the direction d of its parameter ray b = s * d."""

    model: ThermoModel
    direction: np.ndarray
    kind: str

    def parameter(self, s: float) -> np.ndarray:
        return s * self.direction

    def temperature(self, s: float, boltzmann_constant: float) -> float:
        """T = 1/(k b) for scalar models, -1/(k epsilon) for the vessel; undefined for the sphere."""
        if self.kind == "vessel":
            eps = s * self.direction[9]
            return -1.0 / (boltzmann_constant * eps) if eps < 0 else math.nan
        if self.kind == "sphere":
            return math.nan
        return 1.0 / (boltzmann_constant * s) if s > 0 else math.nan


@dataclass(frozen=True)
class RunConfig:
    """The whole JSON object (model keys, plus any command-specific keys) and k."""

    data: dict
    boltzmann_constant: float = 1.0


def _get(cfg: dict, key: str, default=None, required: bool = True):
    if key in cfg:
        return cfg[key]
    if default is not None or not required:
        return default
    raise ConfigError(f"missing configuration key {key!r}")


def _vector(cfg: dict, key: str, default) -> np.ndarray:
    try:
        return np.asarray(_get(cfg, key, default), dtype=float).reshape(3)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key!r} must be a list of three numbers") from exc


def build(cfg: dict) -> ModelSetup:
    """Model descriptor and parameter direction from a model configuration object."""
    if not isinstance(cfg, dict):
        raise ConfigError("a model configuration must be a JSON object")
    name = _get(cfg, "model")
    if name not in MODEL_NAMES:
        raise ConfigError(f"unknown model {name!r}; expected one of {', '.join(MODEL_NAMES)}")
    one = np.ones(1)
    try:
        if name == "ideal_gas":
            spec = M.IdealGasSpec(_get(cfg, "volume"), _get(cfg, "masses"),
                                  bool(cfg.get("indistinguishable", False)))
            return ModelSetup(catalog.ideal_gas_model(spec), one, name)
        if name == "gravity_gas":
            spec = M.GravityGasSpec(_get(cfg, "section_area"), _get(cfg, "height"),
                                    _get(cfg, "gravity"), _get(cfg, "masses"))
            return ModelSetup(catalog.gravity_gas_model(spec), one, name)
        if name == "relativistic_gas":
            spec = M.RelativisticGasSpec(_get(cfg, "volume"), _get(cfg, "light_speed", 1.0),
                                         _get(cfg, "masses"))
            return ModelSetup(catalog.relativistic_gas_model(spec), one, name)
        if name == "massless_gas":
            count = int(_get(cfg, "n_particles", 1))
            return ModelSetup(catalog.massless_gas_model(float(_get(cfg, "volume")),
                                                         float(_get(cfg, "light_speed", 1.0)), count), one, name)
        if name == "photon_gas":
            return ModelSetup(catalog.photon_gas_model(float(_get(cfg, "volume")),
                                                       float(_get(cfg, "light_speed", 1.0))), one, name)
        if name == "solid":
            spec = M.SolidSpec(_get(cfg, "frequencies"))
            return ModelSetup(catalog.solid_model(spec), one, name)
        if name == "sphere":
            spec = M.SphereSpec(_get(cfg, "radius"))
            return ModelSetup(catalog.sphere_model(spec), _vector(cfg, "omega", [0.0, 0.0, 1.0]), name)
        # vessel
        if "cylinder_radius" in cfg:
            geo = M.VesselGeometry("cylinder", float(_get(cfg, "height")), radius=float(cfg["cylinder_radius"]))
        else:
            geo = M.VesselGeometry("box", float(_get(cfg, "height")), section_area=float(_get(cfg, "section_area")))
        spec = M.VesselSpec(geo, _get(cfg, "masses"))
        direction = np.concatenate([
            _vector(cfg, "omega", [0.0] * 3), _vector(cfg, "beta", [0.0] * 3),
            _vector(cfg, "delta", [0.0] * 3), [float(_get(cfg, "epsilon", -1.0))],
        ])
        return ModelSetup(catalog.vessel_model(spec), direction, name)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {name} configuration: {exc}") from exc


def load(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    k = data.get("boltzmann_constant", 1.0)
    if not isinstance(k, (int, float)) or not k > 0:
        raise ConfigError("boltzmann_constant must be a positive number")
    return RunConfig(data, float(k))
