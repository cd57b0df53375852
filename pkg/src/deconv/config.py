"""Experiment configuration: JSON schema, validation, instance building.

Hypothesis violations (beta outside (0, 1/3), q <= 1/2, non-decreasing
eps_list) are rejected here, before any computation starts.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid_signal import SampledSignal, read_signal_csv
from .kernels import (default_profile_grid, make_gaussian, make_indicator,
                      make_two_sided_exp)
from .regularization import SweepInstance
from .tail_profile import tail_mass_profile

_KERNEL_PARAMS = {
    "indicator": {"a", "b"},
    "gaussian": {"scale"},
    "two_sided_exp": {"rate"},
    "file": {"path"},
}
_F0_PARAMS = {
    "synth_smooth": set(),
    "file": {"path"},
}
_GRID_KEYS = {"t_extent", "t_step", "freq_extent_factor", "freq_step"}
_TOP_KEYS = {"kernel", "f0", "eps_list", "beta", "q", "seed", "grids"}


@dataclass(frozen=True)
class GridSpec:
    t_extent: float
    t_step: float
    freq_extent_factor: float
    freq_step: float


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: dict
    f0: dict
    eps_list: tuple
    beta: float
    q: float
    seed: int
    grids: GridSpec
    base_dir: str = "."  # file-type specs resolve relative to the config file


def _fail(msg: str) -> ConfigError:
    return ConfigError(msg, module="config", operation="load_config")


def _typed_spec(raw, kind: str, allowed: dict) -> dict:
    if not isinstance(raw, dict) or "type" not in raw:
        raise _fail(f"{kind} must be an object with a 'type' field")
    typ = raw["type"]
    if typ not in allowed:
        raise _fail(f"unknown {kind} type {typ!r}: expected one of "
                    f"{sorted(allowed)}")
    extra = set(raw) - {"type"} - allowed[typ]
    if extra:
        raise _fail(f"{kind} type {typ!r} does not take {sorted(extra)}")
    missing = allowed[typ] - set(raw)
    if missing:
        raise _fail(f"{kind} type {typ!r} requires {sorted(missing)}")
    return dict(raw)


def _positive(value, name: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise _fail(f"{name} must be a number")
    v = float(value)
    if not (v > 0.0 and math.isfinite(v)):
        raise _fail(f"{name} must be positive and finite")
    return v


def parse_config(data: dict, base_dir: str = ".") -> ExperimentConfig:
    if not isinstance(data, dict):
        raise _fail("config root must be a JSON object")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise _fail(f"unknown config keys {sorted(extra)}")
    missing = _TOP_KEYS - set(data)
    if missing:
        raise _fail(f"missing config keys {sorted(missing)}")

    kernel = _typed_spec(data["kernel"], "kernel", _KERNEL_PARAMS)
    if kernel["type"] == "indicator":
        a, b = kernel["a"], kernel["b"]
        if not (isinstance(a, (int, float)) and isinstance(b, (int, float))
                and float(a) < float(b)):
            raise _fail("indicator kernel needs numbers a < b")
    elif kernel["type"] == "gaussian":
        _positive(kernel["scale"], "kernel.scale")
    elif kernel["type"] == "two_sided_exp":
        _positive(kernel["rate"], "kernel.rate")

    f0 = _typed_spec(data["f0"], "f0", _F0_PARAMS)

    eps_raw = data["eps_list"]
    if (not isinstance(eps_raw, list) or not eps_raw
            or not all(isinstance(e, (int, float)) for e in eps_raw)):
        raise _fail("eps_list must be a nonempty array of numbers")
    eps_list = tuple(float(e) for e in eps_raw)
    if any(e <= 0.0 for e in eps_list):
        raise _fail("eps_list entries must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise _fail("eps_list must be strictly decreasing")

    beta = _positive(data["beta"], "beta")
    if not (beta < 1.0 / 3.0):
        raise _fail("beta must lie strictly inside (0, 1/3)")
    q = _positive(data["q"], "q")
    if not (q > 0.5):
        raise _fail("q must exceed 1/2")

    seed = data["seed"]
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise _fail("seed must be a nonnegative integer")

    grids_raw = data["grids"]
    if not isinstance(grids_raw, dict) or set(grids_raw) != _GRID_KEYS:
        raise _fail(f"grids must contain exactly {sorted(_GRID_KEYS)}")
    grids = GridSpec(*(_positive(grids_raw[k], f"grids.{k}")
                       for k in ("t_extent", "t_step",
                                 "freq_extent_factor", "freq_step")))
    if grids.t_step >= grids.t_extent:
        raise _fail("grids.t_step must be smaller than grids.t_extent")

    return ExperimentConfig(kernel, f0, eps_list, beta, q, seed, grids,
                            base_dir)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise _fail(f"cannot read config file {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise _fail(f"config file {path} is not valid JSON: {exc}")
    return parse_config(data, os.path.dirname(os.path.abspath(path)))


def config_echo(config: ExperimentConfig) -> dict:
    """The validated configuration as plain JSON-ready data."""
    return {
        "kernel": dict(config.kernel),
        "f0": dict(config.f0),
        "eps_list": list(config.eps_list),
        "beta": config.beta,
        "q": config.q,
        "seed": config.seed,
        "grids": {
            "t_extent": config.grids.t_extent,
            "t_step": config.grids.t_step,
            "freq_extent_factor": config.grids.freq_extent_factor,
            "freq_step": config.grids.freq_step,
        },
    }


def build_kernel(config: ExperimentConfig) -> SampledSignal:
    spec = config.kernel
    step = config.grids.t_step
    if spec["type"] == "indicator":
        return make_indicator(float(spec["a"]), float(spec["b"]), step)
    if spec["type"] == "gaussian":
        return make_gaussian(float(spec["scale"]), step)
    if spec["type"] == "two_sided_exp":
        return make_two_sided_exp(float(spec["rate"]), step)
    path = os.path.join(config.base_dir, spec["path"])
    if not os.path.isfile(path):
        raise ConfigError(f"kernel file {path} does not exist",
                          module="config", operation="build_kernel")
    return read_signal_csv(path)


def build_instance(config: ExperimentConfig, name: str = "") -> SweepInstance:
    kernel = build_kernel(config)
    profile = tail_mass_profile(kernel, default_profile_grid(kernel))
    f0_signal = None
    if config.f0["type"] == "file":
        path = os.path.join(config.base_dir, config.f0["path"])
        if not os.path.isfile(path):
            raise ConfigError(f"f0 file {path} does not exist",
                              module="config", operation="build_instance")
        f0_signal = read_signal_csv(path)
    return SweepInstance(
        name=name or config.kernel["type"],
        kernel=kernel,
        profile=profile,
        q=config.q,
        beta=config.beta,
        t_extent=config.grids.t_extent,
        t_step=config.grids.t_step,
        freq_step=config.grids.freq_step,
        freq_extent_factor=config.grids.freq_extent_factor,
        base_seed=config.seed,
        f0_signal=f0_signal,
    )
