"""Experiment configuration: TOML parsing, validation, manifest hashing.

The config file is flat key/value with one section per concern
(kernel, claims, run, sweep); every parameter is validated by the module
that owns it before any simulation starts.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .errors import InvalidParameter
from .kernels import (ClaimDistribution, ExcitingKernel, ExponentialClaims,
                      ExponentialKernel, GammaClaims, MomentsOnlyClaims,
                      TabulatedKernel, ZeroKernel)

DEFAULT_CONFIG: dict[str, Any] = {
    "kernel": {"variant": "exponential", "alpha": 0.3, "beta": 0.5},
    "claims": {"variant": "exponential", "rate": 1.0},
    "run": {
        "mu": 400.0,
        "u": 2.0,
        "c": 0.3,
        "horizon": 1.0,
        "grid_step": 1e-3,
        "n_paths": 10000,
        "seed": 42,
        "methods": ["mc-gaussian"],
    },
    "sweep": {},
}


def _section(raw: dict, name: str) -> dict:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise InvalidParameter(f"[{name}] must be a table")
    return value


def build_kernel(spec: dict) -> ExcitingKernel:
    variant = spec.get("variant", "exponential")
    try:
        if variant == "zero":
            return ZeroKernel()
        if variant == "exponential":
            return ExponentialKernel(alpha=float(spec["alpha"]), beta=float(spec["beta"]))
        if variant == "tabulated":
            return TabulatedKernel(grid=np.asarray(spec["grid"], dtype=float),
                                   values=np.asarray(spec["values"], dtype=float))
    except KeyError as exc:
        raise InvalidParameter(f"[kernel] missing field {exc.args[0]!r} "
                               f"for variant {variant!r}") from exc
    raise InvalidParameter(f"[kernel] unknown variant {variant!r}")


def build_claims(spec: dict) -> ClaimDistribution:
    variant = spec.get("variant", "exponential")
    try:
        if variant == "exponential":
            return ExponentialClaims(rate=float(spec["rate"]))
        if variant == "gamma":
            return GammaClaims(shape=float(spec["shape"]), rate=float(spec["rate"]))
        if variant == "moments":
            return MomentsOnlyClaims(m1=float(spec["m1"]), m2=float(spec["m2"]))
    except KeyError as exc:
        raise InvalidParameter(f"[claims] missing field {exc.args[0]!r} "
                               f"for variant {variant!r}") from exc
    raise InvalidParameter(f"[claims] unknown variant {variant!r}")


_RUN_FIELDS = {"mu": float, "u": float, "c": float, "horizon": float,
               "grid_step": float, "n_paths": int, "seed": int, "methods": list}
_METHODS = ("mc-gaussian", "mc-direct", "asymptotic")


@dataclass(frozen=True)
class ExperimentConfig:
    kernel_spec: dict
    claims_spec: dict
    mu: float
    u: float
    c: float
    horizon: float
    grid_step: float
    n_paths: int
    seed: int
    methods: tuple[str, ...]
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        # constructing the domain objects runs every owning module's validation
        self.kernel
        self.claims
        if self.mu <= 0:
            raise InvalidParameter("[run] mu must be > 0")
        if self.horizon <= 0 or self.grid_step <= 0:
            raise InvalidParameter("[run] horizon and grid_step must be > 0")
        if self.n_paths < 1:
            raise InvalidParameter("[run] n_paths must be >= 1")
        for m in self.methods:
            if m not in _METHODS:
                raise InvalidParameter(f"[run] unknown method {m!r}; choose from {_METHODS}")
        if self.sweep:
            if "parameter" not in self.sweep or "values" not in self.sweep:
                raise InvalidParameter("[sweep] requires 'parameter' and 'values'")

    @property
    def kernel(self) -> ExcitingKernel:
        return build_kernel(self.kernel_spec)

    @property
    def claims(self) -> ClaimDistribution:
        return build_claims(self.claims_spec)

    def echo(self) -> dict:
        """Round-trippable plain-dict form (the manifest payload)."""
        return {
            "kernel": dict(self.kernel_spec),
            "claims": dict(self.claims_spec),
            "run": {"mu": self.mu, "u": self.u, "c": self.c, "horizon": self.horizon,
                    "grid_step": self.grid_step, "n_paths": self.n_paths,
                    "seed": self.seed, "methods": list(self.methods)},
            "sweep": dict(self.sweep),
        }


def config_from_mapping(raw: dict) -> ExperimentConfig:
    kernel_spec = {**DEFAULT_CONFIG["kernel"], **_section(raw, "kernel")} \
        if "kernel" in raw else dict(DEFAULT_CONFIG["kernel"])
    claims_spec = {**DEFAULT_CONFIG["claims"], **_section(raw, "claims")} \
        if "claims" in raw else dict(DEFAULT_CONFIG["claims"])
    run = {**DEFAULT_CONFIG["run"], **_section(raw, "run")}
    for key, value in run.items():
        if key not in _RUN_FIELDS:
            raise InvalidParameter(f"[run] unknown field {key!r}")
        if _RUN_FIELDS[key] is not list and not isinstance(value, (int, float)):
            raise InvalidParameter(f"[run] field {key!r} must be numeric, got {value!r}")
    return ExperimentConfig(
        kernel_spec=kernel_spec, claims_spec=claims_spec,
        mu=float(run["mu"]), u=float(run["u"]), c=float(run["c"]),
        horizon=float(run["horizon"]), grid_step=float(run["grid_step"]),
        n_paths=int(run["n_paths"]), seed=int(run["seed"]),
        methods=tuple(run["methods"]), sweep=_section(raw, "sweep"))


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return config_from_mapping({})
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise InvalidParameter(f"config parse error in {path}: {exc}") from exc
    return config_from_mapping(raw)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def manifest(config: ExperimentConfig) -> dict:
    """Config echo, seed, versions, and a hash over the experiment parameters."""
    import scipy

    from . import __version__

    echo = config.echo()
    return {
        "config": echo,
        "seed": config.seed,
        "versions": {
            "hawkes-risk": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "manifest_hash": hashlib.sha256(canonical_json(echo).encode()).hexdigest(),
    }
