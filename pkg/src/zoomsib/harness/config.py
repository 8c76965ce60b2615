"""Experiment configuration (YAML) and the per-cell seed scheme.

Example::

    name: quadratic-sweep
    environment:
      type: synthetic          # synthetic | hard_instance | replay
      link: quadratic
      K: 20
      noise_sigma: 0.1
    policies:
      - name: zoomsib
      - name: etc_bins
        params: {c_etc: 1.0}
      - name: random
    horizons: [2000, 5000, 10000]
    dimensions: [10]
    trials: 30
    base_seed: 0
    output_dir: results/quadratic
    emit_plots: false

Unknown keys anywhere are rejected.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

__all__ = [
    "ConfigError",
    "EnvSpec",
    "PolicySpec",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "cell_seed",
    "POLICY_PARAMS",
    "PROXY_POLICIES",
]


class ConfigError(ValueError):
    pass


_EXPLORER_PARAMS = {
    "delta", "L_f", "noise_sigma_assumed", "t0_mode", "check_interval",
    "drift_threshold", "cap_fraction", "c_polylog", "c_tau", "tau", "width", "W", "L", "N",
}
POLICY_PARAMS = {
    "zoomsib": _EXPLORER_PARAMS,
    "greedy_projection": _EXPLORER_PARAMS,
    "etc_bins": {"c_etc", "delta", "c_tau", "tau", "width", "W", "N"},
    "random": set(),
    "oracle": set(),
}
PROXY_POLICIES = {
    "etc_bins": "GSTOR proxy: fixed T^(3/4) exploration then greedy over projected bins",
    "greedy_projection": "ESTOR proxy: Stein exploration then argmax projection",
}

_ENV_KEYS = {
    "synthetic": {"type", "link", "K", "noise_sigma", "theta", "context_law", "lo", "hi"},
    "hard_instance": {"type", "beta", "spike_bin"},
    "replay": {"type", "csv", "K", "target", "label_column", "feature_columns",
               "kmeans_seed", "max_iters", "n_init", "cache"},
}
_TOP_KEYS = {"name", "environment", "policies", "horizons", "dimensions", "trials",
             "base_seed", "output_dir", "emit_plots", "telemetry"}


@dataclass
class EnvSpec:
    type: str = "synthetic"
    link: str = "quadratic"
    K: int = 20
    noise_sigma: float = 0.1
    theta: str = "sparse"
    context_law: str = "gaussian"
    lo: float = -1.0
    hi: float = 1.0
    # hard_instance
    beta: object = "spike"
    spike_bin: Optional[int] = None
    # replay
    csv: Optional[str] = None
    target: Optional[str] = None
    label_column: str = "label"
    feature_columns: Optional[list] = None
    kmeans_seed: int = 0
    max_iters: int = 100
    n_init: int = 10
    cache: Optional[str] = None


@dataclass
class PolicySpec:
    name: str
    id: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    name: str
    environment: EnvSpec
    policies: list
    horizons: list
    dimensions: list = field(default_factory=lambda: [10])
    trials: int = 30
    base_seed: int = 0
    output_dir: str = "results"
    emit_plots: bool = False
    telemetry: bool = False

    def cells(self):
        """``(policy, T, d, trial)`` in declaration order."""
        dims = self.dimensions if self.environment.type == "synthetic" else [None]
        for p in self.policies:
            for T in self.horizons:
                for d in dims:
                    for trial in range(self.trials):
                        yield p, T, d, trial


def _unknown(keys, allowed, where):
    extra = sorted(set(keys) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) {extra} in {where}")


def parse_config(raw: dict, base_dir: Optional[Path] = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    _unknown(raw, _TOP_KEYS, "config")
    for req in ("name", "environment", "policies", "horizons"):
        if req not in raw:
            raise ConfigError(f"missing required key {req!r}")

    env_raw = dict(raw["environment"] or {})
    etype = env_raw.get("type", "synthetic")
    if etype not in _ENV_KEYS:
        raise ConfigError(f"unknown environment type {etype!r}")
    _unknown(env_raw, _ENV_KEYS[etype], f"environment ({etype})")
    env = EnvSpec(**env_raw)
    if etype == "replay":
        if not env.csv or env.target is None:
            raise ConfigError("replay environment needs 'csv' and 'target'")
        if base_dir is not None:
            if not Path(env.csv).is_absolute():
                env.csv = str(base_dir / env.csv)
            if env.cache and not Path(env.cache).is_absolute():
                env.cache = str(base_dir / env.cache)
        env.target = str(env.target)
    if etype == "synthetic" and env.theta not in ("sparse", "dense"):
        raise ConfigError(f"unknown theta law {env.theta!r}")

    policies, seen = [], set()
    for i, p in enumerate(raw["policies"] or []):
        if isinstance(p, str):
            p = {"name": p}
        _unknown(p, {"name", "id", "params"}, f"policies[{i}]")
        name = p.get("name")
        if name not in POLICY_PARAMS:
            raise ConfigError(f"unknown policy {name!r}; expected one of {sorted(POLICY_PARAMS)}")
        params = dict(p.get("params") or {})
        _unknown(params, POLICY_PARAMS[name], f"params of policy {name!r}")
        if name == "oracle" and etype == "replay":
            raise ConfigError("oracle policy needs a known model; not available on replay data")
        pid = str(p.get("id", name))
        if pid in seen:
            raise ConfigError(f"duplicate policy id {pid!r}")
        seen.add(pid)
        policies.append(PolicySpec(name, pid, params))
    if not policies:
        raise ConfigError("at least one policy is required")

    horizons = [int(T) for T in raw["horizons"] or []]
    if not horizons or min(horizons) < 1:
        raise ConfigError("horizons must be a nonempty list of positive integers")
    dimensions = [int(d) for d in raw.get("dimensions", [10])]
    if etype == "synthetic" and (not dimensions or min(dimensions) < 1):
        raise ConfigError("dimensions must be a nonempty list of positive integers")
    trials = int(raw.get("trials", 30))
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    return ExperimentConfig(
        name=str(raw["name"]),
        environment=env,
        policies=policies,
        horizons=horizons,
        dimensions=dimensions,
        trials=trials,
        base_seed=int(raw.get("base_seed", 0)),
        output_dir=str(raw.get("output_dir", "results")),
        emit_plots=bool(raw.get("emit_plots", False)),
        telemetry=bool(raw.get("telemetry", False)),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw, base_dir=path.parent)


def cell_seed(base_seed: int, policy_id: str, T: int, d, trial: int) -> int:
    """Stable 63-bit seed for one cell; independent of the other cells."""
    key = f"{base_seed}|{policy_id}|{T}|{d}|{trial}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1
