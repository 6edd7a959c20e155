"""Run configuration: a strict JSON document with documented defaults.

Every key is optional; omitted keys take the measured values (``eta``) or
the presentation defaults below.  Unknown keys are rejected.  Example::

    {
      "l_max": 1,
      "eta": {"-1": 0.0151, "0": 0.0325, "1": 0.0182},
      "epsilon_noise": 0.0,
      "scan": {"d_min": -2.0, "d_max": 2.0, "n_points": 201},
      "run": {"pair_rate": 2000.0, "integration_time": 1.0, "rng_seed": 20070101},
      "signal_projector": {"fork": 1, "displacement": 0.5}
    }
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .channel import PAPER_ETA, LossChannel
from .errors import ConfigError, PlasmonOAMError
from .experiment import RunConfig
from .states import ModeSpectrum

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ScanSection:
    d_min: float = -2.0
    d_max: float = 2.0
    n_points: int = 201


@dataclass(frozen=True)
class RunSection:
    pair_rate: float = 2000.0
    integration_time: float = 1.0
    rng_seed: int = 20070101


@dataclass(frozen=True)
class SignalProjectorSection:
    fork: int = 1
    displacement: float = 0.5


@dataclass(frozen=True)
class Config:
    l_max: int = 1
    eta: dict[int, float] = field(default_factory=lambda: dict(PAPER_ETA))
    epsilon_noise: float = 0.0
    scan: ScanSection = ScanSection()
    run: RunSection = RunSection()
    signal_projector: SignalProjectorSection = SignalProjectorSection()

    @property
    def spectrum(self) -> ModeSpectrum:
        return ModeSpectrum(self.l_max)

    def channel(self) -> LossChannel:
        return LossChannel.from_mapping(self.eta, self.spectrum)

    def run_config(self) -> RunConfig:
        return RunConfig(
            pair_rate=self.run.pair_rate,
            integration_time=self.run.integration_time,
            rng_seed=self.run.rng_seed,
            epsilon_noise=self.epsilon_noise,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "l_max": self.l_max,
            "eta": {str(l): self.eta[l] for l in sorted(self.eta)},
            "epsilon_noise": self.epsilon_noise,
            "scan": vars(self.scan).copy(),
            "run": vars(self.run).copy(),
            "signal_projector": vars(self.signal_projector).copy(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _number(value: Any, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    return float(value)


def _integer(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return value


def _section(data: Any, cls, name: str, kinds: dict[str, str]):
    if not isinstance(data, dict):
        raise ConfigError(f"{name} must be an object")
    unknown = set(data) - set(kinds)
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    parsed = {}
    for key, value in data.items():
        conv = _integer if kinds[key] == "int" else _number
        parsed[key] = conv(value, f"{name}.{key}")
    return cls(**parsed)


_TOP_KEYS = {"l_max", "eta", "epsilon_noise", "scan", "run", "signal_projector"}


def config_from_dict(data: Any) -> Config:
    """Parse and validate a configuration document."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    kwargs: dict[str, Any] = {}
    if "l_max" in data:
        kwargs["l_max"] = _integer(data["l_max"], "l_max")
    if "eta" in data:
        if not isinstance(data["eta"], dict):
            raise ConfigError("eta must be an object mapping winding number to transmission")
        eta = {}
        for key, value in data["eta"].items():
            try:
                l = int(key)
            except ValueError:
                raise ConfigError(f"eta key {key!r} is not an integer winding number") from None
            eta[l] = _number(value, f"eta.{key}")
        kwargs["eta"] = eta
    if "epsilon_noise" in data:
        kwargs["epsilon_noise"] = _number(data["epsilon_noise"], "epsilon_noise")
    if "scan" in data:
        kwargs["scan"] = _section(data["scan"], ScanSection, "scan", {"d_min": "float", "d_max": "float", "n_points": "int"})
    if "run" in data:
        kwargs["run"] = _section(
            data["run"], RunSection, "run", {"pair_rate": "float", "integration_time": "float", "rng_seed": "int"}
        )
    if "signal_projector" in data:
        kwargs["signal_projector"] = _section(
            data["signal_projector"], SignalProjectorSection, "signal_projector", {"fork": "int", "displacement": "float"}
        )
    config = Config(**kwargs)
    validate(config)
    return config


def validate(config: Config) -> None:
    try:
        config.channel()
        config.run_config()
    except PlasmonOAMError as exc:
        raise ConfigError(str(exc)) from exc
    if config.scan.n_points < 3:
        raise ConfigError(f"scan.n_points must be >= 3, got {config.scan.n_points}")
    if not config.scan.d_max > config.scan.d_min:
        raise ConfigError("scan.d_max must exceed scan.d_min")
    if config.signal_projector.fork not in (-1, 1):
        raise ConfigError(f"signal_projector.fork must be +1 or -1, got {config.signal_projector.fork}")


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data: dict[str, Any], overrides: Iterable[str]) -> dict[str, Any]:
    """Apply ``key.sub=value`` overrides to a raw configuration document."""
    out = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        node = out
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key!r} descends into a non-object")
        node[parts[-1]] = _parse_value(text.strip())
    return out


def load_config(path: str | Path | None, overrides: Iterable[str] = (), seed: int | None = None) -> Config:
    """Read a configuration file (or the defaults when ``path`` is None)."""
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
    # absent sections take their defaults so that e.g. ``eta.0=0.5`` edits one entry
    for key, value in Config().to_dict().items():
        data.setdefault(key, value)
    data = apply_overrides(data, overrides)
    if seed is not None:
        data.setdefault("run", {})["rng_seed"] = seed
    return config_from_dict(data)
