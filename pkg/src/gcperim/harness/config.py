"""Experiment configuration: flat ``key=value`` files and validation."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from ..constants import optimal_epsilon
from ..geometry import Shape, parse_shape

__all__ = ["ConfigError", "ExperimentConfig", "read_config_file", "parse_config_text", "EPS_RULES"]

EPS_RULES = ("list", "zip", "power", "optimal")
# fields that change how a run executes or where it is written, but not its content
_RUNTIME_FIELDS = ("workers", "output", "json")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit status 2)."""


def _int_list(value) -> tuple[int, ...]:
    if isinstance(value, str):
        items = [v for v in value.replace(",", " ").split() if v]
        # accept 1e5 style counts
        return tuple(int(float(v)) for v in items)
    if isinstance(value, (int, float)):
        return (int(value),)
    return tuple(int(v) for v in value)


def _float_list(value) -> tuple[float, ...]:
    if isinstance(value, str):
        return tuple(float(v) for v in value.replace(",", " ").split() if v)
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


@dataclass(frozen=True)
class ExperimentConfig:
    shape: str
    n: tuple = ()
    d: int | None = None
    eps: tuple = ()
    eps_rule: str = "list"
    eps_c: float = 1.0
    eps_gamma: float | None = None
    trials: int = 100
    seed: int = 0
    alpha: float = 0.05
    rho: float | None = None
    alt_shape: str | None = None
    width: str = "both"
    p: tuple = (1, 2, 3)
    workers: int = 1
    output: str | None = None
    json: str | None = None
    _shape: Shape | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls) if not f.name.startswith("_")}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        kwargs = {}
        try:
            for key, raw in values.items():
                if raw is None:
                    continue
                if key in ("n",):
                    kwargs[key] = _int_list(raw)
                elif key in ("eps",):
                    kwargs[key] = _float_list(raw)
                elif key == "p":
                    kwargs[key] = _int_list(raw)
                elif key in ("d", "trials", "workers"):
                    kwargs[key] = int(float(raw))
                elif key == "seed":
                    kwargs[key] = int(raw)
                elif key in ("eps_c", "eps_gamma", "alpha", "rho"):
                    kwargs[key] = float(raw)
                else:
                    kwargs[key] = str(raw).strip()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**kwargs).validated()

    def validated(self) -> "ExperimentConfig":
        try:
            shape = parse_shape(self.shape, self.d)
        except ValueError as exc:
            raise ConfigError(f"bad shape: {exc}") from exc
        if self.alt_shape is not None:
            try:
                alt = parse_shape(self.alt_shape, shape.d)
            except ValueError as exc:
                raise ConfigError(f"bad alt_shape: {exc}") from exc
            del alt
        if not self.n:
            raise ConfigError("at least one sample size n is required")
        if any(v < 2 for v in self.n):
            raise ConfigError("all n must be >= 2")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0.0 < self.alpha < 0.5:
            raise ConfigError(f"alpha must lie in (0, 0.5), got {self.alpha}")
        if self.rho is not None and not self.rho > 0:
            raise ConfigError("rho must be positive")
        if self.eps_rule not in EPS_RULES:
            raise ConfigError(f"eps_rule must be one of {EPS_RULES}")
        if self.eps_rule in ("list", "zip"):
            if not self.eps:
                raise ConfigError(f"eps_rule={self.eps_rule} needs an eps list")
            if any(not e > 0 for e in self.eps):
                raise ConfigError("eps values must be positive")
            if self.eps_rule == "zip" and len(self.eps) != len(self.n):
                raise ConfigError("eps_rule=zip needs as many eps values as n values")
        if self.eps_rule == "power" and (self.eps_gamma is None or not self.eps_gamma > 0):
            raise ConfigError("eps_rule=power needs eps_gamma > 0")
        if not self.eps_c > 0:
            raise ConfigError("eps_c must be positive")
        if self.width not in ("true", "plugin", "both"):
            raise ConfigError("width must be true, plugin or both")
        if any(p < 1 for p in self.p):
            raise ConfigError("moment orders must be >= 1")
        cfg = dataclasses.replace(self, d=shape.d)
        object.__setattr__(cfg, "_shape", shape)
        return cfg

    @property
    def shape_obj(self) -> Shape:
        if self._shape is None:
            return self.validated()._shape
        return self._shape

    @property
    def alt_shape_obj(self) -> Shape | None:
        if self.alt_shape is None:
            return None
        return parse_shape(self.alt_shape, self.shape_obj.d)

    def cells(self) -> list[tuple[int, float]]:
        """(n, eps) pairs in output order."""
        if self.eps_rule == "list":
            return [(n, e) for n in self.n for e in self.eps]
        if self.eps_rule == "zip":
            return list(zip(self.n, self.eps))
        if self.eps_rule == "power":
            return [(n, self.eps_c * n ** (-self.eps_gamma)) for n in self.n]
        interior = self.shape_obj.dist_to_domain_boundary > 0
        return [(n, self.eps_c * optimal_epsilon(n, self.shape_obj.d, interior)) for n in self.n]

    def record(self) -> dict:
        """Config fields that determine results, in a stable order."""
        out = {}
        for f in dataclasses.fields(self):
            if f.name.startswith("_") or f.name in _RUNTIME_FIELDS:
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            out[f.name] = str(value)
        return out

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.record().items())

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def read_config_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)
