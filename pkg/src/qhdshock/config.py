"""Run configuration: a YAML document with nested sections, validated into a
frozen dataclass that serializes back to the same document."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from qhdshock.hydro import DomainError, GasParams


class ConfigError(ValueError):
    """Malformed or invalid configuration; the message names the field or line."""


@dataclass(frozen=True)
class Discretization:
    n: int = 2000
    scheme: str = "fd4"
    profile_points: int = 2001
    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    tail_tol: float = 1e-9
    pad: float = 0.2


@dataclass(frozen=True)
class Filter:
    filter_tol: float = 1e-4
    tail_mass_tol: float = 0.01
    max_track: int = 40
    near_zero: float = 1e-4
    gap_tol: float = 1e-6
    border_tol: float = 1e-10
    xi_max: float = 50.0
    xi_samples: int = 2001


@dataclass(frozen=True)
class KappaGrid:
    gamma_min: float = 1.0
    gamma_max: float = 3.0
    points: int = 200


@dataclass(frozen=True)
class RunConfig:
    gas: GasParams = field(default_factory=lambda: GasParams(1.5, 1.0, math.sqrt(2.0)))
    r_minus: float = 0.7
    s: tuple[float, ...] = (1.0,)
    eps: tuple[float, ...] = (0.05,)
    discretization: Discretization = field(default_factory=Discretization)
    filter: Filter = field(default_factory=Filter)
    kappa: KappaGrid = field(default_factory=KappaGrid)
    point_spectrum_in_sweep: bool = False
    figures: bool = False
    out_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        validate(self)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["s"] = list(self.s)
        d["eps"] = list(self.eps)
        return d

    def flat(self) -> dict:
        """Dotted key -> scalar record for output headers."""
        out = {}

        def walk(prefix, obj):
            for k, v in obj.items():
                key = f"{prefix}{k}"
                if isinstance(v, dict):
                    walk(key + ".", v)
                else:
                    out[key] = v

        walk("", self.to_dict())
        return out


_SECTIONS = {"discretization": Discretization, "filter": Filter, "kappa": KappaGrid}


def _positive(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{name}: must be a positive number, got {value!r}")


def validate(cfg: RunConfig) -> None:
    _positive("r_minus", cfg.r_minus)
    if not cfg.s:
        raise ConfigError("s: at least one shock speed is required")
    for v in cfg.s:
        _positive("s", v)
    for v in cfg.eps:
        _positive("eps", v)
        if not v < cfg.r_minus:
            raise ConfigError(f"eps: {v} must be below r_minus = {cfg.r_minus}")
    if list(cfg.eps) != sorted(cfg.eps, reverse=True) or len(set(cfg.eps)) != len(cfg.eps):
        raise ConfigError("eps: list must be strictly decreasing")
    d = cfg.discretization
    if d.scheme not in ("fd4", "spectral"):
        raise ConfigError(f"discretization.scheme: expected fd4 or spectral, got {d.scheme!r}")
    for name in ("n", "profile_points"):
        if not isinstance(getattr(d, name), int) or getattr(d, name) < 16:
            raise ConfigError(f"discretization.{name}: integer >= 16 required")
    for name in ("rel_tol", "abs_tol", "tail_tol", "pad"):
        _positive(f"discretization.{name}", getattr(d, name))
    f = cfg.filter
    for name in ("filter_tol", "tail_mass_tol", "near_zero", "gap_tol", "border_tol", "xi_max"):
        _positive(f"filter.{name}", getattr(f, name))
    for name in ("max_track", "xi_samples"):
        if not isinstance(getattr(f, name), int) or getattr(f, name) < 1:
            raise ConfigError(f"filter.{name}: positive integer required")
    k = cfg.kappa
    if not 1.0 <= k.gamma_min < k.gamma_max or k.points < 2:
        raise ConfigError("kappa: need 1 <= gamma_min < gamma_max and points >= 2")
    if not isinstance(cfg.seed, int):
        raise ConfigError("seed: integer required")


def _number(value, where):
    # YAML 1.1 reads 1e-11 (no dot) as a string
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{where}: not a number: {value!r}") from None
    return value


def _coerce(cls, sec: dict, section: str) -> dict:
    out = dict(sec)
    for f in fields(cls):
        if f.name in out and isinstance(f.default, float):
            out[f.name] = _number(out[f.name], f"{section}.{f.name}")
    return out


def from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    known = {f.name for f in fields(RunConfig)} | {"r_plus"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    kw = {}
    if "gas" in data:
        g = data["gas"]
        if not isinstance(g, dict) or set(g) - {"gamma", "mu", "k"}:
            raise ConfigError("gas: mapping with keys gamma, mu, k expected")
        try:
            kw["gas"] = GasParams(**{k: _number(v, f"gas.{k}") for k, v in g.items()})
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(f"gas: {exc}") from exc
    for name, cls in _SECTIONS.items():
        if name in data:
            sec = data[name]
            allowed = {f.name for f in fields(cls)}
            if not isinstance(sec, dict) or set(sec) - allowed:
                bad = sorted(set(sec) - allowed) if isinstance(sec, dict) else sec
                raise ConfigError(f"{name}: unexpected entries {bad}")
            kw[name] = cls(**_coerce(cls, sec, name))
    for name in ("point_spectrum_in_sweep", "figures", "out_dir", "seed"):
        if name in data:
            kw[name] = data[name]
    if "r_minus" in data:
        kw["r_minus"] = _number(data["r_minus"], "r_minus")
    for name in ("s", "eps"):
        if name in data:
            val = data[name]
            kw[name] = tuple(float(_number(v, name)) for v in (val if isinstance(val, list) else [val]))
    if "r_plus" in data:
        if "eps" in data:
            raise ConfigError("give either eps or r_plus, not both")
        rm = float(data.get("r_minus", RunConfig.r_minus))
        kw["eps"] = tuple(sorted((rm - float(r) for r in data["r_plus"]), reverse=True))
    return RunConfig(**kw)


def loads(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ConfigError(f"{where}{getattr(exc, 'problem', exc)}") from exc
    return from_dict(data or {})


def dumps(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


def load(path) -> RunConfig:
    return loads(Path(path).read_text(encoding="utf-8"))
