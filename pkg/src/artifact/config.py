"""Line-oriented ``key=value`` run configuration."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Mapping

from .errors import ConfigError, InvalidOrderError
from .operator import check_order
from .pipeline import PipelineConfig
from .transmission import GainTarget


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(p) for p in raw.split(",") if p.strip())


_CONVERTERS = {
    "nu": float,
    "target_std": float,
    "target_gain": float,
    "distance": float,
    "segment": float,
    "attenuation": float,
    "h0": float,
    "schedule": _floats,
    "shrink": float,
    "slack": float,
    "max_iters": int,
    "degree_cap": int,
    "input": str,
    "output": str,
    "k": float,
    "orders": _floats,
    "omega_max": float,
    "omega_points": int,
    "steps": _floats,
}
KEYS = tuple(_CONVERTERS)
_TRIPLE = ("distance", "segment", "attenuation")


@dataclass(frozen=True)
class RunConfig:
    nu: float = 0.5
    target_std: float | None = None
    target_gain: float | None = None
    distance: float | None = None
    segment: float | None = None
    attenuation: float | None = None
    h0: float | None = None
    schedule: tuple[float, ...] | None = None
    shrink: float = 0.5
    slack: float = 0.1
    max_iters: int = 20
    degree_cap: int = 5
    input: str | None = None
    output: str = "out"
    k: float | None = None
    orders: tuple[float, ...] = (0.2, 0.5, 0.8, 1.0)
    omega_max: float = 10.0
    omega_points: int = 101
    steps: tuple[float, ...] | None = None

    @classmethod
    def from_mapping(cls, raw: Mapping[str, str]) -> "RunConfig":
        unknown = sorted(set(raw) - set(KEYS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values = {}
        for key, text in raw.items():
            try:
                values[key] = _CONVERTERS[key](text.strip())
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {text!r}") from exc
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        try:
            check_order(self.nu)
            for nu in self.orders:
                check_order(nu)
        except InvalidOrderError as exc:
            raise ConfigError(str(exc)) from exc
        given = [getattr(self, k) is not None for k in _TRIPLE]
        if any(given) and not all(given):
            raise ConfigError("distance, segment and attenuation must be given together")
        if self.target_gain is not None and all(given):
            raise ConfigError("give either target_gain or the attenuation triple, not both")

    def gain_target(self) -> GainTarget:
        try:
            if self.target_gain is not None:
                return GainTarget.direct(self.target_gain)
            if self.attenuation is not None:
                return GainTarget.from_attenuation(self.distance, self.segment, self.attenuation)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        raise ConfigError("a gain target is required: target_gain or distance/segment/attenuation")

    def pipeline_config(self) -> PipelineConfig:
        if self.target_std is None:
            raise ConfigError("target_std is required")
        try:
            return PipelineConfig(
                nu=self.nu,
                target_std=self.target_std,
                gain=self.gain_target(),
                h0=self.h0,
                schedule=self.schedule,
                shrink=self.shrink,
                slack=self.slack,
                max_iters=self.max_iters,
                degree_cap=self.degree_cap,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_lines(self) -> list[str]:
        """Settings as ``key=value`` lines, omitting unset keys and the output directory."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None or f.name == "output":
                continue
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            out.append(f"{f.name}={v}")
        return out


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        out[key] = value
    return out


def load_config(path: str | Path | None = None, overrides: Mapping[str, str] | None = None) -> RunConfig:
    raw = read_config_file(path) if path is not None else {}
    raw.update(overrides or {})
    return RunConfig.from_mapping(raw)
