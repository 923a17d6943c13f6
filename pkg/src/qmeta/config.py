"""INI-style scenario configuration.

Sections and keys (all optional; defaults in brackets)::

    [lattice]  n_total [2048], n_active [512]
    [medium]   v_tilde [1.99], u_tilde [1.99], r [0.25]
    [qubit]    epsilon [1], E_J [2], d00 [0.4], d11 [3.6], d01 [0.2]
    [pulses]   A [0.18], wavelength [25], omega [v_tilde*k], l [240], phi0 [0], offset [300]
    [run]      dt [0.02], t_end [auto], order [4], stride [2500], mode [live]
    [probe]    A [0.002], l [240], omegas [0.5, 0.6], t_snapshot [500], t_end [auto],
               state [synthetic], p_max [0.16], L_m [auto]
    [bands]    chi0, chi_tilde, L_m [from state or defaults], state, M [8], n_k [201]
    [rabi]     A [0.1], l [4000], periods [3], samples [10], window [200]
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .model import LatticeLayout, MediumParams, QubitParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeConfig:
    n_total: int = 2048
    n_active: int = 512

    def layout(self) -> LatticeLayout:
        return LatticeLayout.centered(self.n_total, self.n_active)


@dataclass(frozen=True)
class PulseConfig:
    A: float = 0.18
    wavelength: float = 25.0
    omega: Optional[float] = None
    l: float = 240.0
    phi0: float = 0.0
    offset: float = 300.0

    @property
    def k(self) -> float:
        return 2 * math.pi / self.wavelength


@dataclass(frozen=True)
class RunConfig:
    dt: float = 0.02
    t_end: Optional[float] = None
    order: int = 4
    stride: int = 2500
    mode: str = "live"


@dataclass(frozen=True)
class ProbeConfig:
    A: float = 2e-3
    l: float = 240.0
    omegas: tuple = (0.5, 0.6)
    t_snapshot: float = 500.0
    t_end: Optional[float] = None
    state: str = "synthetic"
    p_max: float = 0.16
    L_m: Optional[float] = None


@dataclass(frozen=True)
class BandsConfig:
    chi0: Optional[float] = None
    chi_tilde: Optional[float] = None
    L_m: float = 12.5
    state: Optional[str] = None
    M: int = 8
    n_k: int = 201


@dataclass(frozen=True)
class RabiConfig:
    A: float = 0.1
    l: float = 4000.0
    periods: float = 3.0
    samples: int = 10
    window: int = 200


@dataclass(frozen=True)
class Config:
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    medium: MediumParams = field(default_factory=MediumParams)
    qubit: QubitParams = field(default_factory=QubitParams)
    pulses: PulseConfig = field(default_factory=PulseConfig)
    run: RunConfig = field(default_factory=RunConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    bands: BandsConfig = field(default_factory=BandsConfig)
    rabi: RabiConfig = field(default_factory=RabiConfig)

    def with_section(self, name: str, **values) -> "Config":
        return replace(self, **{name: replace(getattr(self, name), **values)})

    def flat_sections(self) -> tuple:
        return tuple(f.name for f in fields(self))

    def section_keys(self, name: str) -> tuple:
        return tuple(f.name for f in fields(getattr(self, name)))

    def flat(self) -> dict:
        """Every parameter as ``section.key -> value`` for metadata echoes."""
        out = {}
        for f in fields(self):
            sec = getattr(self, f.name)
            for g in fields(sec):
                out[f"{f.name}.{g.name}"] = getattr(sec, g.name)
        return out


def _convert(raw: str, default, name: str):
    text = raw.strip()
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(x) for x in text.replace(",", " ").split())
        if default is None:
            if text.lower() in ("", "auto", "none"):
                return None
            if name.endswith(".state"):
                return text
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {raw!r}") from exc


def _validate(cfg: Config) -> None:
    run = cfg.run
    if run.mode not in ("live", "frozen"):
        raise ConfigError(f"run.mode must be 'live' or 'frozen', got {run.mode!r}")
    if not run.dt > 0:
        raise ConfigError(f"run.dt must be > 0, got {run.dt}")
    if run.order not in (2, 4):
        raise ConfigError(f"run.order must be 2 or 4, got {run.order}")
    if run.stride < 1:
        raise ConfigError("run.stride must be >= 1")
    p = cfg.pulses
    if not p.wavelength > 0:
        raise ConfigError(f"pulses.wavelength must be > 0, got {p.wavelength}")
    if p.offset < 0:
        raise ConfigError(f"pulses.offset must be >= 0, got {p.offset}")
    if not cfg.probe.omegas:
        raise ConfigError("probe.omegas must list at least one frequency")
    if not 0 <= cfg.probe.p_max <= 1:
        raise ConfigError(f"probe.p_max must lie in [0, 1], got {cfg.probe.p_max}")
    if cfg.rabi.samples < 1 or cfg.rabi.window < 1:
        raise ConfigError("rabi.samples and rabi.window must be >= 1")


def parse_config(text: str) -> Config:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    cfg = Config()
    known = {f.name: f for f in fields(Config)}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]")
        current = getattr(cfg, section)
        slots = {f.name: f for f in fields(current)}
        updates = {}
        for key, raw in parser.items(section):
            if key not in slots:
                raise ConfigError(f"unknown key {section}.{key}")
            default = slots[key].default
            updates[key] = _convert(raw, default, f"{section}.{key}")
        try:
            cfg = replace(cfg, **{section: replace(current, **updates)})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}]: {exc}") from exc
    try:
        cfg.lattice.layout()
    except ValueError as exc:
        raise ConfigError(f"lattice: {exc}") from exc
    _validate(cfg)
    return cfg


def load_config(path: Optional[str | Path]) -> Config:
    if path is None:
        return Config()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
