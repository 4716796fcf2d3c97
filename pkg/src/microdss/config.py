"""Kernel tunables and dotted-key overrides (``proximity.dMax=8``)."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from microdss.fsf import ProximityConfig


@dataclass(frozen=True)
class IndicatorConfig:
    decay: float = 0.1
    brigade_base: float = 0.3
    brigade_per_opposition: float = 0.2


@dataclass(frozen=True)
class AutomatonConfig:
    emerge_i1: float = 0.2       # S1 -> S2
    strong_i1: float = 0.5       # S2 -> S3 and S4 -> S3
    strong_i2: float = 0.2
    decline_i1: float = 0.3      # S3 -> S4
    retire_i1: float = 0.05      # S4 -> retired
    consecutive: int = 2


@dataclass(frozen=True)
class PredictionConfig:
    k: int = 3
    alpha: float = 0.1
    horizon: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass(frozen=True)
class KernelConfig:
    proximity: ProximityConfig = field(default_factory=ProximityConfig)
    indicators: IndicatorConfig = field(default_factory=IndicatorConfig)
    automaton: AutomatonConfig = field(default_factory=AutomatonConfig)
    prediction: PredictionConfig = field(default_factory=PredictionConfig)
    eps: float = 1e-6
    history_cap: int = 32


# public dotted key -> (section attribute or None, field name)
OVERRIDE_KEYS: dict[str, tuple[str | None, str]] = {
    "proximity.dMax": ("proximity", "d_max"),
    "proximity.tMax": ("proximity", "t_max"),
    "proximity.linkThreshold": ("proximity", "link_threshold"),
    "indicators.decay": ("indicators", "decay"),
    "indicators.brigadeBase": ("indicators", "brigade_base"),
    "indicators.brigadePerOpposition": ("indicators", "brigade_per_opposition"),
    "automaton.emergeI1": ("automaton", "emerge_i1"),
    "automaton.strongI1": ("automaton", "strong_i1"),
    "automaton.strongI2": ("automaton", "strong_i2"),
    "automaton.declineI1": ("automaton", "decline_i1"),
    "automaton.retireI1": ("automaton", "retire_i1"),
    "automaton.consecutive": ("automaton", "consecutive"),
    "characterization.eps": (None, "eps"),
    "representation.historyCap": (None, "history_cap"),
    "prediction.k": ("prediction", "k"),
    "prediction.alpha": ("prediction", "alpha"),
    "prediction.horizon": ("prediction", "horizon"),
}


def _coerce(raw: str, current):
    if isinstance(current, int):
        return int(raw)
    return float(raw)


def apply_overrides(cfg: KernelConfig, overrides: dict[str, str]) -> KernelConfig:
    """Return ``cfg`` with string overrides applied. Raises ValueError on bad keys/values."""
    for key, raw in overrides.items():
        if key not in OVERRIDE_KEYS:
            raise ValueError(f"unknown setting {key!r}; known: {', '.join(sorted(OVERRIDE_KEYS))}")
        section, name = OVERRIDE_KEYS[key]
        target = cfg if section is None else getattr(cfg, section)
        try:
            value = _coerce(raw, getattr(target, name))
        except ValueError:
            raise ValueError(f"bad value for {key}: {raw!r}") from None
        updated = dataclasses.replace(target, **{name: value})
        cfg = updated if section is None else dataclasses.replace(cfg, **{section: updated})
    return cfg


def parse_set_args(items: list[str] | None) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValueError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out
