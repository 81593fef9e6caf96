"""Latency and payload-size models for pipeline components.

Every latency is a :class:`CostRange` resolved by a :class:`Mode`. Components
are either per-unit (latency scales with a quantity such as seconds of audio
or number of turns) or fixed (quantity ignored). Visual tile encoding is
per-tile unless batching is enabled, in which case any non-zero tile count
costs a single tile.
"""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError


class Mode(str, Enum):
    MIDPOINT = "midpoint"
    LOW = "low"
    HIGH = "high"
    UNIFORM_SAMPLE = "uniform_sample"


class UnknownComponent(KeyError):
    pass


class UnknownStream(KeyError):
    pass


@dataclass(frozen=True)
class CostRange:
    low: float
    high: float

    def __post_init__(self) -> None:
        if not 0 <= self.low <= self.high:
            raise ValueError(f"need 0 <= low <= high, got [{self.low}, {self.high}]")

    @classmethod
    def point(cls, value: float) -> CostRange:
        return cls(value, value)

    def resolve(self, mode: Mode, rng: random.Random | None = None) -> float:
        mode = Mode(mode)
        if mode is Mode.MIDPOINT:
            return (self.low + self.high) / 2
        if mode is Mode.LOW:
            return self.low
        if mode is Mode.HIGH:
            return self.high
        if rng is None:
            raise ValueError("uniform_sample mode needs a seeded rng")
        return rng.uniform(self.low, self.high)

    def scaled(self, factor: float) -> CostRange:
        return CostRange(self.low * factor, self.high * factor)


PER_UNIT = frozenset({"audio_tokenize_per_s", "audio_turn_encode", "vocoder_decode",
                      "server_audio_decode", "opus_encode"})
PER_TILE = frozenset({"visual_tile_encode", "visual_tile_encode_mobile"})
FIXED = frozenset({"axtree_read", "ocr_encode", "server_visual_decode", "server_recon_total",
                   "webp_encode"})
COMPONENTS = PER_UNIT | PER_TILE | FIXED

STREAMS = ("raw_pcm_3s", "raw_png", "opus_3s", "webp_1080p", "audio_tokens_3s",
           "visual_tokens_1080p", "hybrid_1080p")


@dataclass(frozen=True)
class CostProfile:
    latency: dict[str, CostRange]
    payload: dict[str, int]
    rates: dict[str, float]
    mode: Mode = Mode.MIDPOINT
    modes: dict[str, Mode] = field(default_factory=dict)
    seed: int = 0
    batch_tile_encode: bool = True
    client_device: str = "desktop"
    name: str = "custom"

    def __post_init__(self) -> None:
        missing = COMPONENTS - self.latency.keys()
        if missing:
            raise ConfigError("latency_ms", f"missing components {sorted(missing)}")
        extra = self.latency.keys() - COMPONENTS
        if extra:
            raise ConfigError("latency_ms", f"unknown components {sorted(extra)}")
        missing = set(STREAMS) - self.payload.keys()
        if missing:
            raise ConfigError("payload_bytes", f"missing streams {sorted(missing)}")
        if self.client_device not in ("desktop", "mobile"):
            raise ConfigError("client_device", f"expected desktop or mobile, got {self.client_device!r}")

    def mode_for(self, component: str) -> Mode:
        return self.modes.get(component, self.mode)

    def with_latency(self, **ranges: CostRange | float | tuple[float, float]) -> CostProfile:
        latency = dict(self.latency)
        for name, value in ranges.items():
            if name not in COMPONENTS:
                raise UnknownComponent(name)
            latency[name] = _as_range(value, f"latency_ms.{name}")
        return dataclasses.replace(self, latency=latency)

    def with_modes(self, **modes: Mode | str) -> CostProfile:
        for name in modes:
            if name not in COMPONENTS:
                raise UnknownComponent(name)
        return dataclasses.replace(self, modes={**self.modes, **{k: Mode(v) for k, v in modes.items()}})

    def replace(self, **changes: Any) -> CostProfile:
        return dataclasses.replace(self, **changes)


def component_latency(
    profile: CostProfile,
    component: str,
    quantity: float = 1.0,
    *,
    mode: Mode | None = None,
    rng: random.Random | None = None,
) -> float:
    """Latency in ms of ``component`` for ``quantity`` units (seconds, turns, tiles)."""
    if component not in COMPONENTS:
        raise UnknownComponent(component)
    if quantity < 0:
        raise ValueError("quantity must be non-negative")
    value = profile.latency[component].resolve(mode or profile.mode_for(component), rng)
    if component in FIXED:
        return value
    if component in PER_TILE and profile.batch_tile_encode:
        return value if quantity > 0 else 0.0
    return value * quantity


def tile_encode_component(profile: CostProfile) -> str:
    return "visual_tile_encode_mobile" if profile.client_device == "mobile" else "visual_tile_encode"


def payload_size(profile: CostProfile, stream: str) -> int:
    try:
        return profile.payload[stream]
    except KeyError:
        raise UnknownStream(stream) from None


# -- profile files ------------------------------------------------------------

def _as_range(value: Any, path: str) -> CostRange:
    try:
        if isinstance(value, CostRange):
            return value
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return CostRange.point(float(value))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return CostRange(float(value[0]), float(value[1]))
        if isinstance(value, dict):
            return CostRange(float(value["low"]), float(value["high"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(path, f"expected a number, [low, high] or {{low, high}}, got {value!r}")


def profile_from_dict(doc: dict[str, Any]) -> CostProfile:
    if not isinstance(doc, dict):
        raise ConfigError("", "profile must be a mapping")
    if doc.get("schema", 1) != 1:
        raise ConfigError("schema", f"unsupported profile schema {doc.get('schema')}")
    lat = doc.get("latency_ms")
    if not isinstance(lat, dict):
        raise ConfigError("latency_ms", "missing or not a mapping")
    latency = {k: _as_range(v, f"latency_ms.{k}") for k, v in lat.items()}
    try:
        payload = {k: int(v) for k, v in (doc.get("payload_bytes") or {}).items()}
        rates = {k: float(v) for k, v in (doc.get("rates") or {}).items()}
        mode = Mode(doc.get("mode", "midpoint"))
        modes = {k: Mode(v) for k, v in (doc.get("modes") or {}).items()}
    except ValueError as exc:
        raise ConfigError("profile", str(exc)) from None
    for k in modes:
        if k not in COMPONENTS:
            raise ConfigError(f"modes.{k}", "unknown component")
    return CostProfile(
        latency=latency,
        payload=payload,
        rates=rates,
        mode=mode,
        modes=modes,
        seed=int(doc.get("seed", 0)),
        batch_tile_encode=bool(doc.get("batch_tile_encode", True)),
        client_device=doc.get("client_device", "desktop"),
        name=doc.get("name", "custom"),
    )


def profile_to_dict(profile: CostProfile) -> dict[str, Any]:
    def rng_value(r: CostRange):
        return r.low if r.low == r.high else [r.low, r.high]

    return {
        "schema": 1,
        "name": profile.name,
        "mode": profile.mode.value,
        "modes": {k: v.value for k, v in profile.modes.items()},
        "seed": profile.seed,
        "batch_tile_encode": profile.batch_tile_encode,
        "client_device": profile.client_device,
        "latency_ms": {k: rng_value(v) for k, v in sorted(profile.latency.items())},
        "payload_bytes": dict(profile.payload),
        "rates": dict(profile.rates),
    }


def load_profile(source: str | Path = "paper_defaults") -> CostProfile:
    """Load a profile by file path, or by name from the shipped profiles."""
    path = Path(source)
    if path.suffix in (".yaml", ".yml", ".json") or path.exists():
        text = path.read_text(encoding="utf-8")
    else:
        try:
            text = resources.files("semtransport").joinpath("data", f"{source}.yaml").read_text("utf-8")
        except FileNotFoundError:
            raise ConfigError("profile", f"no shipped profile named {source!r}") from None
    return profile_from_dict(yaml.safe_load(text))


def default_profile() -> CostProfile:
    """The shipped default profile."""
    return load_profile("paper_defaults")
