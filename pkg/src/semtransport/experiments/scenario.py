"""Scenario files: a versioned YAML mapping describing one figure or table run.

Example::

    schema: 1
    name: fig_latency
    kind: latency            # bytes | latency | breakdown | gap_rate | rate_accuracy
    profile: paper_defaults  # shipped name or path
    methods: [raw_compress, token_hybrid]
    media: [vision]
    link: {bandwidth_mbps: [1, 5, 100], rtt_ms: 50}
    output: fig_latency.csv

``--set dotted.path=value`` overrides are applied to the raw mapping before
validation, so every field can be overridden from the command line.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import yaml

from ..cost_models import CostProfile, load_profile, profile_from_dict, profile_to_dict
from ..errors import ConfigError
from ..net_emulator import Distribution
from ..pipelines import Medium, Method
from ..playout import NAME_PATTERN as PLAYOUT_PATTERN
from ..screen_repr import Source
from . import reference

SCHEMA_VERSION = 1
KINDS = ("bytes", "latency", "breakdown", "gap_rate", "rate_accuracy")


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    profile: CostProfile
    methods: tuple[str, ...]
    media: tuple[Medium, ...] = (Medium.VISION,)
    sources: tuple[Source, ...] = (Source.ACCESSIBILITY_TREE,)
    bandwidth_mbps: tuple[float, ...] = ()
    rtt_ms: float = 50.0
    include_propagation: bool = False
    baseline_encode: bool = False
    jitter_distribution: Distribution = Distribution.UNIFORM
    jitter_sweep_ms: tuple[float, ...] = ()
    trials: int = 100
    cushion_fraction: float = 0.2
    corpus_path: Path | None = None
    corpus_count: int = 200
    corpus_seed: int = 1
    snapshot_seed: int = 0
    jitter_seed: int = 7
    overlay: tuple[str, ...] = ()
    output: str = ""

    @property
    def output_name(self) -> str:
        return self.output or f"{self.name}.csv"


def _parse_value(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def apply_overrides(doc: dict, overrides: Iterable[str]) -> dict:
    """Return a copy of ``doc`` with ``a.b.c=value`` assignments applied."""
    doc = copy.deepcopy(doc)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(item, "override must look like dotted.path=value")
        node = doc
        parts = key.split(".")
        for i, part in enumerate(parts[:-1]):
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(".".join(parts[: i + 1]), "cannot override inside a non-mapping")
            node = nxt
        node[parts[-1]] = _parse_value(raw)
    return doc


def _get(doc: dict, path: str, expected: type | tuple[type, ...], default: Any = None) -> Any:
    node: Any = doc
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    if node is None:
        return default
    if not isinstance(node, expected) or isinstance(node, bool) and bool not in _as_tuple(expected):
        raise ConfigError(path, f"expected {_type_name(expected)}, got {type(node).__name__}")
    return node


def _as_tuple(t):
    return t if isinstance(t, tuple) else (t,)


def _type_name(t) -> str:
    return " or ".join(x.__name__ for x in _as_tuple(t))


def _numbers(doc: dict, path: str) -> tuple[float, ...]:
    values = _get(doc, path, list, [])
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}[{i}]", f"expected a number, got {v!r}")
        if v < 0:
            raise ConfigError(f"{path}[{i}]", "must be non-negative")
        out.append(float(v))
    return tuple(out)


def _enum_list(doc: dict, path: str, enum, default):
    values = _get(doc, path, list, None)
    if values is None:
        return default
    try:
        return tuple(enum(v) for v in values)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _resolve_profile(doc: dict, base: Path | None) -> CostProfile:
    ref = _get(doc, "profile", str, "paper_defaults")
    candidate = (base / ref) if base is not None else Path(ref)
    try:
        profile = load_profile(candidate if candidate.exists() else ref)
    except ConfigError as exc:
        raise ConfigError(f"profile.{exc.path}" if exc.path != "profile" else "profile", str(exc)) from None
    extra = _get(doc, "profile_overrides", dict, None)
    if extra:
        merged = profile_to_dict(profile)
        for section, values in extra.items():
            if isinstance(merged.get(section), dict) and isinstance(values, dict):
                merged[section] = {**merged[section], **values}
            else:
                merged[section] = values
        try:
            profile = profile_from_dict(merged)
        except ConfigError as exc:
            raise ConfigError(f"profile_overrides.{exc.path}", str(exc)) from None
    return profile


def scenario_from_dict(doc: dict, base: Path | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ConfigError("", "scenario must be a mapping")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ConfigError("schema", f"expected {SCHEMA_VERSION}, got {doc.get('schema')!r}")
    name = _get(doc, "name", str)
    if not name:
        raise ConfigError("name", "required")
    kind = _get(doc, "kind", str)
    if kind not in KINDS:
        raise ConfigError("kind", f"expected one of {', '.join(KINDS)}, got {kind!r}")

    methods = tuple(_get(doc, "methods", list, []))
    if not methods:
        raise ConfigError("methods", "method grid is empty")
    for i, m in enumerate(methods):
        valid = bool(PLAYOUT_PATTERN.fullmatch(str(m))) if kind == "gap_rate" else m in {x.value for x in Method}
        if not valid:
            raise ConfigError(f"methods[{i}]", f"unknown method {m!r} for kind {kind}")

    bandwidths = _numbers(doc, "link.bandwidth_mbps")
    if kind in ("latency", "breakdown") and not bandwidths:
        raise ConfigError("link.bandwidth_mbps", "bandwidth grid is empty")
    if any(b <= 0 for b in bandwidths):
        raise ConfigError("link.bandwidth_mbps", "bandwidths must be positive")
    sweep = _numbers(doc, "link.jitter.sweep_ms")
    if kind == "gap_rate" and not sweep:
        raise ConfigError("link.jitter.sweep_ms", "jitter sweep is empty")
    if list(sweep) != sorted(sweep):
        raise ConfigError("link.jitter.sweep_ms", "must be sorted ascending")

    try:
        dist = Distribution(_get(doc, "link.jitter.distribution", str, "uniform"))
    except ValueError as exc:
        raise ConfigError("link.jitter.distribution", str(exc)) from None

    overlay = tuple(_get(doc, "overlay", list, []))
    for i, fig in enumerate(overlay):
        if fig not in reference.MANIFEST:
            raise ConfigError(f"overlay[{i}]", f"unknown reference figure {fig!r}")

    trials = _get(doc, "playout.trials", int, 100)
    if trials < 1:
        raise ConfigError("playout.trials", "must be at least 1")
    corpus_path = _get(doc, "corpus.path", str, None)
    if corpus_path is not None:
        corpus_path = Path(corpus_path)
        if not corpus_path.is_absolute() and base is not None:
            corpus_path = base / corpus_path
        if not corpus_path.exists():
            raise ConfigError("corpus.path", f"no such file {corpus_path}")

    return Scenario(
        name=name,
        kind=kind,
        profile=_resolve_profile(doc, base),
        methods=methods,
        media=_enum_list(doc, "media", Medium, (Medium.VISION,)),
        sources=_enum_list(doc, "sources", Source, (Source.ACCESSIBILITY_TREE,)),
        bandwidth_mbps=bandwidths,
        rtt_ms=float(_get(doc, "link.rtt_ms", (int, float), 50.0)),
        include_propagation=_get(doc, "link.include_propagation", bool, False),
        baseline_encode=_get(doc, "baseline_encode", bool, False),
        jitter_distribution=dist,
        jitter_sweep_ms=sweep,
        trials=trials,
        cushion_fraction=float(_get(doc, "playout.cushion_fraction", (int, float), 0.2)),
        corpus_path=corpus_path,
        corpus_count=_get(doc, "corpus.count", int, 200),
        corpus_seed=_get(doc, "seeds.corpus", int, 1),
        snapshot_seed=_get(doc, "seeds.snapshot", int, 0),
        jitter_seed=_get(doc, "seeds.jitter", int, 7),
        overlay=overlay,
        output=_get(doc, "output", str, ""),
    )


def shipped_scenarios() -> list[str]:
    folder = resources.files("semtransport").joinpath("data", "scenarios")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".yaml"))


def read_scenario_doc(source: str | Path) -> tuple[dict, Path | None]:
    """Raw mapping for a scenario file path or a shipped scenario name."""
    path = Path(source)
    if path.exists():
        text, base = path.read_text(encoding="utf-8"), path.parent
    elif re.fullmatch(r"[\w-]+", str(source)):
        try:
            text = resources.files("semtransport").joinpath("data", "scenarios", f"{source}.yaml").read_text("utf-8")
        except FileNotFoundError:
            raise ConfigError("scenario", f"no scenario file or shipped scenario named {source!r}") from None
        base = None
    else:
        raise ConfigError("scenario", f"no such file {source}")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("scenario", f"invalid YAML: {exc}") from None
    return doc, base


def load_scenario(source: str | Path, overrides: Iterable[str] = ()) -> Scenario:
    doc, base = read_scenario_doc(source)
    if not isinstance(doc, dict):
        raise ConfigError("", "scenario must be a mapping")
    return scenario_from_dict(apply_overrides(doc, overrides), base)
