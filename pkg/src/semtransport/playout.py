"""Downlink playout gaps without a jitter buffer.

Unit ``i`` (a TTS batch or an RTC frame) is ready and sent at ``i * D``. It
arrives after a constant transfer delay plus jitter. Playout starts once the
first unit has arrived and a cushion of ``beta * D`` has elapsed; unit ``i``
is due ``i * D`` after that. A unit that arrives after its deadline is a gap.

With the same seed, jitter draws are fixed standard variates scaled by the
jitter magnitude, so sweeping the magnitude never removes a gap.
"""

from __future__ import annotations

import csv
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, TextIO

import numpy as np

from .frame_codec import HEADER_SIZE, payload_bytes
from .net_emulator import Distribution, EmulatedLink, JitterSpec, LinkSpec


# named configurations: "batch_3s", "batch_5s", "streaming_rtc", ...
NAME_PATTERN = re.compile(r"batch_(\d+(?:\.\d+)?)s|streaming_rtc")


class PlayoutMode(str, Enum):
    BATCH_TTS = "batch_tts"
    STREAMING_RTC = "streaming_rtc"


@dataclass(frozen=True)
class PlayoutConfig:
    mode: PlayoutMode
    unit_duration_ms: float
    n_units: int
    cushion_fraction: float = 0.2
    tokens_per_s: float = 50.0
    codebook_size: int = 1024
    opus_bps: float = 32000.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", PlayoutMode(self.mode))
        if self.unit_duration_ms <= 0:
            raise ValueError("unit duration must be positive")
        if self.n_units < 2:
            raise ValueError("need at least two units")
        if self.cushion_fraction < 0:
            raise ValueError("cushion fraction must be non-negative")

    @classmethod
    def batch_tts(cls, batch_ms: float = 3000.0, n_units: int = 40, cushion_fraction: float = 0.2) -> PlayoutConfig:
        return cls(PlayoutMode.BATCH_TTS, batch_ms, n_units, cushion_fraction)

    @classmethod
    def streaming_rtc(cls, frame_ms: float = 20.0, n_units: int = 250, cushion_fraction: float = 0.0) -> PlayoutConfig:
        return cls(PlayoutMode.STREAMING_RTC, frame_ms, n_units, cushion_fraction)

    @classmethod
    def from_name(cls, name: str, cushion_fraction: float = 0.2) -> PlayoutConfig:
        """``batch_<D>s`` with the given cushion, or ``streaming_rtc`` (no cushion)."""
        m = NAME_PATTERN.fullmatch(name)
        if m is None:
            raise ValueError(f"unknown playout configuration {name!r}")
        if m.group(1) is None:
            return cls.streaming_rtc()
        return cls.batch_tts(float(m.group(1)) * 1000, cushion_fraction=cushion_fraction)

    @property
    def cushion_ms(self) -> float:
        return self.cushion_fraction * self.unit_duration_ms

    @property
    def unit_bytes(self) -> int:
        """Bytes on the wire per unit: a token frame, or one Opus frame."""
        if self.mode is PlayoutMode.BATCH_TTS:
            tokens = round(self.tokens_per_s * self.unit_duration_ms / 1000)
            return HEADER_SIZE + payload_bytes(tokens, self.codebook_size)
        return round(self.opus_bps * self.unit_duration_ms / 1000 / 8)


class UnitRecord(NamedTuple):
    trial: int
    unit: int
    scheduled_send_ms: float
    arrival_ms: float
    deadline_ms: float
    gap_ms: float


@dataclass(frozen=True)
class PlayoutTrace:
    """Per-unit timings for every trial, shaped ``(n_trials, n_units)``."""

    config: PlayoutConfig
    jitter: JitterSpec
    scheduled_send_ms: np.ndarray
    arrival_ms: np.ndarray
    deadline_ms: np.ndarray
    gap_ms: np.ndarray

    @property
    def n_trials(self) -> int:
        return self.gap_ms.shape[0]

    @property
    def gaps(self) -> np.ndarray:
        return self.arrival_ms > self.deadline_ms

    @property
    def gap_count(self) -> int:
        return int(self.gaps.sum())

    @property
    def gap_rate(self) -> float:
        return self.gap_count / self.gaps.size

    @property
    def total_gap_ms(self) -> float:
        return float(self.gap_ms.sum())

    def records(self, trial: int | None = None) -> Iterable[UnitRecord]:
        trials = range(self.n_trials) if trial is None else [trial]
        for t in trials:
            for u in range(self.config.n_units):
                yield UnitRecord(t, u, float(self.scheduled_send_ms[t, u]), float(self.arrival_ms[t, u]),
                                 float(self.deadline_ms[t, u]), float(self.gap_ms[t, u]))

    def write_csv(self, fh: TextIO, trial: int | None = None) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(UnitRecord._fields)
        for r in self.records(trial):
            w.writerow([r.trial, r.unit] + [f"{v:.6f}" for v in r[2:]])


def _standard_draws(jitter: JitterSpec, n_trials: int, n_units: int, seed: int) -> np.ndarray:
    # one independent stream per trial, so trials can be split across workers
    children = np.random.SeedSequence(seed).spawn(n_trials)
    return np.stack([jitter.standard_draws(np.random.default_rng(c), n_units) for c in children])


def _trace(config: PlayoutConfig, jitter: JitterSpec, base_delay_ms: float, draws: np.ndarray) -> PlayoutTrace:
    n_trials, n = draws.shape
    j = jitter.param_ms * draws if jitter.enabled else np.zeros_like(draws)
    send = np.broadcast_to(np.arange(n) * config.unit_duration_ms, (n_trials, n))
    arrival = send + base_delay_ms + j
    start = arrival[:, :1] + config.cushion_ms
    deadline = start + send
    gap = np.maximum(0.0, arrival - deadline)
    return PlayoutTrace(config, jitter, np.array(send), arrival, deadline, gap)


def simulate_playout(
    config: PlayoutConfig,
    link: LinkSpec,
    n_trials: int = 100,
    *,
    seed: int | None = None,
    include_propagation: bool = False,
) -> PlayoutTrace:
    """Run ``n_trials`` independent playout trials over the downlink of ``link``.

    The seed defaults to the link's jitter seed.
    """
    if n_trials < 1:
        raise ValueError("need at least one trial")
    seed = link.jitter.seed if seed is None else seed
    base = EmulatedLink(link).base_ms(config.unit_bytes, include_propagation, direction="down")
    draws = _standard_draws(link.jitter, n_trials, config.n_units, seed)
    return _trace(config, link.jitter, base, draws)


def gap_rate_curve(
    config: PlayoutConfig,
    link_template: LinkSpec,
    sweep: Sequence[float],
    n_trials: int = 100,
    *,
    seed: int | None = None,
) -> list[tuple[float, float]]:
    """Aggregated gap rate at each jitter magnitude.

    Uses the template's jitter distribution, or Uniform(0, J) when the
    template has none.
    """
    if list(sweep) != sorted(sweep):
        raise ValueError("jitter sweep must be sorted ascending")
    if link_template.jitter.distribution is Distribution.NONE:
        link_template = link_template.with_jitter(0.0, Distribution.UNIFORM)
    seed = link_template.jitter.seed if seed is None else seed
    base = EmulatedLink(link_template).base_ms(config.unit_bytes, direction="down")
    draws = _standard_draws(link_template.jitter, n_trials, config.n_units, seed)
    out = []
    for value in sweep:
        jitter = link_template.with_jitter(value).jitter
        out.append((value, _trace(config, jitter, base, draws).gap_rate))
    return out


def gap_free_threshold(
    config: PlayoutConfig,
    link_template: LinkSpec,
    sweep: Sequence[float],
    n_trials: int = 100,
    *,
    seed: int | None = None,
) -> float:
    """Largest swept jitter up to which every point is gap-free; 0 if the first point gaps."""
    threshold = 0.0
    for value, rate in gap_rate_curve(config, link_template, sweep, n_trials, seed=seed):
        if rate > 0:
            break
        threshold = value
    return threshold
