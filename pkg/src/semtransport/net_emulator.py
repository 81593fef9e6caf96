"""Deterministic WAN link model.

Transfer time is serialization (bytes * 8 / bandwidth), plus optional one-way
propagation (RTT / 2), plus a jitter sample. There is no queueing: each frame
is assumed to have the link to itself, and arrivals are not forced into FIFO
order, so jitter can reorder frames.

Jitter draws are a standard variate times the distribution parameter, so for a
fixed seed a larger parameter scales every sample up proportionally. Normal
jitter is symmetric and can make a frame arrive earlier than its nominal
delay; it is not clipped.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np


class Distribution(str, Enum):
    NONE = "none"
    UNIFORM = "uniform"          # Uniform(0, param)
    NORMAL = "normal"            # Normal(0, sd=param)
    EXPONENTIAL = "exponential"  # Exponential(mean=param)


@dataclass(frozen=True)
class JitterSpec:
    distribution: Distribution = Distribution.NONE
    param_ms: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "distribution", Distribution(self.distribution))
        if self.param_ms < 0:
            raise ValueError(f"jitter parameter must be non-negative, got {self.param_ms}")

    @property
    def enabled(self) -> bool:
        return self.distribution is not Distribution.NONE and self.param_ms > 0

    def standard_draws(self, rng: np.random.Generator, size) -> np.ndarray:
        d = self.distribution
        if d is Distribution.UNIFORM:
            return rng.random(size)
        if d is Distribution.NORMAL:
            return rng.standard_normal(size)
        if d is Distribution.EXPONENTIAL:
            return rng.standard_exponential(size)
        return np.zeros(size)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.distribution is Distribution.NONE:
            return np.zeros(size)
        return self.param_ms * self.standard_draws(rng, size)


@dataclass(frozen=True)
class LinkSpec:
    uplink_bps: float
    downlink_bps: float
    rtt_ms: float = 0.0
    jitter: JitterSpec = JitterSpec()
    # accepted for configuration completeness; nothing recovers from loss
    loss_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.uplink_bps <= 0 or self.downlink_bps <= 0:
            raise ValueError("link bandwidths must be positive")
        if self.rtt_ms < 0:
            raise ValueError("rtt must be non-negative")
        if not 0 <= self.loss_rate <= 1:
            raise ValueError("loss rate must be in [0, 1]")

    @classmethod
    def symmetric_mbps(cls, mbps: float, rtt_ms: float = 50.0, jitter: JitterSpec = JitterSpec()) -> LinkSpec:
        return cls(mbps * 1e6, mbps * 1e6, rtt_ms, jitter)

    def with_uplink(self, bps: float) -> LinkSpec:
        return dataclasses.replace(self, uplink_bps=bps)

    def with_jitter(self, param_ms: float, distribution: Distribution | None = None) -> LinkSpec:
        j = JitterSpec(distribution or self.jitter.distribution, param_ms, self.jitter.seed)
        return dataclasses.replace(self, jitter=j)

    def bps(self, direction: str) -> float:
        if direction == "up":
            return self.uplink_bps
        if direction == "down":
            return self.downlink_bps
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")


def serialization_ms(nbytes: float, bps: float) -> float:
    if bps <= 0:
        raise ValueError("bandwidth must be positive")
    return nbytes * 8 * 1000 / bps


class Delivery(NamedTuple):
    sequence: int
    sent_ms: float
    nbytes: int
    arrival_ms: float


class EmulatedLink:
    """A link instance with its own jitter stream; confine one to a single run."""

    def __init__(self, spec: LinkSpec, seed: int | None = None):
        self.spec = spec
        self.rng = np.random.default_rng(spec.jitter.seed if seed is None else seed)

    def jitter_ms(self, size=None):
        if not self.spec.jitter.enabled:
            return 0.0 if size is None else np.zeros(size)
        draws = self.spec.jitter.sample(self.rng, size)
        return float(draws) if size is None else draws

    def base_ms(self, nbytes: float, include_propagation: bool = False, direction: str = "up") -> float:
        t = serialization_ms(nbytes, self.spec.bps(direction))
        if include_propagation:
            t += self.spec.rtt_ms / 2
        return t

    def one_way_ms(self, nbytes: float, include_propagation: bool = False, direction: str = "up") -> float:
        return self.base_ms(nbytes, include_propagation, direction) + self.jitter_ms()

    def deliver_sequence(
        self,
        sends: Sequence[tuple[float, int]],
        include_propagation: bool = False,
        direction: str = "up",
    ) -> list[Delivery]:
        """Arrival times for ``(send_ms, nbytes)`` pairs, in send order.

        Sequence numbers are the send indices; sort by ``arrival_ms`` to see
        the receive order.
        """
        times = [t for t, _ in sends]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("send times must be sorted")
        jitter = self.jitter_ms(len(sends))
        return [
            Delivery(i, t, n, t + self.base_ms(n, include_propagation, direction) + float(jitter[i]))
            for i, (t, n) in enumerate(sends)
        ]


def one_way_ms(nbytes: float, link: LinkSpec | EmulatedLink, include_propagation: bool = False,
               direction: str = "up") -> float:
    """One-way transfer time. A bare LinkSpec draws from a fresh jitter stream."""
    if isinstance(link, LinkSpec):
        link = EmulatedLink(link)
    return link.one_way_ms(nbytes, include_propagation, direction)


def deliver_sequence(sends: Sequence[tuple[float, int]], link: LinkSpec | EmulatedLink,
                     include_propagation: bool = False, direction: str = "up") -> list[Delivery]:
    if isinstance(link, LinkSpec):
        link = EmulatedLink(link)
    return link.deliver_sequence(sends, include_propagation, direction)


def count_inversions(deliveries: Sequence[Delivery]) -> int:
    """Number of frame pairs received out of send order."""
    arrivals = [d.arrival_ms for d in sorted(deliveries, key=lambda d: d.sequence)]
    n = 0
    for i, a in enumerate(arrivals):
        n += sum(1 for b in arrivals[i + 1:] if b < a)
    return n
