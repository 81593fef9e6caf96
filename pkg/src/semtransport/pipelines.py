"""Per-turn latency for each transport method.

A turn is encode on the sender, transfer over the emulated link, decode on
the receiver. Model inference is never included. On the uplink the client
encodes and the server decodes; on the downlink the server encodes (vocodes)
and the client decodes.

Baseline encoder costs (WebP, Opus) are charged by default and can be turned
off with ``baseline_encode=False``; headline latency anchors and the voice
crossover are computed with them off.
"""

from __future__ import annotations

import math
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, fields
from enum import Enum

from .corpus import reference_snapshot
from .cost_models import CostProfile, component_latency, payload_size, tile_encode_component
from .frame_codec import (
    AUDIO_CODEBOOK,
    TTS_CODEBOOK,
    VISUAL_CODEBOOK,
    CodebookRegistry,
    Modality,
    default_registry,
    encode_frame,
)
from .net_emulator import EmulatedLink, LinkSpec
from .screen_repr import ScreenSnapshot, Source, assemble_hybrid, plan_tiling


class Method(str, Enum):
    RAW = "raw"
    RAW_COMPRESS = "raw_compress"
    TOKEN_STATIC = "token_static"
    TOKEN_HYBRID = "token_hybrid"

    @property
    def is_token(self) -> bool:
        return self in (Method.TOKEN_STATIC, Method.TOKEN_HYBRID)


class Medium(str, Enum):
    VOICE = "voice"
    VISION = "vision"


class NoCrossover(ValueError):
    pass


STAGES = ("encode_ms", "serialization_ms", "propagation_ms", "jitter_ms", "jitter_buffer_ms", "decode_ms")


@dataclass(frozen=True)
class LatencyBreakdown:
    method: Method
    medium: Medium
    direction: str
    bandwidth_bps: float
    payload_bytes: int
    encode_ms: float = 0.0
    serialization_ms: float = 0.0
    propagation_ms: float = 0.0
    jitter_ms: float = 0.0
    jitter_buffer_ms: float = 0.0
    decode_ms: float = 0.0

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.name in STAGES and getattr(self, f.name) < 0:
                raise ValueError(f"stage {f.name} is negative")

    @property
    def total_ms(self) -> float:
        return sum(getattr(self, s) for s in STAGES)

    def stages(self) -> dict[str, float]:
        return {s: getattr(self, s) for s in STAGES}


def _transfer(nbytes: int, link: LinkSpec | EmulatedLink, direction: str, include_propagation: bool):
    emu = link if isinstance(link, EmulatedLink) else EmulatedLink(link)
    ser = emu.base_ms(nbytes, False, direction)
    prop = emu.spec.rtt_ms / 2 if include_propagation else 0.0
    return emu.spec, ser, prop, emu.jitter_ms()


def _audio_frame_bytes(profile: CostProfile, registry: CodebookRegistry, seconds: float,
                       modality: Modality, codebook: int, rate_key: str) -> int:
    n = round(profile.rates[rate_key] * seconds)
    size = registry.codebook_size(codebook)
    return encode_frame(modality, codebook, tokens=[i % size for i in range(n)], registry=registry).size


def run_uplink_turn(
    method: Method,
    medium: Medium,
    link: LinkSpec | EmulatedLink,
    profile: CostProfile,
    snapshot: ScreenSnapshot | None = None,
    *,
    registry: CodebookRegistry | None = None,
    include_propagation: bool = False,
    baseline_encode: bool = True,
    rng: random.Random | None = None,
) -> LatencyBreakdown:
    method, medium = Method(method), Medium(medium)
    registry = registry or default_registry()
    lat = lambda comp, q=1.0: component_latency(profile, comp, q, rng=rng)  # noqa: E731
    encode = decode = 0.0

    if medium is Medium.VOICE:
        turn_s = profile.rates["turn_s"]
        if method is Method.RAW:
            nbytes = payload_size(profile, "raw_pcm_3s")
        elif method is Method.RAW_COMPRESS:
            nbytes = payload_size(profile, "opus_3s")
            if baseline_encode:
                encode = lat("opus_encode")
        else:
            nbytes = _audio_frame_bytes(profile, registry, turn_s, Modality.AUDIO_TOKENS,
                                        AUDIO_CODEBOOK, "audio_tokens_per_s")
            encode = lat("audio_turn_encode")
            decode = lat("server_audio_decode")
    else:
        if method is Method.RAW:
            nbytes = payload_size(profile, "raw_png")
        elif method is Method.RAW_COMPRESS:
            nbytes = payload_size(profile, "webp_1080p")
            if baseline_encode:
                encode = lat("webp_encode")
        elif method is Method.TOKEN_STATIC:
            w, h = (snapshot.width, snapshot.height) if snapshot else (1920, 1080)
            plan = plan_tiling(w, h)
            size = registry.codebook_size(VISUAL_CODEBOOK)
            nbytes = encode_frame(Modality.VISUAL_TOKENS, VISUAL_CODEBOOK, tokens=[i % size for i in range(plan.token_count)],
                                  registry=registry).size
            encode = lat(tile_encode_component(profile), plan.tile_count)
            decode = lat("server_visual_decode")
        else:
            if snapshot is None:
                raise ValueError("token_hybrid vision needs a screen snapshot")
            plan = plan_tiling(snapshot.width, snapshot.height)
            nbytes = assemble_hybrid(snapshot, plan, registry).total_bytes
            if snapshot.source is Source.OCR:
                text_cost = snapshot.ocr_encode_ms if snapshot.ocr_encode_ms is not None else lat("ocr_encode")
            else:
                text_cost = lat("axtree_read")
            encode = text_cost + lat(tile_encode_component(profile), plan.tile_count)
            decode = lat("server_visual_decode")

    spec, ser, prop, jit = _transfer(nbytes, link, "up", include_propagation)
    return LatencyBreakdown(method, medium, "up", spec.uplink_bps, nbytes,
                            encode_ms=encode, serialization_ms=ser, propagation_ms=prop,
                            jitter_ms=jit, decode_ms=decode)


def run_downlink_turn(
    method: Method,
    link: LinkSpec | EmulatedLink,
    profile: CostProfile,
    *,
    batch_s: float = 3.0,
    registry: CodebookRegistry | None = None,
    include_propagation: bool = False,
    baseline_encode: bool = True,
    jitter_buffer_ms: float = 0.0,
    rng: random.Random | None = None,
) -> LatencyBreakdown:
    """One synthesized speech batch from server to client.

    Token methods ship TTS tokens and vocode on the client; they never carry a
    jitter-buffer stage. Baselines vocode on the server and ship PCM or Opus.
    """
    method = Method(method)
    registry = registry or default_registry()
    lat = lambda comp, q=1.0: component_latency(profile, comp, q, rng=rng)  # noqa: E731
    encode = decode = buffer = 0.0
    if method.is_token:
        nbytes = _audio_frame_bytes(profile, registry, batch_s, Modality.TTS_TOKENS,
                                    TTS_CODEBOOK, "tts_tokens_per_s")
        has_tokens = round(profile.rates["tts_tokens_per_s"] * batch_s) > 0
        decode = lat("vocoder_decode", 1.0 if has_tokens else 0.0)
    else:
        encode = lat("vocoder_decode", 1.0 if batch_s > 0 else 0.0)
        if method is Method.RAW:
            nbytes = round(payload_size(profile, "raw_pcm_3s") * batch_s / profile.rates["turn_s"])
        else:
            nbytes = round(profile.rates["opus_bps"] * batch_s / 8)
            if baseline_encode:
                encode += lat("opus_encode", batch_s / profile.rates["turn_s"])
        buffer = jitter_buffer_ms
    spec, ser, prop, jit = _transfer(nbytes, link, "down", include_propagation)
    return LatencyBreakdown(method, Medium.VOICE, "down", spec.downlink_bps, nbytes,
                            encode_ms=encode, serialization_ms=ser, propagation_ms=prop,
                            jitter_ms=jit, jitter_buffer_ms=buffer, decode_ms=decode)


def audio_crossover_bps(
    profile: CostProfile,
    link_template: LinkSpec,
    *,
    lo_bps: float = 0.1e6,
    hi_bps: float = 100e6,
    baseline_encode: bool = False,
    rel_tol: float = 1e-9,
) -> float:
    """Uplink bandwidth where token voice and Opus voice take equally long.

    Below it tokens win. Raises :class:`NoCrossover` if one method wins over
    the whole search range.
    """

    def diff(bps: float) -> float:
        link = link_template.with_uplink(bps)
        tok = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VOICE, link, profile, baseline_encode=baseline_encode)
        opus = run_uplink_turn(Method.RAW_COMPRESS, Medium.VOICE, link, profile, baseline_encode=baseline_encode)
        return tok.total_ms - opus.total_ms

    f_lo, f_hi = diff(lo_bps), diff(hi_bps)
    if f_lo >= 0 and f_hi >= 0:
        raise NoCrossover(f"tokens never faster in [{lo_bps:g}, {hi_bps:g}] bps")
    if f_lo < 0 and f_hi < 0:
        raise NoCrossover(f"tokens always faster in [{lo_bps:g}, {hi_bps:g}] bps")
    lo, hi = math.log(lo_bps), math.log(hi_bps)
    while hi - lo > rel_tol:
        mid = (lo + hi) / 2
        if (diff(math.exp(mid)) < 0) == (f_lo < 0):
            lo = mid
        else:
            hi = mid
    return math.exp((lo + hi) / 2)


def high_bw_margin(
    profile: CostProfile,
    bandwidth_bps: float,
    pair: tuple[Method, Method] = (Method.RAW_COMPRESS, Method.TOKEN_HYBRID),
    medium: Medium = Medium.VISION,
    *,
    snapshot: ScreenSnapshot | None = None,
    rtt_ms: float = 50.0,
    baseline_encode: bool = True,
) -> float:
    """total(pair[0]) - total(pair[1]) in ms at the given uplink bandwidth."""
    if bandwidth_bps <= 0:
        raise ValueError("bandwidth must be positive")
    if medium is Medium.VISION and snapshot is None:
        snapshot = reference_snapshot()
    link = LinkSpec(bandwidth_bps, bandwidth_bps, rtt_ms)
    a, b = (run_uplink_turn(m, medium, link, profile, snapshot, baseline_encode=baseline_encode) for m in pair)
    return a.total_ms - b.total_ms


def latency_sweep(
    methods: Iterable[Method],
    medium: Medium,
    bandwidths_bps: Sequence[float],
    profile: CostProfile,
    *,
    snapshot: ScreenSnapshot | None = None,
    rtt_ms: float = 50.0,
    include_propagation: bool = False,
    baseline_encode: bool = True,
) -> list[LatencyBreakdown]:
    if Medium(medium) is Medium.VISION and snapshot is None:
        snapshot = reference_snapshot()
    out = []
    for m in methods:
        for bps in bandwidths_bps:
            link = LinkSpec(bps, bps, rtt_ms)
            out.append(run_uplink_turn(m, medium, link, profile, snapshot,
                                       include_propagation=include_propagation,
                                       baseline_encode=baseline_encode))
    return out
