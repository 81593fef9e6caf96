import dataclasses
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semtransport.corpus import generate_snapshot, reference_snapshot
from semtransport.cost_models import Mode, default_profile
from semtransport.frame_codec import default_registry
from semtransport.net_emulator import JitterSpec, LinkSpec
from semtransport.pipelines import (
    LatencyBreakdown,
    Medium,
    Method,
    NoCrossover,
    audio_crossover_bps,
    high_bw_margin,
    latency_sweep,
    run_downlink_turn,
    run_uplink_turn,
)
from semtransport.screen_repr import Source, assemble_hybrid, plan_tiling

MBPS = 1e6
PROFILE = default_profile()
SNAP = reference_snapshot()


def mbps(x, **kw):
    return LinkSpec.symmetric_mbps(x, **kw)


def crossover_oracle(encode_ms, decode_ms=8.0, token_bytes=205, opus_bytes=12000):
    """Closed form: encode + decode + 8*S/bw = 8*R/bw, in bit/s."""
    return 8 * (opus_bytes - token_bytes) * 1000 / (encode_ms + decode_ms)


def test_oracle_frozen_values():
    assert crossover_oracle(45) / MBPS == pytest.approx(1.78038, rel=1e-5)
    assert crossover_oracle(180) / MBPS == pytest.approx(0.50191, rel=1e-5)


def test_hybrid_vision_anchor_5mbps():
    b = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(5), PROFILE, SNAP)
    assert b.total_ms == pytest.approx(75, rel=0.10)
    assert b.encode_ms == 40 and b.decode_ms == 30


def test_hybrid_vision_under_100ms_at_1mbps():
    assert run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(1), PROFILE, SNAP).total_ms < 100


@pytest.mark.parametrize("bw, expected", [(5, 1120.0), (1, 5600.0)])
def test_webp_anchor_without_encoder(bw, expected):
    b = run_uplink_turn(Method.RAW_COMPRESS, Medium.VISION, mbps(bw), PROFILE, baseline_encode=False)
    assert b.total_ms == pytest.approx(expected)
    with_enc = run_uplink_turn(Method.RAW_COMPRESS, Medium.VISION, mbps(bw), PROFILE)
    assert with_enc.total_ms == pytest.approx(expected + 50)


def ocr_snapshot(cost=None):
    snap = generate_snapshot(random.Random(3), width=1920, height=1080, source=Source.OCR, text_budget=2000)
    return dataclasses.replace(snap, ocr_encode_ms=cost)


def test_ocr_fallback_anchor():
    snap = ocr_snapshot()
    b = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(5), PROFILE.with_latency(ocr_encode=30), snap)
    assert b.total_ms == pytest.approx(105, rel=0.10)
    mid = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(5), PROFILE, snap)
    assert mid.total_ms == pytest.approx(105, rel=0.10)


def test_snapshot_ocr_cost_takes_precedence():
    snap = ocr_snapshot(21.0)
    b = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(5), PROFILE, snap)
    assert b.encode_ms == pytest.approx(21 + 40)


def test_hybrid_needs_snapshot():
    with pytest.raises(ValueError):
        run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(5), PROFILE)


def test_payload_consistency():
    reg = default_registry()
    hybrid = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(5), PROFILE, SNAP)
    assert hybrid.payload_bytes == assemble_hybrid(SNAP, plan_tiling(1920, 1080), reg).total_bytes
    assert run_uplink_turn(Method.TOKEN_STATIC, Medium.VISION, mbps(5), PROFILE).payload_bytes == 17 + 832
    assert run_uplink_turn(Method.TOKEN_STATIC, Medium.VOICE, mbps(5), PROFILE).payload_bytes == 17 + 188
    assert run_uplink_turn(Method.RAW, Medium.VOICE, mbps(5), PROFILE).payload_bytes == 96000
    assert run_uplink_turn(Method.RAW, Medium.VISION, mbps(5), PROFILE).payload_bytes == 950000
    assert run_uplink_turn(Method.RAW_COMPRESS, Medium.VOICE, mbps(5), PROFILE).payload_bytes == 12000


def test_audio_transfer_anchors():
    tok = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VOICE, mbps(1), PROFILE)
    assert tok.serialization_ms < 2
    opus = run_uplink_turn(Method.RAW_COMPRESS, Medium.VOICE, mbps(1), PROFILE)
    assert opus.serialization_ms == pytest.approx(96)


def test_raw_has_no_encode():
    for medium in Medium:
        b = run_uplink_turn(Method.RAW, medium, mbps(5), PROFILE, SNAP)
        assert b.encode_ms == 0 and b.decode_ms == 0


def test_propagation_toggle():
    a = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(5, rtt_ms=50), PROFILE, SNAP)
    b = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, mbps(5, rtt_ms=50), PROFILE, SNAP,
                        include_propagation=True)
    assert b.total_ms - a.total_ms == pytest.approx(25)


def test_jitter_stage_reproducible():
    link = mbps(5, jitter=JitterSpec("uniform", 40, seed=9))
    a = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, link, PROFILE, SNAP)
    b = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VISION, link, PROFILE, SNAP)
    assert a == b and 0 <= a.jitter_ms <= 40


def test_breakdown_rejects_negative_stage():
    with pytest.raises(ValueError):
        LatencyBreakdown(Method.RAW, Medium.VOICE, "up", 1e6, 0, encode_ms=-1)


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from(list(Method)),
    st.sampled_from(list(Medium)),
    st.floats(0.1, 1000),
    st.sampled_from(list(Mode)),
    st.integers(0, 1000),
)
def test_stage_additivity(method, medium, bw, mode, seed):
    profile = PROFILE.replace(mode=mode)
    b = run_uplink_turn(method, medium, mbps(bw), profile, SNAP, rng=random.Random(seed))
    assert b.total_ms == pytest.approx(sum(b.stages().values()))
    assert all(v >= 0 for v in b.stages().values())


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(list(Method)), st.sampled_from(list(Medium)),
       st.lists(st.floats(0.1, 1000), min_size=2, max_size=8))
def test_monotone_in_bandwidth(method, medium, bws):
    bws = sorted(bws)
    totals = [b.total_ms for b in latency_sweep([method], medium, [x * MBPS for x in bws], PROFILE, snapshot=SNAP)]
    assert all(a >= b - 1e-9 for a, b in zip(totals, totals[1:]))


def test_crossing_up_to_80mbps():
    bws = [x * MBPS for x in (0.5, 1, 2, 5, 10, 20, 40, 60, 80)]
    raw = latency_sweep([Method.RAW_COMPRESS], Medium.VISION, bws, PROFILE, snapshot=SNAP)
    tok = latency_sweep([Method.TOKEN_HYBRID], Medium.VISION, bws, PROFILE, snapshot=SNAP)
    assert all(r.total_ms > t.total_ms for r, t in zip(raw, tok))


def test_hybrid_variation_over_sweep():
    totals = [b.total_ms for b in latency_sweep([Method.TOKEN_HYBRID], Medium.VISION,
                                                [x * MBPS for x in (1, 2, 5, 10, 20, 50, 100)],
                                                PROFILE, snapshot=SNAP)]
    # payload of ~3.4 KB costs ~27 ms at 1 Mbps, ~0.3 ms at 100 Mbps
    nbytes = assemble_hybrid(SNAP, plan_tiling(1920, 1080), default_registry()).total_bytes
    assert max(totals) - min(totals) == pytest.approx(8 * nbytes * (1 / 1e3 - 1 / 1e5))


def test_crossover_low():
    p = PROFILE.with_modes(audio_turn_encode=Mode.LOW)
    x = audio_crossover_bps(p, mbps(1))
    assert x == pytest.approx(crossover_oracle(45), rel=1e-6)
    assert 1 * MBPS <= x <= 3 * MBPS


def test_crossover_high_below_1mbps():
    p = PROFILE.with_modes(audio_turn_encode=Mode.HIGH)
    assert audio_crossover_bps(p, mbps(1)) == pytest.approx(crossover_oracle(180), rel=1e-6)


def test_crossover_doubled_encode_leaves_band():
    p = PROFILE.with_modes(audio_turn_encode=Mode.LOW).with_latency(audio_turn_encode=(90, 360))
    assert audio_crossover_bps(p, mbps(1)) < 1 * MBPS


def test_no_crossover_with_free_codec():
    p = PROFILE.with_latency(audio_turn_encode=0, server_audio_decode=0, vocoder_decode=0)
    with pytest.raises(NoCrossover):
        audio_crossover_bps(p, mbps(1))


def test_margin():
    assert high_bw_margin(PROFILE, 5 * MBPS, baseline_encode=False) == pytest.approx(1120 - 75, rel=0.10)
    assert high_bw_margin(PROFILE, 80 * MBPS) <= 70
    assert high_bw_margin(PROFILE, 7 * MBPS, (Method.RAW, Method.RAW)) == 0
    with pytest.raises(ValueError):
        high_bw_margin(PROFILE, 0)


def test_downlink_token_batch():
    b = run_downlink_turn(Method.TOKEN_HYBRID, mbps(1), PROFILE)
    assert b.payload_bytes == 17 + 188
    assert 5 <= b.decode_ms <= 10
    assert b.encode_ms == 0 and b.jitter_buffer_ms == 0


def test_downlink_token_ignores_jitter_buffer():
    b = run_downlink_turn(Method.TOKEN_STATIC, mbps(1), PROFILE, jitter_buffer_ms=60)
    assert b.jitter_buffer_ms == 0


def test_downlink_opus_batch():
    b = run_downlink_turn(Method.RAW_COMPRESS, mbps(1), PROFILE, jitter_buffer_ms=60)
    assert b.payload_bytes == 12000
    assert b.encode_ms == pytest.approx(7.5 + 5)
    assert b.jitter_buffer_ms == 60


def test_downlink_empty_batch():
    b = run_downlink_turn(Method.TOKEN_HYBRID, mbps(1), PROFILE, batch_s=0)
    assert b.payload_bytes == 17
    assert b.decode_ms == 0
