"""Self-checks for the six acceptance criteria.

Each criterion is a list of checks with an expected value, the computed value
and a tolerance. A criterion passes when every check passes and it finishes
within its runtime budget. Failures are report entries, never exceptions.
"""

from __future__ import annotations

import math
import random
import tempfile
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus import generate_corpus, reference_snapshot
from ..cost_models import CostProfile, Mode, default_profile
from ..frame_codec import (
    HEADER_SIZE,
    Modality,
    decode_frame,
    default_registry,
    encode_frame,
)
from ..net_emulator import JitterSpec, LinkSpec, serialization_ms
from ..pipelines import Medium, Method, NoCrossover, audio_crossover_bps, latency_sweep, run_uplink_turn
from ..playout import PlayoutConfig, gap_free_threshold, gap_rate_curve, simulate_playout
from ..screen_repr import (
    NodeRecord,
    ScreenSnapshot,
    UiNode,
    encode_compact_text,
    parse_compact_text,
)
from . import reference
from .runner import hybrid_stats, method_bytes, read_csv, run_scenario

MBPS = 1e6
JITTER_SWEEP_MS = tuple(range(50, 2001, 50))
LATENCY_SWEEP_MBPS = (1, 2, 5, 10, 20, 50, 80, 100)


@dataclass(frozen=True)
class Check:
    name: str
    expected: str
    actual: float | str
    tolerance: str
    passed: bool


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    runtime_s: float = 0.0
    runtime_limit_s: float | None = None

    @property
    def within_budget(self) -> bool:
        return self.runtime_limit_s is None or self.runtime_s < self.runtime_limit_s

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and self.within_budget

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        ok = sum(c.passed for c in self.checks)
        budget = "" if self.runtime_limit_s is None else f" / {self.runtime_limit_s:g} s"
        line = f"[{status}] criterion {self.number}: {self.title} ({ok}/{len(self.checks)} checks, " \
               f"{self.runtime_s:.2f} s{budget})"
        if self.failures:
            line += "; failed: " + ", ".join(c.name for c in self.failures)
        elif not self.within_budget:
            line += "; over runtime budget"
        return line


@dataclass
class AcceptanceReport:
    results: list[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]

    def detail_lines(self) -> list[str]:
        out = []
        for r in self.results:
            out.append(r.line())
            for c in r.checks:
                mark = "ok " if c.passed else "BAD"
                actual = f"{c.actual:.6g}" if isinstance(c.actual, float) else str(c.actual)
                out.append(f"    {mark} {c.name}: expected {c.expected}, actual {actual}, tolerance {c.tolerance}")
        return out


# -- check helpers -------------------------------------------------------------


def _exact(name: str, expected: float, actual: float) -> Check:
    return Check(name, f"{expected:g}", actual, "exact", actual == expected)


def _rel(name: str, expected: float, actual: float, rel: float) -> Check:
    return Check(name, f"{expected:g}", actual, f"±{rel:.0%}", abs(actual - expected) <= rel * abs(expected))


def _within(name: str, lo: float, hi: float, actual: float) -> Check:
    return Check(name, f"[{lo:g}, {hi:g}]", actual, "range", lo <= actual <= hi)


def _below(name: str, bound: float, actual: float) -> Check:
    return Check(name, f"< {bound:g}", actual, "bound", actual < bound)


def _above(name: str, bound: float, actual: float) -> Check:
    return Check(name, f"> {bound:g}", actual, "bound", actual > bound)


def _true(name: str, ok: bool, detail: str = "") -> Check:
    return Check(name, "holds", detail or ("holds" if ok else "violated"), "exact", ok)


# -- criteria ------------------------------------------------------------------


def criterion_bytes(profile: CostProfile, corpus: Sequence[ScreenSnapshot] | None = None) -> list[Check]:
    corpus = generate_corpus() if corpus is None else corpus
    stats = hybrid_stats(corpus)
    audio = method_bytes(profile, Method.TOKEN_STATIC, Medium.VOICE, stats.median)
    visual = method_bytes(profile, Method.TOKEN_STATIC, Medium.VISION, stats.median)
    opus = method_bytes(profile, Method.RAW_COMPRESS, Medium.VOICE, stats.median)
    webp = method_bytes(profile, Method.RAW_COMPRESS, Medium.VISION, stats.median)
    reg = default_registry()
    frame = encode_frame(Modality.AUDIO_TOKENS, 1, tokens=[0] * 150, registry=reg)
    return [
        _exact("audio tokens, 3 s turn (B)", 188, audio),
        _exact("audio frame payload (B)", 188, len(frame.payload)),
        _exact("visual tokens, 1080p (B)", 832, visual),
        _exact("opus, 3 s at 32 kbps (B)", 12_000, opus),
        _exact("webp, 1080p (B)", 700_000, webp),
        _rel("audio ratio", 64, opus / audio, 0.01),
        _rel("visual ratio", 841, webp / visual, 0.01),
        _within("hybrid ratio, corpus minimum", 130, 210, webp / stats.high),
        _within("hybrid ratio, corpus maximum", 130, 210, webp / stats.low),
    ]


def criterion_latency(profile: CostProfile) -> list[Check]:
    snap = reference_snapshot()

    def total(method, bw):
        link = LinkSpec.symmetric_mbps(bw, rtt_ms=50)
        return run_uplink_turn(method, Medium.VISION, link, profile, snap, baseline_encode=False).total_ms

    sweep = latency_sweep(list(Method), Medium.VISION, [b * MBPS for b in LATENCY_SWEEP_MBPS], profile,
                          snapshot=snap, baseline_encode=False)
    hybrid = [b.total_ms for b in sweep if b.method is Method.TOKEN_HYBRID]
    return [
        _rel("raw_compress vision at 5 Mbps (ms)", 1120, total(Method.RAW_COMPRESS, 5), 0.10),
        _rel("raw_compress vision at 1 Mbps (ms)", 5600, total(Method.RAW_COMPRESS, 1), 0.10),
        _rel("token_hybrid vision at 5 Mbps (ms)", 75, total(Method.TOKEN_HYBRID, 5), 0.10),
        _below("token_hybrid vision at 1 Mbps (ms)", 100, total(Method.TOKEN_HYBRID, 1)),
        _below("token_hybrid variation over 1-100 Mbps (ms)", 10, max(hybrid) - min(hybrid)),
    ]


def criterion_audio(profile: CostProfile) -> list[Check]:
    link = LinkSpec.symmetric_mbps(1, rtt_ms=50)
    tok = run_uplink_turn(Method.TOKEN_HYBRID, Medium.VOICE, link, profile)
    opus = run_uplink_turn(Method.RAW_COMPRESS, Medium.VOICE, link, profile)
    low = profile.with_modes(audio_turn_encode=Mode.LOW)
    try:
        crossover = audio_crossover_bps(low, link) / MBPS
    except NoCrossover:
        crossover = math.nan
    return [
        _below("188 B transfer at 1 Mbps (ms)", 2, serialization_ms(188, 1 * MBPS)),
        _below("token frame transfer at 1 Mbps (ms)", 2, tok.serialization_ms),
        _rel("opus transfer at 1 Mbps (ms)", 96, opus.serialization_ms, 0.10),
        _within("crossover with encode at Low (Mbps)", 1, 3, crossover),
    ]


def criterion_playout(beta: float = 0.2, trials: int = 100, seed: int = 7) -> list[Check]:
    link = LinkSpec.symmetric_mbps(10, rtt_ms=50, jitter=JitterSpec("uniform", 0, seed))
    t3 = gap_free_threshold(PlayoutConfig.batch_tts(3000, cushion_fraction=beta), link, JITTER_SWEEP_MS, trials)
    t5 = gap_free_threshold(PlayoutConfig.batch_tts(5000, cushion_fraction=beta), link, JITTER_SWEEP_MS, trials)
    rtc = simulate_playout(PlayoutConfig.streaming_rtc(), link.with_jitter(50), trials)
    return [
        _rel("gap-free threshold, 3 s batches (ms)", 500, t3, 0.30),
        _rel("gap-free threshold, 5 s batches (ms)", 1000, t5, 0.30),
        _above("streaming 20 ms gap rate at 50 ms jitter", 0, rtc.gap_rate),
        _true("trials per sweep point >= 100", trials >= 100, str(trials)),
    ]


def _random_tree(rng: random.Random, max_nodes: int = 30) -> ScreenSnapshot:
    alphabet = 'ab Z09"\\\n\r\t[]@,.é✓🙂'
    tokens = ["button", "text", "click", "focused", "tab", "x-1", "a.b", "selected"]
    n = rng.randint(1, max_nodes)
    ids = rng.sample(range(10**6), n)
    specs = [dict(id=i, role=rng.choice(tokens),
                  label="".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20))),
                  x=rng.randint(-3000, 3000), y=rng.randint(-3000, 3000),
                  w=rng.randint(0, 4000), h=rng.randint(0, 4000),
                  actions=tuple(rng.sample(tokens, rng.randint(0, 2))),
                  states=tuple(rng.sample(tokens, rng.randint(0, 2))), children=[]) for i in ids]
    for k in range(1, n):
        specs[rng.randrange(k)]["children"].append(specs[k])

    def build(d):
        return UiNode(**{**d, "children": tuple(build(c) for c in d["children"])})

    return ScreenSnapshot(1920, 1080, build(specs[0]))


def criterion_properties(profile: CostProfile, n_frames: int = 10_000, n_trees: int = 1_000,
                         seed: int = 2024) -> list[Check]:
    rng = random.Random(seed)
    reg = default_registry()
    frame_failures = 0
    for _ in range(n_frames):
        modality = rng.choice(list(Modality))
        seq, ts = rng.getrandbits(32), rng.getrandbits(64)
        if modality.is_text:
            text = bytes(rng.getrandbits(8) for _ in range(rng.randint(0, 64)))
            frame = encode_frame(modality, 0, text=text, registry=reg, sequence=seq, timestamp_us=ts)
            expected: object = text
        else:
            cb = rng.choice([1, 2, 3])
            size = reg.codebook_size(cb)
            expected = [rng.randrange(size) for _ in range(rng.randint(0, 600))]
            frame = encode_frame(modality, cb, tokens=expected, registry=reg, sequence=seq, timestamp_us=ts)
        header, body = decode_frame(frame.to_bytes(), reg)
        ok = body == expected and header.sequence == seq and header.timestamp_us == ts \
            and len(frame.to_bytes()) == HEADER_SIZE + len(frame.payload)
        frame_failures += not ok

    tree_failures = 0
    for _ in range(n_trees):
        snap = _random_tree(rng)
        if parse_compact_text(encode_compact_text(snap)) != [NodeRecord.from_node(n) for n in snap.root.walk()]:
            tree_failures += 1

    link = LinkSpec.symmetric_mbps(10, rtt_ms=50, jitter=JitterSpec("uniform", 0, 11))
    sweep = [0, 25, 50, 100, 200, 400, 600, 800, 1000, 1500, 2000, 3000]
    monotone = True
    for cfg in (PlayoutConfig.batch_tts(3000), PlayoutConfig.batch_tts(5000), PlayoutConfig.streaming_rtc()):
        for dist in ("uniform", "normal", "exponential"):
            rates = [r for _, r in gap_rate_curve(cfg, link.with_jitter(0, dist), sweep, 100)]
            monotone &= rates == sorted(rates)

    thresholds = [gap_free_threshold(c, link, JITTER_SWEEP_MS, 100)
                  for c in (PlayoutConfig.batch_tts(5000), PlayoutConfig.batch_tts(3000), PlayoutConfig.streaming_rtc())]

    bws = [x * MBPS for x in (0.1, 0.5, 1, 2, 5, 10, 20, 50, 80, 100, 1000)]
    snap = reference_snapshot()
    lat_monotone = True
    for medium in Medium:
        for m in Method:
            totals = [b.total_ms for b in latency_sweep([m], medium, bws, profile, snapshot=snap)]
            lat_monotone &= all(a >= b for a, b in zip(totals, totals[1:]))

    jitter_link = link.with_jitter(900)
    a = simulate_playout(PlayoutConfig.batch_tts(3000), jitter_link, 50)
    b = simulate_playout(PlayoutConfig.batch_tts(3000), jitter_link, 50)
    with tempfile.TemporaryDirectory() as d:
        csv_a = run_scenario("fig_jitter", out_dir=Path(d) / "a").read_bytes()
        csv_b = run_scenario("fig_jitter", out_dir=Path(d) / "b").read_bytes()

    return [
        _exact(f"frame round-trip failures over {n_frames} frames", 0, frame_failures),
        _exact(f"compact-text round-trip failures over {n_trees} trees", 0, tree_failures),
        _true("gap rate non-decreasing in jitter", monotone),
        _true("batch dominance t(5 s) >= t(3 s) >= t(streaming)",
              thresholds[0] >= thresholds[1] >= thresholds[2], "/".join(f"{t:g}" for t in thresholds)),
        _true("latency non-increasing in bandwidth", lat_monotone),
        _true("playout reproducible under a fixed seed", bool(np.array_equal(a.arrival_ms, b.arrival_ms))),
        _true("scenario CSV byte-identical across runs", csv_a == csv_b),
    ]


def criterion_reference(profile: CostProfile, corpus: Sequence[ScreenSnapshot] | None = None) -> list[Check]:
    corpus = generate_corpus() if corpus is None else corpus
    stats = hybrid_stats(corpus)
    with tempfile.TemporaryDirectory() as d:
        rows = read_csv(run_scenario("fig_pareto", out_dir=d))
    emitted = {r["series"]: r for r in rows if not r["series"].startswith("reference/")}
    expected = {r.series: r for r in reference.rows("rate_accuracy")}
    values_ok = set(emitted) == set(expected) and all(
        float(emitted[s]["y"]) == expected[s].y and emitted[s]["y_unit"] == expected[s].unit for s in expected)
    source_ok = all(r["source"] == reference.SOURCE for r in rows)
    bytes_ok = True
    for s, r in emitted.items():
        task, method = s.split("/")
        medium = Medium.VOICE if task == "voice" else Medium.VISION
        bytes_ok &= float(r["x"]) == method_bytes(profile, Method(method), medium, stats.median)
    manifest_ok = all(r.figure_or_table in reference.MANIFEST for r in reference.ROWS)
    return [
        _true("accuracy values replayed exactly", values_ok),
        _true("every accuracy row has source=paper", source_ok),
        _true("byte coordinates match computed sizes", bytes_ok),
        _true("every reference row cites a known figure or table", manifest_ok),
    ]


CRITERIA: tuple[tuple[int, str, float | None], ...] = (
    (1, "per-turn bytes and ratios", 1.0),
    (2, "vision latency anchors", 5.0),
    (3, "voice latency anchors and crossover", None),
    (4, "downlink playout thresholds", 30.0),
    (5, "property suites", None),
    (6, "reference dataset integrity", None),
)


def check_acceptance(
    profile: CostProfile | None = None,
    *,
    beta: float = 0.2,
    only: Sequence[int] | None = None,
) -> AcceptanceReport:
    profile = default_profile() if profile is None else profile
    runners: dict[int, Callable[[], list[Check]]] = {
        1: lambda: criterion_bytes(profile),
        2: lambda: criterion_latency(profile),
        3: lambda: criterion_audio(profile),
        4: lambda: criterion_playout(beta),
        5: lambda: criterion_properties(profile),
        6: lambda: criterion_reference(profile),
    }
    results = []
    for number, title, limit in CRITERIA:
        if only is not None and number not in only:
            continue
        start = time.perf_counter()
        checks = runners[number]()
        results.append(CriterionResult(number, title, checks, time.perf_counter() - start, limit))
    return AcceptanceReport(results)

