"""Scenario execution and long-format CSV output.

Every scenario kind yields rows of ``scenario,series,x,x_unit,y,y_unit,source``.
Grid cells run on a bounded thread pool; rows are collected in grid order, so
the output does not depend on scheduling.
"""

from __future__ import annotations

import csv
import os
import statistics
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple, TextIO

from ..corpus import generate_corpus, reference_snapshot
from ..cost_models import CostProfile, payload_size
from ..frame_codec import AUDIO_CODEBOOK, VISUAL_CODEBOOK, default_registry, payload_bytes
from ..net_emulator import JitterSpec, LinkSpec
from ..pipelines import Medium, Method, run_uplink_turn
from ..playout import PlayoutConfig, gap_free_threshold, gap_rate_curve
from ..screen_repr import ScreenSnapshot, Source, assemble_hybrid, load_corpus, plan_tiling
from . import reference
from .scenario import Scenario, load_scenario

OUTPUT_ENV = "SEMTRANSPORT_OUTPUT_DIR"
CSV_HEADER = ("scenario", "series", "x", "x_unit", "y", "y_unit", "source")
MAX_WORKERS = 8


class Row(NamedTuple):
    scenario: str
    series: str
    x: float | None
    x_unit: str
    y: float
    y_unit: str
    source: str = "computed"


def _fmt(v: float | None) -> str:
    if v is None:
        return ""
    if float(v).is_integer():
        return str(int(v))
    return format(float(v), ".10g")


def write_rows(rows: Iterable[Row], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([r.scenario, r.series, _fmt(r.x), r.x_unit, _fmt(r.y), r.y_unit, r.source])


def write_csv(rows: Iterable[Row], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        write_rows(rows, fh)


def read_csv(path: Path) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


# -- byte accounting -----------------------------------------------------------


@dataclass(frozen=True)
class HybridStats:
    median: float
    low: int
    high: int
    count: int


@lru_cache(maxsize=8)
def _default_corpus(count: int, seed: int) -> tuple[ScreenSnapshot, ...]:
    return tuple(generate_corpus(count, seed))


def corpus_for(scenario: Scenario) -> Sequence[ScreenSnapshot]:
    if scenario.corpus_path is not None:
        return load_corpus(scenario.corpus_path)
    return _default_corpus(scenario.corpus_count, scenario.corpus_seed)


def hybrid_stats(snapshots: Sequence[ScreenSnapshot]) -> HybridStats:
    """Hybrid application bytes (text plus visual payload, headers excluded)."""
    reg = default_registry()
    sizes = [assemble_hybrid(s, plan_tiling(s.width, s.height), reg).payload_bytes for s in snapshots]
    if not sizes:
        raise ValueError("empty corpus")
    return HybridStats(statistics.median(sizes), min(sizes), max(sizes), len(sizes))


def method_bytes(profile: CostProfile, method: Method, medium: Medium, hybrid_median: float) -> float:
    """Application payload bytes of one turn; frame headers are not counted."""
    if medium is Medium.VOICE:
        if method is Method.RAW:
            return payload_size(profile, "raw_pcm_3s")
        if method is Method.RAW_COMPRESS:
            return profile.rates["opus_bps"] * profile.rates["turn_s"] / 8
        tokens = round(profile.rates["audio_tokens_per_s"] * profile.rates["turn_s"])
        return payload_bytes(tokens, default_registry().codebook_size(AUDIO_CODEBOOK))
    if method is Method.RAW:
        return payload_size(profile, "raw_png")
    if method is Method.RAW_COMPRESS:
        return payload_size(profile, "webp_1080p")
    if method is Method.TOKEN_STATIC:
        return payload_bytes(plan_tiling(1920, 1080).token_count, default_registry().codebook_size(VISUAL_CODEBOOK))
    return hybrid_median


def _bytes_rows(sc: Scenario) -> list[Row]:
    stats = hybrid_stats(corpus_for(sc))
    methods = [Method(m) for m in sc.methods]
    rows = []
    for medium in sc.media:
        ref = method_bytes(sc.profile, Method.RAW_COMPRESS, medium, stats.median)
        for m in methods:
            b = method_bytes(sc.profile, m, medium, stats.median)
            rows.append(Row(sc.name, f"{medium.value}/{m.value}", None, "", b, "B"))
            if m.is_token:
                rows.append(Row(sc.name, f"{medium.value}/{m.value}/ratio", None, "", ref / b, "x"))
            if m is Method.TOKEN_HYBRID and medium is Medium.VISION:
                rows += [
                    Row(sc.name, "vision/token_hybrid/min", None, "", stats.low, "B"),
                    Row(sc.name, "vision/token_hybrid/max", None, "", stats.high, "B"),
                    Row(sc.name, "vision/token_hybrid/ratio_min", None, "", ref / stats.high, "x"),
                    Row(sc.name, "vision/token_hybrid/ratio_max", None, "", ref / stats.low, "x"),
                ]
    return rows


# -- latency -------------------------------------------------------------------


def _snapshot(sc: Scenario, source: Source) -> ScreenSnapshot:
    if sc.corpus_path is not None:
        for s in load_corpus(sc.corpus_path):
            if s.source is source:
                return s
    if source is Source.OCR:
        return generate_corpus(1, sc.snapshot_seed, source=Source.OCR)[0]
    return reference_snapshot(sc.snapshot_seed)


def _latency_cells(sc: Scenario) -> list[tuple[str, Method, Medium, ScreenSnapshot | None, float]]:
    cells = []
    for medium in sc.media:
        sources = sc.sources if medium is Medium.VISION else (Source.ACCESSIBILITY_TREE,)
        for m in (Method(x) for x in sc.methods):
            for src in sources if m is Method.TOKEN_HYBRID else sources[:1]:
                snap = _snapshot(sc, src) if medium is Medium.VISION else None
                series = f"{medium.value}/{m.value}" + ("_ocr" if src is Source.OCR and m is Method.TOKEN_HYBRID else "")
                for bw in sc.bandwidth_mbps:
                    cells.append((series, m, medium, snap, bw))
    return cells


def _run_cell(sc: Scenario, cell) -> list[Row]:
    series, method, medium, snap, bw = cell
    link = LinkSpec.symmetric_mbps(bw, sc.rtt_ms)
    b = run_uplink_turn(method, medium, link, sc.profile, snap,
                        include_propagation=sc.include_propagation, baseline_encode=sc.baseline_encode)
    if sc.kind == "latency":
        return [Row(sc.name, series, bw, "Mbps", b.total_ms, "ms")]
    rows = [Row(sc.name, f"{series}/{stage[:-3]}", bw, "Mbps", v, "ms") for stage, v in b.stages().items()]
    rows.append(Row(sc.name, f"{series}/total", bw, "Mbps", b.total_ms, "ms"))
    rows.append(Row(sc.name, f"{series}/payload", bw, "Mbps", b.payload_bytes, "B"))
    return rows


# -- playout -------------------------------------------------------------------


def _gap_rows(sc: Scenario, name: str) -> list[Row]:
    cfg = PlayoutConfig.from_name(name, sc.cushion_fraction)
    link = LinkSpec.symmetric_mbps(10, sc.rtt_ms, JitterSpec(sc.jitter_distribution, 0.0, sc.jitter_seed))
    curve = gap_rate_curve(cfg, link, sc.jitter_sweep_ms, sc.trials)
    rows = [Row(sc.name, name, j, "ms", rate, "gap_rate") for j, rate in curve]
    threshold = gap_free_threshold(cfg, link, sc.jitter_sweep_ms, sc.trials)
    rows.append(Row(sc.name, f"{name}/gap_free_threshold", None, "", threshold, "ms"))
    return rows


# -- rate / accuracy -----------------------------------------------------------

_TASKS = {"vision_text": Medium.VISION, "voice": Medium.VOICE}


def _rate_accuracy_rows(sc: Scenario) -> list[Row]:
    stats = hybrid_stats(corpus_for(sc))
    rows = []
    for ref in reference.rows("rate_accuracy"):
        task, method = ref.series.split("/")
        if method not in sc.methods:
            continue
        x = method_bytes(sc.profile, Method(method), _TASKS[task], stats.median)
        rows.append(Row(sc.name, ref.series, x, "B", ref.y, ref.unit, reference.SOURCE))
    return rows


def _overlay_rows(sc: Scenario) -> list[Row]:
    return [Row(sc.name, f"reference/{r.figure_or_table}/{r.series}", r.x, r.x_unit, r.y, r.unit, reference.SOURCE)
            for fig in sc.overlay for r in reference.rows(fig)]


def scenario_rows(sc: Scenario, workers: int | None = None) -> list[Row]:
    """All rows for a scenario, in deterministic grid order."""
    tasks: list[Callable[[], list[Row]]]
    if sc.kind == "bytes":
        tasks = [lambda: _bytes_rows(sc)]
    elif sc.kind in ("latency", "breakdown"):
        tasks = [lambda c=c: _run_cell(sc, c) for c in _latency_cells(sc)]
    elif sc.kind == "gap_rate":
        tasks = [lambda n=n: _gap_rows(sc, n) for n in sc.methods]
    else:
        tasks = [lambda: _rate_accuracy_rows(sc)]
    n = max(1, min(workers or os.cpu_count() or 1, MAX_WORKERS, len(tasks)))
    with ThreadPoolExecutor(max_workers=n) as pool:
        chunks = list(pool.map(lambda t: t(), tasks))
    return [r for chunk in chunks for r in chunk] + _overlay_rows(sc)


def output_dir(explicit: str | Path | None = None) -> Path:
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_ENV, "results"))


def run_scenario(
    source: str | Path | Scenario,
    *,
    out_dir: str | Path | None = None,
    overrides: Iterable[str] = (),
    workers: int | None = None,
) -> Path:
    """Run one scenario and write its CSV; returns the CSV path."""
    sc = source if isinstance(source, Scenario) else load_scenario(source, overrides)
    path = output_dir(out_dir) / sc.output_name
    write_csv(scenario_rows(sc, workers), path)
    return path
