"""Published values that cannot be computed here, kept for overlay only.

Accuracy, WER and MOS need real speech and vision models. They are replayed
verbatim with ``source=paper`` and never derived. Byte and latency anchors
are kept too so computed curves can be plotted against them.
"""

from __future__ import annotations

from typing import NamedTuple

SOURCE = "paper"

# figure/table id -> what it shows; every ReferenceRow must use one of these ids
MANIFEST: dict[str, str] = {
    "bytes_table": "per-turn uplink bytes (median) and ratios to the compressed baseline",
    "latency": "uplink latency vs bandwidth, 1080p screenshot and 3 s voice turn",
    "task_accuracy": "task accuracy by workload category",
    "rate_accuracy": "uplink bytes per turn vs task accuracy",
    "uplink_jitter": "uplink jitter tolerance, WER and MOS",
    "downlink_gap": "downlink playout gap rate vs delivery jitter",
}


class ReferenceRow(NamedTuple):
    figure_or_table: str
    series: str
    x: float | None
    y: float
    unit: str
    x_unit: str = ""


def _r(fig, series, x, y, unit, x_unit=""):
    return ReferenceRow(fig, series, x, y, unit, x_unit)


ROWS: tuple[ReferenceRow, ...] = (
    _r("bytes_table", "voice/raw", None, 96_000, "B"),
    _r("bytes_table", "voice/raw_compress", None, 12_000, "B"),
    _r("bytes_table", "voice/token_static", None, 188, "B"),
    _r("bytes_table", "voice/token_hybrid", None, 188, "B"),
    _r("bytes_table", "vision/raw", None, 950_000, "B"),
    _r("bytes_table", "vision/raw_compress", None, 700_000, "B"),
    _r("bytes_table", "vision/token_static", None, 832, "B"),
    _r("bytes_table", "vision/token_hybrid/min", None, 3_000, "B"),
    _r("bytes_table", "vision/token_hybrid/max", None, 5_000, "B"),
    _r("bytes_table", "voice/token/ratio", None, 64, "x"),
    _r("bytes_table", "vision/token_static/ratio", None, 841, "x"),
    _r("bytes_table", "vision/token_hybrid/ratio_min", None, 130, "x"),
    _r("bytes_table", "vision/token_hybrid/ratio_max", None, 210, "x"),
    _r("latency", "vision/raw_compress", 5, 1_100, "ms", "Mbps"),
    _r("latency", "vision/raw_compress", 1, 5_600, "ms", "Mbps"),
    _r("latency", "vision/token_hybrid", 5, 75, "ms", "Mbps"),
    _r("latency", "vision/token_hybrid_ocr", 5, 105, "ms", "Mbps"),
    _r("latency", "vision/token_hybrid/upper_bound", 1, 100, "ms", "Mbps"),
    _r("latency", "vision/token_hybrid/band_min", None, 70, "ms"),
    _r("latency", "vision/token_hybrid/band_max", None, 94, "ms"),
    _r("latency", "voice/raw_compress/transfer", 1, 96, "ms", "Mbps"),
    _r("latency", "voice/token/transfer_upper_bound", 1, 2, "ms", "Mbps"),
    _r("latency", "voice/crossover", None, 2, "Mbps"),
    _r("task_accuracy", "voice/raw", None, 2.7, "% WER"),
    _r("task_accuracy", "voice/token", None, 4.1, "% WER"),
    _r("task_accuracy", "navigation/token_vs_raw_max_drop", None, 2, "pp"),
    _r("task_accuracy", "vision_text/raw", None, 94.0, "% accuracy"),
    _r("task_accuracy", "vision_text/token_static", None, 75.5, "% accuracy"),
    _r("task_accuracy", "vision_text/token_hybrid", None, 93.3, "% accuracy"),
    _r("rate_accuracy", "vision_text/raw", None, 94.0, "% accuracy"),
    _r("rate_accuracy", "vision_text/token_static", None, 75.5, "% accuracy"),
    _r("rate_accuracy", "vision_text/token_hybrid", None, 93.3, "% accuracy"),
    _r("rate_accuracy", "voice/raw", None, 2.7, "% WER"),
    _r("rate_accuracy", "voice/token_static", None, 4.1, "% WER"),
    _r("rate_accuracy", "voice/token_hybrid", None, 4.1, "% WER"),
    _r("uplink_jitter", "wer", 0, 2.7, "%", "ms"),
    _r("uplink_jitter", "wer", 200, 3.2, "%", "ms"),
    _r("uplink_jitter", "wer", 500, 3.8, "%", "ms"),
    _r("uplink_jitter", "mos", 0, 4.3, "MOS", "ms"),
    _r("uplink_jitter", "mos", 200, 2.6, "MOS", "ms"),
    _r("uplink_jitter", "mos", 500, 1.8, "MOS", "ms"),
    _r("downlink_gap", "batch_3s/gap_free_threshold", None, 500, "ms"),
    _r("downlink_gap", "batch_5s/gap_free_threshold", None, 1_000, "ms"),
    _r("downlink_gap", "streaming_rtc/gaps_from", None, 50, "ms"),
)


def rows(figure_or_table: str | None = None) -> list[ReferenceRow]:
    if figure_or_table is not None and figure_or_table not in MANIFEST:
        raise KeyError(figure_or_table)
    return [r for r in ROWS if figure_or_table is None or r.figure_or_table == figure_or_table]


def lookup(figure_or_table: str, series: str, x: float | None = None) -> ReferenceRow:
    for r in rows(figure_or_table):
        if r.series == series and r.x == x:
            return r
    raise KeyError((figure_or_table, series, x))
