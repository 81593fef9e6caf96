"""Hybrid screen representation: compact UI text plus tiled visual tokens.

Compact text has one line per UI node in pre-order::

    [e2] button "Back" @132,52 32x32 [click]
    [e7] textfield "Search" @400,52 300x28 [type,focus] [focused]

The first bracket group lists actions, the optional second one lists state
flags. Both are omitted when empty; when only states are present the action
group is written as ``[]``. Labels escape backslash, double quote, CR and LF
with a backslash. Coordinates are always in original screen pixels.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .frame_codec import (
    VISUAL_CODEBOOK,
    CodebookRegistry,
    Modality,
    TokenFrame,
    encode_frame,
)

SNAPSHOT_FORMAT = "semtransport.snapshot"
CORPUS_FORMAT = "semtransport.corpus"
FILE_VERSION = 1

DEFAULT_TILE_SIZE = 1024
DEFAULT_TOKENS_PER_TILE = 256

_WORD = re.compile(r'[^\s",\[\]]+')
_LINE = re.compile(
    r'\[e(?P<id>\d+)\] (?P<role>[^\s"\[\]]+) "(?P<label>(?:[^"\\]|\\.)*)"'
    r" @(?P<x>-?\d+),(?P<y>-?\d+) (?P<w>\d+)x(?P<h>\d+)"
    r"(?: \[(?P<actions>[^\]]*)\])?(?: \[(?P<states>[^\]]*)\])?"
)
_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"n": "\n", "r": "\r"}


class Source(str, Enum):
    ACCESSIBILITY_TREE = "accessibility_tree"
    OCR = "ocr"


class MalformedLine(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class UiNode:
    id: int
    role: str
    label: str = ""
    x: int = 0
    y: int = 0
    w: int = 0
    h: int = 0
    actions: tuple[str, ...] = ()
    states: tuple[str, ...] = ()
    children: tuple[UiNode, ...] = ()

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError(f"node id must be non-negative, got {self.id}")
        if self.w < 0 or self.h < 0:
            raise ValueError(f"node e{self.id} has negative size {self.w}x{self.h}")
        if not _WORD.fullmatch(self.role):
            raise ValueError(f"node e{self.id} role {self.role!r} is not a single token")
        for tok in (*self.actions, *self.states):
            if not _WORD.fullmatch(tok):
                raise ValueError(f"node e{self.id} action/state {tok!r} is not a single token")

    def walk(self) -> Iterator[UiNode]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True)
class ScreenSnapshot:
    width: int
    height: int
    root: UiNode
    source: Source = Source.ACCESSIBILITY_TREE
    # sampled per-snapshot OCR cost; None means use the cost profile
    ocr_encode_ms: float | None = None

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"screen size must be positive, got {self.width}x{self.height}")
        object.__setattr__(self, "source", Source(self.source))
        seen: set[int] = set()
        for node in self.root.walk():
            if node.id in seen:
                raise ValueError(f"duplicate node id e{node.id}")
            seen.add(node.id)

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.root.walk())


@dataclass(frozen=True)
class NodeRecord:
    id: int
    role: str
    label: str
    x: int
    y: int
    w: int
    h: int
    actions: tuple[str, ...] = ()
    states: tuple[str, ...] = ()

    @classmethod
    def from_node(cls, node: UiNode) -> NodeRecord:
        return cls(node.id, node.role, node.label, node.x, node.y, node.w, node.h, node.actions, node.states)


def escape_label(label: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in label)


def unescape_label(text: str) -> str:
    return re.sub(r"\\(.)", lambda m: _UNESCAPES.get(m.group(1), m.group(1)), text, flags=re.DOTALL)


def format_line(node: UiNode | NodeRecord) -> str:
    line = f'[e{node.id}] {node.role} "{escape_label(node.label)}" @{node.x},{node.y} {node.w}x{node.h}'
    if node.actions or node.states:
        line += f" [{','.join(node.actions)}]"
    if node.states:
        line += f" [{','.join(node.states)}]"
    return line


def encode_compact_text(snapshot: ScreenSnapshot) -> bytes:
    return "\n".join(format_line(n) for n in snapshot.root.walk()).encode("utf-8")


def _split_group(group: str | None) -> tuple[str, ...]:
    if not group:
        return ()
    return tuple(group.split(","))


def parse_compact_text(data: bytes | str) -> list[NodeRecord]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if not text:
        return []
    records = []
    # split on LF only: labels may legitimately contain other line separators
    for lineno, line in enumerate(text.split("\n"), start=1):
        m = _LINE.fullmatch(line)
        if m is None:
            if not line.startswith("[e"):
                raise MalformedLine(lineno, "expected '[e<id>]' element marker")
            if " @" not in line:
                raise MalformedLine(lineno, "missing '@' coordinate marker")
            raise MalformedLine(lineno, f"cannot parse {line[:60]!r}")
        records.append(
            NodeRecord(
                id=int(m["id"]),
                role=m["role"],
                label=unescape_label(m["label"]),
                x=int(m["x"]),
                y=int(m["y"]),
                w=int(m["w"]),
                h=int(m["h"]),
                actions=_split_group(m["actions"]),
                states=_split_group(m["states"]),
            )
        )
    return records


@dataclass(frozen=True)
class TilingPlan:
    width: int
    height: int
    tile_size: int
    scale: float
    tile_count: int
    tokens_per_tile: int = DEFAULT_TOKENS_PER_TILE

    @property
    def token_count(self) -> int:
        return self.tile_count * self.tokens_per_tile


def plan_tiling(
    width: int,
    height: int,
    tile_size: int = DEFAULT_TILE_SIZE,
    tokens_per_tile: int = DEFAULT_TOKENS_PER_TILE,
) -> TilingPlan:
    """Resize the shorter side down to ``tile_size`` and tile along the longer side.

    A 1920x1080 screen becomes 1820x1024 and needs two tiles. Screens whose
    shorter side already fits are not upscaled.
    """
    if width <= 0 or height <= 0:
        raise ValueError(f"screen size must be positive, got {width}x{height}")
    if tile_size <= 0 or tokens_per_tile < 0:
        raise ValueError("tile_size must be positive and tokens_per_tile non-negative")
    short, long_ = min(width, height), max(width, height)
    if short > tile_size:
        scale = tile_size / short
        # ceil(scale * long / tile_size) == ceil(long / short), kept in integers
        tiles = -(-long_ // short)
    else:
        scale = 1.0
        tiles = -(-long_ // tile_size)
    return TilingPlan(width, height, tile_size, scale, max(1, tiles), tokens_per_tile)


@dataclass(frozen=True)
class HybridPayload:
    text_frame: TokenFrame
    visual_frame: TokenFrame

    @property
    def total_bytes(self) -> int:
        return self.text_frame.size + self.visual_frame.size

    @property
    def text_bytes(self) -> int:
        return len(self.text_frame.payload)

    @property
    def visual_bytes(self) -> int:
        return len(self.visual_frame.payload)

    @property
    def payload_bytes(self) -> int:
        """Application bytes without frame headers."""
        return self.text_bytes + self.visual_bytes


def assemble_hybrid(
    snapshot: ScreenSnapshot,
    tiling: TilingPlan | None,
    registry: CodebookRegistry,
    *,
    visual_codebook_id: int = VISUAL_CODEBOOK,
    sequence: int = 0,
    timestamp_us: int = 0,
) -> HybridPayload:
    if tiling is None:
        tiling = plan_tiling(snapshot.width, snapshot.height)
    size = registry.codebook_size(visual_codebook_id)
    # token values do not affect transport size; use a fixed pattern
    tokens = [i % size for i in range(tiling.token_count)]
    text_frame = encode_frame(
        Modality.STRUCTURED_TEXT, 0, text=encode_compact_text(snapshot), registry=registry,
        sequence=sequence, timestamp_us=timestamp_us,
    )
    visual_frame = encode_frame(
        Modality.VISUAL_TOKENS, visual_codebook_id, tokens=tokens, registry=registry,
        sequence=sequence + 1, timestamp_us=timestamp_us,
    )
    return HybridPayload(text_frame, visual_frame)


# -- snapshot files ------------------------------------------------------------

def node_to_dict(node: UiNode) -> dict:
    return {
        "id": node.id, "role": node.role, "label": node.label,
        "x": node.x, "y": node.y, "w": node.w, "h": node.h,
        "actions": list(node.actions), "states": list(node.states),
        "children": [node_to_dict(c) for c in node.children],
    }


def node_from_dict(d: dict) -> UiNode:
    return UiNode(
        id=int(d["id"]), role=d["role"], label=d.get("label", ""),
        x=int(d.get("x", 0)), y=int(d.get("y", 0)), w=int(d.get("w", 0)), h=int(d.get("h", 0)),
        actions=tuple(d.get("actions", ())), states=tuple(d.get("states", ())),
        children=tuple(node_from_dict(c) for c in d.get("children", ())),
    )


def snapshot_to_dict(snapshot: ScreenSnapshot) -> dict:
    return {
        "format": SNAPSHOT_FORMAT,
        "version": FILE_VERSION,
        "width": snapshot.width,
        "height": snapshot.height,
        "source": snapshot.source.value,
        "ocr_encode_ms": snapshot.ocr_encode_ms,
        "root": node_to_dict(snapshot.root),
    }


def snapshot_from_dict(d: dict) -> ScreenSnapshot:
    if d.get("format", SNAPSHOT_FORMAT) != SNAPSHOT_FORMAT:
        raise ValueError(f"not a snapshot record: format={d.get('format')!r}")
    if d.get("version", FILE_VERSION) != FILE_VERSION:
        raise ValueError(f"unsupported snapshot version {d.get('version')}")
    return ScreenSnapshot(
        width=int(d["width"]),
        height=int(d["height"]),
        root=node_from_dict(d["root"]),
        source=Source(d.get("source", Source.ACCESSIBILITY_TREE.value)),
        ocr_encode_ms=d.get("ocr_encode_ms"),
    )


def save_corpus(snapshots: Sequence[ScreenSnapshot], path: str | Path, **meta) -> None:
    doc = {"format": CORPUS_FORMAT, "version": FILE_VERSION, **meta,
           "snapshots": [snapshot_to_dict(s) for s in snapshots]}
    Path(path).write_text(json.dumps(doc, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def load_corpus(path: str | Path) -> list[ScreenSnapshot]:
    """Load a corpus file, or a single snapshot file as a one-element corpus."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    fmt = doc.get("format")
    if fmt == SNAPSHOT_FORMAT:
        return [snapshot_from_dict(doc)]
    if fmt != CORPUS_FORMAT:
        raise ValueError(f"{path}: unknown format {fmt!r}")
    if doc.get("version") != FILE_VERSION:
        raise ValueError(f"{path}: unsupported corpus version {doc.get('version')}")
    return [snapshot_from_dict(s) for s in doc["snapshots"]]
