"""Token frame wire format.

A frame is a fixed 17-byte header followed by a payload. Token payloads are
codebook indices packed MSB-first at a fixed width of ceil(log2(size)) bits;
text payloads are opaque bytes.

Header layout (big-endian)::

    byte  0      version (high nibble) | modality (low nibble)
    bytes 1-2    codebook id
    bytes 3-4    count (tokens, or payload bytes for text modalities)
    bytes 5-8    sequence number
    bytes 9-16   sender timestamp, microseconds
"""

from __future__ import annotations

import struct
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import IntEnum

HEADER_SIZE = 17
PROTOCOL_VERSION = 1
MAX_COUNT = 0xFFFF
MAX_SEQUENCE = 0xFFFFFFFF
MAX_TIMESTAMP = 0xFFFFFFFFFFFFFFFF

_HEADER = struct.Struct("!BHHIQ")
assert _HEADER.size == HEADER_SIZE


class Modality(IntEnum):
    AUDIO_TOKENS = 0
    VISUAL_TOKENS = 1
    STRUCTURED_TEXT = 2
    ACTION_COMMAND = 3
    TTS_TOKENS = 4

    @property
    def is_text(self) -> bool:
        return self in (Modality.STRUCTURED_TEXT, Modality.ACTION_COMMAND)


class FrameError(ValueError):
    """Base class for framing errors."""


class TokenOutOfRange(FrameError):
    pass


class CountOverflow(FrameError):
    pass


class UnknownCodebook(FrameError):
    pass


class Truncated(FrameError):
    pass


class UnknownModality(FrameError):
    pass


class TrailingBytes(FrameError):
    pass


def bits_per_token(codebook_size: int) -> int:
    if codebook_size < 2:
        raise ValueError(f"codebook size must be >= 2, got {codebook_size}")
    # (n - 1).bit_length() == ceil(log2(n)) for n >= 2, without float rounding
    return (codebook_size - 1).bit_length()


def payload_bytes(token_count: int, codebook_size: int) -> int:
    """Packed size in bytes of ``token_count`` indices from a codebook."""
    if token_count < 0:
        raise ValueError("token_count must be non-negative")
    return -(-token_count * bits_per_token(codebook_size) // 8)


def pack_tokens(tokens: Sequence[int], width: int) -> bytes:
    """Concatenate ``width``-bit indices MSB-first and zero-pad the last byte."""
    acc = 0
    limit = 1 << width
    for t in tokens:
        if not 0 <= t < limit:
            raise TokenOutOfRange(f"token {t} does not fit in {width} bits")
        acc = (acc << width) | t
    nbits = len(tokens) * width
    nbytes = -(-nbits // 8)
    acc <<= nbytes * 8 - nbits
    return acc.to_bytes(nbytes, "big")


def unpack_tokens(data: bytes, count: int, width: int) -> list[int]:
    nbits = count * width
    if len(data) * 8 < nbits:
        raise Truncated(f"need {nbits} bits for {count} tokens, have {len(data) * 8}")
    acc = int.from_bytes(data, "big")
    pad = len(data) * 8 - nbits
    if acc & ((1 << pad) - 1):
        raise FrameError("non-zero padding bits after last token")
    acc >>= pad
    mask = (1 << width) - 1
    out = [0] * count
    for i in range(count - 1, -1, -1):
        out[i] = acc & mask
        acc >>= width
    return out


@dataclass(frozen=True)
class Codebook:
    size: int
    description: str = ""

    def __post_init__(self) -> None:
        if self.size < 2:
            raise ValueError(f"codebook size must be >= 2, got {self.size}")

    @property
    def bits(self) -> int:
        return bits_per_token(self.size)


class CodebookRegistry:
    """Read-only map from codebook id to codebook."""

    def __init__(self, entries: Mapping[int, Codebook] | None = None):
        self._entries: dict[int, Codebook] = {}
        for cid, book in (entries or {}).items():
            if not 0 <= cid <= 0xFFFF:
                raise ValueError(f"codebook id {cid} outside 0..65535")
            self._entries[cid] = book

    def __contains__(self, codebook_id: object) -> bool:
        return codebook_id in self._entries

    def __iter__(self):
        return iter(sorted(self._entries))

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, codebook_id: int) -> Codebook:
        try:
            return self._entries[codebook_id]
        except KeyError:
            raise UnknownCodebook(f"codebook id {codebook_id} is not registered") from None

    def codebook_size(self, codebook_id: int) -> int:
        return self.get(codebook_id).size

    def items(self):
        return sorted(self._entries.items())


# Ids used by the shipped cost profiles and pipelines.
AUDIO_CODEBOOK = 1
VISUAL_CODEBOOK = 2
TTS_CODEBOOK = 3


def default_registry() -> CodebookRegistry:
    return CodebookRegistry(
        {
            AUDIO_CODEBOOK: Codebook(1024, "speech tokenizer, first RVQ layer"),
            VISUAL_CODEBOOK: Codebook(8192, "image tokenizer, 256 tokens per 1024px tile"),
            TTS_CODEBOOK: Codebook(1024, "TTS speech tokens for client-side vocoder"),
        }
    )


@dataclass(frozen=True)
class FrameHeader:
    modality: Modality
    codebook_id: int
    count: int
    sequence: int = 0
    timestamp_us: int = 0
    version: int = PROTOCOL_VERSION

    def __post_init__(self) -> None:
        if not 0 <= self.version <= 0xF:
            raise ValueError(f"version {self.version} outside 0..15")
        if not 0 <= self.codebook_id <= 0xFFFF:
            raise ValueError(f"codebook id {self.codebook_id} outside 0..65535")
        if self.count < 0:
            raise ValueError("count must be non-negative")
        if self.count > MAX_COUNT:
            raise CountOverflow(f"count {self.count} exceeds {MAX_COUNT}")
        if not 0 <= self.sequence <= MAX_SEQUENCE:
            raise ValueError(f"sequence {self.sequence} outside 32-bit range")
        if not 0 <= self.timestamp_us <= MAX_TIMESTAMP:
            raise ValueError(f"timestamp {self.timestamp_us} outside 64-bit range")

    def pack(self) -> bytes:
        return _HEADER.pack(
            (self.version << 4) | int(self.modality),
            self.codebook_id,
            self.count,
            self.sequence,
            self.timestamp_us,
        )

    @classmethod
    def unpack(cls, data: bytes) -> FrameHeader:
        if len(data) < HEADER_SIZE:
            raise Truncated(f"header needs {HEADER_SIZE} bytes, got {len(data)}")
        first, codebook_id, count, sequence, timestamp_us = _HEADER.unpack_from(data, 0)
        try:
            modality = Modality(first & 0x0F)
        except ValueError:
            raise UnknownModality(f"modality nibble {first & 0x0F} is not defined") from None
        return cls(
            modality=modality,
            codebook_id=codebook_id,
            count=count,
            sequence=sequence,
            timestamp_us=timestamp_us,
            version=first >> 4,
        )


@dataclass(frozen=True)
class TokenFrame:
    header: FrameHeader
    payload: bytes = field(repr=False)

    def to_bytes(self) -> bytes:
        return self.header.pack() + self.payload

    @property
    def size(self) -> int:
        return HEADER_SIZE + len(self.payload)

    def __len__(self) -> int:
        return self.size


def encode_frame(
    modality: Modality,
    codebook_id: int,
    *,
    tokens: Iterable[int] | None = None,
    text: bytes | None = None,
    registry: CodebookRegistry,
    sequence: int = 0,
    timestamp_us: int = 0,
    version: int = PROTOCOL_VERSION,
) -> TokenFrame:
    """Build a frame from token indices or, for text modalities, raw bytes.

    Text frames do not consult the registry; their ``count`` is the byte
    length of ``text``.
    """
    modality = Modality(modality)
    if modality.is_text:
        if tokens is not None:
            raise FrameError(f"{modality.name} carries text, not tokens")
        payload = bytes(text or b"")
        count = len(payload)
    else:
        if text is not None:
            raise FrameError(f"{modality.name} carries tokens, not text")
        toks = list(tokens or ())
        count = len(toks)
        if count > MAX_COUNT:
            raise CountOverflow(f"{count} tokens exceed the 16-bit count field")
        width = registry.get(codebook_id).bits
        payload = pack_tokens(toks, width)
    if count > MAX_COUNT:
        raise CountOverflow(f"{count} bytes exceed the 16-bit count field")
    header = FrameHeader(
        modality=modality,
        codebook_id=codebook_id,
        count=count,
        sequence=sequence,
        timestamp_us=timestamp_us,
        version=version,
    )
    return TokenFrame(header, payload)


def declared_payload_size(header: FrameHeader, registry: CodebookRegistry) -> int:
    if header.modality.is_text:
        return header.count
    return payload_bytes(header.count, registry.codebook_size(header.codebook_id))


def decode_frame(data: bytes, registry: CodebookRegistry) -> tuple[FrameHeader, list[int] | bytes]:
    """Parse one complete frame. Returns token indices or text bytes by modality."""
    data = bytes(data)
    header = FrameHeader.unpack(data)
    expected = HEADER_SIZE + declared_payload_size(header, registry)
    if len(data) < expected:
        raise Truncated(f"frame declares {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise TrailingBytes(f"{len(data) - expected} bytes after declared payload")
    payload = data[HEADER_SIZE:]
    if header.modality.is_text:
        return header, payload
    width = registry.get(header.codebook_id).bits
    return header, unpack_tokens(payload, header.count, width)
