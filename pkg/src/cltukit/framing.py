"""Transmission-unit assembly and receiver-side stream segmentation.

A transmission unit is a 64-bit start marker, up to N randomized
codewords, and an optional 128-bit tail block; units are separated by an
alternating idle pattern.  The tail value stored in the configuration is
the encapsulation-side sequence (it is appended verbatim); the word the
decoder actually sees is its XOR with the 128-bit keystream, available
through ``dts_of``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

from .code import LinearCode, ccsds_short_code
from .gf2 import BitWord
from .scrambler import keystream, randomize

__all__ = [
    "DEFAULT_START_SEQ_HEX",
    "CltuConfig",
    "StreamMarkers",
    "SymbolStream",
    "idle_pattern",
    "encapsulate",
    "dts_of",
    "tail_windows",
    "dump_stream",
    "load_stream",
]

START_SEQ_BITS = 64
BLOCK_BITS = 128

# 64-bit start marker. The governing document for this toolkit fixes only
# the length; the shipped value is an arbitrary high-transition default
# and is overridable per run.
DEFAULT_START_SEQ_HEX = "034776C7272895B0"


def idle_pattern(length: int, start_bit: int = 0) -> BitWord:
    """Alternating filler beginning with ``start_bit``."""
    return BitWord.alternating(length, start_bit)


@dataclass(frozen=True)
class CltuConfig:
    start_seq: BitWord = field(
        default_factory=lambda: BitWord.from_hex(DEFAULT_START_SEQ_HEX))
    n_codewords: int = 40
    ts: Optional[BitWord] = None  # encapsulation-side value
    idle_start_bit: int = 0
    idle_len: int = 256

    def __post_init__(self):
        if self.start_seq.length != START_SEQ_BITS:
            raise ValueError(f"start sequence must be {START_SEQ_BITS} bits")
        if self.ts is not None and self.ts.length != BLOCK_BITS:
            raise ValueError(f"tail sequence must be {BLOCK_BITS} bits")
        if self.n_codewords < 1:
            raise ValueError("n_codewords must be >= 1")
        if self.idle_start_bit not in (0, 1):
            raise ValueError("idle_start_bit must be 0 or 1")
        if self.idle_len < 0:
            raise ValueError("idle_len must be >= 0")


@dataclass(frozen=True)
class StreamMarkers:
    """Ground-truth offsets recorded at assembly time."""

    cltu_start: int               # offset of the start marker
    codewords: tuple[int, ...]    # offset of each randomized codeword
    ts: Optional[int]             # offset of the tail block, if present

    def as_list(self) -> list[int]:
        out = [self.cltu_start, *self.codewords]
        if self.ts is not None:
            out.append(self.ts)
        return out


@dataclass(frozen=True)
class SymbolStream:
    bits: BitWord
    markers: StreamMarkers


def encapsulate(messages: list[BitWord], cfg: CltuConfig,
                code: Optional[LinearCode] = None) -> SymbolStream:
    """Assemble idle || start || randomized codewords || tail || idle.

    Each message is encoded with the left systematic form and randomized;
    the configured tail value is appended verbatim.
    """
    if len(messages) > cfg.n_codewords:
        raise ValueError(
            f"{len(messages)} messages exceed configured N={cfg.n_codewords}")
    if code is None:
        code = ccsds_short_code()

    pieces: list[BitWord] = []
    offset = 0

    def push(w: BitWord) -> int:
        nonlocal offset
        pieces.append(w)
        at = offset
        offset += w.length
        return at

    if cfg.idle_len:
        push(idle_pattern(cfg.idle_len, cfg.idle_start_bit))
    start_at = push(cfg.start_seq)
    cw_offsets = []
    for m in messages:
        cw = randomize(code.encode_left(m))
        cw_offsets.append(push(cw))
    ts_at = push(cfg.ts) if cfg.ts is not None else None
    if cfg.idle_len:
        push(idle_pattern(cfg.idle_len, cfg.idle_start_bit))

    bits = pieces[0]
    for p in pieces[1:]:
        bits = bits.concat(p)
    return SymbolStream(bits, StreamMarkers(start_at, tuple(cw_offsets), ts_at))


def dts_of(ts: BitWord) -> BitWord:
    """Decoder-side view of a tail value: ts XOR the 128-bit keystream."""
    if ts.length != BLOCK_BITS:
        raise ValueError(f"tail sequence must be {BLOCK_BITS} bits")
    return ts ^ keystream(BLOCK_BITS)


def tail_windows(stream: SymbolStream, start_offset: int) -> Iterator[BitWord]:
    """Consecutive 128-bit decoder windows after a start marker at
    ``start_offset``: window i starts at start_offset + 64 + 128 i."""
    if not 0 <= start_offset < stream.bits.length:
        raise ValueError("start offset outside stream")
    at = start_offset + START_SEQ_BITS
    while at + BLOCK_BITS <= stream.bits.length:
        yield stream.bits.slice(at, at + BLOCK_BITS)
        at += BLOCK_BITS


def dump_stream(stream: SymbolStream, hex_path: str | Path,
                markers_path: str | Path) -> None:
    """Write the stream as hex plus a sidecar marker file (one decimal
    offset per line).  The stream length must be a multiple of 4 bits."""
    Path(hex_path).write_text(stream.bits.to_hex() + "\n")
    Path(markers_path).write_text(
        "".join(f"{off}\n" for off in stream.markers.as_list()))


def load_stream(hex_path: str | Path, markers_path: str | Path,
                has_ts: bool) -> SymbolStream:
    bits = BitWord.from_hex(Path(hex_path).read_text())
    offs = [int(ln) for ln in Path(markers_path).read_text().split()]
    ts_at = offs[-1] if has_ts else None
    cws = tuple(offs[1:-1]) if has_ts else tuple(offs[1:])
    return SymbolStream(bits, StreamMarkers(offs[0], cws, ts_at))
