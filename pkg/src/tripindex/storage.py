"""Single-file index container and space accounting.

Layout (all little-endian)::

    magic      5 bytes   b"TCTR1"
    version    u16
    endian     u8        1 = little-endian
    grid       3 x u32   slot_minutes, day_type_count, day_minutes
    sections   u8        section count (2)
    per section: u64 byte length, u32 crc32
    section payloads in order: TCSA record, wavelet-matrix record
"""
from __future__ import annotations

import math
import os
import struct
import zlib
from dataclasses import dataclass

from .corpus import TimeGrid
from .errors import IntegrityError
from .queryengine import TripIndex
from .tcsa import TCSA
from .wmatrix import WaveletMatrix

MAGIC = b"TCTR1"
VERSION = 1
_HEAD = struct.Struct("<5sHB3IB")
_SECTION = struct.Struct("<QI")


def dumps(index: TripIndex) -> bytes:
    sections = [index.tcsa.to_bytes(), index.times.to_bytes()]
    g = index.grid
    parts = [_HEAD.pack(MAGIC, VERSION, 1, g.slot_minutes, g.day_type_count, g.day_minutes,
                        len(sections))]
    parts += [_SECTION.pack(len(s), zlib.crc32(s)) for s in sections]
    parts += sections
    return b"".join(parts)


def loads(data: bytes) -> TripIndex:
    if len(data) < _HEAD.size or data[:5] != MAGIC:
        raise IntegrityError("not an index file (bad magic)")
    magic, version, endian, slot, days, minutes, count = _HEAD.unpack_from(data, 0)
    if version != VERSION:
        raise IntegrityError(f"unsupported index version {version}")
    if endian != 1:
        raise IntegrityError("unsupported byte order")
    if count != 2:
        raise IntegrityError(f"expected 2 sections, found {count}")
    offset = _HEAD.size
    table = []
    for _ in range(count):
        table.append(_SECTION.unpack_from(data, offset))
        offset += _SECTION.size
    if offset + sum(length for length, _ in table) != len(data):
        raise IntegrityError("section lengths do not match the file size")
    payloads = []
    for length, crc in table:
        chunk = data[offset: offset + length]
        if zlib.crc32(chunk) != crc:
            raise IntegrityError("section checksum mismatch")
        payloads.append(chunk)
        offset += length
    try:
        grid = TimeGrid(slot, days, minutes)
        tcsa, end = TCSA.from_bytes(payloads[0])
        times, end2 = WaveletMatrix.from_bytes(payloads[1])
        if end != len(payloads[0]) or end2 != len(payloads[1]):
            raise ValueError("trailing bytes in a section")
        return TripIndex(tcsa, times, grid)
    except IntegrityError:
        raise
    except Exception as exc:
        raise IntegrityError(f"malformed index: {exc}") from None


def save(index: TripIndex, path) -> int:
    data = dumps(index)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
    return len(data)


def load(path) -> TripIndex:
    with open(path, "rb") as fh:
        return loads(fh.read())


@dataclass(frozen=True)
class SpaceReport:
    stop_occurrences: int
    bits_per_stop: int
    plain_baseline_bytes: int
    stops_index_bytes: int
    time_index_bytes: int

    @classmethod
    def of(cls, index: TripIndex) -> "SpaceReport":
        occ = index.tcsa.stop_occurrences
        bits = max(1, math.ceil(math.log2(index.n_stops + 1)))
        return cls(occ, bits, -(-occ * bits // 8), index.stops_index_bytes(),
                   index.time_index_bytes())

    @property
    def ratio_percent(self) -> float:
        return round(100.0 * self.stops_index_bytes / self.plain_baseline_bytes, 2)

    def lines(self) -> list[str]:
        return [
            f"stop occurrences      {self.stop_occurrences}",
            f"plain baseline        {self.plain_baseline_bytes} bytes "
            f"({self.bits_per_stop} bits/stop)",
            f"stops index (TCSA)    {self.stops_index_bytes} bytes",
            f"time index (WM)       {self.time_index_bytes} bytes",
            f"ratio                 {self.ratio_percent:.2f}%",
        ]
