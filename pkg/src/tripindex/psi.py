"""Sampled differential encoding of the successor permutation.

Entries are grouped into blocks of ``sample_rate``; each block stores its
first value in ``samples`` and the byte offset of its tokens in
``offsets``. The remaining entries of a block are varint tokens:

* odd token ``t``:  a run of ``(t >> 1) + 1`` deltas equal to +1
* even token ``t``: one literal delta, zigzag-coded in ``t >> 1``

Runs never cross a block boundary, so any entry decodes from its block
sample alone. Deltas may be negative at section boundaries and inside the
separator section.
"""
from __future__ import annotations

import struct

import numba
import numpy as np

from .errors import RangeError


@numba.njit(cache=True, nogil=True)
def _put_varint(out, pos, value):
    while value >= 0x80:
        out[pos] = np.uint8((value & 0x7F) | 0x80)
        value >>= 7
        pos += 1
    out[pos] = np.uint8(value)
    return pos + 1


@numba.njit(cache=True, nogil=True)
def _get_varint(stream, pos):
    value = np.int64(0)
    shift = 0
    while True:
        byte = np.int64(stream[pos])
        pos += 1
        value |= (byte & 0x7F) << shift
        if byte < 0x80:
            return value, pos
        shift += 7


@numba.njit(cache=True)
def _encode(values, rate):
    n = values.shape[0]
    nsamp = (n + rate - 1) // rate
    samples = np.empty(nsamp, dtype=np.int64)
    offsets = np.empty(nsamp, dtype=np.int64)
    out = np.empty(n * 10 + 16, dtype=np.uint8)
    pos = 0
    for k in range(nsamp):
        base = k * rate
        end = min(base + rate, n)
        samples[k] = values[base]
        offsets[k] = pos
        i = base + 1
        while i < end:
            d = values[i] - values[i - 1]
            if d == 1:
                r = 1
                while i + r < end and values[i + r] - values[i + r - 1] == 1:
                    r += 1
                pos = _put_varint(out, pos, ((r - 1) << 1) | 1)
                i += r
            else:
                z = (d << 1) ^ (d >> 63)
                pos = _put_varint(out, pos, z << 1)
                i += 1
    return samples, offsets, out[:pos].copy()


@numba.njit(cache=True, nogil=True)
def _decode_at(samples, offsets, stream, rate, i):
    """Value at 0-based index ``i``."""
    k = i // rate
    value = np.int64(samples[k])
    rem = i - k * rate
    pos = np.int64(offsets[k])
    while rem > 0:
        tok, pos = _get_varint(stream, pos)
        if tok & 1:
            run = (tok >> 1) + 1
            if run >= rem:
                return value + rem
            value += run
            rem -= run
        else:
            z = tok >> 1
            value += (z >> 1) ^ -(z & 1)
            rem -= 1
    return value


@numba.njit(cache=True)
def _decode_all(samples, offsets, stream, rate, n):
    out = np.empty(n, dtype=np.int64)
    runs = 0
    for k in range(samples.shape[0]):
        base = k * rate
        end = min(base + rate, n)
        value = np.int64(samples[k])
        out[base] = value
        pos = np.int64(offsets[k])
        i = base + 1
        while i < end:
            tok, pos = _get_varint(stream, pos)
            if tok & 1:
                run = (tok >> 1) + 1
                for _ in range(run):
                    value += 1
                    out[i] = value
                    i += 1
                runs += run
            else:
                z = tok >> 1
                value += (z >> 1) ^ -(z & 1)
                out[i] = value
                i += 1
    return out, runs


def _narrow(arr: np.ndarray) -> np.ndarray:
    if arr.size == 0 or int(arr.max()) < 2**32:
        return arr.astype(np.uint32)
    return arr.astype(np.uint64)


class CompressedPsi:
    """Read-only compressed integer sequence with random access."""

    def __init__(self, values, sample_rate: int = 64):
        values = np.ascontiguousarray(values, dtype=np.int64)
        if sample_rate < 1:
            raise ValueError("sample_rate must be positive")
        self.n = int(values.shape[0])
        self.sample_rate = int(sample_rate)
        samples, offsets, self.stream = _encode(values, self.sample_rate)
        self.samples = _narrow(samples)
        self.offsets = _narrow(offsets)

    def __len__(self):
        return self.n

    def __getitem__(self, i: int) -> int:
        """1-based access, mirroring the rest of the public API."""
        if not 1 <= i <= self.n:
            raise RangeError(f"position {i} outside [1, {self.n}]")
        return int(_decode_at(self.samples, self.offsets, self.stream, self.sample_rate, i - 1))

    def decode(self) -> np.ndarray:
        return _decode_all(self.samples, self.offsets, self.stream, self.sample_rate, self.n)[0]

    def run_fraction(self) -> float:
        """Share of deltas covered by +1 run tokens."""
        deltas = self.n - self.samples.shape[0]
        if deltas == 0:
            return 0.0
        _, runs = _decode_all(self.samples, self.offsets, self.stream, self.sample_rate, self.n)
        return runs / deltas

    @property
    def nbytes(self) -> int:
        return len(self.to_bytes())

    def to_bytes(self) -> bytes:
        return b"".join([
            struct.pack("<QQBBQ", self.n, self.sample_rate,
                        self.samples.itemsize, self.offsets.itemsize, self.stream.shape[0]),
            self.samples.astype(self.samples.dtype.newbyteorder("<")).tobytes(),
            self.offsets.astype(self.offsets.dtype.newbyteorder("<")).tobytes(),
            self.stream.tobytes(),
        ])

    @classmethod
    def from_bytes(cls, buf, offset: int = 0) -> tuple["CompressedPsi", int]:
        head = struct.Struct("<QQBBQ")
        n, rate, s_size, o_size, stream_len = head.unpack_from(buf, offset)
        offset += head.size
        nsamp = (n + rate - 1) // rate
        self = cls.__new__(cls)
        self.n, self.sample_rate = n, rate
        kinds = {4: np.uint32, 8: np.uint64}
        for name, size in (("samples", s_size), ("offsets", o_size)):
            dtype = np.dtype(kinds[size]).newbyteorder("<")
            arr = np.frombuffer(buf, dtype=dtype, count=nsamp, offset=offset)
            setattr(self, name, arr.astype(kinds[size]))
            offset += arr.nbytes
        self.stream = np.frombuffer(buf, dtype=np.uint8, count=stream_len, offset=offset).copy()
        offset += stream_len
        return self, offset
