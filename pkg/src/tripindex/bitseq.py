"""Plain bit vectors with rank/select support.

Positions exposed by :class:`BitVector` are 1-based: ``access(1)`` is the
first bit, ``rank1(i)`` counts set bits in ``[1..i]`` and ``select1(j)``
returns the 1-based position of the j-th set bit.

Layout (rank9 style): 64-bit payload words; per 512-bit superblock one
absolute count plus one word packing the seven 9-bit relative counts of its
words; sampled positions of every 8192-th one and zero guide select.

The ``_rank1`` / ``_select1`` / ``_select0`` kernels work on 0-based bit
offsets and are shared with the suffix array and wavelet matrix code.
"""
from __future__ import annotations

import struct

import numba
import numpy as np

from .errors import NotFoundError, RangeError

SUPERBLOCK_BITS = 512
SELECT_SAMPLE = 8192

_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_U0 = np.uint64(0)
_U1 = np.uint64(1)
_U2 = np.uint64(2)
_U4 = np.uint64(4)
_U56 = np.uint64(56)
_U511 = np.uint64(511)
_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@numba.njit(cache=True, nogil=True)
def popcount64(x):
    x = x - ((x >> _U1) & _M1)
    x = (x & _M2) + ((x >> _U2) & _M2)
    x = (x + (x >> _U4)) & _M4
    return np.int64((x * _H01) >> _U56)


@numba.njit(cache=True, nogil=True)
def _select_in_word(x, r):
    # 0-based offset of the r-th (1-based) set bit of x
    for _ in range(r - 1):
        x &= x - _U1
    low = x & (~x + _U1)
    return popcount64(low - _U1)


@numba.njit(cache=True, nogil=True)
def _rel(rel, s, t):
    if t == 0:
        return np.int64(0)
    return np.int64((rel[s] >> np.uint64(9 * (t - 1))) & _U511)


@numba.njit(cache=True, nogil=True)
def _rank1(words, supers, rel, nbits, i):
    """Set bits among the first ``i`` bits."""
    if i >= nbits:
        return supers[supers.shape[0] - 1]
    w = i >> 6
    s = i >> 9
    r = supers[s] + _rel(rel, s, w & 7)
    b = i & 63
    if b:
        r += popcount64(words[w] & ((_U1 << np.uint64(b)) - _U1))
    return r


@numba.njit(cache=True, nogil=True)
def _access(words, i):
    return np.int64((words[i >> 6] >> np.uint64(i & 63)) & _U1)


@numba.njit(cache=True, nogil=True)
def _select1(words, supers, rel, samples, j):
    """0-based offset of the j-th (1-based) set bit; caller checks bounds."""
    nsuper = supers.shape[0] - 1
    k = (j - 1) // SELECT_SAMPLE
    lo = samples[k] >> 9
    hi = (samples[k + 1] >> 9) if k + 1 < samples.shape[0] else nsuper - 1
    while lo < hi:
        mid = (lo + hi + 1) >> 1
        if supers[mid] < j:
            lo = mid
        else:
            hi = mid - 1
    s = lo
    rem = j - supers[s]
    nwords = words.shape[0]
    t = 0
    for u in range(1, 8):
        if s * 8 + u >= nwords or _rel(rel, s, u) >= rem:
            break
        t = u
    rem -= _rel(rel, s, t)
    w = s * 8 + t
    return w * 64 + _select_in_word(words[w], rem)


@numba.njit(cache=True, nogil=True)
def _select0(words, supers, rel, samples, j):
    """0-based offset of the j-th (1-based) unset bit; caller checks bounds."""
    nsuper = supers.shape[0] - 1
    k = (j - 1) // SELECT_SAMPLE
    lo = samples[k] >> 9
    hi = (samples[k + 1] >> 9) if k + 1 < samples.shape[0] else nsuper - 1
    while lo < hi:
        mid = (lo + hi + 1) >> 1
        if mid * SUPERBLOCK_BITS - supers[mid] < j:
            lo = mid
        else:
            hi = mid - 1
    s = lo
    rem = j - (s * SUPERBLOCK_BITS - supers[s])
    nwords = words.shape[0]
    t = 0
    for u in range(1, 8):
        if s * 8 + u >= nwords or u * 64 - _rel(rel, s, u) >= rem:
            break
        t = u
    rem -= t * 64 - _rel(rel, s, t)
    w = s * 8 + t
    return w * 64 + _select_in_word(~words[w], rem)


def _directories(words: np.ndarray, nbits: int):
    nwords = words.shape[0]
    nsuper = (nwords + 7) // 8
    pc = np.zeros(nsuper * 8, dtype=np.int64)
    pc[:nwords] = np.bitwise_count(words)
    pc = pc.reshape(nsuper, 8)
    before = np.cumsum(pc, axis=1) - pc
    rel = np.zeros(nsuper, dtype=np.uint64)
    for t in range(1, 8):
        rel |= before[:, t].astype(np.uint64) << np.uint64(9 * (t - 1))
    supers = np.zeros(nsuper + 1, dtype=np.int64)
    np.cumsum(pc.sum(axis=1), out=supers[1:])
    return supers, rel


class BitVector:
    """Immutable bit sequence with constant-time rank and fast select."""

    __slots__ = ("n_bits", "words", "supers", "rel", "samples1", "samples0", "ones")

    def __init__(self, bits=()):
        bits = np.asarray(bits, dtype=bool).ravel()
        self.n_bits = int(bits.shape[0])
        nwords = (self.n_bits + 63) // 64
        raw = np.zeros(nwords * 8, dtype=np.uint8)
        packed = np.packbits(bits, bitorder="little")
        raw[: packed.shape[0]] = packed
        self.words = raw.view("<u8").astype(np.uint64)
        self.supers, self.rel = _directories(self.words, self.n_bits)
        self.ones = int(self.supers[-1])
        self.samples1 = np.flatnonzero(bits)[::SELECT_SAMPLE].astype(np.int64)
        self.samples0 = np.flatnonzero(~bits)[::SELECT_SAMPLE].astype(np.int64)

    @classmethod
    def _from_parts(cls, n_bits, words, supers, rel, samples1, samples0):
        self = cls.__new__(cls)
        self.n_bits = n_bits
        self.words = words
        self.supers = supers
        self.rel = rel
        self.samples1 = samples1
        self.samples0 = samples0
        self.ones = int(supers[-1])
        return self

    def __len__(self):
        return self.n_bits

    def __repr__(self):
        return f"BitVector(n_bits={self.n_bits}, ones={self.ones})"

    @property
    def zeros(self) -> int:
        return self.n_bits - self.ones

    def access(self, i: int) -> int:
        if not 1 <= i <= self.n_bits:
            raise RangeError(f"position {i} outside [1, {self.n_bits}]")
        return int(_access(self.words, i - 1))

    def __getitem__(self, i: int) -> int:
        return self.access(i)

    def rank1(self, i: int) -> int:
        if not 0 <= i <= self.n_bits:
            raise RangeError(f"rank position {i} outside [0, {self.n_bits}]")
        return int(_rank1(self.words, self.supers, self.rel, self.n_bits, i))

    def rank0(self, i: int) -> int:
        return i - self.rank1(i)

    def select1(self, j: int) -> int:
        if not 1 <= j <= self.ones:
            raise NotFoundError(f"no set bit number {j} (have {self.ones})")
        return int(_select1(self.words, self.supers, self.rel, self.samples1, j)) + 1

    def select0(self, j: int) -> int:
        if not 1 <= j <= self.zeros:
            raise NotFoundError(f"no unset bit number {j} (have {self.zeros})")
        return int(_select0(self.words, self.supers, self.rel, self.samples0, j)) + 1

    def to_list(self) -> list[int]:
        bits = np.unpackbits(self.words.view(np.uint8), bitorder="little")
        return bits[: self.n_bits].astype(int).tolist()

    # -- serialization -------------------------------------------------------

    def directory_nbytes(self) -> int:
        return (
            self.supers.nbytes + self.rel.nbytes
            + 16 + self.samples1.nbytes + self.samples0.nbytes
        )

    def to_bytes(self) -> bytes:
        parts = [
            struct.pack("<Q", self.n_bits),
            self.words.astype("<u8").tobytes(),
            self.supers.astype("<i8").tobytes(),
            self.rel.astype("<u8").tobytes(),
            struct.pack("<Q", self.samples1.shape[0]),
            self.samples1.astype("<i8").tobytes(),
            struct.pack("<Q", self.samples0.shape[0]),
            self.samples0.astype("<i8").tobytes(),
        ]
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, buf, offset: int = 0) -> tuple["BitVector", int]:
        """Decode a record at ``offset``; returns the vector and the end offset."""
        (n_bits,) = struct.unpack_from("<Q", buf, offset)
        offset += 8
        nwords = (n_bits + 63) // 64
        nsuper = (nwords + 7) // 8

        def take(count, dtype):
            nonlocal offset
            arr = np.frombuffer(buf, dtype=dtype, count=count, offset=offset)
            offset += arr.nbytes
            return arr

        words = take(nwords, "<u8").astype(np.uint64)
        supers = take(nsuper + 1, "<i8").astype(np.int64)
        rel = take(nsuper, "<u8").astype(np.uint64)
        (c1,) = struct.unpack_from("<Q", buf, offset)
        offset += 8
        samples1 = take(c1, "<i8").astype(np.int64)
        (c0,) = struct.unpack_from("<Q", buf, offset)
        offset += 8
        samples0 = take(c0, "<i8").astype(np.int64)
        return cls._from_parts(n_bits, words, supers, rel, samples1, samples0), offset

    def __eq__(self, other):
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.n_bits == other.n_bits and np.array_equal(self.words, other.words)

    __hash__ = None


def build_bitvector(bits) -> BitVector:
    return BitVector(bits)
