"""Compressed suffix array over trips with cyclic-within-trip suffixes.

The concatenation ``S`` holds the rank-ordered trips, each followed by a
separator ``$`` (symbol 0), plus one final terminator ``$``. The suffix of a
stop occurrence continues past its trip's ``$`` back to the trip's first
stop, so applying Psi walks every trip as a cycle.

Suffix order: compare the cyclic symbol streams; when both suffixes reach
their trips' ``$`` at the same offset, the lower trip rank wins (the
terminator has rank 0). This key is equivalent to sorting tuples
``(s_o, ..., s_{L-1}, $, rank)`` and gives three properties the queries
depend on:

* the ``$`` section lists trips in rank order (first stop, last stop, start
  time, ...), so ``$X`` is a contiguous range;
* suffixes ``Y $ ...`` are ordered by rank as well, so ``Y$X`` is contiguous
  and Psi maps it, in order, onto the ``$XY`` block of the ``$`` section;
* inside a stop's section Psi is strictly increasing (equal first symbols,
  order decided by what follows).

Only ``V``, ``D`` and the compressed Psi are kept after construction.
"""
from __future__ import annotations

import heapq
import struct
from typing import NamedTuple

import numba
import numpy as np

from .bitseq import BitVector, _rank1, _select1
from .corpus import SEPARATOR, TripCorpus, sort_trips
from .errors import BuildError, RangeError, UsageError
from .psi import CompressedPsi, _decode_at


class SARange(NamedTuple):
    """Inclusive 1-based suffix-array range; empty when ``hi < lo``."""

    lo: int
    hi: int

    def __len__(self):
        return max(0, self.hi - self.lo + 1)

    def __bool__(self):
        return self.hi >= self.lo


EMPTY = SARange(1, 0)


# -- construction ---------------------------------------------------------------

class SequenceLayout(NamedTuple):
    symbols: np.ndarray     # S, 0-based
    trip: np.ndarray        # trip rank per position (0 = terminator)
    offset: np.ndarray      # offset inside the trip (L for its $)
    length: np.ndarray      # length of the owning trip
    starts: np.ndarray      # S offset of each trip's first stop
    times: np.ndarray       # time code per position ($ -> trip start, terminator -> 0)


def layout_sequence(trips) -> SequenceLayout:
    trip_count = len(trips)
    lengths = np.fromiter((len(t) for t in trips), dtype=np.int64, count=trip_count)
    spans = lengths + 1
    n = int(spans.sum()) + 1
    starts = np.zeros(trip_count, dtype=np.int64)
    np.cumsum(spans[:-1], out=starts[1:])

    symbols = np.zeros(n, dtype=np.int64)
    times = np.zeros(n, dtype=np.int64)
    trip = np.zeros(n, dtype=np.int64)
    trip[:-1] = np.repeat(np.arange(1, trip_count + 1), spans)
    offset = np.zeros(n, dtype=np.int64)
    offset[:-1] = np.arange(n - 1) - np.repeat(starts, spans)
    length = np.zeros(n, dtype=np.int64)
    length[:-1] = np.repeat(lengths, spans)

    is_stop = offset < length
    symbols[is_stop] = np.fromiter(
        (s for t in trips for s in t.stops), dtype=np.int64, count=int(lengths.sum()))
    times[is_stop] = np.fromiter(
        (c for t in trips for c in t.times), dtype=np.int64, count=int(lengths.sum()))
    separators = starts + lengths
    times[separators] = times[starts]
    return SequenceLayout(symbols, trip, offset, length, starts, times)


def _column(layout: SequenceLayout, positions: np.ndarray, k: int) -> np.ndarray:
    """k-th element of the sort key of each suffix in ``positions``."""
    off = layout.offset[positions] + k
    length = layout.length[positions]
    col = np.zeros(positions.shape[0], dtype=np.int64)
    inside = off < length
    col[inside] = layout.symbols[positions[inside] + k]
    tail = off == length + 1
    col[tail] = layout.trip[positions[tail]]
    return col


def sort_suffixes(layout: SequenceLayout) -> np.ndarray:
    """0-based suffix array under the cyclic order, by LSD radix over key columns."""
    n = layout.symbols.shape[0]
    width = int(layout.length.max()) + 2 if n else 0
    base = int(max(layout.symbols.max(initial=0), layout.trip.max(initial=0))) + 1
    perm = np.arange(n, dtype=np.int64)
    k = width - 1
    while k >= 0:
        if k >= 1:
            key = _column(layout, perm, k - 1) * base + _column(layout, perm, k)
            k -= 2
        else:
            key = _column(layout, perm, 0)
            k -= 1
        perm = perm[np.argsort(key, kind="stable")]
    return perm


def successor(layout: SequenceLayout) -> np.ndarray:
    """Cyclic next position of every S position (the terminator maps to itself)."""
    n = layout.symbols.shape[0]
    nxt = np.arange(1, n + 1, dtype=np.int64)
    separators = layout.starts + layout.length[layout.starts]
    nxt[separators] = layout.starts
    nxt[n - 1] = n - 1
    return nxt


# -- query kernels (0-based suffix-array positions) ----------------------------------

@numba.njit(cache=True, nogil=True)
def _psi(samples, offsets, stream, rate, i):
    return _decode_at(samples, offsets, stream, rate, i) - 1


@numba.njit(cache=True, nogil=True)
def _symbol(words, supers, rel, nbits, vocab, i):
    return vocab[_rank1(words, supers, rel, nbits, i + 1) - 1]


@numba.njit(cache=True, nogil=True)
def _section(words, supers, rel, sel, nbits, vocab, c):
    """0-based inclusive bounds of symbol c's section, (0, -1) if absent."""
    p = np.searchsorted(vocab, c)
    if p >= vocab.shape[0] or vocab[p] != c:
        return 0, -1
    lo = _select1(words, supers, rel, sel, p + 1)
    if p + 1 < vocab.shape[0]:
        hi = _select1(words, supers, rel, sel, p + 2) - 1
    else:
        hi = nbits - 1
    return lo, hi


@numba.njit(cache=True, nogil=True)
def _symbol_after(words, supers, rel, sel, nbits, vocab, samples, offsets, stream, rate, i, k):
    for _ in range(k):
        i = _psi(samples, offsets, stream, rate, i)
    return _symbol(words, supers, rel, nbits, vocab, i)


@numba.njit(cache=True, nogil=True)
def _pattern_range(words, supers, rel, sel, nbits, vocab, samples, offsets, stream, rate,
                   pattern):
    lo, hi = _section(words, supers, rel, sel, nbits, vocab, pattern[0])
    for k in range(1, pattern.shape[0]):
        if lo > hi:
            break
        c = pattern[k]
        a, b = lo, hi + 1
        while a < b:
            mid = (a + b) >> 1
            if _symbol_after(words, supers, rel, sel, nbits, vocab,
                             samples, offsets, stream, rate, mid, k) < c:
                a = mid + 1
            else:
                b = mid
        first = a
        b = hi + 1
        while a < b:
            mid = (a + b) >> 1
            if _symbol_after(words, supers, rel, sel, nbits, vocab,
                             samples, offsets, stream, rate, mid, k) <= c:
                a = mid + 1
            else:
                b = mid
        lo, hi = first, a - 1
    return lo, hi


@numba.njit(cache=True, nogil=True)
def _start_end(words, supers, rel, sel, nbits, vocab, samples, offsets, stream, rate, x, y):
    """0-based ``Y$X`` range and its Psi image ``$XY``; (0, -1, 0, -1) if empty."""
    pattern = np.empty(3, dtype=np.int64)
    pattern[0], pattern[1], pattern[2] = y, 0, x
    lo, hi = _pattern_range(words, supers, rel, sel, nbits, vocab,
                            samples, offsets, stream, rate, pattern)
    if lo > hi:
        return 0, -1, 0, -1
    return (lo, hi, _psi(samples, offsets, stream, rate, lo),
            _psi(samples, offsets, stream, rate, hi))


def _check_pattern(pattern) -> np.ndarray:
    pat = np.asarray([SEPARATOR if s == "$" else int(s) for s in pattern], dtype=np.int64)
    if pat.size == 0 or (pat < 0).any():
        raise UsageError(f"unsupported pattern {list(pattern)}")
    seps = np.flatnonzero(pat == SEPARATOR)
    if seps.size > 1:
        raise UsageError(f"pattern {list(pattern)} crosses more than one separator")
    # after a separator the order is by trip rank: only the first stop is sorted
    if seps.size == 1 and pat.size - seps[0] > 2:
        raise UsageError(
            f"pattern {list(pattern)}: at most one stop may follow the separator")
    return pat


class TCSA:
    """Spatial self-index: vocabulary ``V``, section bitmap ``D`` and compressed Psi."""

    def __init__(self, n, n_stops, trip_count, vocab, d: BitVector, psi: CompressedPsi):
        self.n = int(n)
        self.n_stops = int(n_stops)
        self.trip_count = int(trip_count)
        self.vocab = np.asarray(vocab, dtype=np.int64)
        self.D = d
        self.psi_codes = psi
        self._d = (d.words, d.supers, d.rel, d.samples1, self.n, self.vocab)
        self._p = (psi.samples, psi.offsets, psi.stream, psi.sample_rate)

    @property
    def sample_rate(self) -> int:
        return self.psi_codes.sample_rate

    @classmethod
    def build(cls, corpus: TripCorpus, sample_rate: int = 64) -> "TCSA":
        return build_tcsa(corpus, sample_rate)

    @classmethod
    def from_suffix_array(cls, layout: SequenceLayout, sa: np.ndarray, n_stops: int,
                          sample_rate: int) -> "TCSA":
        n = sa.shape[0]
        isa = np.empty(n, dtype=np.int64)
        isa[sa] = np.arange(n, dtype=np.int64)
        psi = isa[successor(layout)[sa]] + 1
        first = layout.symbols[sa]
        d = np.ones(n, dtype=bool)
        d[1:] = first[1:] != first[:-1]
        vocab = np.unique(layout.symbols)
        trip_count = layout.starts.shape[0]
        return cls(n, n_stops, trip_count, vocab, BitVector(d),
                   CompressedPsi(psi, sample_rate))

    # -- primitives -------------------------------------------------------------

    def _check_pos(self, i):
        if not 1 <= i <= self.n:
            raise RangeError(f"position {i} outside [1, {self.n}]")

    def _check_stop(self, x):
        if not 1 <= x <= self.n_stops:
            raise UsageError(f"stop {x} outside [1, {self.n_stops}]")

    def psi(self, i: int) -> int:
        self._check_pos(i)
        return int(_psi(*self._p, i - 1)) + 1

    def symbol_at(self, i: int) -> int:
        self._check_pos(i)
        return int(self.vocab[self.D.rank1(i) - 1])

    def section(self, symbol: int) -> SARange:
        lo, hi = _section(*self._d[:4], self.n, self.vocab, symbol)
        return SARange(lo + 1, hi + 1) if hi >= lo else EMPTY

    def pattern_range(self, pattern) -> SARange:
        pat = _check_pattern(pattern)
        lo, hi = _pattern_range(*self._d, *self._p, pat)
        return SARange(int(lo) + 1, int(hi) + 1) if hi >= lo else EMPTY

    # -- spatial queries ------------------------------------------------------------

    def _range(self, *pattern) -> SARange:
        lo, hi = _pattern_range(*self._d, *self._p, np.array(pattern, dtype=np.int64))
        return SARange(int(lo) + 1, int(hi) + 1) if hi >= lo else EMPTY

    def starts_range(self, x: int) -> SARange:
        self._check_stop(x)
        return self._range(SEPARATOR, x)

    def ends_range(self, x: int) -> SARange:
        self._check_stop(x)
        return self._range(x, SEPARATOR)

    def count_starts_at(self, x: int) -> int:
        return len(self.starts_range(x))

    def count_ends_at(self, x: int) -> int:
        return len(self.ends_range(x))

    def range_start_end(self, x: int, y: int) -> tuple[SARange, SARange]:
        """Ranges of ``Y$X`` and its Psi image ``$XY``."""
        self._check_stop(x)
        self._check_stop(y)
        lo, hi, dlo, dhi = _start_end(*self._d, *self._p, x, y)
        if lo > hi:
            return EMPTY, EMPTY
        return SARange(int(lo) + 1, int(hi) + 1), SARange(int(dlo) + 1, int(dhi) + 1)

    def count_starts_ends(self, x: int, y: int) -> int:
        return len(self.range_start_end(x, y)[0])

    def count_uses(self, x: int) -> int:
        """Occurrences of stop ``x`` (a trip visiting it twice counts twice)."""
        self._check_stop(x)
        return len(self.section(x))

    def _section_start(self, entry: int) -> int:
        # 1-based start of vocabulary entry ``entry`` (0-based), n+1 past the end
        if entry >= self.vocab.shape[0]:
            return self.n + 1
        return self.D.select1(entry + 1)

    def topk_sequential(self, k: int) -> list[tuple[int, int]]:
        if k < 1:
            raise UsageError("k must be at least 1")
        heap: list[tuple[int, int]] = []
        begin = self._section_start(1)
        for entry in range(1, self.vocab.shape[0]):
            nxt = self._section_start(entry + 1)
            item = (nxt - begin, -int(self.vocab[entry]))
            if len(heap) < k:
                heapq.heappush(heap, item)
            elif item > heap[0]:
                heapq.heapreplace(heap, item)
            begin = nxt
        return [(-neg, freq) for freq, neg in sorted(heap, reverse=True)]

    def topk_binary(self, k: int, trace: list | None = None) -> list[tuple[int, int]]:
        """Best-first splitting of the stop part of ``D``.

        With ``trace`` given, every split is appended as
        ``(segment, left, right)`` of 1-based suffix-array ranges.
        """
        if k < 1:
            raise UsageError("k must be at least 1")
        top = self.vocab.shape[0] - 1
        out: list[tuple[int, int]] = []
        if top < 1:
            return out
        lo = self._section_start(1)
        queue = [(-(self.n - lo + 1), 1, top, lo, self.n)]
        while queue and len(out) < k:
            neg, a, b, lo, hi = heapq.heappop(queue)
            if a == b:
                out.append((int(self.vocab[a]), -neg))
                continue
            mid = (a + b) // 2
            cut = self._section_start(mid + 1)
            left = (-(cut - lo), a, mid, lo, cut - 1)
            right = (-(hi - cut + 1), mid + 1, b, cut, hi)
            if trace is not None:
                trace.append((SARange(lo, hi), SARange(lo, cut - 1), SARange(cut, hi)))
            heapq.heappush(queue, left)
            heapq.heappush(queue, right)
        return out

    # -- introspection & serialization ------------------------------------------------

    def decode_psi(self) -> np.ndarray:
        return self.psi_codes.decode()

    @property
    def stop_occurrences(self) -> int:
        return self.n - self.trip_count - 1

    def to_bytes(self) -> bytes:
        deltas = np.diff(self.vocab, prepend=0)
        vocab = bytearray()
        for d in deltas.tolist():
            while d >= 0x80:
                vocab.append((d & 0x7F) | 0x80)
                d >>= 7
            vocab.append(d)
        return b"".join([
            struct.pack("<QQQQQ", self.n, self.n_stops, self.trip_count, self.sample_rate,
                        self.vocab.shape[0]),
            struct.pack("<Q", len(vocab)), bytes(vocab),
            self.D.to_bytes(),
            self.psi_codes.to_bytes(),
        ])

    @property
    def nbytes(self) -> int:
        return len(self.to_bytes())

    @classmethod
    def from_bytes(cls, buf, offset: int = 0) -> tuple["TCSA", int]:
        n, n_stops, trip_count, _rate, vsize = struct.unpack_from("<QQQQQ", buf, offset)
        offset += 40
        (vbytes,) = struct.unpack_from("<Q", buf, offset)
        offset += 8
        raw = bytes(buf[offset: offset + vbytes])
        offset += vbytes
        vocab, value, shift, acc = [], 0, 0, 0
        for byte in raw:
            acc |= (byte & 0x7F) << shift
            shift += 7
            if byte < 0x80:
                value += acc
                vocab.append(value)
                acc = shift = 0
        if len(vocab) != vsize:
            raise ValueError("vocabulary length mismatch")
        d, offset = BitVector.from_bytes(buf, offset)
        psi, offset = CompressedPsi.from_bytes(buf, offset)
        return cls(n, n_stops, trip_count, vocab, d, psi), offset


def build_tcsa(corpus: TripCorpus, sample_rate: int = 64) -> TCSA:
    if not len(corpus):
        raise BuildError("cannot index an empty corpus")
    if sample_rate < 1:
        raise UsageError("sample_rate must be positive")
    if not corpus.is_sorted:
        corpus = sort_trips(corpus)
    layout = layout_sequence(corpus.trips)
    sa = sort_suffixes(layout)
    return TCSA.from_suffix_array(layout, sa, corpus.n_stops, sample_rate)
