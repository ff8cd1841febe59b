"""The queryable trip index: spatial self-index plus a time-code wavelet matrix.

Entry ``i`` of the time matrix is the time code of the stop occurrence at
suffix-array position ``i``. Separator positions carry their trip's start
code and the global terminator carries 0.
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numba

from .corpus import TimeGrid, Trip, TripCorpus, sort_trips
from .errors import BuildError, UsageError
from .tcsa import EMPTY, SARange, TCSA, _start_end, layout_sequence, sort_suffixes
from .wmatrix import WaveletMatrix, _wm_access, _wm_count


class Semantics(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


class TimeInterval(NamedTuple):
    t1: int
    t2: int


@numba.njit(cache=True, nogil=True)
def _first_above(words, supers, rel, zeros, nbits, lo, hi, bound):
    """First offset in [lo, hi) whose code exceeds ``bound`` (codes sorted there)."""
    while lo < hi:
        mid = (lo + hi) >> 1
        if _wm_access(words, supers, rel, zeros, nbits, mid) <= bound:
            lo = mid + 1
        else:
            hi = mid
    return lo


@numba.njit(cache=True, nogil=True)
def _start_end_between(words, supers, rel, sel, nbits, vocab, samples, offsets, stream, rate,
                       w_words, w_supers, w_rel, w_zeros, w_n, x, y, t1, t2, strong, top):
    lo, hi, dlo, dhi = _start_end(words, supers, rel, sel, nbits, vocab,
                                  samples, offsets, stream, rate, x, y)
    if lo > hi:
        return 0
    # start codes are sorted inside [dlo, dhi]
    a = dlo
    if strong:
        a = _first_above(w_words, w_supers, w_rel, w_zeros, w_n, dlo, dhi + 1, t1 - 1)
    b = _first_above(w_words, w_supers, w_rel, w_zeros, w_n, a, dhi + 1, t2)
    if b <= a:
        return 0
    shift = lo - dlo
    if strong:
        return _wm_count(w_words, w_supers, w_rel, w_zeros, w_n, a + shift, b + shift, t1, t2)
    return _wm_count(w_words, w_supers, w_rel, w_zeros, w_n, lo, b + shift, t1, top)


class TripIndex:
    def __init__(self, tcsa: TCSA, times: WaveletMatrix, grid: TimeGrid):
        if times.n != tcsa.n:
            raise BuildError("time matrix length differs from the suffix array")
        if times.sigma != grid.sigma:
            raise BuildError("time matrix alphabet differs from the grid")
        self.tcsa = tcsa
        self.times = times
        self.grid = grid

    @classmethod
    def build(cls, corpus: TripCorpus, sample_rate: int = 64) -> "TripIndex":
        return build_index(corpus, sample_rate)

    @property
    def n(self) -> int:
        return self.tcsa.n

    @property
    def n_stops(self) -> int:
        return self.tcsa.n_stops

    @property
    def trip_count(self) -> int:
        return self.tcsa.trip_count

    @property
    def sample_rate(self) -> int:
        return self.tcsa.sample_rate

    def _interval(self, iv) -> TimeInterval:
        t1, t2 = iv
        if not 0 <= t1 <= t2 < self.grid.sigma:
            raise UsageError(f"time interval [{t1}, {t2}] invalid for sigma={self.grid.sigma}")
        return TimeInterval(int(t1), int(t2))

    def _count(self, r: SARange, t1: int, t2: int) -> int:
        if not r:
            return 0
        return int(_wm_count(*self.times._base, r.lo - 1, r.hi, t1, t2))

    # -- spatial --------------------------------------------------------------------

    def count_starts_at(self, x: int) -> int:
        return self.tcsa.count_starts_at(x)

    def count_ends_at(self, x: int) -> int:
        return self.tcsa.count_ends_at(x)

    def count_starts_ends(self, x: int, y: int) -> int:
        return self.tcsa.count_starts_ends(x, y)

    def count_uses(self, x: int) -> int:
        return self.tcsa.count_uses(x)

    def topk(self, k: int, method: str = "seq") -> list[tuple[int, int]]:
        if method in ("seq", "sequential"):
            return self.tcsa.topk_sequential(k)
        if method in ("bin", "binary"):
            return self.tcsa.topk_binary(k)
        raise UsageError(f"unknown top-k method {method!r}")

    # -- spatio-temporal -------------------------------------------------------------

    def q_starts_between(self, x: int, iv) -> int:
        t1, t2 = self._interval(iv)
        return self._count(self.tcsa.starts_range(x), t1, t2)

    def q_ends_between(self, x: int, iv) -> int:
        t1, t2 = self._interval(iv)
        return self._count(self.tcsa.ends_range(x), t1, t2)

    def q_uses_between(self, x: int, iv) -> int:
        t1, t2 = self._interval(iv)
        self.tcsa._check_stop(x)
        return self._count(self.tcsa.section(x), t1, t2)

    def start_subrange(self, starts: SARange, t1: int, t2: int) -> SARange:
        """Part of a ``$XY`` range whose (sorted) start codes lie in [t1, t2]."""
        base = self.times._base
        lo = starts.lo - 1
        a = _first_above(*base, lo, starts.hi, t1 - 1)
        b = _first_above(*base, a, starts.hi, t2)
        return SARange(a + 1, b) if b > a else EMPTY

    def q_start_end_between(self, x: int, y: int, iv, sem=Semantics.STRONG) -> int:
        t1, t2 = self._interval(iv)
        sem = Semantics(sem)
        self.tcsa._check_stop(x)
        self.tcsa._check_stop(y)
        return int(_start_end_between(*self.tcsa._d, *self.tcsa._p, *self.times._base, x, y,
                                      t1, t2, sem is Semantics.STRONG, self.grid.sigma - 1))

    def q_start_end_between_stepwise(self, x: int, y: int, iv, sem=Semantics.STRONG) -> int:
        """Same answer as :meth:`q_start_end_between`, one primitive at a time."""
        t1, t2 = self._interval(iv)
        sem = Semantics(sem)
        ends, starts = self.tcsa.range_start_end(x, y)
        if not ends:
            return 0
        if sem is Semantics.STRONG:
            sub = self.start_subrange(starts, t1, t2)
            if not sub:
                return 0
            shift = ends.lo - starts.lo
            return self._count(SARange(sub.lo + shift, sub.hi + shift), t1, t2)
        sub = self.start_subrange(starts, 0, t2)
        if not sub:
            return 0
        return self._count(SARange(ends.lo, ends.lo + len(sub) - 1), t1, self.grid.sigma - 1)

    def extract_trips(self) -> TripCorpus:
        """Rebuild the rank-ordered corpus by walking Psi from every separator."""
        trips = []
        for rank in range(1, self.trip_count + 1):
            stops, times = [], []
            j = self.tcsa.psi(rank + 1)
            while (s := self.tcsa.symbol_at(j)) != 0:
                stops.append(s)
                times.append(self.times.access(j))
                j = self.tcsa.psi(j)
            trips.append(Trip(stops, times, rank))
        return TripCorpus(trips, self.n_stops, self.grid, is_sorted=True)

    # -- sizes ------------------------------------------------------------------------

    def stops_index_bytes(self) -> int:
        return self.tcsa.nbytes

    def time_index_bytes(self) -> int:
        return self.times.nbytes


def build_index(corpus: TripCorpus, sample_rate: int = 64) -> TripIndex:
    if not len(corpus):
        raise BuildError("cannot index an empty corpus")
    if sample_rate < 1:
        raise UsageError("sample_rate must be positive")
    ordered = corpus if corpus.is_sorted else sort_trips(corpus)
    layout = layout_sequence(ordered.trips)
    sa = sort_suffixes(layout)
    tcsa = TCSA.from_suffix_array(layout, sa, ordered.n_stops, sample_rate)
    times = WaveletMatrix(layout.times[sa], ordered.grid.sigma)
    return TripIndex(tcsa, times, ordered.grid)
