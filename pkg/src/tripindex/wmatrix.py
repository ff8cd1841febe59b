"""Balanced wavelet matrix over fixed-width integer codes.

Level ``l`` (0-based, most significant bit first) stores bit ``m-1-l`` of
every code, in the order produced by stably partitioning the previous level
by its bit (zeros first). ``zeros[l]`` is the number of zeros on level ``l``.
Public positions are 1-based; kernels use 0-based offsets.
"""
from __future__ import annotations

import struct

import numba
import numpy as np

from .bitseq import BitVector, _access, _rank1, _select0, _select1
from .errors import BuildError, NotFoundError, RangeError, UsageError


@numba.njit(cache=True, nogil=True)
def _wm_access(words, supers, rel, zeros, nbits, i):
    m = words.shape[0]
    value = 0
    for l in range(m):
        bit = _access(words[l], i)
        ones = _rank1(words[l], supers[l], rel[l], nbits, i)
        if bit:
            i = zeros[l] + ones
        else:
            i = i - ones
        value = (value << 1) | bit
    return value


@numba.njit(cache=True, nogil=True)
def _wm_descend(words, supers, rel, zeros, nbits, c, i):
    """Start of c's final interval and the mapped prefix end ``i``."""
    m = words.shape[0]
    p = 0
    for l in range(m):
        bit = (c >> (m - 1 - l)) & 1
        rp = _rank1(words[l], supers[l], rel[l], nbits, p)
        ri = _rank1(words[l], supers[l], rel[l], nbits, i)
        if bit:
            p = zeros[l] + rp
            i = zeros[l] + ri
        else:
            p = p - rp
            i = i - ri
    return p, i


@numba.njit(cache=True, nogil=True)
def _wm_rank(words, supers, rel, zeros, nbits, c, i):
    p, e = _wm_descend(words, supers, rel, zeros, nbits, c, i)
    return e - p


@numba.njit(cache=True, nogil=True)
def _wm_lift(words, supers, rel, s1, s1len, s0, s0len, zeros, c, pos):
    """Map a bottom-level offset of code c back to the original sequence."""
    m = words.shape[0]
    for l in range(m - 1, -1, -1):
        bit = (c >> (m - 1 - l)) & 1
        if bit:
            pos = _select1(words[l], supers[l], rel[l], s1[l, :s1len[l]], pos - zeros[l] + 1)
        else:
            pos = _select0(words[l], supers[l], rel[l], s0[l, :s0len[l]], pos + 1)
    return pos


@numba.njit(cache=True, nogil=True)
def _wm_count(words, supers, rel, zeros, nbits, x1, x2, y1, y2):
    """Codes in [y1, y2] among offsets [x1, x2)."""
    m = words.shape[0]
    # explicit stack of (level, code prefix, start, end)
    stack_l = np.empty(2 * m + 2, dtype=np.int64)
    stack_c = np.empty(2 * m + 2, dtype=np.int64)
    stack_s = np.empty(2 * m + 2, dtype=np.int64)
    stack_e = np.empty(2 * m + 2, dtype=np.int64)
    top = 0
    stack_l[0], stack_c[0], stack_s[0], stack_e[0] = 0, 0, x1, x2
    top = 1
    total = 0
    while top > 0:
        top -= 1
        l, c, s, e = stack_l[top], stack_c[top], stack_s[top], stack_e[top]
        if s >= e:
            continue
        width = m - l
        lo = c << width
        hi = lo + (1 << width) - 1
        if hi < y1 or lo > y2:
            continue
        if y1 <= lo and hi <= y2:
            total += e - s
            continue
        rs = _rank1(words[l], supers[l], rel[l], nbits, s)
        re = _rank1(words[l], supers[l], rel[l], nbits, e)
        stack_l[top], stack_c[top] = l + 1, c << 1
        stack_s[top], stack_e[top] = s - rs, e - re
        top += 1
        stack_l[top], stack_c[top] = l + 1, (c << 1) | 1
        stack_s[top], stack_e[top] = zeros[l] + rs, zeros[l] + re
        top += 1
    return total


@numba.njit(cache=True, nogil=True)
def _wm_report(words, supers, rel, s1, s1len, s0, s0len, zeros, nbits, x1, x2, y1, y2):
    m = words.shape[0]
    positions = []
    codes = []
    stack_l = np.empty(2 * m + 2, dtype=np.int64)
    stack_c = np.empty(2 * m + 2, dtype=np.int64)
    stack_s = np.empty(2 * m + 2, dtype=np.int64)
    stack_e = np.empty(2 * m + 2, dtype=np.int64)
    stack_l[0], stack_c[0], stack_s[0], stack_e[0] = 0, 0, x1, x2
    top = 1
    while top > 0:
        top -= 1
        l, c, s, e = stack_l[top], stack_c[top], stack_s[top], stack_e[top]
        if s >= e:
            continue
        width = m - l
        lo = c << width
        hi = lo + (1 << width) - 1
        if hi < y1 or lo > y2:
            continue
        if l == m:
            for q in range(s, e):
                positions.append(_wm_lift(words, supers, rel, s1, s1len, s0, s0len, zeros, c, q))
                codes.append(c)
            continue
        rs = _rank1(words[l], supers[l], rel[l], nbits, s)
        re = _rank1(words[l], supers[l], rel[l], nbits, e)
        # push the one-branch first so zeros are reported first
        stack_l[top], stack_c[top] = l + 1, (c << 1) | 1
        stack_s[top], stack_e[top] = zeros[l] + rs, zeros[l] + re
        top += 1
        stack_l[top], stack_c[top] = l + 1, c << 1
        stack_s[top], stack_e[top] = s - rs, e - re
        top += 1
    out_p = np.empty(len(positions), dtype=np.int64)
    out_c = np.empty(len(codes), dtype=np.int64)
    for k in range(len(positions)):
        out_p[k] = positions[k]
        out_c[k] = codes[k]
    return out_p, out_c


def levels_for(sigma: int) -> int:
    return max(1, (sigma - 1).bit_length())


class WaveletMatrix:
    def __init__(self, seq=(), sigma: int = 1):
        seq = np.asarray(seq, dtype=np.int64).ravel()
        if sigma < 1:
            raise BuildError("alphabet size must be at least 1")
        if seq.size and (seq.min() < 0 or seq.max() >= sigma):
            bad = seq[(seq < 0) | (seq >= sigma)][0]
            raise BuildError(f"code {bad} outside [0, {sigma})")
        self.n = int(seq.shape[0])
        self.sigma = int(sigma)
        self.m = levels_for(sigma)
        levels = []
        current = seq
        for l in range(self.m):
            bits = ((current >> (self.m - 1 - l)) & 1).astype(bool)
            levels.append(BitVector(bits))
            current = np.concatenate((current[~bits], current[bits]))
        self._set_levels(levels)

    def _set_levels(self, levels):
        self.levels = levels
        self.zeros = np.array([lv.zeros for lv in levels], dtype=np.int64)

        def stack(name):
            rows = [getattr(lv, name) for lv in levels]
            width = max(r.shape[0] for r in rows)
            out = np.zeros((len(rows), max(width, 1)), dtype=rows[0].dtype)
            for k, r in enumerate(rows):
                out[k, : r.shape[0]] = r
            return out, np.array([r.shape[0] for r in rows], dtype=np.int64)

        self._words = stack("words")[0]
        self._supers = stack("supers")[0]
        self._rel = stack("rel")[0]
        self._s1, self._s1len = stack("samples1")
        self._s0, self._s0len = stack("samples0")
        self._base = (self._words, self._supers, self._rel, self.zeros, self.n)
        self._lift = (self._words, self._supers, self._rel, self._s1, self._s1len,
                      self._s0, self._s0len, self.zeros)

    def __len__(self):
        return self.n

    def _check_code(self, c):
        if not 0 <= c < self.sigma:
            raise UsageError(f"code {c} outside [0, {self.sigma})")

    def _check_window(self, x1, x2, y1, y2):
        if not 1 <= x1 <= x2 <= self.n:
            raise UsageError(f"position range [{x1}, {x2}] invalid for n={self.n}")
        if not 0 <= y1 <= y2 < self.sigma:
            raise UsageError(f"code range [{y1}, {y2}] invalid for sigma={self.sigma}")

    def access(self, i: int) -> int:
        if not 1 <= i <= self.n:
            raise RangeError(f"position {i} outside [1, {self.n}]")
        return int(_wm_access(*self._base, i - 1))

    def __getitem__(self, i):
        return self.access(i)

    def rank(self, c: int, i: int) -> int:
        self._check_code(c)
        if not 0 <= i <= self.n:
            raise RangeError(f"rank position {i} outside [0, {self.n}]")
        return int(_wm_rank(*self._base, c, i))

    def select(self, c: int, j: int) -> int:
        self._check_code(c)
        p, e = _wm_descend(*self._base, c, self.n)
        if not 1 <= j <= e - p:
            raise NotFoundError(f"code {c} occurs {e - p} times, no occurrence {j}")
        return int(_wm_lift(*self._lift, c, p + j - 1)) + 1

    def count(self, x1: int, x2: int, y1: int, y2: int) -> int:
        self._check_window(x1, x2, y1, y2)
        return int(_wm_count(*self._base, x1 - 1, x2, y1, y2))

    def report(self, x1: int, x2: int, y1: int, y2: int) -> list[tuple[int, int]]:
        """(position, code) pairs, ordered by code then position."""
        self._check_window(x1, x2, y1, y2)
        pos, codes = _wm_report(*self._lift, self.n, x1 - 1, x2, y1, y2)
        return list(zip((pos + 1).tolist(), codes.tolist()))

    def to_list(self) -> list[int]:
        return [self.access(i) for i in range(1, self.n + 1)]

    def to_bytes(self) -> bytes:
        return b"".join(
            [struct.pack("<QQQ", self.n, self.sigma, self.m)]
            + [lv.to_bytes() for lv in self.levels]
            + [self.zeros.astype("<i8").tobytes()]
        )

    @property
    def nbytes(self) -> int:
        return len(self.to_bytes())

    @classmethod
    def from_bytes(cls, buf, offset: int = 0) -> tuple["WaveletMatrix", int]:
        n, sigma, m = struct.unpack_from("<QQQ", buf, offset)
        offset += 24
        levels = []
        for _ in range(m):
            lv, offset = BitVector.from_bytes(buf, offset)
            levels.append(lv)
        zeros = np.frombuffer(buf, dtype="<i8", count=m, offset=offset).astype(np.int64)
        offset += 8 * m
        self = cls.__new__(cls)
        self.n, self.sigma, self.m = n, sigma, m
        self._set_levels(levels)
        if not np.array_equal(zeros, self.zeros):
            raise ValueError("wavelet matrix zero counts disagree with level bitmaps")
        return self, offset


def build_wm(seq, sigma: int) -> WaveletMatrix:
    return WaveletMatrix(seq, sigma)
