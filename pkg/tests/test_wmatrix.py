import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tripindex.errors import BuildError, NotFoundError, RangeError, UsageError
from tripindex.wmatrix import WaveletMatrix, build_wm, levels_for

SEQ = [1, 0, 3, 1, 2]


@pytest.fixture(scope="module")
def wm():
    return build_wm(SEQ, 4)


class TestExamples:
    def test_levels(self, wm):
        assert wm.m == 2
        assert wm.levels[0].to_list() == [0, 0, 1, 0, 1]
        assert wm.zeros.tolist() == [lv.rank0(wm.n) for lv in wm.levels]

    def test_singleton(self):
        one = build_wm([0], 2)
        assert one.m == 1 and one.levels[0].to_list() == [0]

    def test_sigma_one(self):
        flat = build_wm([0, 0, 0], 1)
        assert flat.m == 1 and flat.count(1, 3, 0, 0) == 3

    def test_empty(self):
        empty = build_wm([], 8)
        assert empty.n == 0
        with pytest.raises(RangeError):
            empty.access(1)
        with pytest.raises(UsageError):
            empty.count(1, 1, 0, 7)

    def test_code_outside_alphabet(self):
        with pytest.raises(BuildError):
            build_wm([0, 4], 4)

    def test_access(self, wm):
        assert wm.access(3) == 3 and wm.access(1) == 1
        assert wm.to_list() == SEQ
        with pytest.raises(RangeError):
            wm.access(6)

    def test_rank(self, wm):
        assert wm.rank(1, 4) == 2
        assert all(wm.rank(c, 0) == 0 for c in range(4))
        assert wm.rank(2, 5) == 1
        with pytest.raises(UsageError):
            wm.rank(4, 1)
        with pytest.raises(RangeError):
            wm.rank(1, 6)

    def test_select(self, wm):
        assert wm.select(1, 2) == 4
        assert wm.select(3, 1) == 3
        with pytest.raises(NotFoundError):
            wm.select(0, 2)

    def test_count(self, wm):
        assert wm.count(1, 5, 0, 3) == 5
        assert wm.count(2, 4, 1, 2) == 1
        assert wm.count(2, 2, 3, 3) == 0
        for bad in [(0, 2, 0, 1), (3, 2, 0, 1), (1, 6, 0, 1), (1, 2, 2, 1), (1, 2, 0, 4)]:
            with pytest.raises(UsageError):
                wm.count(*bad)

    def test_report(self, wm):
        assert wm.report(1, 5, 3, 3) == [(3, 3)]
        assert wm.report(2, 2, 3, 3) == []
        full = wm.report(1, 5, 0, 3)
        assert sorted(full) == sorted(enumerate(SEQ, 1))

    def test_levels_for(self):
        assert [levels_for(s) for s in (1, 2, 3, 4, 5, 2304)] == [1, 1, 2, 2, 3, 12]

    def test_round_trip(self, wm):
        back, end = WaveletMatrix.from_bytes(wm.to_bytes())
        assert end == wm.nbytes
        assert back.to_list() == SEQ


def _compare(seq, sigma, rng, queries):
    wm = build_wm(seq, sigma)
    n = len(seq)
    arr = np.asarray(seq)
    for i in rng.integers(1, n + 1, queries).tolist():
        assert wm.access(i) == arr[i - 1]
    for c, i in zip(rng.integers(0, sigma, queries).tolist(), rng.integers(0, n + 1, queries).tolist()):
        assert wm.rank(c, i) == int(np.count_nonzero(arr[:i] == c))
    for i in rng.integers(1, n + 1, queries).tolist():
        c = int(arr[i - 1])
        j = int(np.count_nonzero(arr[:i] == c))
        assert wm.select(c, j) == i
    for _ in range(queries):
        x1, x2 = sorted(rng.integers(1, n + 1, 2).tolist())
        y1, y2 = sorted(rng.integers(0, sigma, 2).tolist())
        window = arr[x1 - 1:x2]
        mask = (window >= y1) & (window <= y2)
        assert wm.count(x1, x2, y1, y2) == int(mask.sum())
        got = wm.report(x1, x2, y1, y2)
        expected = sorted(zip(np.flatnonzero(mask) + x1, window[mask]), key=lambda p: (p[1], p[0]))
        assert got == [(int(p), int(c)) for p, c in expected]


@pytest.mark.parametrize("n, sigma", [(1, 1), (7, 3), (300, 2), (1000, 17), (5000, 4096)])
def test_against_linear_scan(n, sigma):
    rng = np.random.default_rng(n * 31 + sigma)
    _compare(rng.integers(0, sigma, n).tolist(), sigma, rng, 300)


seqs = st.integers(1, 300).flatmap(
    lambda sigma: st.tuples(st.lists(st.integers(0, sigma - 1), min_size=1, max_size=200),
                            st.just(sigma)))


@settings(max_examples=150, deadline=None)
@given(seqs, st.data())
def test_properties(case, data):
    seq, sigma = case
    wm = build_wm(seq, sigma)
    n = len(seq)
    x1 = data.draw(st.integers(1, n))
    x2 = data.draw(st.integers(x1, n))
    assert wm.count(x1, x2, 0, sigma - 1) == x2 - x1 + 1
    k = data.draw(st.integers(x1, x2))
    y1 = data.draw(st.integers(0, sigma - 1))
    y2 = data.draw(st.integers(y1, sigma - 1))
    right = wm.count(k + 1, x2, y1, y2) if k < x2 else 0
    assert wm.count(x1, x2, y1, y2) == wm.count(x1, k, y1, y2) + right
    assert sum(wm.rank(c, n) for c in range(sigma)) == n
    assert wm.to_list() == seq
