"""Brute-force ground truth over a raw trip list.

Nothing here touches the succinct structures; any disagreement with the
index is a bug in the index.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

from .corpus import SEPARATOR, TripCorpus
from .errors import UsageError


@dataclass
class OracleAnswer:
    count: int
    trips: list[int] | None = field(default=None)

    def __post_init__(self):
        if self.trips is not None and len(self.trips) != self.count:
            raise ValueError("count disagrees with the trip list")


def _pick(corpus: TripCorpus, predicate) -> OracleAnswer:
    hits = [t.input_ordinal for t in corpus.trips if predicate(t)]
    return OracleAnswer(len(hits), hits)


def oracle_spatial(corpus: TripCorpus, kind: str, *args):
    """``kind`` is one of starts, ends, start-end, uses, topk."""
    if kind == "starts":
        (x,) = args
        return _pick(corpus, lambda t: t.stops[0] == x)
    if kind == "ends":
        (x,) = args
        return _pick(corpus, lambda t: t.stops[-1] == x)
    if kind == "start-end":
        x, y = args
        return _pick(corpus, lambda t: t.stops[0] == x and t.stops[-1] == y)
    if kind == "uses":
        (x,) = args
        return OracleAnswer(sum(t.stops.count(x) for t in corpus.trips))
    if kind == "topk":
        (k,) = args
        if k < 1:
            raise UsageError("k must be at least 1")
        freq: dict[int, int] = {}
        for t in corpus.trips:
            for s in t.stops:
                freq[s] = freq.get(s, 0) + 1
        ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
        return ranked[:k]
    raise UsageError(f"unknown spatial query {kind!r}")


def oracle_spatiotemporal(corpus: TripCorpus, kind: str, *args) -> OracleAnswer:
    """Same kinds as the spatial oracle, with ``(t1, t2)`` (and semantics) appended."""
    if kind == "starts":
        x, (t1, t2) = args
        return _pick(corpus, lambda t: t.stops[0] == x and t1 <= t.times[0] <= t2)
    if kind == "ends":
        x, (t1, t2) = args
        return _pick(corpus, lambda t: t.stops[-1] == x and t1 <= t.times[-1] <= t2)
    if kind == "uses":
        x, (t1, t2) = args
        return OracleAnswer(sum(
            1 for t in corpus.trips for s, c in zip(t.stops, t.times)
            if s == x and t1 <= c <= t2))
    if kind == "start-end":
        x, y, (t1, t2), sem = args
        sem = getattr(sem, "value", sem)
        if sem == "strong":
            def inside(t):
                return t1 <= t.times[0] <= t2 and t1 <= t.times[-1] <= t2
        elif sem == "weak":
            def inside(t):
                return t.times[0] <= t2 and t.times[-1] >= t1
        else:
            raise UsageError(f"unknown semantics {sem!r}")
        return _pick(corpus, lambda t: t.stops[0] == x and t.stops[-1] == y and inside(t))
    raise UsageError(f"unknown spatio-temporal query {kind!r}")


def oracle_suffix_order(corpus: TripCorpus):
    """Materialize S and sort every suffix with the cyclic comparator.

    ``corpus`` must already be in rank order. Returns 1-based ``(S, A, psi, D)``
    as plain lists (index 0 unused is avoided: element k is position k+1).
    """
    trips = [t.stops for t in corpus.trips]
    S, owner, offset = [], [], []
    starts = []
    for rank, stops in enumerate(trips, 1):
        starts.append(len(S))
        for o, s in enumerate(stops):
            S.append(s)
            owner.append(rank)
            offset.append(o)
        S.append(SEPARATOR)
        owner.append(rank)
        offset.append(len(stops))
    S.append(SEPARATOR)
    owner.append(0)
    offset.append(0)
    n = len(S)

    def cyclic(p, k):
        rank = owner[p]
        if rank == 0:
            return SEPARATOR
        stops = trips[rank - 1]
        o = (offset[p] + k) % (len(stops) + 1)
        return stops[o] if o < len(stops) else SEPARATOR

    def compare(p, q):
        k = 0
        while True:
            a, b = cyclic(p, k), cyclic(q, k)
            if a != b:
                return -1 if a < b else 1
            if a == SEPARATOR:
                return (owner[p] > owner[q]) - (owner[p] < owner[q])
            k += 1

    A = sorted(range(n), key=functools.cmp_to_key(compare))
    where = {p: i for i, p in enumerate(A)}

    def succ(p):
        rank = owner[p]
        if rank == 0:
            return p
        if S[p] == SEPARATOR:
            return starts[rank - 1]
        return p + 1

    psi = [where[succ(p)] + 1 for p in A]
    first = [S[p] for p in A]
    D = [1] + [int(first[i] != first[i - 1]) for i in range(1, n)]
    return S, [p + 1 for p in A], psi, D
