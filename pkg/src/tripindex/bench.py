"""Latency benchmark over random query workloads."""
from __future__ import annotations

import csv
import statistics
import threading
import time
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .queryengine import Semantics, TripIndex


@dataclass
class BenchRow:
    query: str
    mean_us: float
    median_us: float
    count: int


def _intervals(index: TripIndex, rng, count, max_slots=36):
    grid = index.grid
    day = rng.integers(0, grid.day_type_count, count)
    start = rng.integers(0, grid.slots_per_day, count)
    width = rng.integers(0, max_slots, count)
    end = np.minimum(start + width, grid.slots_per_day - 1)
    base = day * grid.slots_per_day
    return list(zip((base + start).tolist(), (base + end).tolist()))


def _trip_endpoints(index: TripIndex, rng, count):
    """(first, last) stop pairs of randomly chosen indexed trips."""
    tcsa = index.tcsa
    pairs = []
    for rank in rng.integers(1, index.trip_count + 1, count).tolist():
        j = tcsa.psi(rank + 1)
        first = tcsa.symbol_at(j)
        while True:
            nxt = tcsa.psi(j)
            if tcsa.symbol_at(nxt) == 0:
                break
            j = nxt
        pairs.append((first, tcsa.symbol_at(j)))
    return pairs


def make_workload(index: TripIndex, count: int = 10_000, seed: int = 0,
                  topk_sizes=(10, 1000)):
    """Map of query name -> (callable, list of argument tuples)."""
    if count < 1:
        raise UsageError("the number of queries per type must be positive")
    rng = np.random.default_rng(seed)
    stops = index.tcsa.vocab[1:]
    xs = rng.choice(stops, count).tolist()
    pairs = _trip_endpoints(index, rng, count)
    ivs = _intervals(index, rng, count)
    strong, weak = Semantics.STRONG, Semantics.WEAK
    work = {
        "starts": (index.count_starts_at, [(x,) for x in xs]),
        "ends": (index.count_ends_at, [(x,) for x in xs]),
        "starts-ends": (index.count_starts_ends, pairs),
        "uses": (index.count_uses, [(x,) for x in xs]),
    }
    for k in topk_sizes:
        work[f"topk-seq-{k}"] = (index.tcsa.topk_sequential, [(k,)] * count)
        work[f"topk-bin-{k}"] = (index.tcsa.topk_binary, [(k,)] * count)
    work.update({
        "starts-between": (index.q_starts_between, list(zip(xs, ivs))),
        "ends-between": (index.q_ends_between, list(zip(xs, ivs))),
        "uses-between": (index.q_uses_between, list(zip(xs, ivs))),
        "starts-ends-between-strong": (
            index.q_start_end_between, [(x, y, iv, strong) for (x, y), iv in zip(pairs, ivs)]),
        "starts-ends-between-weak": (
            index.q_start_end_between, [(x, y, iv, weak) for (x, y), iv in zip(pairs, ivs)]),
    })
    return work


def _time_calls(fn, args_list):
    clock = time.perf_counter_ns
    out = []
    for args in args_list:
        t0 = clock()
        fn(*args)
        out.append(clock() - t0)
    return out


def run_bench(index: TripIndex, count: int = 10_000, seed: int = 0, threads: int = 1,
              topk_sizes=(10, 1000), only=None):
    """Returns (aggregate rows, per-thread rows).

    One untimed priming pass precedes the measured pass of every query type.
    """
    if threads < 1:
        raise UsageError("threads must be positive")
    work = make_workload(index, count, seed, topk_sizes)
    rows, per_thread = [], []
    for name, (fn, args_list) in work.items():
        if only and name not in only:
            continue
        for args in args_list[: min(len(args_list), 100)]:
            fn(*args)
        if threads == 1:
            samples = [_time_calls(fn, args_list)]
        else:
            chunks = [args_list[t::threads] for t in range(threads)]
            samples = [None] * threads

            def worker(t):
                samples[t] = _time_calls(fn, chunks[t])

            pool = [threading.Thread(target=worker, args=(t,)) for t in range(threads)]
            for th in pool:
                th.start()
            for th in pool:
                th.join()
            for t, s in enumerate(samples):
                per_thread.append((t, _row(name, s)))
        rows.append(_row(name, [x for s in samples for x in s]))
    return rows, per_thread


def _row(name, ns):
    us = [x / 1000.0 for x in ns]
    return BenchRow(name, statistics.fmean(us), statistics.median(us), len(us))


_SPATIAL_TWIN = {
    "starts-between": "starts",
    "ends-between": "ends",
    "uses-between": "uses",
    "starts-ends-between-strong": "starts-ends",
    "starts-ends-between-weak": "starts-ends",
}


def temporal_overhead(rows) -> list[tuple[str, float]]:
    """Mean-latency difference (us) of each time-restricted query over its spatial twin."""
    by = {r.query: r for r in rows}
    return [(q, by[q].mean_us - by[s].mean_us) for q, s in _SPATIAL_TWIN.items()
            if q in by and s in by]


def format_table(rows) -> str:
    width = max(len(r.query) for r in rows)
    lines = [f"{'query':<{width}}  {'mean_us':>10}  {'median_us':>10}  {'count':>7}"]
    for r in rows:
        lines.append(f"{r.query:<{width}}  {r.mean_us:10.2f}  {r.median_us:10.2f}  {r.count:7d}")
    return "\n".join(lines)


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["query", "mean_us", "median_us", "count"])
        for r in rows:
            writer.writerow([r.query, f"{r.mean_us:.3f}", f"{r.median_us:.3f}", r.count])
