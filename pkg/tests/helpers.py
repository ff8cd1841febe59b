"""Random corpora for property and equivalence tests."""
import numpy as np

from tripindex.corpus import TimeGrid, Trip, TripCorpus

SMALL_GRID = TimeGrid(slot_minutes=60, day_type_count=2, day_minutes=1440)


def random_corpus(rng, max_trips=500, max_stops=60, grid=SMALL_GRID, mean=11.81,
                  min_len=2, max_len=31, repeats=True):
    """Trips with binomial lengths clamped to [min_len, max_len].

    With a small stop alphabet, duplicates, shared endpoints and repeated
    visits to the same stop are all common.
    """
    n_trips = int(rng.integers(1, max_trips + 1))
    n_stops = int(rng.integers(2, max_stops + 1))
    trials = max_len - min_len
    lengths = np.clip(min_len + rng.binomial(trials, (mean - min_len) / trials, n_trips),
                      min_len, max_len)
    # a few template routes make identical trips and shared Y$X patterns likely
    templates = [rng.integers(1, n_stops + 1, max_len) for _ in range(4)]
    trips = []
    for k, size in enumerate(lengths.tolist()):
        if rng.random() < 0.5:
            t = templates[int(rng.integers(0, len(templates)))]
            start = int(rng.integers(0, max_len - size + 1))
            stops = t[start:start + size]
        else:
            stops = rng.integers(1, n_stops + 1, size)
            if not repeats:
                stops = rng.permutation(np.arange(1, n_stops + 1))[:size]
        day = int(rng.integers(0, grid.day_type_count))
        lo = day * grid.slots_per_day
        t0 = int(rng.integers(0, grid.slots_per_day))
        steps = rng.integers(0, 2, size - 1)
        times = np.minimum(t0 + np.concatenate(([0], np.cumsum(steps))),
                           grid.slots_per_day - 1) + lo
        trips.append(Trip(stops.tolist(), times.tolist(), k + 1))
    return TripCorpus(trips, n_stops, grid)


def random_interval(rng, grid):
    a, b = sorted(rng.integers(0, grid.sigma, 2).tolist())
    return a, b
