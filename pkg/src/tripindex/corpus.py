"""Trips, time discretization, network/corpus text formats and the trip generator."""
from __future__ import annotations

import datetime as dt
import io
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ParseError

SEPARATOR = 0


@dataclass(frozen=True)
class TimeGrid:
    slot_minutes: int = 5
    day_type_count: int = 8
    day_minutes: int = 1440

    def __post_init__(self):
        if min(self.slot_minutes, self.day_type_count, self.day_minutes) < 1:
            raise ConfigurationError(f"time grid parameters must be positive: {self}")

    @property
    def slots_per_day(self) -> int:
        return -(-self.day_minutes // self.slot_minutes)

    @property
    def sigma(self) -> int:
        return self.day_type_count * self.slots_per_day

    def code(self, day_type: int, minute: int) -> int:
        if not 0 <= day_type < self.day_type_count:
            raise ConfigurationError(
                f"day type {day_type} outside [0, {self.day_type_count})")
        if not 0 <= minute < self.day_minutes:
            raise ConfigurationError(f"minute {minute} outside [0, {self.day_minutes})")
        return day_type * self.slots_per_day + minute // self.slot_minutes

    def parse_clock(self, text: str) -> int:
        """``"3/09:15"`` (day type / HH:MM) -> time code."""
        try:
            day, hhmm = text.split("/")
            hh, mm = hhmm.split(":")
            return self.code(int(day), int(hh) * 60 + int(mm))
        except ValueError as exc:
            raise ConfigurationError(f"bad clock value {text!r}: {exc}") from None


WORKING_DAY, FRIDAY_OR_EVE, SATURDAY, SUNDAY_OR_HOLIDAY = range(4)


@dataclass(frozen=True)
class DayCalendar:
    """Default day classifier: four kinds of day, each in a low or high season.

    Type = kind + 4 * season, so low-season Sunday is 3 and high-season
    Sunday is 7.
    """

    holidays: frozenset = frozenset()
    high_season_months: frozenset = frozenset({7, 8})

    def __call__(self, day: dt.date) -> int:
        if day in self.holidays or day.weekday() == 6:
            kind = SUNDAY_OR_HOLIDAY
        elif day.weekday() == 5:
            kind = SATURDAY
        elif day.weekday() == 4 or (day + dt.timedelta(days=1)) in self.holidays:
            kind = FRIDAY_OR_EVE
        else:
            kind = WORKING_DAY
        return kind + 4 * (day.month in self.high_season_months)


def discretize(timestamp: dt.datetime, grid: TimeGrid = TimeGrid(),
               day_classifier: Mapping | Callable = DayCalendar()) -> int:
    day = timestamp.date()
    if isinstance(day_classifier, Mapping):
        if day not in day_classifier:
            raise ConfigurationError(f"no day type mapped for {day}")
        day_type = day_classifier[day]
    else:
        day_type = day_classifier(day)
    minute = timestamp.hour * 60 + timestamp.minute
    return grid.code(day_type, minute)


@dataclass(frozen=True)
class Trip:
    stops: tuple[int, ...]
    times: tuple[int, ...]
    input_ordinal: int = 0

    def __post_init__(self):
        object.__setattr__(self, "stops", tuple(int(s) for s in self.stops))
        object.__setattr__(self, "times", tuple(int(t) for t in self.times))
        if len(self.stops) < 2:
            raise ValueError("a trip needs at least two stops")
        if len(self.times) != len(self.stops):
            raise ValueError("stops and times differ in length")
        if min(self.stops) < 1:
            raise ValueError("stop ids must be positive (0 is the separator)")
        if any(b < a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("time codes decrease along the trip")
        if self.times[0] < 0:
            raise ValueError("negative time code")

    def __len__(self):
        return len(self.stops)

    @property
    def first(self) -> int:
        return self.stops[0]

    @property
    def last(self) -> int:
        return self.stops[-1]

    @property
    def start(self) -> int:
        return self.times[0]

    @property
    def end(self) -> int:
        return self.times[-1]

    def sort_key(self):
        return (self.stops[0], self.stops[-1], self.times[0], self.stops[1:], self.input_ordinal)


@dataclass
class TripCorpus:
    trips: list[Trip]
    n_stops: int = 0
    grid: TimeGrid = field(default_factory=TimeGrid)
    is_sorted: bool = False

    def __post_init__(self):
        self.trips = list(self.trips)
        top = max((max(t.stops) for t in self.trips), default=0)
        if self.n_stops == 0:
            self.n_stops = top
        elif top > self.n_stops:
            raise ValueError(f"stop id {top} exceeds the stop count {self.n_stops}")
        late = max((t.end for t in self.trips), default=0)
        if late >= self.grid.sigma:
            raise ValueError(f"time code {late} outside the grid (sigma={self.grid.sigma})")

    def __len__(self):
        return len(self.trips)

    def __iter__(self):
        return iter(self.trips)

    @property
    def occurrences(self) -> int:
        return sum(len(t) for t in self.trips)

    def mean_length(self) -> float:
        return self.occurrences / len(self.trips) if self.trips else 0.0


def sort_trips(corpus: TripCorpus) -> TripCorpus:
    """Order trips by (first stop, last stop, start time, remaining stops, input order).

    A trip's rank is its 1-based position in the returned corpus.
    """
    ordered = sorted(corpus.trips, key=Trip.sort_key)
    return TripCorpus(ordered, corpus.n_stops, corpus.grid, is_sorted=True)


# -- text formats ------------------------------------------------------------

def _lines(source):
    if isinstance(source, str):
        source = io.StringIO(source)
    for number, line in enumerate(source, 1):
        yield number, line.strip()


def parse_corpus(source, grid: TimeGrid | None = None) -> TripCorpus:
    """Read trips written as ``stop:timecode`` tokens, one trip per line.

    A ``#! grid SLOT DAYTYPES DAYMINUTES`` comment declares the time grid;
    an explicit ``grid`` argument wins over it.
    """
    trips = []
    numbers = []
    declared = None
    for number, line in _lines(source):
        if not line:
            continue
        if line.startswith("#"):
            fields = line[1:].split()
            if fields[:2] == ["!", "grid"]:
                try:
                    declared = TimeGrid(*map(int, fields[2:5]))
                except (TypeError, ValueError) as exc:
                    raise ParseError(f"bad grid directive: {exc}", number) from None
            continue
        stops, times = [], []
        for token in line.split():
            stop, sep, code = token.partition(":")
            try:
                if not sep:
                    raise ValueError
                stops.append(int(stop))
                times.append(int(code))
            except ValueError:
                raise ParseError(f"malformed token {token!r} (expected stop:timecode)",
                                 number) from None
        try:
            trips.append(Trip(stops, times, len(trips) + 1))
        except ValueError as exc:
            raise ParseError(str(exc), number) from None
        numbers.append(number)
    grid = grid or declared or TimeGrid()
    for number, trip in zip(numbers, trips):
        if trip.end >= grid.sigma:
            raise ParseError(f"time code {trip.end} outside grid (sigma={grid.sigma})",
                             number)
    return TripCorpus(trips, grid=grid)


def write_corpus(corpus: TripCorpus, out) -> None:
    g = corpus.grid
    out.write(f"#! grid {g.slot_minutes} {g.day_type_count} {g.day_minutes}\n")
    for trip in corpus.trips:
        out.write(" ".join(f"{s}:{t}" for s, t in zip(trip.stops, trip.times)))
        out.write("\n")


@dataclass(frozen=True)
class Line:
    id: str
    stops: tuple[int, ...]


@dataclass
class NetworkDescription:
    stops: dict[int, str]
    lines: list[Line]
    service_windows: dict[str, tuple[int, int]] = field(default_factory=dict)

    def validate(self):
        if not self.stops:
            raise ValueError("network declares no stops")
        for line in self.lines:
            if len(line.stops) < 2:
                raise ValueError(f"line {line.id} has fewer than two stops")
            missing = [s for s in line.stops if s not in self.stops]
            if missing:
                raise ValueError(f"line {line.id} references unknown stop {missing[0]}")
        for line_id, (start, end) in self.service_windows.items():
            if start >= end:
                raise ValueError(f"empty service window for line {line_id}")

    def window(self, line_id: str, grid: TimeGrid) -> tuple[int, int]:
        return self.service_windows.get(line_id, (0, grid.day_minutes))


def parse_network(source) -> NetworkDescription:
    stops: dict[int, str] = {}
    lines: list[Line] = []
    windows: dict[str, tuple[int, int]] = {}
    for number, line in _lines(source):
        if not line or line.startswith("#"):
            continue
        kind, *rest = line.split()
        try:
            if kind == "stop":
                stop_id = int(rest[0])
                if stop_id < 1:
                    raise ValueError("stop ids must be positive")
                stops[stop_id] = " ".join(rest[1:])
            elif kind == "line":
                if len(rest) < 3:
                    raise ValueError("a line needs an id and at least two stops")
                ids = tuple(int(s) for s in rest[1:])
                unknown = [s for s in ids if s not in stops]
                if unknown:
                    raise ValueError(f"line {rest[0]} references unknown stop {unknown[0]}")
                lines.append(Line(rest[0], ids))
            elif kind == "window":
                line_id, start, end = rest
                windows[line_id] = (int(start), int(end))
            else:
                raise ValueError(f"unknown record {kind!r}")
        except (IndexError, ValueError) as exc:
            raise ParseError(str(exc) or "malformed record", number) from None
    network = NetworkDescription(stops, lines, windows)
    try:
        network.validate()
        if not lines:
            raise ValueError("network declares no lines")
        known = {l.id for l in lines}
        for line_id in windows:
            if line_id not in known:
                raise ValueError(f"window for unknown line {line_id}")
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return network


def write_network(network: NetworkDescription, out) -> None:
    for stop_id, label in sorted(network.stops.items()):
        out.write(f"stop {stop_id} {label}\n")
    for line in network.lines:
        out.write(f"line {line.id} {' '.join(map(str, line.stops))}\n")
    for line_id, (start, end) in network.service_windows.items():
        out.write(f"window {line_id} {start} {end}\n")


# -- synthetic data ------------------------------------------------------------

@dataclass(frozen=True)
class LengthParams:
    min: int = 2
    max: int = 31
    mean: float = 11.81


def synthetic_network(n_lines: int = 12, stops_per_line: int = 25, seed: int = 0,
                      transfer_share: float = 0.15) -> NetworkDescription:
    """A toy city: bidirectional lines, a share of stops shared with other lines."""
    rng = np.random.default_rng(seed)
    stops: dict[int, str] = {}
    lines: list[Line] = []
    windows: dict[str, tuple[int, int]] = {}
    next_id = 1
    for k in range(n_lines):
        route = []
        for _ in range(stops_per_line):
            if stops and rng.random() < transfer_share:
                candidate = int(rng.integers(1, next_id))
                if candidate not in route:
                    route.append(candidate)
                    continue
            stops[next_id] = f"S{next_id}"
            route.append(next_id)
            next_id += 1
        start = int(rng.choice([300, 330, 360]))
        end = int(rng.choice([1380, 1410, 1439]))
        for suffix, seq in (("a", route), ("b", route[::-1])):
            line_id = f"L{k + 1}{suffix}"
            lines.append(Line(line_id, tuple(seq)))
            windows[line_id] = (start, end)
    return NetworkDescription(stops, lines, windows)


def generate_synthetic(network: NetworkDescription, trip_count: int, seed: int,
                       length_params: LengthParams = LengthParams(),
                       grid: TimeGrid = TimeGrid()) -> TripCorpus:
    """Draw trips as contiguous segments of network lines.

    Lengths follow ``min + Binomial(max - min, p)`` with ``p`` matching the
    requested mean. Each trip gets a uniform day type and a start minute in
    its line's service window; every hop takes 1-5 minutes. Minutes past the
    end of the day are clamped to the day's last slot.
    """
    lo, hi, mean = length_params.min, length_params.max, length_params.mean
    if lo < 2 or lo > hi:
        raise ConfigurationError(f"invalid length range [{lo}, {hi}]")
    if not lo <= mean <= hi:
        raise ConfigurationError(f"mean length {mean} outside [{lo}, {hi}]")
    if trip_count < 1:
        raise ConfigurationError("trip_count must be at least 1")
    network.validate()
    longest = max((len(l.stops) for l in network.lines), default=0)
    if longest < lo:
        raise ConfigurationError(f"no line has the minimum trip length {lo}")
    trials = hi - lo
    p = (mean - lo) / trials if trials else 0.0
    by_length = sorted(network.lines, key=lambda l: len(l.stops))
    lengths = np.array([len(l.stops) for l in by_length])

    rng = np.random.default_rng(seed)
    trips = []
    while len(trips) < trip_count:
        size = lo + int(rng.binomial(trials, p)) if trials else lo
        first_fit = int(np.searchsorted(lengths, size))
        if first_fit == len(by_length):
            continue  # no line long enough: redraw
        line = by_length[int(rng.integers(first_fit, len(by_length)))]
        offset = int(rng.integers(0, len(line.stops) - size + 1))
        stops = line.stops[offset: offset + size]
        day_type = int(rng.integers(0, grid.day_type_count))
        w_start, w_end = network.window(line.id, grid)
        minute = int(rng.integers(w_start, w_end))
        hops = rng.integers(1, 6, size - 1)
        minutes = np.minimum(np.concatenate(([minute], minute + np.cumsum(hops))),
                             grid.day_minutes - 1)
        base = day_type * grid.slots_per_day
        times = tuple(base + int(m) // grid.slot_minutes for m in minutes)
        trips.append(Trip(stops, times, len(trips) + 1))
    n_stops = max(network.stops)
    return TripCorpus(trips, n_stops, grid)


def example_corpus() -> TripCorpus:
    """The six-trip running example with +1 time code per hop."""
    rows = [
        ((2, 3, 10, 6), 10),
        ((2, 3, 10, 4, 7), 2),
        ((1, 2, 3), 0),
        ((3, 10, 5), 9),
        ((1, 2, 3), 5),
        ((9, 8, 7), 12),
    ]
    trips = [Trip(stops, tuple(range(t0, t0 + len(stops))), k + 1)
             for k, (stops, t0) in enumerate(rows)]
    return TripCorpus(trips)


def trips_from_arrays(stop_rows: Iterable, time_rows: Iterable) -> list[Trip]:
    return [Trip(s, t, k + 1) for k, (s, t) in enumerate(zip(stop_rows, time_rows))]
