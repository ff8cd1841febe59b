import datetime as dt
import io
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tripindex.corpus import (
    DayCalendar, LengthParams, NetworkDescription, Line, TimeGrid, Trip, TripCorpus, discretize,
    generate_synthetic, parse_corpus, parse_network, sort_trips, synthetic_network,
    write_corpus, write_network,
)
from tripindex.errors import ConfigurationError, ParseError

GRID = TimeGrid()
WORKING = {dt.date(2024, 3, 4): 0}


class TestDiscretize:
    def test_origin(self):
        assert discretize(dt.datetime(2024, 3, 4, 0, 0), GRID, WORKING) == 0

    def test_seven_minutes_is_second_slot(self):
        assert discretize(dt.datetime(2024, 3, 4, 0, 7), GRID, WORKING) == 1

    def test_sunday_morning(self):
        sunday = dt.datetime(2024, 3, 10, 9, 15)
        assert GRID.slots_per_day == 288
        assert discretize(sunday, GRID, DayCalendar()) == 3 * 288 + 111 == 975

    def test_unmapped_day(self):
        with pytest.raises(ConfigurationError):
            discretize(dt.datetime(2024, 3, 5, 8, 0), GRID, WORKING)

    def test_day_type_beyond_grid(self):
        with pytest.raises(ConfigurationError):
            discretize(dt.datetime(2024, 3, 4, 8, 0), TimeGrid(day_type_count=2), {dt.date(2024, 3, 4): 5})

    def test_calendar_kinds_and_seasons(self):
        cal = DayCalendar(holidays=frozenset({dt.date(2024, 8, 15)}))
        assert cal(dt.date(2024, 3, 4)) == 0      # Monday, low season
        assert cal(dt.date(2024, 3, 8)) == 1      # Friday
        assert cal(dt.date(2024, 3, 9)) == 2      # Saturday
        assert cal(dt.date(2024, 8, 14)) == 1 + 4  # eve of a holiday, high season
        assert cal(dt.date(2024, 8, 15)) == 3 + 4

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 1439), st.integers(0, 1439))
    def test_monotone_within_a_day(self, a, b):
        a, b = sorted((a, b))
        day = dt.datetime(2024, 3, 4)
        ca = discretize(day + dt.timedelta(minutes=a), GRID, WORKING)
        cb = discretize(day + dt.timedelta(minutes=b), GRID, WORKING)
        assert ca <= cb

    def test_grid_sigma(self):
        assert TimeGrid(5, 8, 1440).sigma == 2304
        assert TimeGrid(7, 1, 100).slots_per_day == 15

    def test_clock_helper(self):
        assert GRID.parse_clock("3/09:15") == 975
        with pytest.raises(ConfigurationError):
            GRID.parse_clock("9:15")


class TestSortTrips:
    def test_running_example_order(self, corpus_e):
        ranked = sort_trips(corpus_e)
        assert [(t.stops, t.start) for t in ranked.trips] == [
            ((1, 2, 3), 0), ((1, 2, 3), 5), ((2, 3, 10, 6), 10),
            ((2, 3, 10, 4, 7), 2), ((3, 10, 5), 9), ((9, 8, 7), 12),
        ]
        assert ranked.is_sorted

    def test_singleton(self):
        c = TripCorpus([Trip((4, 5), (0, 1), 1)])
        assert sort_trips(c).trips == c.trips

    def test_identical_trips_keep_input_order(self):
        c = TripCorpus([Trip((1, 2), (3, 4), 1), Trip((1, 2), (3, 4), 2)])
        assert [t.input_ordinal for t in sort_trips(c).trips] == [1, 2]

    trips = st.lists(
        st.tuples(st.lists(st.integers(1, 6), min_size=2, max_size=6), st.integers(0, 20)),
        min_size=1, max_size=40)

    @settings(max_examples=150, deadline=None)
    @given(trips)
    def test_permutation_and_total_order(self, raw):
        c = TripCorpus([Trip(s, [t0] * len(s), k + 1) for k, (s, t0) in enumerate(raw)])
        out = sort_trips(c).trips
        assert Counter(out) == Counter(c.trips)
        for a, b in zip(out, out[1:]):
            ka = (a.stops[0], a.stops[-1], a.times[0], a.stops[1:], a.input_ordinal)
            kb = (b.stops[0], b.stops[-1], b.times[0], b.stops[1:], b.input_ordinal)
            assert ka <= kb


class TestParseCorpus:
    def test_single_trip(self):
        c = parse_corpus("1:0 2:1 3:2\n")
        assert len(c) == 1
        assert c.trips[0].stops == (1, 2, 3)
        assert c.trips[0].times == (0, 1, 2)
        assert c.n_stops == 3

    @pytest.mark.parametrize("text, line", [
        ("5:3\n", 1),
        ("1:4 2:3\n", 1),
        ("# header\n1:0 2:1\n1:0 x:1\n", 3),
        ("1:0 0:1\n", 1),
        ("1:0 2\n", 1),
    ])
    def test_errors_name_the_line(self, text, line):
        with pytest.raises(ParseError) as err:
            parse_corpus(text)
        assert err.value.line == line
        assert f"line {line}" in str(err.value)

    def test_code_outside_grid(self):
        with pytest.raises(ParseError):
            parse_corpus("1:0 2:3000\n")

    def test_round_trip_with_grid_directive(self, corpus_e):
        grid = TimeGrid(15, 2, 1440)
        c = TripCorpus(corpus_e.trips, grid=grid)
        buf = io.StringIO()
        write_corpus(c, buf)
        back = parse_corpus(buf.getvalue())
        assert back.grid == grid
        assert [t.stops for t in back.trips] == [t.stops for t in c.trips]
        assert [t.times for t in back.trips] == [t.times for t in c.trips]


class TestNetwork:
    TEXT = "stop 1 A\nstop 2 B\nstop 3 C\nline L1 1 2 3\n"

    def test_simple(self):
        net = parse_network(self.TEXT)
        assert len(net.lines) == 1
        assert net.lines[0].stops == (1, 2, 3)

    def test_unknown_stop(self):
        with pytest.raises(ParseError):
            parse_network(self.TEXT + "line L2 1 9\n")

    def test_empty(self):
        with pytest.raises(ParseError):
            parse_network("")

    def test_short_line(self):
        with pytest.raises(ParseError):
            parse_network("stop 1 A\nline L1 1\n")

    def test_windows(self):
        net = parse_network(self.TEXT + "window L1 360 1320\n")
        assert net.window("L1", GRID) == (360, 1320)
        with pytest.raises(ParseError):
            parse_network(self.TEXT + "window L9 1 2\n")

    def test_write_parse_round_trip(self):
        net = synthetic_network(4, 10, seed=3)
        buf = io.StringIO()
        write_network(net, buf)
        back = parse_network(buf.getvalue())
        assert back.lines == net.lines
        assert back.stops == net.stops
        assert back.service_windows == net.service_windows


@pytest.fixture(scope="module")
def network():
    return synthetic_network(8, 35, seed=5)


class TestGenerator:
    def test_mean_length(self, network):
        c = generate_synthetic(network, 1000, 7)
        assert len(c) == 1000
        assert abs(c.mean_length() - 11.81) <= 0.5
        lengths = [len(t) for t in c.trips]
        assert min(lengths) >= 2 and max(lengths) <= 31

    def test_trips_are_line_segments(self, network):
        c = generate_synthetic(network, 300, 11)
        lines = [l.stops for l in network.lines]
        for trip in c.trips:
            size = len(trip.stops)
            assert any(trip.stops == line[i:i + size]
                       for line in lines for i in range(len(line) - size + 1))

    def test_deterministic(self, network):
        a = generate_synthetic(network, 200, 7)
        b = generate_synthetic(network, 200, 7)
        assert a.trips == b.trips
        assert generate_synthetic(network, 200, 8).trips != a.trips

    def test_times_inside_service_window(self, network):
        c = generate_synthetic(network, 200, 2)
        for trip in c.trips:
            assert list(trip.times) == sorted(trip.times)
            day = trip.start // GRID.slots_per_day
            assert trip.end < (day + 1) * GRID.slots_per_day

    def test_short_lines_force_redraws(self):
        net = NetworkDescription({i: str(i) for i in range(1, 6)}, [Line("a", (1, 2, 3, 4, 5))])
        c = generate_synthetic(net, 50, 1)
        assert all(2 <= len(t) <= 5 for t in c.trips)

    @pytest.mark.parametrize("params", [LengthParams(5, 3, 4), LengthParams(2, 31, 40)])
    def test_bad_parameters(self, network, params):
        with pytest.raises(ConfigurationError):
            generate_synthetic(network, 10, 1, params)

    def test_no_line_long_enough(self):
        net = NetworkDescription({1: "a", 2: "b"}, [Line("a", (1, 2))])
        with pytest.raises(ConfigurationError):
            generate_synthetic(net, 10, 1, LengthParams(3, 10, 5))

    def test_binomial_shape(self):
        net = synthetic_network(6, 40, seed=1)
        c = generate_synthetic(net, 4000, 3)
        lengths = np.array([len(t) for t in c.trips])
        # Binomial(29, 9.81/29) + 2: variance 29 p (1 - p)
        p = 9.81 / 29
        assert abs(lengths.var() - 29 * p * (1 - p)) < 1.0
