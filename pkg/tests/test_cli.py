import csv

import pytest

from tripindex import storage
from tripindex.cli import main, parse_query
from tripindex.corpus import example_corpus, write_corpus
from tripindex.errors import UsageError


@pytest.fixture(scope="module")
def e_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("e")
    corpus = root / "e.trips"
    with open(corpus, "w") as fh:
        write_corpus(example_corpus(), fh)
    index = root / "e.tidx"
    assert main(["build", str(corpus), "-o", str(index)]) == 0
    return corpus, index


@pytest.fixture
def toy_network(tmp_path):
    path = tmp_path / "toy.net"
    path.write_text("stop 1 A\nstop 2 B\nstop 3 C\nline L1 1 2 3\n")
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestGenerate:
    def test_toy_network(self, capsys, tmp_path, toy_network):
        out = tmp_path / "t.trips"
        code, _, err = run(capsys, "generate", toy_network, "--count", 10, "--seed", 1, "-o", out)
        assert code == 0 and "trips 10" in err
        rows = [l.split() for l in out.read_text().splitlines() if not l.startswith("#")]
        assert len(rows) == 10
        for row in rows:
            stops = [int(tok.split(":")[0]) for tok in row]
            assert stops in ([1, 2], [2, 3], [1, 2, 3])

    def test_deterministic(self, capsys, tmp_path, toy_network):
        a, b = tmp_path / "a", tmp_path / "b"
        run(capsys, "generate", toy_network, "--count", 50, "--seed", 1, "-o", a)
        run(capsys, "generate", toy_network, "--count", 50, "--seed", 1, "-o", b)
        assert a.read_bytes() == b.read_bytes()

    def test_missing_network(self, capsys, tmp_path):
        code, _, err = run(capsys, "generate", tmp_path / "nope", "--count", 3)
        assert code == 2 and "error" in err

    def test_network_command(self, capsys, tmp_path):
        path = tmp_path / "n.net"
        code, _, err = run(capsys, "network", "--lines", 3, "--stops-per-line", 6, "-o", path)
        assert code == 0 and "6 lines" in err
        assert path.read_text().startswith("stop ")


class TestBuild:
    def test_report(self, capsys, e_files, tmp_path):
        corpus, _ = e_files
        code, out, _ = run(capsys, "build", corpus, "-o", tmp_path / "x.tidx")
        assert code == 0
        assert "(4 bits/stop)" in out and "stop occurrences      21" in out

    def test_bad_rate(self, capsys, e_files, tmp_path):
        corpus, _ = e_files
        code, _, err = run(capsys, "build", corpus, "-o", tmp_path / "x", "--sample-rate", 300)
        assert code == 2 and "16, 64, 256" in err
        code, _, _ = run(capsys, "build", corpus, "-o", tmp_path / "x", "--sample-rate", 300,
                         "--unsafe-rate")
        assert code == 0

    def test_empty_corpus(self, capsys, tmp_path):
        empty = tmp_path / "empty.trips"
        empty.write_text("# nothing\n")
        code, _, err = run(capsys, "build", empty, "-o", tmp_path / "x")
        assert code == 1 and "empty" in err

    def test_parse_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.trips"
        bad.write_text("1:4 2:3\n")
        code, _, err = run(capsys, "build", bad, "-o", tmp_path / "x")
        assert code == 2 and "line 1" in err

    def test_rate_sizes(self, capsys, tmp_path, toy_network):
        from tripindex.corpus import generate_synthetic, synthetic_network
        trips = tmp_path / "s.trips"
        with open(trips, "w") as fh:
            write_corpus(generate_synthetic(synthetic_network(4, 20, seed=2), 2000, 3), fh)
        sizes = {}
        for rate in (16, 256):
            run(capsys, "build", trips, "-o", tmp_path / f"{rate}.tidx", "--sample-rate", rate)
            sizes[rate] = storage.load(tmp_path / f"{rate}.tidx").stops_index_bytes()
        assert sizes[16] >= sizes[256]


class TestQuery:
    @pytest.mark.parametrize("expr, expected", [
        ("starts-ends 1 3", "2"),
        ("topk 1", "3 5"),
        ("topk 2 bin", "3 5\n2 4"),
        ("starts-ends-between 1 3 0 4 strong", "1"),
        ("uses 3", "5"),
        ("uses-between 3 2 9", "4"),
        ("ends-between 7 0 10", "1"),
        ("starts-between 2 0 12", "2"),
    ])
    def test_answers(self, capsys, e_files, expr, expected):
        _, index = e_files
        for engine in ("index", "oracle"):
            code, out, _ = run(capsys, "query", index, *expr.split(), "--engine", engine)
            assert code == 0
            assert out.strip() == expected

    def test_oracle_with_corpus(self, capsys, e_files):
        corpus, index = e_files
        code, out, _ = run(capsys, "query", index, "starts", 2, "--engine", "oracle",
                           "--corpus", corpus)
        assert (code, out.strip()) == (0, "2")

    def test_verbose_ranges(self, capsys, e_files):
        _, index = e_files
        code, out, _ = run(capsys, "query", index, "uses", 3, "-v")
        assert out.splitlines() == ["5", "section (14, 18)"]

    def test_clock(self, capsys, e_files):
        _, index = e_files
        code, out, _ = run(capsys, "query", index, "--clock", "starts-between", 1, "0/00:00",
                           "0/00:20")
        assert (code, out.strip()) == (0, "1")

    @pytest.mark.parametrize("expr", ["starts", "between 1 2", "topk x", "starts-ends 1",
                                      "starts-ends-between 1 3 0 4 sometimes", "uses 0"])
    def test_malformed(self, capsys, e_files, expr):
        _, index = e_files
        code, _, err = run(capsys, "query", index, *expr.split())
        assert code == 2 and "query grammar" in err

    def test_parse_query(self):
        q = parse_query(["starts-ends-between", "1", "3", "0", "4", "weak"])
        assert (q.kind, q.stops, q.interval, q.sem.value) == ("starts-ends-between", (1, 3), (0, 4), "weak")
        with pytest.raises(UsageError):
            parse_query([])

    def test_engines_agree_on_workload(self, capsys, tmp_path):
        import numpy as np
        from helpers import random_corpus
        from tripindex.cli import run_index, run_oracle
        from tripindex.queryengine import build_index
        rng = np.random.default_rng(12)
        corpus = random_corpus(rng, max_trips=200, max_stops=15)
        index = build_index(corpus, 16)
        sigma = corpus.grid.sigma
        for _ in range(150):
            x, y = rng.integers(1, corpus.n_stops + 1, 2).tolist()
            a, b = sorted(rng.integers(0, sigma, 2).tolist())
            for expr in (f"starts {x}", f"ends {x}", f"uses {x}", f"starts-ends {x} {y}",
                         f"starts-between {x} {a} {b}", f"ends-between {x} {a} {b}",
                         f"uses-between {x} {a} {b}", f"starts-ends-between {x} {y} {a} {b} strong",
                         f"starts-ends-between {x} {y} {a} {b} weak", "topk 3 bin"):
                q = parse_query(expr.split())
                assert run_index(index, q)[0] == run_oracle(corpus, q)[0], expr


class TestStatsAndIntegrity:
    def test_stats(self, capsys, e_files):
        _, index = e_files
        code, out, _ = run(capsys, "stats", index)
        assert code == 0
        assert "n                     28" in out
        assert "plain baseline        11 bytes (4 bits/stop)" in out
        assert "psi +1 run share" in out

    def test_corrupted_magic(self, capsys, e_files, tmp_path):
        _, index = e_files
        bad = tmp_path / "bad.tidx"
        data = bytearray(index.read_bytes())
        data[0] ^= 0xFF
        bad.write_bytes(bytes(data))
        code, _, err = run(capsys, "stats", bad)
        assert code == 1 and "magic" in err

    def test_flipped_payload_byte(self, capsys, e_files, tmp_path):
        _, index = e_files
        data = bytearray(index.read_bytes())
        data[-3] ^= 0x10
        bad = tmp_path / "bad.tidx"
        bad.write_bytes(bytes(data))
        code, _, err = run(capsys, "query", bad, "uses", 3)
        assert code == 1 and "checksum" in err

    def test_truncated(self, capsys, e_files, tmp_path):
        _, index = e_files
        bad = tmp_path / "short.tidx"
        bad.write_bytes(index.read_bytes()[:-1])
        assert run(capsys, "stats", bad)[0] == 1


class TestBench:
    def test_table_and_csv(self, capsys, e_files, tmp_path):
        _, index = e_files
        out_csv = tmp_path / "b.csv"
        code, out, _ = run(capsys, "bench", index, "--queries", 20, "--csv", out_csv)
        assert code == 0
        assert "starts-ends-between-weak" in out and "% of plain baseline" in out
        assert "time-index overhead uses-between" in out
        with open(out_csv) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["query", "mean_us", "median_us", "count"]
        assert len(rows) == 14 and all(r[3] == "20" for r in rows[1:])

    def test_zero_queries(self, capsys, e_files):
        _, index = e_files
        assert run(capsys, "bench", index, "--queries", 0)[0] == 2

    def test_threads(self, capsys, e_files):
        _, index = e_files
        code, out, _ = run(capsys, "bench", index, "--queries", 10, "--threads", 2,
                           "--only", "uses", "starts")
        assert code == 0
        assert out.count("thread 0:") == 2 and out.count("thread 1:") == 2
