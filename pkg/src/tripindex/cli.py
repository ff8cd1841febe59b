"""Command-line entry point: ``tripindex {network,generate,build,query,bench,stats}``.

Exit codes: 0 success, 1 build/query failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import sys

from . import storage
from .bench import format_table, run_bench, temporal_overhead, write_csv
from .corpus import (
    LengthParams, generate_synthetic, parse_corpus, parse_network, synthetic_network,
    write_corpus, write_network,
)
from .errors import (
    BuildError, ConfigurationError, IntegrityError, NotFoundError, ParseError, RangeError,
    UsageError,
)
from .oracle import oracle_spatial, oracle_spatiotemporal
from .queryengine import Semantics, build_index

ALLOWED_RATES = (16, 64, 256)

GRAMMAR = """\
query grammar:
  starts X | ends X | starts-ends X Y | uses X | topk K [seq|bin]
  starts-between X T1 T2 | ends-between X T1 T2 | uses-between X T1 T2
  starts-ends-between X Y T1 T2 (strong|weak)
times are raw codes, or DAYTYPE/HH:MM with --clock"""

_ARITY = {
    "starts": 1, "ends": 1, "starts-ends": 2, "uses": 1,
    "starts-between": 3, "ends-between": 3, "uses-between": 3, "starts-ends-between": 5,
}


class Query:
    def __init__(self, kind, stops=(), interval=None, sem=None, k=None, method="seq"):
        self.kind, self.stops, self.interval = kind, tuple(stops), interval
        self.sem, self.k, self.method = sem, k, method


def parse_query(tokens, grid=None, clock=False) -> Query:
    if not tokens:
        raise UsageError("empty query expression")
    kind, args = tokens[0], list(tokens[1:])

    def integer(tok):
        try:
            return int(tok)
        except ValueError:
            raise UsageError(f"expected an integer, got {tok!r}") from None

    def timecode(tok):
        if clock:
            try:
                return grid.parse_clock(tok)
            except ConfigurationError as exc:
                raise UsageError(str(exc)) from None
        return integer(tok)

    if kind == "topk":
        if len(args) not in (1, 2) or (len(args) == 2 and args[1] not in ("seq", "bin")):
            raise UsageError("usage: topk K [seq|bin]")
        return Query("topk", k=integer(args[0]), method=args[1] if len(args) == 2 else "seq")
    if kind not in _ARITY:
        raise UsageError(f"unknown query {kind!r}")
    if len(args) != _ARITY[kind]:
        raise UsageError(f"{kind} takes {_ARITY[kind]} arguments, got {len(args)}")
    if kind == "starts-ends-between":
        if args[4] not in ("strong", "weak"):
            raise UsageError("semantics must be 'strong' or 'weak'")
        return Query(kind, map(integer, args[:2]), (timecode(args[2]), timecode(args[3])),
                     Semantics(args[4]))
    if kind.endswith("-between"):
        return Query(kind, [integer(args[0])], (timecode(args[1]), timecode(args[2])))
    return Query(kind, map(integer, args))


def run_index(index, q: Query):
    """Answer with the succinct index: (printable answer, detail lines)."""
    t = index.tcsa
    detail = []
    if q.kind == "topk":
        return index.topk(q.k, q.method), detail
    if q.kind in ("starts", "starts-between"):
        r = t.starts_range(q.stops[0])
        detail.append(f"$X range {tuple(r)}")
    elif q.kind in ("ends", "ends-between"):
        r = t.ends_range(q.stops[0])
        detail.append(f"X$ range {tuple(r)}")
    elif q.kind in ("uses", "uses-between"):
        r = t.section(q.stops[0]) if 1 <= q.stops[0] <= t.n_stops else None
        detail.append(f"section {tuple(r) if r is not None else None}")
    else:
        ends, starts = t.range_start_end(*q.stops)
        detail.append(f"Y$X range {tuple(ends)}")
        detail.append(f"$XY range {tuple(starts)}")
    answers = {
        "starts": lambda: index.count_starts_at(q.stops[0]),
        "ends": lambda: index.count_ends_at(q.stops[0]),
        "starts-ends": lambda: index.count_starts_ends(*q.stops),
        "uses": lambda: index.count_uses(q.stops[0]),
        "starts-between": lambda: index.q_starts_between(q.stops[0], q.interval),
        "ends-between": lambda: index.q_ends_between(q.stops[0], q.interval),
        "uses-between": lambda: index.q_uses_between(q.stops[0], q.interval),
        "starts-ends-between": lambda: index.q_start_end_between(*q.stops, q.interval, q.sem),
    }
    return answers[q.kind](), detail


def run_oracle(corpus, q: Query):
    names = {"starts": "starts", "ends": "ends", "starts-ends": "start-end", "uses": "uses"}
    if q.kind == "topk":
        return oracle_spatial(corpus, "topk", q.k), []
    if q.kind in names:
        return oracle_spatial(corpus, names[q.kind], *q.stops).count, []
    base = names[q.kind.removesuffix("-between")]
    args = [*q.stops, q.interval] + ([q.sem] if q.sem is not None else [])
    return oracle_spatiotemporal(corpus, base, *args).count, []


def format_answer(answer) -> str:
    if isinstance(answer, list):
        return "\n".join(f"{stop} {freq}" for stop, freq in answer)
    return str(answer)


# -- commands ---------------------------------------------------------------------------

def cmd_network(args):
    net = synthetic_network(args.lines, args.stops_per_line, args.seed)
    with _open_out(args.output) as out:
        write_network(net, out)
    print(f"{len(net.stops)} stops, {len(net.lines)} lines", file=sys.stderr)


def cmd_generate(args):
    with open(args.network) as fh:
        net = parse_network(fh)
    params = LengthParams(args.min_length, args.max_length, args.mean_length)
    corpus = generate_synthetic(net, args.count, args.seed, params)
    with _open_out(args.output) as out:
        write_corpus(corpus, out)
    print(f"trips {len(corpus)}  mean length {corpus.mean_length():.2f}", file=sys.stderr)


def cmd_build(args):
    if args.sample_rate not in ALLOWED_RATES and not args.unsafe_rate:
        raise UsageError(f"sample rate must be one of {ALLOWED_RATES} "
                         "(or any positive integer with --unsafe-rate)")
    with open(args.corpus) as fh:
        corpus = parse_corpus(fh)
    index = build_index(corpus, args.sample_rate)
    size = storage.save(index, args.output)
    print(f"wrote {args.output} ({size} bytes)")
    print("\n".join(storage.SpaceReport.of(index).lines()))


def cmd_query(args):
    index = storage.load(args.index)
    q = parse_query(args.expr, index.grid, args.clock)
    if args.engine == "oracle":
        if args.corpus:
            with open(args.corpus) as fh:
                corpus = parse_corpus(fh)
        else:
            corpus = index.extract_trips()
        answer, detail = run_oracle(corpus, q)
    else:
        answer, detail = run_index(index, q)
    print(format_answer(answer))
    if args.verbose:
        for line in detail:
            print(line)


def cmd_bench(args):
    if args.queries < 1:
        raise UsageError("--queries must be positive")
    index = storage.load(args.index)
    rows, per_thread = run_bench(index, args.queries, args.seed, args.threads,
                                 only=set(args.only) if args.only else None)
    print(format_table(rows))
    for t, row in per_thread:
        print(f"thread {t}: {row.query} mean {row.mean_us:.2f} us median {row.median_us:.2f} us")
    for name, delta in temporal_overhead(rows):
        print(f"time-index overhead {name}: {delta:+.2f} us")
    report = storage.SpaceReport.of(index)
    print(f"space: stops index {report.ratio_percent:.2f}% of plain baseline "
          f"(sample rate {index.sample_rate})")
    if args.csv:
        write_csv(rows, args.csv)


def cmd_stats(args):
    index = storage.load(args.index)
    print(f"n                     {index.n}")
    print(f"stops (delta)         {index.n_stops}")
    print(f"trips                 {index.trip_count}")
    print(f"sample rate           {index.sample_rate}")
    print("\n".join(storage.SpaceReport.of(index).lines()))
    print(f"psi +1 run share      {index.tcsa.psi_codes.run_fraction():.4f}")


class _open_out:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        self.fh = sys.stdout if self.path in (None, "-") else open(self.path, "w")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not sys.stdout:
            self.fh.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tripindex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("network", help="write a synthetic network description")
    p.add_argument("--lines", type=int, default=12)
    p.add_argument("--stops-per-line", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("generate", help="generate synthetic trips over a network")
    p.add_argument("network")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-length", type=int, default=2)
    p.add_argument("--max-length", type=int, default=31)
    p.add_argument("--mean-length", type=float, default=11.81)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", help="build and save an index")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--sample-rate", type=int, default=64)
    p.add_argument("--unsafe-rate", action="store_true",
                   help="accept any positive sample rate")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="run one query", epilog=GRAMMAR,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("index")
    p.add_argument("expr", nargs="+")
    p.add_argument("--engine", choices=("index", "oracle"), default="index")
    p.add_argument("--corpus", help="trip file for the oracle engine "
                   "(default: trips extracted from the index)")
    p.add_argument("--clock", action="store_true", help="times given as DAYTYPE/HH:MM")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="measure query latency")
    p.add_argument("index")
    p.add_argument("--queries", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--only", nargs="*")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="space and structure statistics")
    p.add_argument("index")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (UsageError, ParseError, ConfigurationError) as exc:
        if isinstance(exc, UsageError) and args.command == "query":
            print(f"error: {exc}\n{GRAMMAR}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BuildError, IntegrityError, RangeError, NotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
