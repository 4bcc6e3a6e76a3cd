"""
Command-line front end.

Exit status: 0 = no races (or a clean trace), 1 = races found (or validation
errors), 2 = usage, IO or parse error.
"""
import argparse
import sys
from contextlib import contextmanager
from typing import IO, Iterator, List, Optional, TextIO

import structlog
from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import RaceToolError
from app.core.logging import configure_logging
from app.models.run_config import Command, GenParams, RunConfig
from app.models.trace import Trace
from app.services.analyzer import Analyzer, log_report
from app.services.fixtures import FIXTURE_LINES, get_fixture
from app.services.oracle import oracle_report
from app.services.trace_parser import TraceReader, write_trace
from app.services.trace_validator import flatten, validate
from app.services.tracegen import gen_equality_trace, gen_random, gen_scaling_trace

logger = structlog.get_logger(__name__)

EXIT_CLEAN = 0
EXIT_RACES = 1
EXIT_ERROR = 2


@contextmanager
def _open_input(path: Optional[str]) -> Iterator[IO[str]]:
    if path in (None, "-"):
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fh:
            yield fh


@contextmanager
def _open_output(path: Optional[str], default: TextIO) -> Iterator[TextIO]:
    if path in (None, "-"):
        yield default
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _load(config: RunConfig, reentrant_flatten: bool) -> Trace:
    if config.fixture is not None:
        trace = get_fixture(config.fixture)
        return flatten(trace)[0] if reentrant_flatten else trace
    with _open_input(config.input) as source:
        return TraceReader(source, flatten=reentrant_flatten).read_all()


def _emit(lines: List[str], out: TextIO) -> None:
    for line in lines:
        out.write(line + "\n")


def _analyze(config: RunConfig, out: TextIO) -> int:
    dump = (lambda line: out.write(line + "\n")) if config.dump_timestamps else None
    analyzer = Analyzer(
        config.detector,
        pairs=config.pairs,
        pair_budget=config.pair_budget,
        gc_history=config.gc_history,
        dump=dump,
    )
    if config.buffered or config.fixture is not None:
        if config.fixture is not None:
            trace, flattened = flatten(get_fixture(config.fixture))
        else:
            with _open_input(config.input) as source:
                reader = TraceReader(source, flatten=True)
                trace = reader.read_all()
                flattened = reader.flattened
        report = analyzer.run_trace(trace, flattened=flattened)
    else:
        with _open_input(config.input) as source:
            reader = TraceReader(source, flatten=True)
            report = analyzer.run_stream(reader, reader.symbols)
            report.flattened = reader.flattened
        log_report(report)

    _emit(report.render(include_timing=False), out)
    if config.metrics_out:
        with open(config.metrics_out, "w", encoding="utf-8") as fh:
            _emit([f"{key}={value}" for key, value in report.metrics().items()], fh)
    return EXIT_RACES if report.has_races else EXIT_CLEAN


def _validate(config: RunConfig, out: TextIO) -> int:
    report = validate(_load(config, reentrant_flatten=False))
    _emit(report.render(), out)
    return EXIT_CLEAN if report.ok else EXIT_RACES


def _generate(config: RunConfig, out: TextIO) -> int:
    if config.fixture is not None:
        trace = get_fixture(config.fixture)
    elif config.bits is not None:
        trace = gen_equality_trace(*config.bits)
    else:
        assert config.gen is not None
        trace = gen_random(config.gen)
    with _open_output(config.output, out) as target:
        write_trace(trace, target)
    return EXIT_CLEAN


def _oracle(config: RunConfig, out: TextIO) -> int:
    trace = _load(config, reentrant_flatten=True)
    report = oracle_report(trace, bound=config.oracle_bound)
    _emit(report.render(), out)
    return EXIT_RACES if report.races.get("WCPle") else EXIT_CLEAN


HANDLERS = {
    Command.ANALYZE: _analyze,
    Command.VALIDATE: _validate,
    Command.GENERATE: _generate,
    Command.ORACLE: _oracle,
}


def run(config: RunConfig, out: Optional[TextIO] = None) -> int:
    """Execute one command; errors become exit status 2 with a message on stderr"""
    try:
        return HANDLERS[config.command](config, out or sys.stdout)
    except (RaceToolError, OSError) as exc:
        logger.error("Command failed", command=config.command.value, error=str(exc))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _bits(value: str) -> tuple:
    parts = value.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected u,v")
    return parts[0], parts[1]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wcp-race",
        description="Predictive data-race detection over logged traces (WCP and HB)",
    )
    parser.add_argument("--log-level", default=settings.log_level, help="log level for stderr logs")
    parser.add_argument("--log-format", default=settings.log_format, choices=["json", "console"])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_input(p: argparse.ArgumentParser) -> None:
        p.add_argument("input", nargs="?", default=None, help="STD trace file, '-' for stdin")
        p.add_argument("--fixture", choices=sorted(FIXTURE_LINES), help="use a built-in trace")
        p.add_argument("--format", dest="trace_format", default="std", choices=["std"])

    analyze = sub.add_parser("analyze", help="detect races")
    add_input(analyze)
    analyze.add_argument("--detector", default=settings.default_detector, choices=["wcp", "hb", "both"])
    analyze.add_argument("--pairs", action="store_true", help="second pass resolving race pairs")
    analyze.add_argument("--pair-budget", type=int, default=settings.pair_budget)
    analyze.add_argument("--dump-timestamps", action="store_true")
    analyze.add_argument("--gc-history", action="store_true", default=settings.gc_history)
    analyze.add_argument("--metrics", dest="metrics_out", metavar="FILE")

    validate_cmd = sub.add_parser("validate", help="check lock semantics and nesting")
    add_input(validate_cmd)

    oracle = sub.add_parser("oracle", help="brute-force HB/CP/WCP relations for small traces")
    add_input(oracle)
    oracle.add_argument("--bound", dest="oracle_bound", type=int, default=settings.oracle_bound)

    generate = sub.add_parser("generate", help="emit a trace in STD format")
    source = generate.add_mutually_exclusive_group(required=True)
    source.add_argument("--fixture", choices=sorted(FIXTURE_LINES))
    source.add_argument("--gen-bits", dest="bits", type=_bits, metavar="U,V")
    source.add_argument("--gen-random", action="store_true")
    source.add_argument("--gen-scaling", type=int, metavar="EVENTS")
    generate.add_argument("-o", "--output", metavar="FILE")
    defaults = GenParams()
    generate.add_argument("--threads", type=int, default=defaults.threads)
    generate.add_argument("--locks", type=int, default=defaults.locks)
    generate.add_argument("--vars", type=int, default=defaults.vars)
    generate.add_argument("--events", type=int, default=defaults.events)
    generate.add_argument("--p-lock", type=float, default=defaults.p_lock)
    generate.add_argument("--p-write", type=float, default=defaults.p_write)
    generate.add_argument("--p-release", type=float, default=defaults.p_release)
    generate.add_argument("--max-nesting", type=int, default=defaults.max_nesting)
    generate.add_argument("--seed", type=int, default=defaults.seed)
    generate.add_argument("--dangling", action="store_true")
    generate.add_argument("--fork-join", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    command = Command(args.command)
    fields = {"command": command}
    if command == Command.GENERATE:
        fields.update(fixture=args.fixture, bits=args.bits, output=args.output)
        if args.gen_random:
            fields["gen"] = GenParams(
                threads=args.threads,
                locks=args.locks,
                vars=args.vars,
                events=args.events,
                p_lock=args.p_lock,
                p_write=args.p_write,
                p_release=args.p_release,
                max_nesting=args.max_nesting,
                seed=args.seed,
                dangling=args.dangling,
                fork_join=args.fork_join,
            )
        return RunConfig(**fields)

    fields.update(input=args.input, fixture=args.fixture, trace_format=args.trace_format)
    if command == Command.ANALYZE:
        fields.update(
            detector=args.detector,
            pairs=args.pairs,
            pair_budget=args.pair_budget,
            dump_timestamps=args.dump_timestamps,
            gc_history=args.gc_history,
            metrics_out=args.metrics_out,
        )
    elif command == Command.ORACLE:
        fields["oracle_bound"] = args.oracle_bound
    return RunConfig(**fields)


def main(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level, args.log_format)

    if args.command == "generate" and args.gen_scaling is not None:
        trace = gen_scaling_trace(args.gen_scaling, threads=args.threads, locks=args.locks, seed=args.seed)
        with _open_output(args.output, out or sys.stdout) as target:
            write_trace(trace, target)
        return EXIT_CLEAN

    try:
        config = config_from_args(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(config, out)


if __name__ == "__main__":
    sys.exit(main())
