"""
STD trace format reader/writer.

One event per line: `<tid>|<op>|<operand>[|<loc>]`, `#` starts a comment,
blank lines are skipped.
"""
import io
import re
from pathlib import Path
from typing import IO, Iterator, List, Optional, Union

import structlog

from app.core.errors import ParseError
from app.models.trace import Event, EventKind, SymbolTable, Trace
from app.services.trace_validator import ReentrancyFilter

logger = structlog.get_logger(__name__)

ID_PATTERN = re.compile(r"^[A-Za-z0-9_.:$-]+$")

OPS = {kind.value: kind for kind in EventKind}


def parse_event_line(line: str, symbols: SymbolTable, line_no: int = 0) -> Event:
    """Parse one non-comment line; the caller assigns idx"""
    fields = line.strip().split("|")
    if len(fields) not in (3, 4):
        raise ParseError(line_no, f"expected 3 or 4 fields, got {len(fields)}")

    tid, op, operand = fields[0], fields[1], fields[2]
    kind = OPS.get(op)
    if kind is None:
        raise ParseError(line_no, f"unknown op '{op}'")
    if not tid:
        raise ParseError(line_no, "empty thread id")
    if not operand:
        raise ParseError(line_no, "empty operand")
    for label, value in (("thread id", tid), ("operand", operand)):
        if not ID_PATTERN.match(value):
            raise ParseError(line_no, f"invalid {label} '{value}'")

    loc: Optional[str] = None
    if len(fields) == 4:
        if not fields[3]:
            raise ParseError(line_no, "empty location")
        loc = fields[3]

    return Event(
        idx=-1,
        tid=symbols.threads.intern(tid),
        kind=kind,
        operand=symbols.operand_table(kind).intern(operand),
        loc=loc,
    )


def is_skippable(line: str) -> bool:
    stripped = line.strip()
    return not stripped or stripped.startswith("#")


class TraceReader:
    """Streams events from an STD source, assigning consecutive indices"""

    def __init__(
        self,
        source: IO[str],
        symbols: Optional[SymbolTable] = None,
        flatten: bool = False,
    ):
        self.source = source
        self.symbols = symbols or SymbolTable()
        self.reentrancy = ReentrancyFilter() if flatten else None
        self.count = 0

    @property
    def flattened(self) -> int:
        return self.reentrancy.flattened if self.reentrancy else 0

    def _lines(self) -> Iterator[str]:
        lines = iter(self.source)
        line_no = 0
        while True:
            line_no += 1
            try:
                yield next(lines)
            except StopIteration:
                return
            except UnicodeDecodeError:
                raise ParseError(line_no, "invalid UTF-8") from None

    def __iter__(self) -> Iterator[Event]:
        for line_no, line in enumerate(self._lines(), start=1):
            if is_skippable(line):
                continue
            event = parse_event_line(line, self.symbols, line_no)
            if self.reentrancy is not None and not self.reentrancy.admit(event):
                continue
            event.idx = self.count
            self.count += 1
            yield event

    def read_all(self) -> Trace:
        events: List[Event] = list(self)
        if self.flattened:
            logger.info("Flattened re-entrant lock pairs", count=self.flattened)
        return Trace(events, self.symbols)


def parse_trace(text: str, flatten: bool = False) -> Trace:
    return TraceReader(io.StringIO(text), flatten=flatten).read_all()


def load_trace(path: Union[str, Path], flatten: bool = False) -> Trace:
    with open(path, "r", encoding="utf-8") as fh:
        trace = TraceReader(fh, flatten=flatten).read_all()
    logger.debug(
        "Trace loaded",
        path=str(path),
        events=trace.n_events,
        threads=trace.n_threads,
        locks=trace.n_locks,
        vars=trace.n_vars,
    )
    return trace


def format_event(trace: Trace, event: Event) -> str:
    fields = [trace.thread_name(event.tid), event.kind.value, trace.operand_name(event)]
    if event.loc is not None:
        fields.append(event.loc)
    return "|".join(fields)


def serialize(trace: Trace) -> str:
    return "".join(format_event(trace, e) + "\n" for e in trace.events)


def write_trace(trace: Trace, out: IO[str]) -> None:
    for event in trace.events:
        out.write(format_event(trace, event))
        out.write("\n")
