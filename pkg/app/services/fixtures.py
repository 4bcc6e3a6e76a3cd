"""
Hand-written example traces.

Each fixture is a list of numbered lines `(thread, op, operand)`. Besides the
STD ops, `sync` expands to `acq(o) r(oVar) w(oVar) rel(o)` and `acrl` to
`acq(o) rel(o)`. Every event produced by a line carries the location `L<line>`.
"""
from typing import Dict, List, Sequence, Tuple

from app.core.errors import UnknownFixture
from app.models.trace import EventKind, Trace, TraceBuilder

Line = Tuple[str, str, str]

_OPS: Dict[str, EventKind] = {kind.value: kind for kind in EventKind}


def expand_lines(lines: Sequence[Line]) -> Trace:
    builder = TraceBuilder()
    for number, (thread, op, operand) in enumerate(lines, start=1):
        loc = f"L{number}"
        if op == "sync":
            builder.add(thread, EventKind.ACQUIRE, operand, loc)
            builder.add(thread, EventKind.READ, f"{operand}Var", loc)
            builder.add(thread, EventKind.WRITE, f"{operand}Var", loc)
            builder.add(thread, EventKind.RELEASE, operand, loc)
        elif op == "acrl":
            builder.add(thread, EventKind.ACQUIRE, operand, loc)
            builder.add(thread, EventKind.RELEASE, operand, loc)
        else:
            builder.add(thread, _OPS[op], operand, loc)
    return builder.build()


def line_events(trace: Trace, line: int) -> List[int]:
    """Indices of the events a fixture line expanded to"""
    loc = f"L{line}"
    return [e.idx for e in trace.events if e.loc == loc]


def line_event(trace: Trace, line: int) -> int:
    """Last event of a fixture line (the release, for sync/acrl lines)"""
    return line_events(trace, line)[-1]


SWAP_BLOCKED: List[Line] = [
    ("t1", "acq", "l"),
    ("t1", "r", "x"),
    ("t1", "w", "x"),
    ("t1", "rel", "l"),
    ("t2", "acq", "l"),
    ("t2", "r", "x"),
    ("t2", "w", "x"),
    ("t2", "rel", "l"),
]

SWAPPABLE: List[Line] = [
    ("t1", "w", "y"),
    ("t1", "acq", "l"),
    ("t1", "r", "x"),
    ("t1", "rel", "l"),
    ("t2", "acq", "l"),
    ("t2", "r", "x"),
    ("t2", "rel", "l"),
    ("t2", "r", "y"),
]

CONFLICT_THEN_READ: List[Line] = [
    ("t1", "w", "y"),
    ("t1", "acq", "l"),
    ("t1", "w", "x"),
    ("t1", "rel", "l"),
    ("t2", "acq", "l"),
    ("t2", "r", "x"),
    ("t2", "r", "y"),
    ("t2", "rel", "l"),
]

READ_THEN_CONFLICT: List[Line] = [
    ("t1", "w", "y"),
    ("t1", "acq", "l"),
    ("t1", "w", "x"),
    ("t1", "rel", "l"),
    ("t2", "acq", "l"),
    ("t2", "r", "y"),
    ("t2", "r", "x"),
    ("t2", "rel", "l"),
]

SYNC_CHAIN: List[Line] = [
    ("t1", "acq", "l"),
    ("t1", "sync", "x"),
    ("t1", "r", "z"),
    ("t1", "rel", "l"),
    ("t2", "sync", "x"),
    ("t2", "acq", "l"),
    ("t2", "acq", "n"),
    ("t2", "rel", "n"),
    ("t2", "rel", "l"),
    ("t3", "acq", "n"),
    ("t3", "rel", "n"),
    ("t3", "w", "z"),
]

NESTED_CHAIN: List[Line] = [
    ("t1", "acq", "l"),
    ("t1", "acq", "m"),
    ("t1", "rel", "m"),
    ("t1", "r", "z"),
    ("t1", "rel", "l"),
    ("t2", "acq", "m"),
    ("t2", "acq", "n"),
    ("t2", "sync", "x"),
    ("t2", "rel", "n"),
    ("t2", "rel", "m"),
    ("t3", "acq", "n"),
    ("t3", "acq", "l"),
    ("t3", "rel", "l"),
    ("t3", "sync", "x"),
    ("t3", "w", "z"),
    ("t3", "rel", "n"),
]

NESTED_CHAIN_TAIL: List[Line] = [
    ("t1", "acq", "l"),
    ("t1", "acq", "m"),
    ("t1", "rel", "m"),
    ("t1", "r", "z"),
    ("t1", "rel", "l"),
    ("t2", "acq", "m"),
    ("t2", "acq", "n"),
    ("t2", "sync", "x"),
    ("t2", "rel", "n"),
    ("t3", "acq", "n"),
    ("t3", "acq", "l"),
    ("t3", "rel", "l"),
    ("t3", "sync", "x"),
    ("t3", "w", "z"),
    ("t3", "rel", "n"),
    ("t3", "sync", "y"),
    ("t2", "sync", "y"),
    ("t2", "rel", "m"),
]

GADGET_PAIR: List[Line] = [
    ("t1", "acq", "l0"),
    ("t1", "w", "x"),
    ("t3", "acq", "m"),
    ("t3", "acrl", "y"),
    ("t1", "acrl", "y"),
    ("t1", "rel", "l0"),
    ("t1", "acq", "l1"),
    ("t1", "acrl", "y"),
    ("t3", "acrl", "y"),
    ("t3", "rel", "m"),
    ("t3", "acq", "m"),
    ("t3", "acrl", "y"),
    ("t1", "acrl", "y"),
    ("t1", "rel", "l1"),
    ("t3", "rel", "m"),
    ("t2", "acq", "l0"),
    ("t2", "w", "x"),
    ("t2", "rel", "l0"),
    ("t2", "acq", "m"),
    ("t2", "rel", "m"),
    ("t2", "acq", "l1"),
    ("t2", "rel", "l1"),
    ("t2", "acq", "m"),
    ("t2", "rel", "m"),
]

FIXTURE_LINES: Dict[str, List[Line]] = {
    "swap_blocked": SWAP_BLOCKED,
    "swappable": SWAPPABLE,
    "conflict_then_read": CONFLICT_THEN_READ,
    "read_then_conflict": READ_THEN_CONFLICT,
    "sync_chain": SYNC_CHAIN,
    "nested_chain": NESTED_CHAIN,
    "nested_chain_tail": NESTED_CHAIN_TAIL,
    "gadget_pair": GADGET_PAIR,
}


def fixtures() -> Dict[str, Trace]:
    """All example traces, freshly built"""
    return {name: expand_lines(lines) for name, lines in FIXTURE_LINES.items()}


def get_fixture(name: str) -> Trace:
    if name not in FIXTURE_LINES:
        raise UnknownFixture(f"Fixture '{name}' not found")
    return expand_lines(FIXTURE_LINES[name])

