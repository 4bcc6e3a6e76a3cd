import io

import pytest

from app.core.errors import ParseError
from app.models.trace import EventKind, SymbolTable
from app.services.trace_parser import (
    TraceReader,
    load_trace,
    parse_event_line,
    parse_trace,
    serialize,
    write_trace,
)
from tests.helpers import std


def test_parse_line_with_location():
    symbols = SymbolTable()
    event = parse_event_line("T1|acq|l|Main.java:10", symbols)
    assert event.kind == EventKind.ACQUIRE
    assert symbols.threads.name(event.tid) == "T1"
    assert symbols.locks.name(event.operand) == "l"
    assert event.loc == "Main.java:10"


def test_location_defaults_to_index():
    trace = parse_trace("T2|r|x\nT2|w|x\n")
    assert trace[1].loc is None
    assert trace[1].location == "idx:1"


def test_namespaces_are_disjoint():
    trace = std(
        """
        t1|acq|a
        t1|w|a
        t1|rel|a
        """
    )
    assert trace.n_locks == 1 and trace.n_vars == 1
    assert trace[0].operand == trace[1].operand == 0


@pytest.mark.parametrize(
    "line, reason",
    [
        ("T1|acquire|l", "unknown op"),
        ("T1|acq", "expected 3 or 4 fields"),
        ("T1|acq|l|loc|extra", "expected 3 or 4 fields"),
        ("T1|acq|", "empty operand"),
        ("|r|x", "empty thread id"),
        ("T#1|r|x", "invalid thread id"),
        ("T1|r|x y", "invalid operand"),
        ("T1|r|x|", "empty location"),
    ],
)
def test_malformed_lines(line, reason):
    with pytest.raises(ParseError) as exc:
        parse_event_line(line, SymbolTable(), line_no=7)
    assert exc.value.line_no == 7
    assert reason in exc.value.reason


def test_parse_error_reports_source_line():
    text = "# header\n\nt1|w|x\nt1|lock|l\n"
    with pytest.raises(ParseError) as exc:
        parse_trace(text)
    assert exc.value.line_no == 4


def test_undecodable_bytes_raise_parse_error():
    source = io.TextIOWrapper(io.BytesIO(b"T1|w|x\nT2|r|\xff\xfe\n"), encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        list(TraceReader(source))
    assert exc.value.reason == "invalid UTF-8"


def test_reader_skips_comments_and_blanks():
    source = io.StringIO("# comment\nt1|w|x\n\n   \n  # indented\nt2|r|x\n")
    events = list(TraceReader(source))
    assert [e.idx for e in events] == [0, 1]


def test_reentrant_pairs_flattened_on_read():
    text = "t1|acq|l\nt1|acq|l\nt1|r|x\nt1|rel|l\nt1|rel|l\n"
    reader = TraceReader(io.StringIO(text), flatten=True)
    trace = reader.read_all()
    assert [e.kind for e in trace] == [EventKind.ACQUIRE, EventKind.READ, EventKind.RELEASE]
    assert [e.idx for e in trace] == [0, 1, 2]
    assert reader.flattened == 1


def test_serialize_keeps_every_field():
    text = "t1|acq|l|A.java:3\nt1|w|x\nt1|rel|l|A.java:5\nt2|fork|t3\nt2|join|t3\n"
    assert serialize(parse_trace(text)) == text


def test_load_and_write(tmp_path):
    path = tmp_path / "trace.std"
    path.write_text("# two events\nt1|w|x|L1\nt2|r|x|L2\n")
    trace = load_trace(path)
    assert trace.n_events == 2 and trace.n_threads == 2

    out = io.StringIO()
    write_trace(trace, out)
    assert out.getvalue() == "t1|w|x|L1\nt2|r|x|L2\n"
