import pytest
from pydantic import ValidationError

from app.models.run_config import Command, GenParams, RunConfig
from app.models.trace import EventKind, conflicting
from app.services.fixtures import get_fixture, line_event, line_events
from tests.helpers import std


def test_sections_and_membership():
    trace = std(
        """
        t1|acq|l
        t1|acq|m
        t1|w|x
        t1|rel|m
        t2|r|x
        t1|rel|l
        t1|acq|l
        """
    )
    sections = trace.sections
    assert [(cs.acquire, cs.release) for cs in sections] == [(0, 5), (1, 3), (6, None)]
    assert sections[0].members == [0, 1, 2, 3, 5]
    assert trace.match(1) == 3
    assert trace.critical_section(5) is sections[0]
    assert not sections[2].closed

    l, m = trace.symbols.locks.lookup("l"), trace.symbols.locks.lookup("m")
    assert trace.in_lock(2, l) and trace.in_lock(2, m)
    assert not trace.in_lock(4, l)
    assert [cs.lock for cs in trace.enclosing_sections(2)] == [l, m]


def test_conflicting():
    trace = std("t1|w|x\nt2|r|x\nt2|r|x\nt1|r|x\nt2|w|y")
    e = trace.events
    assert conflicting(e[0], e[1])
    assert not conflicting(e[1], e[2])
    assert not conflicting(e[1], e[3])
    assert not conflicting(e[0], e[4])


def test_event_kind_properties():
    assert EventKind.READ.is_access and not EventKind.READ.is_lock_op
    assert EventKind.RELEASE.is_lock_op
    assert EventKind.FORK.is_thread_op


def test_fixture_line_lookup():
    trace = get_fixture("sync_chain")
    assert len(line_events(trace, 2)) == 4
    assert line_event(trace, 2) == line_events(trace, 2)[-1]
    assert trace[line_event(trace, 2)].kind == EventKind.RELEASE


def test_run_config_defaults():
    config = RunConfig(command=Command.ANALYZE)
    assert config.input == "-"
    assert not config.buffered
    assert RunConfig(command=Command.ANALYZE, pairs=True).buffered


@pytest.mark.parametrize(
    "fields",
    [
        {"command": Command.ANALYZE, "detector": "cp"},
        {"command": Command.ANALYZE, "trace_format": "rv"},
        {"command": Command.GENERATE},
        {"command": Command.GENERATE, "fixture": "swap_blocked", "bits": ("0", "1")},
        {"command": Command.ANALYZE, "pair_budget": 0},
    ],
)
def test_run_config_rejects(fields):
    with pytest.raises(ValidationError):
        RunConfig(**fields)


def test_gen_params_ranges():
    with pytest.raises(ValidationError):
        GenParams(p_lock=1.5)
    with pytest.raises(ValidationError):
        GenParams(threads=0)
