from app.models.report import Severity, ViolationKind
from app.services.fixtures import fixtures
from app.services.trace_validator import first_error, flatten, validate
from tests.helpers import std


def kinds(report):
    return [(v.idx, v.kind) for v in report.violations]


def test_fixtures_are_well_formed():
    for name, trace in fixtures().items():
        report = validate(trace)
        assert report.ok, name
        assert report.violations == [], name


def test_double_acquire():
    report = validate(
        std(
            """
            t1|acq|l
            t2|acq|l
            t1|rel|l
            """
        )
    )
    assert not report.ok
    assert (1, ViolationKind.DOUBLE_ACQUIRE) in kinds(report)
    assert first_error(report).startswith("DoubleAcquire at 1")


def test_unmatched_release():
    report = validate(std("t1|rel|l"))
    assert kinds(report) == [(0, ViolationKind.UNMATCHED_RELEASE)]


def test_bad_nesting():
    report = validate(
        std(
            """
            t1|acq|l
            t1|acq|m
            t1|rel|l
            t1|rel|m
            """
        )
    )
    assert kinds(report) == [(2, ViolationKind.BAD_NESTING)]


def test_reentrant_acquire_is_a_warning():
    report = validate(
        std(
            """
            t1|acq|l
            t1|acq|l
            t1|rel|l
            t1|rel|l
            """
        )
    )
    assert report.ok
    assert kinds(report) == [(1, ViolationKind.REENTRANT_FLATTENED)]
    assert report.violations[0].severity == Severity.WARNING


def test_dangling_section_is_a_warning():
    report = validate(
        std(
            """
            t1|w|x
            t1|acq|l
            t1|r|x
            """
        )
    )
    assert report.ok
    assert kinds(report) == [(1, ViolationKind.DANGLING_CRITICAL_SECTION)]


def test_fork_of_known_thread():
    report = validate(
        std(
            """
            t1|r|x
            t2|r|x
            t1|fork|t2
            """
        )
    )
    assert kinds(report) == [(2, ViolationKind.FORK_OF_KNOWN_THREAD)]


def test_event_after_join():
    report = validate(
        std(
            """
            t1|fork|t2
            t2|w|x
            t1|join|t2
            t2|r|x
            """
        )
    )
    assert kinds(report) == [(3, ViolationKind.JOIN_OF_LIVE_THREAD)]


def test_join_of_thread_holding_a_lock():
    report = validate(
        std(
            """
            t1|fork|t2
            t2|acq|l
            t1|join|t2
            """
        )
    )
    assert (2, ViolationKind.JOIN_OF_LIVE_THREAD) in kinds(report)


def test_violations_sorted_by_index():
    report = validate(
        std(
            """
            t1|acq|l
            t2|rel|m
            t3|acq|l
            """
        )
    )
    assert [v.idx for v in report.violations] == sorted(v.idx for v in report.violations)


def test_render():
    report = validate(std("t1|rel|l"))
    lines = report.render()
    assert lines[0] == "VALID|ok=0|events=1|violations=1"
    assert lines[1].startswith("VIOLATION|error|UnmatchedRelease|idx=0|")


def test_flatten_renumbers():
    trace, count = flatten(
        std(
            """
            t1|acq|l
            t1|acq|l
            t1|w|x
            t1|rel|l
            t1|rel|l
            t2|r|x
            """
        )
    )
    assert count == 1
    assert [e.idx for e in trace] == [0, 1, 2, 3]
    assert validate(trace).violations == []
