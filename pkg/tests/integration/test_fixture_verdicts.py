"""
Expected detector verdicts on the hand-written example traces.
"""
import pytest

from app.services.analyzer import analyze
from app.services.fixtures import get_fixture, line_event

WCP_RACES = {
    "swap_blocked": set(),
    "swappable": {("L1", "L8")},
    "conflict_then_read": set(),
    "read_then_conflict": {("L1", "L6")},
    "sync_chain": {("L12", "L3")},
    "nested_chain": {("L15", "L4")},
    "nested_chain_tail": {("L14", "L4")},
    "gadget_pair": set(),
}


@pytest.mark.parametrize("name", sorted(WCP_RACES))
def test_wcp_pairs(name):
    report = analyze(get_fixture(name), detector="wcp", pairs=True)
    summary = report.detectors["wcp"]
    assert {pair.locs for pair in summary.pairs} == WCP_RACES[name]
    assert report.has_races == bool(WCP_RACES[name])


@pytest.mark.parametrize("name", sorted(WCP_RACES))
def test_hb_finds_nothing(name):
    report = analyze(get_fixture(name), detector="hb", pairs=True)
    assert report.detectors["hb"].flags == []


def test_swappable_witness():
    report = analyze(get_fixture("swappable"), detector="both", pairs=True)
    pair = report.detectors["wcp"].pairs[0]
    assert pair.example == (0, 7)
    assert pair.min_distance == 7
    assert pair.sound
    assert report.detectors["hb"].pairs == []


def test_sync_chain_witness_lines():
    trace = get_fixture("sync_chain")
    report = analyze(trace, detector="wcp", pairs=True)
    assert report.detectors["wcp"].pairs[0].example == (line_event(trace, 3), line_event(trace, 12))


@pytest.mark.parametrize("name", sorted(WCP_RACES))
def test_history_gc_does_not_change_verdicts(name):
    trace = get_fixture(name)
    plain = analyze(trace, detector="wcp", pairs=True)
    collected = analyze(trace, detector="wcp", pairs=True, gc_history=True)
    assert plain.detectors["wcp"].pairs == collected.detectors["wcp"].pairs
