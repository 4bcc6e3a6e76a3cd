import numpy as np
import pytest

from app.core.errors import BoundExceeded
from app.services.fixtures import fixtures, get_fixture, line_event
from app.services.oracle import (
    RelationKind,
    _compose,
    cp_order,
    cp_prec_closure,
    hb_closure,
    oracle_report,
    races_of,
    thread_order,
    wcp_order,
    wcp_prec_closure,
)
from tests.helpers import OWN_SECTION_ORDERING, std


def lines(trace, *numbers):
    return tuple(line_event(trace, n) for n in numbers)


def test_hb_through_lock_handoff():
    trace = get_fixture("sync_chain")
    hb = hb_closure(trace)
    assert lines(trace, 8, 10) in hb
    assert lines(trace, 3, 12) in hb
    assert races_of(trace, hb) == set()


def test_hb_single_thread_is_thread_order():
    trace = std("t1|w|x\nt1|acq|l\nt1|r|x\nt1|rel|l")
    assert np.array_equal(hb_closure(trace).bits, thread_order(trace))


def test_hb_leaves_unsynchronized_threads_unordered():
    trace = std("t1|w|x\nt2|w|y\nt1|r|y\nt2|r|x")
    hb = hb_closure(trace)
    assert hb.unordered(0, 1)
    assert hb.unordered(2, 3)
    assert races_of(trace, hb) == {(1, 2), (0, 3)}


def test_hb_fork_join_edges():
    trace = std("t1|w|x\nt1|fork|t2\nt2|w|x\nt1|join|t2\nt1|r|x")
    hb = hb_closure(trace)
    assert (0, 2) in hb and (2, 4) in hb
    assert races_of(trace, hb) == set()


def test_sync_chain_wcp_race_cp_none():
    trace = get_fixture("sync_chain")
    pair = lines(trace, 3, 12)
    assert pair in cp_prec_closure(trace)
    assert pair not in wcp_prec_closure(trace)
    assert pair in races_of(trace, wcp_order(trace))
    assert races_of(trace, cp_order(trace)) == set()


@pytest.mark.parametrize("name, first, second", [("nested_chain", 4, 15), ("nested_chain_tail", 4, 14)])
def test_wcp_only_races(name, first, second):
    trace = get_fixture(name)
    pair = lines(trace, first, second)
    assert pair in cp_prec_closure(trace)
    assert races_of(trace, wcp_order(trace)) == {pair}
    assert races_of(trace, cp_order(trace)) == set()


def test_read_then_conflict_y_race():
    trace = get_fixture("read_then_conflict")
    pair = lines(trace, 1, 6)
    assert pair in cp_prec_closure(trace)
    assert races_of(trace, wcp_order(trace)) == {pair}


def test_swap_blocked_orders_the_sections():
    trace = get_fixture("swap_blocked")
    assert races_of(trace, wcp_order(trace)) == set()
    assert lines(trace, 4, 7) in wcp_prec_closure(trace)


def test_gadget_pair_edges():
    trace = get_fixture("gadget_pair")
    wcp = wcp_prec_closure(trace)
    t2_lines = range(16, 25)
    for a, b in [(6, 17), (10, 20), (14, 22), (15, 24)]:
        # b is the first event of t2 that the release on line a precedes
        for later in t2_lines:
            assert (lines(trace, a, later) in wcp) == (later >= b), (a, later)

    # everything hangs off the x conflict, so no edge ends before t2's w(x)
    w_x = line_event(trace, 17)
    t2 = trace.events[w_x].tid
    for _, j in wcp.pairs():
        assert j >= w_x and trace.events[j].tid == t2


def test_no_conflicts_no_wcp_edges():
    trace = std("t1|acq|l\nt1|rel|l\nt2|acq|l\nt2|rel|l")
    assert len(wcp_prec_closure(trace)) == 0
    assert len(cp_prec_closure(trace)) == 0
    assert len(hb_closure(trace)) > 0


def test_wcp_is_closed_under_hb_composition():
    trace = get_fixture("nested_chain_tail")
    hb = hb_closure(trace)
    wcp = wcp_prec_closure(trace, hb=hb)
    assert np.array_equal(_compose(hb.bits, wcp.bits), wcp.bits)


def test_relations_nest_on_fixtures():
    for name, trace in fixtures().items():
        hb = hb_closure(trace)
        wcp_le, cp_le = wcp_order(trace), cp_order(trace)
        assert wcp_le.issubset(cp_le), name
        assert cp_le.issubset(hb), name
        assert races_of(trace, hb) <= races_of(trace, cp_le) <= races_of(trace, wcp_le), name


def test_bound(swappable):
    with pytest.raises(BoundExceeded):
        hb_closure(swappable, bound=3)
    with pytest.raises(BoundExceeded):
        oracle_report(swappable, bound=7)


def test_races_need_a_partial_order(swappable):
    with pytest.raises(ValueError):
        races_of(swappable, wcp_prec_closure(swappable))


def test_report(swappable):
    report = oracle_report(swappable)
    assert set(report.prec) == {"HB", "CPprec", "WCPprec"}
    assert report.races["WCPle"] == [(0, 7)]
    assert report.races["HB"] == []
    rendered = report.render()
    assert "ORACLE_RACE|WCPle|0|7" in rendered
    assert "WCPle.races=1" in rendered
    assert wcp_order(swappable).kind == RelationKind.WCP_LE


def test_rule_b_between_sections_of_one_thread():
    trace = std(OWN_SECTION_ORDERING)
    wcp = wcp_prec_closure(trace)
    assert (9, 18) in wcp
    assert (0, 19) in wcp
    assert races_of(trace, wcp_order(trace)) == set()
