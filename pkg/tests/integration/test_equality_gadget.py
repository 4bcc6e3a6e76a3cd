import random
from itertools import product

import pytest

from app.engines.wcp_engine import WcpEngine
from app.services.oracle import races_of, wcp_order
from app.services.race_reporter import RaceReporter
from app.services.tracegen import gen_equality_trace


def bitstrings(n):
    return ["".join(bits) for bits in product("01", repeat=n)]


def z_writes(trace):
    z = trace.symbols.vars.lookup("z")
    return [e.idx for e in trace.events if e.operand == z and e.kind.is_access]


def wcp_races_on_z(trace):
    reporter = RaceReporter(WcpEngine(), trace.symbols)
    for event in trace.events:
        reporter.process(event)
    return any(flag.var == "z" for flag in reporter.flags)


@pytest.mark.parametrize("n", range(1, 7))
def test_engine_decides_equality(n):
    strings = bitstrings(n)
    for u in strings:
        for v in strings:
            assert wcp_races_on_z(gen_equality_trace(u, v)) == (u != v), (u, v)


@pytest.mark.parametrize("n", range(1, 5))
def test_oracle_agrees(n):
    strings = bitstrings(n)
    for u in strings:
        for v in strings:
            trace = gen_equality_trace(u, v)
            first, second = z_writes(trace)
            racy = (first, second) in races_of(trace, wcp_order(trace))
            assert racy == (u != v), (u, v)


def test_random_long_strings():
    rng = random.Random(2017)
    for round_no in range(100):
        u = "".join(rng.choice("01") for _ in range(16))
        v = u if round_no % 2 == 0 else "".join(rng.choice("01") for _ in range(16))
        assert wcp_races_on_z(gen_equality_trace(u, v)) == (u != v), (u, v)
