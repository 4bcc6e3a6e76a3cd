"""
Helpers shared by unit and integration tests
"""
import textwrap
from typing import List

from app.engines import get_engine
from app.models.run_config import GenParams
from app.models.trace import Trace
from app.models.vector_time import VectorTime
from app.services.trace_parser import parse_trace


def std(text: str, flatten: bool = False) -> Trace:
    """Parse an indented STD snippet"""
    return parse_trace(textwrap.dedent(text).strip() + "\n", flatten=flatten)


def stamps(detector: str, trace: Trace, **engine_kwargs) -> List[VectorTime]:
    """Timestamp of every event, in trace order"""
    engine = get_engine(detector, **engine_kwargs)
    return [stamp for _, stamp in engine.run(trace.events)]


def random_params(seed: int, fork_join: bool = False) -> GenParams:
    """Small-trace generator settings derived from the seed"""
    threads = 2 + seed % 3
    events = 10 + seed % 41
    if fork_join:
        events = max(events, 2 * (threads - 1) + 4)
    return GenParams(
        threads=threads,
        locks=1 + seed % 3,
        vars=1 + seed % 4,
        events=events,
        p_lock=0.35,
        p_write=0.5,
        p_release=0.35,
        max_nesting=2,
        seed=seed,
        fork_join=fork_join,
    )


def vt(*components: int) -> VectorTime:
    return VectorTime(components)


# v's write of y reaches t's read only through rule (b) between two
# critical sections of t on lock L
OWN_SECTION_ORDERING = """
v|w|y
v|acq|n
v|rel|n
t|acq|L
t|acq|m
t|w|x
t|rel|m
t|acq|n
t|rel|n
t|rel|L
u|acq|m
u|r|x
u|rel|m
u|acq|k
u|rel|k
t|acq|L
t|acq|k
t|rel|k
t|rel|L
t|r|y
"""
