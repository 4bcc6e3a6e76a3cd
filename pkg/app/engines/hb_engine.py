"""
Happens-before baseline with plain vector clocks.

The local component of a thread is bumped lazily before the event that
follows a release or fork, the same policy the WCP engine uses, so the two
timestamp dumps line up.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Set

import structlog

from app.core.errors import EngineError, InvariantViolation
from app.engines.base_engine import BaseEngine
from app.models.trace import Event, SymbolTable
from app.models.vector_time import BOTTOM, VectorTime

logger = structlog.get_logger(__name__)


@dataclass(slots=True)
class HbThread:
    tid: int
    C: VectorTime
    pending_increment: bool = False


@dataclass
class HbState:
    threads: Dict[int, HbThread] = field(default_factory=dict)
    lock_clocks: Dict[int, VectorTime] = field(default_factory=dict)
    holders: Dict[int, int] = field(default_factory=dict)
    open_locks: Dict[int, list] = field(default_factory=dict)


class HbEngine(BaseEngine):
    """Timestamps with a ⊑ b iff a ≤HB b"""

    name = "hb"

    def __init__(self, check_invariants: Optional[bool] = None, **_: object):
        super().__init__(check_invariants)
        self.state = HbState()
        self._previous: Dict[int, VectorTime] = {}

    def _thread(self, t: int) -> HbThread:
        thread = self.state.threads.get(t)
        if thread is None:
            thread = HbThread(tid=t, C=BOTTOM.with_component(t, 1))
            self.state.threads[t] = thread
        return thread

    def _tick(self, t: int) -> HbThread:
        thread = self._thread(t)
        if thread.pending_increment:
            thread.C = thread.C.with_component(t, thread.C.get(t) + 1)
            thread.pending_increment = False
        return thread

    def acquire(self, t: int, lock: int) -> VectorTime:
        thread = self._tick(t)
        if lock in self.state.holders:
            raise EngineError(f"lock {lock} acquired by thread {t} while held by {self.state.holders[lock]}")
        self.state.holders[lock] = t
        self.state.open_locks.setdefault(t, []).append(lock)
        thread.C = thread.C.join(self.state.lock_clocks.get(lock, BOTTOM))
        return thread.C

    def release(self, t: int, lock: int) -> VectorTime:
        thread = self._tick(t)
        stack = self.state.open_locks.get(t)
        if not stack or stack[-1] != lock:
            raise EngineError(f"thread {t} releases lock {lock} which is not its innermost open section")
        stack.pop()
        del self.state.holders[lock]
        self.state.lock_clocks[lock] = thread.C
        thread.pending_increment = True
        return thread.C

    def read(self, t: int, var: int) -> VectorTime:
        return self._tick(t).C

    def write(self, t: int, var: int) -> VectorTime:
        return self._tick(t).C

    def fork(self, t: int, u: int) -> VectorTime:
        thread = self._tick(t)
        if u == t or u in self.state.threads:
            raise EngineError(f"thread {t} forks already active thread {u}")
        self.state.threads[u] = HbThread(tid=u, C=thread.C.join(BOTTOM.with_component(u, 1)))
        thread.pending_increment = True
        return thread.C

    def join(self, t: int, u: int) -> VectorTime:
        if u == t:
            raise EngineError(f"thread {t} joins itself")
        thread = self._tick(t)
        child = self.state.threads.get(u)
        if child is None:
            logger.warning("Join of unknown thread ignored", thread=t, child=u)
            return thread.C
        thread.C = thread.C.join(child.C)
        return thread.C

    def after_event(self, event: Event) -> None:
        if not self.check_invariants:
            return
        current = self.state.threads[event.tid].C
        previous = self._previous.get(event.tid)
        if previous is not None and not previous.leq(current):
            raise InvariantViolation(f"HB clock decreased along thread {event.tid}")
        self._previous[event.tid] = current

    def snapshot(self, t: int) -> VectorTime:
        return self.state.threads[t].C

    def timestamp_line(self, event: Event, symbols: SymbolTable) -> str:
        C = self.snapshot(event.tid)
        return f"HB|{event.idx}|{symbols.threads.name(event.tid)}|C={C.render(len(symbols.threads))}"
