"""
Streaming WCP timestamp engine.

Each thread t carries a local clock N_t, a WCP-predecessor clock P_t and an
HB clock H_t; the timestamp of an event of t is C_t = P_t[t := N_t]. Each lock
keeps the clocks of its last release and one shared history of critical
sections (acquire time, release HB time) that every thread drains with its own
cursor when it releases that lock.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Set, Tuple

import structlog

from app.core.errors import EngineError, InvariantViolation
from app.engines.base_engine import BaseEngine
from app.models.trace import Event, SymbolTable
from app.models.vector_time import BOTTOM, VectorTime

logger = structlog.get_logger(__name__)


@dataclass(slots=True)
class HistoryEntry:
    owner: int
    acq_time: VectorTime
    rel_time: Optional[VectorTime] = None  # None while the section is open

    @property
    def pending(self) -> bool:
        return self.rel_time is None


@dataclass(slots=True)
class OpenSection:
    lock: int
    entry: HistoryEntry
    read_set: Set[int] = field(default_factory=set)
    write_set: Set[int] = field(default_factory=set)


@dataclass(slots=True)
class ThreadClocks:
    tid: int
    N: int = 1
    P: VectorTime = BOTTOM
    H: VectorTime = BOTTOM
    pending_increment: bool = False
    cs_stack: List[OpenSection] = field(default_factory=list)

    @property
    def C(self) -> VectorTime:
        return self.P.with_component(self.tid, self.N)

    def open_locks(self) -> List[int]:
        seen: List[int] = []
        for frame in self.cs_stack:
            if frame.lock not in seen:
                seen.append(frame.lock)
        return seen


@dataclass(slots=True)
class LockClocks:
    P: VectorTime = BOTTOM
    H: VectorTime = BOTTOM
    history: Deque[HistoryEntry] = field(default_factory=deque)
    base: int = 0  # absolute position of history[0]
    cursors: Dict[int, int] = field(default_factory=dict)
    holder: Optional[int] = None

    @property
    def end(self) -> int:
        return self.base + len(self.history)

    def entry_at(self, position: int) -> HistoryEntry:
        return self.history[position - self.base]


class WcpState:
    """Full engine state, exposed for inspection and tests"""

    def __init__(self) -> None:
        self.threads: Dict[int, ThreadClocks] = {}
        self.locks: Dict[int, LockClocks] = {}
        # (lock, var) -> releasing thread -> join of that thread's release H times
        self.read_clocks: Dict[Tuple[int, int], Dict[int, VectorTime]] = {}
        self.write_clocks: Dict[Tuple[int, int], Dict[int, VectorTime]] = {}

    def lock(self, lock: int) -> LockClocks:
        state = self.locks.get(lock)
        if state is None:
            state = LockClocks()
            self.locks[lock] = state
        return state


class WcpEngine(BaseEngine):
    """Assigns WCP timestamps so that a ≤WCP b iff C_a ⊑ C_b"""

    name = "wcp"

    def __init__(
        self,
        check_invariants: Optional[bool] = None,
        last_events: Optional[Dict[int, int]] = None,
    ):
        """`last_events` maps each thread to the index of its final event and
        turns on history garbage collection (two-pass mode only)."""
        super().__init__(check_invariants)
        self.state = WcpState()
        self._queue_load = 0
        self._max_queue_load = 0
        self._gc = last_events is not None
        self._last_events = dict(last_events or {})
        self._retired: Set[int] = set()
        self._live: Set[int] = set()
        self._previous: Dict[int, Tuple[VectorTime, VectorTime, VectorTime]] = {}
        if self._gc:
            for tid in self._last_events:
                self._live.add(tid)

    # Thread bookkeeping

    def _thread(self, t: int) -> ThreadClocks:
        clocks = self.state.threads.get(t)
        if clocks is None:
            clocks = ThreadClocks(tid=t, H=BOTTOM.with_component(t, 1))
            self.state.threads[t] = clocks
            self._register(t)
        return clocks

    def _register(self, t: int) -> None:
        if t in self._live or t in self._retired:
            return
        self._live.add(t)
        # a new thread sees every entry already in every history
        self._queue_load += sum(len(lock.history) for lock in self.state.locks.values())
        self._bump_load()

    def _tick(self, t: int) -> ThreadClocks:
        clocks = self._thread(t)
        if clocks.pending_increment:
            clocks.N += 1
            clocks.H = clocks.H.with_component(t, clocks.N)
            clocks.pending_increment = False
        return clocks

    def _bump_load(self) -> None:
        if self._queue_load > self._max_queue_load:
            self._max_queue_load = self._queue_load

    # Lock-access clocks

    def lock_access_clock(
        self, lock: int, var: int, write: bool, exclude: Optional[int] = None
    ) -> VectorTime:
        """Join of release HB times of sections over `lock` that read (or wrote) `var`"""
        table = self.state.write_clocks if write else self.state.read_clocks
        result = BOTTOM
        for owner, clock in table.get((lock, var), {}).items():
            if owner != exclude:
                result = result.join(clock)
        return result

    @staticmethod
    def _record_access(
        table: Dict[Tuple[int, int], Dict[int, VectorTime]],
        lock: int,
        variables: Set[int],
        t: int,
        H: VectorTime,
    ) -> None:
        for var in variables:
            per_thread = table.setdefault((lock, var), {})
            per_thread[t] = per_thread.get(t, BOTTOM).join(H)

    # Event handlers

    def acquire(self, t: int, lock: int) -> VectorTime:
        clocks = self._tick(t)
        lock_state = self.state.lock(lock)
        if lock_state.holder is not None:
            raise EngineError(f"lock {lock} acquired by thread {t} while held by {lock_state.holder}")
        lock_state.holder = t

        clocks.H = clocks.H.join(lock_state.H)
        clocks.P = clocks.P.join(lock_state.P)
        stamp = clocks.C

        entry = HistoryEntry(owner=t, acq_time=stamp)
        lock_state.history.append(entry)
        self._queue_load += len(self._live) - (1 if t in self._live else 0)
        self._bump_load()

        clocks.cs_stack.append(OpenSection(lock=lock, entry=entry))
        return stamp

    def release(self, t: int, lock: int) -> VectorTime:
        clocks = self._tick(t)
        if not clocks.cs_stack or clocks.cs_stack[-1].lock != lock:
            raise EngineError(f"thread {t} releases lock {lock} which is not its innermost open section")
        lock_state = self.state.lock(lock)

        self._drain(clocks, lock_state)

        frame = clocks.cs_stack.pop()
        self._record_access(self.state.read_clocks, lock, frame.read_set, t, clocks.H)
        self._record_access(self.state.write_clocks, lock, frame.write_set, t, clocks.H)

        lock_state.H = clocks.H
        lock_state.P = clocks.P
        frame.entry.rel_time = clocks.H
        lock_state.holder = None

        if clocks.cs_stack:
            outer = clocks.cs_stack[-1]
            outer.read_set |= frame.read_set
            outer.write_set |= frame.write_set

        clocks.pending_increment = True
        if self._gc:
            self._compact(lock_state)
        return clocks.C

    def _drain(self, clocks: ThreadClocks, lock_state: LockClocks) -> None:
        """Join the release time of every earlier section whose acquire strictly
        WCP-precedes this release.

        Own sections count too. Entries are in acquire order and an acquire
        HB-precedes the next one, so the drained entries form a prefix.
        """
        t = clocks.tid
        position = max(lock_state.cursors.get(t, 0), lock_state.base)
        end = lock_state.end
        while position < end:
            entry = lock_state.entry_at(position)
            if entry.rel_time is None:
                if entry.owner != t:
                    raise EngineError(f"thread {t} reached an open critical section of thread {entry.owner}")
                break  # the section being released
            if not entry.acq_time.leq(clocks.P):
                break
            clocks.P = clocks.P.join(entry.rel_time)
            if entry.owner != t:
                self._queue_load -= 1
            position += 1
        lock_state.cursors[t] = position

    def _access(self, t: int, var: int, write: bool) -> VectorTime:
        clocks = self._tick(t)
        if clocks.cs_stack:
            for lock in clocks.open_locks():
                clocks.P = clocks.P.join(self.lock_access_clock(lock, var, write=True, exclude=t))
                if write:
                    clocks.P = clocks.P.join(self.lock_access_clock(lock, var, write=False, exclude=t))
            top = clocks.cs_stack[-1]
            (top.write_set if write else top.read_set).add(var)
        return clocks.C

    def read(self, t: int, var: int) -> VectorTime:
        return self._access(t, var, write=False)

    def write(self, t: int, var: int) -> VectorTime:
        return self._access(t, var, write=True)

    def fork(self, t: int, u: int) -> VectorTime:
        clocks = self._tick(t)
        if u == t or u in self.state.threads:
            raise EngineError(f"thread {t} forks already active thread {u}")
        child = ThreadClocks(tid=u, P=clocks.P, H=clocks.H.join(BOTTOM.with_component(u, 1)))
        self.state.threads[u] = child
        self._register(u)
        stamp = clocks.C
        # later events of the parent must not precede the child
        clocks.pending_increment = True
        return stamp

    def join(self, t: int, u: int) -> VectorTime:
        if u == t:
            raise EngineError(f"thread {t} joins itself")
        clocks = self._tick(t)
        child = self.state.threads.get(u)
        if child is None:
            logger.warning("Join of unknown thread ignored", thread=t, child=u)
            return clocks.C
        clocks.H = clocks.H.join(child.H)
        clocks.P = clocks.P.join(child.P)
        return clocks.C

    # History garbage collection

    def after_event(self, event: Event) -> None:
        if self.check_invariants:
            self._check_invariants(event.tid)
        if self._gc and self._last_events.get(event.tid) == event.idx:
            self._retire(event.tid)

    def _retire(self, t: int) -> None:
        self._live.discard(t)
        self._retired.add(t)
        for lock_state in self.state.locks.values():
            position = max(lock_state.cursors.pop(t, 0), lock_state.base)
            for p in range(position, lock_state.end):
                if lock_state.entry_at(p).owner != t:
                    self._queue_load -= 1
            self._compact(lock_state)

    def _compact(self, lock_state: LockClocks) -> None:
        if not lock_state.history:
            return
        if self._live:
            floor = min(lock_state.cursors.get(t, 0) for t in self._live)
        else:
            floor = lock_state.end
        while lock_state.base < floor and lock_state.history:
            lock_state.history.popleft()
            lock_state.base += 1

    # Inspection

    def snapshot(self, t: int) -> Tuple[VectorTime, VectorTime, VectorTime]:
        """(C_t, P_t, H_t) as of the last processed event"""
        clocks = self.state.threads[t]
        return clocks.C, clocks.P, clocks.H

    @property
    def max_queue_load(self) -> int:
        return self._max_queue_load

    @property
    def queue_load(self) -> int:
        return self._queue_load

    def history_length(self, lock: int) -> int:
        state = self.state.locks.get(lock)
        return len(state.history) if state else 0

    def _check_invariants(self, t: int) -> None:
        clocks = self.state.threads[t]
        C, P, H = clocks.C, clocks.P, clocks.H
        if H.get(t) != clocks.N:
            raise InvariantViolation(f"H_t(t) = {H.get(t)} but N_t = {clocks.N} for thread {t}")
        if not (P.leq(C) and C.leq(H)):
            raise InvariantViolation(f"P ⊑ C ⊑ H fails for thread {t}: {P!r} {C!r} {H!r}")
        previous = self._previous.get(t)
        if previous is not None:
            for label, before, after in zip("CPH", previous, (C, P, H)):
                if not before.leq(after):
                    raise InvariantViolation(f"{label} decreased along thread {t}")
        self._previous[t] = (C, P, H)

    def timestamp_line(self, event: Event, symbols: SymbolTable) -> str:
        C, P, H = self.snapshot(event.tid)
        width = len(symbols.threads)
        return (
            f"{event.idx}|{symbols.threads.name(event.tid)}"
            f"|C={C.render(width)}|P={P.render(width)}|H={H.render(width)}"
        )
