"""
Trace generators: random well-formed traces, the equality gadget and the
scaling workload.
"""
import random
from typing import Dict, Iterator, List, Optional

import structlog

from app.core.errors import LengthMismatch
from app.models.run_config import GenParams
from app.models.trace import Event, EventKind, SymbolTable, Trace, TraceBuilder
from app.services.fixtures import Line, expand_lines

logger = structlog.get_logger(__name__)


def _check_bits(u: str, v: str) -> None:
    if len(u) != len(v):
        raise LengthMismatch(f"bit strings differ in length: {len(u)} vs {len(v)}")
    if not u:
        raise LengthMismatch("bit strings must be non-empty")
    if set(u + v) - {"0", "1"}:
        raise LengthMismatch(f"bit strings must be binary: {u!r}, {v!r}")


def equality_gadget_lines(u: str, v: str, final_writes: bool = True) -> List[Line]:
    """Line program whose two w(z) events are WCP-ordered iff u == v.

    t1 runs one section per bit of u over lock l<bit>, t3 keeps a chain of
    m-sections interleaved with t1 through acrl(y), and t2 replays the bits of
    v as sections over l<bit> separated by m-sections.
    """
    _check_bits(u, v)
    n = len(u)
    lines: List[Line] = [
        ("t1", "acq", f"l{u[0]}"),
        ("t1", "w", "x"),
        ("t3", "acq", "m"),
        ("t3", "acrl", "y"),
        ("t1", "acrl", "y"),
        ("t1", "rel", f"l{u[0]}"),
    ]
    for i in range(1, n):
        lock = f"l{u[i]}"
        lines += [
            ("t1", "acq", lock),
            ("t1", "acrl", "y"),
            ("t3", "acrl", "y"),
            ("t3", "rel", "m"),
            ("t3", "acq", "m"),
            ("t3", "acrl", "y"),
            ("t1", "acrl", "y"),
            ("t1", "rel", lock),
        ]
    if final_writes:
        lines.append(("t3", "w", "z"))
    lines.append(("t3", "rel", "m"))
    for j in range(n):
        lock = f"l{v[j]}"
        lines.append(("t2", "acq", lock))
        if j == 0:
            lines.append(("t2", "w", "x"))
        lines += [("t2", "rel", lock), ("t2", "acq", "m"), ("t2", "rel", "m")]
    if final_writes:
        lines.append(("t2", "w", "z"))
    return lines


def gen_equality_trace(u: str, v: str) -> Trace:
    """WCP race on z exactly when u != v"""
    return expand_lines(equality_gadget_lines(u, v))


class _RandomTraceWriter:
    def __init__(self, params: GenParams):
        self.params = params
        self.rng = random.Random(params.seed)
        self.builder = TraceBuilder()
        self.threads = [f"t{i + 1}" for i in range(params.threads)]
        self.locks = [f"l{i}" for i in range(params.locks)]
        self.vars = [f"x{i}" for i in range(params.vars)]
        self.holder: Dict[str, str] = {}
        self.stacks: Dict[str, List[str]] = {t: [] for t in self.threads}
        self.open_total = 0

    def emit(self, thread: str, kind: EventKind, operand: str) -> None:
        self.builder.add(thread, kind, operand)
        if kind == EventKind.ACQUIRE:
            self.holder[operand] = thread
            self.stacks[thread].append(operand)
            self.open_total += 1
        elif kind == EventKind.RELEASE:
            del self.holder[operand]
            self.stacks[thread].pop()
            self.open_total -= 1

    def release_top(self, thread: str) -> None:
        self.emit(thread, EventKind.RELEASE, self.stacks[thread][-1])

    def step(self, remaining: int) -> None:
        p, rng = self.params, self.rng
        if not p.dangling and remaining <= self.open_total:
            busy = [t for t in self.threads if self.stacks[t]]
            self.release_top(rng.choice(busy))
            return

        thread = rng.choice(self.threads)
        stack = self.stacks[thread]
        if stack and rng.random() < p.p_release:
            self.release_top(thread)
            return

        free = [lock for lock in self.locks if lock not in self.holder]
        can_open = (
            free
            and len(stack) < p.max_nesting
            and (p.dangling or remaining >= self.open_total + 2)
        )
        if can_open and rng.random() < p.p_lock:
            self.emit(thread, EventKind.ACQUIRE, rng.choice(free))
            return

        kind = EventKind.WRITE if rng.random() < p.p_write else EventKind.READ
        self.emit(thread, kind, rng.choice(self.vars))

    def build(self) -> Trace:
        p = self.params
        main, children = self.threads[0], self.threads[1:]
        budget = p.events
        if p.fork_join and children:
            budget -= 2 * len(children)
            if budget < 0:
                raise ValueError(f"{p.events} events cannot fit fork/join of {p.threads} threads")
            for child in children:
                self.emit(main, EventKind.FORK, child)
        for remaining in range(budget, 0, -1):
            self.step(remaining)
        if p.fork_join:
            for child in children:
                self.emit(main, EventKind.JOIN, child)
        return self.builder.build()


def gen_random(params: GenParams) -> Trace:
    """Seed-deterministic random trace; well-formed unless `dangling` is set"""
    trace = _RandomTraceWriter(params).build()
    logger.debug("Generated random trace", seed=params.seed, events=trace.n_events)
    return trace


def iter_scaling_events(
    events: int,
    threads: int = 8,
    locks: int = 32,
    vars_per_lock: int = 2,
    seed: int = 0,
    symbols: Optional[SymbolTable] = None,
) -> Iterator[Event]:
    """Lazily produce a well-formed lock-heavy workload of exactly `events` events.

    Every lock guards its own small set of variables and accesses inside a
    section touch only those, so conflicting sections on a lock are common.
    Accesses outside sections pick any variable. Nothing is buffered, which
    keeps generation of very long traces at constant memory.
    """
    symbols = symbols if symbols is not None else SymbolTable()
    rng = random.Random(seed)
    tids = [symbols.threads.intern(f"t{i + 1}") for i in range(threads)]
    lock_ids = [symbols.locks.intern(f"l{i}") for i in range(locks)]
    guarded = {
        lock: [symbols.vars.intern(f"x{lock}_{k}") for k in range(vars_per_lock)]
        for lock in lock_ids
    }
    all_vars = [var for group in guarded.values() for var in group]
    holder: Dict[int, int] = {}
    held: Dict[int, Optional[int]] = {tid: None for tid in tids}

    for idx in range(events):
        remaining = events - idx
        open_count = len(holder)
        tid = rng.choice(tids)
        lock = held[tid]

        if remaining <= open_count:
            tid = next(t for t in tids if held[t] is not None)
            lock = held[tid]
            kind, operand = EventKind.RELEASE, lock
        elif lock is not None and rng.random() < 0.3:
            kind, operand = EventKind.RELEASE, lock
        elif lock is None and remaining >= open_count + 3 and rng.random() < 0.3:
            free = rng.choice(lock_ids)
            if free in holder:
                kind, operand = EventKind.READ, rng.choice(all_vars)
            else:
                kind, operand = EventKind.ACQUIRE, free
        else:
            pool = guarded[lock] if lock is not None else all_vars
            kind = EventKind.WRITE if rng.random() < 0.3 else EventKind.READ
            operand = rng.choice(pool)

        if kind == EventKind.ACQUIRE:
            holder[operand] = tid
            held[tid] = operand
        elif kind == EventKind.RELEASE:
            del holder[operand]
            held[tid] = None
        yield Event(idx, tid, kind, operand)


def gen_scaling_trace(events: int, threads: int = 8, locks: int = 32, seed: int = 0) -> Trace:
    symbols = SymbolTable()
    return Trace(list(iter_scaling_events(events, threads, locks, seed=seed, symbols=symbols)), symbols)
