"""
Trace model: events, interning tables and the derived critical-section views.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple


class EventKind(str, Enum):
    ACQUIRE = "acq"
    RELEASE = "rel"
    READ = "r"
    WRITE = "w"
    FORK = "fork"
    JOIN = "join"

    @property
    def is_access(self) -> bool:
        return self in (EventKind.READ, EventKind.WRITE)

    @property
    def is_lock_op(self) -> bool:
        return self in (EventKind.ACQUIRE, EventKind.RELEASE)

    @property
    def is_thread_op(self) -> bool:
        return self in (EventKind.FORK, EventKind.JOIN)


class Interner:
    """Dense interning of one id namespace"""

    def __init__(self) -> None:
        self._index: Dict[str, int] = {}
        self.names: List[str] = []

    def intern(self, name: str) -> int:
        idx = self._index.get(name)
        if idx is None:
            idx = len(self.names)
            self._index[name] = idx
            self.names.append(name)
        return idx

    def lookup(self, name: str) -> Optional[int]:
        return self._index.get(name)

    def name(self, idx: int) -> str:
        return self.names[idx]

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._index


class SymbolTable:
    """Thread, lock and variable namespaces, kept disjoint"""

    def __init__(self) -> None:
        self.threads = Interner()
        self.locks = Interner()
        self.vars = Interner()

    def operand_table(self, kind: EventKind) -> Interner:
        if kind.is_lock_op:
            return self.locks
        if kind.is_access:
            return self.vars
        return self.threads


@dataclass(slots=True)
class Event:
    idx: int
    tid: int
    kind: EventKind
    operand: int
    loc: Optional[str] = None

    @property
    def location(self) -> str:
        return self.loc if self.loc is not None else f"idx:{self.idx}"


def conflicting(e1: Event, e2: Event) -> bool:
    """Same variable, different threads, at least one write"""
    return (
        e1.kind.is_access
        and e2.kind.is_access
        and e1.operand == e2.operand
        and e1.tid != e2.tid
        and (e1.kind == EventKind.WRITE or e2.kind == EventKind.WRITE)
    )


@dataclass
class CriticalSection:
    lock: int
    tid: int
    acquire: int
    release: Optional[int] = None
    # events of `tid` from the acquire through the release, in trace order
    members: List[int] = field(default_factory=list)

    @property
    def closed(self) -> bool:
        return self.release is not None


class Trace:
    """An ordered event sequence plus the tables its ids were interned in"""

    def __init__(self, events: List[Event], symbols: SymbolTable):
        self.events = events
        self.symbols = symbols
        self._sections: Optional[List[CriticalSection]] = None
        self._section_of_acquire: Dict[int, CriticalSection] = {}
        self._section_of_release: Dict[int, CriticalSection] = {}
        self._enclosing: Optional[List[Tuple[CriticalSection, ...]]] = None

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, idx: int) -> Event:
        return self.events[idx]

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def n_threads(self) -> int:
        return len(self.symbols.threads)

    @property
    def n_locks(self) -> int:
        return len(self.symbols.locks)

    @property
    def n_vars(self) -> int:
        return len(self.symbols.vars)

    def thread_name(self, tid: int) -> str:
        return self.symbols.threads.name(tid)

    def operand_name(self, event: Event) -> str:
        return self.symbols.operand_table(event.kind).name(event.operand)

    # Critical-section views

    def _index_sections(self) -> None:
        sections: List[CriticalSection] = []
        enclosing: List[Tuple[CriticalSection, ...]] = []
        stacks: Dict[int, List[CriticalSection]] = {}
        for e in self.events:
            stack = stacks.setdefault(e.tid, [])
            if e.kind == EventKind.ACQUIRE:
                cs = CriticalSection(lock=e.operand, tid=e.tid, acquire=e.idx)
                sections.append(cs)
                self._section_of_acquire[e.idx] = cs
                stack.append(cs)
            for open_cs in stack:
                open_cs.members.append(e.idx)
            enclosing.append(tuple(stack))
            if e.kind == EventKind.RELEASE:
                # innermost open section on this lock
                for pos in range(len(stack) - 1, -1, -1):
                    if stack[pos].lock == e.operand:
                        cs = stack.pop(pos)
                        cs.release = e.idx
                        self._section_of_release[e.idx] = cs
                        break
        self._sections = sections
        self._enclosing = enclosing

    @property
    def sections(self) -> List[CriticalSection]:
        if self._sections is None:
            self._index_sections()
        assert self._sections is not None
        return self._sections

    def match(self, acquire_idx: int) -> Optional[int]:
        """Index of the release matching an acquire, if any"""
        self.sections
        cs = self._section_of_acquire.get(acquire_idx)
        return cs.release if cs else None

    def critical_section(self, idx: int) -> Optional[CriticalSection]:
        """CS(e) for an acquire or release event"""
        self.sections
        return self._section_of_acquire.get(idx) or self._section_of_release.get(idx)

    def enclosing_sections(self, idx: int) -> Tuple[CriticalSection, ...]:
        """Sections containing event idx, outermost first"""
        self.sections
        assert self._enclosing is not None
        return self._enclosing[idx]

    def in_lock(self, idx: int, lock: int) -> bool:
        """e ∈ ℓ"""
        return any(cs.lock == lock for cs in self.enclosing_sections(idx))


class TraceBuilder:
    """Incrementally builds a Trace from named records"""

    def __init__(self) -> None:
        self.symbols = SymbolTable()
        self.events: List[Event] = []

    def add(self, tid: str, kind: EventKind, operand: str, loc: Optional[str] = None) -> Event:
        table = self.symbols.operand_table(kind)
        event = Event(
            idx=len(self.events),
            tid=self.symbols.threads.intern(tid),
            kind=kind,
            operand=table.intern(operand),
            loc=loc,
        )
        self.events.append(event)
        return event

    def append(self, event: Event) -> Event:
        event.idx = len(self.events)
        self.events.append(event)
        return event

    def extend(self, records: Iterable[Tuple[str, EventKind, str, Optional[str]]]) -> None:
        for tid, kind, operand, loc in records:
            self.add(tid, kind, operand, loc)

    def build(self) -> Trace:
        return Trace(self.events, self.symbols)
