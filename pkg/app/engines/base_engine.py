from abc import ABC, abstractmethod
from typing import Dict, Iterable, Iterator, Optional, Tuple

import structlog

from app.core.config import settings
from app.core.errors import EngineError
from app.models.trace import Event, EventKind, SymbolTable
from app.models.vector_time import VectorTime

logger = structlog.get_logger(__name__)


class BaseEngine(ABC):
    """Base class for streaming timestamp engines"""

    def __init__(self, check_invariants: Optional[bool] = None):
        self.check_invariants = (
            settings.check_invariants if check_invariants is None else check_invariants
        )
        self.events_processed = 0

    @property
    @abstractmethod
    def name(self) -> str:
        """Detector name used in reports"""
        pass

    @abstractmethod
    def acquire(self, t: int, lock: int) -> VectorTime:
        pass

    @abstractmethod
    def release(self, t: int, lock: int) -> VectorTime:
        pass

    @abstractmethod
    def read(self, t: int, var: int) -> VectorTime:
        pass

    @abstractmethod
    def write(self, t: int, var: int) -> VectorTime:
        pass

    @abstractmethod
    def fork(self, t: int, u: int) -> VectorTime:
        pass

    @abstractmethod
    def join(self, t: int, u: int) -> VectorTime:
        pass

    @abstractmethod
    def timestamp_line(self, event: Event, symbols: SymbolTable) -> str:
        """Debug dump line for the event just processed"""
        pass

    def process(self, event: Event) -> VectorTime:
        """Dispatch one event and return its timestamp C_e"""
        kind = event.kind
        if kind == EventKind.ACQUIRE:
            stamp = self.acquire(event.tid, event.operand)
        elif kind == EventKind.RELEASE:
            stamp = self.release(event.tid, event.operand)
        elif kind == EventKind.READ:
            stamp = self.read(event.tid, event.operand)
        elif kind == EventKind.WRITE:
            stamp = self.write(event.tid, event.operand)
        elif kind == EventKind.FORK:
            stamp = self.fork(event.tid, event.operand)
        elif kind == EventKind.JOIN:
            stamp = self.join(event.tid, event.operand)
        else:
            raise EngineError(f"unsupported event kind {kind}")
        self.events_processed += 1
        self.after_event(event)
        return stamp

    def after_event(self, event: Event) -> None:
        """Hook run after every processed event"""

    def run(self, events: Iterable[Event]) -> Iterator[Tuple[Event, VectorTime]]:
        for event in events:
            yield event, self.process(event)

    @property
    def max_queue_load(self) -> int:
        return 0

    def metrics(self) -> Dict[str, int]:
        return {
            "events": self.events_processed,
            "max_queue_load": self.max_queue_load,
        }
