"""
Race checking against per-variable access clocks, plus the optional second
pass that turns flagged events into deduplicated location-pair races.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import structlog

from app.core.config import settings
from app.core.errors import MemoryBudgetExceeded
from app.engines import get_engine
from app.engines.base_engine import BaseEngine
from app.models.report import Flag, RacePair
from app.models.trace import Event, EventKind, SymbolTable, Trace
from app.models.vector_time import BOTTOM, VectorTime

logger = structlog.get_logger(__name__)


@dataclass
class AccessClocks:
    """R_x and W_x: joins of the timestamps of all reads / writes of x so far"""

    reads: Dict[int, VectorTime] = field(default_factory=dict)
    writes: Dict[int, VectorTime] = field(default_factory=dict)

    def read_clock(self, var: int) -> VectorTime:
        return self.reads.get(var, BOTTOM)

    def write_clock(self, var: int) -> VectorTime:
        return self.writes.get(var, BOTTOM)


def _flag_for(event: Event, symbols: Optional[SymbolTable]) -> Flag:
    if symbols is None:
        var, tid = str(event.operand), str(event.tid)
    else:
        var, tid = symbols.vars.name(event.operand), symbols.threads.name(event.tid)
    return Flag(idx=event.idx, var=var, kind=event.kind.value, tid=tid, loc=event.location)


def check_access(
    event: Event,
    stamp: VectorTime,
    clocks: AccessClocks,
    symbols: Optional[SymbolTable] = None,
) -> Optional[Flag]:
    """Flag `event` if an earlier conflicting access is unordered with it.

    The access is always folded into R_x or W_x afterwards.
    """
    var = event.operand
    if event.kind == EventKind.READ:
        racy = not clocks.write_clock(var).leq(stamp)
        clocks.reads[var] = clocks.read_clock(var).join(stamp)
    elif event.kind == EventKind.WRITE:
        racy = not clocks.read_clock(var).join(clocks.write_clock(var)).leq(stamp)
        clocks.writes[var] = clocks.write_clock(var).join(stamp)
    else:
        return None
    return _flag_for(event, symbols) if racy else None


class RaceReporter:
    """Pass-1 reporter bound to one engine run"""

    def __init__(self, engine: BaseEngine, symbols: Optional[SymbolTable] = None):
        self.engine = engine
        self.symbols = symbols
        self.clocks = AccessClocks()
        self.flags: List[Flag] = []

    def observe(self, event: Event, stamp: VectorTime) -> Optional[Flag]:
        if not event.kind.is_access:
            return None
        flag = check_access(event, stamp, self.clocks, self.symbols)
        if flag is not None:
            self.flags.append(flag)
        return flag

    def process(self, event: Event) -> Optional[Flag]:
        return self.observe(event, self.engine.process(event))


@dataclass(slots=True)
class _Access:
    idx: int
    tid: int
    is_write: bool
    loc: str
    stamp: VectorTime


class PairResolver:
    """Second pass: replays the trace and pairs each flagged access with
    every earlier conflicting access it is unordered with."""

    def __init__(
        self,
        trace: Trace,
        flags: List[Flag],
        detector: str,
        pair_budget: Optional[int] = None,
        engine_kwargs: Optional[dict] = None,
    ):
        self.trace = trace
        self.flags = flags
        self.detector = detector
        self.pair_budget = settings.pair_budget if pair_budget is None else pair_budget
        self.engine_kwargs = engine_kwargs or {}
        self.degraded_vars: List[str] = []

    def _flagged(self) -> Tuple[Set[int], Set[int]]:
        flagged_idx = {flag.idx for flag in self.flags}
        flagged_vars: Set[int] = set()
        for flag in self.flags:
            var = self.trace.symbols.vars.lookup(flag.var)
            if var is not None:
                flagged_vars.add(var)
        return flagged_idx, flagged_vars

    def resolve(self) -> List[RacePair]:
        if not self.flags:
            return []
        flagged_idx, flagged_vars = self._flagged()
        engine = get_engine(self.detector, **self.engine_kwargs)
        retained: Dict[int, List[_Access]] = {var: [] for var in flagged_vars}
        total_retained = 0
        pairs: Dict[Tuple[str, str], RacePair] = {}
        first_witness: Optional[Tuple[int, int]] = None

        for event, stamp in engine.run(self.trace.events):
            if not event.kind.is_access or event.operand not in retained:
                continue
            history = retained[event.operand]
            is_write = event.kind == EventKind.WRITE
            if event.idx in flagged_idx:
                witness = self._pair_up(event, stamp, is_write, history, pairs)
                if witness is not None and first_witness is None:
                    first_witness = witness
            access = _Access(event.idx, event.tid, is_write, event.location, stamp)
            try:
                self._retain(history, access, total_retained)
                total_retained += 1
            except MemoryBudgetExceeded as exc:
                logger.warning(
                    "Pair budget exceeded, reporting flags only for variable",
                    var=exc.var,
                    budget=exc.budget,
                    detector=self.detector,
                )
                self.degraded_vars.append(exc.var)
                total_retained -= len(history)
                del retained[event.operand]

        if first_witness is not None:
            for pair in pairs.values():
                if self._contains_witness(pair, first_witness):
                    pair.sound = True
                    break
        return list(pairs.values())

    def _retain(self, history: List[_Access], access: _Access, total: int) -> None:
        if total >= self.pair_budget:
            raise MemoryBudgetExceeded(self.trace.symbols.vars.name(self.trace.events[access.idx].operand), self.pair_budget)
        history.append(access)

    def _pair_up(
        self,
        event: Event,
        stamp: VectorTime,
        is_write: bool,
        history: List[_Access],
        pairs: Dict[Tuple[str, str], RacePair],
    ) -> Optional[Tuple[int, int]]:
        """Record every race ending at `event`; returns its nearest witness"""
        nearest: Optional[Tuple[int, int]] = None
        loc2 = event.location
        for earlier in history:
            if earlier.tid == event.tid or not (earlier.is_write or is_write):
                continue
            if earlier.stamp.leq(stamp) or stamp.leq(earlier.stamp):
                continue
            key = tuple(sorted((earlier.loc, loc2)))
            distance = event.idx - earlier.idx
            pair = pairs.get(key)
            if pair is None:
                pair = RacePair(locs=key, count=0, min_distance=distance, example=(earlier.idx, event.idx))
                pairs[key] = pair
            pair.count += 1
            if distance < pair.min_distance:
                pair.min_distance = distance
                pair.example = (earlier.idx, event.idx)
            if nearest is None or earlier.idx > nearest[0]:
                nearest = (earlier.idx, event.idx)
        return nearest

    def _contains_witness(self, pair: RacePair, witness: Tuple[int, int]) -> bool:
        e1, e2 = (self.trace.events[i] for i in witness)
        return pair.locs == tuple(sorted((e1.location, e2.location)))


def resolve_pairs(
    trace: Trace,
    flags: List[Flag],
    detector: str,
    pair_budget: Optional[int] = None,
) -> List[RacePair]:
    """Deduplicated location-pair races for the flagged events of one detector"""
    return PairResolver(trace, flags, detector, pair_budget).resolve()
