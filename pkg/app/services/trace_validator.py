"""
Well-formedness checks: lock semantics, well-nestedness and thread lifecycle.
"""
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple

import structlog

from app.models.report import ValidationReport, ViolationKind
from app.models.trace import Event, EventKind, Trace, TraceBuilder

logger = structlog.get_logger(__name__)


class ReentrancyFilter:
    """Drops inner acquire/release pairs of re-entrant locks.

    Only the 0→1 depth transition of a (thread, lock) pair passes through as
    an acquire and only the 1→0 transition as a release.
    """

    def __init__(self) -> None:
        self._depth: Dict[Tuple[int, int], int] = {}
        self.flattened = 0

    def admit(self, event: Event) -> bool:
        if not event.kind.is_lock_op:
            return True
        key = (event.tid, event.operand)
        depth = self._depth.get(key, 0)
        if event.kind == EventKind.ACQUIRE:
            self._depth[key] = depth + 1
            if depth > 0:
                self.flattened += 1
                return False
            return True
        if depth > 1:
            self._depth[key] = depth - 1
            return False
        self._depth.pop(key, None)
        return True

    def filter(self, events: Iterable[Event]) -> Iterator[Event]:
        for event in events:
            if self.admit(event):
                yield event


def flatten(trace: Trace) -> Tuple[Trace, int]:
    """Copy of `trace` with re-entrant inner pairs removed and indices renumbered"""
    reentrancy = ReentrancyFilter()
    builder = TraceBuilder()
    builder.symbols = trace.symbols
    for event in reentrancy.filter(trace.events):
        builder.append(Event(idx=0, tid=event.tid, kind=event.kind, operand=event.operand, loc=event.loc))
    if reentrancy.flattened:
        logger.info("Flattened re-entrant lock pairs", count=reentrancy.flattened)
    return builder.build(), reentrancy.flattened


def validate(trace: Trace) -> ValidationReport:
    """Check lock semantics and nesting; every issue lands in the report"""
    report = ValidationReport(events=trace.n_events)
    holder: Dict[int, Tuple[int, int]] = {}  # lock -> (tid, depth)
    stacks: Dict[int, List[Tuple[int, int]]] = {}  # tid -> [(lock, acquire idx)]
    seen: Set[int] = set()
    forked: Set[int] = set()
    joined: Dict[int, int] = {}  # tid -> idx of join

    def lock_name(e: Event) -> str:
        return trace.symbols.locks.name(e.operand)

    for e in trace.events:
        thread = trace.thread_name(e.tid)
        if e.tid in joined:
            report.add(
                e.idx,
                ViolationKind.JOIN_OF_LIVE_THREAD,
                f"{thread} has an event after being joined at {joined.pop(e.tid)}",
            )
        seen.add(e.tid)
        stack = stacks.setdefault(e.tid, [])

        if e.kind == EventKind.ACQUIRE:
            held = holder.get(e.operand)
            if held is None:
                holder[e.operand] = (e.tid, 1)
                stack.append((e.operand, e.idx))
            elif held[0] == e.tid:
                holder[e.operand] = (e.tid, held[1] + 1)
                report.add(
                    e.idx,
                    ViolationKind.REENTRANT_FLATTENED,
                    f"{thread} re-acquires held lock {lock_name(e)}",
                )
            else:
                report.add(
                    e.idx,
                    ViolationKind.DOUBLE_ACQUIRE,
                    f"{thread} acquires {lock_name(e)} held by {trace.thread_name(held[0])}",
                )

        elif e.kind == EventKind.RELEASE:
            held = holder.get(e.operand)
            if held is None or held[0] != e.tid:
                report.add(
                    e.idx,
                    ViolationKind.UNMATCHED_RELEASE,
                    f"{thread} releases {lock_name(e)} which it does not hold",
                )
            elif held[1] > 1:
                holder[e.operand] = (e.tid, held[1] - 1)
            else:
                del holder[e.operand]
                if stack and stack[-1][0] != e.operand:
                    report.add(
                        e.idx,
                        ViolationKind.BAD_NESTING,
                        f"{thread} releases {lock_name(e)} while "
                        f"{trace.symbols.locks.name(stack[-1][0])} is innermost",
                    )
                for pos in range(len(stack) - 1, -1, -1):
                    if stack[pos][0] == e.operand:
                        del stack[pos]
                        break

        elif e.kind == EventKind.FORK:
            child = trace.symbols.threads.name(e.operand)
            if e.operand == e.tid or e.operand in seen or e.operand in forked:
                report.add(e.idx, ViolationKind.FORK_OF_KNOWN_THREAD, f"{thread} forks known thread {child}")
            forked.add(e.operand)

        elif e.kind == EventKind.JOIN:
            child = trace.symbols.threads.name(e.operand)
            if stacks.get(e.operand):
                report.add(
                    e.idx,
                    ViolationKind.JOIN_OF_LIVE_THREAD,
                    f"{thread} joins {child} while it holds locks",
                )
            joined[e.operand] = e.idx

    for tid in sorted(stacks):
        for lock, acquire_idx in stacks[tid]:
            report.add(
                acquire_idx,
                ViolationKind.DANGLING_CRITICAL_SECTION,
                f"{trace.thread_name(tid)} never releases {trace.symbols.locks.name(lock)}",
            )

    report.violations.sort(key=lambda v: v.idx)
    if report.violations:
        logger.info(
            "Trace validation finished",
            ok=report.ok,
            errors=len(report.errors),
            warnings=len(report.warnings),
        )
    return report


def first_error(report: ValidationReport) -> Optional[str]:
    errors = report.errors
    return f"{errors[0].kind.value} at {errors[0].idx}: {errors[0].message}" if errors else None
