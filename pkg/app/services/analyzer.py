"""
Analysis orchestration shared by the CLI and the HTTP API.
"""
import time
from typing import Callable, Dict, Iterable, List, Optional

import structlog

from app.engines import detector_names, get_engine
from app.models.report import AnalysisReport, DetectorSummary
from app.models.trace import Event, SymbolTable, Trace
from app.services.race_reporter import PairResolver, RaceReporter

logger = structlog.get_logger(__name__)

DumpSink = Callable[[str], None]


def last_event_index(trace: Trace) -> Dict[int, int]:
    """Index of the final event of every thread"""
    last: Dict[int, int] = {}
    for event in trace.events:
        last[event.tid] = event.idx
    return last


def log_report(report: AnalysisReport) -> None:
    logger.info(
        "Analysis finished",
        events=report.events,
        detectors=list(report.detectors),
        flags={name: len(s.flags) for name, s in report.detectors.items()},
        races={name: s.race_count for name, s in report.detectors.items()},
        max_queue_load=max((s.max_queue_load for s in report.detectors.values()), default=0),
        wall_time_s=round(report.wall_time_s, 3),
    )


class Analyzer:
    """Runs one or more detectors over a trace in a single pass"""

    def __init__(
        self,
        detector: str = "wcp",
        pairs: bool = False,
        pair_budget: Optional[int] = None,
        gc_history: bool = False,
        dump: Optional[DumpSink] = None,
        check_invariants: Optional[bool] = None,
    ):
        self.detectors: List[str] = detector_names(detector)
        self.pairs = pairs
        self.pair_budget = pair_budget
        self.gc_history = gc_history
        self.dump = dump
        self.check_invariants = check_invariants

    def _engine_kwargs(self, name: str, last_events: Optional[Dict[int, int]]) -> dict:
        kwargs: dict = {"check_invariants": self.check_invariants}
        if name == "wcp" and last_events is not None:
            kwargs["last_events"] = last_events
        return kwargs

    def run_stream(
        self,
        events: Iterable[Event],
        symbols: SymbolTable,
        last_events: Optional[Dict[int, int]] = None,
        flattened: int = 0,
    ) -> AnalysisReport:
        """Pass 1: timestamps and flags only, no per-event storage"""
        started = time.perf_counter()
        reporters = [
            RaceReporter(get_engine(name, **self._engine_kwargs(name, last_events)), symbols)
            for name in self.detectors
        ]
        count = 0
        for event in events:
            for reporter in reporters:
                reporter.process(event)
                if self.dump is not None:
                    self.dump(reporter.engine.timestamp_line(event, symbols))
            count += 1

        report = AnalysisReport(
            events=count,
            threads=len(symbols.threads),
            locks=len(symbols.locks),
            vars=len(symbols.vars),
            flattened=flattened,
        )
        for reporter in reporters:
            report.detectors[reporter.engine.name] = DetectorSummary(
                detector=reporter.engine.name,
                flags=reporter.flags,
                max_queue_load=reporter.engine.max_queue_load,
            )
        report.wall_time_s = time.perf_counter() - started
        return report

    def run_trace(self, trace: Trace, flattened: int = 0) -> AnalysisReport:
        """Pass 1 over a buffered trace, then pair resolution if requested"""
        started = time.perf_counter()
        last_events = last_event_index(trace) if self.gc_history else None
        report = self.run_stream(trace.events, trace.symbols, last_events, flattened)

        if self.pairs:
            for name, summary in report.detectors.items():
                resolver = PairResolver(
                    trace,
                    summary.flags,
                    name,
                    pair_budget=self.pair_budget,
                    engine_kwargs=self._engine_kwargs(name, last_events),
                )
                summary.pairs = resolver.resolve()
                summary.degraded_vars = resolver.degraded_vars
                summary.paired = True

        report.wall_time_s = time.perf_counter() - started
        log_report(report)
        return report


def analyze(
    trace: Trace,
    detector: str = "wcp",
    pairs: bool = False,
    pair_budget: Optional[int] = None,
    gc_history: bool = False,
) -> AnalysisReport:
    return Analyzer(detector, pairs=pairs, pair_budget=pair_budget, gc_history=gc_history).run_trace(trace)
