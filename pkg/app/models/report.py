"""
Report schemas shared by the CLI and the HTTP API.
"""
from enum import Enum
from typing import Dict, List, Tuple

from pydantic import BaseModel, Field, model_validator


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


class ViolationKind(str, Enum):
    DOUBLE_ACQUIRE = "DoubleAcquire"
    UNMATCHED_RELEASE = "UnmatchedRelease"
    BAD_NESTING = "BadNesting"
    REENTRANT_FLATTENED = "ReentrantFlattened"
    DANGLING_CRITICAL_SECTION = "DanglingCriticalSection"
    FORK_OF_KNOWN_THREAD = "ForkOfKnownThread"
    JOIN_OF_LIVE_THREAD = "JoinOfLiveThread"

    @property
    def severity(self) -> Severity:
        if self in (ViolationKind.REENTRANT_FLATTENED, ViolationKind.DANGLING_CRITICAL_SECTION):
            return Severity.WARNING
        return Severity.ERROR


class Violation(BaseModel):
    idx: int
    kind: ViolationKind
    message: str

    @property
    def severity(self) -> Severity:
        return self.kind.severity


class ValidationReport(BaseModel):
    ok: bool = True
    events: int = 0
    violations: List[Violation] = Field(default_factory=list)

    @model_validator(mode="after")
    def _derive_ok(self) -> "ValidationReport":
        self.ok = not any(v.severity == Severity.ERROR for v in self.violations)
        return self

    def add(self, idx: int, kind: ViolationKind, message: str) -> None:
        self.violations.append(Violation(idx=idx, kind=kind, message=message))
        if kind.severity == Severity.ERROR:
            self.ok = False

    @property
    def errors(self) -> List[Violation]:
        return [v for v in self.violations if v.severity == Severity.ERROR]

    @property
    def warnings(self) -> List[Violation]:
        return [v for v in self.violations if v.severity == Severity.WARNING]

    def render(self) -> List[str]:
        lines = [f"VALID|ok={int(self.ok)}|events={self.events}|violations={len(self.violations)}"]
        for v in self.violations:
            lines.append(f"VIOLATION|{v.severity.value}|{v.kind.value}|idx={v.idx}|{v.message}")
        return lines


class Flag(BaseModel):
    """Second component of a race, as seen in pass 1"""
    idx: int
    var: str
    kind: str
    tid: str
    loc: str

    def render(self, detector: str) -> str:
        return f"FLAG|{detector}|{self.idx}|{self.tid}|{self.kind}|{self.var}|{self.loc}"


class RacePair(BaseModel):
    locs: Tuple[str, str]
    count: int = 0
    min_distance: int = 0
    example: Tuple[int, int] = (0, 0)
    sound: bool = False

    def render(self, detector: str) -> str:
        return (
            f"RACE|{detector}|{self.locs[0]}|{self.locs[1]}|count={self.count}"
            f"|mindist={self.min_distance}|ex={self.example[0]},{self.example[1]}"
            f"|sound={int(self.sound)}"
        )


class DetectorSummary(BaseModel):
    detector: str
    flags: List[Flag] = Field(default_factory=list)
    pairs: List[RacePair] = Field(default_factory=list)
    paired: bool = False
    degraded_vars: List[str] = Field(default_factory=list)
    max_queue_load: int = 0

    @property
    def race_count(self) -> int:
        if self.paired:
            return len(self.pairs)
        return len({flag.loc for flag in self.flags})

    @property
    def has_races(self) -> bool:
        return bool(self.flags)


class AnalysisReport(BaseModel):
    events: int = 0
    threads: int = 0
    locks: int = 0
    vars: int = 0
    wall_time_s: float = 0.0
    flattened: int = 0
    detectors: Dict[str, DetectorSummary] = Field(default_factory=dict)

    @property
    def has_races(self) -> bool:
        return any(summary.has_races for summary in self.detectors.values())

    def metrics(self) -> Dict[str, str]:
        """Flat key=value metrics, one entry per line of the summary block"""
        out: Dict[str, str] = {
            "events": str(self.events),
            "threads": str(self.threads),
            "locks": str(self.locks),
            "vars": str(self.vars),
            "flattened": str(self.flattened),
        }
        for name, summary in self.detectors.items():
            out[f"{name}.flags"] = str(len(summary.flags))
            out[f"{name}.races"] = str(summary.race_count)
            if summary.detector == "wcp":
                pct = 100.0 * summary.max_queue_load / self.events if self.events else 0.0
                out[f"{name}.max_queue_load"] = str(summary.max_queue_load)
                out[f"{name}.max_queue_load_pct"] = f"{pct:.2f}"
            if summary.degraded_vars:
                out[f"{name}.degraded_vars"] = ",".join(summary.degraded_vars)
        out["wall_time_s"] = f"{self.wall_time_s:.3f}"
        return out

    def render(self, include_timing: bool = True) -> List[str]:
        lines = ["# WCP races are weakly sound: each reported race or a deadlock is predictable"]
        for name, summary in self.detectors.items():
            if summary.paired:
                lines.extend(pair.render(name) for pair in summary.pairs)
            else:
                lines.extend(flag.render(name) for flag in summary.flags)
        for key, value in self.metrics().items():
            if key == "wall_time_s" and not include_timing:
                continue
            lines.append(f"{key}={value}")
        return lines


class OracleReport(BaseModel):
    events: int
    prec: Dict[str, List[Tuple[int, int]]] = Field(default_factory=dict)
    races: Dict[str, List[Tuple[int, int]]] = Field(default_factory=dict)

    def render(self) -> List[str]:
        lines: List[str] = []
        for kind, pairs in self.prec.items():
            lines.extend(f"PREC|{kind}|{i}|{j}" for i, j in pairs)
        for kind, pairs in self.races.items():
            lines.extend(f"ORACLE_RACE|{kind}|{i}|{j}" for i, j in pairs)
        lines.append(f"events={self.events}")
        for kind, pairs in self.races.items():
            lines.append(f"{kind}.races={len(pairs)}")
        return lines
