from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from app.core.config import settings


class Command(str, Enum):
    ANALYZE = "analyze"
    VALIDATE = "validate"
    GENERATE = "generate"
    ORACLE = "oracle"


class GenParams(BaseModel):
    """Knobs for the random well-formed trace generator"""
    threads: int = Field(default=3, ge=1)
    locks: int = Field(default=2, ge=0)
    vars: int = Field(default=3, ge=1)
    events: int = Field(default=40, ge=0)
    p_lock: float = Field(default=0.3, ge=0.0, le=1.0)
    p_write: float = Field(default=0.5, ge=0.0, le=1.0)
    p_release: float = Field(default=0.35, ge=0.0, le=1.0)
    max_nesting: int = Field(default=2, ge=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    dangling: bool = False
    fork_join: bool = False


class RunConfig(BaseModel):
    command: Command = Command.ANALYZE
    detector: str = Field(default_factory=lambda: settings.default_detector)
    input: Optional[str] = None  # path, "-" or None for stdin
    pairs: bool = False
    dump_timestamps: bool = False
    pair_budget: int = Field(default_factory=lambda: settings.pair_budget, ge=1)
    gc_history: bool = Field(default_factory=lambda: settings.gc_history)
    metrics_out: Optional[str] = None
    trace_format: str = "std"
    output: Optional[str] = None

    # generate
    fixture: Optional[str] = None
    bits: Optional[Tuple[str, str]] = None
    gen: Optional[GenParams] = None

    # oracle
    oracle_bound: int = Field(default_factory=lambda: settings.oracle_bound, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "RunConfig":
        if self.detector not in ("wcp", "hb", "both"):
            raise ValueError(f"unknown detector '{self.detector}'")
        if self.trace_format != "std":
            raise ValueError(f"unsupported trace format '{self.trace_format}'")
        if self.command == Command.GENERATE:
            chosen = [self.fixture is not None, self.bits is not None, self.gen is not None]
            if sum(chosen) != 1:
                raise ValueError("generate needs exactly one of --fixture, --gen-bits, --gen-random")
        elif self.input is None and self.fixture is None:
            self.input = "-"
        return self

    @property
    def buffered(self) -> bool:
        """Whether the whole trace is held in memory (two-pass, or GC which needs each thread's last event)"""
        return self.pairs or self.gc_history
