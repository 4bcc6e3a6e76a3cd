"""
Analysis API endpoints
"""
from typing import Dict, List

import structlog
from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from app.core.config import settings
from app.core.errors import ParseError, RaceToolError, UnknownDetector, UnknownFixture
from app.engines import AVAILABLE_ENGINES
from app.models.report import AnalysisReport, ValidationReport
from app.services.analyzer import Analyzer
from app.services.fixtures import FIXTURE_LINES, get_fixture
from app.services.trace_parser import parse_trace, serialize
from app.services.trace_validator import validate

logger = structlog.get_logger(__name__)

router = APIRouter(prefix="/api/analysis", tags=["analysis"])


class TraceRequest(BaseModel):
    trace: str = Field(..., description="Trace in STD format")


class AnalyzeRequest(TraceRequest):
    detector: str = Field(default_factory=lambda: settings.default_detector)
    pairs: bool = True


class DetectorsResponse(BaseModel):
    detectors: List[str]


class FixturesResponse(BaseModel):
    total: int
    fixtures: List[str]


class FixtureResponse(BaseModel):
    name: str
    events: int
    trace: str


def _check_size(text: str) -> None:
    lines = sum(1 for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#"))
    if lines > settings.max_upload_events:
        raise HTTPException(
            status_code=413,
            detail=f"trace has {lines} events, limit is {settings.max_upload_events}",
        )


@router.get("/detectors", response_model=DetectorsResponse)
async def list_detectors() -> DetectorsResponse:
    """Registered detector names"""
    return DetectorsResponse(detectors=list(AVAILABLE_ENGINES))


@router.get("/fixtures", response_model=FixturesResponse)
async def list_fixtures() -> FixturesResponse:
    names = sorted(FIXTURE_LINES)
    return FixturesResponse(total=len(names), fixtures=names)


@router.get("/fixtures/{name}", response_model=FixtureResponse)
async def get_fixture_trace(name: str) -> FixtureResponse:
    """One built-in trace in STD format"""
    try:
        trace = get_fixture(name)
    except UnknownFixture:
        raise HTTPException(status_code=404, detail=f"Fixture '{name}' not found")
    return FixtureResponse(name=name, events=trace.n_events, trace=serialize(trace))


@router.post("/validate", response_model=ValidationReport)
async def validate_trace(request: TraceRequest) -> ValidationReport:
    _check_size(request.trace)
    try:
        trace = parse_trace(request.trace)
    except ParseError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return validate(trace)


@router.post("/analyze", response_model=AnalysisReport)
async def analyze_trace(request: AnalyzeRequest) -> AnalysisReport:
    """Run the selected detector(s) over an uploaded trace"""
    _check_size(request.trace)
    try:
        trace = parse_trace(request.trace, flatten=True)
        analyzer = Analyzer(request.detector, pairs=request.pairs)
        return analyzer.run_trace(trace)
    except UnknownDetector as e:
        raise HTTPException(status_code=400, detail=str(e))
    except RaceToolError as e:
        logger.error("Analysis request failed", error=str(e))
        raise HTTPException(status_code=400, detail=str(e))


@router.get("/summary/{name}", response_model=Dict[str, str])
async def fixture_summary(name: str, detector: str = "both") -> Dict[str, str]:
    """key=value metrics for a built-in trace"""
    try:
        trace = get_fixture(name)
        report = Analyzer(detector, pairs=True).run_trace(trace)
    except UnknownFixture:
        raise HTTPException(status_code=404, detail=f"Fixture '{name}' not found")
    except UnknownDetector as e:
        raise HTTPException(status_code=400, detail=str(e))
    return report.metrics()
