"""
Simulation endpoints: figure presets, scenario CSV and JSON reports.
"""

from typing import Any

from fastapi import APIRouter, HTTPException
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import PlainTextResponse

from app.core.errors import RelaxometerError
from app.models.schemas import ScenarioConfig, ScenarioReport
from app.services.scenarios import list_presets, report, run_scenario

router = APIRouter(tags=["simulation"])


@router.get("/presets")
async def get_presets() -> dict[str, dict[str, Any]]:
    """Figure presets with their parameters."""
    return list_presets()


@router.post("/report", response_model=ScenarioReport)
async def create_report(config: ScenarioConfig) -> ScenarioReport:
    """
    Rates, dephasing hierarchy, equilibrium state and relaxation time for a scenario.
    """
    try:
        return await run_in_threadpool(report, config)
    except RelaxometerError as e:
        raise HTTPException(status_code=400, detail=str(e))


@router.post("/scenario", response_class=PlainTextResponse)
async def create_scenario(config: ScenarioConfig) -> PlainTextResponse:
    """
    Time series of entropy, concurrence, purity and selected matrix elements as CSV.
    """
    try:
        csv_text = await run_in_threadpool(run_scenario, config)
    except RelaxometerError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return PlainTextResponse(csv_text, media_type="text/csv")
