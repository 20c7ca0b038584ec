"""
Endpoints de barridos en ε.
"""
from fastapi import APIRouter, Depends, status
from typing import Annotated, List

from hjrate.core.dependencies import get_stored_run, to_http_error
from hjrate.core.exceptions import HJRateException
from hjrate.models.requests import SweepRunResponse
from hjrate.models.sweep import SweepConfig
from hjrate.services.harness_service import HarnessService
from hjrate.storage.data_models import StoredRun
from hjrate.storage.in_memory_store import list_runs, save_run


router = APIRouter(prefix="/api/sweeps", tags=["Barridos"])


def _response(run: StoredRun) -> SweepRunResponse:
    return SweepRunResponse(
        id=run.id,
        kind=run.kind,
        passed=run.passed,
        created_at=run.created_at,
        report=run.report
    )


@router.post("", response_model=SweepRunResponse, status_code=status.HTTP_201_CREATED)
def run_sweep_endpoint(config: SweepConfig):
    """
    Ejecuta un barrido y lo registra.

    El tipo se deduce del problema: ρ = 0 evolución, ρ > 0 estacionario.
    La ejecución es síncrona; use mallas de escritorio.
    """
    try:
        if config.problem.rho > 0:
            report = HarnessService.run_stationary_sweep(config, progress=False)
        else:
            report = HarnessService.run_sweep(config, progress=False)
    except HJRateException as exc:
        raise to_http_error(exc)
    return _response(save_run(report, config.output_dir))


@router.get("", response_model=List[SweepRunResponse])
def list_sweeps():
    """Lista los barridos registrados."""
    return [_response(run) for run in list_runs()]


@router.get("/{run_id}", response_model=SweepRunResponse)
def get_sweep(run: Annotated[StoredRun, Depends(get_stored_run)]):
    """Obtiene un barrido registrado por su ID."""
    return _response(run)
