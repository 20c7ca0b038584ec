"""
Endpoints de certificación, batería de envolventes y ledgers.
"""
from fastapi import APIRouter

from hjrate.core.dependencies import to_http_error
from hjrate.core.exceptions import HJRateException
from hjrate.models.requests import (
    CertifyRequest,
    CertifyResponse,
    EnvelopeCheckConfig,
    EnvelopeCheckResponse,
    LedgerRequest,
    LedgerResponse,
)
from hjrate.services.harness_service import HarnessService


router = APIRouter(prefix="/api", tags=["Verificaciones"])


@router.post("/certify", response_model=CertifyResponse)
def certify_endpoint(request: CertifyRequest):
    """
    Audita por muestreo las constantes declaradas de H y F.

    - **problem**: Problema completo
    - **samples**: Número de muestras (opcional)
    - **seed**: Semilla del muestreo

    Un certificado fallido se devuelve con `passed = false`, no como error.
    """
    try:
        return HarnessService.certify(request.problem, request.samples, request.seed)
    except HJRateException as exc:
        raise to_http_error(exc)


@router.post("/envelope-check", response_model=EnvelopeCheckResponse)
def envelope_check_endpoint(config: EnvelopeCheckConfig):
    """
    Ejecuta la batería de cotas de las sup/inf-convoluciones para cada δ.
    """
    try:
        return HarnessService.envelope_check(config)
    except HJRateException as exc:
        raise to_http_error(exc)


@router.post("/ledger", response_model=LedgerResponse)
def ledger_endpoint(request: LedgerRequest):
    """
    Calcula el ledger del problema y la cota en cada (t, ε).
    """
    try:
        return LedgerResponse(summaries=HarnessService.ledger_summaries(request))
    except HJRateException as exc:
        raise to_http_error(exc)
