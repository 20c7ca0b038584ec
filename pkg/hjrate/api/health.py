"""
Endpoints de estado.
"""
from fastapi import APIRouter

from hjrate.core.dependencies import SettingsDep


router = APIRouter(tags=["Health"])


@router.get("/health")
def health_check(settings: SettingsDep):
    """
    Endpoint de verificación de salud.

    Retorna el estado de la API.
    """
    return {
        "status": "healthy",
        "environment": settings.app_env,
        "version": settings.version
    }
