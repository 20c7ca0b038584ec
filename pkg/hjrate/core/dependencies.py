"""
Dependencias reutilizables de FastAPI.
"""
from fastapi import Depends, HTTPException, status
from typing import Annotated

from hjrate.core.config import Settings, get_settings
from hjrate.core.exceptions import ConfigError, HJRateException
from hjrate.storage.data_models import StoredRun
from hjrate.storage.in_memory_store import get_run


SettingsDep = Annotated[Settings, Depends(get_settings)]


def get_stored_run(run_id: str) -> StoredRun:
    """
    Obtiene un barrido registrado.

    Raises:
        HTTPException: Si el ID no existe
    """
    run = get_run(run_id)
    if run is None:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail="Barrido no encontrado"
        )
    return run


def to_http_error(exc: HJRateException) -> HTTPException:
    """
    Traduce una excepción del dominio a HTTP.

    Errores de configuración → 422; el resto de fallos del dominio → 400.
    """
    code = status.HTTP_422_UNPROCESSABLE_ENTITY if isinstance(exc, ConfigError) else status.HTTP_400_BAD_REQUEST
    return HTTPException(status_code=code, detail=str(exc))
