"""
Punto de entrada de la aplicación FastAPI - hjrate.
"""
from fastapi import FastAPI

from hjrate.core.config import settings
from hjrate.core.logging import configure_logging
from hjrate.api import checks, health, sweeps


configure_logging(settings.log_level)

# Crear instancia de FastAPI
app = FastAPI(
    title=settings.project_name,
    version=settings.version,
    description=settings.description,
    docs_url="/docs",
    redoc_url="/redoc"
)

# Incluir routers
app.include_router(health.router)
app.include_router(checks.router)
app.include_router(sweeps.router)


@app.get("/", tags=["Root"])
def root():
    """
    Endpoint raíz de la API.

    Retorna información básica de la API.
    """
    return {
        "message": "API de tasas de viscosidad evanescente",
        "version": settings.version,
        "description": settings.description,
        "docs": "/docs",
        "verbs": ["certify", "envelope-check", "ledger", "sweeps"],
        "storage": "En memoria (sin base de datos)"
    }


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "hjrate.main:app",
        host=settings.app_host,
        port=settings.app_port,
        reload=True if settings.app_env == "development" else False,
        log_level=settings.log_level.lower()
    )
