"""
Configuración de la aplicación.
"""
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    """Configuración de la aplicación."""

    model_config = SettingsConfigDict(
        env_prefix="HJRATE_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Configuración del servidor
    app_env: str = "development"
    app_host: str = "0.0.0.0"
    app_port: int = 8000

    # Configuración de logging
    log_level: str = "INFO"

    # Configuración de la aplicación
    project_name: str = "hjrate"
    version: str = "1.0.0"
    description: str = "Tasas de viscosidad evanescente para ecuaciones de Hamilton-Jacobi"

    # Configuración de los barridos
    seed: Optional[int] = None  # HJRATE_SEED tiene prioridad sobre la semilla del config
    workers: int = 1
    output_dir: str = "out"
    progress: bool = False

    # Constantes declaradas del arnés
    contamination_factor: float = 3.0
    bound_slack_factor: float = 3.0
    float_rtol: float = 1e-12
    certificate_samples: int = 10_000


# Instancia global de configuración
settings = Settings()


def get_settings() -> Settings:
    """Retorna la instancia global de configuración."""
    return settings
