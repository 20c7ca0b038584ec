"""
Registro en memoria de los barridos completados por el servicio HTTP.
"""
from typing import Dict, List, Optional
from datetime import datetime
import uuid

from hjrate.models.sweep import SweepReport
from hjrate.storage.data_models import StoredRun


# Diccionario global de ejecuciones
runs_db: Dict[str, StoredRun] = {}


def save_run(report: SweepReport, output_dir: Optional[str] = None) -> StoredRun:
    """Registra un reporte y le asigna un ID."""
    run = StoredRun(
        id=str(uuid.uuid4()),
        kind=report.kind.value,
        report=report,
        created_at=datetime.now(),
        output_dir=output_dir,
    )
    runs_db[run.id] = run
    return run


def get_run(run_id: str) -> StoredRun | None:
    """Obtiene una ejecución por su ID."""
    return runs_db.get(run_id)


def list_runs() -> List[StoredRun]:
    """Ejecuciones ordenadas por fecha de creación."""
    return sorted(runs_db.values(), key=lambda run: run.created_at)


def clear_runs() -> None:
    """Vacía el registro (usado por los tests)."""
    runs_db.clear()
