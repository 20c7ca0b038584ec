"""
Almacenamiento en archivos: funciones de malla, envolventes, soluciones,
ledgers y reportes de barrido.

Toda escritura es atómica (archivo temporal en el mismo directorio y luego
os.replace). Los reales se escriben con 17 dígitos significativos para que la
lectura recupere los mismos bits.
"""
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from hjrate.core.exceptions import GridError, ReportIOError
from hjrate.models.reports import EnvelopeCheckReport
from hjrate.models.sweep import SweepReport
from hjrate.storage.data_models import EnvelopeResult, Solution
from hjrate.structures.grid import Grid, GridFn

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

REPORT_FILE = "report.json"
SWEEP_FILE = "sweep.csv"
PLOT_FILE = "plot.dat"

SWEEP_COLUMNS = [
    "epsilon", "time", "points_per_axis", "sup_error", "error_plus", "error_minus",
    "bound_rhs", "discretization_proxy", "contaminated", "bound_satisfied",
]


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_text_atomic(path: PathLike, text: str) -> Path:
    """
    Escribe texto de forma atómica.

    Raises:
        ReportIOError: Si el directorio no es escribible o falla la escritura
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(handle, "w", encoding="utf-8", newline="\n") as stream:
                stream.write(text)
            os.replace(temporary, path)
        except BaseException:
            if os.path.exists(temporary):
                os.unlink(temporary)
            raise
    except OSError as exc:
        raise ReportIOError(f"No se pudo escribir: {exc.strerror or exc}", str(path))
    logger.info("Archivo escrito: %s", path)
    return path


def read_text(path: PathLike) -> str:
    """
    Raises:
        ReportIOError: Si el archivo no se puede leer
    """
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"No se pudo leer: {exc.strerror or exc}", str(path))


def write_model(model: BaseModel, path: PathLike) -> Path:
    """Serializa un modelo Pydantic como JSON indentado."""
    return write_text_atomic(path, model.model_dump_json(indent=2) + "\n")


# ---------------------------------------------------------------------------
# Funciones de malla y envolventes
# ---------------------------------------------------------------------------

def gridfn_to_csv(f: GridFn) -> str:
    """CSV `index,x[,y],value` en orden lexicográfico."""
    grid = f.grid
    axes = ["x", "y"][:grid.dim]
    coords = grid.coordinates().reshape(-1, grid.dim)
    lines = [",".join(["index", *axes, "value"])]
    for index, (point, value) in enumerate(zip(coords, f.flat())):
        lines.append(",".join([str(index), *(_fmt(c) for c in point), _fmt(value)]))
    return "\n".join(lines) + "\n"


def gridfn_from_csv(text: str, length: Optional[float] = None) -> GridFn:
    """
    Reconstruye una función de malla desde su CSV.

    Args:
        text: Contenido CSV
        length: Longitud L del toro (por defecto N·h deducido de las coordenadas)

    Raises:
        GridError: Si el encabezado o el número de filas es inválido
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise GridError("CSV vacío")
    header = lines[0].split(",")
    if header not in (["index", "x", "value"], ["index", "x", "y", "value"]):
        raise GridError(f"Encabezado inválido: {lines[0]}")
    dim = len(header) - 2
    rows = np.array([[float(cell) for cell in line.split(",")] for line in lines[1:]])
    size = rows.shape[0]
    points = int(round(size ** (1.0 / dim)))
    if points ** dim != size:
        raise GridError(f"{size} filas no forman una malla N^{dim}")
    if length is None:
        if points < 2:
            raise GridError("No se puede deducir L con un solo nodo por eje")
        spacing = rows[1 if dim == 1 else points, 1]
        length = spacing * points
    return GridFn(Grid(dim, points, length), rows[:, -1])


def write_gridfn(f: GridFn, path: PathLike) -> Path:
    return write_text_atomic(path, gridfn_to_csv(f))


def read_gridfn(path: PathLike, length: Optional[float] = None) -> GridFn:
    return gridfn_from_csv(read_text(path), length)


def write_envelope(
    result: EnvelopeResult,
    path: PathLike,
    checks: Optional[EnvelopeCheckReport] = None,
) -> Dict[str, Path]:
    """
    CSV `index,envelope,arg_index` y un JSON {delta, kind, checks} junto a él.

    Returns:
        Rutas escritas (csv, sidecar)
    """
    path = Path(path)
    arg = result.arg_flat_indices().ravel()
    lines = ["index,envelope,arg_index"]
    for index, (value, target) in enumerate(zip(result.envelope.flat(), arg)):
        lines.append(f"{index},{_fmt(value)},{int(target)}")
    csv_path = write_text_atomic(path, "\n".join(lines) + "\n")

    sidecar = {
        "delta": result.delta,
        "kind": result.kind.value,
        "checks": {} if checks is None else {
            check.name: {"passed": check.passed, "measured": check.measured,
                         "bound": check.bound, "slack": check.slack}
            for check in checks.checks
        },
    }
    if checks is not None:
        sidecar["checks"]["sandwich"] = {"passed": checks.sandwich}
    json_path = write_text_atomic(path.with_suffix(".json"), json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return {"csv": csv_path, "sidecar": json_path}


# ---------------------------------------------------------------------------
# Soluciones
# ---------------------------------------------------------------------------

def write_solution(solution: Solution, directory: PathLike) -> Path:
    """
    Una instantánea CSV por tiempo y un manifest.json.

    Returns:
        Ruta del manifiesto
    """
    directory = Path(directory)
    files: List[str] = []
    for index, (_, values) in enumerate(solution.snapshots):
        name = f"snapshot_{index:03d}.csv"
        write_gridfn(values, directory / name)
        files.append(name)
    manifest = {
        "epsilon": solution.epsilon,
        "times": solution.times,
        "files": files,
        "dt_history_summary": {
            "steps": solution.steps,
            "dt_min": solution.dt_min,
            "dt_max": solution.dt_max,
        },
        "cfl_used": solution.cfl_used,
        "residual": solution.residual,
        "iterations": solution.iterations,
    }
    return write_text_atomic(directory / "manifest.json", json.dumps(manifest, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Reportes de barrido
# ---------------------------------------------------------------------------

def sweep_csv(report: SweepReport) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in report.rows:
        lines.append(",".join([
            _fmt(row.epsilon), _fmt(row.time), str(row.points_per_axis),
            _fmt(row.sup_error), _fmt(row.error_plus), _fmt(row.error_minus),
            _fmt(row.bound_rhs), _fmt(row.discretization_proxy),
            str(row.contaminated).lower(), str(row.bound_satisfied).lower(),
        ]))
    return "\n".join(lines) + "\n"


def _log10(value: float) -> str:
    return _fmt(math.log10(value)) if value > 0 else "nan"


def plot_data(report: SweepReport) -> str:
    """Columnas separadas por espacios: log10 ε, log10 error, log10 cota, t, N."""
    lines = ["# log10_epsilon log10_sup_error log10_bound_rhs time points_per_axis"]
    for row in report.rows:
        lines.append(" ".join([
            _log10(row.epsilon), _log10(row.sup_error), _log10(row.bound_rhs),
            _fmt(row.time), str(row.points_per_axis),
        ]))
    return "\n".join(lines) + "\n"


def write_report_files(report: SweepReport, output_dir: PathLike) -> Dict[str, Path]:
    """
    Escribe report.json, sweep.csv y plot.dat.

    Raises:
        ReportIOError: Si falla alguna escritura
    """
    directory = Path(output_dir)
    return {
        "report": write_model(report, directory / REPORT_FILE),
        "csv": write_text_atomic(directory / SWEEP_FILE, sweep_csv(report)),
        "plot": write_text_atomic(directory / PLOT_FILE, plot_data(report)),
    }


def read_report_file(path: PathLike) -> SweepReport:
    """
    Lee un report.json (o el directorio que lo contiene).

    Raises:
        ReportIOError: Si no se puede leer o no es un reporte válido
    """
    path = Path(path)
    if path.is_dir():
        path = path / REPORT_FILE
    text = read_text(path)
    try:
        return SweepReport.model_validate_json(text)
    except ValidationError as exc:
        raise ReportIOError(f"Reporte inválido: {exc.error_count()} errores de validación", str(path))
