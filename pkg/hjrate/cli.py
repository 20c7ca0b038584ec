"""
Línea de comandos `hjrate`.

Códigos de salida: 0 si todas las verificaciones pasan, 1 si se viola una cota,
un invariante o un certificado (o falla una resolución), 2 ante errores de uso
o de configuración.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, ValidationError

from hjrate.core.config import settings
from hjrate.core.exceptions import ConfigError, HJRateException, ReportIOError
from hjrate.core.logging import configure_logging
from hjrate.models.problem import ProblemConfig
from hjrate.models.requests import EnvelopeCheckConfig, LedgerRequest
from hjrate.models.sweep import SweepConfig, SweepReport
from hjrate.services.harness_service import HarnessService
from hjrate.storage import file_store

logger = logging.getLogger("hjrate.cli")

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(raw: Dict[str, Any], assignment: str) -> None:
    """
    Aplica `clave.ruta=valor` sobre el JSON crudo.

    El valor se interpreta como JSON cuando es posible; si no, queda como texto.
    Los segmentos numéricos indexan listas.

    Raises:
        ConfigError: Si la asignación no tiene '=' o la ruta no existe
    """
    if "=" not in assignment:
        raise ConfigError(f"Override sin '=': {assignment}")
    path, text = assignment.split("=", 1)
    keys = path.strip().split(".")
    if not all(keys):
        raise ConfigError(f"Ruta de override inválida: {path}")
    node: Any = raw
    for key in keys[:-1]:
        if isinstance(node, list):
            try:
                node = node[int(key)]
            except (ValueError, IndexError):
                raise ConfigError(f"Índice inválido '{key}' en {path}")
        elif isinstance(node, dict):
            node = node.setdefault(key, {})
        else:
            raise ConfigError(f"'{key}' no es un objeto en {path}")
    last = keys[-1]
    if isinstance(node, list):
        try:
            node[int(last)] = _parse_value(text)
        except (ValueError, IndexError):
            raise ConfigError(f"Índice inválido '{last}' en {path}")
    elif isinstance(node, dict):
        node[last] = _parse_value(text)
    else:
        raise ConfigError(f"No se puede asignar en {path}")


def load_config(path: str, overrides: Sequence[str] = ()) -> Dict[str, Any]:
    """
    Lee un JSON de configuración y aplica los overrides.

    Raises:
        ConfigError: Si el archivo no existe o no es JSON válido
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"No se pudo leer {path}: {exc.strerror or exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON inválido en {path}: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} debe contener un objeto JSON")
    for assignment in overrides:
        apply_override(raw, assignment)
    return raw


def _problem_section(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Acepta un problema suelto o cualquier configuración con clave 'problem'."""
    return raw["problem"] if "problem" in raw else raw


def _print(model: BaseModel) -> None:
    print(model.model_dump_json(indent=2))


def _report_status(report: SweepReport) -> int:
    ok = report.all_bounds_satisfied and report.rate_consistent and report.certificates_passed
    return EXIT_OK if ok else EXIT_VIOLATION


def _summarize(report: SweepReport) -> None:
    rows = report.rows
    contaminated = sum(row.contaminated for row in rows)
    rate = "n/d" if report.fitted_rate is None else f"{report.fitted_rate:.4f}"
    interval = "" if report.fitted_interval is None else \
        f" [{report.fitted_interval[0]:.4f}, {report.fitted_interval[1]:.4f}]"
    print(f"{report.name} ({report.kind.value}, referencia {report.reference.value})")
    print(f"  ε ∈ [{report.epsilon_range[0]:g}, {report.epsilon_range[1]:g}], {len(rows)} filas, "
          f"{contaminated} contaminadas")
    print(f"  pendiente ajustada {rate}{interval}, exponente teórico {report.theoretical_exponent:.4f}")
    print(f"  cotas {'ok' if report.all_bounds_satisfied else 'VIOLADAS'}, "
          f"certificados {'ok' if report.certificates_passed else 'FALLIDOS'}")
    for note in report.notes:
        print(f"  - {note}")


# ---------------------------------------------------------------------------
# Verbos
# ---------------------------------------------------------------------------

def cmd_certify(args: argparse.Namespace) -> int:
    raw = load_config(args.config, args.override)
    problem = ProblemConfig.model_validate(_problem_section(raw))
    result = HarnessService.certify(problem, args.samples, args.seed)
    _print(result)
    return EXIT_OK if result.passed else EXIT_VIOLATION


def _sweep(args: argparse.Namespace, stationary: bool) -> int:
    raw = load_config(args.config, args.override)
    config = SweepConfig.model_validate(raw)
    output_dir = args.out or config.output_dir or settings.output_dir
    config = config.model_copy(update={"output_dir": output_dir})
    runner = HarnessService.run_stationary_sweep if stationary else HarnessService.run_sweep
    report = runner(config, workers=args.workers, progress=args.progress or settings.progress)
    _summarize(report)
    print(f"  archivos en {output_dir}")
    return _report_status(report)


def cmd_sweep(args: argparse.Namespace) -> int:
    return _sweep(args, stationary=False)


def cmd_stationary_sweep(args: argparse.Namespace) -> int:
    return _sweep(args, stationary=True)


def cmd_envelope_check(args: argparse.Namespace) -> int:
    raw = load_config(args.config, args.override)
    result = HarnessService.envelope_check(EnvelopeCheckConfig.model_validate(raw))
    if args.out:
        file_store.write_model(result, Path(args.out) / "envelope_check.json")
    _print(result)
    return EXIT_OK if result.passed else EXIT_VIOLATION


def cmd_report(args: argparse.Namespace) -> int:
    report = HarnessService.read_report(args.input)
    if args.out:
        HarnessService.emit_report(report, args.out)
    _summarize(report)
    return _report_status(report)


def cmd_ledger(args: argparse.Namespace) -> int:
    raw = load_config(args.config, args.override)
    if "problem" in raw:
        request = LedgerRequest.model_validate({
            "problem": raw["problem"],
            **{key: raw[key] for key in ("times", "epsilons", "ledger_mesh") if key in raw},
        })
    else:
        request = LedgerRequest(problem=ProblemConfig.model_validate(raw))
    summaries = HarnessService.ledger_summaries(request)
    print(json.dumps([summary.model_dump(mode="json") for summary in summaries], indent=2))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run(
        "hjrate.main:app",
        host=args.host or settings.app_host,
        port=args.port or settings.app_port,
        log_level=settings.log_level.lower(),
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hjrate",
        description="Tasas de viscosidad evanescente para ecuaciones de Hamilton-Jacobi",
    )
    parser.add_argument("--log-level", default=None, help="Nivel de logging (por defecto HJRATE_LOG_LEVEL)")
    verbs = parser.add_subparsers(dest="verb", required=True)

    def configured(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        sub = verbs.add_parser(name, help=help_text)
        sub.add_argument("--config", required=True, help="Archivo JSON de configuración")
        sub.add_argument("--override", action="append", default=[], metavar="K=V",
                         help="Reemplaza clave.ruta=valor antes de validar (repetible)")
        sub.set_defaults(handler=handler)
        return sub

    certify = configured("certify", cmd_certify, "Certifica las constantes de H y F")
    certify.add_argument("--samples", type=int, default=None)
    certify.add_argument("--seed", type=int, default=0)

    for name, handler, help_text in (
        ("sweep", cmd_sweep, "Barrido en ε de un problema de evolución"),
        ("stationary-sweep", cmd_stationary_sweep, "Barrido en ε de un problema estacionario"),
    ):
        sub = configured(name, handler, help_text)
        sub.add_argument("--workers", type=int, default=None, help="Hilos para las resoluciones")
        sub.add_argument("--out", default=None, help="Directorio de salida")
        sub.add_argument("--progress", action="store_true", help="Muestra una barra de progreso")

    envelope = configured("envelope-check", cmd_envelope_check, "Batería de cotas de las convoluciones")
    envelope.add_argument("--out", default=None, help="Directorio para envelope_check.json")

    configured("ledger", cmd_ledger, "Imprime el ledger y la cota de un problema")

    report = verbs.add_parser("report", help="Regenera CSV y plot.dat desde un report.json")
    report.add_argument("--input", required=True, help="report.json o su directorio")
    report.add_argument("--out", default=None, help="Directorio de salida")
    report.set_defaults(handler=cmd_report)

    serve = verbs.add_parser("serve", help="Inicia el servicio HTTP")
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level or settings.log_level)
    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as exc:
        logger.error("Configuración inválida: %s", exc)
        return EXIT_USAGE
    except ReportIOError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE if args.verb == "report" else EXIT_VIOLATION
    except HJRateException as exc:
        logger.error("%s", exc)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
