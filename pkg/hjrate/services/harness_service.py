"""
Servicio del arnés: barridos en ε, ajuste de tasas empíricas, verificación de
cotas contra errores medidos y emisión de reportes.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from tqdm import tqdm

from hjrate.core.config import settings
from hjrate.core.exceptions import ConfigError, DegenerateLedgerError, FitError, HJRateException, SweepError
from hjrate.models.problem import ProblemConfig, StationaryParams
from hjrate.models.reports import LedgerSummary
from hjrate.models.requests import (
    CertifyResponse,
    EnvelopeCheckConfig,
    EnvelopeCheckResponse,
    LedgerRequest,
)
from hjrate.models.sweep import (
    FitResult,
    ReferenceKind,
    SweepConfig,
    SweepKind,
    SweepReport,
    SweepRow,
)
from hjrate.services.bounds_service import BoundsService
from hjrate.services.envelope_service import EnvelopeService
from hjrate.services.operator_service import OperatorService
from hjrate.services.solver_service import SolverService
from hjrate.storage import file_store
from hjrate.storage.data_models import ProblemSpec, RateLedger, TraceProvenance
from hjrate.structures.catalog import DiffusionKind, HamiltonianKind
from hjrate.structures.grid import Grid, GridFn, HolderClass, holder_seminorm, make_grid, sup_norm_diff
from hjrate.structures.profiles import profile_from_config

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Filas mínimas para un ajuste log-log
MIN_FIT_POINTS = 4


def _epsilons(config: SweepConfig) -> List[float]:
    """Sucesión geométrica creciente de viscosidades."""
    spec = config.epsilons
    return [float(value) for value in np.geomspace(spec.eps_min, spec.eps_max, spec.count)]


def _seed(config: SweepConfig) -> int:
    return settings.seed if settings.seed is not None else config.seed


def _grid(problem: ProblemSpec, points: int) -> Grid:
    return Grid(problem.grid.dim, points, problem.grid.length)


def _guarded(task: Callable[[], T], epsilon: float, points: int) -> T:
    """Ejecuta una resolución y reetiqueta sus fallos con el par (ε, N)."""
    try:
        return task()
    except SweepError:
        raise
    except HJRateException as exc:
        raise SweepError(f"Falló la resolución con ε={epsilon:g}, N={points}: {exc}", epsilon, points) from exc


def _parallel(jobs: List[Tuple[float, int]], solve: Callable[[float, int], T],
              workers: int, progress: bool, label: str) -> List[T]:
    """Resuelve cada par (ε, N) en un pool de hilos conservando el orden de los trabajos."""
    def task(job: Tuple[float, int]) -> T:
        epsilon, points = job
        return _guarded(lambda: solve(epsilon, points), epsilon, points)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(tqdm(pool.map(task, jobs), total=len(jobs), desc=label, disable=not progress))


def _certify(problem: ProblemSpec, seed: int, notes: List[str]) -> bool:
    passed = True
    for spec in (problem.hamiltonian, problem.diffusion):
        report = OperatorService.certify_structure(
            spec, settings.certificate_samples, seed, problem.grid.dim, problem.grid.length
        )
        if not report.passed:
            passed = False
            worst = max(report.violations, key=lambda record: record.ratio)
            notes.append(
                f"Certificado {report.target}/{report.kind} falló: {len(report.violations)} violaciones, "
                f"peor cociente {worst.ratio:.6g} en '{worst.check}'"
            )
    return passed


def _viscous(problem: ProblemSpec, epsilon: float, grid: Grid, times: Sequence[float],
             config: SweepConfig) -> Dict[float, GridFn]:
    """u_(ε) en los tiempos pedidos: exacta en Fourier cuando existe, LLF en otro caso."""
    if SolverService.has_spectral(problem):
        return {time: SolverService.spectral_solution(problem, epsilon, grid, time) for time in times}
    params = config.solve.model_copy(update={"snapshot_times": list(times)})
    solution = SolverService.solve_evolution(problem, epsilon, grid, params)
    return {time: solution.at(time) for time in times}


def _evolution_reference(problem: ProblemSpec, config: SweepConfig, grid: Grid,
                         times: Sequence[float]) -> Tuple[Dict[float, GridFn], Dict[float, float]]:
    """Referencia inviscida y proxy de discretización por tiempo."""
    if config.reference is ReferenceKind.ORACLE:
        exact = {time: SolverService.exact_inviscid(problem, grid, time) for time in times}
        discrete = _viscous(problem, 0.0, grid, times, config)
        return exact, {time: sup_norm_diff(discrete[time], exact[time]) for time in times}

    params = config.solve.model_copy(update={"snapshot_times": list(times)})
    result = SolverService.richardson_reference(problem, 0.0, grid, config.refinements, params)
    return (
        {time: result.solution.at(time) for time in times},
        {time: result.proxy(time) for time in times},
    )


def _heat_bound_applies(problem: ProblemSpec) -> bool:
    """H ≡ c, F = Δ y u₀ Lipschitz: aplica la cota 4‖Du₀‖√(εt) + C_F tε."""
    H = problem.hamiltonian
    return (
        H.kind is HamiltonianKind.CUSTOM_FIRST_ORDER
        and H.C_H == 0.0
        and H.p_lipschitz == 0.0
        and problem.diffusion.kind is DiffusionKind.LAPLACIAN
        and problem.u0_holder.alpha == 1.0
    )


def _row(epsilon: float, time: float, points: int, solution: GridFn, reference: GridFn,
         bound: float, proxy: float, contamination: float, slack: float) -> SweepRow:
    difference = reference.values - solution.values
    error_plus = float(np.max(difference))
    error_minus = float(np.max(-difference))
    sup_error = sup_norm_diff(solution, reference)
    allowance = (bound + slack * proxy) * (1.0 + settings.float_rtol)
    return SweepRow(
        epsilon=epsilon,
        time=time,
        points_per_axis=points,
        sup_error=sup_error,
        error_plus=error_plus,
        error_minus=error_minus,
        bound_rhs=bound,
        discretization_proxy=proxy,
        contaminated=bool(sup_error <= contamination * proxy),
        bound_satisfied=bool(sup_error <= allowance),
    )


class HarnessService:
    """Servicio de barridos y reportes."""

    @staticmethod
    def run_sweep(
        config: SweepConfig,
        workers: Optional[int] = None,
        progress: Optional[bool] = None,
    ) -> SweepReport:
        """
        Barrido en ε de un problema de evolución.

        Para cada resolución y cada ε resuelve el problema viscoso, lo compara con
        la referencia inviscida en cada tiempo de evaluación y evalúa la cota del
        ledger. Las filas con error <= factor·proxy se marcan contaminadas y se
        excluyen del ajuste, que usa la malla más fina.

        Args:
            config: Configuración validada del barrido
            workers: Hilos para las resoluciones (por defecto settings.workers)
            progress: Barra de progreso tqdm (por defecto settings.progress)

        Returns:
            SweepReport (también escrito en config.output_dir si está definido)

        Raises:
            ConfigError: Si el problema es estacionario o no tiene oráculo pedido
            SweepError: Si falla alguna resolución, con el (ε, N) que falló
        """
        workers = settings.workers if workers is None else workers
        progress = settings.progress if progress is None else progress
        problem = OperatorService.build_problem(config.problem)
        if problem.is_stationary:
            raise ConfigError("run_sweep requiere ρ = 0; use run_stationary_sweep")
        if config.reference is ReferenceKind.ORACLE and not SolverService.has_oracle(problem):
            raise ConfigError(f"'{problem.name}' no tiene oráculo exacto; use reference = richardson")

        notes: List[str] = []
        certified = _certify(problem, _seed(config), notes)
        epsilons = _epsilons(config)
        times = config.times()
        resolutions = config.resolutions()
        finest = max(resolutions)
        logger.info("Barrido '%s': ε ∈ [%g, %g] (%d), N=%s, t=%s, referencia %s",
                    problem.name, epsilons[0], epsilons[-1], len(epsilons), resolutions, times,
                    config.reference.value)

        measure = problem.u_holder_measured and problem.hamiltonian.C_H > 0.0
        trace_times = sorted({0.0, *times, problem.horizon}) if measure else list(times)
        references: Dict[int, Tuple[Dict[float, GridFn], Dict[float, float]]] = {}
        for points in resolutions:
            grid = _grid(problem, points)
            references[points] = _guarded(
                lambda: _evolution_reference(problem, config, grid, trace_times if points == finest else times),
                0.0, points,
            )

        ledger = HarnessService._evolution_ledger(problem, config, references[finest][0], trace_times, measure)
        if ledger.integrability_suspect:
            notes.append("Traza medida: la primera celda domina C₂(T); integrabilidad dudosa")
        heat = _heat_bound_applies(problem)
        if heat:
            notes.append("Cota del calor 4‖Du₀‖√(εt) + C_F tε aplicada (H constante, F = Δ)")

        jobs = [(epsilon, points) for points in resolutions for epsilon in epsilons]
        solutions = _parallel(
            jobs,
            lambda epsilon, points: _viscous(problem, epsilon, _grid(problem, points), times, config),
            workers, progress, f"sweep {problem.name}",
        )

        contamination = settings.contamination_factor
        slack = settings.bound_slack_factor
        rows: List[SweepRow] = []
        for (epsilon, points), solution in zip(jobs, solutions):
            reference, proxies = references[points]
            for time in times:
                if heat:
                    bound = BoundsService.heat_bound(problem.u0_holder.seminorm, ledger.C_F, time, epsilon)
                    bound += ledger.initial_mismatch
                else:
                    bound = BoundsService.bound_rhs(ledger, time, epsilon)
                rows.append(_row(epsilon, time, points, solution[time], reference[time], bound,
                                 proxies[time], contamination, slack))

        report = HarnessService._assemble(
            config, problem, SweepKind.EVOLUTION, rows, finest, times, ledger.exponent, notes, certified,
        )
        report.ledger = BoundsService.ledger_report(ledger)
        HarnessService._finish(report, config)
        return report

    @staticmethod
    def _evolution_ledger(problem: ProblemSpec, config: SweepConfig, reference: Dict[float, GridFn],
                          trace_times: Sequence[float], measure: bool) -> RateLedger:
        mesh = np.linspace(0.0, problem.horizon, config.ledger_mesh)
        if not measure:
            return BoundsService.build_ledger(problem, times=mesh)
        alpha = problem.u_holder.alpha
        knots = np.asarray(trace_times, dtype=float)
        values = np.array([holder_seminorm(reference[time], alpha) for time in trace_times])
        logger.info("Traza [u(t)]_%g medida en t=%s: %s", alpha, knots.tolist(), values.tolist())
        return BoundsService.build_ledger(
            problem,
            seminorm_trace=lambda s: float(np.interp(s, knots, values)),
            times=mesh,
            provenance=TraceProvenance.MEASURED,
        )

    @staticmethod
    def run_stationary_sweep(
        config: SweepConfig,
        workers: Optional[int] = None,
        progress: Optional[bool] = None,
    ) -> SweepReport:
        """
        Barrido en ε de un problema estacionario (ρ > 0).

        La referencia es la solución ε = 0 en una malla fina de reference_points
        nodos (por defecto 4 veces la resolución más fina), restringida a cada
        malla, o la constante −H(0,0)/ρ con reference = oracle. El proxy suma la
        diferencia entre la resolución ε = 0 de cada malla y la referencia más la
        tolerancia del punto fijo dividida por ρ.

        Raises:
            ConfigError: Si ρ = 0, reference_points no es múltiplo de cada N o no hay oráculo
            SweepError: Si algún punto fijo no converge, con el (ε, N) que falló
        """
        workers = settings.workers if workers is None else workers
        progress = settings.progress if progress is None else progress
        problem = OperatorService.build_problem(config.problem)
        if not problem.is_stationary:
            raise ConfigError("run_stationary_sweep requiere ρ > 0")
        if config.reference is ReferenceKind.ORACLE and not SolverService.has_oracle(problem):
            raise ConfigError(f"'{problem.name}' no tiene oráculo exacto; use reference = richardson")

        notes: List[str] = []
        certified = _certify(problem, _seed(config), notes)
        epsilons = _epsilons(config)
        resolutions = config.resolutions()
        finest = max(resolutions)
        fixed_point: StationaryParams = config.stationary
        tolerance = fixed_point.tol / problem.rho

        def stationary(epsilon: float, points: int) -> GridFn:
            solution = SolverService.solve_stationary(
                problem, epsilon, _grid(problem, points),
                fixed_point.tol, fixed_point.max_iters, fixed_point.cfl_safety,
            )
            return solution.final

        if config.reference is ReferenceKind.ORACLE:
            fine = _grid(problem, finest)
            fine_reference = SolverService.exact_inviscid(problem, fine, 0.0)
            references = {points: SolverService.exact_inviscid(problem, _grid(problem, points), 0.0)
                          for points in resolutions}
        else:
            reference_points = config.reference_points or 4 * finest
            for points in resolutions:
                if reference_points % points != 0:
                    raise ConfigError(f"reference_points = {reference_points} no es múltiplo de N = {points}")
            fine_reference = _guarded(lambda: stationary(0.0, reference_points), 0.0, reference_points)
            references = {points: fine_reference.restrict(_grid(problem, points)) for points in resolutions}
            notes.append(f"Referencia: ε = 0 con N = {reference_points}")

        inviscid = _parallel([(0.0, points) for points in resolutions], stationary, workers, progress,
                             f"reference {problem.name}")
        proxies = {
            points: sup_norm_diff(coarse, references[points]) + tolerance
            for points, coarse in zip(resolutions, inviscid)
        }

        if problem.u_holder_measured:
            alpha = problem.u_holder.alpha
            seminorm = holder_seminorm(fine_reference, alpha)
            sledger = BoundsService.build_stationary_ledger(
                problem, seminorm, alpha, TraceProvenance.MEASURED
            )
            notes.append(f"[u]_{alpha:g} = {seminorm:.6g} medida sobre la referencia")
        else:
            sledger = BoundsService.build_stationary_ledger(problem)

        jobs = [(epsilon, points) for points in resolutions for epsilon in epsilons]
        solutions = _parallel(jobs, stationary, workers, progress, f"stationary {problem.name}")

        contamination = settings.contamination_factor
        slack = settings.bound_slack_factor
        rows = [
            _row(epsilon, 0.0, points, solution, references[points],
                 BoundsService.stationary_bound(sledger, epsilon), proxies[points], contamination, slack)
            for (epsilon, points), solution in zip(jobs, solutions)
        ]

        report = HarnessService._assemble(
            config, problem, SweepKind.STATIONARY, rows, finest, [0.0],
            BoundsService.stationary_exponent(sledger), notes, certified,
        )
        report.stationary_ledger = BoundsService.stationary_ledger_report(sledger)
        HarnessService._finish(report, config)
        return report

    @staticmethod
    def _assemble(config: SweepConfig, problem: ProblemSpec, kind: SweepKind, rows: List[SweepRow],
                  finest: int, times: Sequence[float], exponent: float, notes: List[str],
                  certified: bool) -> SweepReport:
        """Ajusta por tiempo sobre la malla más fina y arma el reporte."""
        contaminated = sum(row.contaminated for row in rows)
        if contaminated:
            logger.warning("'%s': %d de %d filas contaminadas por la discretización",
                           problem.name, contaminated, len(rows))

        fits: List[FitResult] = []
        for time in times:
            usable = [
                (row.epsilon, row.sup_error) for row in rows
                if row.points_per_axis == finest and row.time == time
                and not row.contaminated and row.sup_error > 0.0
            ]
            if len(usable) < MIN_FIT_POINTS:
                notes.append(f"Ajuste no disponible en t={time:g}: {len(usable)} filas no contaminadas")
                logger.warning("'%s': ajuste no disponible en t=%g (%d filas)", problem.name, time, len(usable))
                continue
            fits.append(HarnessService.fit_rate(usable, time))

        final = fits[-1] if fits and math.isclose(fits[-1].time, times[-1]) else None
        notes.append("La cota es superior: la optimalidad del exponente no se verifica")
        report = SweepReport(
            name=problem.name,
            kind=kind,
            reference=config.reference,
            epsilon_range=(config.epsilons.eps_min, config.epsilons.eps_max),
            rows=rows,
            fits=fits,
            fitted_rate=None if final is None else final.slope,
            fitted_interval=None if final is None else final.interval,
            theoretical_exponent=exponent,
            contamination_factor=settings.contamination_factor,
            slack_factor=settings.bound_slack_factor,
            certificates_passed=certified,
            notes=notes,
        )
        logger.info("'%s': pendiente %s, exponente %.6g, cotas %s", problem.name,
                    "n/d" if final is None else f"{final.slope:.4f}", exponent,
                    "ok" if report.all_bounds_satisfied else "VIOLADAS")
        return report

    @staticmethod
    def _finish(report: SweepReport, config: SweepConfig) -> None:
        if config.output_dir is not None:
            HarnessService.emit_report(report, config.output_dir)

    @staticmethod
    def fit_rate(points: Sequence[Tuple[float, float]], time: float = 0.0) -> FitResult:
        """
        Mínimos cuadrados sobre (log ε, log error).

        Args:
            points: Pares (ε, error) con ambos positivos
            time: Tiempo al que corresponde el ajuste

        Returns:
            FitResult con intervalo pendiente ± 2·stderr

        Raises:
            FitError: Con menos de 4 puntos, valores no positivos o ε todos iguales

        Examples:
            >>> fit = HarnessService.fit_rate([(e, 3.0 * e ** 0.5) for e in (1e-4, 1e-3, 1e-2, 1e-1)])
            >>> round(fit.slope, 9)
            0.5
        """
        if len(points) < MIN_FIT_POINTS:
            raise FitError(f"Se requieren al menos {MIN_FIT_POINTS} puntos, recibidos {len(points)}")
        data = np.asarray(points, dtype=float)
        if data.ndim != 2 or data.shape[1] != 2:
            raise FitError("Los puntos deben ser pares (ε, error)")
        if not np.all(np.isfinite(data)) or np.any(data <= 0.0):
            raise FitError("ε y error deben ser finitos y positivos")
        x, y = np.log(data[:, 0]), np.log(data[:, 1])
        spread = float(np.sum((x - x.mean()) ** 2))
        if spread == 0.0:
            raise FitError("Todos los ε son iguales")

        slope, intercept = np.polyfit(x, y, 1)
        residuals = y - (slope * x + intercept)
        stderr = math.sqrt(float(np.sum(residuals ** 2)) / (len(x) - 2) / spread)
        return FitResult(
            time=time,
            slope=float(slope),
            intercept=float(intercept),
            stderr=stderr,
            interval=(float(slope - 2.0 * stderr), float(slope + 2.0 * stderr)),
            points_used=len(x),
        )

    @staticmethod
    def emit_report(report: SweepReport, output_dir) -> Dict[str, Path]:
        """
        Escribe report.json, sweep.csv y plot.dat de forma atómica.

        Raises:
            ReportIOError: Si el directorio no es escribible
        """
        files = file_store.write_report_files(report, output_dir)
        logger.info("Reporte '%s' emitido en %s", report.name, output_dir)
        return files

    @staticmethod
    def read_report(path) -> SweepReport:
        """Lee un reporte emitido (archivo o directorio)."""
        return file_store.read_report_file(path)

    @staticmethod
    def certify(config: ProblemConfig, samples: Optional[int] = None, seed: int = 0) -> CertifyResponse:
        """Certificados de H y F de un problema."""
        problem = OperatorService.build_problem(config)
        samples = settings.certificate_samples if samples is None else samples
        reports = [
            OperatorService.certify_structure(spec, samples, seed, problem.grid.dim, problem.grid.length)
            for spec in (problem.hamiltonian, problem.diffusion)
        ]
        return CertifyResponse(reports=reports, passed=all(report.passed for report in reports))

    @staticmethod
    def envelope_check(config: EnvelopeCheckConfig) -> EnvelopeCheckResponse:
        """
        Batería de cotas de las convoluciones y de semiconvexidad para cada δ.

        Sin seminorma declarada se usa la medida sobre la propia función, que es
        un certificado válido por construcción.

        Raises:
            GridError: Si los valores no forman una malla N^d
            HolderCertificateError: Si la seminorma declarada es menor que la medida
        """
        grid = make_grid(config.grid.dim, config.grid.N, config.grid.L)
        if config.profile is not None:
            f = profile_from_config(config.profile.kind, config.profile.params).sample(grid)
        else:
            f = GridFn(grid, config.values)
        seminorm = holder_seminorm(f, config.alpha) if config.seminorm is None else config.seminorm
        holder = HolderClass(config.alpha, seminorm)

        reports, semiconvexity = [], []
        for delta in config.deltas:
            reports.append(EnvelopeService.check_envelope_bounds(f, holder, delta))
            semiconvexity.append(EnvelopeService.check_semiconvexity(EnvelopeService.sup_convolution(f, delta)))
            semiconvexity.append(EnvelopeService.check_semiconvexity(EnvelopeService.inf_convolution(f, delta)))
        passed = all(report.passed for report in reports) and all(report.passed for report in semiconvexity)
        return EnvelopeCheckResponse(reports=reports, semiconvexity=semiconvexity, passed=passed)

    @staticmethod
    def ledger_summaries(request: LedgerRequest) -> List[LedgerSummary]:
        """
        Ledger del problema y su cota para cada (t, ε) pedido.

        Usa la clase de Hölder declarada o la provisional; la medida requiere un barrido.
        """
        problem = OperatorService.build_problem(request.problem)
        if problem.u_holder_measured and problem.hamiltonian.C_H > 0.0:
            logger.warning("'%s': clase de u(t) no declarada, se usa la provisional %s",
                           problem.name, problem.u_holder)

        summaries: List[LedgerSummary] = []
        if problem.is_stationary:
            sledger = BoundsService.build_stationary_ledger(problem)
            report = BoundsService.stationary_ledger_report(sledger)
            for epsilon in request.epsilons:
                summaries.append(LedgerSummary(
                    stationary_ledger=report,
                    epsilon=epsilon,
                    bound=BoundsService.stationary_bound(sledger, epsilon),
                ))
            return summaries

        mesh = np.linspace(0.0, problem.horizon, request.ledger_mesh)
        ledger = BoundsService.build_ledger(problem, times=mesh)
        report = BoundsService.ledger_report(ledger)
        for time in request.times or [problem.horizon]:
            for epsilon in request.epsilons:
                try:
                    delta = BoundsService.optimal_delta(ledger, time, epsilon)
                except DegenerateLedgerError:
                    delta = None
                summaries.append(LedgerSummary(
                    ledger=report,
                    time=time,
                    epsilon=epsilon,
                    bound=BoundsService.bound_rhs(ledger, time, epsilon),
                    optimal_delta=delta,
                ))
        return summaries
