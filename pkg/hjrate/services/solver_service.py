"""
Servicio de solvers: esquema monótono de Lax-Friedrichs local para problemas
de evolución y estacionarios, y oráculos exactos (Hopf-Lax, calor espectral,
características del transporte).
"""
import logging
from typing import List, Optional, Tuple, Union

import numpy as np

from hjrate.core.exceptions import (
    CFLViolationError,
    DivergenceError,
    NonCatalogHamiltonianError,
    NonConstantCoefficientError,
    SolverError,
    StationaryConvergenceError,
)
from hjrate.models.problem import SolveParams, StationaryParams
from hjrate.services.envelope_service import EnvelopeService
from hjrate.storage.data_models import ProblemSpec, RichardsonResult, Solution
from hjrate.structures.catalog import DiffusionSpec, HamiltonianKind, HamiltonianSpec
from hjrate.structures.grid import Grid, GridFn, index_distance_squared, row_blocks, sup_norm_diff
from hjrate.structures.profiles import Profile

logger = logging.getLogger(__name__)


def _gradients(u: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Diferencias periódicas hacia adelante y hacia atrás, forma (*shape, d)."""
    axes = range(u.ndim)
    forward = np.stack([(np.roll(u, -1, axis=a) - u) / h for a in axes], axis=-1)
    backward = np.stack([(u - np.roll(u, 1, axis=a)) / h for a in axes], axis=-1)
    return forward, backward


def _hessian(u: np.ndarray, h: float) -> np.ndarray:
    """Hessiano por diferencias centradas, forma (*shape, d, d)."""
    dim = u.ndim
    M = np.zeros(u.shape + (dim, dim))
    for a in range(dim):
        M[..., a, a] = (np.roll(u, -1, axis=a) - 2.0 * u + np.roll(u, 1, axis=a)) / (h * h)
    if dim == 2:
        plus = np.roll(u, -1, axis=0)
        minus = np.roll(u, 1, axis=0)
        cross = (
            np.roll(plus, -1, axis=1) - np.roll(plus, 1, axis=1)
            - np.roll(minus, -1, axis=1) + np.roll(minus, 1, axis=1)
        ) / (4.0 * h * h)
        M[..., 0, 1] = cross
        M[..., 1, 0] = cross
    return M


class _Discretization:
    """Operador discreto H_num − εF_h sobre una malla fija."""

    def __init__(self, problem: ProblemSpec, grid: Grid, epsilon: float,
                 viscosity: Union[float, str] = "auto"):
        self.hamiltonian = problem.hamiltonian
        self.diffusion = problem.diffusion
        self.grid = grid
        self.epsilon = epsilon
        self.viscosity = viscosity
        self.coords = grid.coordinates()
        self.h = grid.spacing
        self._warned = False

    def evaluate(self, u: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray, float]:
        """
        Returns:
            (H_num(u) − εF_h(u), θ por eje, cota L_p de |∂H/∂p|)
        """
        grid = self.grid
        forward, backward = _gradients(u, self.h)
        p_abs = np.maximum(np.abs(forward), np.abs(backward)).reshape(-1, grid.dim).max(axis=0)
        bounds = self.hamiltonian.derivative_bounds(grid.length, p_abs)
        if self.viscosity == "auto":
            theta = bounds
        else:
            theta = np.full(grid.dim, float(self.viscosity))
            if not self._warned and np.any(theta < bounds * (1.0 - 1e-12)):
                self._warned = True
                logger.warning("θ = %g menor que max|∂H/∂p| = %g: el esquema no es monótono",
                               float(theta.max()), float(bounds.max()))

        central = 0.5 * (forward + backward)
        value = self.hamiltonian.evaluate(self.coords, t, central, grid.length)
        value = value - 0.5 * np.sum(theta * (forward - backward), axis=-1)
        if self.epsilon > 0.0:
            value = value - self.epsilon * self.diffusion.evaluate(self.coords, t, _hessian(u, self.h), grid.length)
        return value, theta, float(bounds.max()) if bounds.size else 0.0

    def monotone_rate(self, theta: np.ndarray) -> float:
        """Σθ_a/h + 2dεΛ/h²: inverso del mayor paso monótono."""
        h = self.h
        return float(np.sum(theta)) / h + 2.0 * self.grid.dim * self.epsilon * self.diffusion.Lambda / (h * h)

    def step_limit(self, theta: np.ndarray, lipschitz: float) -> float:
        """min(h/(2θ + L_p), 1/(Σθ/h + 2dεΛ/h²)); infinito si el operador es nulo."""
        limit = np.inf
        hyperbolic = 2.0 * float(np.max(theta)) + lipschitz
        if hyperbolic > 0.0:
            limit = self.h / hyperbolic
        rate = self.monotone_rate(theta)
        if rate > 0.0:
            limit = min(limit, 1.0 / rate)
        return limit


class SolverService:
    """Servicio de solvers numéricos y oráculos."""

    @staticmethod
    def solve_evolution(
        problem: ProblemSpec,
        epsilon: float,
        grid: Grid,
        params: Optional[SolveParams] = None,
    ) -> Solution:
        """
        Euler explícito del problema viscoso (ε > 0) o inviscido (ε = 0).

        Args:
            problem: Problema de evolución
            epsilon: Viscosidad ε >= 0
            grid: Malla
            params: Paso, factor CFL, θ y tiempos de instantánea (por defecto [T])

        Returns:
            Solution con instantáneas ordenadas, la primera en t = 0

        Raises:
            SolverError: Si ε < 0 o un tiempo está fuera de [0, T]
            CFLViolationError: Si un dt explícito viola la condición de monotonía
            DivergenceError: Si aparecen valores no finitos
        """
        if epsilon < 0:
            raise SolverError(f"ε debe ser >= 0: {epsilon}")
        params = params or SolveParams()
        horizon = problem.horizon
        requested = params.snapshot_times or [horizon]
        for time in requested:
            if time < 0 or time > horizon * (1.0 + 1e-12):
                raise SolverError(f"Tiempo de instantánea {time} fuera de [0, {horizon}]")
        targets = sorted({0.0, *(min(float(time), horizon) for time in requested)})

        scheme = _Discretization(problem, grid, epsilon, params.artificial_viscosity)
        u0 = problem.sample_u0(grid)
        u = np.array(u0.values, dtype=float)
        snapshots: List[Tuple[float, GridFn]] = [(0.0, u0)]
        debug = logger.isEnabledFor(logging.DEBUG)

        t = 0.0
        steps = 0
        dt_min, dt_max, courant = np.inf, 0.0, 0.0
        for target in targets[1:]:
            while t < target:
                value, theta, lipschitz = scheme.evaluate(u, t)
                limit = scheme.step_limit(theta, lipschitz)
                if params.dt == "auto":
                    dt = params.cfl_safety * limit
                else:
                    dt = float(params.dt)
                    if dt > limit * (1.0 + 1e-12):
                        raise CFLViolationError(
                            f"dt = {dt} excede el límite monótono {limit} (θ = {theta.tolist()}, ε = {epsilon})"
                        )
                landing = t + dt >= target * (1.0 - 1e-12)
                if landing:
                    dt = target - t

                u = u - dt * value
                steps += 1
                t = target if landing else t + dt
                if not np.all(np.isfinite(u)):
                    raise DivergenceError(f"Valores no finitos en el paso {steps}, t = {t}", steps, t)

                dt_min = min(dt_min, dt)
                dt_max = max(dt_max, dt)
                courant = max(courant, dt * scheme.monotone_rate(theta))
                if debug:
                    logger.debug("paso %d t=%.6g dt=%.3g θ=%s", steps, t, dt, theta.tolist())
            snapshots.append((target, GridFn(grid, u)))

        logger.info("Evolución '%s' ε=%g N=%d: %d pasos", problem.name, epsilon, grid.points_per_axis, steps)
        return Solution(
            snapshots=snapshots,
            epsilon=epsilon,
            steps=steps,
            dt_min=0.0 if steps == 0 else float(dt_min),
            dt_max=float(dt_max),
            cfl_used=float(courant),
        )

    @staticmethod
    def hopf_lax(u0: GridFn, hamiltonian: HamiltonianSpec, t: float) -> GridFn:
        """
        Fórmula de Hopf-Lax para los Hamiltonianos convexos del catálogo.

        quadratic: min_y u₀(y) + dist(x,y)²/(2t), es decir la inf-convolución con δ = t.
        |p|: min de u₀ sobre los nodos a distancia <= t.

        Raises:
            NonCatalogHamiltonianError: Si H no es |p|²/2 ni |p|
            SolverError: Si t < 0
        """
        if t < 0:
            raise SolverError(f"t debe ser >= 0: {t}")
        if hamiltonian.kind is HamiltonianKind.QUADRATIC:
            return u0 if t == 0 else EnvelopeService.inf_convolution(u0, t).envelope
        if not hamiltonian.is_unit_eikonal():
            raise NonCatalogHamiltonianError(
                f"Sin fórmula de Hopf-Lax para '{hamiltonian.kind.value}'"
            )
        if t == 0:
            return u0

        grid = u0.grid
        values = u0.flat()
        indices = grid.multi_indices()
        result = np.empty(grid.size)
        radius = t * t
        for rows in row_blocks(grid.size):
            d2 = index_distance_squared(grid, indices[rows, None, :], indices[None, :, :])
            result[rows] = np.where(d2 <= radius, values[None, :], np.inf).min(axis=1)
        return GridFn(grid, result)

    @staticmethod
    def heat_scale(diffusion: DiffusionSpec) -> float:
        """
        Factor s con F(M) = s·Tr(M).

        Raises:
            NonConstantCoefficientError: Si F no es un múltiplo constante del laplaciano
        """
        scale = diffusion.isotropic_scale()
        if scale is None:
            raise NonConstantCoefficientError(
                f"'{diffusion.kind.value}' no tiene coeficientes constantes isótropos"
            )
        return scale

    @staticmethod
    def heat_exact(u0: GridFn, epsilon: float, Lambda_scale: float, t: float) -> GridFn:
        """
        Solución espectral de ∂_t u = εΛ_s Δu en el toro.

        Cada modo de Fourier se amortigua por exp(−εΛ_s|ξ|²t), ξ = 2πk/L.

        Raises:
            SolverError: Si ε, Λ_s o t son negativos
        """
        if epsilon < 0 or Lambda_scale < 0 or t < 0:
            raise SolverError(f"Parámetros negativos: ε={epsilon}, Λ={Lambda_scale}, t={t}")
        if t == 0 or epsilon == 0 or Lambda_scale == 0:
            return u0
        grid = u0.grid
        wave = 2.0 * np.pi * np.fft.fftfreq(grid.points_per_axis, d=grid.spacing)
        squared = sum(
            component ** 2 for component in np.meshgrid(*([wave] * grid.dim), indexing="ij")
        )
        damping = np.exp(-epsilon * Lambda_scale * squared * t)
        values = np.real(np.fft.ifftn(np.fft.fftn(u0.values) * damping))
        return GridFn(grid, values)

    @staticmethod
    def has_spectral(problem: ProblemSpec) -> bool:
        """
        True si el problema viscoso se resuelve exactamente en Fourier: evolución con
        H ≡ c o transporte de velocidad constante y F múltiplo constante del laplaciano.
        """
        H = problem.hamiltonian
        if problem.is_stationary or problem.diffusion.isotropic_scale() is None:
            return False
        if H.kind is HamiltonianKind.TRANSPORT:
            return H.is_x_independent()
        return H.kind is HamiltonianKind.CUSTOM_FIRST_ORDER and H.C_H == 0.0 and H.p_lipschitz == 0.0

    @staticmethod
    def spectral_solution(problem: ProblemSpec, epsilon: float, grid: Grid, t: float) -> GridFn:
        """
        u_(ε)(t) por modos de Fourier: amortiguamiento del calor, fase del transporte
        exp(−iξ·ct) y desplazamiento −ct para H ≡ c.

        Raises:
            NonConstantCoefficientError: Si el problema no admite solución espectral
            SolverError: Si ε o t son negativos
        """
        if not SolverService.has_spectral(problem):
            raise NonConstantCoefficientError(f"'{problem.name}' no admite solución espectral exacta")
        if epsilon < 0 or t < 0:
            raise SolverError(f"Parámetros negativos: ε={epsilon}, t={t}")
        H = problem.hamiltonian
        u0 = problem.sample_u0(grid)
        if H.kind is not HamiltonianKind.TRANSPORT:
            zero = np.zeros((1, grid.dim))
            value = float(H.evaluate(zero, 0.0, zero, grid.length)[0])
            return SolverService.heat_exact(u0, epsilon, problem.diffusion.isotropic_scale(), t).shifted(-value * t)

        velocity = [float(component.params.get("value", 0.0)) for component in H.velocity]
        wave = 2.0 * np.pi * np.fft.fftfreq(grid.points_per_axis, d=grid.spacing)
        axes = np.meshgrid(*([wave] * grid.dim), indexing="ij")
        squared = sum(component ** 2 for component in axes)
        phase = sum(c * component for c, component in zip(velocity, axes))
        factor = np.exp(-epsilon * problem.diffusion.isotropic_scale() * squared * t - 1j * phase * t)
        values = np.real(np.fft.ifftn(np.fft.fftn(u0.values) * factor))
        return GridFn(grid, values)

    @staticmethod
    def solve_stationary(
        problem: ProblemSpec,
        epsilon: float,
        grid: Grid,
        tol: float = 1e-8,
        max_iters: int = 200_000,
        cfl_safety: float = 0.9,
        initial: Optional[GridFn] = None,
    ) -> Solution:
        """
        Punto fijo amortiguado uⁿ⁺¹ = uⁿ − τ(ρuⁿ + H_num(uⁿ) − εF_h(uⁿ)).

        τ = cfl_safety/(ρ + Σθ/h + 2dεΛ/h²), de modo que la iteración es monótona
        y contrae con factor 1 − τρ.

        Args:
            problem: Problema con ρ > 0
            epsilon: Viscosidad ε >= 0
            grid: Malla
            tol: Tolerancia del residuo en norma del supremo
            max_iters: Máximo de iteraciones
            cfl_safety: Factor de seguridad en (0, 1]
            initial: Semilla (por defecto la de problem.sample_u0)

        Raises:
            SolverError: Si ρ <= 0 o ε < 0
            StationaryConvergenceError: Si no se alcanza tol en max_iters
            DivergenceError: Si aparecen valores no finitos
        """
        if not problem.is_stationary:
            raise SolverError("solve_stationary requiere ρ > 0")
        if epsilon < 0:
            raise SolverError(f"ε debe ser >= 0: {epsilon}")
        if not 0.0 < cfl_safety <= 1.0:
            raise SolverError(f"cfl_safety fuera de (0, 1]: {cfl_safety}")

        rho = problem.rho
        scheme = _Discretization(problem, grid, epsilon)
        u = np.array((initial or problem.sample_u0(grid)).values, dtype=float)
        history: List[float] = []
        debug = logger.isEnabledFor(logging.DEBUG)

        for iteration in range(max_iters + 1):
            value, theta, _ = scheme.evaluate(u, 0.0)
            residual_field = rho * u + value
            residual = float(np.max(np.abs(residual_field)))
            history.append(residual)
            if residual < tol:
                logger.info("Estacionario '%s' ε=%g N=%d: %d iteraciones, residuo %.3g",
                            problem.name, epsilon, grid.points_per_axis, iteration, residual)
                return Solution(
                    snapshots=[(0.0, GridFn(grid, u))],
                    epsilon=epsilon,
                    residual=residual,
                    iterations=iteration,
                    residual_history=history,
                )
            if iteration == max_iters:
                break
            tau = cfl_safety / (rho + scheme.monotone_rate(theta))
            u = u - tau * residual_field
            if not np.all(np.isfinite(u)):
                raise DivergenceError(f"Valores no finitos en la iteración {iteration + 1}", iteration + 1, 0.0)
            if debug and iteration % 1000 == 0:
                logger.debug("iteración %d residuo %.3e τ=%.3g", iteration, residual, tau)

        raise StationaryConvergenceError(
            f"Sin convergencia en {max_iters} iteraciones (residuo {history[-1]:.3e} >= {tol})",
            history,
            max_iters,
        )

    @staticmethod
    def richardson_reference(
        problem: ProblemSpec,
        epsilon: float,
        base_grid: Grid,
        refinements: int = 2,
        params: Optional[SolveParams] = None,
        stationary: Optional[StationaryParams] = None,
    ) -> RichardsonResult:
        """
        Resuelve en N, 2N, ..., 2^r N y restringe a la malla base.

        El proxy de discretización es el mayor incremento entre niveles consecutivos,
        medido sobre la malla base.

        Raises:
            SolverError: Si refinements < 2 o falla alguna resolución
        """
        if refinements < 2:
            raise SolverError(f"Se requieren al menos 2 refinamientos, recibido {refinements}")
        levels = [base_grid.points_per_axis * 2 ** k for k in range(refinements + 1)]
        restricted: List[Solution] = []
        for points in levels:
            grid = Grid(base_grid.dim, points, base_grid.length)
            if problem.is_stationary:
                stationary = stationary or StationaryParams()
                solution = SolverService.solve_stationary(
                    problem, epsilon, grid, stationary.tol, stationary.max_iters, stationary.cfl_safety
                )
            else:
                solution = SolverService.solve_evolution(problem, epsilon, grid, params)
            restricted.append(Solution(
                snapshots=[(time, values.restrict(base_grid)) for time, values in solution.snapshots],
                epsilon=epsilon,
                residual=solution.residual,
                iterations=solution.iterations,
                steps=solution.steps,
                dt_min=solution.dt_min,
                dt_max=solution.dt_max,
                cfl_used=solution.cfl_used,
                residual_history=solution.residual_history,
            ))

        increments = {}
        for index, (time, _) in enumerate(restricted[-1].snapshots):
            increments[time] = [
                sup_norm_diff(restricted[k].snapshots[index][1], restricted[k - 1].snapshots[index][1])
                for k in range(1, len(restricted))
            ]
        logger.info("Richardson '%s' ε=%g niveles=%s", problem.name, epsilon, levels)
        return RichardsonResult(solution=restricted[-1], levels=levels, increments=increments)

    @staticmethod
    def transport_oracle(problem: ProblemSpec, grid: Grid, t: float) -> GridFn:
        """
        Características exactas u(x,t) = u₀(x − ct) para velocidad constante.

        Raises:
            NonCatalogHamiltonianError: Si H no es transporte con velocidad constante
                o u₀ no es un perfil en forma cerrada
        """
        H = problem.hamiltonian
        if H.kind is not HamiltonianKind.TRANSPORT or not H.is_x_independent():
            raise NonCatalogHamiltonianError("El oráculo de características requiere transporte constante")
        if not isinstance(problem.u0, Profile):
            raise NonCatalogHamiltonianError("El oráculo de características requiere u₀ en forma cerrada")
        velocity = np.array([float(component.params.get("value", 0.0)) for component in H.velocity])
        shifted = grid.coordinates() - velocity * t
        return GridFn(grid, problem.u0(shifted, grid.length))

    @staticmethod
    def has_oracle(problem: ProblemSpec) -> bool:
        """True si exact_inviscid dispone de una solución exacta para el problema."""
        H = problem.hamiltonian
        if problem.is_stationary:
            return H.is_x_independent()
        if H.kind is HamiltonianKind.TRANSPORT:
            return H.is_x_independent() and isinstance(problem.u0, Profile)
        if H.kind is HamiltonianKind.QUADRATIC or H.is_unit_eikonal():
            return True
        return H.kind is HamiltonianKind.CUSTOM_FIRST_ORDER and H.C_H == 0.0 and H.p_lipschitz == 0.0

    @staticmethod
    def exact_inviscid(problem: ProblemSpec, grid: Grid, t: float) -> GridFn:
        """
        Solución inviscida exacta cuando existe.

        Transporte constante: características. |p|²/2 y |p|: Hopf-Lax. H ≡ c:
        u₀ − ct. Estacionario con H independiente de x: la constante −H(0,0)/ρ.

        Raises:
            NonCatalogHamiltonianError: Si el problema no tiene oráculo
        """
        if not SolverService.has_oracle(problem):
            raise NonCatalogHamiltonianError(f"Sin oráculo exacto para '{problem.name}'")
        H = problem.hamiltonian
        if problem.is_stationary:
            zero = np.zeros((1, grid.dim))
            value = -float(H.evaluate(zero, 0.0, zero, grid.length)[0]) / problem.rho
            return GridFn.constant(grid, value)
        if H.kind is HamiltonianKind.TRANSPORT:
            return SolverService.transport_oracle(problem, grid, t)
        u0 = problem.sample_u0(grid)
        if H.kind is HamiltonianKind.CUSTOM_FIRST_ORDER:
            zero = np.zeros((1, grid.dim))
            return u0.shifted(-float(H.evaluate(zero, 0.0, zero, grid.length)[0]) * t)
        return SolverService.hopf_lax(u0, H, t)
