"""
Servicio de operadores: evaluación puntual, auditoría de constantes y
construcción de problemas desde la configuración JSON.
"""
import logging
import math
from typing import Any, Dict, List, Optional, Union

import numpy as np

from hjrate.core.config import settings
from hjrate.core.exceptions import (
    ConfigError,
    DimensionMismatchError,
    NonSymmetricMatrixError,
)
from hjrate.models.problem import ProblemConfig
from hjrate.models.reports import CertificateReport, ViolationRecord
from hjrate.storage.data_models import ProblemSpec
from hjrate.structures.catalog import (
    DiffusionKind,
    DiffusionSpec,
    HamiltonianKind,
    HamiltonianSpec,
    check_compatibility,
)
from hjrate.structures.grid import Grid, HolderClass, make_grid, periodic_distance
from hjrate.structures.profiles import Profile, constant_profile, profile_from_config

logger = logging.getLogger(__name__)

# Violaciones guardadas por certificado
_MAX_VIOLATIONS = 10


def _as_point(value: Any, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} debe ser un vector, forma {arr.shape}")
    return arr


def _as_matrix(M: Any, dim: int) -> np.ndarray:
    arr = np.asarray(M, dtype=float)
    if arr.shape != (dim, dim):
        raise DimensionMismatchError(f"M debe ser {dim}x{dim}, forma {arr.shape}")
    return arr


def _random_symmetric(rng: np.random.Generator, samples: int, dim: int) -> np.ndarray:
    B = rng.standard_normal((samples, dim, dim))
    return 0.5 * (B + np.swapaxes(B, -1, -2))


def _random_psd(rng: np.random.Generator, samples: int, dim: int) -> np.ndarray:
    B = rng.standard_normal((samples, dim, dim))
    return B @ np.swapaxes(B, -1, -2)


def _profile(value: Union[float, int, Dict[str, Any], None], default: float) -> Profile:
    """Número → perfil constante; dict {kind, params} → perfil."""
    if value is None:
        return constant_profile(default)
    if isinstance(value, (int, float)):
        return constant_profile(float(value))
    if isinstance(value, dict) and "kind" in value:
        return profile_from_config(value["kind"], value.get("params"))
    raise ConfigError(f"Coeficiente inválido: {value!r}")


class OperatorService:
    """Servicio de operadores del catálogo."""

    @staticmethod
    def eval_hamiltonian(
        spec: HamiltonianSpec,
        x: Any,
        t: float,
        p: Any,
        M: Optional[Any] = None,
        length: float = 1.0,
    ) -> float:
        """
        Evalúa H(x, t, p, M) en un punto.

        Args:
            spec: Hamiltoniano del catálogo
            x: Punto (d,)
            t: Tiempo
            p: Gradiente (d,)
            M: Matriz simétrica d×d (ignorada por los tipos de primer orden)
            length: Período de los coeficientes

        Returns:
            Valor de H

        Raises:
            DimensionMismatchError: Si las dimensiones no coinciden

        Examples:
            >>> H = HamiltonianSpec.forced_eikonal(constant_profile(0.0))
            >>> OperatorService.eval_hamiltonian(H, [0.0, 0.0], 0.0, [3.0, 4.0])
            5.0
        """
        x = _as_point(x, "x")
        p = _as_point(p, "p")
        if x.shape != p.shape:
            raise DimensionMismatchError(f"x tiene dimensión {x.size} y p {p.size}")
        if M is not None:
            _as_matrix(M, x.size)
        return float(spec.evaluate(x, t, p, length))

    @staticmethod
    def eval_diffusion(spec: DiffusionSpec, x: Any, t: float, M: Any, length: float = 1.0) -> float:
        """
        Evalúa F(x, t, M) en un punto.

        Raises:
            DimensionMismatchError: Si M no es d×d
            NonSymmetricMatrixError: Si M no es simétrica
        """
        x = _as_point(x, "x")
        M = _as_matrix(M, x.size)
        if not np.allclose(M, M.T, rtol=0.0, atol=settings.float_rtol * max(1.0, np.abs(M).max())):
            raise NonSymmetricMatrixError(f"M no es simétrica: {M.tolist()}")
        return float(spec.evaluate(x, t, M, length))

    @staticmethod
    def certify_structure(
        spec: Union[HamiltonianSpec, DiffusionSpec],
        samples: int = 10_000,
        seed: int = 0,
        dim: int = 1,
        length: float = 1.0,
    ) -> CertificateReport:
        """
        Audita por muestreo las desigualdades de las constantes declaradas.

        Un certificado fallido se devuelve como registros de violación; nunca
        se lanza una excepción por ello.

        Args:
            spec: Hamiltoniano o difusión del catálogo
            samples: Número de muestras (>= 1)
            seed: Semilla
            dim: Dimensión del espacio
            length: Longitud del toro

        Returns:
            CertificateReport con el peor cociente por desigualdad
        """
        if samples < 1:
            raise ConfigError(f"Se requiere al menos una muestra, recibido {samples}")
        if isinstance(spec, HamiltonianSpec) and spec.dim is not None:
            dim = spec.dim
        rng = np.random.default_rng(seed)
        if isinstance(spec, HamiltonianSpec):
            ratios = OperatorService._hamiltonian_ratios(spec, rng, samples, dim, length)
            target = "hamiltonian"
        else:
            ratios = OperatorService._diffusion_ratios(spec, rng, samples, dim, length)
            target = "diffusion"

        limit = 1.0 + settings.float_rtol
        worst: Dict[str, float] = {}
        violations: List[ViolationRecord] = []
        for check, (values, sample) in ratios.items():
            worst[check] = float(np.max(values)) if values.size else 0.0
            bad = np.flatnonzero(values > limit)
            for index in bad[np.argsort(-values[bad])][:_MAX_VIOLATIONS]:
                violations.append(ViolationRecord(
                    check=check,
                    ratio=float(values[index]),
                    sample={key: np.atleast_1d(arr[index]).ravel().tolist() for key, arr in sample.items()},
                ))

        passed = not violations
        if passed:
            logger.info("Certificado %s/%s: ok %s", target, spec.kind.value, worst)
        else:
            logger.warning("Certificado %s/%s: %d violaciones", target, spec.kind.value, len(violations))
        return CertificateReport(
            target=target,
            kind=spec.kind.value,
            samples=samples,
            seed=seed,
            worst_ratios=worst,
            violations=violations,
            passed=passed,
        )

    @staticmethod
    def _hamiltonian_ratios(spec: HamiltonianSpec, rng, samples: int, dim: int, length: float):
        x = rng.uniform(0.0, length, (samples, dim))
        y = rng.uniform(0.0, length, (samples, dim))
        t = float(rng.uniform(0.0, 1.0))
        magnitude = 10.0 ** rng.uniform(-2.0, 2.0, (samples, 1))
        p = rng.standard_normal((samples, dim)) * magnitude
        diff = np.abs(spec.evaluate(x, t, p, length) - spec.evaluate(y, t, p, length))
        if spec.C_H == 0.0:
            scale = settings.float_rtol * (1.0 + np.abs(spec.evaluate(x, t, p, length)))
            ratio = np.where(diff <= scale, 0.0, np.inf)
        else:
            dist = periodic_distance(length, x, y)
            norm = np.sqrt(np.sum(p * p, axis=-1))
            ratio = diff / (spec.C_H * dist ** spec.beta * (1.0 + norm ** spec.gamma))
        return {"assH": (ratio, {"x": x, "y": y, "p": p})}

    @staticmethod
    def _diffusion_ratios(spec: DiffusionSpec, rng, samples: int, dim: int, length: float):
        x = rng.uniform(0.0, length, (samples, dim))
        t = float(rng.uniform(0.0, 1.0))
        M = _random_symmetric(rng, samples, dim)
        N = _random_psd(rng, samples, dim)
        trace = np.trace(N, axis1=-2, axis2=-1)
        base = spec.evaluate(x, t, M, length)
        shifted = spec.evaluate(x, t, M + N, length)
        tol = settings.float_rtol * (1.0 + np.abs(base) + np.abs(shifted))

        increase = shifted - base
        if spec.Lambda > 0.0:
            ellipticity = np.maximum(increase - tol, 0.0) / (spec.Lambda * trace)
        else:
            ellipticity = np.where(increase <= tol, 0.0, np.inf)
        # 1 + exceso: F(M) <= F(M + N) da exactamente 1
        excess = np.maximum(base - shifted - tol, 0.0)
        monotonicity = np.where(excess > 0.0, 1.0 + np.maximum(excess, 2.0 * tol), 1.0)

        at_zero = np.abs(spec.evaluate(x, t, np.zeros_like(M), length))
        if spec.C_F > 0.0:
            bound = at_zero / spec.C_F
        else:
            bound = np.where(at_zero == 0.0, 0.0, np.inf)

        sample = {"x": x, "M": M, "N": N}
        return {
            "ell": (ellipticity, sample),
            "mon": (monotonicity, sample),
            "Cf": (bound, {"x": x}),
        }

    @staticmethod
    def check_compatibility(alpha: float, beta: float, gamma: float) -> bool:
        """
        β + (α−1)γ > 0.

        Raises:
            CompatibilityError: Si algún exponente está fuera de rango
        """
        return check_compatibility(alpha, beta, gamma)

    @staticmethod
    def build_hamiltonian(config, dim: int) -> HamiltonianSpec:
        """
        Construye el Hamiltoniano desde su configuración.

        Raises:
            ConfigError: Si el tipo o los coeficientes son inválidos
        """
        try:
            kind = HamiltonianKind(config.kind)
        except ValueError:
            raise ConfigError(f"Tipo de Hamiltoniano desconocido: '{config.kind}'")
        params = dict(config.params)

        if kind is HamiltonianKind.TRANSPORT:
            velocity = params.get("velocity", [1.0])
            if not isinstance(velocity, list):
                velocity = [velocity]
            if len(velocity) != dim:
                raise ConfigError(f"La velocidad tiene {len(velocity)} componentes para dim = {dim}")
            gamma = 1.0 if config.gamma is None else config.gamma
            return HamiltonianSpec(kind, config.C_H, config.beta, gamma,
                                   velocity=tuple(_profile(v, 0.0) for v in velocity))
        if kind is HamiltonianKind.EIKONAL:
            gamma = 1.0 if config.gamma is None else config.gamma
            return HamiltonianSpec(kind, config.C_H, config.beta, gamma,
                                   speed=_profile(params.get("speed"), 1.0))
        if kind is HamiltonianKind.FORCED_EIKONAL:
            gamma = 0.0 if config.gamma is None else config.gamma
            return HamiltonianSpec(kind, config.C_H, config.beta, gamma,
                                   forcing=_profile(params.get("forcing"), 0.0))
        if kind is HamiltonianKind.QUADRATIC:
            return HamiltonianSpec.quadratic()
        if "value" not in params:
            raise ConfigError("custom_first_order solo admite H constante: params.value")
        return HamiltonianSpec.constant(float(params["value"]))

    @staticmethod
    def build_diffusion(config) -> DiffusionSpec:
        """
        Construye el operador de viscosidad desde su configuración.

        Raises:
            ConfigError: Si el tipo o los parámetros son inválidos
        """
        try:
            kind = DiffusionKind(config.kind)
        except ValueError:
            raise ConfigError(f"Tipo de difusión desconocido: '{config.kind}'")
        params = dict(config.params)
        if kind is DiffusionKind.SCALED_TRACE:
            matrix = params.get("matrix")
            if matrix is None:
                raise ConfigError("scaled_trace requiere params.matrix")
            modulation = params.get("modulation")
            return DiffusionSpec(
                kind, config.Lambda, config.C_F,
                matrix=tuple(tuple(float(v) for v in row) for row in matrix),
                modulation=None if modulation is None else _profile(modulation, 1.0),
            )
        if kind is DiffusionKind.PUCCI_MINUS:
            return DiffusionSpec(kind, config.Lambda, config.C_F,
                                 lambda_min=float(params.get("lambda_min", 0.0)))
        return DiffusionSpec(kind, config.Lambda, config.C_F)

    @staticmethod
    def build_problem(config: ProblemConfig) -> ProblemSpec:
        """
        Convierte la configuración validada en un ProblemSpec.

        Sin certificado declarado para u₀ se usa el de forma cerrada del perfil.
        Sin clase declarada para u(t) se toma la de u₀ (evolución) o (1, 0)
        (estacionario) de forma provisional y se marca para medición.

        Raises:
            ConfigError: Si algún componente es inválido
            CompatibilityError: Si β + (α−1)γ <= 0 con C_H ≠ 0
        """
        grid = make_grid(config.grid.dim, config.grid.N, config.grid.L)
        hamiltonian = OperatorService.build_hamiltonian(config.hamiltonian, grid.dim)
        diffusion = OperatorService.build_diffusion(config.diffusion)

        u0: Optional[Profile] = None
        u0_holder = HolderClass(1.0, 0.0)
        if config.u0 is not None:
            u0 = profile_from_config(config.u0.kind, config.u0.params)
            u0_holder = OperatorService._initial_certificate(u0, config.u0.eta, config.u0.seminorm, grid)

        measured = config.u_holder is None
        if not measured:
            u_holder = HolderClass(config.u_holder.alpha, config.u_holder.seminorm)
        elif config.rho == 0.0:
            u_holder = u0_holder
        else:
            u_holder = HolderClass(1.0, 0.0)

        trace = None
        rigid = hamiltonian.kind is HamiltonianKind.TRANSPORT and hamiltonian.is_x_independent()
        if measured and config.rho == 0.0 and rigid and diffusion.isotropic_scale() is not None:
            # El transporte rígido y el calor con coeficientes constantes no aumentan [u]_η
            seminorm = u0_holder.seminorm
            trace = lambda s: seminorm  # noqa: E731
            measured = False

        problem = ProblemSpec(
            hamiltonian=hamiltonian,
            diffusion=diffusion,
            u0=u0,
            horizon=config.T,
            rho=config.rho,
            u0_holder=u0_holder,
            u_holder=u_holder,
            u_seminorm_trace=trace,
            grid=grid,
            name=config.name,
            initial_mismatch=config.initial_mismatch,
            u_holder_measured=measured,
        )
        logger.info("Problema '%s' construido: H=%s F=%s N=%d", config.name,
                    hamiltonian.kind.value, diffusion.kind.value, grid.points_per_axis)
        return problem

    @staticmethod
    def _initial_certificate(profile: Profile, eta: Optional[float], seminorm: Optional[float],
                             grid: Grid) -> HolderClass:
        closed = profile.holder_certificate(grid.dim, grid.length)
        if eta is None and seminorm is None:
            return closed
        if eta is None:
            return HolderClass(closed.alpha, seminorm)
        if seminorm is not None:
            return HolderClass(eta, seminorm)
        if eta > closed.alpha:
            raise ConfigError(
                f"η = {eta} supera el exponente demostrado {closed.alpha} del perfil; declare la seminorma"
            )
        # [u]_η <= [u]_α · diam^(α−η) en el toro
        diameter = grid.length * math.sqrt(grid.dim) / 2.0
        return HolderClass(eta, closed.seminorm * diameter ** (closed.alpha - eta))
