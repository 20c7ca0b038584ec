"""
Clases Python para los objetos de trabajo de hjrate.
"""
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union
import math

import numpy as np

from hjrate.core.exceptions import BoundsError, CompatibilityError, ConfigError, GridError
from hjrate.models.sweep import SweepReport
from hjrate.structures.catalog import DiffusionSpec, HamiltonianSpec, check_compatibility
from hjrate.structures.grid import Grid, GridFn, HolderClass
from hjrate.structures.profiles import Profile


class EnvelopeKind(str, Enum):
    """Tipo de convolución."""
    SUP = "sup"
    INF = "inf"


class LedgerCase(str, Enum):
    """Caso estructural de la cota de evolución."""
    GENERAL = "general"
    C_H_ZERO = "C_H_zero"
    C1_ZERO = "C1_zero"


class TraceProvenance(str, Enum):
    """Origen de la traza s ↦ [u(s)]_α."""
    DECLARED = "declared"
    CLOSED_FORM = "closed_form"
    MEASURED = "measured"


@dataclass(frozen=True)
class EnvelopeResult:
    """
    Resultado de una sup/inf-convolución.

    arg_map tiene forma (*shape, dim) y guarda, por nodo, el multi-índice de un
    maximizador (sup) o minimizador (inf).
    """
    envelope: GridFn
    arg_map: np.ndarray
    delta: float
    kind: EnvelopeKind

    def arg_flat_indices(self) -> np.ndarray:
        """Índice lexicográfico del argumento en cada nodo."""
        grid = self.envelope.grid
        return np.ravel_multi_index(tuple(np.moveaxis(self.arg_map, -1, 0)), grid.shape)


@dataclass(frozen=True)
class ProblemSpec:
    """
    Problema de evolución (rho = 0) o estacionario (rho > 0).

    u0 es un perfil en forma cerrada o una función de malla fija. Para problemas
    estacionarios u0 es la semilla de la iteración (por defecto −H(x,0,0)/ρ).
    Con u_holder_measured = True la clase de u no fue declarada: el arnés la mide
    sobre la solución de referencia.
    """
    hamiltonian: HamiltonianSpec
    diffusion: DiffusionSpec
    u0: Union[Profile, GridFn, None]
    horizon: float
    rho: float
    u0_holder: HolderClass
    u_holder: HolderClass
    u_seminorm_trace: Optional[Callable[[float], float]] = field(default=None, compare=False)
    grid: Optional[Grid] = None
    name: str = "problem"
    initial_mismatch: float = 0.0
    u_holder_measured: bool = False

    def __post_init__(self):
        if not self.horizon > 0:
            raise ConfigError(f"El horizonte T debe ser positivo: {self.horizon}")
        if self.rho < 0:
            raise ConfigError(f"ρ debe ser >= 0: {self.rho}")
        if self.initial_mismatch < 0:
            raise ConfigError("El desajuste inicial debe ser >= 0")

        eta = self.u0_holder.alpha
        alpha = self.u_holder.alpha
        if not self.is_stationary:
            if self.u0 is None:
                raise ConfigError("Un problema de evolución requiere u0")
            if not 0.0 < eta <= 1.0:
                raise ConfigError(f"η debe estar en (0,1]: {eta}")
            if eta > alpha:
                raise ConfigError(f"Se requiere η <= α (η={eta}, α={alpha})")

        H = self.hamiltonian
        if H.C_H != 0.0 and not check_compatibility(alpha, H.beta, H.gamma):
            raise CompatibilityError(
                f"β + (α−1)γ = {H.beta + (alpha - 1.0) * H.gamma} <= 0 con C_H = {H.C_H}"
            )

    @property
    def is_stationary(self) -> bool:
        return self.rho > 0.0

    def sample_u0(self, grid: Grid) -> GridFn:
        """
        Dato inicial sobre la malla.

        Raises:
            GridError: Si u0 es una función de malla sobre otra malla
        """
        if isinstance(self.u0, Profile):
            return self.u0.sample(grid)
        if isinstance(self.u0, GridFn):
            if self.u0.grid == grid:
                return self.u0
            raise GridError("u0 es una función de malla fija y no puede remuestrearse")
        coords = grid.coordinates()
        zero = np.zeros_like(coords)
        values = -self.hamiltonian.evaluate(coords, 0.0, zero, grid.length) / self.rho
        return GridFn(grid, values)


@dataclass(frozen=True)
class Solution:
    """Instantáneas de una solución numérica."""
    snapshots: List[Tuple[float, GridFn]]
    epsilon: float
    residual: float = 0.0
    iterations: int = 0
    steps: int = 0
    dt_min: float = 0.0
    dt_max: float = 0.0
    cfl_used: float = 0.0
    residual_history: List[float] = field(default_factory=list)

    @property
    def times(self) -> List[float]:
        return [time for time, _ in self.snapshots]

    @property
    def final(self) -> GridFn:
        return self.snapshots[-1][1]

    def at(self, time: float) -> GridFn:
        """
        Instantánea en un tiempo solicitado.

        Raises:
            KeyError: Si no hay instantánea en ese tiempo
        """
        for snapshot_time, values in self.snapshots:
            if math.isclose(snapshot_time, time, rel_tol=1e-12, abs_tol=1e-15):
                return values
        raise KeyError(f"Sin instantánea en t={time}")


@dataclass(frozen=True)
class RichardsonResult:
    """Referencia restringida a la malla base con su proxy de discretización."""
    solution: Solution
    levels: List[int]
    increments: Dict[float, List[float]]

    def proxy(self, time: float = 0.0) -> float:
        """Mayor incremento ‖u_{2^k N} − u_{2^{k−1} N}‖_∞ en el tiempo dado: estima el error de la malla base."""
        for key, values in self.increments.items():
            if math.isclose(key, time, rel_tol=1e-12, abs_tol=1e-15):
                return max(values)
        raise KeyError(f"Sin incrementos en t={time}")


@dataclass(frozen=True)
class RateLedger:
    """Constantes de la cota de evolución."""
    alpha: float
    beta: float
    gamma: float
    eta: float
    C_H: float
    Lambda: float
    C_F: float
    n: int
    u0_seminorm: float
    C1: float
    C2_times: np.ndarray
    C2_values: np.ndarray
    P: float
    exponent: float
    case_tag: LedgerCase
    provenance: TraceProvenance = TraceProvenance.DECLARED
    initial_mismatch: float = 0.0
    integrability_suspect: bool = False

    def C2(self, t: float) -> float:
        """
        C₂(t) interpolado sobre la malla de cuadratura.

        Raises:
            BoundsError: Si t está fuera de [0, T]
        """
        horizon = float(self.C2_times[-1])
        if t < 0 or t > horizon * (1.0 + 1e-12):
            raise BoundsError(f"t={t} fuera de la malla de cuadratura [0, {horizon}]")
        return float(np.interp(min(t, horizon), self.C2_times, self.C2_values))


@dataclass(frozen=True)
class StationaryLedger:
    """Constantes de la cota estacionaria."""
    alpha: float
    beta: float
    gamma: float
    C_H: float
    Q: float
    C3: float
    rho: float
    Lambda: float
    C_F: float
    n: int
    u_seminorm: float
    provenance: TraceProvenance = TraceProvenance.DECLARED


@dataclass
class StoredRun:
    """Barrido completado y registrado por el servicio HTTP."""
    id: str
    kind: str
    report: SweepReport
    created_at: datetime
    output_dir: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.report.all_bounds_satisfied and self.report.certificates_passed
