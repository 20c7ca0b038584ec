"""
Modelos Pydantic para barridos en ε y sus reportes.
"""
from pydantic import BaseModel, Field, model_validator
from enum import Enum
from typing import List, Optional, Tuple

from hjrate.models.problem import ProblemConfig, SolveParams, StationaryParams
from hjrate.models.reports import RateLedgerReport, StationaryLedgerReport


class ReferenceKind(str, Enum):
    """Origen de la solución inviscida de referencia."""
    ORACLE = "oracle"
    RICHARDSON = "richardson"


class SweepKind(str, Enum):
    """Tipo de barrido."""
    EVOLUTION = "evolution"
    STATIONARY = "stationary"


class EpsilonRange(BaseModel):
    """Sucesión geométrica de viscosidades."""
    eps_max: float = Field(gt=0.0, description="ε máximo")
    eps_min: float = Field(gt=0.0, description="ε mínimo")
    count: int = Field(ge=4, description="Número de valores (>= 4 para el ajuste)")

    @model_validator(mode="after")
    def _check_order(self) -> "EpsilonRange":
        if self.eps_min > self.eps_max:
            raise ValueError(f"eps_min={self.eps_min} mayor que eps_max={self.eps_max}")
        return self


class SweepConfig(BaseModel):
    """Configuración de un barrido."""
    problem: ProblemConfig
    epsilons: EpsilonRange
    reference: ReferenceKind = Field(default=ReferenceKind.RICHARDSON)
    eval_times: List[float] = Field(default_factory=list, description="Tiempos en (0, T]; por defecto [T]")
    grids: List[int] = Field(default_factory=list, description="Resoluciones; por defecto la del problema")
    refinements: int = Field(default=2, ge=2, description="Niveles de Richardson")
    reference_points: Optional[int] = Field(default=None, ge=2, description="N de la referencia estacionaria")
    solve: SolveParams = Field(default_factory=SolveParams)
    stationary: StationaryParams = Field(default_factory=StationaryParams)
    output_dir: Optional[str] = Field(default=None, description="Directorio de salida")
    seed: int = Field(default=0, description="Semilla (HJRATE_SEED tiene prioridad)")
    ledger_mesh: int = Field(default=257, ge=2, description="Nodos de la malla de cuadratura de C₂")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "problem": {
                        "hamiltonian": {"kind": "transport", "params": {"velocity": [1.0]}},
                        "u0": {"kind": "triangle", "params": {"slope": 1.0, "center": 0.5}},
                        "T": 0.25,
                        "grid": {"dim": 1, "N": 2048, "L": 1.0}
                    },
                    "epsilons": {"eps_max": 0.1, "eps_min": 0.0001, "count": 8},
                    "reference": "oracle",
                    "eval_times": [0.25]
                }
            ]
        }
    }

    @model_validator(mode="after")
    def _check_times(self) -> "SweepConfig":
        horizon = self.problem.T
        for time in self.eval_times:
            if not 0.0 < time <= horizon:
                raise ValueError(f"Tiempo de evaluación {time} fuera de (0, {horizon}]")
        return self

    def times(self) -> List[float]:
        return sorted(self.eval_times) if self.eval_times else [self.problem.T]

    def resolutions(self) -> List[int]:
        return list(self.grids) if self.grids else [self.problem.grid.N]


class SweepRow(BaseModel):
    """Una fila del barrido: (ε, t, N) con error medido y cota."""
    epsilon: float
    time: float
    points_per_axis: int
    sup_error: float
    error_plus: float = Field(description="max(u − u_(ε))")
    error_minus: float = Field(description="max(u_(ε) − u)")
    bound_rhs: float
    discretization_proxy: float
    contaminated: bool
    bound_satisfied: bool


class FitResult(BaseModel):
    """Ajuste de mínimos cuadrados en escala log-log."""
    time: float
    slope: float
    intercept: float
    stderr: float
    interval: Tuple[float, float]
    points_used: int


class SweepReport(BaseModel):
    """Reporte completo de un barrido."""
    name: str
    kind: SweepKind
    reference: ReferenceKind
    epsilon_range: Tuple[float, float]
    rows: List[SweepRow] = Field(default_factory=list)
    fits: List[FitResult] = Field(default_factory=list)
    fitted_rate: Optional[float] = None
    fitted_interval: Optional[Tuple[float, float]] = None
    theoretical_exponent: float
    ledger: Optional[RateLedgerReport] = None
    stationary_ledger: Optional[StationaryLedgerReport] = None
    contamination_factor: float
    slack_factor: float
    certificates_passed: bool = Field(default=True, description="H y F superaron la certificación estructural")
    notes: List[str] = Field(default_factory=list)

    @property
    def all_bounds_satisfied(self) -> bool:
        return all(row.bound_satisfied for row in self.rows if not row.contaminated)

    @property
    def rate_consistent(self) -> bool:
        """Pendiente ajustada >= exponente teórico − 0.1 (o sin ajuste disponible)."""
        if self.fitted_rate is None:
            return True
        return self.fitted_rate >= self.theoretical_exponent - 0.1
