"""
Modelos Pydantic para certificados, verificaciones de envolventes y ledgers.
"""
from pydantic import BaseModel, Field
from typing import Dict, List, Optional


class ViolationRecord(BaseModel):
    """Desigualdad estructural violada en una muestra."""
    check: str = Field(description="Nombre de la desigualdad (assH, ell, mon, Cf)")
    ratio: float = Field(description="Cociente medido; > 1 es violación")
    sample: Dict[str, List[float]] = Field(default_factory=dict, description="Muestra que produjo la violación")


class CertificateReport(BaseModel):
    """Auditoría por muestreo de las constantes declaradas de un operador."""
    target: str = Field(description="hamiltonian o diffusion")
    kind: str = Field(description="Tipo de catálogo auditado")
    samples: int = Field(description="Número de muestras aleatorias")
    seed: int = Field(description="Semilla del generador")
    worst_ratios: Dict[str, float] = Field(description="Peor cociente por desigualdad")
    violations: List[ViolationRecord] = Field(default_factory=list)
    passed: bool = Field(description="True si ningún cociente supera 1")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "target": "hamiltonian",
                    "kind": "quadratic",
                    "samples": 10000,
                    "seed": 0,
                    "worst_ratios": {"assH": 0.0},
                    "violations": [],
                    "passed": True
                }
            ]
        }
    }


class BoundCheck(BaseModel):
    """Una desigualdad de la verificación de convoluciones."""
    name: str = Field(description="Identificador de la desigualdad")
    passed: bool
    measured: float = Field(description="Lado izquierdo máximo medido")
    bound: float = Field(description="Lado derecho (con holgura si aplica)")
    slack: float = Field(default=0.0, description="Holgura aditiva declarada")

    @property
    def margin(self) -> float:
        return self.bound - self.measured


class EnvelopeCheckReport(BaseModel):
    """Resultado de las cinco verificaciones sobre u^δ y u_δ."""
    delta: float
    alpha: float
    seminorm: float
    points_per_axis: int
    dim: int
    checks: List[BoundCheck]
    sandwich: bool = Field(description="u_δ ≤ f ≤ u^δ en todos los nodos")
    passed: bool
    warnings: List[str] = Field(default_factory=list)

    def check(self, name: str) -> BoundCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)


class SemiconvexityReport(BaseModel):
    """Segundas diferencias de una envolvente frente a ±h²/δ."""
    kind: str
    passed: bool
    worst_second_difference: float = Field(
        description="Mínima segunda diferencia (sup) o máxima (inf) sobre nodos no marcados"
    )
    threshold: float = Field(description="−h²/δ para sup, +h²/δ para inf")
    flagged_nodes: int = Field(default=0, description="Nodos cuyo estencil cruza la imagen mínima")


class RateLedgerReport(BaseModel):
    """Serialización JSON de un ledger de evolución."""
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
    C2_times: List[float]
    C2_values: List[float]
    P: float
    exponent: float
    case_tag: str
    provenance: str
    initial_mismatch: float = 0.0
    integrability_suspect: bool = False


class StationaryLedgerReport(BaseModel):
    """Serialización JSON de un ledger estacionario."""
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
    exponent: float
    provenance: str


class LedgerSummary(BaseModel):
    """Ledger junto con la cota y el δ óptimo en (t, ε) solicitados."""
    ledger: Optional[RateLedgerReport] = None
    stationary_ledger: Optional[StationaryLedgerReport] = None
    time: Optional[float] = None
    epsilon: float
    bound: float
    optimal_delta: Optional[float] = None
