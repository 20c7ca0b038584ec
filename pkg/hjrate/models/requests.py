"""
Modelos Pydantic de las solicitudes y respuestas de los verbos (CLI y HTTP).
"""
from datetime import datetime
from pydantic import BaseModel, Field, model_validator
from typing import List, Optional

from hjrate.models.problem import GridConfig, ProblemConfig, ProfileConfig
from hjrate.models.reports import (
    CertificateReport,
    EnvelopeCheckReport,
    LedgerSummary,
    SemiconvexityReport,
)
from hjrate.models.sweep import SweepReport


class CertifyRequest(BaseModel):
    """Solicitud de certificación estructural de H y F."""
    problem: ProblemConfig
    samples: Optional[int] = Field(default=None, ge=1, description="Muestras (por defecto settings.certificate_samples)")
    seed: int = Field(default=0, description="Semilla del muestreo")


class CertifyResponse(BaseModel):
    """Certificados de H y F."""
    reports: List[CertificateReport]
    passed: bool


class EnvelopeCheckConfig(BaseModel):
    """Función de malla (perfil o valores) y parámetros de la batería de envolventes."""
    grid: GridConfig = Field(default_factory=GridConfig)
    profile: Optional[ProfileConfig] = Field(default=None, description="Perfil en forma cerrada")
    values: Optional[List[float]] = Field(default=None, description="Valores en orden lexicográfico")
    alpha: float = Field(default=1.0, ge=0.0, le=1.0, description="Exponente α del certificado")
    seminorm: Optional[float] = Field(default=None, ge=0.0, description="Seminorma K; si falta se mide")
    deltas: List[float] = Field(default_factory=lambda: [0.1, 0.01, 0.001], min_length=1)

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "grid": {"dim": 1, "N": 512, "L": 1.0},
                    "profile": {"kind": "abs_sine_power", "params": {"exponent": 0.5}},
                    "alpha": 0.5,
                    "deltas": [0.1, 0.01, 0.001]
                }
            ]
        }
    }

    @model_validator(mode="after")
    def _check_source(self) -> "EnvelopeCheckConfig":
        if (self.profile is None) == (self.values is None):
            raise ValueError("Indique exactamente uno de 'profile' o 'values'")
        if any(not delta > 0 for delta in self.deltas):
            raise ValueError("Todos los δ deben ser positivos")
        return self


class EnvelopeCheckResponse(BaseModel):
    """Resultados de la batería por cada δ."""
    reports: List[EnvelopeCheckReport]
    semiconvexity: List[SemiconvexityReport]
    passed: bool


class LedgerRequest(BaseModel):
    """Ledger de un problema y su cota en una rejilla de (t, ε)."""
    problem: ProblemConfig
    times: List[float] = Field(default_factory=list, description="Tiempos en (0, T]; por defecto [T]")
    epsilons: List[float] = Field(default_factory=lambda: [1e-3], min_length=1)
    ledger_mesh: int = Field(default=257, ge=2)

    @model_validator(mode="after")
    def _check_values(self) -> "LedgerRequest":
        if any(not epsilon > 0 for epsilon in self.epsilons):
            raise ValueError("Todos los ε deben ser positivos")
        for time in self.times:
            if not 0.0 < time <= self.problem.T:
                raise ValueError(f"Tiempo {time} fuera de (0, {self.problem.T}]")
        return self


class LedgerResponse(BaseModel):
    summaries: List[LedgerSummary]


class SweepRunResponse(BaseModel):
    """Barrido ejecutado y registrado."""
    id: str
    kind: str
    passed: bool
    created_at: datetime
    report: SweepReport
