"""
Modelos Pydantic para la configuración JSON de problemas y parámetros de solución.
"""
from pydantic import BaseModel, Field, model_validator
from typing import Any, Dict, List, Literal, Optional, Union


class ProfileConfig(BaseModel):
    """Perfil periódico en forma cerrada."""
    kind: str = Field(description="constant, sine, cosine, triangle, abs_sine_power o random")
    params: Dict[str, Any] = Field(default_factory=dict, description="Parámetros del perfil")


class HamiltonianConfig(BaseModel):
    """Entrada del catálogo de Hamiltonianos con sus constantes declaradas."""
    kind: str = Field(description="transport, eikonal, forced_eikonal, quadratic o custom_first_order")
    params: Dict[str, Any] = Field(default_factory=dict, description="Coeficientes según el tipo")
    C_H: float = Field(default=0.0, ge=0.0, description="Constante de Hölder en x")
    beta: float = Field(default=1.0, gt=0.0, le=1.0, description="Exponente de Hölder en x")
    gamma: Optional[float] = Field(default=None, ge=0.0, description="Crecimiento en |p| (por defecto el del tipo)")


class DiffusionConfig(BaseModel):
    """Entrada del catálogo de operadores de viscosidad."""
    kind: str = Field(default="laplacian", description="laplacian, scaled_trace, pucci_minus o zero")
    Lambda: float = Field(default=1.0, ge=0.0, description="Constante de elipticidad Λ")
    C_F: float = Field(default=0.0, ge=0.0, description="Cota de |F(x,t,0)|")
    params: Dict[str, Any] = Field(default_factory=dict, description="lambda_min, matrix, modulation")


class InitialDataConfig(ProfileConfig):
    """Dato inicial con su certificado de Hölder (opcional)."""
    eta: Optional[float] = Field(default=None, gt=0.0, le=1.0, description="Exponente η de u₀")
    seminorm: Optional[float] = Field(default=None, ge=0.0, description="Seminorma [u₀]_η")


class HolderConfig(BaseModel):
    """Clase de Hölder declarada para u(t)."""
    alpha: float = Field(ge=0.0, le=1.0, description="Exponente α")
    seminorm: float = Field(ge=0.0, description="Cota de [u(t)]_α")


class GridConfig(BaseModel):
    """Malla periódica uniforme."""
    dim: int = Field(default=1, ge=1, le=2, description="Dimensión")
    N: int = Field(default=256, ge=2, description="Puntos por eje")
    L: float = Field(default=1.0, gt=0.0, description="Longitud del toro")


class ProblemConfig(BaseModel):
    """Problema completo tal como se lee del archivo JSON."""
    name: str = Field(default="problem", description="Nombre del problema en los reportes")
    hamiltonian: HamiltonianConfig
    diffusion: DiffusionConfig = Field(default_factory=DiffusionConfig)
    u0: Optional[InitialDataConfig] = Field(default=None, description="Dato inicial (semilla si ρ > 0)")
    u_holder: Optional[HolderConfig] = Field(default=None, description="Clase de u(t); si falta se mide")
    T: float = Field(default=1.0, gt=0.0, description="Horizonte temporal")
    rho: float = Field(default=0.0, ge=0.0, description="0 para evolución, > 0 estacionario")
    grid: GridConfig = Field(default_factory=GridConfig)
    initial_mismatch: float = Field(default=0.0, ge=0.0, description="‖u₀ − u_(ε)(0)‖_∞ añadido a la cota")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "name": "transport-triangle",
                    "hamiltonian": {"kind": "transport", "params": {"velocity": [1.0]}, "C_H": 0.0},
                    "diffusion": {"kind": "laplacian", "Lambda": 1.0, "C_F": 0.0},
                    "u0": {"kind": "triangle", "params": {"slope": 1.0, "center": 0.5}, "eta": 1.0, "seminorm": 1.0},
                    "T": 0.25,
                    "rho": 0.0,
                    "grid": {"dim": 1, "N": 2048, "L": 1.0}
                }
            ]
        }
    }

    @model_validator(mode="after")
    def _check_regularity(self) -> "ProblemConfig":
        if self.rho == 0.0 and self.u0 is None:
            raise ValueError("Un problema de evolución (rho = 0) requiere u0")
        if self.rho == 0.0 and self.u0.eta is not None and self.u_holder is not None:
            if self.u0.eta > self.u_holder.alpha:
                raise ValueError(f"Se requiere η <= α (η={self.u0.eta}, α={self.u_holder.alpha})")
        if self.u_holder is not None and self.hamiltonian.C_H != 0.0 and self.hamiltonian.gamma is not None:
            H = self.hamiltonian
            if H.beta + (self.u_holder.alpha - 1.0) * H.gamma <= 0.0:
                raise ValueError("Compatibilidad β + (α−1)γ > 0 violada con C_H ≠ 0")
        return self


class SolveParams(BaseModel):
    """Parámetros del esquema explícito."""
    dt: Union[float, Literal["auto"]] = Field(default="auto", description="Paso de tiempo o 'auto'")
    cfl_safety: float = Field(default=0.9, gt=0.0, le=1.0, description="Factor de seguridad CFL")
    artificial_viscosity: Union[float, Literal["auto"]] = Field(
        default="auto", description="Coeficiente θ de Lax-Friedrichs o 'auto'"
    )
    snapshot_times: List[float] = Field(default_factory=list, description="Tiempos de las instantáneas")

    @model_validator(mode="after")
    def _check_values(self) -> "SolveParams":
        if self.dt != "auto" and not self.dt > 0:
            raise ValueError("dt debe ser positivo o 'auto'")
        if self.artificial_viscosity != "auto" and self.artificial_viscosity < 0:
            raise ValueError("θ debe ser >= 0 o 'auto'")
        if any(time < 0 for time in self.snapshot_times):
            raise ValueError("Los tiempos de instantánea deben ser >= 0")
        return self


class StationaryParams(BaseModel):
    """Parámetros de la iteración de punto fijo."""
    tol: float = Field(default=1e-8, gt=0.0, description="Tolerancia del residuo")
    max_iters: int = Field(default=200_000, ge=1, description="Máximo de iteraciones")
    cfl_safety: float = Field(default=0.9, gt=0.0, le=1.0)
