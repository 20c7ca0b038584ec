"""
Catálogo de Hamiltonianos H(x,t,p,M) y operadores de viscosidad F(x,t,M).

Cada entrada declara sus constantes estructurales; el servicio de operadores
las audita por muestreo antes de usarlas en las cotas.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np

from hjrate.core.exceptions import CompatibilityError, ConfigError, DimensionMismatchError
from hjrate.structures.profiles import Profile, constant_profile


class HamiltonianKind(str, Enum):
    """Tipos de Hamiltoniano del catálogo."""
    TRANSPORT = "transport"
    EIKONAL = "eikonal"
    FORCED_EIKONAL = "forced_eikonal"
    QUADRATIC = "quadratic"
    CUSTOM_FIRST_ORDER = "custom_first_order"


class DiffusionKind(str, Enum):
    """Tipos de operador de viscosidad del catálogo."""
    LAPLACIAN = "laplacian"
    SCALED_TRACE = "scaled_trace"
    PUCCI_MINUS = "pucci_minus"
    ZERO = "zero"


@dataclass(frozen=True)
class HamiltonianSpec:
    """
    Hamiltoniano de primer orden con constantes (C_H, β, γ) de la hipótesis

        |H(x,t,p,M) − H(y,t,p,M)| ≤ C_H dist(x,y)^β (1 + |p|^γ).

    Fórmulas: transport c(x)·p, eikonal a(x)|p|, forced_eikonal |p| − f(x),
    quadratic |p|²/2, custom_first_order function(x, t, p).
    """
    kind: HamiltonianKind
    C_H: float
    beta: float
    gamma: float
    velocity: Tuple[Profile, ...] = ()
    speed: Optional[Profile] = None
    forcing: Optional[Profile] = None
    function: Optional[Callable[[np.ndarray, float, np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )
    p_lipschitz: float = 0.0
    time_dependent: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", HamiltonianKind(self.kind))
        object.__setattr__(self, "velocity", tuple(self.velocity))
        if self.C_H < 0:
            raise ConfigError(f"C_H debe ser >= 0, recibido {self.C_H}")
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError(f"β debe estar en (0,1], recibido {self.beta}")
        if self.gamma < 0:
            raise ConfigError(f"γ debe ser >= 0, recibido {self.gamma}")

        kind = self.kind
        if kind is HamiltonianKind.TRANSPORT and not self.velocity:
            raise ConfigError("transport requiere un campo de velocidad")
        if kind is HamiltonianKind.EIKONAL and self.speed is None:
            raise ConfigError("eikonal requiere una rapidez a(x)")
        if kind is HamiltonianKind.FORCED_EIKONAL and self.forcing is None:
            raise ConfigError("forced_eikonal requiere un forzamiento f(x)")
        if kind is HamiltonianKind.CUSTOM_FIRST_ORDER and self.function is None:
            raise ConfigError("custom_first_order requiere una función H(x, t, p)")

        if kind in (HamiltonianKind.TRANSPORT, HamiltonianKind.EIKONAL) and self.gamma != 1.0:
            raise ConfigError(f"{kind.value} tiene crecimiento γ = 1, declarado {self.gamma}")
        if kind is HamiltonianKind.FORCED_EIKONAL and self.gamma != 0.0:
            raise ConfigError("forced_eikonal: la parte en |p| no depende de x, γ = 0")
        if kind is HamiltonianKind.QUADRATIC and self.C_H != 0.0:
            raise ConfigError("quadratic no depende de x: C_H = 0")

    @property
    def dim(self) -> Optional[int]:
        """Dimensión impuesta por el campo de velocidad (None si es libre)."""
        return len(self.velocity) if self.velocity else None

    def evaluate(self, x: np.ndarray, t: float, p: np.ndarray, length: float) -> np.ndarray:
        """
        Evalúa H vectorizado sobre los ejes iniciales.

        Args:
            x: Puntos (..., d)
            t: Tiempo
            p: Gradientes (..., d)
            length: Longitud L del toro (período de los coeficientes)

        Returns:
            Array (...,) con H(x, t, p)
        """
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        if x.shape[-1] != p.shape[-1]:
            raise DimensionMismatchError(f"x tiene dimensión {x.shape[-1]} y p {p.shape[-1]}")
        kind = self.kind

        if kind is HamiltonianKind.TRANSPORT:
            if len(self.velocity) != p.shape[-1]:
                raise DimensionMismatchError(
                    f"Velocidad de {len(self.velocity)} componentes para p de dimensión {p.shape[-1]}"
                )
            total = 0.0
            for axis, component in enumerate(self.velocity):
                total = total + component(x, length) * p[..., axis]
            return np.asarray(total, dtype=float)

        norm = np.sqrt(np.sum(p * p, axis=-1))
        if kind is HamiltonianKind.EIKONAL:
            return self.speed(x, length) * norm
        if kind is HamiltonianKind.FORCED_EIKONAL:
            return norm - self.forcing(x, length)
        if kind is HamiltonianKind.QUADRATIC:
            return 0.5 * norm * norm
        return np.asarray(self.function(x, t, p), dtype=float)

    def derivative_bounds(self, length: float, p_abs_max: np.ndarray) -> np.ndarray:
        """
        Cotas de |∂H/∂p_a| por eje sobre el rango de gradientes observado.

        Args:
            length: Longitud del toro
            p_abs_max: max |p_a| observado por eje, forma (d,)

        Returns:
            Array (d,) de cotas
        """
        p_abs_max = np.asarray(p_abs_max, dtype=float)
        d = p_abs_max.shape[0]
        kind = self.kind
        if kind is HamiltonianKind.TRANSPORT:
            return np.array([component.max_abs(length, d) for component in self.velocity])
        if kind is HamiltonianKind.EIKONAL:
            return np.full(d, self.speed.max_abs(length, d))
        if kind is HamiltonianKind.FORCED_EIKONAL:
            return np.ones(d)
        if kind is HamiltonianKind.QUADRATIC:
            return p_abs_max.copy()
        return np.full(d, float(self.p_lipschitz))

    def is_x_independent(self) -> bool:
        """True si el Hamiltoniano no depende de x."""
        kind = self.kind
        if kind is HamiltonianKind.TRANSPORT:
            return all(component.is_constant() for component in self.velocity)
        if kind is HamiltonianKind.EIKONAL:
            return self.speed.is_constant()
        if kind is HamiltonianKind.FORCED_EIKONAL:
            return self.forcing.is_constant()
        if kind is HamiltonianKind.QUADRATIC:
            return True
        return self.C_H == 0.0

    def is_unit_eikonal(self) -> bool:
        """True si H(p) = |p| (eikonal con a ≡ 1 o forzamiento nulo)."""
        if self.kind is HamiltonianKind.EIKONAL:
            return self.speed.is_constant() and float(self.speed.params.get("value", 0.0)) == 1.0
        if self.kind is HamiltonianKind.FORCED_EIKONAL:
            return self.forcing.is_constant() and float(self.forcing.params.get("value", 0.0)) == 0.0
        return False

    @classmethod
    def transport(cls, velocity: Tuple[Profile, ...], C_H: float = 0.0, beta: float = 1.0) -> "HamiltonianSpec":
        return cls(HamiltonianKind.TRANSPORT, C_H, beta, 1.0, velocity=tuple(velocity))

    @classmethod
    def eikonal(cls, speed: Profile, C_H: float = 0.0, beta: float = 1.0) -> "HamiltonianSpec":
        return cls(HamiltonianKind.EIKONAL, C_H, beta, 1.0, speed=speed)

    @classmethod
    def forced_eikonal(cls, forcing: Profile, C_H: float = 0.0, beta: float = 1.0) -> "HamiltonianSpec":
        return cls(HamiltonianKind.FORCED_EIKONAL, C_H, beta, 0.0, forcing=forcing)

    @classmethod
    def quadratic(cls) -> "HamiltonianSpec":
        return cls(HamiltonianKind.QUADRATIC, 0.0, 1.0, 0.0)

    @classmethod
    def constant(cls, value: float) -> "HamiltonianSpec":
        """H ≡ value, independiente de x y de p."""
        def _constant(x, t, p):
            return np.full(np.shape(p)[:-1], float(value))

        return cls(HamiltonianKind.CUSTOM_FIRST_ORDER, 0.0, 1.0, 0.0, function=_constant)


@dataclass(frozen=True)
class DiffusionSpec:
    """
    Operador de viscosidad F(x,t,M) con constantes (Λ, C_F).

    laplacian: Tr(M); scaled_trace: a(x)·Tr(A M) con 0 ≤ a(x)A ≤ ΛI;
    pucci_minus: ínfimo de Tr(AM) sobre λI ⪯ A ⪯ ΛI; zero: 0.
    """
    kind: DiffusionKind
    Lambda: float
    C_F: float = 0.0
    lambda_min: float = 0.0
    matrix: Optional[Tuple[Tuple[float, ...], ...]] = None
    modulation: Optional[Profile] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DiffusionKind(self.kind))
        if self.Lambda < 0 or self.C_F < 0:
            raise ConfigError("Λ y C_F deben ser >= 0")
        if self.kind is DiffusionKind.LAPLACIAN and self.Lambda < 1.0:
            raise ConfigError(f"El laplaciano requiere Λ >= 1, declarado {self.Lambda}")
        if self.kind is DiffusionKind.PUCCI_MINUS and not 0.0 <= self.lambda_min <= self.Lambda:
            raise ConfigError(f"Pucci requiere 0 <= λ <= Λ, recibido λ={self.lambda_min}, Λ={self.Lambda}")
        if self.kind is DiffusionKind.SCALED_TRACE:
            if self.matrix is None:
                raise ConfigError("scaled_trace requiere la matriz A")
            A = np.asarray(self.matrix, dtype=float)
            if A.ndim != 2 or A.shape[0] != A.shape[1] or not np.allclose(A, A.T):
                raise ConfigError("La matriz A debe ser cuadrada y simétrica")
            eigenvalues = np.linalg.eigvalsh(A)
            if eigenvalues.min() < -1e-14:
                raise ConfigError("La matriz A debe ser semidefinida positiva")
            scale = 1.0 if self.modulation is None else self.modulation.max_abs(1.0)
            if scale * eigenvalues.max() > self.Lambda * (1.0 + 1e-12):
                raise ConfigError(f"a(x)A excede ΛI con Λ = {self.Lambda}")

    def evaluate(self, x: np.ndarray, t: float, M: np.ndarray, length: float) -> np.ndarray:
        """
        Evalúa F vectorizado.

        Args:
            x: Puntos (..., d)
            t: Tiempo
            M: Matrices simétricas (..., d, d)
            length: Longitud del toro

        Returns:
            Array (...,) con F(x, t, M)
        """
        M = np.asarray(M, dtype=float)
        kind = self.kind
        if kind is DiffusionKind.ZERO:
            return np.zeros(M.shape[:-2])
        if kind is DiffusionKind.LAPLACIAN:
            return np.trace(M, axis1=-2, axis2=-1)
        if kind is DiffusionKind.SCALED_TRACE:
            A = np.asarray(self.matrix, dtype=float)
            if A.shape[0] != M.shape[-1]:
                raise DimensionMismatchError(f"A es {A.shape} y M es {M.shape[-2:]}")
            value = np.einsum("ij,...ji->...", A, M)
            if self.modulation is not None:
                value = self.modulation(np.asarray(x, dtype=float), length) * value
            return value
        eigenvalues = np.linalg.eigvalsh(M)
        positive = np.sum(np.maximum(eigenvalues, 0.0), axis=-1)
        negative = np.sum(np.minimum(eigenvalues, 0.0), axis=-1)
        return self.lambda_min * positive + self.Lambda * negative

    def isotropic_scale(self) -> Optional[float]:
        """
        Factor s tal que F(M) = s·Tr(M) con coeficientes constantes; None si no existe.
        """
        if self.kind is DiffusionKind.LAPLACIAN:
            return 1.0
        if self.kind is DiffusionKind.ZERO:
            return 0.0
        if self.kind is DiffusionKind.SCALED_TRACE:
            if self.modulation is not None and not self.modulation.is_constant():
                return None
            A = np.asarray(self.matrix, dtype=float)
            if not np.allclose(A, A[0, 0] * np.eye(A.shape[0])):
                return None
            factor = 1.0 if self.modulation is None else float(self.modulation.params.get("value", 0.0))
            return factor * float(A[0, 0])
        if self.kind is DiffusionKind.PUCCI_MINUS and self.lambda_min == self.Lambda:
            return self.Lambda
        return None

    @classmethod
    def laplacian(cls) -> "DiffusionSpec":
        return cls(DiffusionKind.LAPLACIAN, 1.0)

    @classmethod
    def zero(cls) -> "DiffusionSpec":
        return cls(DiffusionKind.ZERO, 0.0)

    @classmethod
    def pucci_minus(cls, lambda_min: float, Lambda: float) -> "DiffusionSpec":
        return cls(DiffusionKind.PUCCI_MINUS, Lambda, lambda_min=lambda_min)


def unit_velocity(dim: int = 1) -> Tuple[Profile, ...]:
    """Campo de velocidad constante c ≡ (1, 0, ...)."""
    return tuple(constant_profile(1.0 if axis == 0 else 0.0) for axis in range(dim))


def check_compatibility(alpha: float, beta: float, gamma: float) -> bool:
    """
    Condición de compatibilidad β + (α − 1)γ > 0.

    Args:
        alpha: Exponente de Hölder de u en [0, 1]
        beta: Exponente de Hölder de H en x, en (0, 1]
        gamma: Crecimiento en |p|, >= 0

    Returns:
        True si la condición se cumple

    Raises:
        CompatibilityError: Si algún exponente está fuera de rango

    Examples:
        >>> check_compatibility(0.3, 0.5, 1.0)
        False
        >>> check_compatibility(0.8, 0.5, 1.0)
        True
    """
    if not 0.0 <= alpha <= 1.0:
        raise CompatibilityError(f"α fuera de [0,1]: {alpha}")
    if not 0.0 < beta <= 1.0:
        raise CompatibilityError(f"β fuera de (0,1]: {beta}")
    if not gamma >= 0.0:
        raise CompatibilityError(f"γ negativo: {gamma}")
    return beta + (alpha - 1.0) * gamma > 0.0
