"""
Excepciones personalizadas de hjrate.
"""
from typing import List, Optional


class HJRateException(Exception):
    """Excepción base del paquete."""
    pass


class ConfigError(HJRateException):
    """Configuración inválida (archivo, override o parámetros)."""
    pass


class GridError(HJRateException):
    """Malla o función de malla inválida."""
    pass


class HolderCertificateError(HJRateException):
    """El certificado de Hölder declarado es menor que el medido."""
    pass


class EnvelopeError(HJRateException):
    """Parámetros inválidos para una sup/inf-convolución."""
    pass


class OperatorError(HJRateException):
    """Error en la evaluación de un operador del catálogo."""
    pass


class DimensionMismatchError(OperatorError):
    """Dimensiones de x, p o M incompatibles con el operador."""
    pass


class NonSymmetricMatrixError(OperatorError):
    """Matriz no simétrica pasada a un operador de difusión."""
    pass


class CompatibilityError(OperatorError):
    """Exponentes fuera de rango o condición β+(α−1)γ>0 violada."""
    pass


class NonCatalogHamiltonianError(OperatorError):
    """Hamiltoniano sin fórmula de Hopf-Lax en el catálogo."""
    pass


class NonConstantCoefficientError(OperatorError):
    """Difusión sin coeficientes constantes (no admite solución espectral)."""
    pass


class SolverError(HJRateException):
    """Error base de los esquemas numéricos."""
    pass


class CFLViolationError(SolverError):
    """El paso de tiempo explícito viola la condición CFL de monotonía."""
    pass


class DivergenceError(SolverError):
    """La solución numérica contiene NaN o infinitos."""

    def __init__(self, message: str, step: int, time: float):
        super().__init__(message)
        self.step = step
        self.time = time


class StationaryConvergenceError(SolverError):
    """La iteración de punto fijo no alcanzó la tolerancia."""

    def __init__(self, message: str, residual_history: List[float], iterations: int):
        super().__init__(message)
        self.residual_history = residual_history
        self.iterations = iterations


class BoundsError(HJRateException):
    """Parámetros inválidos para las cotas de tasa."""
    pass


class DegenerateLedgerError(BoundsError):
    """C₁ + C₂(t) = 0: el δ óptimo no está definido."""
    pass


class SweepError(HJRateException):
    """Error durante un barrido en ε."""

    def __init__(self, message: str, epsilon: Optional[float] = None,
                 points_per_axis: Optional[int] = None):
        super().__init__(message)
        self.epsilon = epsilon
        self.points_per_axis = points_per_axis


class FitError(SweepError):
    """Puntos insuficientes o inválidos para el ajuste log-log."""
    pass


class ReportIOError(SweepError):
    """Fallo de entrada/salida al escribir o leer reportes."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{message} (ruta: {path})")
        self.path = path
