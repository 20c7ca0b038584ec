"""
Servicio de cotas: constantes, exponentes y lados derechos de las estimaciones
de tasa para los problemas de evolución y estacionarios.
"""
import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from hjrate.core.exceptions import BoundsError, CompatibilityError, DegenerateLedgerError
from hjrate.models.reports import RateLedgerReport, StationaryLedgerReport
from hjrate.storage.data_models import (
    LedgerCase,
    ProblemSpec,
    RateLedger,
    StationaryLedger,
    TraceProvenance,
)

logger = logging.getLogger(__name__)

# Nodos por defecto de la malla de cuadratura de C₂
DEFAULT_MESH = 257

# Fracción de la integral concentrada en la primera celda que se marca como sospechosa
_FIRST_CELL_FRACTION = 0.5


def _growth_integrand(C_H: float, alpha: float, beta: float, gamma: float, seminorm: np.ndarray) -> np.ndarray:
    """C_H (2K)^{β/(2−α)} (1 + (2K)^{γ/(2−α)})."""
    doubled = 2.0 * np.asarray(seminorm, dtype=float)
    return C_H * doubled ** (beta / (2.0 - alpha)) * (1.0 + doubled ** (gamma / (2.0 - alpha)))


def _optimized(S: float, P: float, linear: float) -> float:
    """min_δ linear/δ + S δ^P = S^{1/(P+1)} (P+1)/P^{P/(P+1)} linear^{P/(P+1)}."""
    return S ** (1.0 / (P + 1.0)) * (P + 1.0) / P ** (P / (P + 1.0)) * linear ** (P / (P + 1.0))


class BoundsService:
    """Servicio de ledgers y cotas de tasa."""

    @staticmethod
    def build_ledger(
        problem: ProblemSpec,
        seminorm_trace: Optional[Callable[[float], float]] = None,
        times: Optional[Sequence[float]] = None,
        provenance: Optional[TraceProvenance] = None,
        dim: Optional[int] = None,
    ) -> RateLedger:
        """
        Construye el ledger de la cota de evolución.

        C₂(t) se calcula por trapecios compuestos de
        C_H (2[u(s)]_α)^{β/(2−α)} (1 + (2[u(s)]_α)^{γ/(2−α)}) sobre la malla temporal.
        El caso se elige con pruebas exactas de cero sobre C_H y C₁.

        Args:
            problem: Problema de evolución
            seminorm_trace: s ↦ [u(s)]_α (por defecto la del problema o la constante declarada)
            times: Malla de cuadratura en [0, T] (por defecto DEFAULT_MESH nodos uniformes)
            provenance: Origen de la traza (por defecto inferido)
            dim: Dimensión n (por defecto la de la malla del problema)

        Returns:
            RateLedger

        Raises:
            BoundsError: Si η > α, la malla es inválida o la traza es negativa o no finita
            CompatibilityError: Si β + (α−1)γ <= 0 con C_H ≠ 0
        """
        H = problem.hamiltonian
        alpha, eta = problem.u_holder.alpha, problem.u0_holder.alpha
        beta, gamma = H.beta, H.gamma
        if eta > alpha:
            raise BoundsError(f"Se requiere η <= α (η={eta}, α={alpha})")
        compatible = beta + (alpha - 1.0) * gamma
        if H.C_H != 0.0 and compatible <= 0.0:
            raise CompatibilityError(f"β + (α−1)γ = {compatible} <= 0 con C_H = {H.C_H}")

        if seminorm_trace is None:
            if problem.u_seminorm_trace is not None:
                seminorm_trace = problem.u_seminorm_trace
                provenance = provenance or TraceProvenance.CLOSED_FORM
            else:
                declared = problem.u_holder.seminorm
                seminorm_trace = lambda s: declared  # noqa: E731
                provenance = provenance or TraceProvenance.DECLARED
        provenance = provenance or TraceProvenance.MEASURED

        horizon = problem.horizon
        mesh = np.linspace(0.0, horizon, DEFAULT_MESH) if times is None else np.asarray(times, dtype=float)
        if mesh.ndim != 1 or mesh.size < 2 or mesh[0] != 0.0 or np.any(np.diff(mesh) <= 0):
            raise BoundsError("La malla de cuadratura debe ser creciente, empezar en 0 y tener >= 2 nodos")

        trace = np.array([float(seminorm_trace(float(s))) for s in mesh])
        if np.any(~np.isfinite(trace)) or np.any(trace < 0):
            raise BoundsError("La traza de seminormas debe ser finita y no negativa")

        integrand = _growth_integrand(H.C_H, alpha, beta, gamma, trace)
        cells = 0.5 * (integrand[1:] + integrand[:-1]) * np.diff(mesh)
        C2_values = np.concatenate([[0.0], np.cumsum(cells)])

        suspect = False
        if provenance is TraceProvenance.MEASURED and cells.size > 2 and C2_values[-1] > 0:
            suspect = bool(cells[0] / C2_values[-1] > _FIRST_CELL_FRACTION)
            if suspect:
                logger.warning("Traza medida: la primera celda concentra %.0f%% de C₂(T); integrabilidad dudosa",
                               100.0 * cells[0] / C2_values[-1])

        u0_seminorm = problem.u0_holder.seminorm
        C1 = (2.0 * u0_seminorm) ** (2.0 / (2.0 - eta))
        data_exponent = eta / (2.0 - eta)
        growth_exponent = compatible / (2.0 - alpha)
        if H.C_H == 0.0:
            case, P = LedgerCase.C_H_ZERO, data_exponent
        elif C1 == 0.0:
            case, P = LedgerCase.C1_ZERO, growth_exponent
        else:
            case, P = LedgerCase.GENERAL, min(data_exponent, growth_exponent)

        if dim is None:
            dim = problem.grid.dim if problem.grid is not None else 1
        ledger = RateLedger(
            alpha=alpha,
            beta=beta,
            gamma=gamma,
            eta=eta,
            C_H=H.C_H,
            Lambda=problem.diffusion.Lambda,
            C_F=problem.diffusion.C_F,
            n=int(dim),
            u0_seminorm=u0_seminorm,
            C1=C1,
            C2_times=mesh,
            C2_values=C2_values,
            P=P,
            exponent=P / (P + 1.0),
            case_tag=case,
            provenance=provenance,
            initial_mismatch=problem.initial_mismatch,
            integrability_suspect=suspect,
        )
        logger.info("Ledger '%s': caso %s, P=%.6g, exponente=%.6g, C1=%.6g, C2(T)=%.6g",
                    problem.name, case.value, P, ledger.exponent, C1, C2_values[-1])
        return ledger

    @staticmethod
    def _arguments(t: float, epsilon: float) -> None:
        if t < 0 or epsilon < 0 or not math.isfinite(t) or not math.isfinite(epsilon):
            raise BoundsError(f"t y ε deben ser finitos y >= 0: t={t}, ε={epsilon}")

    @staticmethod
    def bound_rhs(ledger: RateLedger, t: float, epsilon: float) -> float:
        """
        Lado derecho de la estimación de evolución.

        (C₁+C₂(t))^{1/(P+1)} (P+1)/P^{P/(P+1)} (Λtnε)^{P/(P+1)} + εtC_F,
        más el desajuste inicial declarado. Con C₁ + C₂(t) = 0 solo queda εtC_F.

        Raises:
            BoundsError: Si t o ε son negativos o t > T

        Examples:
            Con P = 1, C₁ = 1, C₂ ≡ 0 y Λ = n = t = 1 la cota es 2√ε.
        """
        BoundsService._arguments(t, epsilon)
        horizon = float(ledger.C2_times[-1])
        if t > horizon * (1.0 + 1e-12):
            raise BoundsError(f"t={t} posterior al horizonte T={horizon} del ledger")
        S = ledger.C1 + ledger.C2(t)
        forcing = epsilon * t * ledger.C_F + ledger.initial_mismatch
        if S == 0.0:
            return forcing
        linear = ledger.Lambda * t * ledger.n * epsilon
        return _optimized(S, ledger.P, linear) + forcing

    @staticmethod
    def optimal_delta(ledger: RateLedger, t: float, epsilon: float) -> float:
        """
        δ* = (tεΛn / ((C₁+C₂(t)) P))^{1/(P+1)}.

        Raises:
            BoundsError: Si t o ε no son positivos
            DegenerateLedgerError: Si C₁ + C₂(t) = 0
        """
        BoundsService._arguments(t, epsilon)
        if t == 0 or epsilon == 0:
            raise BoundsError("δ óptimo requiere t > 0 y ε > 0")
        S = ledger.C1 + ledger.C2(t)
        if S == 0.0:
            raise DegenerateLedgerError("C₁ + C₂(t) = 0: el δ óptimo no está definido")
        return (t * epsilon * ledger.Lambda * ledger.n / (S * ledger.P)) ** (1.0 / (ledger.P + 1.0))

    @staticmethod
    def delta_budget(ledger: RateLedger, t: float, epsilon: float, delta: float) -> float:
        """
        Expresión previa a la optimización: tεΛn/δ + (C₁+C₂(t))δ^P + tεC_F.

        Raises:
            BoundsError: Si δ <= 0
        """
        BoundsService._arguments(t, epsilon)
        if not delta > 0:
            raise BoundsError(f"δ debe ser positivo: {delta}")
        S = ledger.C1 + ledger.C2(t)
        return (
            t * epsilon * ledger.Lambda * ledger.n / delta
            + S * delta ** ledger.P
            + t * epsilon * ledger.C_F
            + ledger.initial_mismatch
        )

    @staticmethod
    def step_remainders(ledger: RateLedger, seminorm: float, delta: float) -> Tuple[float, float]:
        """
        Restos de la sup-convolución de la solución inviscida.

        R(t,δ) = C_H (2δK)^{β/(2−α)} (1 + (2δ)^{γ(α−1)/(2−α)} K^{γ/(2−α)}) con K = [u(t)]_α,
        R₀(δ) = C₁ δ^{η/(2−η)}.

        Returns:
            (R, R₀)
        """
        if not delta > 0 or seminorm < 0:
            raise BoundsError(f"Se requiere δ > 0 y K >= 0: δ={delta}, K={seminorm}")
        alpha, beta, gamma = ledger.alpha, ledger.beta, ledger.gamma
        growth = (2.0 * delta) ** (gamma * (alpha - 1.0) / (2.0 - alpha)) * seminorm ** (gamma / (2.0 - alpha))
        R = ledger.C_H * (2.0 * delta * seminorm) ** (beta / (2.0 - alpha)) * (1.0 + growth)
        R0 = ledger.C1 * delta ** (ledger.eta / (2.0 - ledger.eta))
        return R, R0

    @staticmethod
    def build_stationary_ledger(
        problem: ProblemSpec,
        seminorm: Optional[float] = None,
        alpha: Optional[float] = None,
        provenance: TraceProvenance = TraceProvenance.DECLARED,
        dim: Optional[int] = None,
    ) -> StationaryLedger:
        """
        Ledger estacionario: Q = (β+γ(α−1))/(2−α), C₃ = C_H(2K)^{β/(2−α)}(1+(2K)^{γ/(2−α)}).

        Se admite α = 0 (K es entonces la oscilación de u).

        Raises:
            BoundsError: Si ρ <= 0
        """
        if not problem.is_stationary:
            raise BoundsError("El ledger estacionario requiere ρ > 0")
        H = problem.hamiltonian
        alpha = problem.u_holder.alpha if alpha is None else float(alpha)
        K = problem.u_holder.seminorm if seminorm is None else float(seminorm)
        if not 0.0 <= alpha <= 1.0 or K < 0:
            raise BoundsError(f"Clase de Hölder inválida: α={alpha}, K={K}")
        Q = (H.beta + H.gamma * (alpha - 1.0)) / (2.0 - alpha)
        C3 = float(_growth_integrand(H.C_H, alpha, H.beta, H.gamma, K))
        if dim is None:
            dim = problem.grid.dim if problem.grid is not None else 1
        return StationaryLedger(
            alpha=alpha,
            beta=H.beta,
            gamma=H.gamma,
            C_H=H.C_H,
            Q=Q,
            C3=C3,
            rho=problem.rho,
            Lambda=problem.diffusion.Lambda,
            C_F=problem.diffusion.C_F,
            n=int(dim),
            u_seminorm=K,
            provenance=provenance,
        )

    @staticmethod
    def stationary_bound(sledger: StationaryLedger, epsilon: float) -> float:
        """
        (1/ρ)[C₃^{1/(Q+1)} (Q+1)/Q^{Q/(Q+1)} (Λnε)^{Q/(Q+1)} + εC_F].

        Raises:
            BoundsError: Si ρ <= 0 o ε < 0
            CompatibilityError: Si Q <= 0 con C₃ > 0
        """
        if not sledger.rho > 0:
            raise BoundsError(f"ρ debe ser positivo: {sledger.rho}")
        BoundsService._arguments(0.0, epsilon)
        forcing = epsilon * sledger.C_F
        if sledger.C3 == 0.0:
            return forcing / sledger.rho
        if sledger.Q <= 0.0:
            raise CompatibilityError(f"Q = {sledger.Q} <= 0 con C₃ = {sledger.C3}")
        linear = sledger.Lambda * sledger.n * epsilon
        return (_optimized(sledger.C3, sledger.Q, linear) + forcing) / sledger.rho

    @staticmethod
    def heat_bound(lip_u0: float, C_F: float, t: float, epsilon: float) -> float:
        """
        4‖Du₀‖_∞ √(εt) + C_F tε.

        Examples:
            >>> BoundsService.heat_bound(1.0, 0.0, 1.0, 1.0)
            4.0
        """
        BoundsService._arguments(t, epsilon)
        if lip_u0 < 0 or C_F < 0 or not math.isfinite(lip_u0):
            raise BoundsError(f"Se requiere ‖Du₀‖ finita y C_F >= 0: {lip_u0}, {C_F}")
        return 4.0 * lip_u0 * math.sqrt(epsilon * t) + C_F * t * epsilon

    @staticmethod
    def stationary_exponent(sledger: StationaryLedger) -> float:
        return sledger.Q / (sledger.Q + 1.0) if sledger.Q > 0 else 0.0

    @staticmethod
    def ledger_report(ledger: RateLedger) -> RateLedgerReport:
        """Serialización JSON del ledger de evolución."""
        return RateLedgerReport(
            alpha=ledger.alpha,
            beta=ledger.beta,
            gamma=ledger.gamma,
            eta=ledger.eta,
            C_H=ledger.C_H,
            Lambda=ledger.Lambda,
            C_F=ledger.C_F,
            n=ledger.n,
            u0_seminorm=ledger.u0_seminorm,
            C1=ledger.C1,
            C2_times=[float(v) for v in ledger.C2_times],
            C2_values=[float(v) for v in ledger.C2_values],
            P=ledger.P,
            exponent=ledger.exponent,
            case_tag=ledger.case_tag.value,
            provenance=ledger.provenance.value,
            initial_mismatch=ledger.initial_mismatch,
            integrability_suspect=ledger.integrability_suspect,
        )

    @staticmethod
    def ledger_from_report(report: RateLedgerReport) -> RateLedger:
        """Reconstruye un ledger desde su forma JSON."""
        return RateLedger(
            alpha=report.alpha,
            beta=report.beta,
            gamma=report.gamma,
            eta=report.eta,
            C_H=report.C_H,
            Lambda=report.Lambda,
            C_F=report.C_F,
            n=report.n,
            u0_seminorm=report.u0_seminorm,
            C1=report.C1,
            C2_times=np.asarray(report.C2_times, dtype=float),
            C2_values=np.asarray(report.C2_values, dtype=float),
            P=report.P,
            exponent=report.exponent,
            case_tag=LedgerCase(report.case_tag),
            provenance=TraceProvenance(report.provenance),
            initial_mismatch=report.initial_mismatch,
            integrability_suspect=report.integrability_suspect,
        )

    @staticmethod
    def stationary_ledger_report(sledger: StationaryLedger) -> StationaryLedgerReport:
        """Serialización JSON del ledger estacionario."""
        return StationaryLedgerReport(
            alpha=sledger.alpha,
            beta=sledger.beta,
            gamma=sledger.gamma,
            C_H=sledger.C_H,
            Q=sledger.Q,
            C3=sledger.C3,
            rho=sledger.rho,
            Lambda=sledger.Lambda,
            C_F=sledger.C_F,
            n=sledger.n,
            u_seminorm=sledger.u_seminorm,
            exponent=BoundsService.stationary_exponent(sledger),
            provenance=sledger.provenance.value,
        )
