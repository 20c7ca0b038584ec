"""
Servicio de sup/inf-convoluciones cuadráticas sobre mallas periódicas.

u^δ(x) = max_y { f(y) − dist(x,y)²/(2δ) } y u_δ(x) = min_y { f(y) + dist(x,y)²/(2δ) },
con y recorriendo los nodos de la malla. El algoritmo rápido hace un barrido de
envolvente de parábolas por eje sobre tres períodos replicados; la selección
final evalúa pocos candidatos con la misma fórmula que la búsqueda exhaustiva,
de modo que ambos caminos devuelven los mismos bits.
"""
import logging
from typing import List, Tuple

import numpy as np

from hjrate.core.config import settings
from hjrate.core.exceptions import EnvelopeError, HolderCertificateError
from hjrate.models.reports import BoundCheck, EnvelopeCheckReport, SemiconvexityReport
from hjrate.storage.data_models import EnvelopeKind, EnvelopeResult
from hjrate.structures.grid import (
    Grid,
    GridFn,
    HolderClass,
    holder_seminorm,
    index_distance_squared,
    row_blocks,
)
from hjrate.structures.parabola_envelope import lower_envelope_candidates

logger = logging.getLogger(__name__)


def _validate_delta(delta: float) -> float:
    if not np.isfinite(delta) or delta <= 0:
        raise EnvelopeError(f"δ debe ser positivo y finito: {delta}")
    return float(delta)


def _axis_candidates(rows: np.ndarray, spacing: float, delta: float) -> np.ndarray:
    """
    Candidatos j por fila para max_j rows[r, j] − (h·m(i,j))²/(2δ).

    Returns:
        Array (filas, n, 3) de índices en [0, n) o -1
    """
    n = rows.shape[1]
    scale = spacing * spacing / (2.0 * delta)
    out = np.full(rows.shape + (3,), -1, dtype=np.int64)
    for r in range(rows.shape[0]):
        heights = np.tile(-rows[r] / scale, 3)
        central = lower_envelope_candidates(heights)[n:2 * n]
        out[r] = np.where(central >= 0, central % n, -1)
    return out


def _select(
    f: GridFn,
    nodes: np.ndarray,
    candidates: np.ndarray,
    valid: np.ndarray,
    delta: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Elige, por nodo, el mejor candidato con la fórmula canónica.

    Empates: menor índice lexicográfico.

    Args:
        f: Función fuente
        nodes: Multi-índices de los nodos (..., dim)
        candidates: Multi-índices candidatos (..., K, dim)
        valid: Máscara (..., K)
        delta: Parámetro de la convolución
    """
    grid = f.grid
    candidates = np.where(valid[..., None], candidates, 0)
    index = tuple(candidates[..., axis] for axis in range(grid.dim))
    d2 = index_distance_squared(grid, nodes[..., None, :], candidates)
    values = f.values[index] - d2 / (2.0 * delta)
    values = np.where(valid, values, -np.inf)
    best = values.max(axis=-1)

    flat = np.ravel_multi_index(index, grid.shape)
    flat = np.where(valid & (values == best[..., None]), flat, grid.size)
    pick = np.argmin(flat, axis=-1)
    arg = np.take_along_axis(candidates, pick[..., None, None], axis=-2)[..., 0, :]
    return best, arg


class EnvelopeService:
    """Servicio de convoluciones cuadráticas y sus verificaciones."""

    @staticmethod
    def sup_convolution(f: GridFn, delta: float) -> EnvelopeResult:
        """
        Sup-convolución u^δ con su mapa de maximizadores.

        Args:
            f: Función de malla fuente
            delta: Parámetro δ > 0

        Returns:
            EnvelopeResult con kind = sup

        Raises:
            EnvelopeError: Si δ <= 0

        Examples:
            >>> from hjrate.structures.grid import make_grid
            >>> g = make_grid(1, 3, 300.0)
            >>> EnvelopeService.sup_convolution(GridFn(g, [0, 1, 0]), 10000.0).envelope.values
            array([0.5, 1. , 0.5])
        """
        delta = _validate_delta(delta)
        grid = f.grid
        EnvelopeService._warn_small_delta(grid, delta)
        n = grid.points_per_axis
        h = grid.spacing

        if grid.dim == 1:
            cand = _axis_candidates(f.values[None, :], h, delta)[0]
            nodes = grid.multi_indices()
            best, arg = _select(f, nodes, cand[..., None], cand >= 0, delta)
            return EnvelopeResult(GridFn(grid, best), arg.reshape(grid.shape + (1,)), delta, EnvelopeKind.SUP)

        # Paso 1 (eje 0): por columna j2, candidatos j1 para cada i1
        first = _axis_candidates(f.values.T, h, delta)
        column = np.broadcast_to(np.arange(n)[:, None, None], first.shape)
        pass_nodes = np.stack(np.meshgrid(np.arange(n), np.arange(n), indexing="ij"), axis=-1)
        pass_nodes = pass_nodes[..., ::-1]
        partial, _ = _select(
            f,
            pass_nodes,
            np.stack([first, column], axis=-1),
            first >= 0,
            delta,
        )
        # partial[j2, i1] incluye la distancia del eje 1 evaluada en i2 = j2 (cero)
        partial = partial.T

        # Paso 2 (eje 1): por fila i1, candidatos j2 sobre la función parcial
        second = _axis_candidates(partial, h, delta)

        i1 = np.arange(n)[:, None, None]
        j2 = np.where(second >= 0, second, 0)
        inner = first[j2, i1]
        j2_full = np.broadcast_to(j2[..., None], inner.shape)
        valid = (second[..., None] >= 0) & (inner >= 0)
        candidates = np.stack([inner, j2_full], axis=-1).reshape(n, n, 9, 2)
        nodes = np.stack(np.meshgrid(np.arange(n), np.arange(n), indexing="ij"), axis=-1)
        best, arg = _select(f, nodes, candidates, valid.reshape(n, n, 9), delta)
        return EnvelopeResult(GridFn(grid, best), arg, delta, EnvelopeKind.SUP)

    @staticmethod
    def inf_convolution(f: GridFn, delta: float) -> EnvelopeResult:
        """
        Inf-convolución u_δ = −(−f)^δ.

        Raises:
            EnvelopeError: Si δ <= 0
        """
        upper = EnvelopeService.sup_convolution(-f, delta)
        return EnvelopeResult(-upper.envelope, upper.arg_map, upper.delta, EnvelopeKind.INF)

    @staticmethod
    def brute_force(f: GridFn, delta: float, kind: EnvelopeKind = EnvelopeKind.SUP) -> EnvelopeResult:
        """
        Oráculo O(N^(2d)): maximización exhaustiva sobre todos los nodos.

        Raises:
            EnvelopeError: Si δ <= 0
        """
        delta = _validate_delta(delta)
        kind = EnvelopeKind(kind)
        source = f if kind is EnvelopeKind.SUP else -f
        grid = f.grid
        values = source.flat()
        indices = grid.multi_indices()
        envelope = np.empty(grid.size)
        arg = np.empty(grid.size, dtype=np.int64)

        for rows in row_blocks(grid.size):
            d2 = index_distance_squared(grid, indices[rows, None, :], indices[None, :, :])
            scores = values[None, :] - d2 / (2.0 * delta)
            best = np.argmax(scores, axis=1)
            arg[rows] = best
            envelope[rows] = scores[np.arange(best.size), best]

        if kind is EnvelopeKind.INF:
            envelope = -envelope
        arg_map = indices[arg].reshape(grid.shape + (grid.dim,))
        return EnvelopeResult(GridFn(grid, envelope), arg_map, delta, kind)

    @staticmethod
    def check_envelope_bounds(f: GridFn, holder: HolderClass, delta: float) -> EnvelopeCheckReport:
        """
        Verifica las cotas de velocidad de las convoluciones.

        Con K = holder.seminorm y α = holder.alpha se comprueba:
        distancia al maximizador y al minimizador (dist^(2−α) ≤ 2δK), desviación
        ‖u^δ − f‖ y ‖u_δ − f‖ frente a (2K)^{2/(2−α)} δ^{α/(2−α)}, y la constante de
        Lipschitz discreta de ambas envolventes frente a
        δ^{−(1−α)/(2−α)} (2K)^{1/(2−α)} + h/δ.

        Args:
            f: Función de malla
            holder: Certificado (α, K) de f
            delta: Parámetro δ > 0

        Returns:
            EnvelopeCheckReport con las cinco verificaciones y el sándwich

        Raises:
            EnvelopeError: Si δ <= 0
            HolderCertificateError: Si K es menor que la seminorma medida
        """
        delta = _validate_delta(delta)
        grid = f.grid
        rtol = settings.float_rtol
        alpha, K = holder.alpha, holder.seminorm

        measured = holder_seminorm(f, alpha)
        if K < measured * (1.0 - rtol):
            raise HolderCertificateError(
                f"Seminorma declarada {K} menor que la medida {measured} (α = {alpha})"
            )

        warnings: List[str] = []
        if delta < 10.0 * grid.spacing ** 2:
            warnings.append(f"δ = {delta} < 10·h² = {10.0 * grid.spacing ** 2}")

        upper = EnvelopeService.sup_convolution(f, delta)
        lower = EnvelopeService.inf_convolution(f, delta)
        nodes = grid.multi_indices().reshape(grid.shape + (grid.dim,))

        def argument_distance(env: EnvelopeResult) -> float:
            d2 = index_distance_squared(grid, nodes, env.arg_map)
            return float(np.max(np.sqrt(d2) ** (2.0 - alpha)))

        def deviation(env: EnvelopeResult) -> float:
            return float(np.max(np.abs(env.envelope.values - f.values)))

        def lipschitz(env: EnvelopeResult) -> float:
            worst = 0.0
            for axis in range(grid.dim):
                jumps = np.abs(np.roll(env.envelope.values, -1, axis=axis) - env.envelope.values)
                worst = max(worst, float(jumps.max()) / grid.spacing)
            return worst

        distance_bound = 2.0 * delta * K
        deviation_bound = (2.0 * K) ** (2.0 / (2.0 - alpha)) * delta ** (alpha / (2.0 - alpha))
        lip_slack = grid.spacing / delta
        lip_bound = delta ** (-(1.0 - alpha) / (2.0 - alpha)) * (2.0 * K) ** (1.0 / (2.0 - alpha)) + lip_slack
        scale = max(1.0, float(np.max(np.abs(f.values))))

        def make(name: str, measured_value: float, bound: float, slack: float = 0.0, absolute: float = 0.0) -> BoundCheck:
            allowed = bound * (1.0 + rtol) + absolute
            return BoundCheck(name=name, passed=measured_value <= allowed, measured=measured_value,
                              bound=bound, slack=slack)

        checks = [
            make("argmax_distance", argument_distance(upper), distance_bound),
            make("argmin_distance", argument_distance(lower), distance_bound),
            make("sup_deviation", deviation(upper), deviation_bound, absolute=rtol * scale),
            make("inf_deviation", deviation(lower), deviation_bound, absolute=rtol * scale),
            make("lipschitz", max(lipschitz(upper), lipschitz(lower)), lip_bound, slack=lip_slack,
                 absolute=4.0 * rtol * scale / grid.spacing),
        ]
        sandwich = bool(
            np.all(lower.envelope.values <= f.values) and np.all(f.values <= upper.envelope.values)
        )
        passed = sandwich and all(check.passed for check in checks)

        for check in checks:
            if not check.passed:
                logger.warning("Cota '%s' violada: %.6g > %.6g", check.name, check.measured, check.bound)
        logger.info("Verificación de convoluciones δ=%g α=%g: %s", delta, alpha, "ok" if passed else "FALLA")

        return EnvelopeCheckReport(
            delta=delta,
            alpha=alpha,
            seminorm=K,
            points_per_axis=grid.points_per_axis,
            dim=grid.dim,
            checks=checks,
            sandwich=sandwich,
            passed=passed,
            warnings=warnings,
        )

    @staticmethod
    def check_semiconvexity(env: EnvelopeResult) -> SemiconvexityReport:
        """
        Segundas diferencias periódicas frente a ∓h²/δ.

        Los nodos cuyo estencil ve al argumento a través de imágenes mínimas
        distintas se marcan y se excluyen de la verificación.
        """
        grid = env.envelope.grid
        values = env.envelope.values
        n = grid.points_per_axis
        threshold = grid.spacing ** 2 / env.delta
        allowance = 4.0 * settings.float_rtol * max(1.0, float(np.max(np.abs(values))))
        nodes = grid.multi_indices().reshape(grid.shape + (grid.dim,))

        worst = np.inf if env.kind is EnvelopeKind.SUP else -np.inf
        flagged = np.zeros(grid.shape, dtype=bool)
        passed = True
        for axis in range(grid.dim):
            second = np.roll(values, -1, axis=axis) - 2.0 * values + np.roll(values, 1, axis=axis)
            k = (nodes[..., axis] - env.arg_map[..., axis]) % n
            signed = np.where(k <= n // 2, k, k - n)
            wraps = (signed - 1 <= -(n / 2.0)) | (signed + 1 > n / 2.0)
            flagged |= wraps
            checked = second[~wraps]
            if checked.size == 0:
                continue
            if env.kind is EnvelopeKind.SUP:
                worst = min(worst, float(checked.min()))
                passed &= bool(checked.min() >= -threshold - allowance)
            else:
                worst = max(worst, float(checked.max()))
                passed &= bool(checked.max() <= threshold + allowance)

        if not np.isfinite(worst):
            worst = 0.0
        return SemiconvexityReport(
            kind=env.kind.value,
            passed=passed,
            worst_second_difference=worst,
            threshold=-threshold if env.kind is EnvelopeKind.SUP else threshold,
            flagged_nodes=int(flagged.sum()),
        )

    @staticmethod
    def _warn_small_delta(grid: Grid, delta: float) -> None:
        if delta < 10.0 * grid.spacing ** 2:
            logger.warning(
                "δ = %g < 10·h² = %g: la envolvente coincide con la identidad a esta resolución",
                delta, 10.0 * grid.spacing ** 2,
            )
