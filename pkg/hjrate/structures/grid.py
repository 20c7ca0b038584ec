"""
Mallas uniformes periódicas y funciones de malla.

El dominio es el toro [0, L)^d con d ∈ {1, 2}. Las distancias entre nodos se
miden con la convención de imagen mínima: por eje, min(|x − y|, L − |x − y|).
"""
from dataclasses import dataclass
from typing import Callable, Iterator, Tuple
import math

import numpy as np

from hjrate.core.exceptions import GridError


# Máximo de pares evaluados por bloque en los barridos exhaustivos
_PAIR_BLOCK = 1 << 22


@dataclass(frozen=True)
class Grid:
    """Malla uniforme periódica de N puntos por eje sobre [0, L)^d."""
    dim: int
    points_per_axis: int
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"Dimensión inválida: {self.dim}. Solo se admiten 1 o 2")
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis < 2:
            raise GridError(f"N inválido: {self.points_per_axis}. Se requiere N >= 2")
        if not math.isfinite(self.length) or self.length <= 0:
            raise GridError(f"Longitud inválida: {self.length}. Se requiere L > 0")
        object.__setattr__(self, "points_per_axis", int(self.points_per_axis))
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        """Paso h = L/N."""
        return self.length / self.points_per_axis

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dim

    def axis_coordinates(self) -> np.ndarray:
        """Coordenadas de los nodos a lo largo de un eje."""
        return np.arange(self.points_per_axis) * self.spacing

    def coordinates(self) -> np.ndarray:
        """
        Coordenadas de todos los nodos.

        Returns:
            Array de forma (*shape, dim)
        """
        axes = [self.axis_coordinates()] * self.dim
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def multi_indices(self) -> np.ndarray:
        """
        Multi-índices de los nodos en orden lexicográfico.

        Returns:
            Array de enteros de forma (size, dim)
        """
        return np.stack(np.unravel_index(np.arange(self.size), self.shape), axis=-1)

    def refine(self, factor: int) -> "Grid":
        """Malla con factor veces más puntos por eje sobre el mismo toro."""
        return Grid(self.dim, self.points_per_axis * factor, self.length)


@dataclass(frozen=True)
class HolderClass:
    """
    Clase de regularidad (α, [u]_α).

    Para α = 0 la seminorma es la oscilación max u − min u.
    """
    alpha: float
    seminorm: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise GridError(f"Exponente de Hölder fuera de [0,1]: {self.alpha}")
        if not self.seminorm >= 0.0:
            raise GridError(f"Seminorma negativa o inválida: {self.seminorm}")


@dataclass(frozen=True)
class GridFn:
    """Función real muestreada en una malla periódica (inmutable)."""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.size != self.grid.size:
            raise GridError(
                f"Longitud de valores {arr.size} no coincide con N^d = {self.grid.size}"
            )
        arr = arr.reshape(self.grid.shape)
        if not np.all(np.isfinite(arr)):
            raise GridError("La función de malla contiene valores no finitos")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFn":
        """
        Muestrea fn en los nodos.

        Args:
            grid: Malla
            fn: Función que recibe coordenadas (*shape, dim) y retorna (*shape,)
        """
        return cls(grid, fn(grid.coordinates()))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "GridFn":
        return cls(grid, np.full(grid.shape, float(value)))

    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def __neg__(self) -> "GridFn":
        return GridFn(self.grid, -self.values)

    def shifted(self, offset: float) -> "GridFn":
        return GridFn(self.grid, self.values + offset)

    def oscillation(self) -> float:
        return float(self.values.max() - self.values.min())

    def restrict(self, coarse: Grid) -> "GridFn":
        """
        Inyección sobre una malla más gruesa del mismo toro.

        Raises:
            GridError: Si las mallas no están anidadas
        """
        if coarse.dim != self.grid.dim or coarse.length != self.grid.length:
            raise GridError("Restricción entre toros distintos")
        factor, rest = divmod(self.grid.points_per_axis, coarse.points_per_axis)
        if rest != 0 or factor < 1:
            raise GridError(
                f"N={self.grid.points_per_axis} no es múltiplo de N={coarse.points_per_axis}"
            )
        slices = tuple(slice(None, None, factor) for _ in range(coarse.dim))
        return GridFn(coarse, self.values[slices])


def make_grid(dim: int, points_per_axis: int, length: float) -> Grid:
    """
    Construye una malla periódica uniforme.

    Args:
        dim: Dimensión (1 o 2)
        points_per_axis: Número de nodos por eje (N >= 2)
        length: Longitud del toro (L > 0)

    Returns:
        Malla con paso h = L/N

    Raises:
        GridError: Si algún parámetro está fuera de rango

    Examples:
        >>> make_grid(1, 4, 1.0).spacing
        0.25
    """
    return Grid(dim, points_per_axis, length)


def min_image_steps(i: np.ndarray, j: np.ndarray, n: int) -> np.ndarray:
    """Número de pasos de malla entre índices con la convención de imagen mínima."""
    k = np.abs(np.asarray(i) - np.asarray(j)) % n
    return np.minimum(k, n - k)


def index_distance_squared(grid: Grid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Distancia periódica al cuadrado entre multi-índices.

    Es la única fórmula usada para las penalizaciones de las convoluciones, de modo
    que el algoritmo rápido y la búsqueda exhaustiva producen los mismos bits.

    Args:
        grid: Malla
        a: Multi-índices (..., dim)
        b: Multi-índices (..., dim), difundibles contra a

    Returns:
        Array (...,) con dist(x_a, x_b)^2
    """
    a = np.asarray(a)
    b = np.asarray(b)
    h = grid.spacing
    total = 0.0
    for axis in range(grid.dim):
        step = min_image_steps(a[..., axis], b[..., axis], grid.points_per_axis) * h
        total = total + step * step
    return total


def periodic_distance(length: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Distancia periódica entre puntos arbitrarios del toro.

    Args:
        length: Longitud L del toro
        x: Puntos (..., dim)
        y: Puntos (..., dim)

    Returns:
        Norma euclídea de las distancias de imagen mínima por eje
    """
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % length
    d = np.minimum(d, length - d)
    return np.sqrt(np.sum(d * d, axis=-1))


def row_blocks(size: int) -> Iterator[slice]:
    """Bloques de filas para barridos exhaustivos de pares sin agotar memoria."""
    rows = max(1, _PAIR_BLOCK // max(size, 1))
    for start in range(0, size, rows):
        yield slice(start, min(start + rows, size))


def holder_seminorm(f: GridFn, alpha: float) -> float:
    """
    Seminorma de Hölder por barrido exhaustivo de pares.

    Calcula max_{i≠j} |f_i − f_j| / dist(x_i, x_j)^α con distancia periódica.
    Para α = 0 retorna la oscilación.

    Args:
        f: Función de malla
        alpha: Exponente en [0, 1]

    Returns:
        Seminorma (no negativa)

    Raises:
        GridError: Si alpha está fuera de [0, 1]
    """
    if not 0.0 <= alpha <= 1.0:
        raise GridError(f"Exponente de Hölder fuera de [0,1]: {alpha}")
    if alpha == 0.0:
        return f.oscillation()

    values = f.flat()
    indices = f.grid.multi_indices()
    best = 0.0
    for rows in row_blocks(f.grid.size):
        d2 = index_distance_squared(f.grid, indices[rows, None, :], indices[None, :, :])
        diff = np.abs(values[rows, None] - values[None, :])
        mask = d2 > 0.0
        if not np.any(mask):
            continue
        ratio = diff[mask] / d2[mask] ** (0.5 * alpha)
        best = max(best, float(ratio.max()))
    return best


def sup_norm_diff(f: GridFn, g: GridFn) -> float:
    """
    Norma del supremo de la diferencia en los nodos.

    Raises:
        GridError: Si las funciones viven en mallas distintas
    """
    if f.grid != g.grid:
        raise GridError(f"Mallas distintas: {f.grid} vs {g.grid}")
    return float(np.max(np.abs(f.values - g.values)))
