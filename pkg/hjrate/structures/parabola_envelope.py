"""
Envolvente inferior de parábolas en una dimensión.

Para g_0, ..., g_{n-1} calcula, en cada posición p, la parábola q ↦ g_q + (p − q)^2
que realiza el mínimo. El barrido es lineal en n: primero se construye la
envolvente (vértices v y fronteras z entre parábolas consecutivas) y luego se
recorre en orden.
"""
from typing import Sequence

import numpy as np


def _intersection(g: Sequence[float], q: int, r: int) -> float:
    """Abscisa donde la parábola con vértice q corta a la de vértice r."""
    return ((g[q] + q * q) - (g[r] + r * r)) / (2 * q - 2 * r)


def lower_envelope_candidates(g: Sequence[float]) -> np.ndarray:
    """
    Candidatos a minimizador de g_q + (p − q)^2 para cada p.

    Retorna, por posición, el vértice activo de la envolvente junto con sus dos
    vecinos en la envolvente. En aritmética exacta el activo es el minimizador;
    los vecinos cubren los casi-empates que el redondeo de las fronteras puede
    ordenar mal.

    Args:
        g: Alturas de los vértices (posiciones 0..n-1)

    Returns:
        Array de enteros (n, 3): [anterior, activo, siguiente], -1 si no existe
    """
    g = [float(value) for value in g]
    n = len(g)
    vertices = [0] * n
    bounds = [0.0] * (n + 1)
    bounds[0] = -np.inf
    bounds[1] = np.inf
    k = 0

    for q in range(1, n):
        s = _intersection(g, q, vertices[k])
        while s <= bounds[k]:
            k -= 1
            s = _intersection(g, q, vertices[k])
        k += 1
        vertices[k] = q
        bounds[k] = s
        bounds[k + 1] = np.inf

    last = k
    candidates = np.full((n, 3), -1, dtype=np.int64)
    k = 0
    for p in range(n):
        while bounds[k + 1] < p:
            k += 1
        candidates[p, 1] = vertices[k]
        if k > 0:
            candidates[p, 0] = vertices[k - 1]
        if k < last:
            candidates[p, 2] = vertices[k + 1]
    return candidates
