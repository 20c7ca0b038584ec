"""
Perfiles periódicos en forma cerrada.

Sirven como datos iniciales u₀ y como coeficientes de los operadores del
catálogo (velocidad de transporte, rapidez eikonal, forzamiento). En dimensión 2
un perfil es la suma del perfil unidimensional sobre los ejes.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional
import math

import numpy as np

from hjrate.core.exceptions import ConfigError
from hjrate.structures.grid import Grid, GridFn, HolderClass


class ProfileKind(str, Enum):
    """Tipos de perfil disponibles."""
    CONSTANT = "constant"
    SINE = "sine"
    COSINE = "cosine"
    TRIANGLE = "triangle"
    ABS_SINE_POWER = "abs_sine_power"
    RANDOM = "random"


_ALLOWED = {
    ProfileKind.CONSTANT: {"value"},
    ProfileKind.SINE: {"amplitude", "frequency", "phase", "offset"},
    ProfileKind.COSINE: {"amplitude", "frequency", "phase", "offset"},
    ProfileKind.TRIANGLE: {"slope", "center", "offset"},
    ProfileKind.ABS_SINE_POWER: {"amplitude", "exponent", "offset"},
    ProfileKind.RANDOM: {"seed", "modes", "amplitude", "offset"},
}


@dataclass(frozen=True)
class Profile:
    """Perfil periódico de período L en cada eje."""
    kind: ProfileKind
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        kind = ProfileKind(self.kind)
        object.__setattr__(self, "kind", kind)
        unknown = set(self.params) - _ALLOWED[kind]
        if unknown:
            raise ConfigError(f"Parámetros desconocidos para perfil '{kind.value}': {sorted(unknown)}")
        if kind is ProfileKind.ABS_SINE_POWER and not 0.0 < self._get("exponent", 1.0) <= 1.0:
            raise ConfigError("abs_sine_power requiere exponente en (0, 1]")
        if kind in (ProfileKind.SINE, ProfileKind.COSINE, ProfileKind.RANDOM):
            key = "modes" if kind is ProfileKind.RANDOM else "frequency"
            value = self._get(key, 1)
            if int(value) != value or value < 1:
                raise ConfigError(f"'{key}' debe ser un entero positivo (periodicidad)")

    def _get(self, name: str, default: float) -> float:
        return float(self.params.get(name, default))

    def _random_modes(self) -> tuple:
        rng = np.random.default_rng(int(self._get("seed", 0)))
        modes = int(self._get("modes", 4))
        k = np.arange(1, modes + 1)
        coefficients = self._get("amplitude", 1.0) * rng.standard_normal(modes) / k ** 2
        phases = rng.uniform(0.0, 2.0 * math.pi, modes)
        return k, coefficients, phases

    def axis_function(self, s: np.ndarray, length: float) -> np.ndarray:
        """Perfil unidimensional evaluado en s (cualquier forma)."""
        s = np.asarray(s, dtype=float)
        kind = self.kind
        if kind is ProfileKind.CONSTANT:
            return np.full(s.shape, self._get("value", 0.0))

        offset = self._get("offset", 0.0)
        if kind in (ProfileKind.SINE, ProfileKind.COSINE):
            angle = 2.0 * math.pi * self._get("frequency", 1) * s / length + self._get("phase", 0.0)
            wave = np.sin(angle) if kind is ProfileKind.SINE else np.cos(angle)
            return offset + self._get("amplitude", 1.0) * wave
        if kind is ProfileKind.TRIANGLE:
            d = np.abs(s - self._get("center", 0.0)) % length
            return offset + self._get("slope", 1.0) * np.minimum(d, length - d)
        if kind is ProfileKind.ABS_SINE_POWER:
            base = np.abs(np.sin(math.pi * s / length))
            return offset + self._get("amplitude", 1.0) * base ** self._get("exponent", 1.0)

        k, coefficients, phases = self._random_modes()
        angle = 2.0 * math.pi * s[..., None] * k / length + phases
        return offset + np.sum(coefficients * np.sin(angle), axis=-1)

    def __call__(self, x: np.ndarray, length: float) -> np.ndarray:
        """
        Evalúa el perfil.

        Args:
            x: Puntos (..., dim)
            length: Longitud L del toro

        Returns:
            Array (...,) con la suma sobre ejes del perfil unidimensional
        """
        x = np.asarray(x, dtype=float)
        if self.kind is ProfileKind.CONSTANT:
            return np.full(x.shape[:-1], self._get("value", 0.0))
        return np.sum(self.axis_function(x, length), axis=-1)

    def sample(self, grid: Grid) -> GridFn:
        """Muestrea el perfil en los nodos de la malla."""
        return GridFn(grid, self(grid.coordinates(), grid.length))

    def is_constant(self) -> bool:
        return self.kind is ProfileKind.CONSTANT

    def max_abs(self, length: float, dim: int = 1) -> float:
        """Cota superior de |perfil| en el toro."""
        offset = abs(self._get("offset", 0.0))
        kind = self.kind
        if kind is ProfileKind.CONSTANT:
            return abs(self._get("value", 0.0))
        if kind in (ProfileKind.SINE, ProfileKind.COSINE, ProfileKind.ABS_SINE_POWER):
            axis = abs(self._get("amplitude", 1.0))
        elif kind is ProfileKind.TRIANGLE:
            axis = abs(self._get("slope", 1.0)) * length / 2.0
        else:
            _, coefficients, _ = self._random_modes()
            axis = float(np.sum(np.abs(coefficients)))
        return dim * (axis + offset)

    def holder_certificate(self, dim: int, length: float) -> HolderClass:
        """
        Certificado de Hölder demostrado en forma cerrada.

        En dimensión 2 la suma sobre ejes multiplica la seminorma unidimensional
        por dim^(1−α/2) (desigualdad de medias de potencias).
        """
        kind = self.kind
        if kind is ProfileKind.CONSTANT:
            return HolderClass(1.0, 0.0)
        if kind in (ProfileKind.SINE, ProfileKind.COSINE):
            alpha = 1.0
            axis = abs(self._get("amplitude", 1.0)) * 2.0 * math.pi * self._get("frequency", 1) / length
        elif kind is ProfileKind.TRIANGLE:
            alpha = 1.0
            axis = abs(self._get("slope", 1.0))
        elif kind is ProfileKind.ABS_SINE_POWER:
            alpha = self._get("exponent", 1.0)
            axis = abs(self._get("amplitude", 1.0)) * (math.pi / length) ** alpha
        else:
            alpha = 1.0
            k, coefficients, _ = self._random_modes()
            axis = float(np.sum(np.abs(coefficients) * 2.0 * math.pi * k / length))
        return HolderClass(alpha, axis * dim ** (1.0 - alpha / 2.0))


def constant_profile(value: float) -> Profile:
    """Atajo para un perfil constante."""
    return Profile(ProfileKind.CONSTANT, {"value": value})


def profile_from_config(kind: str, params: Optional[Dict[str, Any]] = None) -> Profile:
    """
    Construye un perfil desde su forma JSON.

    Raises:
        ConfigError: Si el tipo o los parámetros son inválidos
    """
    try:
        profile_kind = ProfileKind(kind)
    except ValueError:
        raise ConfigError(f"Tipo de perfil desconocido: '{kind}'")
    return Profile(profile_kind, dict(params or {}))
