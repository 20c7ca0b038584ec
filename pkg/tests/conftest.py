"""
Configuración de fixtures compartidos para pytest.
"""
import pytest
from typing import Callable, Dict, Generator

import numpy as np

from hjrate.structures.grid import Grid, GridFn, make_grid
import hjrate.storage.in_memory_store as store


@pytest.fixture
def grid_1d() -> Grid:
    """Fixture: malla 1D de 64 nodos sobre [0, 1)."""
    return make_grid(1, 64, 1.0)


@pytest.fixture
def grid_2d() -> Grid:
    """Fixture: malla 2D de 16x16 nodos sobre [0, 1)^2."""
    return make_grid(2, 16, 1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    """Fixture: generador con semilla fija."""
    return np.random.default_rng(12345)


@pytest.fixture
def random_gridfn(rng) -> Callable[[Grid], GridFn]:
    """Fixture: fábrica de funciones de malla aleatorias."""
    def build(grid: Grid) -> GridFn:
        return GridFn(grid, rng.uniform(-1.0, 1.0, grid.shape))
    return build


@pytest.fixture
def transport_config() -> Dict:
    """Fixture: transporte 1D con dato triangular (oráculo exacto)."""
    return {
        "name": "transport-triangle",
        "hamiltonian": {"kind": "transport", "params": {"velocity": [1.0]}, "C_H": 0.0},
        "diffusion": {"kind": "laplacian", "Lambda": 1.0, "C_F": 0.0},
        "u0": {"kind": "triangle", "params": {"slope": 1.0, "center": 0.5}},
        "T": 0.25,
        "grid": {"dim": 1, "N": 256, "L": 1.0}
    }


@pytest.fixture
def heat_config() -> Dict:
    """Fixture: H ≡ 0 con laplaciano y dato 1-Lipschitz."""
    return {
        "name": "heat-triangle",
        "hamiltonian": {"kind": "custom_first_order", "params": {"value": 0.0}},
        "diffusion": {"kind": "laplacian", "Lambda": 1.0, "C_F": 0.0},
        "u0": {"kind": "triangle", "params": {"slope": 1.0, "center": 0.5}},
        "T": 1.0,
        "grid": {"dim": 1, "N": 512, "L": 1.0}
    }


@pytest.fixture
def stationary_constant_config() -> Dict:
    """Fixture: problema estacionario independiente de x (u = −H(0,0)/ρ)."""
    return {
        "name": "stationary-constant",
        "hamiltonian": {"kind": "forced_eikonal", "params": {"forcing": 1.0}},
        "diffusion": {"kind": "laplacian", "Lambda": 1.0, "C_F": 0.0},
        "rho": 2.0,
        "grid": {"dim": 1, "N": 32, "L": 1.0}
    }


@pytest.fixture
def forced_eikonal_config() -> Dict:
    """Fixture: eikonal forzado estacionario con f = |sin(πx)|^(1/2)."""
    return {
        "name": "forced-eikonal",
        "hamiltonian": {
            "kind": "forced_eikonal",
            "params": {"forcing": {"kind": "abs_sine_power", "params": {"exponent": 0.5}}},
            "C_H": 1.8,
            "beta": 0.5
        },
        "diffusion": {"kind": "laplacian", "Lambda": 1.0, "C_F": 0.0},
        "rho": 1.0,
        "grid": {"dim": 1, "N": 32, "L": 1.0}
    }


@pytest.fixture
def clean_storage() -> Generator:
    """
    Fixture: limpiar el registro de barridos antes y después de cada test.

    Guarda el estado actual, limpia el diccionario, ejecuta el test
    y luego restaura el estado original.
    """
    runs_backup = store.runs_db.copy()
    store.clear_runs()

    yield

    store.clear_runs()
    store.runs_db.update(runs_backup)
