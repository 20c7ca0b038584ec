"""
Tests para EnvelopeService.
"""
import pytest
import numpy as np
from hypothesis import given, settings, strategies as st

from hjrate.core.exceptions import EnvelopeError, HolderCertificateError
from hjrate.services.envelope_service import EnvelopeService
from hjrate.storage.data_models import EnvelopeKind
from hjrate.structures.grid import GridFn, HolderClass, make_grid
from hjrate.structures.profiles import Profile, ProfileKind


class TestSupConvolution:
    """Tests de la sup-convolución rápida."""

    @pytest.mark.parametrize("delta", [1e-4, 1e-3, 1e-2, 1e-1, 10.0])
    def test_matches_brute_force_1d(self, grid_1d, random_gridfn, delta):
        """El algoritmo rápido reproduce los bits de la búsqueda exhaustiva en 1D."""
        f = random_gridfn(grid_1d)
        fast = EnvelopeService.sup_convolution(f, delta)
        slow = EnvelopeService.brute_force(f, delta)

        assert np.array_equal(fast.envelope.values, slow.envelope.values)
        assert np.array_equal(fast.arg_map, slow.arg_map)

    @pytest.mark.parametrize("delta", [1e-3, 1e-2, 1e-1])
    def test_matches_brute_force_2d(self, grid_2d, random_gridfn, delta):
        """El algoritmo rápido reproduce los bits de la búsqueda exhaustiva en 2D."""
        f = random_gridfn(grid_2d)
        fast = EnvelopeService.sup_convolution(f, delta)
        slow = EnvelopeService.brute_force(f, delta)

        assert np.array_equal(fast.envelope.values, slow.envelope.values)
        assert np.array_equal(fast.arg_map, slow.arg_map)

    def test_constant_is_fixed(self, grid_2d):
        """La sup-convolución de una constante es la misma constante."""
        f = GridFn.constant(grid_2d, 1.25)
        result = EnvelopeService.sup_convolution(f, 0.05)

        assert np.array_equal(result.envelope.values, f.values)
        assert result.kind is EnvelopeKind.SUP

    def test_arg_map_shape(self, grid_2d, random_gridfn):
        """El mapa de argumentos tiene forma (*shape, dim)."""
        result = EnvelopeService.sup_convolution(random_gridfn(grid_2d), 0.01)

        assert result.arg_map.shape == (16, 16, 2)
        assert result.arg_flat_indices().shape == (16, 16)

    def test_argument_realizes_value(self, grid_1d, random_gridfn):
        """El valor de la envolvente se alcanza en el argumento guardado."""
        f = random_gridfn(grid_1d)
        result = EnvelopeService.sup_convolution(f, 0.02)
        h = grid_1d.spacing
        arg = result.arg_map[..., 0]
        k = np.abs(np.arange(64) - arg) % 64
        d = np.minimum(k, 64 - k) * h

        assert np.allclose(result.envelope.values, f.values[arg] - d * d / 0.04)

    @pytest.mark.parametrize("delta", [0.0, -1.0, float("nan"), float("inf")])
    def test_invalid_delta(self, grid_1d, delta):
        """δ no positivo o no finito lanza EnvelopeError."""
        with pytest.raises(EnvelopeError):
            EnvelopeService.sup_convolution(GridFn.constant(grid_1d, 0.0), delta)

    @settings(max_examples=40, deadline=None)
    @given(
        values=st.lists(st.floats(min_value=-10.0, max_value=10.0, allow_nan=False), min_size=2, max_size=24),
        delta=st.floats(min_value=1e-4, max_value=10.0),
    )
    def test_property_matches_brute_force(self, values, delta):
        """Para cualquier función 1D los valores coinciden con la búsqueda exhaustiva."""
        grid = make_grid(1, len(values), 1.0)
        f = GridFn(grid, values)

        fast = EnvelopeService.sup_convolution(f, delta)
        slow = EnvelopeService.brute_force(f, delta)

        assert np.allclose(fast.envelope.values, slow.envelope.values, rtol=1e-12, atol=1e-12)


def _random_instance(seed: int):
    """Instancia aleatoria: 1D con N ≤ 512 o, una de cada cinco, 2D con N ≤ 64."""
    rng = np.random.default_rng(seed)
    if seed % 5 == 0:
        grid = make_grid(2, int(rng.integers(2, 65)), 1.0)
    else:
        grid = make_grid(1, int(rng.integers(2, 513)), 1.0)
    f = GridFn(grid, rng.uniform(-1.0, 1.0, grid.shape))
    return f, float(10.0 ** rng.uniform(-4.0, 1.0))


class TestRandomInstances:
    """Coincidencia bit a bit con la búsqueda exhaustiva en 200 instancias."""

    @pytest.mark.parametrize("seed", range(200))
    def test_sup_and_inf_match_brute_force(self, seed):
        """Valores y mapa de argumentos idénticos para sup e inf."""
        f, delta = _random_instance(seed)

        for kind, fast in (
            (EnvelopeKind.SUP, EnvelopeService.sup_convolution(f, delta)),
            (EnvelopeKind.INF, EnvelopeService.inf_convolution(f, delta)),
        ):
            slow = EnvelopeService.brute_force(f, delta, kind)
            assert np.array_equal(fast.envelope.values, slow.envelope.values)
            assert np.array_equal(fast.arg_map, slow.arg_map)


class TestInfConvolution:
    """Tests de la inf-convolución y la dualidad."""

    def test_duality(self, grid_2d, random_gridfn):
        """u_δ = −(−f)^δ."""
        f = random_gridfn(grid_2d)
        lower = EnvelopeService.inf_convolution(f, 0.01)
        upper = EnvelopeService.sup_convolution(-f, 0.01)

        assert np.array_equal(lower.envelope.values, -upper.envelope.values)
        assert lower.kind is EnvelopeKind.INF

    def test_matches_brute_force(self, grid_1d, random_gridfn):
        """La inf-convolución coincide con la búsqueda exhaustiva de mínimos."""
        f = random_gridfn(grid_1d)
        fast = EnvelopeService.inf_convolution(f, 0.005)
        slow = EnvelopeService.brute_force(f, 0.005, EnvelopeKind.INF)

        assert np.array_equal(fast.envelope.values, slow.envelope.values)

    def test_sandwich(self, grid_2d, random_gridfn):
        """u_δ ≤ f ≤ u^δ."""
        f = random_gridfn(grid_2d)
        lower = EnvelopeService.inf_convolution(f, 0.03).envelope.values
        upper = EnvelopeService.sup_convolution(f, 0.03).envelope.values

        assert np.all(lower <= f.values)
        assert np.all(f.values <= upper)


_CERTIFIED_PROFILES = [
    *(
        (ProfileKind.ABS_SINE_POWER, {"exponent": exponent, **extra}, dim)
        for exponent in (0.3, 0.5)
        for extra, dim in (
            ({}, 1),
            ({"amplitude": 2.0}, 1),
            ({"amplitude": 0.5, "offset": 1.0}, 1),
            ({"amplitude": -1.0}, 1),
            ({}, 2),
            ({"amplitude": 1.5}, 2),
        )
    ),
    (ProfileKind.SINE, {}, 1),
    (ProfileKind.SINE, {"frequency": 2, "amplitude": 0.5}, 1),
    (ProfileKind.RANDOM, {"seed": 3, "modes": 4}, 1),
    (ProfileKind.ABS_SINE_POWER, {"exponent": 1.0}, 1),
    (ProfileKind.TRIANGLE, {"slope": 1.0, "center": 0.5}, 2),
    (ProfileKind.COSINE, {"amplitude": 0.7}, 2),
]


class TestEnvelopeBounds:
    """Tests de la batería de cotas de las convoluciones."""

    @pytest.mark.parametrize("delta", [0.1, 0.01, 0.001])
    def test_holder_profile_passes(self, delta):
        """|sin(πx)|^(1/2) con su certificado satisface las cinco cotas."""
        grid = make_grid(1, 256, 1.0)
        profile = Profile(ProfileKind.ABS_SINE_POWER, {"exponent": 0.5})
        report = EnvelopeService.check_envelope_bounds(
            profile.sample(grid), profile.holder_certificate(1, 1.0), delta
        )

        assert report.passed
        assert report.sandwich
        assert [check.name for check in report.checks] == [
            "argmax_distance", "argmin_distance", "sup_deviation", "inf_deviation", "lipschitz"
        ]
        assert report.warnings == []

    def test_lipschitz_profile_2d_passes(self):
        """Un triángulo 2D con su certificado de Lipschitz pasa la batería."""
        grid = make_grid(2, 24, 1.0)
        profile = Profile(ProfileKind.TRIANGLE, {"slope": 1.0, "center": 0.5})
        report = EnvelopeService.check_envelope_bounds(
            profile.sample(grid), profile.holder_certificate(2, 1.0), 0.05
        )

        assert report.passed

    def test_lipschitz_slack_recorded(self, grid_1d):
        """La cota de Lipschitz lleva la holgura h/δ."""
        f = Profile(ProfileKind.SINE, {}).sample(grid_1d)
        report = EnvelopeService.check_envelope_bounds(f, HolderClass(1.0, 7.0), 0.1)

        assert report.check("lipschitz").slack == pytest.approx(grid_1d.spacing / 0.1)

    def test_small_delta_warning(self, grid_1d):
        """δ < 10h² produce una advertencia, no un fallo."""
        f = Profile(ProfileKind.SINE, {}).sample(grid_1d)
        report = EnvelopeService.check_envelope_bounds(f, HolderClass(1.0, 7.0), 1e-5)

        assert report.warnings
        assert report.passed

    def test_understated_certificate(self, grid_1d):
        """Un certificado menor que la seminorma medida lanza HolderCertificateError."""
        f = Profile(ProfileKind.SINE, {}).sample(grid_1d)

        with pytest.raises(HolderCertificateError):
            EnvelopeService.check_envelope_bounds(f, HolderClass(1.0, 1.0), 0.01)

    @pytest.mark.parametrize("delta", [1e-1, 1e-2, 1e-3])
    @pytest.mark.parametrize("kind, params, dim", _CERTIFIED_PROFILES)
    def test_certified_profiles_pass(self, kind, params, dim, delta):
        """Perfiles certificados con α ∈ {0.3, 0.5, 1} satisfacen las cotas y la semiconvexidad."""
        grid = make_grid(dim, 128 if dim == 1 else 24, 1.0)
        profile = Profile(kind, params)
        f = profile.sample(grid)

        report = EnvelopeService.check_envelope_bounds(f, profile.holder_certificate(dim, 1.0), delta)

        assert report.passed, [check for check in report.checks if not check.passed]
        assert report.sandwich
        assert EnvelopeService.check_semiconvexity(EnvelopeService.sup_convolution(f, delta)).passed
        assert EnvelopeService.check_semiconvexity(EnvelopeService.inf_convolution(f, delta)).passed


class TestSemiconvexity:
    """Tests de semiconvexidad discreta."""

    @pytest.mark.parametrize("delta", [0.01, 0.05])
    def test_sup_is_semiconvex(self, grid_1d, random_gridfn, delta):
        """Las segundas diferencias de u^δ están acotadas por −h²/δ."""
        report = EnvelopeService.check_semiconvexity(
            EnvelopeService.sup_convolution(random_gridfn(grid_1d), delta)
        )

        assert report.passed
        assert report.kind == "sup"
        assert report.threshold < 0

    def test_inf_is_semiconcave(self, grid_2d, random_gridfn):
        """Las segundas diferencias de u_δ están acotadas por h²/δ."""
        report = EnvelopeService.check_semiconvexity(
            EnvelopeService.inf_convolution(random_gridfn(grid_2d), 0.02)
        )

        assert report.passed
        assert report.kind == "inf"
        assert report.threshold > 0
