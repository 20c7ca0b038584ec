"""
Tests para BoundsService.
"""
import math
from dataclasses import replace

import pytest
import numpy as np
from hypothesis import assume, given, settings, strategies as st

from hjrate.core.exceptions import BoundsError, CompatibilityError, DegenerateLedgerError
from hjrate.services.bounds_service import BoundsService
from hjrate.storage.data_models import LedgerCase, ProblemSpec, TraceProvenance
from hjrate.structures.catalog import DiffusionKind, DiffusionSpec, HamiltonianKind, HamiltonianSpec
from hjrate.structures.grid import HolderClass, make_grid
from hjrate.structures.profiles import Profile, ProfileKind


def _hamiltonian(C_H: float, beta: float, gamma: float) -> HamiltonianSpec:
    return HamiltonianSpec(
        HamiltonianKind.CUSTOM_FIRST_ORDER, C_H, beta, gamma,
        function=lambda x, t, p: np.zeros(np.shape(p)[:-1]),
    )


def _problem(C_H=1.0, beta=1.0, gamma=0.0, alpha=1.0, eta=1.0, u_seminorm=1.0, u0_seminorm=1.0,
             horizon=1.0, rho=0.0, C_F=0.0, dim=1):
    return ProblemSpec(
        hamiltonian=_hamiltonian(C_H, beta, gamma),
        diffusion=DiffusionSpec(DiffusionKind.LAPLACIAN, 1.0, C_F),
        u0=Profile(ProfileKind.SINE, {}),
        horizon=horizon,
        rho=rho,
        u0_holder=HolderClass(eta, u0_seminorm),
        u_holder=HolderClass(alpha, u_seminorm),
        grid=make_grid(dim, 8, 1.0),
    )


class TestBuildLedger:
    """Tests de construcción del ledger de evolución."""

    def test_lipschitz_general_case(self):
        """α = β = η = 1, γ = 0, C_H > 0 da P = 1 y exponente 1/2."""
        ledger = BoundsService.build_ledger(_problem())

        assert ledger.case_tag is LedgerCase.GENERAL
        assert ledger.P == 1.0
        assert ledger.exponent == 0.5

    def test_holder_general_case(self):
        """α = β = η = 0.6, γ = 0 da exponente α/2 = 0.3."""
        ledger = BoundsService.build_ledger(_problem(beta=0.6, alpha=0.6, eta=0.6))

        assert ledger.exponent == pytest.approx(0.3, rel=1e-12)

    def test_C_H_zero_case(self):
        """C_H = 0 y η = 1: P = 1 y C₂ ≡ 0."""
        ledger = BoundsService.build_ledger(_problem(C_H=0.0))

        assert ledger.case_tag is LedgerCase.C_H_ZERO
        assert ledger.P == 1.0
        assert np.all(ledger.C2_values == 0.0)

    def test_C1_zero_case(self):
        """Dato constante con C_H > 0: P es el exponente de crecimiento."""
        ledger = BoundsService.build_ledger(_problem(beta=0.5, alpha=0.8, gamma=1.0, eta=0.8, u0_seminorm=0.0))

        assert ledger.case_tag is LedgerCase.C1_ZERO
        assert ledger.C1 == 0.0
        assert ledger.P == pytest.approx((0.5 - 0.2) / 1.2)

    def test_constant_trace_quadrature_is_exact(self):
        """Con traza constante, C₂(t) = C_H·t·(2K)^{β/(2−α)}(1+(2K)^{γ/(2−α)})."""
        ledger = BoundsService.build_ledger(_problem(C_H=2.0, beta=0.5, gamma=1.0, alpha=0.9, eta=0.9,
                                                     u_seminorm=1.5, horizon=2.0))
        K2 = 3.0
        rate = 2.0 * K2 ** (0.5 / 1.1) * (1.0 + K2 ** (1.0 / 1.1))

        assert ledger.provenance is TraceProvenance.DECLARED
        for t in (0.0, 0.5, 1.3, 2.0):
            assert ledger.C2(t) == pytest.approx(rate * t, rel=1e-12, abs=1e-14)

    def test_C2_outside_horizon(self):
        """C₂ fuera de [0, T] lanza BoundsError."""
        ledger = BoundsService.build_ledger(_problem())

        with pytest.raises(BoundsError):
            ledger.C2(1.5)

    def test_invalid_mesh(self):
        """Una malla que no empieza en 0 lanza BoundsError."""
        with pytest.raises(BoundsError):
            BoundsService.build_ledger(_problem(), times=[0.1, 0.5, 1.0])

    def test_negative_trace(self):
        """Una traza negativa lanza BoundsError."""
        with pytest.raises(BoundsError):
            BoundsService.build_ledger(_problem(), seminorm_trace=lambda s: -1.0)

    def test_incompatible_exponents(self):
        """β + (α−1)γ <= 0 con C_H ≠ 0 lanza CompatibilityError."""
        problem = _problem(C_H=0.0, beta=0.5, gamma=1.0, alpha=0.4, eta=0.4)
        object.__setattr__(problem, "hamiltonian", _hamiltonian(1.0, 0.5, 1.0))

        with pytest.raises(CompatibilityError):
            BoundsService.build_ledger(problem)

    def test_measured_trace_blowup_is_suspect(self):
        """Una traza medida concentrada en s = 0 se marca como sospechosa."""
        ledger = BoundsService.build_ledger(
            _problem(),
            seminorm_trace=lambda s: 1e6 if s == 0.0 else 1.0,
            provenance=TraceProvenance.MEASURED,
        )

        assert ledger.integrability_suspect
        assert ledger.provenance is TraceProvenance.MEASURED

    def test_report_round_trip(self):
        """El ledger sobrevive a su serialización JSON."""
        ledger = BoundsService.build_ledger(_problem(beta=0.5, alpha=0.7, eta=0.5))
        report = BoundsService.ledger_report(ledger)
        restored = BoundsService.ledger_from_report(report)

        assert restored.case_tag is ledger.case_tag
        assert restored.P == ledger.P
        assert np.array_equal(restored.C2_values, ledger.C2_values)
        assert report.case_tag == "general"


class TestBoundRhs:
    """Tests del lado derecho de la cota de evolución."""

    @pytest.fixture
    def unit_ledger(self):
        """Ledger con P = 1, C₁ = 1, C₂ ≡ 0 y Λ = n = 1."""
        return BoundsService.build_ledger(_problem(C_H=0.0, u0_seminorm=0.5))

    @pytest.mark.parametrize("epsilon", [1e-4, 1e-2, 0.5])
    def test_two_sqrt_epsilon(self, unit_ledger, epsilon):
        """La cota vale 2√ε."""
        assert BoundsService.bound_rhs(unit_ledger, 1.0, epsilon) == pytest.approx(2.0 * math.sqrt(epsilon))

    def test_time_zero(self, unit_ledger):
        """En t = 0 la cota se anula."""
        assert BoundsService.bound_rhs(unit_ledger, 0.0, 0.3) == 0.0

    def test_only_forcing(self):
        """Con C₁ = C₂ = 0 solo queda εtC_F."""
        ledger = BoundsService.build_ledger(_problem(C_H=0.0, u0_seminorm=0.0, C_F=1.0))

        assert BoundsService.bound_rhs(ledger, 0.5, 0.2) == pytest.approx(0.1)

    def test_initial_mismatch_is_added(self):
        """El desajuste inicial se suma a la cota."""
        problem = _problem(C_H=0.0, u0_seminorm=0.5)
        object.__setattr__(problem, "initial_mismatch", 0.25)
        ledger = BoundsService.build_ledger(problem)

        assert BoundsService.bound_rhs(ledger, 1.0, 0.01) == pytest.approx(0.2 + 0.25)

    def test_negative_epsilon(self, unit_ledger):
        """ε negativo lanza BoundsError."""
        with pytest.raises(BoundsError):
            BoundsService.bound_rhs(unit_ledger, 1.0, -0.1)

    def test_time_beyond_horizon(self, unit_ledger):
        """t > T lanza BoundsError aunque C₁ + C₂ sea nulo."""
        with pytest.raises(BoundsError):
            BoundsService.bound_rhs(unit_ledger, 1.5, 0.01)
        degenerate = BoundsService.build_ledger(_problem(C_H=0.0, u0_seminorm=0.0, C_F=1.0))
        with pytest.raises(BoundsError):
            BoundsService.bound_rhs(degenerate, 1.5, 0.01)

    def test_optimal_delta_unit(self, unit_ledger):
        """t = ε = Λ = n = 1, C₁ + C₂ = 1, P = 1 da δ* = 1."""
        assert BoundsService.optimal_delta(unit_ledger, 1.0, 1.0) == pytest.approx(1.0)

    def test_optimal_delta_shrinks_with_epsilon(self, unit_ledger):
        """δ* decrece con ε."""
        deltas = [BoundsService.optimal_delta(unit_ledger, 1.0, eps) for eps in (1e-1, 1e-2, 1e-3)]

        assert deltas[0] > deltas[1] > deltas[2]

    def test_degenerate_ledger(self):
        """C₁ + C₂ = 0 lanza DegenerateLedgerError."""
        ledger = BoundsService.build_ledger(_problem(C_H=0.0, u0_seminorm=0.0))

        with pytest.raises(DegenerateLedgerError):
            BoundsService.optimal_delta(ledger, 1.0, 0.1)

    def test_step_remainders(self, unit_ledger):
        """Con C_H = 0 el resto R se anula y R₀ = C₁δ^{η/(2−η)}."""
        R, R0 = BoundsService.step_remainders(unit_ledger, 1.0, 0.04)

        assert R == 0.0
        assert R0 == pytest.approx(0.04)


class TestLedgerIdentities:
    """Propiedades de los exponentes, el δ óptimo y la monotonía."""

    @settings(max_examples=200, deadline=None)
    @given(
        alpha=st.floats(min_value=0.05, max_value=1.0),
        beta=st.floats(min_value=0.05, max_value=1.0),
        gamma=st.floats(min_value=0.0, max_value=2.0),
        eta_fraction=st.floats(min_value=0.05, max_value=1.0),
        C_H=st.floats(min_value=0.01, max_value=10.0),
        seminorm=st.floats(min_value=0.01, max_value=10.0),
    )
    def test_exponent_closed_form(self, alpha, beta, gamma, eta_fraction, C_H, seminorm):
        """P/(P+1) = min{η/2, c/(c+2−α)} con c = β + γ(α−1)."""
        compatible = beta + gamma * (alpha - 1.0)
        assume(compatible > 1e-6)
        eta = eta_fraction * alpha
        ledger = BoundsService.build_ledger(_problem(
            C_H=C_H, beta=beta, gamma=gamma, alpha=alpha, eta=eta, u_seminorm=seminorm, u0_seminorm=seminorm
        ), times=np.linspace(0.0, 1.0, 5))

        expected = min(eta / 2.0, compatible / (compatible + 2.0 - alpha))
        assert ledger.exponent == pytest.approx(expected, rel=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(
        P=st.floats(min_value=0.01, max_value=2.0),
        seminorm=st.floats(min_value=0.01, max_value=10.0),
        t=st.floats(min_value=0.01, max_value=1.0),
        epsilon=st.floats(min_value=1e-6, max_value=1.0),
        factor=st.floats(min_value=0.1, max_value=10.0),
    )
    def test_optimal_delta_identity_and_optimality(self, P, seminorm, t, epsilon, factor):
        """En δ* la expresión previa reproduce la cota y ningún δ la mejora."""
        eta = 2.0 * P / (1.0 + P)
        assume(eta <= 1.0)
        ledger = BoundsService.build_ledger(_problem(C_H=0.0, eta=eta, u0_seminorm=seminorm))
        delta = BoundsService.optimal_delta(ledger, t, epsilon)
        at_optimum = BoundsService.delta_budget(ledger, t, epsilon, delta)

        assert at_optimum == pytest.approx(BoundsService.bound_rhs(ledger, t, epsilon), rel=1e-12)
        assert at_optimum <= BoundsService.delta_budget(ledger, t, epsilon, delta * factor) * (1.0 + 1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        epsilon=st.floats(min_value=1e-6, max_value=0.5),
        t=st.floats(min_value=0.01, max_value=0.5),
        scale=st.floats(min_value=1.0, max_value=2.0),
    )
    def test_monotone_in_epsilon_and_time(self, epsilon, t, scale):
        """La cota no decrece con ε ni con t."""
        ledger = BoundsService.build_ledger(_problem(beta=0.5, alpha=0.7, eta=0.6, C_F=0.5))
        base = BoundsService.bound_rhs(ledger, t, epsilon)

        assert BoundsService.bound_rhs(ledger, t, epsilon * scale) >= base * (1.0 - 1e-12)
        assert BoundsService.bound_rhs(ledger, t * scale, epsilon) >= base * (1.0 - 1e-12)

    def test_monotone_on_random_tuples(self):
        """En 10⁴ tuplas (t, ε, Λ, C_F, n) la cota no decrece en ninguna coordenada."""
        ledgers = [
            BoundsService.build_ledger(_problem()),
            BoundsService.build_ledger(_problem(beta=0.5, alpha=0.7, eta=0.6, C_F=0.5)),
            BoundsService.build_ledger(_problem(C_H=0.0, eta=0.5)),
            BoundsService.build_ledger(_problem(u0_seminorm=0.0, beta=0.3, alpha=0.4, eta=0.4)),
        ]
        rng = np.random.default_rng(2024)
        violations = []
        for _ in range(10_000):
            ledger = replace(
                ledgers[int(rng.integers(len(ledgers)))],
                Lambda=float(rng.uniform(0.1, 5.0)),
                C_F=float(rng.uniform(0.0, 2.0)),
                n=int(rng.integers(1, 3)),
            )
            t = float(rng.uniform(0.0, 0.5))
            epsilon = float(10.0 ** rng.uniform(-6.0, 0.0))
            scale = float(rng.uniform(1.0, 2.0))
            base = BoundsService.bound_rhs(ledger, t, epsilon) * (1.0 - 1e-12)
            grown = [
                BoundsService.bound_rhs(ledger, t, epsilon * scale),
                BoundsService.bound_rhs(ledger, t * scale, epsilon),
                BoundsService.bound_rhs(replace(ledger, Lambda=ledger.Lambda * scale), t, epsilon),
                BoundsService.bound_rhs(replace(ledger, C_F=ledger.C_F * scale), t, epsilon),
                BoundsService.bound_rhs(replace(ledger, n=ledger.n + 1), t, epsilon),
            ]
            if min(grown) < base:
                violations.append((ledger.case_tag, t, epsilon, scale))

        assert violations == []

    def test_monotone_in_dimension(self):
        """La cota crece con la dimensión n."""
        one = BoundsService.build_ledger(_problem(dim=1))
        two = BoundsService.build_ledger(_problem(dim=2))

        assert BoundsService.bound_rhs(two, 0.5, 0.01) > BoundsService.bound_rhs(one, 0.5, 0.01)

    def test_quadrature_converges(self):
        """Reducir el paso a la mitad cambia C₂ en menos de 10⁻⁶ con una traza suave."""
        problem = _problem(beta=0.5, alpha=0.8, eta=0.8)
        trace = lambda s: 1.0 + 0.5 * math.sin(3.0 * s)  # noqa: E731
        coarse = BoundsService.build_ledger(problem, trace, times=np.linspace(0.0, 1.0, 2049))
        fine = BoundsService.build_ledger(problem, trace, times=np.linspace(0.0, 1.0, 4097))

        assert coarse.C2(1.0) == pytest.approx(fine.C2(1.0), rel=1e-6)


class TestStationaryBounds:
    """Tests del ledger y la cota estacionarios."""

    def test_x_independent_bound_is_zero(self):
        """C_H = 0 y C_F = 0 dan cota nula."""
        sledger = BoundsService.build_stationary_ledger(_problem(C_H=0.0, rho=1.0))

        assert sledger.C3 == 0.0
        assert BoundsService.stationary_bound(sledger, 0.1) == 0.0

    def test_bounded_solution_exponent(self):
        """α = 0, γ = 0, β = 1/2 da exponente β/(β+2) = 1/5."""
        sledger = BoundsService.build_stationary_ledger(_problem(beta=0.5, rho=1.0), seminorm=1.0, alpha=0.0)

        assert BoundsService.stationary_exponent(sledger) == pytest.approx(0.2)

    def test_rho_halves_bound(self):
        """Duplicar ρ divide la cota a la mitad."""
        one = BoundsService.build_stationary_ledger(_problem(beta=0.5, rho=1.0))
        two = BoundsService.build_stationary_ledger(_problem(beta=0.5, rho=2.0))

        assert BoundsService.stationary_bound(two, 0.01) == pytest.approx(
            0.5 * BoundsService.stationary_bound(one, 0.01)
        )

    def test_exponent_identity(self):
        """Q/(Q+1) = c/(c+2−α)."""
        sledger = BoundsService.build_stationary_ledger(_problem(beta=0.7, gamma=0.5, alpha=0.6, rho=1.0))
        c = 0.7 + 0.5 * (0.6 - 1.0)

        assert BoundsService.stationary_exponent(sledger) == pytest.approx(c / (c + 2.0 - 0.6), rel=1e-12)

    def test_non_positive_Q(self):
        """Q <= 0 con C₃ > 0 lanza CompatibilityError."""
        sledger = BoundsService.build_stationary_ledger(_problem(beta=0.5, gamma=1.0, rho=1.0), alpha=0.0)

        with pytest.raises(CompatibilityError):
            BoundsService.stationary_bound(sledger, 0.01)

    def test_requires_stationary(self):
        """Un problema de evolución lanza BoundsError."""
        with pytest.raises(BoundsError):
            BoundsService.build_stationary_ledger(_problem())

    def test_report(self):
        """La serialización incluye el exponente y el origen."""
        sledger = BoundsService.build_stationary_ledger(_problem(beta=0.5, rho=1.0),
                                                        provenance=TraceProvenance.MEASURED)
        report = BoundsService.stationary_ledger_report(sledger)

        assert report.provenance == "measured"
        assert report.exponent == pytest.approx(0.5 / 1.5)


class TestHeatBound:
    """Tests de la cota del calor."""

    def test_unit_example(self):
        """‖Du₀‖ = 1, C_F = 0, ε = t = 1 da 4."""
        assert BoundsService.heat_bound(1.0, 0.0, 1.0, 1.0) == 4.0

    def test_time_zero(self):
        """En t = 0 la cota es 0."""
        assert BoundsService.heat_bound(1.0, 2.0, 0.0, 0.1) == 0.0

    def test_constant_data(self):
        """Dato constante y C_F = 0 dan 0."""
        assert BoundsService.heat_bound(0.0, 0.0, 0.7, 0.3) == 0.0

    def test_infinite_lipschitz(self):
        """‖Du₀‖ infinita lanza BoundsError."""
        with pytest.raises(BoundsError):
            BoundsService.heat_bound(float("inf"), 0.0, 1.0, 0.1)
