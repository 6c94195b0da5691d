import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from models import AlgebraState, FamilyKind, FamilySolution, GridFunction, Sign
from services.algebra_core import (
    PotentialAlgebra,
    collinearity_defect,
    normalize,
    pole_distance,
    pole_resolved_dx,
)
from utils.errors import GridTooShortError, NonNormalizableError, NotABoundStateError, PoleError
from utils.finite_difference import first_derivative, interior

from conftest import random_family

algebra = PotentialAlgebra()

SCARF_A = FamilySolution(kind=FamilyKind.I, b_I=-1.8)  # A=2, B=1.8, series A, m = 2.5
SCARF_B = FamilySolution(kind=FamilyKind.I, b_I=-2.5)  # series B, m = 1.8
SCARF_GRID = np.linspace(-15.0, 15.0, 3001)


def resolved_grid(fam, half_width=15.0, base=0.005):
    dx = pole_resolved_dx(pole_distance(fam), base)
    return np.linspace(-half_width, half_width, int(math.ceil(2.0 * half_width / dx)) + 1)


def _families_for_identities():
    return [
        (FamilySolution(kind=FamilyKind.I, b_R=0.7, b_I=-0.4, c=0.2, gamma=0.1), 1.7),
        (FamilySolution(kind=FamilyKind.II, b_R=0.5, b_I=0.3, gamma=0.3), 1.7),
        (FamilySolution(kind=FamilyKind.III, b_R=1.0, b_I=0.5, sign=Sign.upper), 1.7),
        (FamilySolution(kind=FamilyKind.III, b_R=-0.8, b_I=0.2, sign=Sign.lower), 2.2),
    ]


class TestFamilies:
    def test_family_one_at_origin(self):
        F, G = algebra.eval_FG(FamilySolution(kind=FamilyKind.I, b_R=1.0), 0.0)
        assert F == pytest.approx(0.0)
        assert G == pytest.approx(1.0)

    def test_exponential_family_at_origin(self):
        F, G = algebra.eval_FG(FamilySolution(kind=FamilyKind.III, b_R=2.0, b_I=1.0), 0.0)
        assert F == 1
        assert G == pytest.approx(2 + 1j)

    def test_shifted_family_one(self):
        fam = FamilySolution(kind=FamilyKind.I, b_R=1.0, b_I=-0.5, c=0.3, gamma=0.2)
        F, G = algebra.eval_FG(fam, 1.0)
        xi = 0.7 - 0.2j
        assert F == pytest.approx(np.tanh(xi), rel=1e-13)
        assert G == pytest.approx((1 - 0.5j) / np.cosh(xi), rel=1e-13)

    def test_exponential_family_drops_shifts(self):
        fam = FamilySolution(kind=FamilyKind.III, b_R=1.0, c=3.0, gamma=2.0)
        assert fam.c == 0 and fam.gamma == 0

    def test_gamma_range_enforced(self):
        with pytest.raises(ValueError):
            FamilySolution(kind=FamilyKind.I, gamma=math.pi / 4)
        FamilySolution(kind=FamilyKind.I, gamma=math.pi / 4, allow_any_gamma=True)

    def test_pole_of_unshifted_family_two(self):
        with pytest.raises(PoleError):
            algebra.eval_FG(FamilySolution(kind=FamilyKind.II, b_R=1.0, c=0.5), 0.5)

    @pytest.mark.parametrize("kind", list(FamilyKind))
    def test_exact_solutions_of_coupled_equations(self, rng, kind):
        xs = np.linspace(-5.0, 5.0, 200)
        for _ in range(100):
            fam = random_family(rng, kind)
            r_f, r_g = algebra.ode_residual(fam, xs)
            assert r_f < 1e-12
            assert r_g < 1e-12

    def test_exponential_lower_family_residual(self):
        fam = FamilySolution(kind=FamilyKind.III, b_I=1.0, sign=Sign.lower)
        assert max(algebra.ode_residual(fam, np.linspace(-2, 2, 101))) < 1e-12

    def test_finite_difference_residual_mode(self):
        fam = FamilySolution(kind=FamilyKind.I, b_R=0.4, b_I=1.1, c=-0.3, gamma=0.25)
        xs = np.arange(-5.0, 5.0, 1e-3)
        assert max(algebra.ode_residual(fam, xs, mode="fd")) < 1e-8


class TestPotentials:
    def test_real_scarf_limit(self):
        fam = FamilySolution(kind=FamilyKind.I, b_R=1.0)
        assert algebra.potential(fam, 2.0, 0.0) == pytest.approx(-2.75)

    def test_exponential_family_at_origin(self):
        b_I = 0.8
        fam = FamilySolution(kind=FamilyKind.III, b_I=b_I)
        assert algebra.potential(fam, 1.0, 0.0) == pytest.approx(-b_I**2 - 2j * b_I)

    def test_family_two_assembled_from_derivatives(self):
        fam = FamilySolution(kind=FamilyKind.II, b_R=0.5, b_I=0.5, gamma=0.3)
        m, xi, b = 1.5, 1 - 0.3j, 0.5 + 0.5j
        cosech, coth = 1 / np.sinh(xi), np.cosh(xi) / np.sinh(xi)
        expected = (0.25 - m * m) * (-cosech**2) + 2 * m * (-b * cosech * coth) + (b * cosech) ** 2
        assert algebra.potential(fam, m, 1.0) == pytest.approx(expected, rel=1e-12)

    def test_cartesian_example(self):
        fam = FamilySolution(kind=FamilyKind.I, b_R=1.0, b_I=0.5, c=0.2, gamma=0.1)
        re, im = algebra.potential_cartesian(fam, 2.0, 0.7)
        direct = algebra.potential(fam, 2.0, 0.7)
        assert re == pytest.approx(direct.real, abs=1e-12)
        assert im == pytest.approx(direct.imag, abs=1e-12)

    def test_cartesian_exponential_example(self):
        fam = FamilySolution(kind=FamilyKind.III, b_R=1.0, b_I=2.0)
        re, im = algebra.potential_cartesian(fam, 1.0, 0.0)
        assert (re, im) == (pytest.approx(-5.0), pytest.approx(0.0))

    @pytest.mark.parametrize("kind", list(FamilyKind))
    def test_cartesian_matches_complex_evaluation(self, rng, kind):
        for _ in range(100):
            fam = random_family(rng, kind)
            m = float(rng.uniform(0.6, 4.0))
            xs = rng.uniform(-4.0, 4.0, 100)
            re, im = algebra.potential_cartesian(fam, m, xs)
            direct = algebra.potential(fam, m, xs)
            scale = np.maximum(1.0, np.abs(direct))
            assert np.all(np.abs(re - direct.real) / scale < 1e-10)
            assert np.all(np.abs(im - direct.imag) / scale < 1e-10)

    @pytest.mark.parametrize("kind", list(FamilyKind))
    def test_real_limit_has_real_potential(self, kind):
        fam = FamilySolution(kind=kind, b_R=0.9, c=0.4)
        xs = np.linspace(1.0, 4.0, 50)
        _, im = algebra.potential_cartesian(fam, 1.3, xs)
        assert np.max(np.abs(im)) == 0.0
        assert np.max(np.abs(algebra.potential(fam, 1.3, xs).imag)) < 1e-12

    def test_family_one_shifted_by_quarter_period_is_family_two(self, rng):
        xs = np.linspace(-3.0, 3.0, 61) + 0.05
        for _ in range(20):
            b_R, b_I = rng.uniform(-2, 2, 2)
            gamma = float(rng.uniform(0.2, 0.7))
            m = float(rng.uniform(0.6, 3.0))
            two = FamilySolution(kind=FamilyKind.II, b_R=b_R, b_I=b_I, c=0.1, gamma=gamma)
            one = FamilySolution(
                kind=FamilyKind.I, b_R=b_I, b_I=-b_R, c=0.1, gamma=gamma + math.pi / 2,
                allow_any_gamma=True,
            )
            np.testing.assert_allclose(
                algebra.potential(one, m, xs), algebra.potential(two, m, xs), rtol=1e-10, atol=1e-10,
            )


class TestPTSymmetry:
    def test_family_one_is_pt_symmetric(self):
        fam = FamilySolution(kind=FamilyKind.I, b_I=-1.3)
        xs = np.linspace(-5.0, 5.0, 201)
        assert algebra.pt_symmetry_check(algebra.potential_fn(fam, 2.0), xs) < 1e-12
        assert algebra.expected_pt_symmetric(fam)

    def test_family_one_with_imaginary_shift_stays_symmetric(self):
        fam = FamilySolution(kind=FamilyKind.I, b_I=-1.3, gamma=0.3)
        xs = np.linspace(-5.0, 5.0, 201)
        assert algebra.pt_symmetry_check(algebra.potential_fn(fam, 2.0), xs) < 1e-12

    @pytest.mark.parametrize("kind", [FamilyKind.II, FamilyKind.III])
    def test_other_families_break_it(self, kind):
        fam = FamilySolution(kind=kind, b_I=-1.3)
        xs = np.linspace(0.05, 5.0, 100)
        assert algebra.pt_symmetry_check(algebra.potential_fn(fam, 2.0), xs) > 1e-3
        assert not algebra.expected_pt_symmetric(fam)


class TestSpectrum:
    @pytest.mark.parametrize("m, n, expected", [(3.0, 0, -6.25), (3.0, 2, -0.25), (1.7, 0, -1.44)])
    def test_energy(self, m, n, expected):
        assert algebra.energy(m, n) == pytest.approx(expected)

    def test_energy_outside_ladder(self):
        with pytest.raises(NotABoundStateError):
            algebra.energy(2.5, 2)

    @pytest.mark.parametrize("m, count", [(3.0, 3), (0.5, 0), (2.5, 2), (0.1, 0), (0.51, 1)])
    def test_bound_state_count(self, m, count):
        assert algebra.bound_state_count(m) == count

    def test_same_energy_across_potentials(self, rng):
        for m in rng.uniform(0.6, 6.0, 20):
            for n in range(algebra.bound_state_count(m)):
                assert algebra.energy(m, n) == pytest.approx(algebra.energy(m + 1, n + 1), abs=1e-12)

    def test_decay_violations_listed(self):
        fam = FamilySolution(kind=FamilyKind.II, b_R=0.2, c=1.0)
        violations = algebra.decay_violations(fam, 2.0, 1)
        assert len(violations) == 1
        assert "vanish at x = c" in violations[0]
        assert len(algebra.decay_violations(fam, 1.0, 3)) == 2

    def test_companion_of_scarf_algebra(self):
        m_other, other = algebra.companion_solution(SCARF_A, 2.5)
        assert m_other == pytest.approx(1.8)
        assert other.b_I == pytest.approx(-2.5)
        xs = np.linspace(-4, 4, 41)
        np.testing.assert_allclose(
            algebra.potential(other, m_other, xs), algebra.potential(SCARF_A, 2.5, xs), atol=1e-12,
        )

    def test_companion_of_family_two(self):
        fam = FamilySolution(kind=FamilyKind.II, b_R=2.0, gamma=0.3)
        m_other, other = algebra.companion_solution(fam, 0.7)
        assert m_other == 2.0 and other.b_R == 0.7
        xs = np.linspace(-4, 4, 41)
        np.testing.assert_allclose(algebra.potential(other, 2.0, xs), algebra.potential(fam, 0.7, xs), atol=1e-10)

    def test_no_companion_for_complex_coupling(self):
        assert algebra.companion_solution(FamilySolution(kind=FamilyKind.I, b_R=0.5, b_I=-1.0), 2.0) is None


class TestStates:
    def test_ground_state_without_coupling_is_sech(self):
        psi = algebra.ground_state(FamilySolution(kind=FamilyKind.I), 1.5, SCARF_GRID)
        assert collinearity_defect(psi.values, 1 / np.cosh(SCARF_GRID)) < 1e-12
        assert trapezoid(np.abs(psi.values) ** 2, dx=psi.dx) == pytest.approx(1.0)

    def test_ground_state_phase_convention(self):
        psi = algebra.ground_state(SCARF_A, 2.5, SCARF_GRID)
        peak = psi.values[np.argmax(np.abs(psi.values))]
        assert peak.imag == pytest.approx(0.0, abs=1e-14)
        assert peak.real > 0

    def test_ground_state_matches_closed_form(self):
        psi = algebra.ground_state(SCARF_A, 2.5, SCARF_GRID)
        expected = np.cosh(SCARF_GRID) ** -2.0 * np.exp(-1.8j * np.arctan(np.sinh(SCARF_GRID)))
        assert collinearity_defect(psi.values, expected) < 1e-12

    def test_exponential_ground_state_solves_annihilation(self):
        fam = FamilySolution(kind=FamilyKind.III, b_R=2.0)
        xs = np.linspace(-2.0, 12.0, 2801)
        psi = algebra.ground_state(fam, 2.0, xs)
        F, G = algebra.eval_FG(fam, xs)
        residual = first_derivative(psi.values, psi.dx) - ((0.5 - 2.0) * F + G) * psi.values
        assert np.max(np.abs(interior(residual))) < 1e-6 * np.max(np.abs(psi.values))

    @pytest.mark.parametrize("fam, k", [
        (FamilySolution(kind=FamilyKind.III, b_R=-1.0), 2.0),
        (FamilySolution(kind=FamilyKind.III, b_R=1.0, sign=Sign.lower), 2.0),
        (FamilySolution(kind=FamilyKind.I, b_R=0.3), 0.4),
    ])
    def test_non_normalizable_ground_state(self, fam, k):
        with pytest.raises(NonNormalizableError):
            algebra.ground_state(fam, k, SCARF_GRID)

    def test_lowering_annihilates_ground_state(self):
        psi = algebra.ground_state(SCARF_A, 2.5, SCARF_GRID)
        lowered = algebra.apply_ladder(SCARF_A, 2.5, "lower", psi)
        assert np.max(np.abs(interior(lowered.values))) < 1e-6 * np.max(np.abs(psi.values))

    def test_raising_reaches_next_potential(self):
        psi = algebra.closed_form_state(SCARF_A, 2.5, 0, SCARF_GRID)
        raised = algebra.apply_ladder(SCARF_A, 2.5, "raise", psi)
        target = algebra.closed_form_state(SCARF_A, 3.5, 1, SCARF_GRID)
        assert collinearity_defect(raised.values, target.values) < 1e-6
        alpha = algebra.ladder_factor(SCARF_A, 2.5, psi, target)
        assert abs(alpha) > 0

    def test_raise_after_lower_gives_casimir_shift(self):
        k, m = 2.5, 3.5
        xs = resolved_grid(SCARF_A)
        psi = algebra.closed_form_state(SCARF_A, m, 1, xs)
        lowered = algebra.apply_ladder(SCARF_A, m, "lower", psi)
        back = algebra.apply_ladder(SCARF_A, m - 1, "raise", lowered)
        factor = m * m - m - k * (k - 1)
        gap = np.max(np.abs(interior(back.values - factor * psi.values, 4)))
        assert gap < 1e-6 * np.max(np.abs(psi.values))

    def test_unknown_direction(self):
        psi = algebra.ground_state(SCARF_A, 2.5, SCARF_GRID)
        with pytest.raises(ValueError):
            algebra.apply_ladder(SCARF_A, 2.5, "sideways", psi)

    def test_short_grid(self):
        psi = GridFunction(x0=0.0, dx=0.1, values=np.ones(5))
        with pytest.raises(GridTooShortError):
            algebra.casimir_apply(SCARF_A, 2.5, psi)

    @pytest.mark.parametrize("fam, m", [(SCARF_A, 2.5), (SCARF_B, 1.8)])
    def test_ladder_chain_equals_closed_form(self, fam, m):
        for n in range(algebra.bound_state_count(m)):
            state = AlgebraState(k=m - n, m=m)
            chain = algebra.ladder_chain(fam, state, SCARF_GRID)
            closed = algebra.closed_form_state(fam, m, n, SCARF_GRID)
            assert collinearity_defect(chain.values, closed.values) < 1e-5

    @pytest.mark.parametrize("fam, m", [
        (SCARF_A, 2.5),
        (SCARF_B, 1.8),
        (FamilySolution(kind=FamilyKind.I, b_R=0.6, b_I=-0.9, c=0.3, gamma=0.2), 3.2),
        (FamilySolution(kind=FamilyKind.II, b_R=0.4, b_I=0.2, gamma=0.5), 2.9),
    ])
    def test_casimir_eigenvalue_on_bound_states(self, fam, m):
        xs = resolved_grid(fam)
        for n in range(algebra.bound_state_count(m)):
            result = algebra.casimir_eigen_check(fam, AlgebraState(k=m - n, m=m), xs)
            assert result.passed, result.detail

    def test_schrodinger_equation_of_exponential_states(self):
        fam = FamilySolution(kind=FamilyKind.III, b_R=2.0, b_I=1.0)
        xs = np.linspace(-3.0, 25.0, 5601)
        m = 3.0
        potential = algebra.potential(fam, m, xs)
        for n in range(algebra.bound_state_count(m)):
            psi = algebra.closed_form_state(fam, m, n, xs)
            d2 = np.gradient(np.gradient(psi.values, psi.dx), psi.dx)
            residual = -d2 + (potential - algebra.energy(m, n)) * psi.values
            assert np.max(np.abs(residual[10:-10])) < 1e-2 * np.max(np.abs(psi.values))

    def test_lower_sign_mirrors_upper(self):
        xs = np.linspace(-8.0, 8.0, 1601)
        upper = algebra.closed_form_state(FamilySolution(kind=FamilyKind.III, b_R=1.5, b_I=0.5), 2.6, 1, xs)
        lower = algebra.closed_form_state(
            FamilySolution(kind=FamilyKind.III, b_R=-1.5, b_I=-0.5, sign=Sign.lower), 2.6, 1, xs,
        )
        assert collinearity_defect(upper.values[::-1], lower.values) < 1e-12

    def test_first_index_past_the_ladder_does_not_decay(self):
        n = algebra.bound_state_count(2.5)
        psi = algebra.closed_form_state(SCARF_A, 2.5, n, SCARF_GRID, check=False)
        assert np.abs(psi.values[0]) > 1e-2 * np.max(np.abs(psi.values))
        with pytest.raises(NonNormalizableError):
            algebra.closed_form_state(SCARF_A, 2.5, n, SCARF_GRID)


class TestOperatorIdentities:
    @pytest.mark.parametrize("fam, m", _families_for_identities())
    def test_commutator_and_casimir_forms(self, rng, fam, m):
        results = algebra.operator_identity_suite(fam, m, rng, count=20)
        assert len(results) == 3
        for result in results:
            assert result.passed, f"{result.name}: {result.detail}"

    def test_half_line_family_two_uses_shifted_grid(self, rng):
        fam = FamilySolution(kind=FamilyKind.II, b_R=2.0, c=0.5)
        results = algebra.operator_identity_suite(fam, 1.2, rng, count=5)
        assert all(r.passed for r in results)



class TestPoleResolution:
    @pytest.mark.parametrize("fam, expected", [
        (FamilySolution(kind=FamilyKind.I, b_I=-1.0), 0.5 * math.pi),
        (FamilySolution(kind=FamilyKind.I, b_I=-1.0, gamma=0.2), 0.5 * math.pi - 0.2),
        (FamilySolution(kind=FamilyKind.II, b_R=0.5, gamma=0.3), 0.3),
        (FamilySolution(kind=FamilyKind.II, b_R=0.5, gamma=-0.3), 0.3),
        (FamilySolution(kind=FamilyKind.II, b_R=0.5), math.inf),
        (FamilySolution(kind=FamilyKind.III, b_R=1.0), math.inf),
    ])
    def test_pole_distance(self, fam, expected):
        assert pole_distance(fam) == pytest.approx(expected)

    def test_spacing_shrinks_near_a_pole(self):
        assert pole_resolved_dx(math.inf, 0.01) == 0.01
        assert pole_resolved_dx(2.0, 0.01) == 0.01
        assert pole_resolved_dx(0.25, 0.01) == pytest.approx(0.01 * 0.125)

    def test_spacing_floor(self, caplog):
        assert pole_resolved_dx(1e-4, 0.01) == pytest.approx(pole_resolved_dx(0.05, 0.01))
        assert "capped" in caplog.text

    def test_identity_grid_resolves_shifted_family_two(self):
        fam = FamilySolution(kind=FamilyKind.II, b_R=0.5, b_I=0.3, gamma=0.3)
        xs = algebra._default_test_grid(fam)
        assert xs[1] - xs[0] <= 0.005 * 0.3**1.5
        assert xs[0] == pytest.approx(-4.0) and xs[-1] == pytest.approx(4.0)


class TestLadderRelation:
    @pytest.mark.parametrize("fam, m", [(SCARF_A, 2.5), (SCARF_B, 1.8)])
    def test_raised_state_is_next_closed_form(self, fam, m):
        xs = resolved_grid(fam)
        for n in range(algebra.bound_state_count(m)):
            alpha, result = algebra.ladder_check(fam, AlgebraState(k=m - n, m=m), xs)
            assert result.passed, result.detail
            assert abs(alpha) > 1e-3

    def test_half_line_partner_must_vanish_at_the_wall(self):
        fam = FamilySolution(kind=FamilyKind.II, b_R=2.0)
        xs = np.linspace(1.0, 25.0, 4801)
        with pytest.raises(NonNormalizableError):
            algebra.ladder_check(fam, AlgebraState(k=1.7, m=1.7), xs)

def test_normalize_fixes_norm_and_phase():
    xs = np.linspace(-5, 5, 1001)
    values = normalize(3j * np.exp(-xs**2), xs[1] - xs[0])
    assert trapezoid(np.abs(values) ** 2, dx=xs[1] - xs[0]) == pytest.approx(1.0)
    assert values[500].imag == pytest.approx(0.0, abs=1e-15)
    assert values[500].real > 0
