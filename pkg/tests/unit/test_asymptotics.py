import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from painleve_atlas import asymptotics as asy
from painleve_atlas.errors import BranchCut, CZero, OrderUnavailable, SeedInvalid
from painleve_atlas.models import PoleSequenceParams


class TestFormalSeries:

    def test_recursion_regenerates_the_table(self):
        a, b = asy.series_coefficients(asy.MAX_SERIES_ORDER)
        assert a == asy.SERIES_A
        assert b == asy.SERIES_B

    def test_series_nearly_solves_the_scaled_system(self):
        """
        Scenario: Differentiate the truncated series term by term at t = 20.
        Expected: it matches the scaled field up to the first dropped order.
        """
        t = 20.0 + 5j
        pi1, pi2 = asy.truncated_series(t)
        d1 = sum(-k * float(asy.SERIES_A[k]) * t ** (-k - 1) for k in range(1, 9))
        d2 = sum(-k * float(asy.SERIES_B[k]) * t ** (-k - 1) for k in range(1, 9))
        f = asy.scaled_field(t, np.array([pi1, pi2]))

        assert abs(d1 - f[0]) < 1e-8
        assert abs(d2 - f[1]) < 1e-8

    def test_order_beyond_table(self):
        with pytest.raises(OrderUnavailable):
            asy.truncated_series(20.0, order=asy.MAX_SERIES_ORDER + 1)


class TestCoordinateMaps:

    def test_scaled_round_trip(self):
        x, y, yp = 3 - 2j, 0.4 + 0.1j, -1.2j
        back = asy.scaled_to_x(asy.scaled_from_x(x, y, yp))
        assert all(abs(u - v) < 1e-12 for u, v in zip(back, (x, y, yp)))

    def test_boutroux_and_scaled_forms_agree(self):
        s = asy.boutroux_to_scaled(7 + 1j, 0.3 - 0.2j, 0.5j)
        z, u1, u2 = asy.scaled_to_boutroux(s)
        assert abs(z - (7 + 1j)) < 1e-13
        assert abs(u1 - (0.3 - 0.2j)) < 1e-13
        assert abs(u2 - 0.5j) < 1e-13

    def test_cut_is_rejected(self):
        # xi = -1 sits on arg(xi) = -pi
        with pytest.raises(BranchCut):
            asy.scaled_from_x(-asy.X_SCALE, 1.0, 1.0)
        with pytest.raises(BranchCut):
            asy.boutroux_from_x(0, 1.0, 1.0)


class TestEquilibria:

    @pytest.mark.parametrize("eq", asy.equilibria())
    def test_eigenvalues_square_to_twelve_u1(self, eq):
        lam = eq.eigenvalues[0]
        assert abs(lam ** 2 - 12 * eq.u1) < 1e-12
        assert eq.eigenvalues[1] == -lam

    def test_bad_sign(self):
        with pytest.raises(ValueError):
            asy.equilibrium(0)


class TestTransitional:

    def test_derivative_at_the_pole_is_exact(self):
        slope, _ = asy.transitional_derivative_at_pole()
        assert slope == Fraction(1, 24)

    def test_ratio_identities_on_random_xi(self):
        """
        Scenario: 100 random xi away from 12, 0 and -12.
        Expected: pi912 levels equal the quotient expansion of the pi levels.
        """
        rng = np.random.default_rng(3)
        for _ in range(100):
            xi = complex(*rng.uniform(-30, 30, 2))
            if min(abs(xi - 12), abs(xi), abs(xi + 12)) < 0.5:
                continue
            p10, p20 = asy.pi_level(xi, 0)
            dp10, _ = asy.pi_level_derivative(xi, 0)
            p11, p21 = asy.pi_level(xi, 1)
            assert cmath.isclose(-xi * dp10, p20, rel_tol=1e-10)
            assert cmath.isclose(asy.pi912_level(xi, 0), p10 / p20, rel_tol=1e-10)
            assert cmath.isclose(asy.pi912_level(xi, 1), (p11 * p20 - p10 * p21) / p20 ** 2,
                                 rel_tol=1e-9, abs_tol=1e-12)

    def test_derivatives_match_finite_differences(self):
        xi, h = 5 + 3j, 1e-5
        for level in (0, 1):
            fd = (asy.pi912_level(xi + h, level) - asy.pi912_level(xi - h, level)) / (2 * h)
            assert cmath.isclose(asy.pi912_level_derivative(xi, level), fd, rel_tol=1e-7)

    def test_exact_level_zero_matches_float(self):
        xi = Fraction(7, 3)
        assert float(asy.pi912_level0_exact(xi)) == pytest.approx(asy.pi912_level(7 / 3, 0).real)

    def test_order_range(self):
        with pytest.raises(OrderUnavailable):
            asy.transitional_eval(10j, 1.0, order=3)


class TestTauEquation:

    def test_root_solves_the_equation(self):
        tau = 0.5 + 0.2j
        t = asy.solve_tau_equation(tau, None, 7)
        assert abs(cmath.exp(-t) * t ** -0.5 - tau) < 1e-12
        assert abs(asy.tau_of(t) - tau) < 1e-12

    def test_expansion_orders_converge(self):
        """
        Scenario: Compare the explicit expansion against the Newton root at n = 50.
        Expected: each order tightens the error; order 3 is below 1e-6.
        """
        log_tau = cmath.log(0.5)
        t = asy.solve_tau_equation(0.5, log_tau, 50)
        errors = [abs(asy.tn_expansion(50, log_tau, order=k) - t) for k in range(4)]

        assert errors[3] < errors[1] < errors[0]
        assert errors[3] < 1e-6

    def test_small_n_is_refused(self):
        with pytest.raises(SeedInvalid):
            asy.solve_tau_equation(0.5, None, 0)


class TestPoleSequence:

    def test_newton_mode_solves_its_condition(self):
        rows = asy.pole_sequence(PoleSequenceParams(C=asy.stokes_constant(), n_min=1, n_max=10))
        assert [r.n for r in rows] == list(range(1, 11))
        assert all(r.residual < 1e-9 for r in rows)

    def test_pole_condition_follows_c_series(self):
        """
        Scenario: The pole condition becomes xi = 24 + 5/T instead of 12 + 10.9/T.
        Expected: every mode uses the new constants; the roots move by about log 2.
        """
        params = PoleSequenceParams(C=asy.stokes_constant(), n_min=10, n_max=13, c_series=(24.0, 5.0))
        rows = asy.pole_sequence(params)
        default = asy.pole_sequence(PoleSequenceParams(C=asy.stokes_constant(), n_min=10, n_max=13))

        assert all(r.residual < 1e-9 for r in rows)
        assert all(abs(r.T_fast - r.T_newton) < 5e-2 for r in rows)
        assert all(abs(r.T_newton - d.T_newton) > 0.5 for r, d in zip(rows, default))

    def test_fast_approaches_newton(self):
        log_c = cmath.log(asy.stokes_constant())
        gap = [abs(asy.fast_pole(n, log_c) - asy.newton_pole(n, log_c, asy.fast_pole(n, log_c)))
               for n in (5, 20)]
        assert gap[1] < gap[0]

    def test_monodromy_in_c_shifts_the_index(self):
        """
        Scenario: arg C increases by 2 pi while T_5 is continued.
        Expected: the continued root is T_6.
        """
        params = PoleSequenceParams(C=asy.stokes_constant(), n_min=1, n_max=10)
        log_c = cmath.log(params.C)
        T6 = asy.newton_pole(6, log_c, asy.fast_pole(6, log_c))
        assert abs(asy.continue_pole_in_c(params, 5) - T6) < 1e-9
        print("\n✅ Monodromy in C: Verified")

    def test_zero_c(self):
        with pytest.raises(CZero):
            asy.pole_sequence(PoleSequenceParams(C=0))

    def test_stokes_constant_closed_form(self):
        S = asy.stokes_constant()
        assert S.real == 0
        assert S.imag == pytest.approx(math.sqrt(6 / (5 * math.pi)))
