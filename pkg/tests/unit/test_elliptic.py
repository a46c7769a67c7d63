import cmath
import math

import pytest

from painleve_atlas import elliptic
from painleve_atlas.errors import AtLatticePoint, QTooSmall, SingularLevel


def _ode_residual(q):
    return abs(elliptic.period_ode_check(q, *elliptic.asymptotic_period_derivatives(q)))


class TestPeriods:

    def test_numeric_periods_match_the_asymptotic_basis(self):
        """
        Scenario: Quadrature periods at |q| = 1e3 and 1e6.
        Expected: close to the order-1 asymptotic basis, and closer at the larger level.
        """
        def deviation(q):
            num = elliptic.period_numeric(q)
            asym = elliptic.period_basis_asymptotic(q, 1)
            return max(abs(num.p1 - asym.p1) / abs(num.p1), abs(num.p2 - asym.p2) / abs(num.p2))

        q = 1e3 * cmath.exp(0.4j)
        assert elliptic.period_numeric(q).labeling == "asymptotic-match"
        assert deviation(q) < 1e-3
        assert deviation(1e3 * q) < deviation(q) / 100

    def test_hexagonal_ratio_at_large_level(self):
        basis = elliptic.period_numeric(1e6j)
        assert abs(basis.p2 / basis.p1 - cmath.exp(1j * math.pi / 3)) < 1e-2

    def test_numeric_periods_solve_the_period_ode(self):
        r1, r2 = elliptic.continued_period_residual(1e3)
        assert max(r1, r2) < 1e-4

    def test_asymptotic_basis_solves_the_period_ode_to_high_order(self):
        slope = math.log10(_ode_residual(1e3) / _ode_residual(1e4))
        assert slope >= 3.4

    def test_small_level_is_ray_tracked(self):
        basis = elliptic.period_numeric(10.0)
        g2, g3 = elliptic.lattice_invariants(basis.p1, basis.p2)

        assert basis.labeling == "ray-tracked"
        assert abs(g2 + 2) < 1e-8
        assert abs(g3 + 10) < 1e-8 * 10

    def test_asymptotic_basis_needs_large_q(self):
        with pytest.raises(QTooSmall):
            elliptic.period_basis_asymptotic(10.0)

    def test_singular_level(self):
        with pytest.raises(SingularLevel):
            elliptic.period_numeric(1j * math.sqrt(8 / 27))


class TestWeierstrass:

    def test_hexagonal_invariants(self):
        basis, params = elliptic.hexagonal_lattice()
        g2, g3 = elliptic.lattice_invariants(basis.p1, basis.p2)
        assert abs(g2) < 1e-10 * abs(g3)
        assert abs(g3 - params.g3) < 1e-10 * abs(params.g3)

    def test_laurent_start(self):
        c = elliptic.laurent_wp_coefficients(-2, 5)
        assert c[2] == -2 / 20
        assert c[3] == 5 / 28

    def test_differential_identity_and_periodicity(self):
        """
        Scenario: wp at level q = 10, inside and outside the Laurent disc.
        Expected: wp'^2 = 4 wp^3 - g2 wp - g3 and invariance under both periods.
        """
        basis = elliptic.period_numeric(10.0)
        for z in (0.05 + 0.02j, 0.3 + 0.2j, 0.4 * basis.p1 + 0.3 * basis.p2):
            wp, _ = elliptic.weierstrass_p(z, basis)
            assert abs(elliptic.weierstrass_residual(z, basis)) < 1e-8 * max(1.0, abs(wp) ** 3)
            for shift in (basis.p1, basis.p2, basis.p1 - 2 * basis.p2):
                assert cmath.isclose(elliptic.weierstrass_p(z + shift, basis)[0], wp, rel_tol=1e-9)

    def test_reduction(self):
        basis, _ = elliptic.hexagonal_lattice()
        z = 0.2 + 0.1j
        assert abs(elliptic.reduce_to_cell(z + 3 * basis.p1 - 2 * basis.p2, basis) - z) < 1e-12

    def test_lattice_point(self):
        basis, _ = elliptic.hexagonal_lattice()
        with pytest.raises(AtLatticePoint):
            elliptic.weierstrass_p(basis.p1 + basis.p2, basis)

    def test_special_points_of_the_hexagonal_lattice(self):
        """
        Scenario: g2 = 0, so wp vanishes at the centroids of the lattice triangles.
        Expected: Newton lands on (p1 + p2)/3 and wp' vanishes at the half periods.
        """
        basis, params = elliptic.hexagonal_lattice()
        points = elliptic.special_points(basis, params)

        assert abs(points["zeros_of_u"][0] - (basis.p1 + basis.p2) / 3) < 1e-9
        for z, half in zip(points["zeros_of_du"], (basis.p1 / 2, basis.p2 / 2, (basis.p1 + basis.p2) / 2)):
            assert abs(z - half) < 1e-9
        print("\n✅ Special points: Verified")

    def test_grid_marks_lattice_points(self):
        basis, params = elliptic.hexagonal_lattice()
        rows = elliptic.weierstrass_grid(basis, params, n=3, lower_left=0j, upper_right=1 + 1j)
        assert len(rows) == 9
        # 0 and p1 = 1 are lattice points
        assert math.isnan(rows[0][2]) and math.isnan(rows[2][2])
        assert all(math.isfinite(r[2]) for i, r in enumerate(rows) if i not in (0, 2))
