"""Chart metrics, curvature, Laplace-Beltrami, Killing checks."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from spherewave import expr as ex
from spherewave import geometry as geo
from spherewave import numerics as nm
from spherewave import parse
from spherewave.expr import ZeroStatus


@pytest.fixture(scope="module")
def s2xr():
    return geo.preset_metric("s2xr")


@pytest.fixture(scope="module")
def s2xr_curv(s2xr):
    return geo.curvature(s2xr)


def _np_gfun(metric):
    raw = metric.evaluator()
    return lambda p: raw(tuple(p))


class TestChartMetric:
    def test_sqrt_det_is_sin_x(self, s2xr):
        assert s2xr.sqrt_det == parse("sin(x)")

    def test_inverse_is_exact(self, s2xr):
        assert s2xr.ginv[2][2] == parse("-1/sin(x)^2")

    def test_symmetry_enforced(self):
        with pytest.raises(geo.MetricError, match="symmetric"):
            geo.ChartMetric(("x", "y"), ((ex.ONE, ex.X), (ex.ZERO, ex.ONE)))

    def test_degenerate_rejected(self):
        with pytest.raises(geo.MetricError):
            geo.ChartMetric(("x", "y"), ((ex.ONE, ex.ONE), (ex.ONE, ex.ONE)))

    def test_metric_file_roundtrip(self, s2xr):
        text = """
        # the product chart
        coords: t x y
        g t t: 1
        g x x: -1
        g y y: -sin(x)^2
        """
        m = geo.parse_metric_file(text, name="file")
        assert m.g == s2xr.g

    def test_metric_file_errors(self):
        with pytest.raises(geo.MetricError, match="coords"):
            geo.parse_metric_file("g x x: 1")
        with pytest.raises(geo.MetricError, match="line 2"):
            geo.parse_metric_file("coords: x y\nbogus line")


class TestChristoffel:
    def test_euclidean_all_zero(self):
        gam = geo.christoffel(geo.preset_metric("euclidean3"))
        assert all(gam[k][i][j].is_zero_expr
                   for k in range(3) for i in range(3) for j in range(3))

    def test_product_chart_hand_values(self, s2xr):
        gam = geo.christoffel(s2xr)
        assert gam[1][2][2] == parse("-sin(x)*cos(x)")
        assert gam[2][1][2] == parse("cos(x)/sin(x)")
        assert all(gam[0][i][j].is_zero_expr for i in range(3) for j in range(3))

    def test_symmetric_lower_indices(self, s2xr):
        gam = geo.christoffel(s2xr)
        for k in range(3):
            for i in range(3):
                for j in range(3):
                    assert gam[k][i][j] == gam[k][j][i]

    def test_fd_oracle(self, s2xr):
        gam = geo.christoffel(s2xr)
        p = (0.2, 1.05, 2.4)
        fd = nm.numeric_christoffel(_np_gfun(s2xr), p)
        for k in range(3):
            for i in range(3):
                for j in range(3):
                    sym = ex.eval_numeric(gam[k][i][j], {"t": p[0], "x": p[1],
                                                         "y": p[2]})
                    assert fd[k, i, j] == pytest.approx(sym, abs=5e-7)

    def test_round_sphere_block_matches_product_chart(self, s2xr):
        # rescaling g by a constant leaves the connection alone, so the
        # sphere block of the product chart equals the round-sphere chart
        gam_pr = geo.christoffel(s2xr)
        gam_sp = geo.christoffel(geo.preset_metric("sphere2"))
        # sphere2 coords (x, y) correspond to product indices (1, 2)
        for k in range(2):
            for i in range(2):
                for j in range(2):
                    assert gam_sp[k][i][j] == gam_pr[k + 1][i + 1][j + 1]

    def test_gamma_invariant_under_constant_rescaling(self, s2xr):
        for c in (Fraction(-1), Fraction(2)):
            scaled = geo.ChartMetric(
                s2xr.coords,
                tuple(tuple(c * gij for gij in row) for row in s2xr.g))
            assert geo.christoffel(scaled) == geo.christoffel(s2xr)


class TestCurvature:
    def test_minkowski_flat(self):
        b = geo.curvature(geo.preset_metric("minkowski3"))
        assert b.scalar.is_zero_expr
        assert all(b.riemann[i][j][k][s].is_zero_expr
                   for i in range(3) for j in range(3)
                   for k in range(3) for s in range(3))

    def test_round_sphere_scalar_plus_two(self):
        assert geo.scalar_curvature(geo.preset_metric("sphere2")).as_fraction() == 2

    def test_product_chart_scalar_constant(self, s2xr_curv):
        scalar = s2xr_curv.scalar
        assert scalar.is_constant
        assert scalar.as_fraction() == -2

    def test_scalar_matches_fd_oracle(self, s2xr):
        r_fd = nm.numeric_scalar_curvature(_np_gfun(s2xr), (0.0, 1.2, 0.7))
        assert abs(r_fd - (-2.0)) < 1e-6

    def test_antisymmetry_last_pair(self, s2xr_curv):
        r = s2xr_curv.riemann
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    for s in range(3):
                        assert (r[i][j][k][s] + r[i][j][s][k]).is_zero_expr

    def test_first_bianchi_product_chart(self, s2xr_curv):
        r = s2xr_curv.riemann
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    for s in range(3):
                        cyc = r[i][j][k][s] + r[i][k][s][j] + r[i][s][j][k]
                        assert cyc.is_zero_expr

    @pytest.mark.parametrize("seed", [11, 12, 13])
    def test_first_bianchi_random_diagonal_metrics(self, seed):
        rng = random.Random(seed)
        pool = [parse("1"), parse("x^2"), parse("sin(x)^2"), parse("4"),
                parse("9*sin(x)^2"), parse("x^4")]
        diag = [rng.choice(pool) for _ in range(3)]
        m = geo.ChartMetric(
            ("t", "x", "y"),
            tuple(tuple(diag[i] if i == j else ex.ZERO for j in range(3))
                  for i in range(3)))
        r = geo.curvature(m).riemann
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    for s in range(3):
                        cyc = r[i][j][k][s] + r[i][k][s][j] + r[i][s][j][k]
                        assert cyc.is_zero_expr

    def test_contracted_consistency(self, s2xr, s2xr_curv):
        total = ex.ZERO
        for i in range(3):
            for j in range(3):
                total = total + s2xr.ginv[i][j] * s2xr_curv.ricci[i][j]
        assert total == s2xr_curv.scalar

    def test_convention_string_attached(self, s2xr_curv):
        assert "R^i_jks" in s2xr_curv.convention


class TestSectional:
    POINT = (0.3, math.pi / 3, 1.0)

    def test_tx_plane_flat(self, s2xr, s2xr_curv):
        k = geo.sectional_curvature(s2xr, self.POINT, (1, 0, 0), (0, 1, 0),
                                    s2xr_curv)
        assert abs(k) < 1e-12

    def test_xy_plane_minus_one(self, s2xr, s2xr_curv):
        k = geo.sectional_curvature(s2xr, self.POINT, (0, 1, 0), (0, 0, 1),
                                    s2xr_curv)
        assert k == pytest.approx(-1.0, abs=1e-12)

    def test_brute_force_contraction_oracle(self, s2xr, s2xr_curv):
        # independent: numeric Riemann from finite differences of g alone
        rng = random.Random(4)
        p = np.array(self.POINT)
        gfun = _np_gfun(s2xr)
        gamma = nm.numeric_christoffel(gfun, p)
        h = 1e-3
        n = 3
        dgamma = np.empty((n, n, n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            dgamma[k] = (nm.numeric_christoffel(gfun, p + e)
                         - nm.numeric_christoffel(gfun, p - e)) / (2 * h)
        riem = np.empty((n, n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for s in range(n):
                        val = dgamma[k][i, s, j] - dgamma[s][i, k, j]
                        for l in range(n):
                            val += gamma[i, k, l] * gamma[l, s, j] \
                                 - gamma[i, s, l] * gamma[l, k, j]
                        riem[i, j, k, s] = val
        g = np.array(gfun(p))
        rlow = np.einsum("im,mjks->ijks", g, riem)
        for _ in range(4):
            X = np.array([rng.uniform(-1, 1) for _ in range(3)])
            Y = np.array([rng.uniform(-1, 1) for _ in range(3)])
            num = np.einsum("ijks,i,j,k,s->", rlow, X, Y, X, Y)
            gXX = X @ g @ X
            gYY = Y @ g @ Y
            gXY = X @ g @ Y
            den = gXX * gYY - gXY ** 2
            if abs(den) < 1e-6:
                continue
            got = geo.sectional_curvature(s2xr, self.POINT, X, Y, s2xr_curv)
            assert got == pytest.approx(num / den, rel=1e-4, abs=1e-6)

    def test_degenerate_plane_raises(self, s2xr, s2xr_curv):
        with pytest.raises(geo.DegeneratePlaneError):
            geo.sectional_curvature(s2xr, self.POINT, (1, 0, 0), (2, 0, 0),
                                    s2xr_curv)

    def test_non_constancy_witness(self, s2xr, s2xr_curv):
        k1 = geo.sectional_curvature(s2xr, self.POINT, (1, 0, 0), (0, 1, 0),
                                     s2xr_curv)
        k2 = geo.sectional_curvature(s2xr, self.POINT, (0, 1, 0), (0, 0, 1),
                                     s2xr_curv)
        assert abs(k1 - k2) > 0.5


class TestLaplaceBeltrami:
    def test_euclidean(self):
        assert geo.laplace_beltrami(geo.preset_metric("euclidean2")) == \
            parse("u_xx + u_yy")

    def test_product_chart_gives_wave_operator(self, s2xr):
        assert geo.laplace_beltrami(s2xr) == \
            parse("u_tt - u_xx - cot(x)*u_x - u_yy/sin(x)^2")

    def test_round_sphere_block(self):
        assert geo.laplace_beltrami(geo.preset_metric("sphere2")) == \
            parse("u_xx + cot(x)*u_x + u_yy/sin(x)^2")


class TestKilling:
    def test_rotation_field_killing(self, s2xr):
        xi = (ex.ZERO, parse("sin(y)"), parse("cot(x)*cos(y)"))
        rep = geo.killing_check(s2xr, xi, name="S2")
        assert rep.is_killing and not rep.undecided

    def test_time_translation_killing(self, s2xr):
        rep = geo.killing_check(s2xr, (ex.ONE, ex.ZERO, ex.ZERO))
        assert rep.is_killing

    def test_time_scaling_not_killing(self, s2xr):
        lie = geo.lie_derivative_metric(s2xr, (ex.T, ex.ZERO, ex.ZERO))
        assert lie[0][0].as_fraction() == 2
        rep = geo.killing_check(s2xr, (ex.T, ex.ZERO, ex.ZERO))
        assert not rep.is_killing
        assert any(v.status is ZeroStatus.LIKELY_NONZERO for v in rep.verdicts)

    def test_x_scaling_not_killing(self, s2xr):
        rep = geo.killing_check(s2xr, (ex.ZERO, ex.X, ex.ZERO))
        assert not rep.is_killing

    def test_linearity_random_combination(self, s2xr):
        rng = random.Random(17)
        a = ex.rational(rng.randint(-9, 9), rng.randint(1, 5))
        b = ex.rational(rng.randint(-9, 9), rng.randint(1, 5))
        s2 = (ex.ZERO, parse("sin(y)"), parse("cot(x)*cos(y)"))
        s3 = (ex.ZERO, parse("cos(y)"), parse("-cot(x)*sin(y)"))
        comb = tuple(a * p + b * q for p, q in zip(s2, s3))
        assert geo.killing_check(s2xr, comb).is_killing

    def test_killing_fields_close_under_bracket(self, s2xr):
        # the bracket of any two isometry generators is again Killing
        from spherewave import liealg as la
        gens = [la.preset_generator(n) for n in ("S0", "S1", "S2", "S3")]
        for i in range(4):
            for j in range(i + 1, 4):
                z = la.lie_bracket(gens[i], gens[j])
                if z.is_zero():
                    continue
                assert geo.killing_check(s2xr, z.xi).is_killing, (i, j)
