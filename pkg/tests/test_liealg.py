"""Prolongation, symmetry verification, brackets, tables, subalgebras."""

import math
import random
from fractions import Fraction

import pytest

from spherewave import expr as ex
from spherewave import liealg as la
from spherewave import parse
from spherewave.expr import ZeroStatus


S = {n: la.preset_generator(n) for n in ("S0", "S1", "S2", "S3", "S4", "Sinf")}


def _vf_equal(a: la.VectorField, b: la.VectorField) -> bool:
    return all((p - q).is_zero_expr for p, q in zip(a.components(), b.components()))


class TestVectorField:
    def test_presets_parse(self):
        assert str(S["S2"].xi[1]) == "sin(y)"
        assert S["S0"].xi[0] == ex.ONE
        assert S["S4"].eta == ex.U

    def test_generator_file(self):
        vf = la.parse_generator_file("""
        name: S2
        xi_x: sin(y)
        xi_y: cot(x)*cos(y)
        """)
        assert _vf_equal(vf, S["S2"]) and vf.name == "S2"

    def test_generator_file_rejects_unknown_key(self):
        with pytest.raises(ex.ExprError, match="unknown generator field"):
            la.parse_generator_file("zeta_t: 1")


class TestBrackets:
    def test_so3_relations(self):
        assert _vf_equal(la.lie_bracket(S["S1"], S["S2"]), S["S3"])
        assert _vf_equal(la.lie_bracket(S["S1"], S["S3"]),
                         Fraction(-1) * S["S2"])
        assert _vf_equal(la.lie_bracket(S["S2"], S["S3"]), S["S1"])

    def test_time_translation_central(self):
        for n in ("S1", "S2", "S3", "S4"):
            assert la.lie_bracket(S["S0"], S[n]).is_zero()

    def test_antisymmetry_random_pairs(self):
        rng = random.Random(23)
        names = ["S0", "S1", "S2", "S3", "S4"]
        for _ in range(6):
            a, b = rng.sample(names, 2)
            xy = la.lie_bracket(S[a], S[b])
            yx = la.lie_bracket(S[b], S[a])
            assert _vf_equal(xy, Fraction(-1) * yx)


class TestProlongation:
    def test_translation_prolongs_trivially(self):
        p = la.prolong(S["S0"], 2)
        assert all(v.is_zero_expr for v in p.eta1.values())
        assert all(v.is_zero_expr for v in p.eta2.values())

    def test_scaling_prolongs_identically(self):
        p = la.prolong(S["S4"], 2)
        for c in la.POINT_COORDS:
            assert p.eta1[c] == ex.jet("u", c)
        for (ci, cj), v in p.eta2.items():
            assert v == ex.jet("u", (ci, cj))

    def test_second_order_coefficients_symmetric(self):
        # eta^{ij} = eta^{ji} holds structurally: computing D_j eta^i and
        # D_i eta^j must agree after canonicalisation
        for name in ("S2", "S3"):
            X = S[name]
            p = la.prolong(X, 2)
            for (ci, cj), v in p.eta2.items():
                if ci == cj:
                    continue
                swapped = ex.diff(p.eta1[cj], ci)
                for ck, xik in zip(la.POINT_COORDS, X.xi):
                    swapped = swapped - ex.diff(xik, ci) * ex.jet("u", (cj, ck))
                assert v == swapped

    def test_rotation_flow_oracle(self):
        """Finite differences of an actually-transformed solution graph.

        The generator's flow is integrated with RK4; a sample function theta
        is pushed forward, and d/d eps of its x-derivative at the moved point
        is compared against the symbolic first-prolongation coefficient.
        """
        X = S["S2"]
        p1 = la.prolong(X, 1)

        def flow(pt, eps, steps=64):
            x, y = pt
            h = eps / steps
            for _ in range(steps):
                def vel(q):
                    qx, qy = q
                    return (math.sin(qy),
                            math.cos(qx) / math.sin(qx) * math.cos(qy))
                k1 = vel((x, y))
                k2 = vel((x + h / 2 * k1[0], y + h / 2 * k1[1]))
                k3 = vel((x + h / 2 * k2[0], y + h / 2 * k2[1]))
                k4 = vel((x + h * k3[0], y + h * k3[1]))
                x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
                y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            return x, y

        def theta(x, y):
            return math.sin(x) ** 2 * math.cos(y) + 0.3 * math.cos(x)

        def transformed_dx(eps, pt, h=1e-4):
            # theta_eps = theta o flow_{-eps}; evaluate d/dx at flow_eps(pt)
            q = flow(pt, eps)
            lo = flow((q[0] - h, q[1]), -eps)
            hi = flow((q[0] + h, q[1]), -eps)
            return (theta(*hi) - theta(*lo)) / (2 * h)

        rng = random.Random(9)
        for _ in range(3):
            pt = (rng.uniform(0.7, math.pi - 0.7), rng.uniform(0.5, 5.5))
            eps = 1e-3
            num = (transformed_dx(eps, pt) - transformed_dx(-eps, pt)) / (2 * eps)
            h = 1e-4
            jets = {
                "x": pt[0], "y": pt[1], "t": 0.0,
                "u_x": (theta(pt[0] + h, pt[1]) - theta(pt[0] - h, pt[1])) / (2 * h),
                "u_y": (theta(pt[0], pt[1] + h) - theta(pt[0], pt[1] - h)) / (2 * h),
                "u_t": 0.0,
            }
            sym = ex.eval_numeric(p1.eta1["x"], jets)
            assert num == pytest.approx(sym, rel=2e-3, abs=2e-4)


class TestSymmetryCheck:
    def test_isometries_arbitrary_f(self):
        for n in ("S0", "S1", "S2", "S3"):
            rep = la.symmetry_check(S[n], "arbitrary")
            assert rep.is_symmetry, f"{n}: {rep.residual}"

    def test_random_span_combination_arbitrary_f(self):
        rng = random.Random(31)
        for _ in range(3):
            comb = None
            for n in ("S0", "S1", "S2", "S3"):
                c = ex.rational(rng.randint(-6, 6), rng.randint(1, 4))
                term = c * S[n]
                comb = term if comb is None else comb + term
            comb = la.VectorField(comb.xi, comb.eta, "span")
            assert la.symmetry_check(comb, "arbitrary").is_symmetry

    def test_scaling_linear_only(self):
        assert la.symmetry_check(S["S4"], "linear").is_symmetry
        rep = la.symmetry_check(S["S4"], "u^2")
        assert not rep.is_symmetry
        assert rep.residual == parse("-u^2")

    def test_gauge_residual_is_the_constraint(self):
        rep = la.symmetry_check(S["Sinf"], "linear")
        want = parse("b_tt - b_xx - cot(x)*b_x - b_yy/sin(x)^2 - c*b")
        assert rep.residual == want
        reduced = ex.substitute(rep.residual,
                                la.gauge_constraint_bindings("linear"))
        assert reduced.is_zero_expr

    def test_gauge_fails_for_arbitrary_f(self):
        rep = la.symmetry_check(S["Sinf"], "arbitrary")
        assert rep.verdict.status is ZeroStatus.LIKELY_NONZERO

    def test_non_symmetry_witness(self):
        rep = la.symmetry_check(la.VectorField.make(xi_x="x"), "arbitrary")
        assert rep.verdict.status is ZeroStatus.LIKELY_NONZERO
        assert rep.verdict.witness is not None


class TestShiftReduction:
    def test_symbolic_k(self):
        rep = la.shift_reduction_check()
        assert rep.verdict.status is ZeroStatus.PROVEN_ZERO

    def test_rational_values(self):
        for k in (Fraction(1), Fraction(0), Fraction(-3, 2)):
            rep = la.shift_reduction_check(k)
            assert rep.verdict.status is ZeroStatus.PROVEN_ZERO


@pytest.fixture(scope="module")
def det_system():
    return la.determining_system("arbitrary")


class TestDeterminingSystem:
    @pytest.fixture
    def system(self, det_system):
        return det_system

    def test_nontrivial_system(self, system):
        assert len(system.equations) > 10
        assert "1" in system.monomials  # the jet-free coefficient equation

    def test_isometries_annihilate(self, system):
        for n in ("S0", "S1", "S2", "S3"):
            vals = system.substitute_generator(S[n])
            assert all(v.is_zero_expr for v in vals), n

    def test_non_symmetry_leaves_witness(self, system):
        vals = system.substitute_generator(la.VectorField.make(xi_x="x"))
        nonzero = [v for v in vals if not v.is_zero_expr]
        assert nonzero
        assert any(ex.is_zero(v).status is ZeroStatus.LIKELY_NONZERO
                   for v in nonzero)


@pytest.fixture(scope="module")
def iso_table_mod():
    return la.commutator_table([S[n] for n in ("S0", "S1", "S2", "S3")])


class TestAlgebraTable:
    @pytest.fixture
    def iso_table(self, iso_table_mod):
        return iso_table_mod

    def test_structure_constants_exact(self, iso_table):
        z = (Fraction(0),) * 4
        assert iso_table.structure[(1, 2)] == (0, 0, 0, 1)
        assert iso_table.structure[(1, 3)] == (0, 0, -1, 0)
        assert iso_table.structure[(2, 3)] == (0, 1, 0, 0)
        for j in (1, 2, 3):
            assert iso_table.structure[(0, j)] == z

    def test_closed_and_jacobi(self, iso_table):
        assert iso_table.closed
        assert iso_table.jacobi_ok()

    def test_killing_form_negative_definite(self, iso_table):
        K = iso_table.killing_form([1, 2, 3])
        assert K == [[-2, 0, 0], [0, -2, 0], [0, 0, -2]]
        assert la._negative_definite(K)

    def test_classification_tags(self, iso_table):
        assert la.classify_table(iso_table) == "A3,9+A1"
        full = la.commutator_table([S[n] for n in ("S0", "S1", "S2", "S3", "S4")])
        assert la.classify_table(full) == "A3,9+2A1"
        assert 4 in full.central_indices()

    def test_open_span_reported(self):
        t = la.commutator_table([S["S1"], S["S2"]])
        assert not t.closed
        assert (0, 1) in t.unresolved

    def test_single_field_closed(self):
        rep = la.subalgebra_check([S["S2"]], "span{S2}")
        assert rep.closed and rep.tag == "A1"


class TestSubalgebras:
    def test_parameterised_family_closure(self):
        a, c = ex.param_const("a"), ex.param_const("c")
        combos = {
            "L1": [a * S["S0"] + 1 * S["S1"] + c * S["S4"]],
            "L3": [a * S["S0"] + c * S["S4"], S["S1"]],
            "L7": [a * S["S0"] + c * S["S4"], S["S1"], S["S2"], S["S3"]],
        }
        tags = {"L1": "A1", "L3": "2A1", "L7": "A3,9+A1"}
        for name, fields in combos.items():
            rep = la.subalgebra_check(list(fields), name)
            assert rep.closed and rep.tag == tags[name], name

    def test_level_sets(self):
        assert la.subalgebra_check([S["S1"], S["S2"], S["S3"]]).tag == "A3,9"
        assert la.subalgebra_check([S["S0"], S["S4"]]).tag == "2A1"
        assert la.subalgebra_check([S["S0"], S["S1"], S["S4"]]).tag == "3A1"


class TestSharedProlongationPath:
    def test_variational_layer_uses_same_prolongation(self):
        # the first-order coefficients feeding the variational check are the
        # same objects this module produces
        from spherewave import noether as no
        X = S["S2"]
        p = la.prolong(X, 1)
        L = no.lagrangian("arbitrary")
        action = no._first_prolongation_action(X, L)
        rebuilt = ex.ZERO
        for c, xic in zip(la.POINT_COORDS, X.xi):
            rebuilt = rebuilt + xic * ex.partial_diff(L.density, c)
        rebuilt = rebuilt + X.eta * ex.partial_diff(L.density, "u")
        for c in la.POINT_COORDS:
            rebuilt = rebuilt + p.eta1[c] * ex.partial_diff(
                L.density, ex.Jet("u", (c,)))
        assert action == rebuilt
