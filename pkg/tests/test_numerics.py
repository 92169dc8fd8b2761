"""Leapfrog solver, conservation monitors, flux budgets, FD oracles."""

import math
import random

import numpy as np
import pytest

from spherewave import expr as ex
from spherewave import liealg as la
from spherewave import noether as no
from spherewave import numerics as nm
from spherewave import parse

SQRT2 = math.sqrt(2.0)


class TestCompile:
    def test_compile_matches_eval_numeric(self):
        rng = random.Random(6)
        e = parse("sin(x)^2*u_t - cot(x)*u_x + 3/4*u*cos(y)")
        fn = nm.compile_expr(e)
        for _ in range(5):
            env = {"x": rng.uniform(0.3, 2.8), "y": rng.uniform(0, 6.2),
                   "u": rng.uniform(-2, 2), "u_t": rng.uniform(-2, 2),
                   "u_x": rng.uniform(-2, 2)}
            assert fn(env) == pytest.approx(ex.eval_numeric(e, env), rel=1e-12)

    def test_vectorised(self):
        fn = nm.compile_expr(parse("sin(x)*u"))
        x = np.linspace(0.3, 2.0, 7)
        u = np.ones(7) * 2.0
        np.testing.assert_allclose(fn({"x": x, "u": u}), 2 * np.sin(x))

    def test_manufactured_source_is_zero_for_eigenfunction(self):
        u_star = parse("cos(c*t)*cos(x)")
        sigma = nm.manufactured_source(u_star, "0")
        fn = nm.compile_field(sigma, {"c": SQRT2})
        # c^2 = 2 makes the source vanish identically
        for t, x, y in [(0.1, 1.0, 2.0), (0.7, 2.0, 0.3)]:
            assert fn(t, x, y) == pytest.approx(0.0, abs=1e-12)


class TestGrid:
    def test_validation(self):
        with pytest.raises(nm.NumericsError, match="x range"):
            nm.Grid(8, 8, x_min=0.0)
        with pytest.raises(nm.NumericsError, match="even"):
            nm.Grid(8, 9)
        with pytest.raises(nm.NumericsError, match="cfl"):
            nm.Grid(8, 8, cfl=1.5)
        with pytest.raises(nm.NumericsError, match="boundary"):
            nm.Grid(8, 8, boundary="absorbing")

    def test_cfl_respects_pole_proximity(self):
        g = nm.Grid(64, 64)
        assert g.dt <= 0.5 * math.sin(g.x_min) * g.dy


class TestStep:
    def test_constant_state_unchanged(self):
        grid = nm.Grid(16, 16)
        u = np.full((16, 16), 3.7)
        s = nm.GridField(u.copy(), u.copy(), grid.dt, 1)
        for _ in range(10):
            s = nm.step(s, grid)
        np.testing.assert_allclose(s.u_curr, 3.7, atol=1e-13)

    def test_nan_detection(self):
        grid = nm.Grid(16, 16)
        u = np.full((16, 16), 1.0)
        u[3, 3] = np.inf
        s = nm.GridField(u, u.copy(), grid.dt, 1)
        with pytest.raises(nm.NumericsError, match="NaN"):
            nm.step(s, grid)

    def test_discrete_rhs_consistency_with_symbolic_operator(self):
        # the discrete spatial operator applied to a sampled smooth field
        # must converge (order 2) to the symbolic expression's values
        spatial = parse("u_xx + cot(x)*u_x + u_yy/sin(x)^2")
        u_expr = parse("sin(x)^2*cos(y)")
        composed = nm.compose_on_field(spatial, u_expr)
        exact_fn = nm.compile_field(composed, {})
        errs = []
        for n in (24, 48, 96):
            grid = nm.Grid(n, n, boundary="neumann")
            xg, yg = grid.x[:, None], grid.y[None, :]
            u = np.sin(xg) ** 2 * np.cos(yg) + 0.0 * yg
            got = nm.spatial_operator(u, grid, 0.0)
            want = exact_fn(0.0, xg, yg)
            errs.append(float(np.max(np.abs(got - want)[2:-2, :])))
        order = math.log(errs[0] / errs[2]) / math.log(4.0)
        assert 1.7 < order < 2.3

    def test_eigenfunction_tracks_analytic_solution(self):
        # u = cos(sqrt(2) t) cos(x): the first axisymmetric eigenfunction
        errors = []
        for n in (32, 64):
            cfg = nm.preset_run_config("eigenfunction", nx=n, ny=n)
            cfg = nm.replace(cfg, t_end=1.0, monitors=())
            res = nm.run(cfg)
            errors.append(res.summary["error_final_max"])
        assert errors[1] < errors[0] / 2.5  # at least ~order 1.3 observed
        assert errors[1] < 2e-3

    def test_time_reversibility(self):
        grid = nm.Grid(32, 32)
        rng = np.random.default_rng(12)
        u0 = np.sin(2 * grid.x[:, None]) * np.cos(3 * grid.y[None, :])
        u1 = u0 + grid.dt * 0.1 * np.cos(grid.x[:, None]) * np.ones(32)[None, :]
        start = nm.GridField(u0.copy(), u1.copy(), grid.dt, 1)
        s = start
        for _ in range(40):
            s = nm.step(s, grid)
        back = nm.GridField(s.u_curr.copy(), s.u_prev.copy(), 0.0, 1)
        for _ in range(40):
            back = nm.step(back, grid)
        scale = np.max(np.abs(u0))
        assert np.max(np.abs(back.u_curr - u0)) / scale < 1e-10
        assert np.max(np.abs(back.u_prev - u1)) / scale < 1e-10


class TestConvergence:
    def test_manufactured_solution_second_order(self):
        study = nm.convergence_study("manufactured", [24, 48, 96])
        assert 1.8 <= study["order_mean"] <= 2.2


class TestMonitors:
    def test_energy_budget_small_grid(self):
        cfg = nm.preset_run_config("eigenfunction", nx=48, ny=48)
        res = nm.run(cfg)
        stats = res.summary["monitors"]["energy"]
        # raw drift is dominated by real boundary flux; the corrected
        # budget must be discretisation-small
        assert stats["max_budget_rel"] < 5e-3
        assert stats["max_budget_rel"] < stats["max_drift_rel"] / 10

    def test_budget_refines_at_second_order(self):
        budgets = []
        for n in (32, 64):
            cfg = nm.preset_run_config("eigenfunction", nx=n, ny=n)
            cfg = nm.replace(cfg, t_end=1.2)
            res = nm.run(cfg)
            budgets.append(res.summary["monitors"]["energy"]["max_budget_rel"])
        assert budgets[1] < budgets[0] / 2.5

    def test_budget_ladder_all_isometry_currents(self):
        # |drift + flux| must fall like dx^2 + dt^2 for each current; the
        # data mixes y-harmonics so no integral vanishes by parity
        results = {}
        for n in (32, 64):
            cfg = nm.RunConfig(
                nx=n, ny=n, boundary="neumann", f="0",
                u0="sin(x)^2*(sin(y) + cos(y)/2) + sin(x)^3/3",
                ut0="sin(x)*(cos(y) - sin(2*y)/3) + sin(2*x)/4",
                t_end=1.2, monitors=("energy", "j1", "j2", "j3"),
                label="ladder")
            res = nm.run(cfg)
            scale = abs(res.rows[0]["energy"])
            results[n] = {m: max(abs(r[m + "_budget"]) for r in res.rows) / scale
                          for m in cfg.monitors}
        for m in ("energy", "j1", "j2", "j3"):
            assert results[64][m] < results[32][m] / 2.5, m

    def test_axisymmetric_y_momentum_vanishes(self):
        cfg = nm.preset_run_config("eigenfunction", nx=32, ny=32)
        cfg = nm.replace(cfg, t_end=1.0, monitors=("j1",))
        res = nm.run(cfg)
        for row in res.rows:
            assert abs(row["j1"]) < 1e-14

    def test_all_isometry_monitors_budget(self):
        # generic data with nonzero velocity so no integral is killed by
        # parity; budgets are normalised by the energy scale
        cfg = nm.RunConfig(
            nx=48, ny=48, boundary="neumann", f="0",
            u0="sin(x)^2*sin(y)", ut0="sin(x)*cos(y)", t_end=1.5,
            monitors=("energy", "j1", "j2", "j3"), label="generic")
        res = nm.run(cfg)
        scale = abs(res.rows[0]["energy"])
        assert scale > 0.1
        for name in ("energy", "j1", "j2", "j3"):
            worst = max(abs(r[name + "_budget"]) for r in res.rows)
            assert worst / scale < 2e-2, name

    def test_gauge_monitor_bilinear_conservation(self):
        # b is a second discrete solution (quarter-period phase shift)
        cfg = nm.RunConfig(
            nx=48, ny=48, boundary="neumann", f="0",
            u0="cos(x)", ut0="0",
            gauge_b0="0", gauge_bt0="w*cos(x)",
            params={"w": SQRT2},
            t_end=2.0, monitors=("gauge",), label="gauge")
        res = nm.run(cfg)
        series = [row["gauge"] for row in res.rows]
        spread = max(series) - min(series)
        scale = max(abs(v) for v in series)
        assert scale > 1e-3          # the integral is not trivially zero
        assert spread / scale < 2e-2

    def test_compact_support_early_time_flux_free(self):
        # finite propagation speed: smooth data that is ~zero near the walls
        # produces no boundary flux in a short run, and the drift stays at
        # the (second-order) interior discretisation level
        cfg = nm.RunConfig(
            nx=64, ny=64, boundary="neumann", f="0",
            u0="sin(x)^6*cos(y)", ut0="0",
            t_end=0.25, monitors=("energy",), label="compact")
        res = nm.run(cfg)
        rep = nm.flux_report(res)["energy"]
        assert abs(rep["accumulated_flux"]) < 1e-10
        assert abs(rep["drift"]) / abs(res.rows[0]["energy"]) < 1e-2


class TestDivergenceResidual:
    def test_on_shell_second_order_decay(self):
        u_star = parse("cos(c*t)*cos(x)")
        cur = no.current_from_isometry(la.preset_generator("S0"), "0")
        res = [nm.fd_divergence_residual(cur, u_star, params={"c": SQRT2}, h=h)
               for h in (1e-2, 5e-3, 2.5e-3)]
        assert res[1] < res[0] / 3.0
        assert res[2] < res[1] / 3.0

    def test_off_shell_matches_symbolic_identity(self):
        # a non-solution field: the FD divergence must converge to the
        # composed symbolic identity -sin(x) u_t (equation residual)
        w = parse("sin(t)*sin(x)^2*cos(y)")
        cur = no.current_from_isometry(la.preset_generator("S0"), "0")
        residual = la.wave_residual("0")
        identity = -ex.sin_of(ex.X) * ex.jet("u", "t") * residual
        identity_composed = nm.compose_on_field(identity, w)
        errs = [nm.fd_divergence_residual(cur, w, h=h,
                                          identity_expr=identity_composed)
                for h in (1e-2, 5e-3)]
        assert errs[0] < 1e-3
        assert errs[1] < errs[0] / 3.0

    def test_zero_f_and_zero_coefficient_linear_agree(self):
        w = parse("sin(t)*sin(x)^2*cos(y)")
        cur0 = no.current_from_isometry(la.preset_generator("S0"), "0")
        curc = no.current_from_isometry(la.preset_generator("S0"), "linear")
        r0 = nm.fd_divergence_residual(cur0, w, h=1e-3)
        rc = nm.fd_divergence_residual(curc, w, params={"c": 0.0}, h=1e-3)
        assert r0 == pytest.approx(rc, rel=1e-9, abs=1e-12)


class TestRunConfigFile:
    def test_parse_roundtrip(self):
        text = """
        # sample configuration
        nx: 24
        ny: 24
        cfl: 0.4
        boundary: neumann
        f: 0
        u0: cos(x)
        ut0: 0
        t_end: 0.5
        monitors: energy j1
        params: w=1.5, c=0
        label: sample
        """
        cfg = nm.parse_run_config(text)
        assert cfg.nx == 24 and cfg.cfl == 0.4
        assert cfg.monitors == ("energy", "j1")
        assert cfg.params == {"w": 1.5, "c": 0.0}
        res = nm.run(cfg)
        assert res.summary["steps"] > 10

    def test_unknown_key_rejected(self):
        with pytest.raises(nm.NumericsError, match="unknown run-config key"):
            nm.parse_run_config("frobnicate: 3")

    def test_csv_lines(self):
        cfg = nm.preset_run_config("constant", nx=16, ny=16)
        res = nm.run(cfg)
        lines = res.csv_lines()
        assert lines[0].startswith("t,energy")
        assert len(lines) > 3
