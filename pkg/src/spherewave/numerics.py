"""Independent numerical oracle: a leapfrog solver for the wave equation on
the truncated sphere, conserved-integral monitors, boundary-flux accounting,
manufactured-solution machinery, and finite-difference curvature probes.

The chart excludes polar caps ([x_min, x_max] inside (0, pi)); conservation
is checked through the budget identity drift = accumulated boundary flux.
Grid reductions go through numpy's pairwise summation, so monitored values
do not depend on how a sweep might be split across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import expr as ex
from .expr import Expr
from .liealg import FSpec, wave_residual
from .noether import ConservedCurrent
from .parser import parse


class NumericsError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Compiling expressions to numpy
# ---------------------------------------------------------------------------


def compile_expr(e: Expr) -> Callable[[Mapping], np.ndarray]:
    """Compile a canonical expression into a vectorised evaluator.

    The returned callable takes an environment mapping atom names (``t``,
    ``x``, ``u_t``, ``b``...) to floats or arrays.
    """
    compiled_terms = []
    for mono, coeff in e.terms:
        factors = tuple((_compile_atom(a), n) for a, n in mono)
        compiled_terms.append((float(coeff), factors))

    def fn(env):
        total = 0.0
        for c, factors in compiled_terms:
            val = c
            for fa, n in factors:
                base = fa(env)
                val = val * base ** n if n != 1 else val * base
            total = total + val
        return total

    return fn


def _compile_atom(a):
    if isinstance(a, ex.Func):
        inner = compile_expr(a.arg)
        f = {"sin": np.sin, "cos": np.cos, "ln": np.log}[a.fn]
        return lambda env: f(inner(env))
    if isinstance(a, ex.SumPow):
        return compile_expr(a.base)
    name = str(a)
    return lambda env: env[name]


def compile_field(e: Expr, params: Optional[Mapping[str, float]] = None):
    """Compile an expression in (t, x, y) plus named constants to f(t, x, y)."""
    fn = compile_expr(e)
    fixed = dict(params or {})

    def g(t, x, y):
        env = dict(fixed)
        env.update({"t": t, "x": x, "y": y})
        return fn(env)

    return g


def field_jet(e: Expr, index: str = "") -> Expr:
    """Total derivative D_index of a field expression in (t, x, y)."""
    out = e
    for c in index:
        out = ex.diff(out, c)
    return out


def compose_on_field(e: Expr, u_expr: Expr,
                     b_expr: Optional[Expr] = None) -> Expr:
    """Substitute jets of u (and optionally partials of b) by derivatives of
    closed-form fields, leaving an expression in (t, x, y) and parameters."""
    bindings = {}
    for a in e.atoms():
        if isinstance(a, ex.Jet) and a.field == "u":
            bindings[a] = field_jet(u_expr, "".join(a.index))
        elif b_expr is not None and isinstance(a, ex.ParamField) and a.name == "b":
            bindings[a] = field_jet(b_expr, "".join(a.index))
    return ex.substitute(e, bindings)


def manufactured_source(u_expr: Expr, f_spec="0") -> Expr:
    """Source sigma(t,x,y) that makes u_expr solve the forced equation."""
    fs = FSpec.parse(f_spec)
    return compose_on_field(wave_residual(fs), u_expr)


# ---------------------------------------------------------------------------
# Grid and state
# ---------------------------------------------------------------------------

DEFAULT_X_MIN = 0.15
DEFAULT_CFL = 0.5


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    x_min: float = DEFAULT_X_MIN
    x_max: float = math.pi - DEFAULT_X_MIN
    cfl: float = DEFAULT_CFL
    boundary: str = "neumann"          # neumann | dirichlet0 | exact

    def __post_init__(self):
        if not (0.0 < self.x_min < self.x_max < math.pi):
            raise NumericsError("x range must satisfy 0 < x_min < x_max < pi")
        if self.ny % 2:
            raise NumericsError("ny must be even")
        if self.boundary not in ("neumann", "dirichlet0", "exact"):
            raise NumericsError(f"unknown boundary policy {self.boundary!r}")
        if not (0.0 < self.cfl <= 1.0):
            raise NumericsError("cfl must lie in (0, 1]")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dy(self) -> float:
        return 2.0 * math.pi / self.ny

    @property
    def dt(self) -> float:
        # the y-direction signal speed scales with 1/sin(x); the tightest
        # constraint sits at the cap boundary
        return self.cfl * min(self.dx, math.sin(self.x_min) * self.dy)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.dx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy


@dataclass
class GridField:
    """Two consecutive time levels of the discrete field."""

    u_prev: np.ndarray
    u_curr: np.ndarray
    time: float                 # time of u_curr
    istep: int = 0


def _ghost_rows(u: np.ndarray, grid: Grid, t: float, exact_fn=None,
                policy: Optional[str] = None):
    """Ghost rows beyond the two x walls for the active boundary policy."""
    policy = policy or grid.boundary
    if policy == "neumann":
        return u[0], u[-1]
    if policy == "dirichlet0":
        return -u[0], -u[-1]
    if exact_fn is None:
        raise NumericsError("exact boundary policy needs an exact solution")
    xg_lo = grid.x_min - 0.5 * grid.dx
    xg_hi = grid.x_max + 0.5 * grid.dx
    yv = grid.y
    return (np.asarray(exact_fn(t, xg_lo, yv), dtype=float) + 0.0 * yv,
            np.asarray(exact_fn(t, xg_hi, yv), dtype=float) + 0.0 * yv)


def _padded(u: np.ndarray, grid: Grid, t: float, exact_fn=None) -> np.ndarray:
    lo, hi = _ghost_rows(u, grid, t, exact_fn)
    return np.vstack([lo[None, :], u, hi[None, :]])


def spatial_operator(u: np.ndarray, grid: Grid, t: float,
                     exact_fn=None) -> np.ndarray:
    """u_xx + cot(x) u_x + u_yy / sin^2(x) with centered differences."""
    up = _padded(u, grid, t, exact_fn)
    dx, dy = grid.dx, grid.dy
    x = grid.x[:, None]
    uxx = (up[2:] - 2.0 * up[1:-1] + up[:-2]) / dx ** 2
    ux = (up[2:] - up[:-2]) / (2.0 * dx)
    uyy = (np.roll(u, -1, axis=1) - 2.0 * u + np.roll(u, 1, axis=1)) / dy ** 2
    return uxx + np.cos(x) / np.sin(x) * ux + uyy / np.sin(x) ** 2


def step(state: GridField, grid: Grid, f_fn=None, source_fn=None,
         exact_fn=None) -> GridField:
    """One leapfrog update u^{n+1} = 2u^n - u^{n-1} + dt^2 (RHS)."""
    t = state.time
    with np.errstate(invalid="ignore", over="ignore"):
        rhs = spatial_operator(state.u_curr, grid, t, exact_fn)
        if f_fn is not None:
            rhs = rhs + f_fn(state.u_curr)
        if source_fn is not None:
            rhs = rhs + source_fn(t, grid.x[:, None], grid.y[None, :])
        u_next = 2.0 * state.u_curr - state.u_prev + grid.dt ** 2 * rhs
    if not np.isfinite(u_next).all():
        raise NumericsError(f"NaN/Inf detected at step {state.istep + 1}")
    return GridField(state.u_curr, u_next, t + grid.dt, state.istep + 1)


def init_state(grid: Grid, u0_fn, ut0_fn=None, f_fn=None, source_fn=None,
               exact_fn=None) -> GridField:
    """Second-order accurate Taylor start from u(0) and u_t(0)."""
    xg, yg = grid.x[:, None], grid.y[None, :]
    u0 = np.asarray(u0_fn(0.0, xg, yg), dtype=float) + np.zeros((grid.nx, grid.ny))
    ut0 = np.zeros_like(u0) if ut0_fn is None else \
        np.asarray(ut0_fn(0.0, xg, yg), dtype=float) + np.zeros_like(u0)
    rhs = spatial_operator(u0, grid, 0.0, exact_fn)
    if f_fn is not None:
        rhs = rhs + f_fn(u0)
    if source_fn is not None:
        rhs = rhs + source_fn(0.0, xg, yg)
    u1 = u0 + grid.dt * ut0 + 0.5 * grid.dt ** 2 * rhs
    return GridField(u0, u1, grid.dt, 1)


# ---------------------------------------------------------------------------
# Monitors: conserved integrals and boundary fluxes
# ---------------------------------------------------------------------------


@dataclass
class CompiledMonitor:
    name: str
    a0: Callable
    a1: Callable
    a2: Callable
    needs_gauge: bool


def compile_monitor(current: ConservedCurrent,
                    params: Optional[Mapping[str, float]] = None) -> CompiledMonitor:
    fs = FSpec.parse(current.f_label)
    comps = [fs.wire_potential(c) for c in current.components]
    needs_gauge = any(isinstance(a, ex.ParamField) and a.name == "b"
                      for c in comps for a in c.atoms())
    fixed = dict(params or {})

    def wrap(fn):
        def g(env):
            merged = dict(fixed)
            merged.update(env)
            return fn(merged)
        return g

    a0, a1, a2 = (wrap(compile_expr(c)) for c in comps)
    return CompiledMonitor(current.generator, a0, a1, a2, needs_gauge)


def _jet_env(grid: Grid, t: float, u_prev, u_curr, u_next, exact_fn=None):
    """Centered jet samples of the discrete field at an integer level."""
    dt = grid.dt
    up = _padded(u_curr, grid, t, exact_fn)
    env = {
        "t": t,
        "x": grid.x[:, None],
        "y": grid.y[None, :],
        "u": u_curr,
        "u_t": (u_next - u_prev) / (2.0 * dt),
        "u_x": (up[2:] - up[:-2]) / (2.0 * grid.dx),
        "u_y": (np.roll(u_curr, -1, axis=1) - np.roll(u_curr, 1, axis=1))
               / (2.0 * grid.dy),
    }
    return env


def conserved_integral(monitor: CompiledMonitor, env) -> float:
    """Midpoint quadrature of A^0 over the chart rectangle."""
    a0 = monitor.a0(env)
    grid_area = env["_dx"] * env["_dy"]
    return float(np.sum(a0) * grid_area)


def _face_jets(prefix: str, levels, grid: Grid, t: float, side: str,
               exact_fn=None, policy: Optional[str] = None) -> dict:
    """Second-order face samples (value, _t, _x, _y) of one field at a wall."""
    f_prev, f_curr, f_next = levels
    idx = 0 if side == "lo" else -1
    pick = (lambda pair: pair[0]) if side == "lo" else (lambda pair: pair[1])
    dt = grid.dt
    g_p = pick(_ghost_rows(f_prev, grid, t - dt, exact_fn, policy))
    g_c = pick(_ghost_rows(f_curr, grid, t, exact_fn, policy))
    g_n = pick(_ghost_rows(f_next, grid, t + dt, exact_fn, policy))
    face_p = 0.5 * (g_p + f_prev[idx])
    face_c = 0.5 * (g_c + f_curr[idx])
    face_n = 0.5 * (g_n + f_next[idx])
    sgn = 1.0 if side == "lo" else -1.0
    return {
        prefix: face_c,
        prefix + "_t": (face_n - face_p) / (2.0 * dt),
        prefix + "_x": sgn * (f_curr[idx] - g_c) / grid.dx,
        prefix + "_y": (np.roll(face_c, -1) - np.roll(face_c, 1)) / (2.0 * grid.dy),
    }


def boundary_flux(monitor: CompiledMonitor, grid: Grid, t: float,
                  levels, exact_fn=None, gauge_levels=None) -> float:
    """Net outward A^1 flux through the two x walls (y is periodic)."""

    def face_env(side):
        xw = grid.x_min if side == "lo" else grid.x_max
        env = {"t": t, "x": xw, "y": grid.y}
        env.update(_face_jets("u", levels, grid, t, side, exact_fn))
        if gauge_levels is not None:
            env.update(_face_jets("b", gauge_levels, grid, t, side,
                                  policy="neumann"))
        return env

    f_hi = float(np.sum(monitor.a1(face_env("hi"))) * grid.dy)
    f_lo = float(np.sum(monitor.a1(face_env("lo"))) * grid.dy)
    return f_hi - f_lo


# ---------------------------------------------------------------------------
# Run configuration and driver
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    nx: int = 64
    ny: int = 64
    cfl: float = DEFAULT_CFL
    x_min: float = DEFAULT_X_MIN
    x_max: float = math.pi - DEFAULT_X_MIN
    boundary: str = "neumann"
    f: str = "0"
    u0: str = "cos(x)"
    ut0: str = "0"
    t_end: float = 1.0
    monitors: tuple = ("energy",)
    exact: str = ""               # closed-form solution (exact boundary/errors)
    manufacture: bool = False     # derive a source from `exact`
    gauge_b0: str = ""            # companion field initial data (gauge monitor)
    gauge_bt0: str = ""
    params: dict = field(default_factory=dict)
    monitor_every: int = 4
    label: str = "run"


def parse_run_config(text: str) -> RunConfig:
    """Plain-text run configuration, one ``key: value`` pair per line."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise NumericsError(f"line {lineno}: expected 'key: value'")
        cfg[key.strip()] = value.strip()
    kwargs = {}
    for key, value in cfg.items():
        if key in ("nx", "ny", "monitor_every"):
            kwargs[key] = int(value)
        elif key in ("cfl", "x_min", "x_max", "t_end"):
            kwargs[key] = float(value)
        elif key == "monitors":
            kwargs[key] = tuple(value.split())
        elif key == "manufacture":
            kwargs[key] = value.lower() in ("1", "true", "yes")
        elif key == "params":
            d = {}
            for item in value.split(","):
                if item.strip():
                    name, _, v = item.partition("=")
                    d[name.strip()] = float(v)
            kwargs[key] = d
        elif key in ("boundary", "f", "u0", "ut0", "exact", "gauge_b0",
                     "gauge_bt0", "label"):
            kwargs[key] = value
        else:
            raise NumericsError(f"unknown run-config key {key!r}")
    try:
        return RunConfig(**kwargs)
    except TypeError as err:
        raise NumericsError(str(err)) from err


def preset_run_config(name: str, nx: int = 128, ny: int = 128) -> RunConfig:
    """Bundled runs: eigenfunction, manufactured, constant."""
    w = math.sqrt(2.0)
    if name == "eigenfunction":
        return RunConfig(
            nx=nx, ny=ny, boundary="exact", f="0",
            u0="cos(x)", ut0="0", exact="cos(w*t)*cos(x)",
            params={"w": w}, t_end=2.0 * math.pi / w,
            monitors=("energy", "j1"), label="eigenfunction")
    if name == "manufactured":
        return RunConfig(
            nx=nx, ny=ny, boundary="exact", f="0",
            u0="0", ut0="sin(x)^2*cos(y)",
            exact="sin(t)*sin(x)^2*cos(y)", manufacture=True,
            t_end=0.5, monitors=(), label="manufactured")
    if name == "constant":
        return RunConfig(nx=nx, ny=ny, boundary="neumann", f="0",
                         u0="1", ut0="0", t_end=1.0,
                         monitors=("energy", "j1"), label="constant")
    raise NumericsError(f"unknown run preset {name!r}")


@dataclass
class RunResult:
    config: RunConfig
    grid: Grid
    rows: list                    # per-sample dicts
    summary: dict
    final: GridField

    def csv_lines(self):
        if not self.rows:
            return ["t"]
        keys = list(self.rows[0].keys())
        lines = [",".join(keys)]
        for row in self.rows:
            lines.append(",".join(f"{row[k]:.12e}" for k in keys))
        return lines


class _GaugeCompanion:
    """A second discrete solution evolved alongside u, feeding the b atoms.

    The companion always uses reflecting (Neumann) walls.
    """

    def __init__(self, grid: Grid, b0_fn, bt0_fn, f_fn):
        self.grid = replace(grid, boundary="neumann")
        self.state = init_state(self.grid, b0_fn, bt0_fn, f_fn)
        self.f_fn = f_fn

    def advance(self):
        new = step(self.state, self.grid, self.f_fn)
        prev = self.state
        self.state = new
        return prev

    def env(self, t, b_prev, b_curr, b_next):
        e = _jet_env(self.grid, t, b_prev, b_curr, b_next)
        return {"b": e["u"], "b_t": e["u_t"], "b_x": e["u_x"], "b_y": e["u_y"]}


def run(config: RunConfig, currents: Optional[Mapping[str, ConservedCurrent]] = None,
        progress=None) -> RunResult:
    """Execute a leapfrog run with conserved-integral and flux monitoring."""
    from . import noether as no
    from .liealg import preset_generator

    grid = Grid(config.nx, config.ny, config.x_min, config.x_max,
                config.cfl, config.boundary)
    params = dict(config.params)
    fs = FSpec.parse(config.f if config.f else "0")
    f_compiled = compile_expr(fs.f)

    def f_fn(u):
        env = dict(params)
        env["u"] = u
        return f_compiled(env)

    exact_fn = compile_field(parse(config.exact, params=set(params)), params) \
        if config.exact else None
    if grid.boundary == "exact" and exact_fn is None:
        raise NumericsError("exact boundary policy needs an 'exact' expression")
    source_fn = None
    if config.manufacture:
        if not config.exact:
            raise NumericsError("manufactured source needs an 'exact' expression")
        sigma = manufactured_source(parse(config.exact, params=set(params)), fs)
        source_fn = compile_field(sigma, params)

    u0_fn = compile_field(parse(config.u0, params=set(params)), params)
    ut0_fn = compile_field(parse(config.ut0, params=set(params)), params) \
        if config.ut0 else None

    if currents is None:
        currents = {}
        gens = {"energy": "S0", "j1": "S1", "j2": "S2", "j3": "S3"}
        for mname in config.monitors:
            if mname in gens:
                currents[mname] = no.current_from_isometry(
                    preset_generator(gens[mname]), fs)
            elif mname == "gauge":
                currents[mname] = no.current_from_gauge(fs)
            else:
                raise NumericsError(f"unknown monitor {mname!r}")
    monitors = {mname: compile_monitor(cur, params)
                for mname, cur in currents.items()}

    gauge = None
    if any(m.needs_gauge for m in monitors.values()):
        if not config.gauge_b0:
            raise NumericsError("gauge monitoring needs gauge_b0 initial data")
        b0_fn = compile_field(parse(config.gauge_b0, params=set(params)), params)
        bt0_fn = compile_field(parse(config.gauge_bt0, params=set(params)), params) \
            if config.gauge_bt0 else None
        gauge = _GaugeCompanion(grid, b0_fn, bt0_fn, f_fn)

    state = init_state(grid, u0_fn, ut0_fn, f_fn, source_fn, exact_fn)
    n_steps = max(2, int(round(config.t_end / grid.dt)))

    rows = []
    flux_accum = {m: 0.0 for m in monitors}
    prev_flux = {m: None for m in monitors}
    first_vals = {}

    def sample(u_levels, t, b_levels=None):
        env = _jet_env(grid, t, *u_levels, exact_fn)
        env["_dx"], env["_dy"] = grid.dx, grid.dy
        if gauge is not None and b_levels is not None:
            env.update(gauge.env(t, *b_levels))
        row = {"t": t}
        for mname, mon in monitors.items():
            value = conserved_integral(mon, dict(env))
            ft = boundary_flux(mon, grid, t, u_levels, exact_fn,
                               gauge_levels=b_levels if mon.needs_gauge else None)
            if prev_flux[mname] is not None:
                dt_sample = grid.dt * config.monitor_every
                flux_accum[mname] += 0.5 * (prev_flux[mname] + ft) * dt_sample
            prev_flux[mname] = ft
            first_vals.setdefault(mname, value)
            row[mname] = value
            row[mname + "_flux"] = flux_accum[mname]
            row[mname + "_budget"] = value - first_vals[mname] + flux_accum[mname]
        rows.append(row)

    b_levels = None
    for istep in range(1, n_steps):
        if gauge is not None:
            b_prev_state = gauge.advance()
            b_levels = (b_prev_state.u_prev, b_prev_state.u_curr,
                        gauge.state.u_curr)
        new = step(state, grid, f_fn, source_fn, exact_fn)
        if (istep - 1) % config.monitor_every == 0 and monitors:
            sample((state.u_prev, state.u_curr, new.u_curr),
                   state.time, b_levels)
        state = new
        if progress is not None:
            progress(istep, n_steps)

    summary = {
        "label": config.label,
        "steps": state.istep,
        "dt": grid.dt,
        "dx": grid.dx,
        "dy": grid.dy,
        "t_final": state.time,
        "monitors": {},
    }
    for mname in monitors:
        series = [row[mname] for row in rows]
        budgets = [row[mname + "_budget"] for row in rows]
        e0 = first_vals.get(mname, 0.0)
        scale = max(abs(e0), 1e-30)
        summary["monitors"][mname] = {
            "initial": e0,
            "final": series[-1] if series else 0.0,
            "max_drift_rel": max(abs(v - e0) for v in series) / scale if series else 0.0,
            "max_budget_rel": max(abs(b) for b in budgets) / scale if budgets else 0.0,
        }
    if config.exact and exact_fn is not None:
        xg, yg = grid.x[:, None], grid.y[None, :]
        err = state.u_curr - exact_fn(state.time, xg, yg)
        summary["error_final_max"] = float(np.max(np.abs(err)))
    return RunResult(config, grid, rows, summary, state)


def flux_report(result: "RunResult") -> dict:
    """Per-current boundary-flux totals and the final budget balance.

    For each monitored current: the drift of its integral, the accumulated
    net outward flux through the x walls, and their sum (the budget), which
    the conservation law forces to discretisation error.
    """
    out = {}
    if not result.rows:
        return out
    first, last = result.rows[0], result.rows[-1]
    for m in result.config.monitors:
        out[m] = {
            "drift": last[m] - first[m],
            "accumulated_flux": last[m + "_flux"],
            "budget": last[m + "_budget"],
            "max_abs_budget": max(abs(r[m + "_budget"]) for r in result.rows),
        }
    return out


def convergence_study(preset: str, resolutions: Sequence[int]) -> dict:
    """Run a preset on a ladder of grids and estimate the observed order."""
    errors = []
    hs = []
    for n in resolutions:
        cfg = preset_run_config(preset, nx=n, ny=n)
        res = run(cfg)
        errors.append(res.summary["error_final_max"])
        hs.append(res.grid.dx)
    orders = [math.log(errors[i - 1] / errors[i]) / math.log(hs[i - 1] / hs[i])
              for i in range(1, len(errors))]
    return {"resolutions": list(resolutions), "h": hs, "errors": errors,
            "orders": orders,
            "order_mean": sum(orders) / len(orders) if orders else float("nan")}


# ---------------------------------------------------------------------------
# Pointwise divergence residuals on closed-form fields
# ---------------------------------------------------------------------------


def fd_divergence_residual(current: ConservedCurrent, u_expr: Expr,
                           params: Optional[Mapping[str, float]] = None,
                           b_expr: Optional[Expr] = None,
                           h: float = 1e-3, n_points: int = 40,
                           seed: int = ex.DEFAULT_PROBE_SEED,
                           identity_expr: Optional[Expr] = None):
    """Central-difference D_t A^0 + D_x A^1 + D_y A^2 on a closed-form field.

    Returns (max |fd divergence - identity|) where ``identity_expr`` defaults
    to zero (on-shell fields).  The identity is evaluated pointwise, so an
    off-shell field can be checked against its known symbolic residual.
    """
    fs = FSpec.parse(current.f_label)
    comps = [compose_on_field(fs.wire_potential(c), u_expr, b_expr)
             for c in current.components]
    fns = [compile_field(c, params) for c in comps]
    ident_fn = compile_field(identity_expr, params) if identity_expr is not None \
        else None
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        t = rng.uniform(-1.0, 1.0)
        x = rng.uniform(0.35, math.pi - 0.35)
        y = rng.uniform(0.0, 2.0 * math.pi)
        div = ((fns[0](t + h, x, y) - fns[0](t - h, x, y))
               + (fns[1](t, x + h, y) - fns[1](t, x - h, y))
               + (fns[2](t, x, y + h) - fns[2](t, x, y - h))) / (2.0 * h)
        target = ident_fn(t, x, y) if ident_fn is not None else 0.0
        worst = max(worst, abs(div - target))
    return worst


# ---------------------------------------------------------------------------
# Finite-difference curvature oracle
# ---------------------------------------------------------------------------


def numeric_christoffel(gfun, point, h: float = 1e-4) -> np.ndarray:
    """Gamma^k_ij at a point from central differences of the metric alone."""
    p = np.asarray(point, dtype=float)
    n = len(p)
    g0 = np.asarray(gfun(p), dtype=float)
    ginv = np.linalg.inv(g0)
    dg = np.empty((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dg[k] = (np.asarray(gfun(p + e), dtype=float)
                 - np.asarray(gfun(p - e), dtype=float)) / (2.0 * h)
    gamma = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                gamma[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[i][l, j] + dg[j][l, i] - dg[l][i, j])
                    for l in range(n))
    return gamma


def _numeric_scalar_once(gfun, p, h) -> float:
    n = len(p)
    gamma0 = numeric_christoffel(gfun, p, h)
    dgamma = np.empty((n, n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dgamma[k] = (numeric_christoffel(gfun, p + e, h)
                     - numeric_christoffel(gfun, p - e, h)) / (2.0 * h)
    riem = np.empty((n, n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for s in range(n):
                    val = dgamma[k][i, s, j] - dgamma[s][i, k, j]
                    for l in range(n):
                        val += gamma0[i, k, l] * gamma0[l, s, j] \
                             - gamma0[i, s, l] * gamma0[l, k, j]
                    riem[i, j, k, s] = val
    ricci = np.einsum("kikj->ij", riem)
    ginv = np.linalg.inv(np.asarray(gfun(p), dtype=float))
    return float(np.einsum("ij,ij->", ginv, ricci))


def numeric_scalar_curvature(gfun, point, h: float = 1e-2,
                             richardson: bool = True) -> float:
    """Scalar curvature from the sampled metric; Richardson-extrapolated."""
    p = np.asarray(point, dtype=float)
    r_h = _numeric_scalar_once(gfun, p, h)
    if not richardson:
        return r_h
    r_h2 = _numeric_scalar_once(gfun, p, h / 2.0)
    return (4.0 * r_h2 - r_h) / 3.0
