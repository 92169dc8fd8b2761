"""The variational layer: Lagrangian density, Euler-Lagrange operator,
variational-symmetry testing, and conserved currents.

Currents are always *generated* from the general isometry/gauge formulas

    A^k = sqrt(g) (1/2 g^ij xi^k - g^kj xi^i) u_i u_j - sqrt(g) xi^k F(u)
    A^k = sqrt(g) g^jk (b u_j - b_j u)

on the product chart; the currents as printed in the source material are
kept separately as test vectors (two of their components carry typos, which
the comparison surfaces as warnings rather than failures).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import expr as ex
from . import geometry as geo
from .expr import Expr, ZeroResult, ZeroStatus
from .liealg import (FSpec, POINT_COORDS, VectorField, gauge_constraint_bindings,
                     on_shell_bindings, poisson_on_shell_bindings, prolong)
from .parser import parse

_JET1 = tuple(ex.Jet("u", (c,)) for c in POINT_COORDS)   # atoms, for partials
_U1 = tuple(ex.jet("u", c) for c in POINT_COORDS)        # the same as Exprs


@dataclass(frozen=True)
class Lagrangian:
    """First-order density with an opaque potential F, F' wired to f."""

    density: Expr
    f_spec: FSpec

    def with_potential_wired(self, e: Expr) -> Expr:
        return self.f_spec.wire_potential(e)


def lagrangian(f_spec="arbitrary") -> Lagrangian:
    """L = (sin x/2) u_t^2 - (sin x/2) u_x^2 - (1/(2 sin x)) u_y^2 + sin x F(u).

    Its Euler-Lagrange equation is the evolution form
    u_tt = u_xx + cot(x) u_x + u_yy/sin^2(x) + f(u).
    """
    fs = FSpec.parse(f_spec)
    s = ex.sin_of(ex.X)
    half = Fraction(1, 2)
    density = (half * s * ex.jet("u", "t") ** 2
               - half * s * ex.jet("u", "x") ** 2
               - half * s ** (-1) * ex.jet("u", "y") ** 2
               + s * fs.potential())
    return Lagrangian(density, fs)


def generating_lagrangian(f_spec="arbitrary") -> Lagrangian:
    """The variational twin with the potential sign flipped (kinetic - sin x F).

    Its Euler-Lagrange equation is the Poisson form Delta_g u + f(u) = 0;
    the isometry currents below are exactly its Noether currents, which is
    why the off-shell divergence identity is checked against it.
    """
    L = lagrangian(f_spec)
    s = ex.sin_of(ex.X)
    return Lagrangian(L.density - 2 * s * L.f_spec.potential(), L.f_spec)


def euler_lagrange(L: Lagrangian) -> Expr:
    """E(L) = dL/du - D_i dL/du_i, with the F' -> f wiring applied."""
    e = ex.partial_diff(L.density, "u")
    for c, a in zip(POINT_COORDS, _JET1):
        e = e - ex.diff(ex.partial_diff(L.density, a), c)
    return L.with_potential_wired(e)


# ---------------------------------------------------------------------------
# Variational symmetry test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VariationalResult:
    generator: str
    kind: str                      # EXACT_ZERO | DIVERGENCE | RESIDUAL
    divergence: Optional[tuple]    # triple V^i with R = Div(V), when found
    residual: Optional[Expr]
    verdict: ZeroResult

    @property
    def is_variational(self) -> bool:
        return self.kind in ("EXACT_ZERO", "DIVERGENCE")


def _first_prolongation_action(X: VectorField, L: Lagrangian) -> Expr:
    p = prolong(X, order=1)
    out = ex.ZERO
    for c, xic in zip(POINT_COORDS, X.xi):
        out = out + xic * ex.partial_diff(L.density, c)
    out = out + X.eta * ex.partial_diff(L.density, "u")
    for c, a in zip(POINT_COORDS, _JET1):
        out = out + p.eta1[c] * ex.partial_diff(L.density, a)
    return out


def variational_check(X: VectorField, L: Lagrangian, rng=None) -> VariationalResult:
    """Evaluate R = X^(1) L + L D_i xi^i.

    EXACT_ZERO when R is canonically zero.  Otherwise, for R affine in the
    first-order jet atoms with derivative-free coefficients (the gauge-type
    case), the ansatz V^i = (dR/du_i) u is peeled off and the remainder is
    reduced modulo the gauge constraint; a successful reduction returns the
    divergence triple.  Anything else is reported as a residual.
    """
    r = _first_prolongation_action(X, L)
    for c, xic in zip(POINT_COORDS, X.xi):
        r = r + L.density * ex.diff(xic, c)
    r = L.with_potential_wired(r)
    name = X.name or str(X)
    if r.is_zero_expr:
        return VariationalResult(name, "EXACT_ZERO", None, None,
                                 ZeroResult(ZeroStatus.PROVEN_ZERO))
    # divergence extraction for the documented ansatz class
    weights = [ex.partial_diff(r, a) for a in _JET1]
    ansatz_ok = all(
        not any(isinstance(at, ex.Jet) for at in w.atoms()) for w in weights)
    if ansatz_ok:
        v = tuple(w * ex.U for w in weights)
        remainder = r
        for c, vi in zip(POINT_COORDS, v):
            remainder = remainder - ex.diff(vi, c)
        c_lin = L.f_spec.linear_coefficient
        if c_lin is not None and any(
                isinstance(a, ex.ParamField) and a.name == "b"
                for a in remainder.atoms()):
            remainder = ex.substitute(
                remainder, gauge_constraint_bindings(L.f_spec))
        if remainder.is_zero_expr:
            return VariationalResult(name, "DIVERGENCE", v, None,
                                     ZeroResult(ZeroStatus.PROVEN_ZERO))
        return VariationalResult(name, "RESIDUAL", v, remainder,
                                 ex.is_zero(remainder, rng=rng))
    return VariationalResult(name, "RESIDUAL", None, r, ex.is_zero(r, rng=rng))


# ---------------------------------------------------------------------------
# Conserved currents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConservedCurrent:
    components: tuple[Expr, Expr, Expr]
    generator: str
    source: str                # isometry-formula | gauge-formula | printed
    f_label: str
    pairing: str = "poisson"   # which equation form conserves it (see below)
    warning: str = ""

    # The isometry currents trace back to the Poisson-form classification
    # Delta_g u + f = 0 and are conserved modulo that form; the gauge current
    # pairs with the evolution form u_tt = ... + f together with the gauge
    # constraint.  The two forms coincide when f = 0.

    def component_names(self):
        return ("A0", "A1", "A2")


def current_from_isometry(X: VectorField, f_spec="arbitrary",
                          metric: Optional[geo.ChartMetric] = None,
                          check_killing: bool = True) -> ConservedCurrent:
    """Contract the isometry current formula over the chart."""
    fs = FSpec.parse(f_spec)
    m = metric if metric is not None else geo.preset_metric("s2xr")
    warning = ""
    if check_killing and not geo.killing_check(m, X.xi).is_killing:
        warning = "generator is not a Killing field; current need not be conserved"
    F = fs.potential()
    comps = []
    n = m.dim
    for k in range(n):
        half_trace = ex.ZERO
        for i in range(n):
            for j in range(n):
                half_trace = half_trace + Fraction(1, 2) * m.ginv[i][j] \
                    * _U1[i] * _U1[j]
        a = m.sqrt_det * X.xi[k] * half_trace
        for i in range(n):
            for j in range(n):
                a = a - m.sqrt_det * m.ginv[k][j] * X.xi[i] * _U1[i] * _U1[j]
        a = a - m.sqrt_det * X.xi[k] * F
        comps.append(a)
    return ConservedCurrent(tuple(comps), X.name or str(X),
                            "isometry-formula", fs.label, "poisson", warning)


def current_from_gauge(f_spec="linear",
                       metric: Optional[geo.ChartMetric] = None) -> ConservedCurrent:
    """A^k = sqrt(g) g^jk (b u_j - b_j u) for the gauge generator b d_u."""
    fs = FSpec.parse(f_spec)
    if fs.linear_coefficient is None:
        raise ex.ExprError("the gauge current requires f = c*u")
    m = metric if metric is not None else geo.preset_metric("s2xr")
    b = ex.param_field("b")
    comps = []
    for k in range(m.dim):
        a = ex.ZERO
        for j in range(m.dim):
            bj = ex.param_field("b", POINT_COORDS[j])
            a = a + m.sqrt_det * m.ginv[j][k] * (b * _U1[j] - bj * ex.U)
        comps.append(a)
    return ConservedCurrent(tuple(comps), "Sinf", "gauge-formula",
                            fs.label, "evolution")


def printed_currents(f_spec="arbitrary") -> dict[str, ConservedCurrent]:
    """The five currents exactly as typeset in the source material.

    These are comparison vectors only; two components (the last current's
    second spatial component and the fourth current's final component) are
    known to disagree with the generating formulas.
    """
    fs = FSpec.parse(f_spec)
    texts = {
        "energy": ("S0", ["-sin(x)/2*u_t^2 - sin(x)/2*u_x^2 - 1/(2*sin(x))*u_y^2 - sin(x)*F",
                       "sin(x)*u_t*u_x",
                       "1/sin(x)*u_t*u_y"]),
        "j1": ("S1", ["-sin(x)*u_t*u_y",
                       "sin(x)*u_x*u_y",
                       "sin(x)/2*u_t^2 - sin(x)/2*u_x^2 + 1/(2*sin(x))*u_y^2 - sin(x)*F"]),
        "j2": ("S2", ["-sin(x)*sin(y)*u_t*u_x - cos(x)*cos(y)*u_t*u_y",
                       "sin(x)*sin(y)/2*u_t^2 + sin(x)*sin(y)/2*u_x^2 - sin(y)/(2*sin(x))*u_y^2"
                       " + cos(x)*cos(y)*u_x*u_y - sin(x)*sin(y)*F",
                       "cos(x)*cos(y)/2*u_t^2 - cos(x)*cos(y)/2*u_x^2"
                       " + cos(x)*cos(y)/(2*sin(x)^2)*u_y^2 + sin(y)/sin(x)*u_x*u_y"
                       " - cos(x)*cos(y)*F"]),
        "j3": ("S3", ["-sin(x)*cos(y)*u_t*u_x + cos(x)*sin(y)*u_t*u_y",
                       "sin(x)*cos(y)/2*u_t^2 + sin(x)*cos(y)/2*u_x^2 - cos(y)/(2*sin(x))*u_y^2"
                       " - cos(x)*sin(y)*u_x*u_y - sin(x)*cos(y)*F",
                       "-cos(x)*sin(y)/2*u_t^2 + cos(x)*sin(y)/2*u_x^2"
                       " - cos(x)*sin(y)/(2*sin(x)^2)*u_y^2 + cos(y)/(2*sin(x))*u_x*u_y"
                       " + cos(x)*sin(x)*F"]),
        "gauge": ("Sinf", ["sin(x)*(b*u_t - b_t*u)",
                         "sin(x)*(b_x*u - b*u_x)",
                         "1/sin(x)*(b*u_t - b_t*u)"]),
    }
    out = {}
    subst = {"F": fs.potential()}
    for name, (gen, comps) in texts.items():
        exprs = tuple(ex.substitute(parse(c), subst) for c in comps)
        pairing = "evolution" if name == "gauge" else "poisson"
        out[name] = ConservedCurrent(exprs, gen, "printed", fs.label, pairing)
    return out


GENERATED_TO_PRINTED = {"S0": "energy", "S1": "j1", "S2": "j2", "S3": "j3",
                        "Sinf": "gauge"}


@dataclass(frozen=True)
class CurrentComparison:
    name: str
    matches: tuple[bool, bool, bool]
    differences: tuple


def compare_currents(generated: ConservedCurrent,
                     printed: ConservedCurrent) -> CurrentComparison:
    matches = []
    diffs = []
    for a, b in zip(generated.components, printed.components):
        d = a - b
        matches.append(d.is_zero_expr)
        diffs.append(d)
    return CurrentComparison(printed.generator, tuple(matches), tuple(diffs))


@dataclass(frozen=True)
class DivergenceReport:
    current: str
    source: str
    divergence: Expr           # reduced modulo the equation(s)
    verdict: ZeroResult

    @property
    def conserved(self) -> bool:
        return self.verdict.status is ZeroStatus.PROVEN_ZERO


def divergence_check(current: ConservedCurrent, f_spec=None,
                     rng=None) -> DivergenceReport:
    """D_t A^0 + D_x A^1 + D_y A^2, reduced modulo the equation.

    u_tt is eliminated through the equation form recorded on the current
    (Poisson form for the isometry currents, evolution form for the gauge
    current); F' is wired to f, and b_tt is eliminated through the gauge
    constraint when the gauge field is present.
    """
    fs = FSpec.parse(f_spec if f_spec is not None else current.f_label)
    total = ex.ZERO
    for c, a in zip(POINT_COORDS, current.components):
        total = total + ex.diff(a, c)
    total = fs.wire_potential(total)
    if current.pairing == "poisson":
        total = ex.substitute(total, poisson_on_shell_bindings(fs))
    else:
        total = ex.substitute(total, on_shell_bindings(fs))
    if any(isinstance(a, ex.ParamField) and a.name == "b" for a in total.atoms()):
        total = ex.substitute(total, gauge_constraint_bindings(fs))
    return DivergenceReport(current.generator, current.source, total,
                            ex.is_zero(total, rng=rng))


def offshell_identity(X: VectorField, f_spec="arbitrary",
                      metric: Optional[geo.ChartMetric] = None) -> Expr:
    """D_i A^i + E(L) (eta - xi^j u_j), which must vanish off-shell.

    L here is the generating (Poisson-form) Lagrangian of the isometry
    currents; the identity localises any error in the current components
    before any on-shell reduction takes place.
    """
    fs = FSpec.parse(f_spec)
    cur = current_from_isometry(X, fs, metric=metric)
    L = generating_lagrangian(fs)
    el = euler_lagrange(L)
    total = ex.ZERO
    for c, a in zip(POINT_COORDS, cur.components):
        total = total + ex.diff(a, c)
    char = X.eta
    for xic, a in zip(X.xi, _U1):
        char = char - xic * a
    total = total + el * char
    return fs.wire_potential(total)


# ---------------------------------------------------------------------------
# Current export
# ---------------------------------------------------------------------------


def current_to_dict(current: ConservedCurrent,
                    verdict: Optional[DivergenceReport] = None) -> dict:
    d = {
        "generator": current.generator,
        "source": current.source,
        "f": current.f_label,
        "components": [
            {"name": n, "infix": str(c), "latex": ex.to_latex(c)}
            for n, c in zip(current.component_names(), current.components)
        ],
    }
    if current.warning:
        d["warning"] = current.warning
    if verdict is not None:
        d["divergence_verdict"] = verdict.verdict.status.value
    return d


def export_currents_json(f_spec="arbitrary", include_gauge: Optional[bool] = None,
                         rng=None) -> str:
    """JSON export of the generated currents with their check verdicts."""
    from .liealg import isometry_generators
    fs = FSpec.parse(f_spec)
    if include_gauge is None:
        include_gauge = fs.linear_coefficient is not None
    entries = []
    for X in isometry_generators():
        cur = current_from_isometry(X, fs)
        entries.append(current_to_dict(cur, divergence_check(cur, fs, rng=rng)))
    if include_gauge:
        cur = current_from_gauge(fs)
        entries.append(current_to_dict(cur, divergence_check(cur, fs, rng=rng)))
    return json.dumps({"schema": 1, "f": fs.label, "currents": entries},
                      indent=2, sort_keys=True)
