"""Vector fields on jet space: prolongation, point-symmetry verification,
Lie brackets, commutator tables, structure constants and subalgebra closure.

The PDE under study is

    u_tt = u_xx + cot(x) u_x + (1/sin^2 x) u_yy + f(u)

and the solution manifold is always entered by eliminating u_tt.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from . import expr as ex
from .expr import Expr, ZeroResult, ZeroStatus
from .parser import parse

POINT_COORDS = ("t", "x", "y")


# ---------------------------------------------------------------------------
# The nonlinearity specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FSpec:
    """The nonlinearity f(u): opaque, zero, linear c*u, constant, or explicit."""

    f: Expr
    label: str

    @classmethod
    def parse(cls, spec: Union["FSpec", str, Expr, int, Fraction, None]) -> "FSpec":
        if isinstance(spec, FSpec):
            return spec
        if spec is None or spec == "arbitrary" or spec == "f":
            return cls(ex.param_func("f"), "arbitrary")
        if isinstance(spec, Expr):
            return cls(spec, str(spec))
        if isinstance(spec, (int, Fraction)):
            return cls(ex.rational(spec), str(spec))
        if spec in ("0", "zero"):
            return cls(ex.ZERO, "0")
        if spec == "linear":
            return cls(ex.param_const("c") * ex.U, "c*u")
        return cls(parse(spec), spec)

    @property
    def is_arbitrary(self) -> bool:
        return self.label == "arbitrary"

    @property
    def linear_coefficient(self) -> Optional[Expr]:
        """c such that f = c*u, if f has that shape."""
        quotient = self.f / ex.U if not self.f.is_zero_expr else ex.ZERO
        if not (set(map(str, quotient.atoms())) & {"u"}):
            dfdu = ex.partial_diff(self.f, "u")
            if self.f == dfdu * ex.U:
                return dfdu
        return None

    def potential(self) -> Expr:
        """F(u) with F' = f: explicit when f is polynomial-like, else opaque."""
        if self.is_arbitrary:
            return ex.param_func("F")
        if self.f.is_zero_expr:
            return ex.ZERO
        c = self.linear_coefficient
        if c is not None:
            return Fraction(1, 2) * c * ex.U ** 2
        if "u" not in {str(a) for a in self.f.atoms()}:
            return self.f * ex.U  # constant f
        return ex.param_func("F")

    def wire_potential(self, e: Expr) -> Expr:
        """Replace formal derivatives F^(n) by d^(n-1) f / du^(n-1)."""
        bindings = {}
        for a in e.atoms():
            if isinstance(a, ex.ParamFunc) and a.name == "F" and a.order >= 1:
                val = self.f
                for _ in range(a.order - 1):
                    val = ex.partial_diff(val, "u")
                bindings[a] = val
        return ex.substitute(e, bindings) if bindings else e


def wave_residual(f_spec="arbitrary", field: str = "u") -> Expr:
    """Delta = u_tt - u_xx - cot(x) u_x - (1/sin^2 x) u_yy - f(u)."""
    fs = FSpec.parse(f_spec)
    cot = ex.cos_of(ex.X) * ex.sin_of(ex.X) ** (-1)
    f_term = fs.f
    if field != "u":
        f_term = ex.substitute(f_term, {"u": ex.jet(field)})
    return (ex.jet(field, "tt") - ex.jet(field, "xx")
            - cot * ex.jet(field, "x")
            - ex.sin_of(ex.X) ** (-2) * ex.jet(field, "yy")
            - f_term)


def on_shell_bindings(f_spec="arbitrary") -> dict:
    """u_tt expressed through the equation, for solution-manifold reduction."""
    delta = wave_residual(f_spec)
    return {"u_tt": ex.jet("u", "tt") - delta}


def poisson_on_shell_bindings(f_spec="arbitrary") -> dict:
    """u_tt from the variational (Poisson) form Delta_g u + f = 0.

    This differs from the evolution form by the sign of f; the isometry
    currents are Noether currents of this form.  The two coincide for f = 0.
    """
    fs = FSpec.parse(f_spec)
    flipped = FSpec(-fs.f, fs.label)
    delta = wave_residual(flipped)
    return {"u_tt": ex.jet("u", "tt") - delta}


def gauge_constraint_bindings(f_spec="linear") -> dict:
    """b_tt from the constraint b_tt = b_xx + cot(x) b_x + b_yy/sin^2 x + c b."""
    fs = FSpec.parse(f_spec)
    c = fs.linear_coefficient
    if c is None:
        raise ex.ExprError("the gauge constraint needs a linear nonlinearity")
    cot = ex.cos_of(ex.X) * ex.sin_of(ex.X) ** (-1)
    rhs = (ex.param_field("b", "xx") + cot * ex.param_field("b", "x")
           + ex.sin_of(ex.X) ** (-2) * ex.param_field("b", "yy")
           + c * ex.param_field("b"))
    return {"b_tt": rhs}


# ---------------------------------------------------------------------------
# Vector fields and prolongation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorField:
    """xi^t d_t + xi^x d_x + xi^y d_y + eta d_u with coefficients in (t,x,y,u)."""

    xi: tuple[Expr, Expr, Expr]
    eta: Expr
    name: str = ""

    @classmethod
    def make(cls, xi_t=0, xi_x=0, xi_y=0, eta=0, name="") -> "VectorField":
        conv = lambda v: parse(v) if isinstance(v, str) else ex._coerce(v)
        return cls((conv(xi_t), conv(xi_x), conv(xi_y)), conv(eta), name)

    def components(self) -> tuple[Expr, Expr, Expr, Expr]:
        return (*self.xi, self.eta)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(a + b for a, b in zip(self.xi, other.xi)),
                           self.eta + other.eta)

    def __rmul__(self, scalar) -> "VectorField":
        s = ex._coerce(scalar) if not isinstance(scalar, Expr) else scalar
        return VectorField(tuple(s * c for c in self.xi), s * self.eta)

    def is_zero(self) -> bool:
        return all(c.is_zero_expr for c in self.components())

    def __str__(self):
        parts = []
        for c, v in zip(self.components(), ("d_t", "d_x", "d_y", "d_u")):
            if not c.is_zero_expr:
                parts.append(f"({c})*{v}")
        return " + ".join(parts) if parts else "0"


def preset_generator(name: str) -> VectorField:
    """Bundled generators S0..S4 and the gauge generator Sinf."""
    presets = {
        "S0": dict(xi_t=1, name="S0"),
        "S1": dict(xi_y=1, name="S1"),
        "S2": dict(xi_x="sin(y)", xi_y="cot(x)*cos(y)", name="S2"),
        "S3": dict(xi_x="cos(y)", xi_y="-cot(x)*sin(y)", name="S3"),
        "S4": dict(eta="u", name="S4"),
        "Sinf": dict(eta="b", name="Sinf"),
    }
    if name not in presets:
        raise ex.ExprError(f"unknown generator preset {name!r}")
    return VectorField.make(**presets[name])


def isometry_generators() -> tuple[VectorField, ...]:
    return tuple(preset_generator(n) for n in ("S0", "S1", "S2", "S3"))


def parse_generator_file(text: str) -> VectorField:
    """Generator definition file: ``name:``, ``xi_t:``, ``xi_x:``, ``xi_y:``,
    ``eta:`` lines, each right-hand side an expression string."""
    fields = {"name": ""}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rhs = line.partition(":")
        key = key.strip()
        if key not in ("name", "xi_t", "xi_x", "xi_y", "eta"):
            raise ex.ExprError(f"line {lineno}: unknown generator field {key!r}")
        fields[key] = rhs.strip()
    kwargs = {k: v for k, v in fields.items() if k != "name" and v}
    return VectorField.make(name=fields["name"], **kwargs)


@dataclass(frozen=True)
class ProlongedGenerator:
    base: VectorField
    eta1: dict            # coord -> Expr
    eta2: dict            # (ci, cj) sorted pair -> Expr
    order: int


def prolong(X: VectorField, order: int = 2) -> ProlongedGenerator:
    """Jet prolongation: eta^i = D_i eta - (D_i xi^j) u_j and its second-order
    analogue eta^{ij} = D_j eta^i - (D_j xi^k) u_{ik}."""
    if order not in (1, 2):
        raise ex.ExprError("prolongation implemented to order 2")
    eta1 = {}
    for ci in POINT_COORDS:
        val = ex.diff(X.eta, ci)
        for cj, xij in zip(POINT_COORDS, X.xi):
            val = val - ex.diff(xij, ci) * ex.jet("u", cj)
        eta1[ci] = val
    eta2 = {}
    if order == 2:
        for a, ci in enumerate(POINT_COORDS):
            for cj in POINT_COORDS[a:]:
                val = ex.diff(eta1[ci], cj)
                for ck, xik in zip(POINT_COORDS, X.xi):
                    val = val - ex.diff(xik, cj) * ex.jet("u", (ci, ck))
                eta2[(ci, cj)] = val
    return ProlongedGenerator(X, eta1, eta2, order)


def apply_prolonged(X: VectorField, target: Expr, order: int = 2) -> Expr:
    """X^(order) acting on an expression in jet atoms of order <= 2."""
    p = prolong(X, order)
    out = ex.ZERO
    for ci, xic in zip(POINT_COORDS, X.xi):
        out = out + xic * ex.partial_diff(target, ci)
    out = out + X.eta * ex.partial_diff(target, "u")
    for ci in POINT_COORDS:
        out = out + p.eta1[ci] * ex.partial_diff(target, ex.Jet("u", (ci,)))
    if order == 2:
        for pair, val in p.eta2.items():
            atom = ex.Jet("u", tuple(sorted(pair, key=POINT_COORDS.index)))
            out = out + val * ex.partial_diff(target, atom)
    return out


# ---------------------------------------------------------------------------
# Symmetry verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryReport:
    generator: str
    f_label: str
    residual: Expr
    verdict: ZeroResult

    @property
    def is_symmetry(self) -> bool:
        return self.verdict.status is ZeroStatus.PROVEN_ZERO


def symmetry_check(X: VectorField, f_spec="arbitrary", rng=None) -> SymmetryReport:
    """Infinitesimal invariance on the solution manifold.

    Computes X^(2)(Delta), eliminates u_tt through the equation, and reports
    the canonical residual together with its zero verdict.
    """
    fs = FSpec.parse(f_spec)
    delta = wave_residual(fs)
    res = apply_prolonged(X, delta, order=2)
    res = ex.substitute(res, on_shell_bindings(fs))
    return SymmetryReport(X.name or str(X), fs.label, res, ex.is_zero(res, rng=rng))


def shift_reduction_check(k=None) -> SymmetryReport:
    """The constant-forcing reduction u -> v + k t^2 / 2.

    Substituting into the equation with f = k must reproduce the f = 0
    equation for v; k may be symbolic (default) or an explicit rational.
    """
    k_expr = ex.param_const("k") if k is None else ex._coerce(k)
    delta_k = wave_residual(FSpec(k_expr, f"const {k_expr}"))
    phi = ex.jet("v") + Fraction(1, 2) * k_expr * ex.T ** 2
    bindings = {}
    for a in delta_k.atoms():
        if isinstance(a, ex.Jet) and a.field == "u":
            val = phi
            for c in a.index:
                val = ex.diff(val, c)
            bindings[a] = val
    reduced = ex.substitute(delta_k, bindings)
    target = wave_residual(FSpec(ex.ZERO, "0"), field="v")
    res = reduced - target
    verdict = ZeroResult(ZeroStatus.PROVEN_ZERO) if res.is_zero_expr else ex.is_zero(res)
    return SymmetryReport("u -> v + k t^2/2", f"k = {k_expr}", res, verdict)


# ---------------------------------------------------------------------------
# Determining system for a generic point-symmetry ansatz
# ---------------------------------------------------------------------------

ANSATZ_DEPS = ("t", "x", "y", "u")
ANSATZ_NAMES = ("xi0", "xi1", "xi2", "eta")


def _ansatz_field() -> VectorField:
    comps = [ex.atom_expr(ex.ParamField(n, (), ANSATZ_DEPS)) for n in ANSATZ_NAMES]
    return VectorField(tuple(comps[:3]), comps[3], "ansatz")


@dataclass(frozen=True)
class DeterminingSystem:
    equations: tuple[Expr, ...]
    monomials: tuple[str, ...]
    f_label: str

    def substitute_generator(self, X: VectorField) -> tuple[Expr, ...]:
        """Evaluate every coefficient equation on a concrete generator."""
        coeffs = dict(zip(ANSATZ_NAMES, (*X.xi, X.eta)))
        out = []
        for eq in self.equations:
            bindings = {}
            for a in eq.atoms():
                if isinstance(a, ex.ParamField) and a.name in coeffs:
                    val = coeffs[a.name]
                    for v in a.index:
                        val = ex.partial_diff(val, v)
                    bindings[a] = val
            out.append(ex.substitute(eq, bindings))
        return tuple(out)


def determining_system(f_spec="arbitrary") -> DeterminingSystem:
    """Coefficient equations of the point-symmetry condition.

    The invariance condition for the generic ansatz xi^i(t,x,y,u),
    eta(t,x,y,u) is reduced modulo the equation and collected by monomials in
    the derivative atoms; each returned expression must vanish identically
    for a symmetry.  Solving the system is out of scope; candidates are
    verified by substitution.
    """
    fs = FSpec.parse(f_spec)
    delta = wave_residual(fs)
    res = apply_prolonged(_ansatz_field(), delta, order=2)
    res = ex.substitute(res, on_shell_bindings(fs))
    groups: dict = {}
    for mono, coeff in res.terms:
        jet_part = tuple((a, n) for a, n in mono
                         if isinstance(a, ex.Jet) and a.index)
        rest = tuple((a, n) for a, n in mono
                     if not (isinstance(a, ex.Jet) and a.index))
        groups.setdefault(jet_part, {})[rest] = \
            groups.get(jet_part, {}).get(rest, Fraction(0)) + coeff
    eqs = []
    monos = []
    for jet_part in sorted(groups, key=lambda jp: tuple((a.key(), n) for a, n in jp)):
        eqs.append(ex._normalize(groups[jet_part]))
        monos.append("*".join(f"{a}^{n}" if n != 1 else str(a)
                              for a, n in jet_part) or "1")
    return DeterminingSystem(tuple(eqs), tuple(monos), fs.label)


# ---------------------------------------------------------------------------
# Brackets, commutator tables, subalgebras
# ---------------------------------------------------------------------------


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y]^a = X^b d_b Y^a - Y^b d_b X^a over the variables (t, x, y, u)."""
    variables = (*POINT_COORDS, "u")
    xc, yc = X.components(), Y.components()
    out = []
    for a in range(4):
        comp = ex.ZERO
        for b, v in enumerate(variables):
            comp = comp + xc[b] * ex.partial_diff(yc[a], v)
            comp = comp - yc[b] * ex.partial_diff(xc[a], v)
        out.append(comp)
    return VectorField(tuple(out[:3]), out[3])


def _coeff_vector(X: VectorField) -> dict:
    vec = {}
    for ci, comp in enumerate(X.components()):
        for mono, c in comp.terms:
            vec[(ci, tuple((a.key(), n) for a, n in mono))] = c
    return vec


def _solve_exact(columns: list[dict], target: dict) -> Optional[list[Fraction]]:
    """Solve sum_m c_m * columns[m] = target over the rationals, if possible."""
    keys = sorted(set().union(*columns, target))
    rows = [[col.get(k, Fraction(0)) for col in columns] + [target.get(k, Fraction(0))]
            for k in keys]
    ncols = len(columns)
    pivot_rows = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        factor = rows[r][c]
        rows[r] = [v / factor for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [vi - f * vr for vi, vr in zip(rows[i], rows[r])]
        pivot_rows.append((r, c))
        r += 1
    for i in range(len(rows)):
        if all(v == 0 for v in rows[i][:ncols]) and rows[i][ncols]:
            return None
    sol = [Fraction(0)] * ncols
    for rr, cc in pivot_rows:
        sol[cc] = rows[rr][ncols]
    return sol


@dataclass(frozen=True)
class AlgebraTable:
    fields: tuple[VectorField, ...]
    structure: dict        # (i, j) with i < j -> tuple of Fractions
    unresolved: dict       # (i, j) -> VectorField outside the span

    @property
    def dim(self) -> int:
        return len(self.fields)

    @property
    def closed(self) -> bool:
        return not self.unresolved

    def c(self, i: int, j: int, k: int) -> Fraction:
        if i == j:
            return Fraction(0)
        if i < j:
            return self.structure.get((i, j), (Fraction(0),) * self.dim)[k]
        return -self.c(j, i, k)

    def jacobi_ok(self) -> bool:
        if not self.closed:
            return False
        n = self.dim
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for m in range(n):
                        total = Fraction(0)
                        for l in range(n):
                            total += (self.c(j, k, l) * self.c(i, l, m)
                                      + self.c(k, i, l) * self.c(j, l, m)
                                      + self.c(i, j, l) * self.c(k, l, m))
                        if total:
                            return False
        return True

    def killing_form(self, indices: Optional[Sequence[int]] = None):
        idx = list(indices) if indices is not None else list(range(self.dim))
        K = []
        for i in idx:
            row = []
            for j in idx:
                total = Fraction(0)
                for m in idx:
                    for n_ in idx:
                        total += self.c(i, n_, m) * self.c(j, m, n_)
                row.append(total)
            K.append(row)
        return K

    def central_indices(self) -> list[int]:
        return [i for i in range(self.dim)
                if all(self.c(i, j, k) == 0
                       for j in range(self.dim) for k in range(self.dim))]


def commutator_table(fields: Sequence[VectorField]) -> AlgebraTable:
    """All pairwise brackets resolved against the span by exact elimination."""
    fields = tuple(fields)
    if not fields:
        raise ex.ExprError("commutator table needs at least one field")
    columns = [_coeff_vector(X) for X in fields]
    structure = {}
    unresolved = {}
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            z = lie_bracket(fields[i], fields[j])
            if z.is_zero():
                structure[(i, j)] = tuple(Fraction(0) for _ in fields)
                continue
            sol = _solve_exact(columns, _coeff_vector(z))
            if sol is None:
                unresolved[(i, j)] = z
            else:
                structure[(i, j)] = tuple(sol)
    return AlgebraTable(fields, structure, unresolved)


def _negative_definite(K) -> bool:
    """Sylvester test on an exact rational symmetric matrix."""
    n = len(K)
    for lead in range(1, n + 1):
        minor = [row[:lead] for row in K[:lead]]
        det = _det_fraction(minor)
        if (lead % 2 == 1 and det >= 0) or (lead % 2 == 0 and det <= 0):
            return False
    return True


def _det_fraction(m) -> Fraction:
    n = len(m)
    if n == 1:
        return m[0][0]
    total = Fraction(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        sign = 1 if j % 2 == 0 else -1
        total += sign * m[0][j] * _det_fraction(minor)
    return total


@dataclass(frozen=True)
class SubalgebraReport:
    name: str
    table: AlgebraTable
    closed: bool
    tag: str

    @property
    def dim(self) -> int:
        return self.table.dim


def classify_table(table: AlgebraTable) -> str:
    """Abelian / so(3) tagging from the structure constants."""
    if not table.closed:
        return "not closed"
    center = table.central_indices()
    n_central = len(center)
    rest = [i for i in range(table.dim) if i not in center]
    if not rest:
        return "A1" if table.dim == 1 else f"{table.dim}A1"
    block_is_subalgebra = all(
        table.c(i, j, k) == 0
        for i in rest for j in rest for k in center)
    if len(rest) == 3 and block_is_subalgebra \
            and _negative_definite(table.killing_form(rest)):
        tag = "A3,9"
        if n_central == 1:
            tag += "+A1"
        elif n_central > 1:
            tag += f"+{n_central}A1"
        return tag
    return "unclassified"


def subalgebra_check(fields: Sequence[VectorField], name: str = "") -> SubalgebraReport:
    table = commutator_table(fields)
    return SubalgebraReport(name, table, table.closed, classify_table(table))
