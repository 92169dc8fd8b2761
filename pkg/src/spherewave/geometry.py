"""Tensor calculus on a coordinate chart with symbolic metric components.

Curvature conventions (attached to every CurvatureBundle):

    R^i_jks = d_k Gamma^i_sj - d_s Gamma^i_kj
              + Gamma^i_kl Gamma^l_sj - Gamma^i_sl Gamma^l_kj
    Ricci_ij = R^k_ikj,   R = g^ij Ricci_ij

sqrt|det g| is taken with the orientation that makes it sin(x) on the
product chart ``s2xr`` for x in (0, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import expr as ex
from .expr import Expr, ZeroResult, ZeroStatus
from .parser import parse

CONVENTION = ("R^i_jks = d_k G^i_sj - d_s G^i_kj + G^i_kl G^l_sj - G^i_sl G^l_kj; "
              "Ricci_ij = R^k_ikj; R = g^ij Ricci_ij; sqrt|g| oriented positive")


class MetricError(ex.ExprError):
    pass


class DegeneratePlaneError(ValueError):
    pass


def _sqrt_abs(e: Expr) -> Expr:
    """Symbolic sqrt of |e| for single-term expressions with even exponents."""
    if len(e.terms) != 1:
        raise MetricError("cannot take sqrt of a multi-term determinant")
    mono, coeff = e.terms[0]
    c = abs(coeff)
    num_r = math.isqrt(c.numerator)
    den_r = math.isqrt(c.denominator)
    if num_r * num_r != c.numerator or den_r * den_r != c.denominator:
        raise MetricError(f"determinant coefficient {c} is not a perfect square")
    half = []
    for a, n in mono:
        if n % 2:
            raise MetricError(f"odd exponent on {a} in determinant")
        half.append((a, n // 2))
    return ex.Expr(((tuple(half), Fraction(num_r, den_r)),))


def _det3(m) -> Expr:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _inverse(m, det: Expr):
    n = len(m)
    if n == 1:
        return ((1 / det,),)
    if n == 2:
        return ((m[1][1] / det, -m[0][1] / det),
                (-m[1][0] / det, m[0][0] / det))
    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            rows = [r for r in range(3) if r != i]
            cols = [c for c in range(3) if c != j]
            minor = (m[rows[0]][cols[0]] * m[rows[1]][cols[1]]
                     - m[rows[0]][cols[1]] * m[rows[1]][cols[0]])
            sign = 1 if (i + j) % 2 == 0 else -1
            cof[j][i] = sign * minor / det  # adjugate transpose
    return tuple(tuple(row) for row in cof)


class ChartMetric:
    """A coordinate chart plus symbolic metric components.

    The inverse and sqrt|det g| are computed once at construction and are
    never mutated afterwards.
    """

    def __init__(self, coords: Sequence[str], g: Sequence[Sequence[Expr]],
                 name: str = ""):
        self.name = name
        self.coords = tuple(coords)
        n = len(self.coords)
        for c in self.coords:
            if c not in ex.COORDS:
                raise MetricError(f"unsupported coordinate {c!r}")
        g = tuple(tuple(ex._coerce(gij) for gij in row) for row in g)
        if len(g) != n or any(len(row) != n for row in g):
            raise MetricError("metric shape does not match coordinates")
        for i in range(n):
            for j in range(i):
                if g[i][j] != g[j][i]:
                    raise MetricError("metric components must be symmetric")
        self.g = g
        self.det = _det3(g)
        if self.det.is_zero_expr:
            raise MetricError("metric is degenerate")
        self.ginv = _inverse(g, self.det)
        self._sqrt_det = None
        self._spot_check_inverse()

    @property
    def sqrt_det(self) -> Expr:
        """sqrt|det g|, computed once on first use (its closed form may not
        exist for rescaled test metrics that never take volume integrals)."""
        if self._sqrt_det is None:
            self._sqrt_det = _sqrt_abs(self.det)
        return self._sqrt_det

    @property
    def dim(self) -> int:
        return len(self.coords)

    def _spot_check_inverse(self):
        # g^ik g_kj == delta^i_j, symbolically where the canonical form can
        # cancel it, otherwise numerically at sample points
        residuals = []
        for i in range(self.dim):
            for j in range(self.dim):
                s = ex.ZERO
                for k in range(self.dim):
                    s = s + self.ginv[i][k] * self.g[k][j]
                want = ex.ONE if i == j else ex.ZERO
                if s != want:
                    residuals.append(s - want)
        if not residuals:
            return
        points = [{"t": 0.3, "x": 0.9, "y": 1.7}, {"t": -1.1, "x": 2.0, "y": 4.0},
                  {"t": 0.7, "x": 1.4, "y": 0.2}]
        for r in residuals:
            for pt in points:
                try:
                    val = ex.eval_numeric(r, pt)
                except ex.EvaluationError:
                    continue
                if abs(val) > 1e-9:
                    raise MetricError("inverse spot-check failed: metric is "
                                      "not invertible on this chart")
                break
            else:
                raise MetricError("inverse spot-check could not evaluate")

    def evaluator(self):
        """Callable point -> list of metric component values (row major)."""
        coords = self.coords
        g = self.g

        def gfun(point):
            vals = {c: point[i] for i, c in enumerate(coords)}
            return [[ex.eval_numeric(g[i][j], vals) for j in range(len(coords))]
                    for i in range(len(coords))]

        return gfun


@dataclass(frozen=True)
class CurvatureBundle:
    metric: ChartMetric
    christoffel: tuple     # [k][i][j]
    riemann: tuple         # [i][j][k][s]
    ricci: tuple           # [i][j]
    scalar: Expr
    convention: str = CONVENTION


def christoffel(m: ChartMetric):
    """Levi-Civita connection coefficients Gamma^k_ij, symmetric in (i, j)."""
    n = m.dim
    cs = m.coords
    out = []
    for k in range(n):
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                s = ex.ZERO
                for l in range(n):
                    s = s + m.ginv[k][l] * (
                        ex.diff(m.g[l][j], cs[i])
                        + ex.diff(m.g[l][i], cs[j])
                        - ex.diff(m.g[i][j], cs[l]))
                row.append(Fraction(1, 2) * s)
            rows.append(tuple(row))
        out.append(tuple(rows))
    return tuple(out)


def curvature(m: ChartMetric) -> CurvatureBundle:
    n = m.dim
    cs = m.coords
    gam = christoffel(m)
    riem = []
    for i in range(n):
        bi = []
        for j in range(n):
            bj = []
            for k in range(n):
                bk = []
                for s in range(n):
                    r = ex.diff(gam[i][s][j], cs[k]) - ex.diff(gam[i][k][j], cs[s])
                    for l in range(n):
                        r = r + gam[i][k][l] * gam[l][s][j] \
                              - gam[i][s][l] * gam[l][k][j]
                    bk.append(r)
                bj.append(tuple(bk))
            bi.append(tuple(bj))
        riem.append(tuple(bi))
    riem = tuple(riem)
    ricci = tuple(tuple(
        sum((riem[k][i][k][j] for k in range(n)), ex.ZERO)
        for j in range(n)) for i in range(n))
    scalar = ex.ZERO
    for i in range(n):
        for j in range(n):
            scalar = scalar + m.ginv[i][j] * ricci[i][j]
    return CurvatureBundle(m, gam, riem, ricci, scalar)


def riemann(m: ChartMetric):
    return curvature(m).riemann


def ricci(m: ChartMetric):
    return curvature(m).ricci


def scalar_curvature(m: ChartMetric) -> Expr:
    return curvature(m).scalar


def sectional_curvature(m: ChartMetric, point, X, Y,
                        bundle: Optional[CurvatureBundle] = None,
                        tol: float = 1e-12) -> float:
    """K(p, X, Y) for numeric vectors X, Y at a numeric point.

    K = R_ijkl X^i Y^j X^k Y^l / (g(X,X) g(Y,Y) - g(X,Y)^2), with the first
    index lowered by the metric.
    """
    n = m.dim
    if bundle is None:
        bundle = curvature(m)
    if isinstance(point, Mapping):
        vals = {c: float(point[c]) for c in m.coords}
    else:
        vals = {c: point[i] for i, c in enumerate(m.coords)}
    gnum = [[ex.eval_numeric(m.g[i][j], vals) for j in range(n)] for i in range(n)]
    rnum = [[[[ex.eval_numeric(bundle.riemann[i][j][k][s], vals)
               for s in range(n)] for k in range(n)] for j in range(n)]
            for i in range(n)]
    # lower the first index
    rlow = [[[[sum(gnum[i][mm] * rnum[mm][j][k][s] for mm in range(n))
               for s in range(n)] for k in range(n)] for j in range(n)]
            for i in range(n)]
    num = 0.0
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for s in range(n):
                    num += rlow[i][j][k][s] * X[i] * Y[j] * X[k] * Y[s]
    gXX = sum(gnum[i][j] * X[i] * X[j] for i in range(n) for j in range(n))
    gYY = sum(gnum[i][j] * Y[i] * Y[j] for i in range(n) for j in range(n))
    gXY = sum(gnum[i][j] * X[i] * Y[j] for i in range(n) for j in range(n))
    den = gXX * gYY - gXY ** 2
    if abs(den) < tol:
        raise DegeneratePlaneError("plane span(X, Y) is degenerate at this point")
    return num / den


def laplace_beltrami(m: ChartMetric, field: str = "u") -> Expr:
    """(1/sqrt|g|) d_i ( sqrt|g| g^ij d_j u ) as an expression in jet atoms."""
    out = ex.ZERO
    for i, ci in enumerate(m.coords):
        inner = ex.ZERO
        for j, cj in enumerate(m.coords):
            inner = inner + m.sqrt_det * m.ginv[i][j] * ex.jet(field, cj)
        out = out + ex.diff(inner, ci)
    return out / m.sqrt_det


def lie_derivative_metric(m: ChartMetric, xi: Sequence[Expr]):
    """(L_X g)_ij = xi^s d_s g_ij + g_kj d_i xi^k + g_ik d_j xi^k."""
    n = m.dim
    if len(xi) != n:
        raise MetricError("vector field dimension does not match the chart")
    xi = [ex._coerce(c) for c in xi]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            comp = ex.ZERO
            for s in range(n):
                comp = comp + xi[s] * ex.partial_diff(m.g[i][j], m.coords[s])
                comp = comp + m.g[s][j] * ex.partial_diff(xi[s], m.coords[i])
                comp = comp + m.g[i][s] * ex.partial_diff(xi[s], m.coords[j])
            row.append(comp)
        out.append(tuple(row))
    return tuple(out)


@dataclass(frozen=True)
class KillingReport:
    name: str
    components: tuple            # (L_X g)_ij expressions, i <= j
    verdicts: tuple              # matching ZeroResult per component
    is_killing: bool
    undecided: bool


def killing_check(m: ChartMetric, xi: Sequence[Expr], name: str = "",
                  rng=None) -> KillingReport:
    lie = lie_derivative_metric(m, xi)
    comps = []
    verdicts = []
    for i in range(m.dim):
        for j in range(i, m.dim):
            comps.append(lie[i][j])
            verdicts.append(ex.is_zero(lie[i][j], rng=rng))
    is_killing = all(v.status is ZeroStatus.PROVEN_ZERO for v in verdicts)
    undecided = any(v.status is ZeroStatus.UNDECIDED for v in verdicts)
    return KillingReport(name, tuple(comps), tuple(verdicts), is_killing, undecided)


# ---------------------------------------------------------------------------
# Presets and the metric file format
# ---------------------------------------------------------------------------

def preset_metric(name: str) -> ChartMetric:
    """Bundled charts: s2xr, sphere2, euclidean2, euclidean3, minkowski3."""
    if name == "s2xr":
        return ChartMetric(
            ("t", "x", "y"),
            ((ex.ONE, ex.ZERO, ex.ZERO),
             (ex.ZERO, ex.rational(-1), ex.ZERO),
             (ex.ZERO, ex.ZERO, -ex.sin_of(ex.X) ** 2)),
            name="s2xr")
    if name == "sphere2":
        return ChartMetric(
            ("x", "y"),
            ((ex.ONE, ex.ZERO),
             (ex.ZERO, ex.sin_of(ex.X) ** 2)),
            name="sphere2")
    if name == "euclidean2":
        return ChartMetric(("x", "y"),
                           ((ex.ONE, ex.ZERO), (ex.ZERO, ex.ONE)),
                           name="euclidean2")
    if name == "euclidean3":
        return ChartMetric(
            ("t", "x", "y"),
            ((ex.ONE, ex.ZERO, ex.ZERO),
             (ex.ZERO, ex.ONE, ex.ZERO),
             (ex.ZERO, ex.ZERO, ex.ONE)),
            name="euclidean3")
    if name == "minkowski3":
        return ChartMetric(
            ("t", "x", "y"),
            ((ex.ONE, ex.ZERO, ex.ZERO),
             (ex.ZERO, ex.rational(-1), ex.ZERO),
             (ex.ZERO, ex.ZERO, ex.rational(-1))),
            name="minkowski3")
    raise MetricError(f"unknown metric preset {name!r}")


def parse_metric_file(text: str, name: str = "") -> ChartMetric:
    """Plain-text metric definition.

    Format: a ``coords:`` line followed by lower-triangular entries::

        coords: t x y
        g t t: 1
        g x x: -1
        g y y: -sin(x)^2

    Omitted entries are zero.  Lines starting with ``#`` are comments.
    """
    coords = None
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("coords:"):
            coords = tuple(line[len("coords:"):].split())
            continue
        if line.startswith("g "):
            head, _, rhs = line.partition(":")
            parts = head.split()
            if len(parts) != 3 or not rhs.strip():
                raise MetricError(f"line {lineno}: expected 'g  i j: expr'")
            entries[(parts[1], parts[2])] = parse(rhs.strip())
            continue
        raise MetricError(f"line {lineno}: unrecognised directive {line!r}")
    if coords is None:
        raise MetricError("metric file is missing a 'coords:' line")
    n = len(coords)
    g = [[ex.ZERO] * n for _ in range(n)]
    for (ci, cj), e in entries.items():
        if ci not in coords or cj not in coords:
            raise MetricError(f"metric entry uses unknown coordinate ({ci},{cj})")
        i, j = coords.index(ci), coords.index(cj)
        g[i][j] = e
        g[j][i] = e
    return ChartMetric(coords, g, name=name)
