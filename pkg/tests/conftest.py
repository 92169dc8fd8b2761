"""Shared test helpers: a random expression builder with a shadow evaluator.

The builder returns both a canonical Expr and an independent float evaluator
built from the raw construction tree, so canonicalisation can be checked
against straight floating-point arithmetic.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from spherewave import expr as ex

CORPUS_SEED = 8128

_LEAVES = [
    ("coord", "t"), ("coord", "x"), ("coord", "y"),
    ("jet", ""), ("jet", "t"), ("jet", "x"), ("jet", "y"),
    ("jet", "tt"), ("jet", "xx"), ("jet", "tx"),
    ("param", "c"), ("param", "k"),
    ("bfield", ""), ("bfield", "t"),
    ("const", None),
]


def random_point(rng: random.Random) -> dict:
    pt = {
        "t": rng.uniform(-2.0, 2.0),
        "x": rng.uniform(0.3, math.pi - 0.3),
        "y": rng.uniform(0.2, 2.0 * math.pi - 0.2),
    }
    for name in ("u", "u_t", "u_x", "u_y", "u_tt", "u_xx", "u_tx",
                 "c", "k", "b", "b_t"):
        pt[name] = rng.uniform(-2.0, 2.0)
    return pt


def random_expr(rng: random.Random, depth: int = 3):
    """Return (canonical Expr, shadow evaluator point->float)."""
    if depth == 0 or rng.random() < 0.25:
        kind, payload = _LEAVES[rng.randrange(len(_LEAVES))]
        if kind == "coord":
            return ex.coord(payload), (lambda p, n=payload: p[n])
        if kind == "jet":
            name = "u" + ("_" + payload if payload else "")
            return ex.jet("u", payload), (lambda p, n=name: p[n])
        if kind == "param":
            return ex.param_const(payload), (lambda p, n=payload: p[n])
        if kind == "bfield":
            name = "b" + ("_" + payload if payload else "")
            return ex.param_field("b", payload), (lambda p, n=name: p[n])
        q = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
        return ex.rational(q), (lambda p, v=float(q): v)

    op = rng.choice(["add", "sub", "mul", "mul", "pow", "sin", "cos", "inv"])
    a, fa = random_expr(rng, depth - 1)
    if op in ("add", "sub", "mul"):
        b, fb = random_expr(rng, depth - 1)
        if op == "add":
            return a + b, (lambda p: fa(p) + fb(p))
        if op == "sub":
            return a - b, (lambda p: fa(p) - fb(p))
        return a * b, (lambda p: fa(p) * fb(p))
    if op == "pow":
        n = rng.choice([2, 2, 3])
        return a ** n, (lambda p: fa(p) ** n)
    if op == "sin":
        return ex.sin_of(a), (lambda p: math.sin(fa(p)))
    if op == "cos":
        return ex.cos_of(a), (lambda p: math.cos(fa(p)))
    # inv: guard against dividing by the zero expression
    if a.is_zero_expr:
        return ex.ONE, (lambda p: 1.0)
    return a ** (-1), (lambda p: 1.0 / fa(p))


def corpus(n: int, depth: int = 3, seed: int = CORPUS_SEED):
    rng = random.Random(seed)
    return [random_expr(rng, depth) for _ in range(n)]
