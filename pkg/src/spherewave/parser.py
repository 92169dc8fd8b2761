"""Infix expression parser.

Grammar (documented in docs/grammar.md):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := primary ('^' exponent)?          # right-hand side literal only
    exponent:= INT | '(' ('-')? INT ')'
    primary := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'

Numbers are exact: integers and decimal literals become Fractions.  The
functions sin, cos, ln are primitive; tan, cot, sec, csc are rewritten into
sin/cos at parse time.  Identifiers follow the symbol conventions of
:mod:`spherewave.expr` (``u_tx``, ``b_t``, ``F'``, ``c``...).
"""

from __future__ import annotations

from fractions import Fraction

from . import expr as ex
from .expr import Expr, UnknownSymbolError


class ParseError(ex.ExprError):
    """Syntax error carrying the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_FUNCTIONS = ("sin", "cos", "ln", "tan", "cot", "sec", "csc")


def _tokenize(text: str):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                seen_dot = seen_dot or text[j] == "."
                j += 1
            tokens.append(("num", text[i:j], i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            while j < n and text[j] == "'":
                j += 1
            name = text[i:j]
            if name.endswith("_"):
                raise ParseError(f"malformed identifier {name!r}", i)
            tokens.append(("ident", name, i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens, extra_params: frozenset[str]):
        self.tokens = tokens
        self.pos = 0
        self.extra_params = extra_params

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def parse_expr(self) -> Expr:
        e = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            rhs = self.parse_term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def parse_term(self) -> Expr:
        e = self.parse_unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            rhs = self.parse_unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def parse_unary(self) -> Expr:
        if self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            e = self.parse_unary()
            return e if op == "+" else -e
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_primary()
        if self.peek()[0] != "^":
            return base
        self.advance()
        return base ** self.parse_exponent()

    def parse_exponent(self) -> int:
        tok = self.peek()
        if tok[0] == "(":
            self.advance()
            sign = 1
            if self.peek()[0] in ("+", "-"):
                sign = -1 if self.advance()[0] == "-" else 1
            num = self.expect("num")
            self.expect(")")
            return sign * self._int_value(num)
        if tok[0] == "-":
            self.advance()
            return -self._int_value(self.expect("num"))
        if tok[0] == "num":
            return self._int_value(self.advance())
        raise ParseError("exponent must be an integer literal", tok[2])

    @staticmethod
    def _int_value(tok) -> int:
        if "." in tok[1]:
            raise ParseError("exponent must be an integer", tok[2])
        return int(tok[1])

    def parse_primary(self) -> Expr:
        tok = self.advance()
        kind, value, offset = tok
        if kind == "num":
            return ex.rational(Fraction(value))
        if kind == "(":
            e = self.parse_expr()
            self.expect(")")
            return e
        if kind == "ident":
            if value in _FUNCTIONS and self.peek()[0] == "(":
                self.advance()
                arg = self.parse_expr()
                self.expect(")")
                return _apply_function(value, arg)
            if value in _FUNCTIONS:
                raise ParseError(f"function {value!r} needs an argument list", offset)
            try:
                return ex.atom_expr(ex.resolve_symbol(value, self.extra_params))
            except UnknownSymbolError as err:
                err.offset = offset
                raise ParseError(f"unknown identifier {value!r}", offset) from err
        raise ParseError(f"unexpected token {value!r}", offset)


def _apply_function(name: str, arg: Expr) -> Expr:
    if name == "sin":
        return ex.sin_of(arg)
    if name == "cos":
        return ex.cos_of(arg)
    if name == "ln":
        return ex.ln_of(arg)
    if name == "tan":
        return ex.sin_of(arg) * ex.cos_of(arg) ** (-1)
    if name == "cot":
        return ex.cos_of(arg) * ex.sin_of(arg) ** (-1)
    if name == "sec":
        return ex.cos_of(arg) ** (-1)
    return ex.sin_of(arg) ** (-1)  # csc


def parse(text: str, params: frozenset[str] | set[str] = frozenset()) -> Expr:
    """Parse an infix expression string into a canonical Expr."""
    parser = _Parser(_tokenize(text), frozenset(params))
    e = parser.parse_expr()
    parser.expect("end")
    return e
