"""Parsing and evaluation of planar-map formulas.

Formulas are classic infix expressions over the variables ``x``, ``y`` and
``t`` with a closed whitelist of functions (``sin cos tan atan exp ln sqrt
abs``) and named constants (``pi``, ``e``).  ``^`` is exponentiation and is
right-associative.  Besides plain evaluation, every parsed expression can be
evaluated on dual numbers, which yields first derivatives with respect to
``x`` and ``y`` that are exact to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expression",
    "Dual",
    "ExpressionSyntaxError",
    "UnknownIdentifierError",
    "EvalDomainError",
    "parse",
    "evaluate",
    "evaluate_dual",
]

FUNCTIONS = ("sin", "cos", "tan", "atan", "exp", "ln", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLES = ("x", "y", "t")


class ExpressionSyntaxError(ValueError):
    """Raised when a formula cannot be parsed.

    ``offset`` is the byte offset of the offending character and ``expected``
    the set of token kinds that would have been legal there.
    """

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected: " + ", ".join(expected) + ")"
        super().__init__(detail)


class UnknownIdentifierError(ExpressionSyntaxError):
    """Raised for identifiers outside the whitelist."""

    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown identifier '{name}'", offset)


class EvalDomainError(ArithmeticError):
    """Raised when evaluation leaves the real domain (ln of a non-positive
    number, sqrt of a negative, fractional power of a negative base, division
    by zero)."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = 0


@dataclass(frozen=True)
class NamedConst:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class Var:
    name: str
    pos: int = 0


@dataclass(frozen=True)
class Neg:
    child: object
    pos: int = 0


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object
    pos: int = 0


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object
    pos: int = 0


def _same_tree(a, b) -> bool:
    """Structural equality ignoring source positions."""
    if type(a) is not type(b):
        return False
    if isinstance(a, Num):
        return a.value == b.value or (math.isnan(a.value) and math.isnan(b.value))
    if isinstance(a, NamedConst):
        return a.name == b.name
    if isinstance(a, Var):
        return a.name == b.name
    if isinstance(a, Neg):
        return _same_tree(a.child, b.child)
    if isinstance(a, Bin):
        return a.op == b.op and _same_tree(a.left, b.left) and _same_tree(a.right, b.right)
    if isinstance(a, Call):
        return a.fn == b.fn and _same_tree(a.arg, b.arg)
    raise TypeError(f"not an AST node: {a!r}")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_OPS = "+-*/^()"


@dataclass(frozen=True)
class _Token:
    kind: str  # 'num', 'ident', one of _OPS, or 'end'
    text: str
    pos: int


def _tokenize(src: str) -> list[_Token]:
    out = []
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c in _OPS:
            out.append(_Token(c, c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            try:
                float(text)
            except ValueError:
                raise ExpressionSyntaxError(f"malformed number '{text}'", i) from None
            out.append(_Token("num", text, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            out.append(_Token("ident", src[i:j], i))
            i = j
            continue
        raise ExpressionSyntaxError(f"unexpected character {c!r}", i)
    out.append(_Token("end", "", n))
    return out


# ---------------------------------------------------------------------------
# Recursive-descent parser
#
# expr   := term (('+'|'-') term)*
# term   := factor (('*'|'/') factor)*
# factor := '-' factor | power
# power  := atom ('^' factor)?            (right-associative)
# atom   := number | name | name '(' expr ')' | '(' expr ')'
# ---------------------------------------------------------------------------


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def take(self) -> _Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ExpressionSyntaxError(
                f"unexpected {tok.kind!r}" if tok.kind != "end" else "unexpected end of input",
                tok.pos,
                expected=(kind,),
            )
        return self.take()

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(
                f"trailing input {tok.text!r}", tok.pos, expected=("operator", "end")
            )
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.take()
            node = Bin(op.kind, node, self.term(), op.pos)
        return node

    def term(self):
        node = self.factor()
        while self.peek().kind in ("*", "/"):
            op = self.take()
            node = Bin(op.kind, node, self.factor(), op.pos)
        return node

    def factor(self):
        tok = self.peek()
        if tok.kind == "-":
            self.take()
            return Neg(self.factor(), tok.pos)
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok.kind == "^":
            self.take()
            return Bin("^", base, self.factor(), tok.pos)
        return base

    def atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text), tok.pos)
        if tok.kind == "ident":
            self.take()
            name = tok.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg, tok.pos)
            if name in CONSTANTS:
                return NamedConst(name, tok.pos)
            if name in VARIABLES:
                return Var(name, tok.pos)
            raise UnknownIdentifierError(name, tok.pos)
        if tok.kind == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        raise ExpressionSyntaxError(
            "unexpected end of input" if tok.kind == "end" else f"unexpected {tok.text!r}",
            tok.pos,
            expected=("number", "identifier", "(", "-"),
        )


# ---------------------------------------------------------------------------
# Pretty printer (round-trip stable: parse(pretty(parse(s))) == parse(s))
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 10, 20, 25, 30, 100


def _prec(node) -> int:
    if isinstance(node, (Num, NamedConst, Var, Call)):
        return _PREC_ATOM
    if isinstance(node, Neg):
        return _PREC_NEG
    return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]


def _render(node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, NamedConst):
        return node.name
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({_render(node.arg)})"
    if isinstance(node, Neg):
        inner = _render(node.child)
        if _prec(node.child) < _PREC_NEG:
            inner = f"({inner})"
        return f"-{inner}"
    left, right = _render(node.left), _render(node.right)
    p = _prec(node)
    if node.op == "^":
        # right-associative: parenthesize a left child of equal-or-lower
        # precedence, including unary minus ((-x)^2 versus -x^2)
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < p:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        # the right child is parenthesized on ties so the printed string
        # re-parses to the same (left-leaning) tree shape
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left}{node.op}{right}"


# ---------------------------------------------------------------------------
# Dual numbers: value plus partial derivatives with respect to x and y
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dual:
    v: object
    dx: object = 0.0
    dy: object = 0.0

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.v + other.v, self.dx + other.dx, self.dy + other.dy)
        return Dual(self.v + other, self.dx, self.dy)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.v - other.v, self.dx - other.dx, self.dy - other.dy)
        return Dual(self.v - other, self.dx, self.dy)

    def __rsub__(self, other):
        return Dual(other - self.v, -self.dx, -self.dy)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.v * other.v,
                self.dx * other.v + self.v * other.dx,
                self.dy * other.v + self.v * other.dy,
            )
        return Dual(self.v * other, self.dx * other, self.dy * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.v
            q = self.v * inv
            return Dual(q, (self.dx - q * other.dx) * inv, (self.dy - q * other.dy) * inv)
        return Dual(self.v / other, self.dx / other, self.dy / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.v
        q = other * inv
        return Dual(q, -q * self.dx * inv, -q * self.dy * inv)

    def __neg__(self):
        return Dual(-self.v, -self.dx, -self.dy)


def _as_dual(z) -> Dual:
    return z if isinstance(z, Dual) else Dual(z)


def _d_sin(a) -> Dual:
    a = _as_dual(a)
    c = np.cos(a.v)
    return Dual(np.sin(a.v), c * a.dx, c * a.dy)


def _d_cos(a) -> Dual:
    a = _as_dual(a)
    s = -np.sin(a.v)
    return Dual(np.cos(a.v), s * a.dx, s * a.dy)


def _d_tan(a) -> Dual:
    a = _as_dual(a)
    t = np.tan(a.v)
    d = 1.0 + t * t
    return Dual(t, d * a.dx, d * a.dy)


def _d_atan(a) -> Dual:
    a = _as_dual(a)
    d = 1.0 / (1.0 + a.v * a.v)
    return Dual(np.arctan(a.v), d * a.dx, d * a.dy)


def _d_exp(a) -> Dual:
    a = _as_dual(a)
    v = np.exp(a.v)
    return Dual(v, v * a.dx, v * a.dy)


def _d_ln(a) -> Dual:
    a = _as_dual(a)
    d = 1.0 / a.v
    return Dual(np.log(a.v), d * a.dx, d * a.dy)


def _d_sqrt(a) -> Dual:
    a = _as_dual(a)
    v = np.sqrt(a.v)
    d = 0.5 / v
    return Dual(v, d * a.dx, d * a.dy)


def _d_abs(a) -> Dual:
    a = _as_dual(a)
    s = np.sign(a.v)
    return Dual(np.abs(a.v), s * a.dx, s * a.dy)


def _d_pow(a, b) -> Dual:
    a, b = _as_dual(a), _as_dual(b)
    b_const = np.all(np.equal(b.dx, 0.0)) and np.all(np.equal(b.dy, 0.0))
    if b_const:
        v = np.power(a.v, b.v)
        d = b.v * np.power(a.v, b.v - 1.0)
        return Dual(v, d * a.dx, d * a.dy)
    # general a^b needs a > 0; outside that domain the value path already
    # produces nan, which callers surface as a located domain error
    v = np.power(a.v, b.v)
    ln_a = np.log(a.v)
    return Dual(
        v,
        v * (b.dx * ln_a + b.v * a.dx / a.v),
        v * (b.dy * ln_a + b.v * a.dy / a.v),
    )


_DUAL_FUNCS = {
    "sin": _d_sin,
    "cos": _d_cos,
    "tan": _d_tan,
    "atan": _d_atan,
    "exp": _d_exp,
    "ln": _d_ln,
    "sqrt": _d_sqrt,
    "abs": _d_abs,
}

_VALUE_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "atan": np.arctan,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}


# ---------------------------------------------------------------------------
# Compilation: each AST is rendered once into a Python lambda over numpy
# primitives (works on scalars and arrays alike), plus a dual-number twin.
# Sources are built purely from whitelisted nodes.
# ---------------------------------------------------------------------------


def _emit(node, dual: bool) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, NamedConst):
        return repr(CONSTANTS[node.name])
    if isinstance(node, Var):
        return {"x": "X", "y": "Y", "t": "T"}[node.name]
    if isinstance(node, Neg):
        return f"(-{_emit(node.child, dual)})"
    if isinstance(node, Call):
        return f"F_{node.fn}({_emit(node.arg, dual)})"
    left, right = _emit(node.left, dual), _emit(node.right, dual)
    if node.op == "^":
        return f"F_pow({left}, {right})"
    return f"({left} {node.op} {right})"


def _value_pow(a, b):
    return np.power(a, b)


def _compile(node, dual: bool):
    src = f"lambda X, Y, T: {_emit(node, dual)}"
    ns: dict = {"__builtins__": {}}
    if dual:
        for name, fn in _DUAL_FUNCS.items():
            ns[f"F_{name}"] = fn
        ns["F_pow"] = _d_pow
    else:
        for name, fn in _VALUE_FUNCS.items():
            ns[f"F_{name}"] = fn
        ns["F_pow"] = _value_pow
    return eval(src, ns)  # noqa: S307 - source built from a validated AST


# ---------------------------------------------------------------------------
# Locating tree-walk evaluator: slower, but raises EvalDomainError pointing at
# the offending node.  Used to diagnose non-finite results of the fast path.
# ---------------------------------------------------------------------------


def _walk(node, x: float, y: float, t: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, NamedConst):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        return {"x": x, "y": y, "t": t}[node.name]
    if isinstance(node, Neg):
        return -_walk(node.child, x, y, t)
    if isinstance(node, Call):
        a = _walk(node.arg, x, y, t)
        if node.fn == "ln" and a <= 0.0:
            raise EvalDomainError(f"ln of non-positive value {a!r}", node.pos)
        if node.fn == "sqrt" and a < 0.0:
            raise EvalDomainError(f"sqrt of negative value {a!r}", node.pos)
        try:
            return float(_VALUE_FUNCS[node.fn](a))
        except (ValueError, OverflowError) as exc:
            raise EvalDomainError(f"{node.fn} failed: {exc}", node.pos) from None
    a = _walk(node.left, x, y, t)
    b = _walk(node.right, x, y, t)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        if b == 0.0:
            raise EvalDomainError("division by zero", node.pos)
        return a / b
    # power
    if a < 0.0 and not float(b).is_integer():
        raise EvalDomainError(
            f"fractional power {b!r} of negative base {a!r}", node.pos
        )
    if a == 0.0 and b < 0.0:
        raise EvalDomainError("negative power of zero", node.pos)
    try:
        return float(np.power(a, b))
    except OverflowError:
        return math.inf


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------


class Expression:
    """A parsed formula, ready for repeated evaluation."""

    def __init__(self, ast, source: str):
        self.ast = ast
        self.source = source
        self.free_variables = frozenset(self._collect_vars(ast))
        self._fn_value = _compile(ast, dual=False)
        self._fn_dual = _compile(ast, dual=True)

    @staticmethod
    def _collect_vars(node) -> set[str]:
        if isinstance(node, Var):
            return {node.name}
        if isinstance(node, Neg):
            return Expression._collect_vars(node.child)
        if isinstance(node, Call):
            return Expression._collect_vars(node.arg)
        if isinstance(node, Bin):
            return Expression._collect_vars(node.left) | Expression._collect_vars(node.right)
        return set()

    def pretty(self) -> str:
        return _render(self.ast)

    def __repr__(self) -> str:
        return f"Expression({self.pretty()!r})"

    def __call__(self, x=0.0, y=0.0, t=0.0):
        """Vectorized evaluation; accepts scalars or numpy arrays."""
        with np.errstate(all="ignore"):
            return self._fn_value(x, y, t)

    def equivalent_tree(self, other: "Expression") -> bool:
        return _same_tree(self.ast, other.ast)


def parse(source: str) -> Expression:
    """Parse ``source`` into an :class:`Expression`.

    Raises :class:`ExpressionSyntaxError` (with byte offset and expected
    tokens) on malformed input and :class:`UnknownIdentifierError` for names
    outside the whitelist.
    """
    return Expression(_Parser(source).parse(), source)


def evaluate(e: Expression, x: float = 0.0, y: float = 0.0, t: float = 0.0) -> float:
    """Evaluate ``e`` at a single point.

    Overflow follows IEEE semantics (returns ``inf``); genuine domain
    violations raise :class:`EvalDomainError` located at the offending node.
    """
    with np.errstate(all="ignore"):
        try:
            v = float(e._fn_value(np.float64(x), np.float64(y), np.float64(t)))
        except ZeroDivisionError:
            _walk(e.ast, float(x), float(y), float(t))  # raises with a location
            raise EvalDomainError("division by zero", 0) from None
        if math.isnan(v):
            _walk(e.ast, float(x), float(y), float(t))
            raise EvalDomainError("evaluation produced nan", 0)
    return v


def evaluate_dual(e: Expression, x: float = 0.0, y: float = 0.0, t: float = 0.0) -> Dual:
    """Evaluate ``e`` with first derivatives with respect to x and y."""
    with np.errstate(all="ignore"):
        try:
            out = e._fn_dual(
                Dual(np.float64(x), np.float64(1.0), np.float64(0.0)),
                Dual(np.float64(y), np.float64(0.0), np.float64(1.0)),
                np.float64(t),
            )
        except ZeroDivisionError:
            _walk(e.ast, float(x), float(y), float(t))
            raise EvalDomainError("division by zero", 0) from None
        out = _as_dual(out)
        out = Dual(float(out.v), float(out.dx), float(out.dy))
        if math.isnan(out.v) or math.isnan(out.dx) or math.isnan(out.dy):
            _walk(e.ast, float(x), float(y), float(t))
            raise EvalDomainError("dual evaluation produced nan", 0)
    return out
