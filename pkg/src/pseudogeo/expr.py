"""Symbolic expression trees for metric coefficients.

The coefficient language is deliberately small: numeric literals, named
variables, ``+ - * /``, integer powers (``^`` or ``**``), and the functions
``exp``, ``sin``, ``cos``.  Expressions are immutable trees that are closed
under differentiation, render back to parseable text, and compile to plain
Python callables cheap enough for integrator inner loops.
"""

from __future__ import annotations

import ast as _pyast
import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Neg",
    "Pow",
    "Call",
    "ParseError",
    "DomainError",
    "parse_expr",
    "compile_scalar",
    "compile_bundle",
]

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
}

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_RESERVED = {"math"} | set(FUNCTIONS)


class ParseError(ValueError):
    """Raised on malformed expression text; carries the column offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (column {position})"
        super().__init__(message)


class DomainError(ValueError):
    """Raised when evaluation leaves the domain (division by zero, overflow)."""

    def __init__(self, message: str, point: tuple[float, ...] | None = None):
        self.point = point
        super().__init__(message)


# --- node types ---------------------------------------------------------


class Expr:
    """Base class; concrete nodes are frozen dataclasses below."""

    def diff(self, name: str) -> Expr:
        """Partial derivative with respect to the variable ``name``."""
        raise NotImplementedError

    def evaluate(self, env: Mapping[str, float]) -> float:
        """Evaluate with variable values from ``env``."""
        raise NotImplementedError

    def subst(self, mapping: Mapping[str, Expr]) -> Expr:
        """Simultaneously replace variables by expressions."""
        raise NotImplementedError

    def variables(self) -> frozenset[str]:
        raise NotImplementedError

    def _code(self) -> str:
        raise NotImplementedError

    def _prec(self) -> int:
        raise NotImplementedError

    def _text(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self._text()

    # arithmetic builds folded trees, so derivatives stay readable

    def __add__(self, other: Expr | float) -> Expr:
        return _add(self, _as_expr(other))

    def __radd__(self, other: Expr | float) -> Expr:
        return _add(_as_expr(other), self)

    def __sub__(self, other: Expr | float) -> Expr:
        return _sub(self, _as_expr(other))

    def __rsub__(self, other: Expr | float) -> Expr:
        return _sub(_as_expr(other), self)

    def __mul__(self, other: Expr | float) -> Expr:
        return _mul(self, _as_expr(other))

    def __rmul__(self, other: Expr | float) -> Expr:
        return _mul(_as_expr(other), self)

    def __truediv__(self, other: Expr | float) -> Expr:
        return _div(self, _as_expr(other))

    def __rtruediv__(self, other: Expr | float) -> Expr:
        return _div(_as_expr(other), self)

    def __neg__(self) -> Expr:
        return _neg(self)

    def __pow__(self, exponent: int) -> Expr:
        if not isinstance(exponent, int):
            raise TypeError("exponent must be an integer")
        return _pow(self, exponent)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def diff(self, name: str) -> Expr:
        return Const(0.0)

    def evaluate(self, env: Mapping[str, float]) -> float:
        return self.value

    def subst(self, mapping: Mapping[str, Expr]) -> Expr:
        return self

    def variables(self) -> frozenset[str]:
        return frozenset()

    def _code(self) -> str:
        return repr(float(self.value))

    def _prec(self) -> int:
        return 4 if self.value >= 0 else 1

    def _text(self) -> str:
        value = float(self.value)
        if value.is_integer() and abs(value) < 1e15:
            return str(int(value))
        return repr(value)


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def __post_init__(self) -> None:
        if not _NAME_RE.match(self.name) or self.name in _RESERVED:
            raise ValueError(f"invalid variable name {self.name!r}")

    def diff(self, name: str) -> Expr:
        return Const(1.0 if name == self.name else 0.0)

    def evaluate(self, env: Mapping[str, float]) -> float:
        try:
            return env[self.name]
        except KeyError:
            raise DomainError(f"unbound variable {self.name!r}") from None

    def subst(self, mapping: Mapping[str, Expr]) -> Expr:
        return mapping.get(self.name, self)

    def variables(self) -> frozenset[str]:
        return frozenset({self.name})

    def _code(self) -> str:
        return self.name

    def _prec(self) -> int:
        return 4

    def _text(self) -> str:
        return self.name


@dataclass(frozen=True)
class _Binary(Expr):
    left: Expr
    right: Expr

    _symbol = "?"
    _level = 0

    def subst(self, mapping: Mapping[str, Expr]) -> Expr:
        return _MAKE[type(self)](self.left.subst(mapping), self.right.subst(mapping))

    def variables(self) -> frozenset[str]:
        return self.left.variables() | self.right.variables()

    def _prec(self) -> int:
        return self._level

    def _text(self) -> str:
        left = _wrap(self.left, self._level)
        right = _wrap(self.right, self._level + 1)
        return f"{left} {self._symbol} {right}"


class Add(_Binary):
    _symbol = "+"
    _level = 1

    def diff(self, name: str) -> Expr:
        return _add(self.left.diff(name), self.right.diff(name))

    def evaluate(self, env: Mapping[str, float]) -> float:
        return self.left.evaluate(env) + self.right.evaluate(env)

    def _code(self) -> str:
        return f"({self.left._code()} + {self.right._code()})"

    def _text(self) -> str:
        left = _wrap(self.left, self._level)
        # render u + (-v) as a subtraction for readability
        if isinstance(self.right, Neg):
            return f"{left} - {_wrap(self.right.operand, self._level + 1)}"
        return f"{left} + {_wrap(self.right, self._level)}"


class Sub(_Binary):
    _symbol = "-"
    _level = 1

    def diff(self, name: str) -> Expr:
        return _sub(self.left.diff(name), self.right.diff(name))

    def evaluate(self, env: Mapping[str, float]) -> float:
        return self.left.evaluate(env) - self.right.evaluate(env)

    def _code(self) -> str:
        return f"({self.left._code()} - {self.right._code()})"


class Mul(_Binary):
    _symbol = "*"
    _level = 2

    def diff(self, name: str) -> Expr:
        u, v = self.left, self.right
        return _add(_mul(u.diff(name), v), _mul(u, v.diff(name)))

    def evaluate(self, env: Mapping[str, float]) -> float:
        return self.left.evaluate(env) * self.right.evaluate(env)

    def _code(self) -> str:
        return f"({self.left._code()} * {self.right._code()})"


class Div(_Binary):
    _symbol = "/"
    _level = 2

    def diff(self, name: str) -> Expr:
        u, v = self.left, self.right
        numerator = _sub(_mul(u.diff(name), v), _mul(u, v.diff(name)))
        return _div(numerator, _pow(v, 2))

    def evaluate(self, env: Mapping[str, float]) -> float:
        denominator = self.right.evaluate(env)
        if denominator == 0.0:
            raise DomainError("division by zero")
        return self.left.evaluate(env) / denominator

    def _code(self) -> str:
        return f"({self.left._code()} / {self.right._code()})"


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr

    def diff(self, name: str) -> Expr:
        return _neg(self.operand.diff(name))

    def evaluate(self, env: Mapping[str, float]) -> float:
        return -self.operand.evaluate(env)

    def subst(self, mapping: Mapping[str, Expr]) -> Expr:
        return _neg(self.operand.subst(mapping))

    def variables(self) -> frozenset[str]:
        return self.operand.variables()

    def _code(self) -> str:
        return f"(-{self.operand._code()})"

    def _prec(self) -> int:
        return 1

    def _text(self) -> str:
        return f"-{_wrap(self.operand, 2)}"


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self) -> None:
        if not isinstance(self.exponent, int):
            raise ValueError("exponent must be an integer")

    def diff(self, name: str) -> Expr:
        n = self.exponent
        return _mul(_mul(Const(float(n)), _pow(self.base, n - 1)), self.base.diff(name))

    def evaluate(self, env: Mapping[str, float]) -> float:
        base = self.base.evaluate(env)
        if base == 0.0 and self.exponent < 0:
            raise DomainError("zero raised to a negative power")
        try:
            return float(base**self.exponent)
        except OverflowError:
            raise DomainError("overflow in power") from None

    def subst(self, mapping: Mapping[str, Expr]) -> Expr:
        return _pow(self.base.subst(mapping), self.exponent)

    def variables(self) -> frozenset[str]:
        return self.base.variables()

    def _code(self) -> str:
        return f"({self.base._code()} ** {self.exponent})"

    def _prec(self) -> int:
        return 3

    def _text(self) -> str:
        return f"{_wrap(self.base, 4)}^{self.exponent}"


@dataclass(frozen=True)
class Call(Expr):
    function: str
    argument: Expr

    def __post_init__(self) -> None:
        if self.function not in FUNCTIONS:
            raise ValueError(f"unknown function {self.function!r}")

    def diff(self, name: str) -> Expr:
        inner = self.argument.diff(name)
        if self.function == "exp":
            outer: Expr = Call("exp", self.argument)
        elif self.function == "sin":
            outer = Call("cos", self.argument)
        else:  # cos
            outer = _neg(Call("sin", self.argument))
        return _mul(outer, inner)

    def evaluate(self, env: Mapping[str, float]) -> float:
        value = self.argument.evaluate(env)
        try:
            return FUNCTIONS[self.function](value)
        except OverflowError:
            raise DomainError(f"overflow in {self.function}") from None

    def subst(self, mapping: Mapping[str, Expr]) -> Expr:
        return Call(self.function, self.argument.subst(mapping))

    def variables(self) -> frozenset[str]:
        return self.argument.variables()

    def _code(self) -> str:
        return f"math.{self.function}({self.argument._code()})"

    def _prec(self) -> int:
        return 4

    def _text(self) -> str:
        return f"{self.function}({self.argument._text()})"


def _wrap(expr: Expr, level: int) -> str:
    text = expr._text()
    return f"({text})" if expr._prec() < level else text


# --- folding constructors ------------------------------------------------
# Constant folding and identity elimination only; anything beyond that would
# change domain behaviour (e.g. cancelling a division that should fail).


def _as_expr(value: Expr | float) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise TypeError(f"cannot interpret {type(value).__name__} as an expression")


def _is_const(expr: Expr, value: float | None = None) -> bool:
    if not isinstance(expr, Const):
        return False
    return value is None or expr.value == value


def _add(u: Expr, v: Expr) -> Expr:
    if isinstance(u, Const) and isinstance(v, Const):
        return Const(u.value + v.value)
    if _is_const(u, 0.0):
        return v
    if _is_const(v, 0.0):
        return u
    return Add(u, v)


def _sub(u: Expr, v: Expr) -> Expr:
    if isinstance(u, Const) and isinstance(v, Const):
        return Const(u.value - v.value)
    if _is_const(v, 0.0):
        return u
    if _is_const(u, 0.0):
        return _neg(v)
    return Sub(u, v)


def _mul(u: Expr, v: Expr) -> Expr:
    if isinstance(u, Const) and isinstance(v, Const):
        return Const(u.value * v.value)
    if _is_const(u, 0.0) or _is_const(v, 0.0):
        return Const(0.0)
    if _is_const(u, 1.0):
        return v
    if _is_const(v, 1.0):
        return u
    if _is_const(u, -1.0):
        return _neg(v)
    if _is_const(v, -1.0):
        return _neg(u)
    return Mul(u, v)


def _div(u: Expr, v: Expr) -> Expr:
    if isinstance(u, Const) and isinstance(v, Const) and v.value != 0.0:
        return Const(u.value / v.value)
    if _is_const(u, 0.0) and not _is_const(v, 0.0):
        return Const(0.0)
    if _is_const(v, 1.0):
        return u
    return Div(u, v)


def _neg(u: Expr) -> Expr:
    if isinstance(u, Const):
        return Const(-u.value)
    if isinstance(u, Neg):
        return u.operand
    return Neg(u)


def _pow(u: Expr, n: int) -> Expr:
    if n == 0:
        return Const(1.0)
    if n == 1:
        return u
    if isinstance(u, Const) and (u.value != 0.0 or n > 0):
        return Const(float(u.value**n))
    return Pow(u, n)


_MAKE: dict[type, Callable[[Expr, Expr], Expr]] = {
    Add: _add,
    Sub: _sub,
    Mul: _mul,
    Div: _div,
}


# --- parsing --------------------------------------------------------------
# `^` is translated to `**` before handing the text to the Python parser, so
# powers bind tighter than products in either spelling.  Column offsets are
# mapped back to the original text for error messages.


def _translate_carets(text: str) -> tuple[str, list[int]]:
    carets = [i for i, ch in enumerate(text) if ch == "^"]
    return text.replace("^", "**"), carets


def _source_col(col: int, carets: list[int]) -> int:
    for k, index in enumerate(carets):
        if index + k >= col:
            return col - k
    return col - len(carets)


def parse_expr(text: str, variables: Sequence[str] | None = None) -> Expr:
    """Parse expression text; ``variables`` restricts the allowed names."""
    translated, carets = _translate_carets(text)
    try:
        tree = _pyast.parse(translated, mode="eval")
    except SyntaxError as exc:
        col = _source_col((exc.offset or 1) - 1, carets)
        raise ParseError("invalid syntax", col) from None
    allowed = None if variables is None else set(variables)
    return _from_ast(tree.body, allowed, carets)


def _from_ast(node: _pyast.AST, allowed: set[str] | None, carets: list[int]) -> Expr:
    col = _source_col(getattr(node, "col_offset", 0), carets)
    if isinstance(node, _pyast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ParseError("only numeric literals are allowed", col)
        return Const(float(node.value))
    if isinstance(node, _pyast.Name):
        if node.id in FUNCTIONS:
            raise ParseError(f"{node.id!r} must be called with an argument", col)
        if allowed is not None and node.id not in allowed:
            names = ", ".join(sorted(allowed))
            raise ParseError(f"unknown variable {node.id!r} (allowed: {names})", col)
        try:
            return Var(node.id)
        except ValueError as exc:
            raise ParseError(str(exc), col) from None
    if isinstance(node, _pyast.UnaryOp):
        operand = _from_ast(node.operand, allowed, carets)
        if isinstance(node.op, _pyast.USub):
            return _neg(operand)
        if isinstance(node.op, _pyast.UAdd):
            return operand
        raise ParseError("unsupported unary operator", col)
    if isinstance(node, _pyast.BinOp):
        if isinstance(node.op, _pyast.Pow):
            base = _from_ast(node.left, allowed, carets)
            exponent = _from_ast(node.right, allowed, carets)
            exp_col = _source_col(node.right.col_offset, carets)
            if not isinstance(exponent, Const):
                raise ParseError("exponent must be an integer constant", exp_col)
            if not float(exponent.value).is_integer():
                raise ParseError("exponent must be an integer", exp_col)
            return _pow(base, int(exponent.value))
        left = _from_ast(node.left, allowed, carets)
        right = _from_ast(node.right, allowed, carets)
        if isinstance(node.op, _pyast.Add):
            return _add(left, right)
        if isinstance(node.op, _pyast.Sub):
            return _sub(left, right)
        if isinstance(node.op, _pyast.Mult):
            return _mul(left, right)
        if isinstance(node.op, _pyast.Div):
            return _div(left, right)
        raise ParseError("unsupported operator", col)
    if isinstance(node, _pyast.Call):
        if not isinstance(node.func, _pyast.Name) or node.func.id not in FUNCTIONS:
            raise ParseError("only exp, sin and cos may be called", col)
        if len(node.args) != 1 or node.keywords:
            raise ParseError(f"{node.func.id} takes exactly one argument", col)
        return Call(node.func.id, _from_ast(node.args[0], allowed, carets))
    raise ParseError("unsupported syntax", col)


# --- compilation ----------------------------------------------------------


def compile_bundle(
    exprs: Sequence[Expr], params: Sequence[str]
) -> Callable[..., tuple[float, ...]]:
    """Compile several expressions into one positional callable.

    The result takes ``params`` as floats and returns a tuple of values;
    domain failures raise :class:`DomainError` tagged with the point.
    """
    for name in params:
        if not _NAME_RE.match(name) or name in _RESERVED:
            raise ValueError(f"invalid parameter name {name!r}")
    given = set(params)
    for expr in exprs:
        missing = expr.variables() - given
        if missing:
            raise ValueError(f"expression uses unbound variables {sorted(missing)}")
    args = ", ".join(params)
    body = ", ".join(expr._code() for expr in exprs)
    point = ", ".join(params) if params else ""
    source = (
        f"def _bundle({args}):\n"
        f"    try:\n"
        f"        return ({body},)\n"
        f"    except (ZeroDivisionError, OverflowError) as exc:\n"
        f"        raise DomainError(str(exc), point=({point})) from None\n"
    )
    namespace: dict[str, object] = {"math": math, "DomainError": DomainError}
    exec(compile(source, "<pseudogeo-expr>", "exec"), namespace)
    return namespace["_bundle"]  # type: ignore[return-value]


def compile_scalar(expr: Expr, params: Sequence[str]) -> Callable[..., float]:
    """Compile a single expression to a float-valued callable."""
    bundle = compile_bundle((expr,), params)

    def scalar(*values: float) -> float:
        return bundle(*values)[0]

    return scalar
