"""Expression language for vectors, sequences, functions and function families.

Grammar (EBNF)::

    root    = expr | "(" expr "," expr { "," expr } ")" ;
    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = primary [ "^" unary ] ;
    primary = number | identifier | call | "(" expr ")" ;
    call    = identifier "(" expr { "," expr } ")" ;

``^`` binds tighter than unary minus and is right associative, so ``-2^2``
is ``-4`` and ``2^3^2`` is ``512``. A tuple is only allowed as the whole
expression. There is no implicit multiplication: ``2n`` is a parse error.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from .errors import EvalError, LexError, ParseError

__all__ = [
    "Token", "Num", "Var", "Unary", "Binary", "Call", "TupleExpr", "Ast",
    "FUNCTIONS", "register_function", "tokenize", "parse", "parse_text",
    "evaluate", "to_text", "to_sexpr", "free_variables",
]


# ---------------------------------------------------------------------------
# Lexing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str  # number | identifier | operator | lparen | rparen | comma
    text: str
    offset: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<identifier>[A-Za-z][A-Za-z0-9]*)
  | (?P<operator>[-+*/^])
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    return tokens


# ---------------------------------------------------------------------------
# Syntax tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Ast"
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Ast"
    right: "Ast"
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Ast", ...]
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class TupleExpr:
    items: tuple["Ast", ...]
    offset: int = field(default=-1, compare=False, repr=False)


Ast = Union[Num, Var, Unary, Binary, Call, TupleExpr]


# ---------------------------------------------------------------------------
# Function registry
# ---------------------------------------------------------------------------

def _sqrt(x: float) -> float:
    if x < 0:
        raise EvalError(f"sqrt of negative number {x!r}")
    return math.sqrt(x)


def _sign(x: float) -> float:
    return float((x > 0) - (x < 0))


@dataclass(frozen=True)
class _Builtin:
    impl: Callable[..., float]
    min_args: int
    max_args: int | None  # None: variadic


FUNCTIONS: dict[str, _Builtin] = {
    "sqrt": _Builtin(_sqrt, 1, 1),
    "abs": _Builtin(abs, 1, 1),
    "sin": _Builtin(math.sin, 1, 1),
    "cos": _Builtin(math.cos, 1, 1),
    "sign": _Builtin(_sign, 1, 1),
    "min": _Builtin(min, 2, None),
    "max": _Builtin(max, 2, None),
}


_BUILTIN_IMPLS = {name: b.impl for name, b in FUNCTIONS.items()}


def register_function(name: str, impl: Callable[..., float], min_args: int = 1,
                      max_args: int | None = 1) -> None:
    """Add a scalar function to the language (affects parsing and evaluation)."""
    if not re.fullmatch(r"[A-Za-z][A-Za-z0-9]*", name):
        raise ValueError(f"invalid function name {name!r}")
    FUNCTIONS[name] = _Builtin(impl, min_args, max_args)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_PUNCT = {"lparen": "(", "rparen": ")", "comma": ","}


class _Parser:
    def __init__(self, tokens: list[Token], source_len: int):
        self.tokens = tokens
        self.pos = 0
        self.end = source_len

    @property
    def current(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _offset(self) -> int:
        tok = self.current
        return tok.offset if tok is not None else self.end

    def _fail(self, expected: set[str]):
        tok = self.current
        found = "end of input" if tok is None else repr(tok.text)
        raise ParseError(f"unexpected {found}", self._offset(), frozenset(expected))

    def _accept(self, kind: str, text: str | None = None) -> Token | None:
        tok = self.current
        if tok is not None and tok.kind == kind and (text is None or tok.text == text):
            self.pos += 1
            return tok
        return None

    def _expect(self, kind: str, text: str | None = None) -> Token:
        tok = self._accept(kind, text)
        if tok is None:
            self._fail({text or _PUNCT.get(kind, kind)})
        return tok

    def parse_root(self) -> Ast:
        if not self.tokens:
            raise ParseError("empty expression", 0, frozenset({"expression"}))
        start = self.current
        if start.kind == "lparen":
            self.pos += 1
            first = self.expr()
            if self._accept("comma"):
                items = [first, self.expr()]
                while self._accept("comma"):
                    items.append(self.expr())
                self._expect("rparen")
                node: Ast = TupleExpr(tuple(items), start.offset)
                if self.current is not None:
                    self._fail({"end of input"})
                return node
            self._expect("rparen")
            # "(a) + b": the parenthesised group was only the first operand
            node = self._continue_after_group(first)
        else:
            node = self.expr()
        if self.current is not None:
            self._fail({"end of input", "operator"})
        return node

    def _continue_after_group(self, group: Ast) -> Ast:
        # re-enter the precedence ladder with an already parsed primary
        left = self._power_tail(group)
        left = self._term_tail(left)
        return self._expr_tail(left)

    def expr(self) -> Ast:
        return self._expr_tail(self.term())

    def _expr_tail(self, left: Ast) -> Ast:
        while True:
            tok = self._accept("operator", "+") or self._accept("operator", "-")
            if tok is None:
                return left
            left = Binary(tok.text, left, self.term(), tok.offset)

    def term(self) -> Ast:
        return self._term_tail(self.unary())

    def _term_tail(self, left: Ast) -> Ast:
        while True:
            tok = self._accept("operator", "*") or self._accept("operator", "/")
            if tok is None:
                return left
            left = Binary(tok.text, left, self.unary(), tok.offset)

    def unary(self) -> Ast:
        tok = self._accept("operator", "-")
        if tok is not None:
            return Unary("-", self.unary(), tok.offset)
        return self.power()

    def power(self) -> Ast:
        return self._power_tail(self.primary())

    def _power_tail(self, base: Ast) -> Ast:
        tok = self._accept("operator", "^")
        if tok is None:
            return base
        return Binary("^", base, self.unary(), tok.offset)

    def primary(self) -> Ast:
        tok = self.current
        if tok is None:
            self._fail({"number", "identifier", "("})
        if tok.kind == "number":
            self.pos += 1
            return Num(float(tok.text), tok.offset)
        if tok.kind == "identifier":
            self.pos += 1
            if self._accept("lparen"):
                return self._call(tok)
            return Var(tok.text, tok.offset)
        if tok.kind == "lparen":
            self.pos += 1
            inner = self.expr()
            if self.current is not None and self.current.kind == "comma":
                raise ParseError("tuples are only allowed as the whole expression",
                                 self.current.offset, frozenset({")"}))
            self._expect("rparen")
            return inner
        self._fail({"number", "identifier", "("})

    def _call(self, name_tok: Token) -> Ast:
        builtin = FUNCTIONS.get(name_tok.text)
        if builtin is None:
            raise ParseError(f"unknown function {name_tok.text!r}", name_tok.offset,
                             frozenset(FUNCTIONS))
        args = [self.expr()]
        while self._accept("comma"):
            args.append(self.expr())
        self._expect("rparen")
        n = len(args)
        if n < builtin.min_args or (builtin.max_args is not None and n > builtin.max_args):
            raise ParseError(f"{name_tok.text} takes {builtin.min_args}"
                             + ("" if builtin.max_args == builtin.min_args else "+")
                             + f" argument(s), got {n}", name_tok.offset)
        return Call(name_tok.text, tuple(args), name_tok.offset)


def parse(tokens: list[Token], source_len: int | None = None) -> Ast:
    if source_len is None:
        source_len = tokens[-1].offset + len(tokens[-1].text) if tokens else 0
    return _Parser(list(tokens), source_len).parse_root()


def parse_text(text: str) -> Ast:
    return parse(tokenize(text), len(text))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _power(base: float, exponent: float) -> float:
    if base < 0 and not float(exponent).is_integer():
        raise EvalError(f"non-integer exponent {exponent!r} on negative base {base!r}")
    if base == 0 and exponent < 0:
        raise EvalError("zero raised to a negative power")
    try:
        return math.pow(base, exponent)
    except OverflowError:
        # let callers see a non-finite value instead of an exception
        negative = base < 0 and float(exponent) % 2 == 1
        return -math.inf if negative else math.inf


def _eval(node: Ast, env: Mapping[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        try:
            return float(env[node.name])
        except KeyError:
            raise EvalError(f"unbound variable {node.name!r}", node.offset) from None
    if isinstance(node, Binary):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0:
                raise EvalError("division by zero", node.offset)
            return a / b
        return _power(a, b)
    if isinstance(node, Unary):
        return -_eval(node.operand, env)
    if isinstance(node, Call):
        args = [_eval(a, env) for a in node.args]
        try:
            return float(FUNCTIONS[node.name].impl(*args))
        except EvalError as exc:
            raise EvalError(str(exc), node.offset) from None
        except (ValueError, OverflowError) as exc:
            raise EvalError(f"{node.name}: {exc}", node.offset) from None
    if isinstance(node, TupleExpr):
        raise EvalError("nested tuple", node.offset)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(ast: Ast, env: Mapping[str, float]) -> float | tuple[float, ...]:
    """Evaluate ``ast`` under ``env``; a root tuple yields a tuple of floats."""
    if isinstance(ast, TupleExpr):
        return tuple(_eval(item, env) for item in ast.items)
    return _eval(ast, env)


_ARRAY_IMPLS: dict[str, Callable] = {
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "sign": np.sign,
    "min": lambda *a: np.minimum.reduce(a),
    "max": lambda *a: np.maximum.reduce(a),
}

_vec_power = np.frompyfunc(_power, 2, 1)


def _eval_array(node: Ast, env: Mapping[str, np.ndarray], shape: tuple) -> np.ndarray:
    if isinstance(node, Num):
        return np.full(shape, node.value)
    if isinstance(node, Var):
        try:
            return np.broadcast_to(np.asarray(env[node.name], dtype=float), shape)
        except KeyError:
            raise EvalError(f"unbound variable {node.name!r}", node.offset) from None
    if isinstance(node, Binary):
        a = _eval_array(node.left, env, shape)
        b = _eval_array(node.right, env, shape)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if np.any(b == 0):
                raise EvalError("division by zero", node.offset)
            return a / b
        try:
            return _vec_power(a, b).astype(float)
        except EvalError as exc:
            raise EvalError(str(exc), node.offset) from None
    if isinstance(node, Unary):
        return -_eval_array(node.operand, env, shape)
    if isinstance(node, Call):
        args = [_eval_array(a, env, shape) for a in node.args]
        if node.name == "sqrt" and np.any(args[0] < 0):
            raise EvalError("sqrt of negative number", node.offset)
        impl = _ARRAY_IMPLS.get(node.name)
        if impl is None or FUNCTIONS[node.name].impl is not _BUILTIN_IMPLS[node.name]:
            # user-registered or overridden: fall back to the scalar implementation
            scalar = np.frompyfunc(lambda *v: _eval(Call(node.name, tuple(Num(float(x)) for x in v)), {}),
                                   len(args), 1)
            return np.asarray(scalar(*args), dtype=float) if args else np.full(shape, _eval(node, {}))
        return np.asarray(impl(*args), dtype=float)
    if isinstance(node, TupleExpr):
        raise EvalError("nested tuple", node.offset)
    raise TypeError(f"not an expression node: {node!r}")


def evaluate_array(ast: Ast, env: Mapping[str, np.ndarray | float]) -> np.ndarray:
    """Vectorized :func:`evaluate`: variables bound to equal-length arrays.

    Returns shape ``(K,)`` for a scalar expression and ``(K, d)`` for a root
    tuple. Any element hitting a domain error raises :class:`EvalError`, as
    the scalar evaluator would.
    """
    lengths = {np.shape(v)[0] for v in env.values() if np.ndim(v) > 0}
    if len(lengths) > 1:
        raise ValueError("array bindings differ in length")
    shape = (lengths.pop() if lengths else 1,)
    with np.errstate(over="ignore", invalid="ignore"):
        if isinstance(ast, TupleExpr):
            return np.column_stack([_eval_array(item, env, shape) for item in ast.items])
        return _eval_array(ast, env, shape)


def free_variables(ast: Ast) -> set[str]:
    if isinstance(ast, Var):
        return {ast.name}
    if isinstance(ast, Num):
        return set()
    if isinstance(ast, Unary):
        return free_variables(ast.operand)
    if isinstance(ast, Binary):
        return free_variables(ast.left) | free_variables(ast.right)
    children = ast.args if isinstance(ast, Call) else ast.items
    out: set[str] = set()
    for child in children:
        out |= free_variables(child)
    return out


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}
_UNARY_PREC = 3
_POW_PREC = 4
_ATOM_PREC = 5


def _prec(node: Ast) -> int:
    if isinstance(node, Binary):
        return _POW_PREC if node.op == "^" else _PREC[node.op]
    if isinstance(node, Unary):
        return _UNARY_PREC
    return _ATOM_PREC


def _fmt_num(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def _wrap(node: Ast, needs_parens: bool) -> str:
    text = to_text(node)
    return f"({text})" if needs_parens else text


def to_text(ast: Ast) -> str:
    """Pretty-print with the minimum parentheses needed to parse back identically."""
    if isinstance(ast, Num):
        return _fmt_num(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Call):
        return f"{ast.name}({', '.join(to_text(a) for a in ast.args)})"
    if isinstance(ast, TupleExpr):
        return "(" + ", ".join(to_text(a) for a in ast.items) + ")"
    if isinstance(ast, Unary):
        return "-" + _wrap(ast.operand, _prec(ast.operand) < _UNARY_PREC)
    p = _prec(ast)
    if ast.op == "^":
        left = _wrap(ast.left, _prec(ast.left) <= _POW_PREC)
        right = _wrap(ast.right, _prec(ast.right) < _UNARY_PREC)
        return f"{left}^{right}"
    left = _wrap(ast.left, _prec(ast.left) < p)
    right = _wrap(ast.right, _prec(ast.right) <= p)
    return f"{left} {ast.op} {right}"


def to_sexpr(ast: Ast) -> str:
    """Compact S-expression form, used for snapshot comparisons."""
    if isinstance(ast, Num):
        return _fmt_num(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Unary):
        return f"(neg {to_sexpr(ast.operand)})"
    if isinstance(ast, Binary):
        return f"({ast.op} {to_sexpr(ast.left)} {to_sexpr(ast.right)})"
    if isinstance(ast, Call):
        return f"({ast.name} " + " ".join(to_sexpr(a) for a in ast.args) + ")"
    return "(tuple " + " ".join(to_sexpr(a) for a in ast.items) + ")"
