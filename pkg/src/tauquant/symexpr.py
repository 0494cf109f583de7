"""
Expression language for symbols, amplitudes and quantizing functions.

Expressions are immutable trees of :class:`SymbolExpr` nodes.  They can be
parsed from text, printed back, evaluated on numpy arrays, differentiated
symbolically and substituted into.  Identical sub-expressions are frequently
shared (derivative trees are DAGs), so every traversal memoizes on node
identity.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := unary ("^" factor)?          # right-associative
    unary  := "-" unary | atom
    atom   := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"

Note that unary minus binds tighter than ``^``, so ``-x^2`` is ``(-x)^2``.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

__all__ = [
    "SymbolExpr",
    "ParseError",
    "EvalError",
    "UnboundVariableError",
    "DomainError",
    "DifferentiationError",
    "ExpressionGrowthError",
    "FUNCTIONS",
    "const",
    "var",
    "add",
    "sub",
    "mul",
    "div",
    "power",
    "neg",
    "call",
    "as_expr",
    "parse",
    "to_text",
    "evaluate",
    "diff",
    "diff_multi",
    "substitute",
    "free_vars",
    "node_count",
    "depends_on",
    "to_polynomial",
    "from_polynomial",
    "axis_names",
    "canonical_names",
    "MAX_NODES",
]

#: Node budget enforced by :func:`check_growth`.
MAX_NODES = 10**6

#: Supported functions and their arity (``None`` means one or more).
#: ``ramp`` is the smooth step 3t^2 - 2t^3 clamped to [0, 1]; ``ramp1``..``ramp3``
#: are its successive derivatives.  They exist so that cutoff functions can be
#: differentiated symbolically.
FUNCTIONS: dict[str, int | None] = {
    "sin": 1,
    "cos": 1,
    "tan": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "atan": 1,
    "tanh": 1,
    "jb": None,
    "ramp": 1,
    "ramp1": 1,
    "ramp2": 1,
    "ramp3": 1,
}

CONSTANTS = {"pi": math.pi, "e": math.e}

_KINDS = ("const", "var", "add", "mul", "div", "pow", "neg", "call")


class ParseError(ValueError):
    """Syntax error; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class EvalError(ValueError):
    pass


class UnboundVariableError(EvalError):
    pass


class DomainError(EvalError):
    pass


class DifferentiationError(ValueError):
    pass


class ExpressionGrowthError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SymbolExpr:
    """A node of an expression tree.

    Parameters
    ----------
    kind : str
        One of ``const, var, add, mul, div, pow, neg, call``.
    args : tuple of SymbolExpr
        Ordered children.  ``pow`` stores ``(base, exponent)`` with a constant
        exponent.
    value : float, optional
        Payload of ``const`` nodes.
    name : str, optional
        Variable name for ``var`` nodes, function name for ``call`` nodes.
    """

    kind: str
    args: tuple = ()
    value: float | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"SymbolExpr({to_text(self)!r})"

    # Arithmetic sugar, used mainly when building expressions in code.
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, other):
        return power(self, as_expr(other))

    @property
    def is_const(self) -> bool:
        return self.kind == "const"


# ---------------------------------------------------------------------------
# Smart constructors: constant folding and 0/1 elimination only.


# Nodes are interned: structurally equal expressions built through the
# constructors below are the same object, so equality is identity and shared
# subexpressions are shared in memory.
_INTERN: "weakref.WeakValueDictionary[tuple, SymbolExpr]" = weakref.WeakValueDictionary()


def _make(kind: str, args: tuple = (), value: float | None = None,
          name: str | None = None) -> SymbolExpr:
    sign = math.copysign(1.0, value) if value is not None else None
    key = (kind, tuple(id(a) for a in args), value, sign, name)
    node = _INTERN.get(key)
    if node is None:
        node = SymbolExpr(kind, args, value, name)
        _INTERN[key] = node
    return node


def const(value: float) -> SymbolExpr:
    return _make("const", value=float(value))


def var(name: str) -> SymbolExpr:
    return _make("var", name=name)


def as_expr(obj) -> SymbolExpr:
    if isinstance(obj, SymbolExpr):
        return obj
    if isinstance(obj, (int, float, Fraction, np.floating, np.integer)):
        return const(float(obj))
    if isinstance(obj, str):
        return parse(obj)
    raise TypeError(f"cannot convert {type(obj).__name__} to SymbolExpr")


def _is(e: SymbolExpr, v: float) -> bool:
    return e.kind == "const" and e.value == v


def _trivially_equal(a: SymbolExpr, b: SymbolExpr) -> bool:
    if a is b:
        return True
    if a.kind == "var" and b.kind == "var":
        return a.name == b.name
    return False


def add(a: SymbolExpr, b: SymbolExpr) -> SymbolExpr:
    if a.kind == "const" and b.kind == "const":
        return const(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if (b.kind == "neg" and _trivially_equal(a, b.args[0])) or \
            (a.kind == "neg" and _trivially_equal(a.args[0], b)):
        return const(0.0)
    return _make("add", (a, b))


def neg(a: SymbolExpr) -> SymbolExpr:
    if a.kind == "const":
        return const(-a.value)
    if a.kind == "neg":
        return a.args[0]
    return _make("neg", (a,))


def sub(a: SymbolExpr, b: SymbolExpr) -> SymbolExpr:
    return add(a, neg(b))


def mul(a: SymbolExpr, b: SymbolExpr) -> SymbolExpr:
    if a.kind == "const" and b.kind == "const":
        return const(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return const(0.0)
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return _make("mul", (a, b))


def div(a: SymbolExpr, b: SymbolExpr) -> SymbolExpr:
    if a.kind == "const" and b.kind == "const" and b.value != 0.0:
        return const(a.value / b.value)
    if _is(b, 1.0):
        return a
    if _is(a, 0.0) and not _is(b, 0.0):
        return const(0.0)
    return _make("div", (a, b))


def power(base: SymbolExpr, exponent: SymbolExpr | float) -> SymbolExpr:
    exponent = as_expr(exponent)
    if exponent.kind == "const":
        c = exponent.value
        if c == 0.0:
            return const(1.0)
        if c == 1.0:
            return base
        if base.kind == "const":
            folded = _pow_scalar(base.value, c)
            if folded is not None:
                return const(folded)
        if _is(base, 1.0):
            return const(1.0)
    return _make("pow", (base, exponent))


def _pow_scalar(b: float, c: float) -> float | None:
    if b < 0 and c != int(c):
        return None
    if b == 0 and c < 0:
        return None
    try:
        return float(b**c)
    except (OverflowError, ZeroDivisionError):
        return None


def call(name: str, *args: SymbolExpr) -> SymbolExpr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    arity = FUNCTIONS[name]
    if arity is None and not args:
        raise ValueError(f"{name} takes at least one argument")
    if arity is not None and len(args) != arity:
        raise ValueError(f"{name} takes {arity} argument(s), got {len(args)}")
    node = _make("call", tuple(args), name=name)
    if all(a.kind == "const" for a in args):
        try:
            return const(float(evaluate(node, {})))
        except EvalError:
            return node
    return node


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^(),]))"
)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", self._byte(pos))
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def _byte(self, pos: int) -> int:
        return len(self.text[:pos].encode("utf-8"))

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            shown = val if kind != "end" else "end of input"
            raise ParseError(f"expected {op!r}, found {shown!r}", self._byte(pos))

    def parse(self) -> SymbolExpr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", self._byte(pos))
        return e

    def expr(self) -> SymbolExpr:
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> SymbolExpr:
        e = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            rhs = self.factor()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def factor(self) -> SymbolExpr:
        base = self.unary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            pos = self.take()[2]
            exponent = self.factor()
            if exponent.kind != "const":
                raise ParseError("exponent must be a constant", self._byte(pos))
            return power(base, exponent)
        return base

    def unary(self) -> SymbolExpr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        return self.atom()

    def atom(self) -> SymbolExpr:
        kind, val, pos = self.take()
        if kind == "num":
            return const(float(val))
        if kind == "ident":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise ParseError(f"unknown function {val!r}", self._byte(pos))
                self.take()
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                try:
                    return call(val, *args)
                except ValueError as exc:
                    raise ParseError(str(exc), self._byte(pos)) from None
            if val in CONSTANTS:
                return const(CONSTANTS[val])
            return var(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        shown = val if kind != "end" else "end of input"
        raise ParseError(f"unexpected token {shown!r}", self._byte(pos))


def parse(text: str) -> SymbolExpr:
    """Parse ``text`` into an expression.

    Raises
    ------
    ParseError
        On a syntax error or an unknown function name.
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing

_PREC = {"add": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def _prec(e: SymbolExpr) -> int:
    # negative constants print parenthesized, so they behave as atoms
    return _PREC.get(e.kind, 5)


def _fmt_const(v: float) -> str:
    if math.isfinite(v) and v == int(v) and abs(v) < 1e15:
        s = str(int(v))
    else:
        s = repr(v)
    return f"({s})" if v < 0 else s


def to_text(e: SymbolExpr) -> str:
    """Render ``e`` in the input grammar; ``parse(to_text(e)) == e``."""
    memo: dict[int, str] = {}

    def wrap(child: SymbolExpr, ok: bool) -> str:
        s = go(child)
        return s if ok else f"({s})"

    def go(node: SymbolExpr) -> str:
        key = id(node)
        if key in memo:
            return memo[key]
        k = node.kind
        if k == "const":
            s = _fmt_const(node.value)
        elif k == "var":
            s = node.name
        elif k == "add":
            a, b = node.args
            if b.kind == "neg":
                s = f"{go(a)} - {wrap(b.args[0], _prec(b.args[0]) > 1)}"
            elif b.kind == "const" and b.value < 0:
                s = f"{go(a)} - {_fmt_const(-b.value)}"
            else:
                s = f"{go(a)} + {wrap(b, _prec(b) > 1)}"
        elif k in ("mul", "div"):
            a, b = node.args
            op = "*" if k == "mul" else "/"
            s = f"{wrap(a, _prec(a) >= 2)}{op}{wrap(b, _prec(b) >= 4)}"
        elif k == "neg":
            s = "-" + wrap(node.args[0], _prec(node.args[0]) == 5)
        elif k == "pow":
            a, c = node.args
            s = f"{wrap(a, _prec(a) == 5)}^{go(c)}"
        else:
            s = f"{node.name}({', '.join(go(a) for a in node.args)})"
        memo[key] = s
        return s

    return go(e)


# ---------------------------------------------------------------------------
# Evaluation


def _ramp(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _inside(t):
    return (t > 0.0) & (t < 1.0)


def _ramp1(t):
    return np.where(_inside(t), 6.0 * t * (1.0 - t), 0.0)


def _ramp2(t):
    return np.where(_inside(t), 6.0 - 12.0 * t, 0.0)


def _ramp3(t):
    return np.where(_inside(t), -12.0, 0.0)


def _checked(name: str, fn: Callable, ok: Callable):
    def f(u):
        if not np.all(ok(u)):
            raise DomainError(f"{name} evaluated outside its domain")
        return fn(u)

    return f


_NUMPY_FUNCS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": _checked("log", np.log, lambda u: u > 0),
    "sqrt": _checked("sqrt", np.sqrt, lambda u: u >= 0),
    "atan": np.arctan,
    "tanh": np.tanh,
    "ramp": _ramp,
    "ramp1": _ramp1,
    "ramp2": _ramp2,
    "ramp3": _ramp3,
}


def _postorder(e: SymbolExpr) -> list[SymbolExpr]:
    """Distinct nodes of the DAG, children before parents."""
    seen: set[int] = set()
    out: list[SymbolExpr] = []
    stack = [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for a in reversed(node.args):
            if id(a) not in seen:
                stack.append((a, False))
    return out


def _eval_node(node: SymbolExpr, env, take):
    k = node.kind
    if k == "const":
        return np.float64(node.value)
    if k == "var":
        try:
            return env[node.name]
        except KeyError:
            raise UnboundVariableError(f"variable {node.name!r} is not bound") from None
    if k == "add":
        return take(node.args[0]) + take(node.args[1])
    if k == "mul":
        return take(node.args[0]) * take(node.args[1])
    if k == "div":
        num = take(node.args[0])
        den = take(node.args[1])
        if np.any(den == 0):
            raise DomainError("division by zero")
        return num / den
    if k == "neg":
        return -take(node.args[0])
    if k == "pow":
        base = take(node.args[0])
        take(node.args[1])
        c = node.args[1].value
        if c != int(c) and np.any(base < 0):
            raise DomainError("non-integer power of a negative base")
        if c < 0 and np.any(base == 0):
            raise DomainError("negative power of zero")
        return base**c if c != 2.0 else base * base
    args = [take(a) for a in node.args]
    if node.name == "jb":
        acc = 1.0
        for a in args:
            acc = acc + a * a
        return np.sqrt(acc)
    return _NUMPY_FUNCS[node.name](args[0])


def evaluate(e: SymbolExpr, binding: Mapping[str, object]):
    """Evaluate ``e`` with variables bound to scalars or broadcastable arrays.

    Returns a float when every bound value is scalar, otherwise an ndarray.

    Raises
    ------
    UnboundVariableError
        A free variable of ``e`` is missing from ``binding``.
    DomainError
        Division by zero, log/sqrt outside their domain, or a real power of a
        negative base.
    """
    env = {k: np.asarray(v, dtype=float) for k, v in binding.items()}
    order = _postorder(e)
    # remaining uses of each node, so intermediate arrays are freed early
    uses: dict[int, int] = {}
    for node in order:
        for a in node.args:
            uses[id(a)] = uses.get(id(a), 0) + 1
    memo: dict[int, np.ndarray] = {}

    def take(node):
        key = id(node)
        r = memo[key]
        uses[key] -= 1
        if uses[key] == 0:
            del memo[key]
        return r

    with np.errstate(all="ignore"):
        for node in order:
            memo[id(node)] = _eval_node(node, env, take)
        out = memo[id(e)]
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Differentiation and substitution


def depends_on(e: SymbolExpr, names: Iterable[str]) -> bool:
    names = set(names)
    memo: dict[int, bool] = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if node.kind == "var":
            r = node.name in names
        else:
            r = any(go(a) for a in node.args)
        memo[key] = r
        return r

    return go(e)


def diff(e: SymbolExpr, v: str) -> SymbolExpr:
    """Exact partial derivative of ``e`` with respect to variable ``v``.

    Raises
    ------
    DifferentiationError
        If a ``pow`` node has a non-constant exponent.
    """
    memo: dict[int, SymbolExpr] = {}
    zero, one = const(0.0), const(1.0)

    def go(node: SymbolExpr) -> SymbolExpr:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        k = node.kind
        if k == "const":
            r = zero
        elif k == "var":
            r = one if node.name == v else zero
        elif k == "add":
            r = add(go(node.args[0]), go(node.args[1]))
        elif k == "neg":
            r = neg(go(node.args[0]))
        elif k == "mul":
            a, b = node.args
            r = add(mul(go(a), b), mul(a, go(b)))
        elif k == "div":
            a, b = node.args
            da, db = go(a), go(b)
            if _is(db, 0.0):
                r = div(da, b)
            else:
                # (a' - (a/b) b') / b keeps magnitudes bounded under repeated
                # differentiation, unlike the b^2 denominator
                r = div(sub(da, mul(node, db)), b)
        elif k == "pow":
            a, c = node.args
            if c.kind != "const":
                raise DifferentiationError("pow exponent must be constant")
            da = go(a)
            if _is(da, 0.0):
                r = zero
            elif c.value == int(c.value):
                r = mul(mul(c, power(a, const(c.value - 1.0))), da)
            else:
                # d/dv exp(c log a) keeps the positive-base domain explicit
                r = mul(call("exp", mul(c, call("log", a))), mul(c, div(da, a)))
        else:
            r = _diff_call(node, [go(a) for a in node.args])
        memo[key] = r
        return r

    return go(e)


def _diff_call(node: SymbolExpr, dargs: list[SymbolExpr]) -> SymbolExpr:
    name = node.name
    if name == "jb":
        acc = const(0.0)
        for a, da in zip(node.args, dargs):
            if not _is(da, 0.0):
                acc = add(acc, mul(div(a, node), da))
        return acc
    (u,), (du,) = node.args, dargs
    if _is(du, 0.0):
        return const(0.0)
    if name == "sin":
        outer = call("cos", u)
    elif name == "cos":
        outer = neg(call("sin", u))
    elif name == "tan":
        outer = add(const(1.0), power(node, const(2.0)))
    elif name == "exp":
        outer = node
    elif name == "log":
        return div(du, u)
    elif name == "sqrt":
        return div(du, mul(const(2.0), node))
    elif name == "atan":
        return div(du, add(const(1.0), power(u, const(2.0))))
    elif name == "tanh":
        outer = sub(const(1.0), power(node, const(2.0)))
    elif name in ("ramp", "ramp1", "ramp2"):
        outer = call(name[:4] + str(int(name[4:] or 0) + 1), u)
    elif name == "ramp3":
        return const(0.0)
    else:  # pragma: no cover - guarded by FUNCTIONS
        raise DifferentiationError(f"no rule for {name}")
    return mul(outer, du)


def diff_multi(e: SymbolExpr, names: list[str], orders: Iterable[int]) -> SymbolExpr:
    """Apply ``∂^orders`` with respect to ``names`` (one order per name)."""
    for name, order in zip(names, orders):
        for _ in range(order):
            e = diff(e, name)
    return e


def substitute(e: SymbolExpr, mapping: Mapping[str, SymbolExpr]) -> SymbolExpr:
    """Simultaneous substitution of variables by expressions."""
    if not mapping:
        return e
    memo: dict[int, SymbolExpr] = {}

    def go(node: SymbolExpr) -> SymbolExpr:
        key = id(node)
        hit = memo.get(key)
        if hit is not None:
            return hit
        k = node.kind
        if k == "const":
            r = node
        elif k == "var":
            r = mapping.get(node.name, node)
        else:
            args = [go(a) for a in node.args]
            if all(a is b for a, b in zip(args, node.args)):
                r = node
            elif k == "add":
                r = add(*args)
            elif k == "mul":
                r = mul(*args)
            elif k == "div":
                r = div(*args)
            elif k == "neg":
                r = neg(args[0])
            elif k == "pow":
                r = power(args[0], args[1])
            else:
                r = call(node.name, *args)
        memo[key] = r
        return r

    return go(e)


def free_vars(e: SymbolExpr) -> set[str]:
    out: set[str] = set()
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.kind == "var":
            out.add(node.name)
        stack.extend(node.args)
    return out


def node_count(e: SymbolExpr) -> int:
    """Number of distinct nodes of the expression DAG."""
    seen: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.extend(node.args)
    return len(seen)


def tree_size(e: SymbolExpr, cap: int = 10**9) -> int:
    """Number of nodes once shared subexpressions are expanded, capped at ``cap``."""
    size: dict[int, int] = {}
    for node in _postorder(e):
        size[id(node)] = min(cap, 1 + sum(size[id(a)] for a in node.args))
    return size[id(e)]


def serialize(e: SymbolExpr) -> list[list]:
    """Flat DAG listing ``[kind, payload, child indices]`` in children-first order."""
    order = _postorder(e)
    index = {id(node): i for i, node in enumerate(order)}
    out = []
    for node in order:
        payload = node.value if node.kind == "const" else node.name
        out.append([node.kind, payload, [index[id(a)] for a in node.args]])
    return out


def fingerprint(e: SymbolExpr) -> str:
    return hashlib.sha256(json.dumps(serialize(e)).encode()).hexdigest()[:16]


def brief_text(e: SymbolExpr, limit: int = 20000) -> str:
    """Infix text, or a size and fingerprint note when the text would be huge."""
    if tree_size(e, cap=limit + 1) <= limit:
        return to_text(e)
    return f"<expression with {node_count(e)} shared nodes, sha256 {fingerprint(e)}>"


def check_growth(e: SymbolExpr, limit: int = MAX_NODES) -> SymbolExpr:
    n = node_count(e)
    if n > limit:
        raise ExpressionGrowthError(f"expression has {n} nodes (limit {limit})")
    return e


# ---------------------------------------------------------------------------
# Exact polynomials: sparse dicts mapping exponent tuples to Fractions.

Poly = dict


def to_fraction(v: float) -> Fraction:
    return Fraction(repr(float(v)))


def poly_add(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for m, c in q.items():
        out[m] = out.get(m, 0) + c
        if out[m] == 0:
            del out[m]
    return out


def poly_scale(p: Poly, c: Fraction) -> Poly:
    return {m: c * v for m, v in p.items()} if c != 0 else {}


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            out[m] = out.get(m, 0) + c1 * c2
    return {m: c for m, c in out.items() if c != 0}


def poly_pow(p: Poly, k: int, nvars: int) -> Poly:
    out: Poly = {(0,) * nvars: Fraction(1)}
    for _ in range(k):
        out = poly_mul(out, p)
    return out


def poly_const(c, nvars: int) -> Poly:
    c = Fraction(c)
    return {(0,) * nvars: c} if c != 0 else {}


def poly_monomial(i: int, nvars: int) -> Poly:
    m = [0] * nvars
    m[i] = 1
    return {tuple(m): Fraction(1)}


def to_polynomial(e: SymbolExpr, variables: list[str]) -> Poly | None:
    """Exact polynomial form of ``e`` in ``variables``, or ``None``.

    Constants are converted through their shortest decimal repr, so ``0.1``
    becomes ``1/10``.  Any other free variable, function call, or non-integer
    power makes the result ``None``.
    """
    n = len(variables)
    index = {name: i for i, name in enumerate(variables)}
    memo: dict[int, Poly | None] = {}

    def go(node: SymbolExpr) -> Poly | None:
        key = id(node)
        if key in memo:
            return memo[key]
        k = node.kind
        r: Poly | None
        if k == "const":
            r = poly_const(to_fraction(node.value), n)
        elif k == "var":
            r = poly_monomial(index[node.name], n) if node.name in index else None
        elif k == "call":
            r = None
        elif k == "neg":
            a = go(node.args[0])
            r = None if a is None else poly_scale(a, Fraction(-1))
        elif k == "pow":
            a = go(node.args[0])
            c = node.args[1].value
            r = None if a is None or c < 0 or c != int(c) else poly_pow(a, int(c), n)
        else:
            a, b = go(node.args[0]), go(node.args[1])
            if a is None or b is None:
                r = None
            elif k == "add":
                r = poly_add(a, b)
            elif k == "mul":
                r = poly_mul(a, b)
            else:
                if len(b) == 1 and (0,) * n in b:
                    r = poly_scale(a, 1 / b[(0,) * n])
                else:
                    r = None
        memo[key] = r
        return r

    return go(e)


def from_polynomial(p: Poly, variables: list[str]) -> SymbolExpr:
    """Expression for an exact polynomial (coefficients rounded to float)."""
    out = const(0.0)
    for m in sorted(p):
        term = const(float(p[m]))
        for name, k in zip(variables, m):
            if k:
                term = mul(term, power(var(name), const(k)))
        out = add(out, term)
    return out


# ---------------------------------------------------------------------------
# Variable naming


def axis_names(prefix: str, n: int) -> list[str]:
    """Variable names for an ``n``-dimensional group: ``x`` or ``x1..xn``."""
    if n == 1:
        return [prefix]
    return [f"{prefix}{i}" for i in range(1, n + 1)]


def canonical_names(e: SymbolExpr, n: int, prefixes: str = "xykw") -> SymbolExpr:
    """Rewrite the dimension-1 aliases ``x1, y1, k1, w1`` to ``x, y, k, w``."""
    if n != 1:
        return e
    names = free_vars(e)
    mapping = {f"{p}1": var(p) for p in prefixes if f"{p}1" in names}
    return substitute(e, mapping)
