"""Recursive-descent parser for scalar expressions in one variable ``s``.

Grammar (whitespace-insensitive)::

    expr      := term (('+'|'-') term)*
    term      := factor (('*'|'/') factor)*
    factor    := '-' factor | atom ('^' factor)?
    atom      := number | 's' | 'pi' | 'e' | func '(' args ')' | '(' expr ')' | piecewise
    piecewise := 'piece' '{' (cmp '=>' expr ',')* 'else' '=>' expr '}'
    cmp       := expr ('<'|'<='|'>'|'>='|'=='|'!=') expr

``^`` is right-associative and binds tighter than unary minus, so
``-s^2 == -(s^2)`` and ``2^-1 == 0.5``.  There is no implicit
multiplication.

Domain errors never raise at evaluation time: ``log`` of a non-positive
number, ``sqrt`` of a negative one and ``x/0`` give inf or nan.
"""
import math
import re
from dataclasses import dataclass
from typing import Tuple

from varalg.errors import ExprSyntaxError, UnknownFunction, UnknownVariable

FUNCTIONS = {"log": 1, "exp": 1, "sqrt": 1, "atan": 1, "abs": 1, "sign": 1, "min": 2, "max": 2}
CONSTANTS = {"pi": math.pi, "e": math.e}
RELOPS = ("<=", ">=", "==", "!=", "<", ">")


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "s"


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple[object, ...]


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Piece:
    branches: Tuple[Tuple[Cmp, object], ...]
    otherwise: object


ExprAst = object  # any of the node classes above


# ---------------------------------------------------------------- lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>=>|<=|>=|==|!=|[-+*/^(){},<>])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    pos: int


def _tokenize(src):
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError("unexpected character %r" % src[pos], pos)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, src):
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text):
        if self.tok.text != text or self.tok.kind == "end":
            raise ExprSyntaxError("unexpected %s" % self._describe(), self.tok.pos, (repr(text),))
        return self.advance()

    def _describe(self):
        return "end of input" if self.tok.kind == "end" else repr(self.tok.text)

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError("unexpected %s" % self._describe(), self.tok.pos, ("operator", "end of input"))
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = Bin(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.advance().text
            node = Bin(op, node, self.factor())
        return node

    def factor(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.factor())
        node = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            node = Bin("^", node, self.factor())
        return node

    def atom(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "op" and t.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "name":
            if t.text == "s":
                self.advance()
                return Var()
            if t.text == "piece":
                return self.piecewise()
            if t.text in CONSTANTS:
                self.advance()
                return Num(CONSTANTS[t.text])
            nxt = self.toks[self.i + 1]
            if nxt.kind == "op" and nxt.text == "(":
                if t.text not in FUNCTIONS:
                    raise UnknownFunction("unknown function %r" % t.text, t.pos, sorted(FUNCTIONS))
                return self.call()
            raise UnknownVariable("unknown variable %r" % t.text, t.pos, ("s",))
        raise ExprSyntaxError(
            "unexpected %s" % self._describe(), t.pos, ("number", "'s'", "function", "'('", "'-'", "'piece'")
        )

    def call(self):
        name_tok = self.advance()
        self.expect("(")
        args = [self.expr()]
        while self.tok.text == ",":
            self.advance()
            args.append(self.expr())
        self.expect(")")
        arity = FUNCTIONS[name_tok.text]
        if len(args) != arity:
            raise ExprSyntaxError(
                "%s takes %d argument(s), got %d" % (name_tok.text, arity, len(args)), name_tok.pos
            )
        return Call(name_tok.text, tuple(args))

    def piecewise(self):
        self.advance()
        self.expect("{")
        branches = []
        while not (self.tok.kind == "name" and self.tok.text == "else"):
            left = self.expr()
            if self.tok.text not in RELOPS:
                raise ExprSyntaxError("unexpected %s" % self._describe(), self.tok.pos, RELOPS)
            op = self.advance().text
            cond = Cmp(op, left, self.expr())
            self.expect("=>")
            branches.append((cond, self.expr()))
            self.expect(",")
        self.advance()
        self.expect("=>")
        otherwise = self.expr()
        self.expect("}")
        return Piece(tuple(branches), otherwise)


def parse(src):
    """Parse ``src`` into an AST; raises ExprSyntaxError with the offending
    offset on malformed input."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0, ("expression",))
    return _Parser(src).parse()


# ---------------------------------------------------------------- printer

def to_source(node):
    """Canonical, fully parenthesized source text; parse(to_source(a)) == a."""
    if isinstance(node, Num):
        v = node.value
        return repr(v) if math.isfinite(v) else ("1e999" if v > 0 else "(-1e999)")
    if isinstance(node, Var):
        return "s"
    if isinstance(node, Neg):
        return "(-%s)" % to_source(node.operand)
    if isinstance(node, Bin):
        return "(%s %s %s)" % (to_source(node.left), node.op, to_source(node.right))
    if isinstance(node, Call):
        return "%s(%s)" % (node.name, ", ".join(to_source(a) for a in node.args))
    if isinstance(node, Cmp):
        return "%s %s %s" % (to_source(node.left), node.op, to_source(node.right))
    if isinstance(node, Piece):
        parts = ["%s => %s, " % (to_source(c), to_source(e)) for c, e in node.branches]
        return "piece{ %selse => %s }" % ("".join(parts), to_source(node.otherwise))
    raise TypeError("not an expression node: %r" % (node,))


# ---------------------------------------------------------------- semantics

def _div(a, b):
    if b == 0.0:
        if a == 0.0 or a != a:
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def _pow(a, b):
    try:
        return math.pow(a, b)
    except ValueError:
        if a == 0.0:  # 0 ** negative
            return math.inf
        return math.nan
    except OverflowError:
        if a < 0.0 and b == int(b) and int(b) % 2:
            return -math.inf
        return math.inf


def _log(x):
    if x > 0.0:
        return math.log(x)
    if x == 0.0:
        return -math.inf
    return math.nan


def _sqrt(x):
    return math.sqrt(x) if x >= 0.0 else math.nan


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _sign(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return x  # keeps 0.0, -0.0 and nan


def _min(a, b):
    if a != a or b != b:
        return math.nan
    return a if a <= b else b


def _max(a, b):
    if a != a or b != b:
        return math.nan
    return a if a >= b else b


BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": _pow,
}
CALLS = {"log": _log, "exp": _exp, "sqrt": _sqrt, "atan": math.atan, "abs": abs, "sign": _sign,
         "min": _min, "max": _max}
CMPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def interpret(node, s):
    """Direct recursive evaluation of ``node`` at ``s``."""
    s = float(s)
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return s
    if isinstance(node, Neg):
        return -interpret(node.operand, s)
    if isinstance(node, Bin):
        return BINOPS[node.op](interpret(node.left, s), interpret(node.right, s))
    if isinstance(node, Call):
        return CALLS[node.name](*(interpret(a, s) for a in node.args))
    if isinstance(node, Piece):
        for cond, branch in node.branches:
            if CMPS[cond.op](interpret(cond.left, s), interpret(cond.right, s)):
                return interpret(branch, s)
        return interpret(node.otherwise, s)
    raise TypeError("not an expression node: %r" % (node,))


def _closure(node):
    if isinstance(node, Num):
        v = node.value
        return lambda s: v
    if isinstance(node, Var):
        return lambda s: s
    if isinstance(node, Neg):
        inner = _closure(node.operand)
        return lambda s: -inner(s)
    if isinstance(node, Bin):
        fn, lf, rf = BINOPS[node.op], _closure(node.left), _closure(node.right)
        return lambda s: fn(lf(s), rf(s))
    if isinstance(node, Call):
        fn = CALLS[node.name]
        if len(node.args) == 1:
            a0 = _closure(node.args[0])
            return lambda s: fn(a0(s))
        a0, a1 = (_closure(a) for a in node.args)
        return lambda s: fn(a0(s), a1(s))
    if isinstance(node, Piece):
        compiled = [
            (CMPS[c.op], _closure(c.left), _closure(c.right), _closure(e)) for c, e in node.branches
        ]
        otherwise = _closure(node.otherwise)

        def piece(s):
            for test, lf, rf, branch in compiled:
                if test(lf(s), rf(s)):
                    return branch(s)
            return otherwise(s)

        return piece
    raise TypeError("not an expression node: %r" % (node,))


def compile_ast(node, label=None):
    """Compile an AST into a ScalarFunction (no closed-form primitive or
    derivative; downstream code uses quadrature and finite differences)."""
    from varalg.nonlin import ScalarFunction

    fn = _closure(node)
    src = to_source(node)
    return ScalarFunction(eval=lambda s: fn(float(s)), label=label or src, source=src)


# the public name used throughout the package
compile = compile_ast  # noqa: A001


def compile_source(src, label=None):
    return compile_ast(parse(src), label=label or src)
