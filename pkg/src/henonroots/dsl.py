"""Map-expression language: tokenizer, recursive-descent parser, printer, evaluator.

    map    := mterm ('o' mterm)*
    mterm  := matom ('^' uint)?
    matom  := '(' expr ',' expr ')' | '(' map ')' | 'tau'
            | 'henon' '(' 'p' '=' expr ',' 'a' '=' expr ')'
            | 'elem_nonflow' '(' 'r' '=' uint ',' 'mu' '=' uint ',' 'q' '=' expr ',' 'beta' '=' expr ')'
    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' uint)?
    base   := number | 'i' | 'zeta' '(' uint ')' | 'z' | 'w' | 't' | '(' expr ')'

Numbers keep their literal text so printing reproduces them; decimals are
read as exact rationals unless approximate evaluation is requested.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .elementary import ElementaryNonFlow
from .henon import HenonComposition, HenonFactor, NotMonicError
from .poly import BiPoly, PolyMap2, UniPoly, compose, iterate
from .scalars import approximate, div, is_zero, primitive_root, simplify


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.msg, self.line, self.col = msg, line, col


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    text: str


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Zeta:
    n: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exp: int


@dataclass(frozen=True)
class Pair:
    first: object
    second: object


@dataclass(frozen=True)
class Henon:
    p: object
    a: object
    pos: tuple = field(default=(1, 1), compare=False)


@dataclass(frozen=True)
class ElemNonFlow:
    r: int
    mu: int
    q: object
    beta: object
    pos: tuple = field(default=(1, 1), compare=False)


@dataclass(frozen=True)
class Tau:
    pass


@dataclass(frozen=True)
class Compose:
    left: object
    right: object


@dataclass(frozen=True)
class MapPow:
    base: object
    exp: int


MAP_NODES = (Pair, Henon, ElemNonFlow, Tau, Compose, MapPow)

# ---------------------------------------------------------------------------
# tokens

_TOKEN = re.compile(
    r"""(?P<ws>[ \t\r\n]+)
      | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>[-+*/^(),=])""",
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            for k, ch in enumerate(m.group(), start=pos):
                if ch == "\n":
                    line, line_start = line + 1, k + 1
        else:
            out.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    out.append(Token("end", "", line, pos - line_start + 1))
    return out


# ---------------------------------------------------------------------------
# parser

_SCALAR_VARS = {"z", "w", "t"}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.k = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.k]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "end":
            self.k += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.tok
        if not self.accept(text):
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            self.error(f"expected {text!r}, found {found}")
        return tok

    def uint(self) -> int:
        tok = self.tok
        if tok.kind != "num" or not tok.text.isdigit():
            self.error("expected a non-negative integer")
        self.k += 1
        return int(tok.text)

    def finish(self):
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")

    # scalar / polynomial expressions
    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-"):
            op = self.tok.text
            self.k += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.tok.text in ("*", "/"):
            op = self.tok.text
            self.k += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        if self.accept("-"):
            return Neg(self.factor())
        node = self.base()
        if self.accept("^"):
            node = Pow(node, self.uint())
        return node

    def base(self):
        tok = self.tok
        if tok.kind == "num":
            self.k += 1
            return Num(tok.text)
        if tok.kind == "ident":
            if tok.text == "i":
                self.k += 1
                return Imag()
            if tok.text == "zeta":
                self.k += 1
                self.expect("(")
                n = self.uint()
                if n < 1:
                    self.error("zeta(N) needs N >= 1", tok)
                self.expect(")")
                return Zeta(n)
            if tok.text in _SCALAR_VARS:
                self.k += 1
                return Var(tok.text)
            if tok.text in ("henon", "elem_nonflow", "tau", "o"):
                self.error(f"{tok.text!r} is a map, not a polynomial")
            self.error(f"unknown identifier {tok.text!r}")
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        self.error(f"expected a number, variable or '(', found {found}")

    # maps
    def map(self):
        node = self.mterm()
        while self.tok.kind == "ident" and self.tok.text == "o":
            self.k += 1
            node = Compose(node, self.mterm())
        return node

    def mterm(self):
        node = self.matom()
        if self.accept("^"):
            node = MapPow(node, self.uint())
        return node

    def matom(self):
        tok = self.tok
        if tok.kind == "ident" and tok.text == "tau":
            self.k += 1
            return Tau()
        if tok.kind == "ident" and tok.text == "henon":
            self.k += 1
            self.expect("(")
            self.expect("p")
            self.expect("=")
            p = self.expr()
            self.expect(",")
            self.expect("a")
            self.expect("=")
            a = self.expr()
            self.expect(")")
            return Henon(p, a, (tok.line, tok.col))
        if tok.kind == "ident" and tok.text == "elem_nonflow":
            self.k += 1
            self.expect("(")
            vals = {}
            for key in ("r", "mu", "q", "beta"):
                if key != "r":
                    self.expect(",")
                self.expect(key)
                self.expect("=")
                vals[key] = self.uint() if key in ("r", "mu") else self.expr()
            self.expect(")")
            return ElemNonFlow(vals["r"], vals["mu"], vals["q"], vals["beta"], (tok.line, tok.col))
        if tok.text == "(" and tok.kind == "op":
            save = self.k
            try:
                self.k += 1
                first = self.expr()
                self.expect(",")
                second = self.expr()
                self.expect(")")
                return Pair(first, second)
            except ParseError as pair_err:
                self.k = save + 1
                try:
                    node = self.map()
                    self.expect(")")
                    return node
                except ParseError:
                    raise pair_err from None
        if tok.kind == "ident":
            if tok.text in _SCALAR_VARS or tok.text in ("i", "zeta"):
                self.error("expected a map: a pair '(f, g)', henon(...), elem_nonflow(...) or tau")
            self.error(f"unknown identifier {tok.text!r}")
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        self.error(f"expected a map, found {found}")


def parse(text: str):
    """Parse a map expression."""
    p = _Parser(text)
    node = p.map()
    p.finish()
    return node


def parse_expr(text: str):
    """Parse a scalar or polynomial expression."""
    p = _Parser(text)
    node = p.expr()
    p.finish()
    return node


# ---------------------------------------------------------------------------
# printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(node) -> str:
    """Canonical text; parse(to_text(ast)) == ast."""
    return _show(node, 0)


def _show(node, ctx: int) -> str:
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Imag):
        return "i"
    if isinstance(node, Zeta):
        return f"zeta({node.n})"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        s = "-" + _show(node.arg, 3)
        return f"({s})" if ctx > 3 else s
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        s = f"{_show(node.left, prec)} {node.op} {_show(node.right, prec + 1)}"
        return f"({s})" if ctx > prec else s
    if isinstance(node, Pow):
        s = f"{_show(node.base, 4)}^{node.exp}"
        return f"({s})" if ctx > 3 else s
    if isinstance(node, Pair):
        return f"({to_text(node.first)}, {to_text(node.second)})"
    if isinstance(node, Henon):
        return f"henon(p={to_text(node.p)}, a={to_text(node.a)})"
    if isinstance(node, ElemNonFlow):
        return f"elem_nonflow(r={node.r}, mu={node.mu}, q={to_text(node.q)}, beta={to_text(node.beta)})"
    if isinstance(node, Tau):
        return "tau"
    if isinstance(node, Compose):
        s = f"{_show(node.left, 1)} o {_show(node.right, 2)}"
        return f"({s})" if ctx > 1 else s
    if isinstance(node, MapPow):
        s = f"{_show(node.base, 4)}^{node.exp}"
        return f"({s})" if ctx > 3 else s
    raise TypeError(f"not an AST node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvalContext:
    approx: bool = False


def _number(text: str, ctx: EvalContext):
    if ctx.approx:
        return complex(float(text))
    return simplify(Fraction(text)) if not text.isdigit() else int(text)


def eval_expr(node, ctx: EvalContext | None = None, var_map: dict | None = None):
    """Evaluate to a scalar or BiPoly.  ``var_map`` maps names to values."""
    ctx = ctx or EvalContext()
    if var_map is None:
        var_map = {"z": BiPoly.z(), "w": BiPoly.w(), "t": BiPoly.w()}
    ev = lambda n: eval_expr(n, ctx, var_map)  # noqa: E731
    if isinstance(node, Num):
        return _number(node.text, ctx)
    if isinstance(node, Imag):
        return 1j if ctx.approx else primitive_root(4)
    if isinstance(node, Zeta):
        return approximate(primitive_root(node.n)) if ctx.approx else simplify(primitive_root(node.n))
    if isinstance(node, Var):
        return var_map[node.name]
    if isinstance(node, Neg):
        return -ev(node.arg)
    if isinstance(node, BinOp):
        a, b = ev(node.left), ev(node.right)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if isinstance(b, BiPoly):
            if b.degree > 0:
                raise ValueError("division by a non-constant polynomial")
            b = b.constant()
        if is_zero(b):
            raise ZeroDivisionError("division by zero")
        return div(a, b)
    if isinstance(node, Pow):
        return ev(node.base) ** node.exp
    raise TypeError(f"{type(node).__name__} is not a scalar or polynomial expression")


def eval_scalar(node, ctx: EvalContext | None = None):
    v = eval_expr(node, ctx)
    if isinstance(v, BiPoly):
        if v.degree > 0:
            raise ValueError(f"expected a scalar, got the polynomial {v}")
        v = v.constant()
    return v


def to_unipoly(node, ctx, var: str) -> UniPoly:
    p = eval_expr(node, ctx)
    if not isinstance(p, BiPoly):
        p = BiPoly.const(p)
    if p.degree_in("z") > 0:
        raise ValueError(f"expected a polynomial in {var} only, got {p}")
    return UniPoly([p.coeff(0, j) for j in range(max(p.degree_in("w"), 0) + 1)], var)


def _located(node, exc: Exception) -> ParseError:
    line, col = node.pos
    return ParseError(str(exc), line, col)


def eval_map(node, ctx: EvalContext | None = None):
    """HenonComposition, ElementaryNonFlow or PolyMap2, whichever is most specific."""
    ctx = ctx or EvalContext()
    if isinstance(node, Tau):
        return PolyMap2.swap()
    if isinstance(node, Pair):
        def part(n):
            v = eval_expr(n, ctx)
            return v if isinstance(v, BiPoly) else BiPoly.const(v)
        return PolyMap2(part(node.first), part(node.second))
    if isinstance(node, Henon):
        try:
            p = to_unipoly(node.p, ctx, "w")
            a = eval_scalar(node.a, ctx)
            if is_zero(a):
                raise ValueError("henon(...) needs a != 0")
            return HenonComposition([HenonFactor(p, a)])
        except NotMonicError as exc:
            raise _located(node, f"{exc} (maps in G are built from monic p)") from None
        except ValueError as exc:
            raise _located(node, exc) from None
    if isinstance(node, ElemNonFlow):
        try:
            q = to_unipoly(node.q, ctx, "t")
            return ElementaryNonFlow(node.r, node.mu, q, eval_scalar(node.beta, ctx))
        except ValueError as exc:
            raise _located(node, exc) from None
    if isinstance(node, Compose):
        a, b = eval_map(node.left, ctx), eval_map(node.right, ctx)
        if isinstance(a, HenonComposition) and isinstance(b, HenonComposition):
            return a @ b
        return compose(as_polymap(a), as_polymap(b))
    if isinstance(node, MapPow):
        m = eval_map(node.base, ctx)
        if node.exp == 0:
            return PolyMap2.identity()
        if isinstance(m, HenonComposition):
            return m.power(node.exp)
        return iterate(as_polymap(m), node.exp)
    raise TypeError(f"{type(node).__name__} is not a map expression")


def as_polymap(v, ctx: EvalContext | None = None) -> PolyMap2:
    if isinstance(v, PolyMap2):
        out = v
    else:
        out = v.as_map()
    return out.approx() if ctx is not None and ctx.approx else out


def load_map(text: str, approx: bool = False):
    return eval_map(parse(text), EvalContext(approx))


def load_scalar(text: str, approx: bool = False):
    return eval_scalar(parse_expr(text), EvalContext(approx))

