"""Parametric immersions x(u, v) written as text, evaluated as order-3 jets.

Surface file format (UTF-8, ``#`` starts a comment)::

    dim = 4
    index = 1
    surface_index = 1
    domain = u in [0.1, 1], v in [0.1, 1]
    exclude = u + v = 0
    param a = 2
    x1 = cos(sqrt(2)*u)/(u+v) + ...
    ...

Expression grammar (precedence ``^`` > unary minus > ``* /`` > ``+ -``; ``^``
is right associative and takes integer exponents only)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | 'u' | 'v' | 'pi' | PARAM | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := sin | cos | sinh | cosh | exp | ln | sqrt
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import jets
from .algebra import Signature
from .errors import DomainError, ParseError
from .jets import Jet, JetVector

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "exp", "ln", "sqrt")
VARIABLES = ("u", "v")
CONSTANTS = {"pi": math.pi}


# --------------------------------------------------------------------------
# expression trees


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Func(Node):
    name: str
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


def num(x: float) -> Node:
    """Literal node; negative values become ``Neg(Num(|x|))`` so they print and re-parse alike."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite literal")
    return Neg(Num(-x)) if x < 0 or (x == 0 and math.copysign(1, x) < 0) else Num(x)


# --------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | op | end
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, column + pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), line, column + pos))
        pos = m.end()
    tokens.append(Token("end", "", line, column + len(text)))
    return tokens


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, tokens, params):
        self.toks = tokens
        self.i = 0
        self.params = params

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, msg, expected=()):
        t = self.tok
        raise ParseError(msg, t.line, t.column, expected)

    def take(self, text):
        if self.tok.text != text:
            what = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            self.fail(f"unexpected {what}", {repr(text)})
        self.i += 1

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}", {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return node

    def expr(self):
        node = self.term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.tok
            self.i += 1
            exponent = self.unary()
            if _mentions_variables(exponent):
                raise ParseError("exponent must be a constant integer", t.line, t.column + 1)
            value = evaluate_float(exponent, 0.0, 0.0)
            if not float(value).is_integer():
                raise ParseError(f"exponent {value} is not an integer", t.line, t.column + 1)
            return Pow(base, int(value))
        return base

    def atom(self):
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return Num(float(t.text))
        if t.kind == "ident":
            self.i += 1
            name = t.text
            is_call = self.tok.kind == "op" and self.tok.text == "("
            if name in FUNCTIONS:
                if not is_call:
                    raise ParseError(f"function {name!r} must be called with one argument", t.line, t.column, {"'('"})
                self.i += 1
                arg = self.expr()
                if self.tok.text == ",":
                    self.fail(f"function {name!r} takes exactly one argument", {"')'"})
                self.take(")")
                return Func(name, arg)
            if is_call:
                raise ParseError(f"{name!r} is not a function", t.line, t.column)
            if name in VARIABLES:
                return Var(name)
            if name in self.params:
                return num(self.params[name])
            if name in CONSTANTS:
                return Num(CONSTANTS[name])
            raise ParseError(f"unknown identifier {name!r}", t.line, t.column)
        if t.kind == "op" and t.text == "(":
            self.i += 1
            node = self.expr()
            self.take(")")
            return node
        what = "end of input" if t.kind == "end" else repr(t.text)
        self.fail(f"unexpected {what}", {"number", "identifier", "'('", "'-'"})


def parse_expression(source: str, params: dict | None = None, line: int = 1, column: int = 1) -> Node:
    """Parse one expression; ``params`` are substituted as literals."""
    return _Parser(tokenize(source, line, column), dict(params or {})).parse()


def _mentions_variables(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Num):
        return False
    if isinstance(node, (Neg, Func)):
        return _mentions_variables(node.arg)
    if isinstance(node, Pow):
        return _mentions_variables(node.base)
    return _mentions_variables(node.left) or _mentions_variables(node.right)


# --------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def to_source(node: Node) -> str:
    """Pretty-print with the minimum parentheses needed to re-parse identically."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Func):
        return f"{node.name}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.arg)
        return "-" + (inner if _prec(node.arg) >= 3 else f"({inner})")
    if isinstance(node, Pow):
        base = to_source(node.base)
        if _prec(node.base) <= 4:
            base = f"({base})"
        return f"{base}^{node.exponent}" if node.exponent >= 0 else f"{base}^(-{-node.exponent})"
    p = _PREC[node.op]
    left = to_source(node.left)
    if _prec(node.left) < p:
        left = f"({left})"
    right = to_source(node.right)
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {node.op} {right}"


# --------------------------------------------------------------------------
# evaluation

_FLOAT_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
}


def evaluate_float(node: Node, u, v):
    """Plain numpy evaluation (no derivatives)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return u if node.name == "u" else v
    if isinstance(node, Neg):
        return -evaluate_float(node.arg, u, v)
    if isinstance(node, Func):
        return _FLOAT_FUNCS[node.name](evaluate_float(node.arg, u, v))
    if isinstance(node, Pow):
        return evaluate_float(node.base, u, v) ** float(node.exponent)
    a = evaluate_float(node.left, u, v)
    b = evaluate_float(node.right, u, v)
    return {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b, "/": lambda: a / b}[node.op]()


def evaluate_jet(node: Node, u: Jet, v: Jet) -> Jet:
    if isinstance(node, Num):
        return Jet.constant(np.full(u.shape, node.value))
    if isinstance(node, Var):
        return u if node.name == "u" else v
    if isinstance(node, Neg):
        return -evaluate_jet(node.arg, u, v)
    if isinstance(node, Func):
        return jets.ELEMENTARY[node.name](evaluate_jet(node.arg, u, v))
    if isinstance(node, Pow):
        return jets.pow_int(evaluate_jet(node.base, u, v), node.exponent)
    a = evaluate_jet(node.left, u, v)
    b = evaluate_jet(node.right, u, v)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    return a / b


def seeds(u, v) -> tuple[Jet, Jet]:
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    return Jet.variable(u, 0), Jet.variable(v, 1)


# --------------------------------------------------------------------------
# symbolic differentiation (no simplification beyond dropping exact zeros/ones)


def _is_num(node, value):
    return isinstance(node, Num) and node.value == value


def _add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a, b):
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return BinOp("/", a, b)


def _neg(a):
    return Num(0.0) if _is_num(a, 0.0) else Neg(a)


def diff(node: Node, var: str) -> Node:
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0 if node.name == var else 0.0)
    if isinstance(node, Neg):
        return _neg(diff(node.arg, var))
    if isinstance(node, Pow):
        n = node.exponent
        if n == 0:
            return Num(0.0)
        inner = node.base if n == 1 else Pow(node.base, n - 1)
        return _mul(_mul(Num(float(n)), inner), diff(node.base, var))
    if isinstance(node, Func):
        a = node.arg
        da = diff(a, var)
        if _is_num(da, 0.0):
            return Num(0.0)
        outer = {
            "sin": lambda: Func("cos", a),
            "cos": lambda: Neg(Func("sin", a)),
            "sinh": lambda: Func("cosh", a),
            "cosh": lambda: Func("sinh", a),
            "exp": lambda: node,
            "ln": lambda: BinOp("/", Num(1.0), a),
            "sqrt": lambda: BinOp("/", Num(0.5), node),
        }[node.name]()
        return _mul(outer, da)
    a, b = node.left, node.right
    da, db = diff(a, var), diff(b, var)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    # quotient rule
    return _sub(_div(da, b), _div(_mul(a, db), Pow(b, 2)))


# --------------------------------------------------------------------------
# immersion specs


@dataclass(frozen=True)
class ImmersionSpec:
    signature: Signature
    surface_index: int
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    components: tuple[Node, ...]
    excludes: tuple[tuple[Node, Node], ...] = ()
    params: dict = field(default_factory=dict, compare=False)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.components) != self.signature.dimension:
            raise ValueError(
                f"{len(self.components)} components for ambient dimension {self.signature.dimension}"
            )
        if self.surface_index not in (0, 1):
            raise ValueError("surface_index must be 0 or 1")
        for lo, hi in (self.u_range, self.v_range):
            if not lo <= hi:
                raise ValueError("empty chart domain")

    @property
    def dimension(self) -> int:
        return self.signature.dimension


def _fmt_bound(x: float) -> str:
    return repr(float(x))


def spec_to_source(spec: ImmersionSpec, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines += [
        f"dim = {spec.signature.dimension}",
        f"index = {spec.signature.index}",
        f"surface_index = {spec.surface_index}",
        "domain = u in [{}, {}], v in [{}, {}]".format(*map(_fmt_bound, spec.u_range + spec.v_range)),
    ]
    for lhs, rhs in spec.excludes:
        lines.append(f"exclude = {to_source(lhs)} = {to_source(rhs)}")
    for i, comp in enumerate(spec.components, 1):
        lines.append(f"x{i} = {to_source(comp)}")
    return "\n".join(lines) + "\n"


_HEADER_RE = re.compile(r"^\s*(?P<key>[A-Za-z_][A-Za-z_0-9]*)(?:\s+(?P<name>[A-Za-z_][A-Za-z_0-9]*))?\s*=\s*(?P<rest>.*?)\s*$")
_DOMAIN_RE = re.compile(r"^u\s+in\s*\[(?P<u>[^\]]*)\]\s*(?:,\s*v\s+in\s*\[(?P<v>[^\]]*)\])?\s*$")


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def _const(src, params, lineno, col):
    node = parse_expression(src, params, lineno, col)
    if _mentions_variables(node):
        raise ParseError("expected a constant expression", lineno, col)
    return float(evaluate_float(node, 0.0, 0.0))


def _read_sections(text: str, component_prefix: str):
    """Split a source into header entries and component expressions."""
    header, comps, params = {}, {}, {}
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = _HEADER_RE.match(line)
        if m is None:
            raise ParseError("expected 'key = value'", lineno, len(line) - len(line.lstrip()) + 1, {"'='"})
        col = m.start("rest") + 1
        entries.append((lineno, m.group("key"), m.group("name"), m.group("rest"), col))
    # parameters first so they may be used anywhere
    for lineno, key, name, rest, col in entries:
        if key == "param":
            if not name:
                raise ParseError("param needs a name", lineno, 1)
            if name in params or name in VARIABLES or name in FUNCTIONS or name in CONSTANTS:
                raise ParseError(f"parameter name {name!r} is reserved or duplicated", lineno, 1)
            params[name] = _const(rest, params, lineno, col)
    cre = re.compile(rf"^{component_prefix}(\d+)$")
    for lineno, key, name, rest, col in entries:
        if key == "param":
            continue
        if name:
            raise ParseError(f"unexpected token {name!r}", lineno, 1, {"'='"})
        cm = cre.match(key)
        if cm:
            i = int(cm.group(1))
            if i in comps:
                raise ParseError(f"component {key} defined twice", lineno, 1)
            comps[i] = (parse_expression(rest, params, lineno, col), lineno)
        else:
            if key in header:
                raise ParseError(f"header {key!r} given twice", lineno, 1)
            header[key] = (rest, lineno, col)
    return header, comps, params


def _header_int(header, key, default=None):
    if key not in header:
        if default is None:
            raise ParseError(f"missing header {key!r}", 1, 1, {key})
        return default
    rest, lineno, col = header[key]
    try:
        return int(rest)
    except ValueError:
        raise ParseError(f"{key} must be an integer", lineno, col) from None


def _header_domain(header, params, need_v=True):
    if "domain" not in header:
        raise ParseError("missing header 'domain'", 1, 1, {"domain"})
    rest, lineno, col = header["domain"]
    m = _DOMAIN_RE.match(rest)
    if m is None or (need_v and m.group("v") is None):
        shape = "u in [a, b], v in [c, d]" if need_v else "u in [a, b]"
        raise ParseError(f"domain must read '{shape}'", lineno, col)

    def bounds(group):
        parts = m.group(group).split(",")
        if len(parts) != 2:
            raise ParseError("interval needs two bounds", lineno, col + m.start(group))
        off = col + m.start(group)
        lo = _const(parts[0], params, lineno, off)
        hi = _const(parts[1], params, lineno, off + len(parts[0]) + 1)
        if not lo <= hi:
            raise ParseError("empty interval", lineno, off)
        return (lo, hi)

    return bounds("u"), (bounds("v") if m.group("v") is not None else None)


def _ordered_components(comps, dim, prefix):
    missing = [i for i in range(1, dim + 1) if i not in comps]
    extra = [i for i in comps if not 1 <= i <= dim]
    if missing or extra:
        lineno = comps[extra[0]][1] if extra else 1
        raise ParseError(
            f"expected components {prefix}1..{prefix}{dim}; missing {missing}, unexpected {extra}", lineno, 1
        )
    return tuple(comps[i][0] for i in range(1, dim + 1))


def parse(source: str, name: str = "") -> ImmersionSpec:
    header, comps, params = _read_sections(source, "x")
    known = {"dim", "index", "surface_index", "domain", "exclude"}
    for key, (_, lineno, _) in header.items():
        if key not in known:
            raise ParseError(f"unknown header {key!r}", lineno, 1, known)
    dim = _header_int(header, "dim")
    index = _header_int(header, "index", 0)
    t = _header_int(header, "surface_index", 0)
    if dim < 3:
        raise ParseError("dim must be at least 3", header["dim"][1], 1)
    if not 0 <= index <= dim:
        raise ParseError("index out of range", header["index"][1], 1)
    if t not in (0, 1):
        raise ParseError("surface_index must be 0 or 1", header["surface_index"][1], 1)
    (u_rng, v_rng) = _header_domain(header, params)
    excludes = []
    if "exclude" in header:
        rest, lineno, col = header["exclude"]
        if rest.count("=") != 1:
            raise ParseError("exclude must read '<expr> = <expr>'", lineno, col, {"'='"})
        lhs, rhs = rest.split("=")
        excludes.append(
            (parse_expression(lhs, params, lineno, col), parse_expression(rhs, params, lineno, col + len(lhs) + 1))
        )
    components = _ordered_components(comps, dim, "x")
    return ImmersionSpec(Signature(dim, index), t, u_rng, v_rng, components, tuple(excludes), params, name)


def load(path) -> ImmersionSpec:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse(text, name=str(path))


def check_domain(spec: ImmersionSpec, u, v, tol: float = 1e-12):
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    (a, b), (c, d) = spec.u_range, spec.v_range
    su = max(1.0, abs(a), abs(b)) * tol
    sv = max(1.0, abs(c), abs(d)) * tol
    if np.any(u < a - su) or np.any(u > b + su) or np.any(v < c - sv) or np.any(v > d + sv):
        raise DomainError(f"point outside chart domain u in {spec.u_range}, v in {spec.v_range}")
    for lhs, rhs in spec.excludes:
        gap = np.asarray(evaluate_float(lhs, u, v) - evaluate_float(rhs, u, v))
        if np.any(np.abs(gap) <= 1e-12):
            raise DomainError(f"point on excluded line {to_source(lhs)} = {to_source(rhs)}")


def evaluate(spec: ImmersionSpec, u, v) -> JetVector:
    """Order-3 jets of every component at the chart point(s) (u, v)."""
    check_domain(spec, u, v)
    ju, jv = seeds(u, v)
    comps = [evaluate_jet(c, ju, jv) for c in spec.components]
    return JetVector(Jet.stack(comps), spec.signature)


def validate_on_sphere(spec: ImmersionSpec, u, v, tol: float = 1e-9) -> tuple[float, bool]:
    """Max of ``|<x,x> - 1|`` over the sample points, and whether it is within tol."""
    check_domain(spec, u, v)
    x = np.stack([np.broadcast_to(evaluate_float(c, *np.broadcast_arrays(u, v)), np.broadcast(u, v).shape)
                  for c in spec.components], axis=-1)
    q = np.sum(x * x * spec.signature.signs, axis=-1)
    res = float(np.max(np.abs(q - 1.0)))
    return res, res <= tol


def make_grid(u_range, v_range, nu: int, nv: int, endpoint: bool = True):
    """Flattened tensor grid, u-major: index ``i*nv + j`` is ``(u_i, v_j)``."""
    us = np.linspace(u_range[0], u_range[1], nu, endpoint=endpoint)
    vs = np.linspace(v_range[0], v_range[1], nv, endpoint=endpoint)
    U, V = np.meshgrid(us, vs, indexing="ij")
    return U.ravel(), V.ravel()


# --------------------------------------------------------------------------
# curves (light-cone constructor input)


@dataclass(frozen=True)
class CurveSpec:
    signature: Signature
    u_range: tuple[float, float]
    components: tuple[Node, ...]
    name: str = field(default="", compare=False)


def parse_curve(source: str, name: str = "") -> CurveSpec:
    """Curve file: ``dim``, ``index``, ``domain = u in [a, b]``, ``param``s, ``z1 = ...``."""
    header, comps, params = _read_sections(source, "z")
    known = {"dim", "index", "domain"}
    for key, (_, lineno, _) in header.items():
        if key not in known:
            raise ParseError(f"unknown header {key!r}", lineno, 1, known)
    dim = _header_int(header, "dim")
    index = _header_int(header, "index", 1)
    u_rng, _ = _header_domain(header, params, need_v=False)
    components = _ordered_components(comps, dim, "z")
    for c in components:
        if _uses(c, "v"):
            raise ParseError("curve components may only depend on u", 1, 1)
    return CurveSpec(Signature(dim, index), u_rng, components, name)


def curve_to_source(curve: CurveSpec) -> str:
    lines = [
        f"dim = {curve.signature.dimension}",
        f"index = {curve.signature.index}",
        f"domain = u in [{curve.u_range[0]!r}, {curve.u_range[1]!r}]",
    ]
    lines += [f"z{i} = {to_source(c)}" for i, c in enumerate(curve.components, 1)]
    return "\n".join(lines) + "\n"


def _uses(node: Node, name: str) -> bool:
    if isinstance(node, Var):
        return node.name == name
    if isinstance(node, Num):
        return False
    if isinstance(node, (Neg, Func)):
        return _uses(node.arg, name)
    if isinstance(node, Pow):
        return _uses(node.base, name)
    return _uses(node.left, name) or _uses(node.right, name)
