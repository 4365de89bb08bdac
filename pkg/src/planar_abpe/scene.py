"""Plain-text scene files: a measure, a compact set ``K`` and run defaults.

Grammar
-------
One statement per line, ``key: body``.  Blank lines and text after ``#`` are
ignored.  Numbers are Python float/complex literals without spaces
(``1.5``, ``-2``, ``2.5j``, ``-1+2.5j``).  Words in a body are separated by
whitespace; a double-quoted string counts as one word.

Measure components (``label`` optional, default ``c<n>``; ``density``
optional, default 1; a density is a number or ``expr "<expression in z>"``)::

    measure: atom at Z mass W [label L]
    measure: arc circle center Z radius R [density D | mass W] [label L]
    measure: arc segment from Z to Z [density D] [label L]
    measure: area disk center Z radius R [density D] [label L]
    measure: area annulus center Z inner R outer R [density D] [label L]
    measure: area rectangle from Z to Z [density D] [label L]

Pieces of the compact set ``K`` (a union)::

    K: disk center Z radius R
    K: annulus center Z inner R outer R
    K: segment from Z to Z
    K: rectangle from Z to Z

Defaults::

    resolution: 64            # quadrature resolution m
    degree: 30                # basis degree N
    window: X0 Y0 X1 Y1       # working window
    positive: true|false      # require a positive measure
    phi: cauchy | constant V | expr "<expression in z>"

Expressions use ``z`` (complex), ``x``, ``y``, ``pi``, ``e``, arithmetic
operators and the functions ``exp log sqrt sin cos tan sinh cosh tanh abs
real imag conj arg``.  They are compiled from a restricted syntax tree, never
passed to ``eval``.
"""
from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError, ParseError
from .measure import ArcDensity, Atom, AreaDensity, PlanarMeasure
from .shapes import Annulus, Circle, Disk, Rectangle, Segment

__all__ = ["Expression", "Scene", "parse_scene", "serialize_scene", "load_scene",
           "MAX_SCENE_BYTES"]

MAX_SCENE_BYTES = 1 << 20

_FUNCS: dict[str, Callable] = {
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "sin": np.sin, "cos": np.cos,
    "tan": np.tan, "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh, "abs": np.abs,
    "real": np.real, "imag": np.imag, "conj": np.conj, "arg": np.angle,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}
_UNOPS = {ast.USub: np.negative, ast.UAdd: np.positive}


def _compile(node):
    if isinstance(node, ast.Expression):
        return _compile(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
            and not isinstance(node.value, bool):
        v = node.value
        return lambda env: v
    if isinstance(node, ast.Name):
        name = node.id
        if name in ("z", "x", "y"):
            return lambda env: env[name]
        if name in _CONSTS:
            v = _CONSTS[name]
            return lambda env: v
        raise InvalidInputError(f"unknown name {name!r} in expression")
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op, a, b = _BINOPS[type(node.op)], _compile(node.left), _compile(node.right)
        return lambda env: op(a(env), b(env))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
        op, a = _UNOPS[type(node.op)], _compile(node.operand)
        return lambda env: op(a(env))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords:
        fn, a = _FUNCS[node.func.id], _compile(node.args[0])
        return lambda env: fn(a(env))
    raise InvalidInputError(f"unsupported expression element {type(node).__name__}")


@dataclass(frozen=True)
class Expression:
    """A vectorized function of ``z`` compiled from restricted source text.

    Equality and hashing go by the source text, so scenes holding
    expressions compare equal after a serialize/parse round trip.
    """

    source: str
    _fn: Callable = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if len(self.source) > 10_000:
            raise InvalidInputError("expression too long")
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise InvalidInputError(f"malformed expression {self.source!r}: {exc.msg}") from None
        object.__setattr__(self, "_fn", _compile(tree))

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            out = self._fn({"z": z, "x": z.real, "y": z.imag})
        return np.broadcast_to(np.asarray(out), z.shape)


@dataclass(frozen=True)
class Scene:
    components: tuple = ()
    K: tuple = ()
    resolution: int = 64
    degree: int = 30
    window: tuple | None = None
    positive: bool = False
    phi: tuple | None = None        # ("cauchy",), ("constant", v) or ("expr", Expression)

    def measure(self) -> PlanarMeasure:
        return PlanarMeasure(self.components, self.resolution, self.positive)

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.components]


# --------------------------------------------------------------------------
# tokenizer and parser

_TOKEN = re.compile(r'"([^"]*)"|(\S+)')


@dataclass(frozen=True)
class _Tok:
    text: str
    col: int
    quoted: bool = False


class _Cursor:
    def __init__(self, toks, line, end_col):
        self.toks, self.pos, self.line, self.end_col = toks, 0, line, end_col

    def error(self, msg, tok=None):
        col = tok.col if tok is not None else (self.toks[self.pos].col if self.pos < len(self.toks)
                                               else self.end_col)
        return ParseError(msg, self.line, col)

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self, what):
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}")
        self.pos += 1
        return tok

    def word(self, *choices):
        tok = self.next(" or ".join(choices))
        if tok.quoted or tok.text not in choices:
            raise self.error(f"expected {' or '.join(choices)}, got {tok.text!r}", tok)
        return tok.text

    def number(self, what, real=False, positive=False):
        tok = self.next(what)
        try:
            v = complex(tok.text) if not tok.quoted else None
        except ValueError:
            v = None
        if v is None or not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise self.error(f"malformed number {tok.text!r} for {what}", tok)
        if real:
            if v.imag != 0:
                raise self.error(f"{what} must be real", tok)
            v = v.real
            if positive and not v > 0:
                raise self.error(f"{what} must be positive", tok)
        return v

    def done(self):
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected {tok.text!r}", tok)


def _tokens(body, offset):
    return [_Tok(m.group(1) if m.group(1) is not None else m.group(2), offset + m.start() + 1,
                 m.group(1) is not None) for m in _TOKEN.finditer(body)]


def _wrap(cur, tok, fn):
    try:
        return fn()
    except ParseError:
        raise
    except InvalidInputError as exc:
        raise cur.error(str(exc), tok) from None


def _density(cur):
    tok = cur.peek()
    if tok is not None and tok.text == "expr" and not tok.quoted:
        cur.pos += 1
        src = cur.next("quoted expression")
        if not src.quoted:
            raise cur.error("expression must be double-quoted", src)
        return _wrap(cur, src, lambda: Expression(src.text))
    v = cur.number("density")
    return v.real if v.imag == 0 else v


def _shape(cur, kinds):
    kind_tok = cur.peek()
    kind = cur.word(*kinds)
    if kind in ("disk", "circle"):
        cur.word("center")
        c = cur.number("center")
        cur.word("radius")
        r = cur.number("radius", real=True, positive=True)
        return _wrap(cur, kind_tok, lambda: Disk(c, r) if kind == "disk" else Circle(c, r))
    if kind == "annulus":
        cur.word("center")
        c = cur.number("center")
        cur.word("inner")
        a = cur.number("inner radius", real=True, positive=True)
        cur.word("outer")
        b = cur.number("outer radius", real=True, positive=True)
        return _wrap(cur, kind_tok, lambda: Annulus(c, a, b))
    cur.word("from")
    a = cur.number("start point")
    cur.word("to")
    b = cur.number("end point")
    if kind == "segment":
        return _wrap(cur, kind_tok, lambda: Segment(a, b))
    lo = complex(min(a.real, b.real), min(a.imag, b.imag))
    hi = complex(max(a.real, b.real), max(a.imag, b.imag))
    return _wrap(cur, kind_tok, lambda: Rectangle(lo, hi))


def _options(cur, allowed):
    out = {}
    while cur.peek() is not None:
        tok = cur.peek()
        key = cur.word(*allowed)
        if key in out or (key in ("density", "mass") and ({"density", "mass"} & out.keys())):
            raise cur.error(f"repeated option {key!r}", tok)
        if key == "label":
            lab = cur.next("label")
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.\-]*", lab.text):
                raise cur.error(f"invalid label {lab.text!r}", lab)
            out[key] = (lab.text, tok)
        elif key == "density":
            out[key] = (_density(cur), tok)
        else:
            out[key] = (cur.number(key), tok)
    return out


def _component(cur):
    kind_tok = cur.peek()
    kind = cur.word("atom", "arc", "area")
    if kind == "atom":
        cur.word("at")
        p = cur.number("point")
        opts = _options(cur, ("mass", "label"))
        mass = opts.get("mass", (1.0, None))[0]
        label = opts.get("label", ("", None))[0]
        return Atom(p, complex(mass), label), opts.get("label", (None, kind_tok))[1]
    if kind == "arc":
        shape = _shape(cur, ("circle", "segment"))
        opts = _options(cur, ("density", "mass", "label") if isinstance(shape, Circle)
                        else ("density", "label"))
        if "mass" in opts:
            dens = opts["mass"][0] / (2 * math.pi * shape.radius)
            dens = dens.real if dens.imag == 0 else dens
        else:
            dens = opts.get("density", (1.0, None))[0]
        label = opts.get("label", ("", None))[0]
        return ArcDensity(shape, dens, label), opts.get("label", (None, kind_tok))[1]
    shape = _shape(cur, ("disk", "annulus", "rectangle"))
    opts = _options(cur, ("density", "label"))
    dens = opts.get("density", (1.0, None))[0]
    label = opts.get("label", ("", None))[0]
    return AreaDensity(shape, dens, label), opts.get("label", (None, kind_tok))[1]


def parse_scene(text: str) -> Scene:
    """Parse scene text; errors are :class:`ParseError` with line and column."""
    if len(text.encode("utf-8", errors="replace")) > MAX_SCENE_BYTES:
        raise ParseError("scene exceeds 1 MB", 1, 1)
    comps, K = [], []
    settings: dict = {}
    seen_labels: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        m = re.match(r"\s*([A-Za-z_]+)\s*:", line)
        if not m:
            col = len(line) - len(line.lstrip()) + 1
            raise ParseError("expected 'key: value'", lineno, col)
        key = m.group(1)
        body = line[m.end():]
        cur = _Cursor(_tokens(body, m.end()), lineno, len(line) + 1)
        if key == "measure":
            comp, tok = _component(cur)
            cur.done()
            if comp.label:
                if comp.label in seen_labels:
                    raise cur.error(f"duplicate label {comp.label!r} (first defined on line "
                                    f"{seen_labels[comp.label]})", tok)
                seen_labels[comp.label] = lineno
            comps.append(comp)
        elif key == "K":
            K.append(_shape(cur, ("disk", "annulus", "segment", "rectangle")))
            cur.done()
        elif key in settings:
            raise ParseError(f"repeated setting {key!r}", lineno, m.start(1) + 1)
        elif key in ("resolution", "degree"):
            tok = cur.peek()
            v = cur.number(key, real=True, positive=True)
            if v != int(v) or v > 10_000:
                raise cur.error(f"{key} must be an integer between 1 and 10000", tok)
            settings[key] = int(v)
            cur.done()
        elif key == "window":
            first = cur.peek()
            vals = [cur.number("window bound", real=True) for _ in range(4)]
            cur.done()
            if not (vals[2] > vals[0] and vals[3] > vals[1]):
                raise cur.error("window needs X0 < X1 and Y0 < Y1", first)
            settings[key] = tuple(vals)
        elif key == "positive":
            settings[key] = cur.word("true", "false") == "true"
            cur.done()
        elif key == "phi":
            kind = cur.word("cauchy", "constant", "expr")
            if kind == "cauchy":
                settings[key] = ("cauchy",)
            elif kind == "constant":
                tok = cur.peek()
                v = cur.number("constant", real=True)
                if v < 0:
                    raise cur.error("constant density must be nonnegative", tok)
                settings[key] = ("constant", v)
            else:
                src = cur.next("quoted expression")
                if not src.quoted:
                    raise cur.error("expression must be double-quoted", src)
                settings[key] = ("expr", _wrap(cur, src, lambda: Expression(src.text)))
            cur.done()
        else:
            raise ParseError(f"unknown key {key!r}", lineno, m.start(1) + 1)
    scene = Scene(tuple(comps), tuple(K), **settings)
    try:
        mu = scene.measure()
    except InvalidInputError as exc:
        raise ParseError(str(exc), 1, 1) from None
    return Scene(mu.components, scene.K, scene.resolution, scene.degree, scene.window,
                 scene.positive, scene.phi)


def _strip_comment(line: str) -> str:
    in_quote = False
    for idx, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:idx]
    return line


def load_scene(path) -> Scene:
    with open(path, "rb") as fh:
        data = fh.read(MAX_SCENE_BYTES + 1)
    if len(data) > MAX_SCENE_BYTES:
        raise ParseError("scene exceeds 1 MB", 1, 1)
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"scene is not UTF-8 text ({exc.reason})", 1, 1) from None
    return parse_scene(text)


# --------------------------------------------------------------------------
# serialization

def fmt_number(v) -> str:
    """Shortest round-tripping literal for a real or complex number."""
    v = complex(v)
    re_, im = v.real, v.imag
    if im == 0:
        return repr(re_)
    if re_ == 0:
        return f"{im!r}j"
    sign = "+" if im >= 0 else ""
    return f"{re_!r}{sign}{im!r}j"


def _fmt_density(d) -> str:
    if isinstance(d, Expression):
        return f'expr "{d.source}"'
    if callable(d):
        raise InvalidInputError("only scene expressions can be serialized as densities")
    return fmt_number(d)


def _fmt_shape(s) -> str:
    if isinstance(s, (Disk, Circle)):
        kind = "disk" if isinstance(s, Disk) else "circle"
        return f"{kind} center {fmt_number(s.center)} radius {fmt_number(s.radius)}"
    if isinstance(s, Annulus):
        return (f"annulus center {fmt_number(s.center)} inner {fmt_number(s.inner)} "
                f"outer {fmt_number(s.outer)}")
    if isinstance(s, Segment):
        return f"segment from {fmt_number(s.a)} to {fmt_number(s.b)}"
    if isinstance(s, Rectangle):
        return f"rectangle from {fmt_number(s.lo)} to {fmt_number(s.hi)}"
    raise InvalidInputError(f"cannot serialize shape {type(s).__name__}")


def serialize_scene(scene: Scene) -> str:
    lines = [f"resolution: {scene.resolution}", f"degree: {scene.degree}"]
    if scene.window is not None:
        lines.append("window: " + " ".join(fmt_number(v) for v in scene.window))
    if scene.positive:
        lines.append("positive: true")
    if scene.phi is not None:
        if scene.phi[0] == "cauchy":
            lines.append("phi: cauchy")
        elif scene.phi[0] == "constant":
            lines.append(f"phi: constant {fmt_number(scene.phi[1])}")
        else:
            lines.append(f'phi: expr "{scene.phi[1].source}"')
    for c in scene.components:
        if not isinstance(c, Atom) and c.clip is not None:
            raise InvalidInputError("clipped components have no scene form")
        if isinstance(c, Atom):
            body = f"atom at {fmt_number(c.point)} mass {fmt_number(c.mass)}"
        elif isinstance(c, ArcDensity):
            body = f"arc {_fmt_shape(c.curve)} density {_fmt_density(c.density)}"
        else:
            body = f"area {_fmt_shape(c.shape)} density {_fmt_density(c.density)}"
        lines.append(f"measure: {body} label {c.label}")
    for s in scene.K:
        lines.append(f"K: {_fmt_shape(s)}")
    return "\n".join(lines) + "\n"
