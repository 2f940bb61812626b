"""Epistemic formulas: AST, parser and printer.

Concrete syntax::

    ~p   p & q   p | q   p -> q   p <-> q   true   false
    K[a] p       agent a knows p
    E p          everyone knows p        (E[a,b] p for an explicit group)
    C p          common knowledge of p   (C[a,b] p)
    [! p] q      after the truthful public announcement of p, q

Prefix operators bind tightest, then ``&``, ``|``, ``->`` (right
associative) and ``<->``.  ``&``, ``|`` and ``<->`` associate to the left.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import ParseError

GRAMMAR = """\
formula ::= iff ;  iff ::= imp { "<->" imp } ;  imp ::= or [ "->" imp ] ;
or ::= and { "|" and } ;  and ::= unary { "&" unary } ;
unary ::= "~" unary | "K" "[" name "]" unary | "E" [ "[" namelist "]" ] unary
        | "C" [ "[" namelist "]" ] unary | "[" "!" formula "]" unary
        | "(" formula ")" | "true" | "false" | name ;
"""

RESERVED = frozenset({"K", "E", "C", "true", "false"})
DEFAULT_MAX_DEPTH = 10_000

Group = Optional[tuple[str, ...]]  # None: every agent of the model


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Knows:
    agent: str
    sub: "Formula"


@dataclass(frozen=True)
class Everyone:
    group: Group
    sub: "Formula"

    def __post_init__(self):
        if self.group is not None and not self.group:
            raise ValueError("explicit group must name at least one agent")


@dataclass(frozen=True)
class Common:
    group: Group
    sub: "Formula"

    def __post_init__(self):
        if self.group is not None and not self.group:
            raise ValueError("explicit group must name at least one agent")


@dataclass(frozen=True)
class Announce:
    announcement: "Formula"
    body: "Formula"


Formula = Union[Atom, Top, Bottom, Not, And, Or, Implies, Iff, Knows, Everyone, Common, Announce]

TRUE = Top()
FALSE = Bottom()


def conjoin(*fs: Formula) -> Formula:
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disjoin(*fs: Formula) -> Formula:
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def nest_everyone(base: Formula, k: int, group: Group = None) -> Formula:
    """Wrap ``base`` in ``k`` layers of "everyone knows"."""
    if k < 0:
        raise ValueError("k must be non-negative")
    f = base
    for _ in range(k):
        f = Everyone(group, f)
    return f


def everyone_depth(f: Formula) -> int:
    """Maximum number of nested ``Everyone`` operators along any branch."""
    depth: dict[int, int] = {}
    for g in subformulas(f):
        depth[id(g)] = max((depth[id(c)] for c in children(g)), default=0) + isinstance(g, Everyone)
    return depth[id(f)]


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Atom, Top, Bottom)):
        return ()
    if isinstance(f, (Not, Knows, Everyone, Common)):
        return (f.sub,)
    if isinstance(f, Announce):
        return (f.announcement, f.body)
    return (f.left, f.right)


def subformulas(f: Formula):
    """Yield every subformula, children before parents."""
    stack = [(f, False)]
    while stack:
        g, expanded = stack.pop()
        if expanded:
            yield g
        else:
            stack.append((g, True))
            stack.extend((c, False) for c in reversed(children(g)))


# ---------------------------------------------------------------------------
# printing

_IFF, _IMP, _OR, _AND, _UNARY = range(1, 6)


def _group(g: Group) -> str:
    return "" if g is None else "[" + ",".join(g) + "]"


def render(f: Formula) -> str:
    """Canonical text for ``f`` using the fewest parentheses that parse back."""
    return _render(f, _IFF)


def _render(f: Formula, ctx: int) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Not):
        return "~" + _render(f.sub, _UNARY)
    if isinstance(f, Knows):
        return f"K[{f.agent}] " + _render(f.sub, _UNARY)
    if isinstance(f, Everyone):
        return "E" + _group(f.group) + " " + _render(f.sub, _UNARY)
    if isinstance(f, Common):
        return "C" + _group(f.group) + " " + _render(f.sub, _UNARY)
    if isinstance(f, Announce):
        return f"[! {_render(f.announcement, _IFF)}] " + _render(f.body, _UNARY)

    if isinstance(f, And):
        level, op, lctx, rctx = _AND, "&", _AND, _UNARY
    elif isinstance(f, Or):
        level, op, lctx, rctx = _OR, "|", _OR, _AND
    elif isinstance(f, Implies):
        level, op, lctx, rctx = _IMP, "->", _OR, _IMP
    elif isinstance(f, Iff):
        level, op, lctx, rctx = _IFF, "<->", _IFF, _IMP
    else:
        raise TypeError(f"not a formula: {f!r}")
    text = f"{_render(f.left, lctx)} {op} {_render(f.right, rctx)}"
    return f"({text})" if level < ctx else text


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op><->|->|[~&|()\[\]!,]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # "name", "op" or "eof"
    text: str
    pos: int  # character index

    def describe(self) -> str:
        if self.kind == "eof":
            return "end of input"
        return repr(self.text)


class _Parser:
    def __init__(self, text: str, max_depth: int):
        self.text = text
        self.max_depth = max_depth
        self.depth = 0
        self.toks = self._lex(text)
        self.i = 0

    def _lex(self, text: str) -> list[_Tok]:
        toks = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if m is None:
                rest = text[pos:]
                stripped = rest.lstrip()
                if not stripped:
                    toks.append(_Tok("eof", "", len(text)))
                    return toks
                at = pos + len(rest) - len(stripped)
                raise self.error_at(at, "a formula token", repr(stripped[0]))
            kind = m.lastgroup
            toks.append(_Tok(kind, m.group(kind), m.start(kind)))
            pos = m.end()

    def offset(self, pos: int) -> int:
        return len(self.text[:pos].encode("utf-8"))

    def error_at(self, pos: int, expected: str, found: str) -> ParseError:
        return ParseError(self.offset(pos), expected, found)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, ahead: int = 1) -> _Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            raise self.error_at(self.tok.pos, repr(text), self.tok.describe())
        tok = self.tok
        self.i += 1
        return tok

    def name(self) -> str:
        tok = self.tok
        if tok.kind != "name" or tok.text in RESERVED:
            raise self.error_at(tok.pos, "a name", tok.describe())
        self.i += 1
        return tok.text

    def enter(self):
        self.depth += 1
        if self.depth > self.max_depth:
            raise self.error_at(self.tok.pos, f"nesting depth at most {self.max_depth}", "deeper nesting")

    # grammar rules

    def formula(self) -> Formula:
        self.enter()
        f = self.iff()
        self.depth -= 1
        return f

    def iff(self) -> Formula:
        f = self.imp()
        while self.at("<->"):
            self.i += 1
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.at("->"):
            self.i += 1
            self.enter()
            f = Implies(f, self.imp())
            self.depth -= 1
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.at("|"):
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.at("&"):
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        # prefix chains are collected iteratively so "~~~~p" costs no stack
        prefixes = []
        while True:
            tok = self.tok
            if self.at("~"):
                self.i += 1
                prefixes.append(Not)
            elif tok.kind == "name" and tok.text == "K":
                self.i += 1
                self.expect("[")
                agent = self.name()
                self.expect("]")
                prefixes.append(lambda sub, a=agent: Knows(a, sub))
            elif tok.kind == "name" and tok.text in ("E", "C"):
                self.i += 1
                group = None
                if self.at("[") and not (self.peek().kind == "op" and self.peek().text == "!"):
                    self.i += 1
                    names = [self.name()]
                    while self.at(","):
                        self.i += 1
                        names.append(self.name())
                    self.expect("]")
                    group = tuple(names)
                cls = Everyone if tok.text == "E" else Common
                prefixes.append(lambda sub, c=cls, g=group: c(g, sub))
            elif self.at("["):
                self.i += 1
                self.expect("!")
                announced = self.formula()
                self.expect("]")
                prefixes.append(lambda sub, a=announced: Announce(a, sub))
            else:
                break
            if len(prefixes) > self.max_depth:
                raise self.error_at(tok.pos, f"nesting depth at most {self.max_depth}", "deeper nesting")
        f = self.primary()
        for wrap in reversed(prefixes):
            f = wrap(f)
        return f

    def primary(self) -> Formula:
        tok = self.tok
        if self.at("("):
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        if tok.kind == "name":
            if tok.text == "true":
                self.i += 1
                return TRUE
            if tok.text == "false":
                self.i += 1
                return FALSE
            return Atom(self.name())
        raise self.error_at(tok.pos, "a formula", tok.describe())

    def parse(self) -> Formula:
        f = self.formula()
        if self.tok.kind != "eof":
            raise self.error_at(self.tok.pos, "end of input", self.tok.describe())
        return f


def parse(text: str, max_depth: int = DEFAULT_MAX_DEPTH) -> Formula:
    """Parse ``text`` into a formula, raising :class:`ParseError` on failure."""
    parser = _Parser(text, max_depth)
    try:
        return parser.parse()
    except RecursionError:
        raise parser.error_at(parser.tok.pos, "shallower nesting", "nesting beyond the interpreter stack") from None
