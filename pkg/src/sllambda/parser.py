"""Concrete syntax: lexer, recursive-descent parser and pretty-printer.

Grammar::

    type  := tatom ("-o" type)?
    tatom := "iota" | "!" tatom | "(" type ")"
    term  := atom+                          (application, left-assoc)
    atom  := nat | "succ" | "pred" | ident | "$" ident | "(" term ")"
           | "\\" ident ":" type "." term
           | "mu" "$" ident ":" type "." term
           | "lif" term "then" term "else" term
           | "promote!" atom | "derelict" atom
           | "discard" term "in" term
           | "copy" term "as" ident "," ident "in" term
           | "promote" term "as" ident "in" term
    judgment := [entry ("," entry)*] "|-" term ":" type
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    IOTA,
    App,
    Arrow,
    Bang,
    CopyG,
    Derelict,
    DiscardG,
    Entry,
    LIf,
    Lam,
    Mu,
    Pred,
    PromoteAs,
    PromoteG,
    Succ,
    Term,
    Type,
    Var,
    VarKind,
    Zero,
    kind_for,
    numeral,
    numeral_of,
    show_type,
    stamp_kinds,
)

KEYWORDS = {
    "iota", "succ", "pred", "mu", "lif", "then", "else",
    "promote!", "promote", "discard", "copy", "as", "in", "derelict",
}


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    col: int


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected=(), filename="<input>"):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = frozenset(expected)
        self.filename = filename

    def render(self) -> str:
        return f"{self.filename}:{self.span.line}:{self.span.col}: {self.message}"

    def __str__(self) -> str:
        return self.render()


class DuplicateBasisName(ParseError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'sident', 'kw', 'sym', 'eof'
    text: str
    span: SourceSpan


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<sym>\|-|-o|⊸|[\\λ().:,!])
  | (?P<num>\d+)
  | (?P<sident>\$[A-Za-z_][A-Za-z0-9_']*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_']*!?)
    """,
    re.VERBOSE,
)


def _span_at(text: str, start: int, end: int) -> SourceSpan:
    line = text.count("\n", 0, start) + 1
    col = start - (text.rfind("\n", 0, start) + 1) + 1
    return SourceSpan(start, end, line, col)


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             _span_at(text, pos, pos + 1), filename=filename)
        kind = m.lastgroup
        tok = m.group()
        span = _span_at(text, m.start(), m.end())
        pos = m.end()
        if kind == "ws":
            continue
        if kind == "word":
            if tok.endswith("!") and tok != "promote!":
                # only `promote!` may carry the bang; give the `!` back
                tok = tok[:-1]
                pos -= 1
                span = _span_at(text, m.start(), m.end() - 1)
            kind = "kw" if tok in KEYWORDS else "ident"
        elif kind == "sym":
            tok = {"λ": "\\", "⊸": "-o"}.get(tok, tok)
        out.append(Token(kind, tok, span))
    out.append(Token("eof", "", _span_at(text, len(text), len(text))))
    return out


class _Parser:
    def __init__(self, text: str, filename: str = "<input>", ext: bool = True):
        self.text = text
        self.filename = filename
        self.toks = tokenize(text, filename)
        self.i = 0
        self.ext = ext

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, expected=()) -> ParseError:
        return ParseError(msg, self.tok.span, expected, self.filename)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("kw", "sym")

    def eat(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}", {text})
        t = self.tok
        self.i += 1
        return t

    def ident(self, stable: bool | None = False) -> Token:
        want = {"ident": False, "sident": True}
        if self.tok.kind not in want or (stable is not None and want[self.tok.kind] != stable):
            exp = "$identifier" if stable else "identifier"
            raise self.error(f"expected {exp}, found {self.tok.text or 'end of input'!r}", {exp})
        t = self.tok
        self.i += 1
        return t

    # types
    def type(self) -> Type:
        left = self.tatom()
        if self.at("-o"):
            self.i += 1
            return Arrow(left, self.type())
        return left

    def tatom(self) -> Type:
        if self.at("iota"):
            self.i += 1
            return IOTA
        if self.at("!"):
            self.i += 1
            return Bang(self.tatom())
        if self.at("("):
            self.i += 1
            t = self.type()
            self.eat(")")
            return t
        raise self.error(f"expected a type, found {self.tok.text or 'end of input'!r}",
                         {"iota", "!", "("})

    # terms
    _ATOM_START = {"succ", "pred", "(", "\\", "mu", "lif", "promote!", "derelict",
                   "discard", "copy", "promote"}

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("num", "ident", "sident"):
            return True
        return t.kind in ("kw", "sym") and t.text in self._ATOM_START

    def term(self, env: dict) -> Term:
        if not self.starts_atom():
            raise self.error(f"expected a term, found {self.tok.text or 'end of input'!r}",
                             {"term"})
        t = self.atom(env)
        while self.starts_atom():
            start = t.span
            a = self.atom(env)
            t = App(t, a, span=_join(start, a.span))
        return t

    def atom(self, env: dict) -> Term:
        tok = self.tok
        sp = tok.span
        if tok.kind == "num":
            self.i += 1
            t = numeral(int(tok.text))
            return _with_span(t, sp)
        if tok.kind == "ident":
            self.i += 1
            return Var(tok.text, env.get(tok.text), sp)
        if tok.kind == "sident":
            self.i += 1
            return Var(tok.text, VarKind.STABLE, sp)
        kw = tok.text
        if kw == "succ":
            self.i += 1
            return Succ(sp)
        if kw == "pred":
            self.i += 1
            return Pred(sp)
        if kw == "(":
            self.i += 1
            t = self.term(env)
            self.eat(")")
            return t
        if kw == "\\":
            self.i += 1
            x = self.ident(stable=False).text
            self.eat(":")
            ty = self.type()
            self.eat(".")
            body = self.term({**env, x: kind_for(x, ty)})
            return Lam(x, ty, body, _join(sp, body.span))
        if kw == "mu":
            self.i += 1
            x = self.ident(stable=True).text
            self.eat(":")
            ty = self.type()
            self.eat(".")
            body = self.term(env)
            return Mu(x, ty, body, _join(sp, body.span))
        if kw == "lif":
            self.i += 1
            c = self.term(env)
            self.eat("then")
            l = self.term(env)
            self.eat("else")
            r = self.term(env)
            return LIf(c, l, r, _join(sp, r.span))
        if not self.ext:
            raise self.error(f"extension syntax {kw!r} is disabled")
        if kw == "promote!":
            self.i += 1
            b = self.atom(env)
            return PromoteG(b, _join(sp, b.span))
        if kw == "derelict":
            self.i += 1
            b = self.atom(env)
            return Derelict(b, _join(sp, b.span))
        if kw == "discard":
            self.i += 1
            m = self.term(env)
            self.eat("in")
            n = self.term(env)
            return DiscardG(m, n, _join(sp, n.span))
        if kw == "copy":
            self.i += 1
            m = self.term(env)
            self.eat("as")
            x1 = self.ident().text
            self.eat(",")
            x2 = self.ident().text
            self.eat("in")
            inner = {k: v for k, v in env.items() if k not in (x1, x2)}
            n = self.term(inner)
            return CopyG(m, x1, x2, n, _join(sp, n.span))
        if kw == "promote":
            self.i += 1
            m = self.term(env)
            self.eat("as")
            z = self.ident().text
            self.eat("in")
            n = self.term({k: v for k, v in env.items() if k != z})
            return PromoteAs(m, z, n, _join(sp, n.span))
        raise self.error(f"unexpected {kw!r}", {"term"})

    def expect_eof(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected trailing input {self.tok.text!r}", {"end of input"})


def _join(a, b):
    if a is None or b is None:
        return a or b
    return SourceSpan(a.start, b.end, a.line, a.col)


def _with_span(t: Term, sp: SourceSpan) -> Term:
    if isinstance(t, Zero):
        return Zero(sp)
    return App(t.fun, t.arg, span=sp)


def parse_type(text: str) -> Type:
    p = _Parser(text)
    t = p.type()
    p.expect_eof()
    return t


def parse_term(text: str, basis=(), filename: str = "<input>", ext: bool = True) -> Term:
    p = _Parser(text, filename, ext)
    t = p.term({})
    p.expect_eof()
    return stamp_kinds(t, basis) if basis else t


def parse_judgment(text: str, filename: str = "<input>", ext: bool = True):
    """Parse ``x:iota, $f:iota |- M : iota`` into ``(basis, term, type)``."""
    p = _Parser(text, filename, ext)
    basis: list[Entry] = []
    if not p.at("|-"):
        while True:
            tok = p.ident(stable=None)
            p.eat(":")
            ty = p.type()
            name = tok.text
            if any(e.name == name for e in basis):
                raise DuplicateBasisName(f"duplicate basis name {name!r}", tok.span,
                                         filename=filename)
            basis.append(Entry(name, kind_for(name, ty), ty))
            if not p.at(","):
                break
            p.i += 1
    p.eat("|-")
    t = p.term({})
    p.eat(":")
    ty = p.type()
    p.expect_eof()
    basis_t = tuple(basis)
    return basis_t, stamp_kinds(t, basis_t), ty


# ---------------------------------------------------------------------------
# Pretty-printing

_BINDERS = (Lam, Mu, LIf, DiscardG, CopyG, PromoteAs)


def pretty(t: Term) -> str:
    k = numeral_of(t)
    if k is not None:
        return str(k)
    match t:
        case Succ():
            return "succ"
        case Pred():
            return "pred"
        case Var(x):
            return x
        case Lam(x, ty, b):
            return f"\\{x}:{show_type(ty)}. {pretty(b)}"
        case Mu(x, ty, b):
            return f"mu {x}:{show_type(ty)}. {pretty(b)}"
        case LIf(c, l, r):
            return f"lif {pretty(c)} then {pretty(l)} else {pretty(r)}"
        case App(f, a):
            fs = pretty(f)
            if isinstance(f, _BINDERS):
                fs = f"({fs})"
            return f"{fs} {_atom(a)}"
        case PromoteG(b):
            return f"promote!({pretty(b)})"
        case Derelict(b):
            return f"derelict {_atom(b)}"
        case DiscardG(m, n):
            return f"discard {pretty(m)} in {pretty(n)}"
        case CopyG(m, x1, x2, n):
            return f"copy {pretty(m)} as {x1},{x2} in {pretty(n)}"
        case PromoteAs(m, z, n):
            return f"promote {pretty(m)} as {z} in {pretty(n)}"
    raise TypeError(t)


def _atom(t: Term) -> str:
    s = pretty(t)
    if numeral_of(t) is not None or isinstance(t, (Var, Succ, Pred, PromoteG)):
        return s
    return f"({s})"
