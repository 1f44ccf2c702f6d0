"""Abstract syntax of types, terms and bases.

Stable variables live in their own namespace: their names always start with
``$``.  Ground and higher-order variables share the plain namespace and are
told apart by their type annotation (or, for free occurrences, by the basis
they are checked against).
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple


# ---------------------------------------------------------------------------
# Types


class Type:
    __slots__ = ()

    def __str__(self) -> str:
        return show_type(self)


@dataclass(frozen=True, repr=False)
class Ground(Type):
    def __repr__(self) -> str:
        return "IOTA"


@dataclass(frozen=True, repr=False)
class Arrow(Type):
    arg: Type
    res: Type

    def __repr__(self) -> str:
        return f"Arrow({self.arg!r}, {self.res!r})"


@dataclass(frozen=True, repr=False)
class Bang(Type):
    """Internal ``!``-annotated type; only the extension calculus exposes ``!iota``."""

    inner: Type

    def __repr__(self) -> str:
        return f"Bang({self.inner!r})"


IOTA = Ground()


def arrow(*types: Type) -> Type:
    """Right-associated arrow chain: ``arrow(a, b, c) == a -o (b -o c)``."""
    *args, res = types
    for a in reversed(args):
        res = Arrow(a, res)
    return res


def show_type(t: Type) -> str:
    match t:
        case Ground():
            return "iota"
        case Arrow(a, r):
            left = show_type(a)
            if isinstance(a, Arrow):
                left = f"({left})"
            return f"{left} -o {show_type(r)}"
        case Bang(inner):
            s = show_type(inner)
            return f"!{s}" if isinstance(inner, (Ground, Bang)) else f"!({s})"
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Variables and bases


class VarKind(enum.Enum):
    GROUND = "ground"
    HIGHER = "higher"
    STABLE = "stable"


def kind_for(name: str, ty: Type) -> VarKind:
    if name.startswith("$"):
        return VarKind.STABLE
    return VarKind.GROUND if isinstance(ty, Ground) else VarKind.HIGHER


class Entry(NamedTuple):
    name: str
    kind: VarKind
    type: Type

    def __str__(self) -> str:
        return f"{self.name}:{show_type(self.type)}"


Basis = tuple[Entry, ...]


def make_entry(name: str, ty: Type) -> Entry:
    return Entry(name, kind_for(name, ty), ty)


def check_basis(basis: Iterable[Entry]) -> None:
    seen = set()
    for e in basis:
        if e.name in seen:
            raise ValueError(f"duplicate basis name {e.name!r}")
        seen.add(e.name)
        if e.kind is VarKind.GROUND and e.type != IOTA:
            raise ValueError(f"ground variable {e.name} must have type iota")
        if e.kind is VarKind.HIGHER and not isinstance(e.type, (Arrow, Bang)):
            raise ValueError(f"higher-order variable {e.name} needs an arrow type")
        if (e.kind is VarKind.STABLE) != e.name.startswith("$"):
            raise ValueError(f"stable variables are exactly the $-names: {e.name}")


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        from .parser import pretty

        return pretty(self)


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Zero(Term):
    span: object = _span()


@dataclass(frozen=True)
class Succ(Term):
    span: object = _span()


@dataclass(frozen=True)
class Pred(Term):
    span: object = _span()


@dataclass(frozen=True)
class Var(Term):
    name: str
    # None for a plain free identifier whose kind is only known from a basis.
    kind: VarKind | None = field(default=None, compare=False)
    span: object = _span()


@dataclass(frozen=True)
class Lam(Term):
    var: str
    ty: Type
    body: Term
    span: object = _span()


@dataclass(frozen=True)
class App(Term):
    fun: Term
    arg: Term
    span: object = _span()


@dataclass(frozen=True)
class LIf(Term):
    cond: Term
    then: Term
    else_: Term
    span: object = _span()


@dataclass(frozen=True)
class Mu(Term):
    var: str
    ty: Type
    body: Term
    span: object = _span()


# extension calculus (promotion, discard, copy, dereliction on iota)


@dataclass(frozen=True)
class PromoteG(Term):
    body: Term
    span: object = _span()


@dataclass(frozen=True)
class DiscardG(Term):
    scrut: Term
    cont: Term
    span: object = _span()


@dataclass(frozen=True)
class CopyG(Term):
    scrut: Term
    x1: str
    x2: str
    cont: Term
    span: object = _span()


@dataclass(frozen=True)
class Derelict(Term):
    body: Term
    span: object = _span()


@dataclass(frozen=True)
class PromoteAs(Term):
    """General ``promote M as z in N``; accepted by parser and reducer, untyped."""

    scrut: Term
    var: str
    body: Term
    span: object = _span()


ZERO = Zero()
SUCC = Succ()
PRED = Pred()

EXT_NODES = (PromoteG, DiscardG, CopyG, Derelict, PromoteAs)


def children(t: Term) -> tuple[Term, ...]:
    match t:
        case Lam(_, _, b) | Mu(_, _, b) | PromoteG(b) | Derelict(b):
            return (b,)
        case App(f, a):
            return (f, a)
        case LIf(c, l, r):
            return (c, l, r)
        case DiscardG(m, n) | CopyG(m, _, _, n) | PromoteAs(m, _, n):
            return (m, n)
    return ()


def with_children(t: Term, kids: tuple[Term, ...]) -> Term:
    match t:
        case Lam(x, ty, _):
            return Lam(x, ty, kids[0])
        case Mu(x, ty, _):
            return Mu(x, ty, kids[0])
        case PromoteG():
            return PromoteG(kids[0])
        case Derelict():
            return Derelict(kids[0])
        case App():
            return App(kids[0], kids[1])
        case LIf():
            return LIf(*kids)
        case DiscardG():
            return DiscardG(*kids)
        case CopyG(_, x1, x2, _):
            return CopyG(kids[0], x1, x2, kids[1])
        case PromoteAs(_, z, _):
            return PromoteAs(kids[0], z, kids[1])
    return t


def binders(t: Term, child: int) -> tuple[str, ...]:
    """Names bound by ``t`` over its ``child``-th subterm."""
    match t:
        case Lam(x, _, _) | Mu(x, _, _):
            return (x,)
        case CopyG(_, x1, x2, _) if child == 1:
            return (x1, x2)
        case PromoteAs(_, z, _) if child == 1:
            return (z,)
    return ()


def size(t: Term) -> int:
    n = 0
    stack = [t]
    while stack:
        s = stack.pop()
        n += 1
        stack.extend(children(s))
    return n


def contains_ext(t: Term) -> bool:
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, EXT_NODES):
            return True
        stack.extend(children(s))
    return False


# ---------------------------------------------------------------------------
# Free variables


class FreeVars(NamedTuple):
    ground: frozenset
    higher: frozenset
    stable: frozenset
    # plain identifiers whose kind was never resolved against a binder/basis
    unresolved: frozenset = frozenset()

    @property
    def names(self) -> frozenset:
        return self.ground | self.higher | self.stable | self.unresolved


def free_names(t: Term) -> frozenset:
    match t:
        case Var(x):
            return frozenset((x,))
        case Zero() | Succ() | Pred():
            return frozenset()
    out = set()
    for i, c in enumerate(children(t)):
        out |= free_names(c) - set(binders(t, i))
    return frozenset(out)


def free_vars(t: Term) -> FreeVars:
    groups: dict[VarKind | None, set] = {k: set() for k in (*VarKind, None)}

    def walk(s: Term, bound: frozenset) -> None:
        if isinstance(s, Var):
            if s.name not in bound:
                kind = VarKind.STABLE if s.name.startswith("$") else s.kind
                groups[kind].add(s.name)
            return
        for i, c in enumerate(children(s)):
            walk(c, bound | set(binders(s, i)))

    walk(t, frozenset())
    return FreeVars(
        frozenset(groups[VarKind.GROUND]),
        frozenset(groups[VarKind.HIGHER]),
        frozenset(groups[VarKind.STABLE]),
        frozenset(groups[None]),
    )


def all_names(t: Term) -> set:
    out = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if isinstance(s, Var):
            out.add(s.name)
        for i, c in enumerate(children(s)):
            out.update(binders(s, i))
            stack.append(c)
    return out


# ---------------------------------------------------------------------------
# Alpha-equivalence


def canon(t: Term) -> tuple:
    """Nameless form: bound occurrences become binder-depth indices.

    Two terms are alpha-equivalent iff their canonical forms are equal, so the
    result doubles as a hash key for reduction graphs.
    """

    def go(s: Term, env: dict[str, int], depth: int) -> tuple:
        match s:
            case Zero():
                return ("0",)
            case Succ():
                return ("succ",)
            case Pred():
                return ("pred",)
            case Var(x):
                if x in env:
                    return ("b", depth - env[x])
                return ("f", x)
            case App(f, a):
                return ("app", go(f, env, depth), go(a, env, depth))
            case LIf(c, l, r):
                return ("lif", go(c, env, depth), go(l, env, depth), go(r, env, depth))
            case Lam(x, ty, b):
                return ("lam", ty, go(b, {**env, x: depth + 1}, depth + 1))
            case Mu(x, ty, b):
                return ("mu", ty, go(b, {**env, x: depth + 1}, depth + 1))
            case PromoteG(b):
                return ("prom", go(b, env, depth))
            case Derelict(b):
                return ("der", go(b, env, depth))
            case DiscardG(m, n):
                return ("disc", go(m, env, depth), go(n, env, depth))
            case CopyG(m, x1, x2, n):
                inner = {**env, x1: depth + 1, x2: depth + 2}
                return ("copy", go(m, env, depth), go(n, inner, depth + 2))
            case PromoteAs(m, z, n):
                return ("promas", go(m, env, depth), go(n, {**env, z: depth + 1}, depth + 1))
        raise TypeError(s)

    return go(t, {}, 0)


def alpha_eq(a: Term, b: Term) -> bool:
    return canon(a) == canon(b)


# ---------------------------------------------------------------------------
# Numerals


def numeral(k: int) -> Term:
    if k < 0:
        raise ValueError("numerals are natural numbers")
    t: Term = ZERO
    for _ in range(k):
        t = App(SUCC, t)
    return t


def numeral_of(t: Term) -> int | None:
    k = 0
    while True:
        match t:
            case Zero():
                return k
            case App(Succ(), inner):
                k += 1
                t = inner
            case _:
                return None


# ---------------------------------------------------------------------------
# Substitution


_counter = itertools.count()


def fresh(base: str, avoid: set | frozenset) -> str:
    stem = base.rstrip("0123456789").rstrip("_") or ("$v" if base.startswith("$") else "v")
    for i in itertools.count(1):
        cand = f"{stem}_{i}"
        if cand not in avoid:
            return cand
    raise AssertionError


def substitute(t: Term, mapping: dict[str, Term]) -> Term:
    """Simultaneous capture-free substitution of terms for free variables."""
    mapping = {k: v for k, v in mapping.items() if k in free_names(t)}
    if not mapping:
        return t
    incoming = set()
    for v in mapping.values():
        incoming |= free_names(v)
    return _subst(t, mapping, incoming)


def _subst(t: Term, mapping: dict[str, Term], incoming: set) -> Term:
    match t:
        case Var(x):
            return mapping.get(x, t)
        case Zero() | Succ() | Pred():
            return t
    kids = list(children(t))
    names = [list(binders(t, i)) for i in range(len(kids))]
    for i, c in enumerate(kids):
        bound = names[i]
        if not bound:
            kids[i] = _subst(c, mapping, incoming)
            continue
        inner = {k: v for k, v in mapping.items() if k not in bound}
        inner = {k: v for k, v in inner.items() if k in free_names(c)}
        if not inner:
            continue
        renames = {}
        for j, x in enumerate(bound):
            if x in incoming:
                avoid = incoming | all_names(c) | set(bound) | set(inner)
                y = fresh(x, avoid)
                renames[x] = Var(y, _kind_of_binder(t, x))
                bound[j] = y
        if renames:
            c = _subst(c, renames, set())
        kids[i] = _subst(c, inner, incoming)
    out = with_children(t, tuple(kids))
    # binder names may have changed
    match out:
        case Lam(_, ty, b):
            return Lam(names[0][0], ty, b)
        case Mu(_, ty, b):
            return Mu(names[0][0], ty, b)
        case CopyG(m, _, _, n):
            return CopyG(m, names[1][0], names[1][1], n)
        case PromoteAs(m, _, n):
            return PromoteAs(m, names[1][0], n)
    return out


def _kind_of_binder(t: Term, x: str) -> VarKind | None:
    match t:
        case Lam(_, ty, _) | Mu(_, ty, _):
            return kind_for(x, ty)
    return None


def rename_free(t: Term, old: str, new: str, kind: VarKind | None = None) -> Term:
    return substitute(t, {old: Var(new, kind)})


def subst_ground(m: Term, k: int, x: str) -> Term:
    return substitute(m, {x: numeral(k)})


def subst_higher(m: Term, n: Term, f: str) -> Term:
    return substitute(m, {f: n})


def subst_stable(m: Term, n: Term, name: str) -> Term:
    return substitute(m, {name: n})


def stamp_kinds(t: Term, basis: Iterable[Entry] = ()) -> Term:
    """Fill in the kind of every variable occurrence from its binder or the basis."""
    env = {e.name: e.kind for e in basis}

    def go(s: Term, env: dict) -> Term:
        if isinstance(s, Var):
            kind = env.get(s.name, s.kind)
            return s if kind is s.kind else Var(s.name, kind, s.span)
        kids = []
        for i, c in enumerate(children(s)):
            inner = env
            match s:
                case Lam(x, ty, _) | Mu(x, ty, _):
                    inner = {**env, x: kind_for(x, ty)}
                case CopyG(_, x1, x2, _) if i == 1:
                    inner = {k: v for k, v in env.items() if k not in (x1, x2)}
                case PromoteAs(_, z, _) if i == 1:
                    inner = {k: v for k, v in env.items() if k != z}
            kids.append(go(c, inner))
        if not kids:
            return s
        out = with_children(s, tuple(kids))
        return out

    return go(t, env)
