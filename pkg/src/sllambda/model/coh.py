"""Coherence-space model: webs, cliques, linear maps and the finite-clique ``!``.

Tokens: ``"*"`` for 1, ints for N, pairs ``(a, b)`` for both ``A (x) B`` and
``A -o B``, frozensets (finite cliques) for ``!A``, and tagged ``(0, a)`` /
``(1, b)`` for ``A & B``.

Cliques of higher webs are usually infinite, so a clique is any object with a
membership test.  Explicit finite cliques are ``Fin``; the other forms are
structural (``PairC`` for ``x (x) y``, ``FunC`` for the trace of a linear map,
``PromC`` for ``x^! = {finite subsets of x}``, ``ProdC`` for ``x & y``,
``UnionC``).  Linear maps act on these forms structurally and fall back to
the trace formula ``f(x) = U {f({a}) | a in x}`` on explicit cliques.
"""
from __future__ import annotations

import functools
import itertools
from typing import Any, Callable, Iterable

from .core import (
    Backend,
    BackendFailure,
    Excl,
    Lolli,
    Nat,
    Obj,
    ObsSpec,
    Prod,
    Tensor,
    Unit,
)

STAR = "*"


class IncoherentClique(Exception):
    pass


class Clique:
    __slots__ = ()

    def has(self, tok) -> bool:
        raise NotImplementedError

    def explicit(self) -> frozenset | None:
        """The token set, when it is known to be finite."""
        return None


class Fin(Clique):
    __slots__ = ("toks",)

    def __init__(self, toks: Iterable = ()):
        self.toks = frozenset(toks)

    def has(self, tok) -> bool:
        return tok in self.toks

    def explicit(self):
        return self.toks

    def __eq__(self, other):
        return isinstance(other, Fin) and other.toks == self.toks

    def __hash__(self):
        return hash(self.toks)

    def __repr__(self):
        return f"Fin({sorted(self.toks, key=token_key)})"


EMPTY = Fin()


class _Memo(Clique):
    __slots__ = ("_memo",)

    def __init__(self):
        self._memo = {}

    def has(self, tok) -> bool:
        try:
            return self._memo[tok]
        except KeyError:
            r = self._memo[tok] = self._has(tok)
            return r

    def _has(self, tok) -> bool:
        raise NotImplementedError


class PairC(_Memo):
    __slots__ = ("x", "y")

    def __init__(self, x: Clique, y: Clique):
        super().__init__()
        self.x, self.y = x, y

    def _has(self, tok):
        return isinstance(tok, tuple) and self.x.has(tok[0]) and self.y.has(tok[1])

    def explicit(self):
        ex, ey = self.x.explicit(), self.y.explicit()
        if ex is None or ey is None:
            return None
        return frozenset(itertools.product(ex, ey))


class FunC(_Memo):
    """Trace of the linear map ``fn``: ``(a, b)`` is a token iff ``b in fn({a})``."""

    __slots__ = ("fn", "_apps")

    def __init__(self, fn: Callable[[Clique], Clique]):
        super().__init__()
        self.fn = fn
        self._apps = {}

    def __call__(self, x: Clique) -> Clique:
        if not isinstance(x, Fin):
            return self.fn(x)
        try:
            return self._apps[x]
        except KeyError:
            r = self._apps[x] = self.fn(x)
            return r

    def on_token(self, a) -> Clique:
        return self(Fin((a,)))

    def _has(self, tok):
        return isinstance(tok, tuple) and self.on_token(tok[0]).has(tok[1])


class PromC(_Memo):
    __slots__ = ("x",)

    def __init__(self, x: Clique):
        super().__init__()
        self.x = x

    def _has(self, tok):
        return isinstance(tok, frozenset) and all(self.x.has(a) for a in tok)

    def explicit(self):
        ex = self.x.explicit()
        if ex is None:
            return None
        return frozenset(frozenset(c) for n in range(len(ex) + 1)
                         for c in itertools.combinations(ex, n))


class ProdC(_Memo):
    """``x & y`` with lazily computed components."""

    __slots__ = ("_thunks", "_vals")

    def __init__(self, left: Callable[[], Clique], right: Callable[[], Clique]):
        super().__init__()
        self._thunks = (left, right)
        self._vals = {}

    def get(self, i: int) -> Clique:
        if i not in self._vals:
            self._vals[i] = self._thunks[i]()
        return self._vals[i]

    def _has(self, tok):
        return isinstance(tok, tuple) and tok[0] in (0, 1) and self.get(tok[0]).has(tok[1])


class UnionC(_Memo):
    __slots__ = ("parts",)

    def __init__(self, parts):
        super().__init__()
        self.parts = tuple(parts)

    def _has(self, tok):
        return any(p.has(tok) for p in self.parts)

    def explicit(self):
        out = set()
        for p in self.parts:
            e = p.explicit()
            if e is None:
                return None
            out |= e
        return frozenset(out)


class Where(_Memo):
    """The tokens of ``x`` satisfying ``keep``."""

    __slots__ = ("x", "keep")

    def __init__(self, x: Clique, keep: Callable[[Any], bool]):
        super().__init__()
        self.x, self.keep = x, keep

    def _has(self, tok):
        return self.x.has(tok) and self.keep(tok)

    def explicit(self):
        e = self.x.explicit()
        if e is None:
            return None
        return frozenset(t for t in e if self.keep(t))


class BangC(_Memo):
    """``!f`` applied to the tokens ``xis`` of a non-promoted clique of ``!A``.

    Kept symbolic so that ``fix`` can use ``f`` itself: the outputs of ``f``
    on single tokens need not be enumerable.
    """

    __slots__ = ("f", "k", "xis")

    def __init__(self, f, k: int, xis):
        super().__init__()
        self.f, self.k, self.xis = f, k, tuple(sorted(xis, key=token_key))

    def outs(self, xi) -> list[Clique]:
        return [self.f(Fin((a,)), self.k) for a in sorted(xi, key=token_key)]

    def _has(self, eta):
        # eta is made of outputs of the tokens of some xi and uses each of them
        if not isinstance(eta, frozenset):
            return False
        for xi in self.xis:
            outs = self.outs(xi)
            if (all(any(o.has(b) for o in outs) for b in eta)
                    and all(any(o.has(b) for b in eta) for o in outs)):
                return True
        return False

    def explicit(self):
        out = set()
        for xi in self.xis:
            if any(o.explicit() is None for o in self.outs(xi)):
                return None
            out.update(_promote_token(lambda a: self.f(Fin((a,)), self.k), xi))
        return frozenset(out)


def union(parts) -> Clique:
    parts = [p for p in parts if not (isinstance(p, Fin) and not p.toks)]
    if not parts:
        return EMPTY
    if len(parts) == 1:
        return parts[0]
    if all(isinstance(p, Fin) for p in parts):
        return Fin(frozenset().union(*(p.toks for p in parts)))
    return UnionC(parts)


def tokens_of(x: Clique, what: str) -> frozenset:
    e = x.explicit()
    if e is None:
        raise BackendFailure(f"{what}: cannot enumerate a {type(x).__name__} clique")
    return e


def pieces(w: Clique) -> list[tuple[Clique, Clique]]:
    """Decompose a clique of a tensor into a union of product cliques."""
    if isinstance(w, PairC):
        return [(w.x, w.y)]
    if isinstance(w, UnionC):
        return [pc for p in w.parts for pc in pieces(p)]
    return [(Fin((a,)), Fin((b,))) for a, b in tokens_of(w, "tensor")]


def by_token(x: Clique, fn: Callable[[Any], Clique], what: str) -> Clique:
    """Linear extension of a map given on single tokens."""
    return union(fn(a) for a in sorted(tokens_of(x, what), key=token_key))


def apply(f: Clique, x: Clique) -> Clique:
    """Application of a clique of ``A -o B`` to a clique of ``A``."""
    match f:
        case FunC():
            return f(x)
        case UnionC():
            return union(apply(p, x) for p in f.parts)
    return Fin(b for a, b in tokens_of(f, "apply") if x.has(a))


def ground(x: Clique) -> int | None:
    toks = tokens_of(x, "N")
    if len(toks) > 1:
        raise IncoherentClique(f"clique of N with {len(toks)} tokens")
    return next(iter(toks)) if toks else None


def subsets(s) -> list[frozenset]:
    s = sorted(s, key=token_key)
    return [frozenset(c) for n in range(len(s) + 1) for c in itertools.combinations(s, n)]


class CohBackend(Backend):
    name = "coh"

    def _tensor(self, f, g):
        return lambda w, k: union(PairC(f(x, k), g(y, k)) for x, y in pieces(w))

    def _sym(self):
        return lambda w, k: union(PairC(y, x) for x, y in pieces(w))

    def _assoc(self):
        return lambda w, k: union(PairC(a, PairC(b, c))
                                  for ab, c in pieces(w) for a, b in pieces(ab))

    def _assoc_inv(self):
        return lambda w, k: union(PairC(PairC(a, b), c)
                                  for a, bc in pieces(w) for b, c in pieces(bc))

    def _lunit(self):
        return lambda w, k: union(x for u, x in pieces(w) if u.has(STAR))

    def _lunit_inv(self):
        return lambda x, k: PairC(Fin((STAR,)), x)

    def _runit(self):
        return lambda w, k: union(x for x, u in pieces(w) if u.has(STAR))

    def _runit_inv(self):
        return lambda x, k: PairC(x, Fin((STAR,)))

    def _curry(self, f):
        return lambda c, k: FunC(lambda x: f(PairC(c, x), k))

    def _eval(self):
        return lambda w, k: union(apply(g, x) for g, x in pieces(w))

    def _pair(self, f, g):
        return lambda x, k: ProdC(lambda: f(x, k), lambda: g(x, k))

    def _proj(self, i):
        def run(x, k):
            if isinstance(x, ProdC):
                return x.get(i)
            return Fin(a for j, a in tokens_of(x, "projection") if j == i)

        return run

    def _bang(self, f):
        def run(x, k):
            if isinstance(x, PromC):
                return PromC(f(x.x, k))
            return BangC(f, k, tokens_of(x, "!f"))

        return run

    def _delta(self):
        def run(x, k):
            if isinstance(x, PromC):
                return PromC(x)
            return by_token(x, lambda xi: Fin(frozenset(c) for c in _covers(xi)), "delta")

        return run

    def _eps(self):
        def run(x, k):
            if isinstance(x, PromC):
                return x.x
            return Fin(next(iter(xi)) for xi in tokens_of(x, "eps") if len(xi) == 1)

        return run

    def _q(self):
        def run(w, k):
            out = []
            for x, y in pieces(w):
                if isinstance(x, PromC) and isinstance(y, PromC):
                    out.append(PromC(PairC(x.x, y.x)))
                    continue
                xs, ys = tokens_of(x, "q"), tokens_of(y, "q")
                out.append(Fin(z for xi in xs for eta in ys for z in _joint(xi, eta)))
            return union(out)

        return run

    def _q1(self):
        return lambda u, k: PromC(Fin((STAR,))) if u.has(STAR) else EMPTY

    def _d(self):
        def run(x, k):
            if isinstance(x, PromC):
                return PairC(x, x)
            return Fin((a, b) for xi in tokens_of(x, "d") for a in subsets(xi)
                       for b in subsets(xi) if a | b == xi)

        return run

    def _e(self):
        return lambda x, k: Fin((STAR,)) if x.has(frozenset()) else EMPTY

    def _num(self, n):
        return lambda u, k: Fin((n,)) if u.has(STAR) else EMPTY

    def _succ(self):
        return lambda x, k: Fin(n + 1 for n in tokens_of(x, "succ"))

    def _pred(self):
        return lambda x, k: Fin(max(n - 1, 0) for n in tokens_of(x, "pred"))

    def _p(self):
        # tr(p) = {(n, {n})} U {(n, {})}
        return lambda x, k: PromC(x) if tokens_of(x, "p") else EMPTY

    def _cN(self):
        return lambda x, k: Fin((n, n) for n in tokens_of(x, "c_N"))

    def _wN(self):
        return lambda x, k: Fin((STAR,)) if tokens_of(x, "w_N") else EMPTY

    def _lif(self):
        def branch(c, prod):
            out = []
            for n in tokens_of(c, "lif"):
                i = 0 if n == 0 else 1
                if isinstance(prod, ProdC):
                    out.append(prod.get(i))
                else:
                    out.append(Fin(a for j, a in tokens_of(prod, "lif") if j == i))
            return union(out)

        return lambda w, k: union(branch(c, prod) for c, prod in pieces(w))

    def _fix(self):
        def run(x, k):
            if isinstance(x, PromC):
                return iter_fix(x.x, k)
            if isinstance(x, BangC):
                return union(_fix_token(x.f, xi, k) for xi in x.xis)
            if not tokens_of(x, "fix") - {frozenset()}:
                return EMPTY
            raise BackendFailure("fix is only computed on promoted cliques")

        return run

    # observation
    def point(self):
        return Fin((STAR,))

    def ground_value(self, x):
        return ground(x)

    def inputs(self, a: Obj, obs: ObsSpec):
        toks = obs.cap(list(web_tokens(a, obs.b, obs.max_inputs * 4)), str(a))
        return [(show_token(t), Fin((t,))) for t in toks]

    def observe(self, x, a: Obj, obs: ObsSpec, k: int):
        return restrict(x, a, obs.b)


def iter_fix(f: Clique, k: int) -> Clique:
    """``x_0 = {}``, ``x_{i+1} = x_i U f(x_i^!)``; returns ``x_k``.

    ``f`` is monotone and ``x_0`` is least, so ``x_i`` is already contained in
    ``f(x_i^!)`` and the union is not materialised (it would make every
    application fan out through all earlier iterates).  Finite iterates are
    made explicit so that later iterations do not re-evaluate earlier ones;
    an iterate equal to its predecessor is the fixpoint and ends the loop.
    """
    x = EMPTY
    for _ in range(k):
        nxt = apply(f, PromC(x))
        e = nxt.explicit()
        if e is None:
            x = nxt
            continue
        if isinstance(x, Fin) and e == x.toks:
            break
        x = Fin(e)
    return x


def _fix_token(h, xi: frozenset, k: int) -> Clique:
    """``fix.!h`` on the single token ``xi`` of ``!A``.

    ``fix.!h`` is linear from ``!A``; its trace pairs ``xi`` with the ``a`` in
    ``fix(h(xi))`` for which ``xi`` is the minimal datum.  By stability it is
    enough to check that ``a`` is lost whenever one token of ``xi`` is dropped.
    """
    full = iter_fix(h(Fin(xi), k), k)
    smaller = [iter_fix(h(Fin(xi - {t}), k), k) for t in xi]
    return Where(full, lambda a: not any(y.has(a) for y in smaller))


def _promote_token(f_tok, xi: frozenset):
    """Tokens of ``!f({xi})`` for linear ``f`` given on single tokens."""
    options = []
    for a in sorted(xi, key=token_key):
        bs = tokens_of(f_tok(a), "!f")
        if not bs:
            return
        options.append(sorted(bs, key=token_key))
    seen = set()
    # each a in xi is sent to a non-empty set of outputs; a linear trace
    # sends distinct coherent inputs to distinct outputs
    for choice in itertools.product(*[[frozenset(c) for n in range(1, len(o) + 1)
                                       for c in itertools.combinations(o, n)] for o in options]):
        eta = frozenset().union(*choice) if choice else frozenset()
        if eta not in seen:
            seen.add(eta)
            yield eta


def _covers(xi: frozenset):
    """Finite sets of subcliques of ``xi`` whose union is ``xi``."""
    elems = sorted(xi, key=token_key)
    n = len(elems)
    if n > 4:
        raise BackendFailure(f"delta on a {n}-token clique")
    masks = range(1 << n)
    full = (1 << n) - 1
    subs = [frozenset(elems[i] for i in range(n) if m >> i & 1) for m in masks]
    # choose any family of subsets (a bitmask over the 2^n subsets) covering xi
    for fam in range(1 << (1 << n)):
        cover = 0
        for m in masks:
            if fam >> m & 1:
                cover |= m
        if cover == full:
            yield tuple(subs[m] for m in masks if fam >> m & 1)


def _joint(xi: frozenset, eta: frozenset):
    """Cliques ``z`` of ``A (x) B`` with projections exactly ``xi`` and ``eta``."""
    prod = sorted(itertools.product(xi, eta), key=token_key)
    for n in range(len(prod) + 1):
        for c in itertools.combinations(prod, n):
            z = frozenset(c)
            if {a for a, _ in z} == xi and {b for _, b in z} == eta:
                yield z


# ---------------------------------------------------------------------------
# Webs


def coherent(a: Obj, s, t) -> bool:
    match a:
        case Unit():
            return True
        case Nat():
            return s == t
        case Tensor(l, r):
            return coherent(l, s[0], t[0]) and coherent(r, s[1], t[1])
        case Lolli(l, r):
            if not coherent(l, s[0], t[0]):
                return True
            return coherent(r, s[1], t[1]) and (s[1] != t[1] or s[0] == t[0])
        case Excl(i):
            return is_clique(i, s | t)
        case Prod(l, r):
            if s[0] != t[0]:
                return True
            return coherent((l, r)[s[0]], s[1], t[1])
    raise TypeError(a)


def is_clique(a: Obj, toks) -> bool:
    toks = list(toks)
    return all(coherent(a, s, t) for s, t in itertools.combinations(toks, 2))


@functools.lru_cache(maxsize=4096)
def web_tokens(a: Obj, budget: int, limit: int | None = None) -> tuple:
    """Deterministic enumeration of tokens: numerals up to ``budget``, cliques
    of ``!A`` of size at most ``budget``, ordered size-then-lexicographically.
    ``limit`` truncates every level of the enumeration."""
    return tuple(itertools.islice(_iter_tokens(a, budget, limit), limit))


def _iter_tokens(a: Obj, budget: int, limit: int | None):
    match a:
        case Unit():
            yield STAR
        case Nat():
            yield from range(budget + 1)
        case Tensor(l, r) | Lolli(l, r):
            yield from itertools.product(web_tokens(l, budget, limit), web_tokens(r, budget, limit))
        case Excl(i):
            base = web_tokens(i, budget, limit)
            for n in range(budget + 1):
                for c in itertools.combinations(base, n):
                    if is_clique(i, c):
                        yield frozenset(c)
        case Prod(l, r):
            yield from ((0, s) for s in web_tokens(l, budget, limit))
            yield from ((1, t) for t in web_tokens(r, budget, limit))
        case _:
            raise TypeError(a)


def within(a: Obj, t, budget: int) -> bool:
    """Whether token ``t`` of ``a`` lies inside the probing budget."""
    match a:
        case Unit():
            return True
        case Nat():
            return t <= budget
        case Tensor(l, r) | Lolli(l, r):
            return within(l, t[0], budget) and within(r, t[1], budget)
        case Excl(i):
            return len(t) <= budget and all(within(i, s, budget) for s in t)
        case Prod(l, r):
            return within((l, r)[t[0]], t[1], budget)
    raise TypeError(a)


RESTRICT_LIMIT = 200_000


def restrict(x: Clique, a: Obj, budget: int) -> frozenset:
    """The tokens of ``x`` that lie inside the budget, computed structurally."""
    out = _restrict(x, a, budget)
    if len(out) > RESTRICT_LIMIT:
        raise BackendFailure(f"observation of {a} exceeds {RESTRICT_LIMIT} tokens")
    return out


def _restrict(x: Clique, a: Obj, budget: int) -> frozenset:
    ex = x.explicit() if not isinstance(x, (PairC, PromC)) else None
    if ex is not None:
        return frozenset(t for t in ex if within(a, t, budget))
    match x, a:
        case PairC(), Tensor(l, r) | Lolli(l, r):
            xs, ys = _restrict(x.x, l, budget), _restrict(x.y, r, budget)
            if len(xs) * len(ys) > RESTRICT_LIMIT:
                raise BackendFailure("observation too large")
            return frozenset(itertools.product(xs, ys))
        case PromC(), Excl(i):
            base = sorted(_restrict(x.x, i, budget), key=token_key)
            return frozenset(frozenset(c) for n in range(budget + 1)
                             for c in itertools.combinations(base, n))
        case UnionC(), _:
            return frozenset().union(*(_restrict(p, a, budget) for p in x.parts))
        case ProdC(), Prod(l, r):
            return frozenset([(0, t) for t in _restrict(x.get(0), l, budget)] +
                             [(1, t) for t in _restrict(x.get(1), r, budget)])
        case FunC(), Lolli(l, r):
            return frozenset((s, t) for s in web_tokens(l, budget, 4096)
                             for t in _restrict(x.on_token(s), r, budget))
    return frozenset(t for t in web_tokens(a, budget, 4096) if x.has(t))


def token_key(t):
    """Total order on tokens of mixed shape, for deterministic output."""
    match t:
        case str():
            return (0, t)
        case int():
            return (1, t)
        case tuple():
            return (2, tuple(token_key(x) for x in t))
        case frozenset():
            return (3, len(t), tuple(sorted(token_key(x) for x in t)))
    return (4, repr(t))


def show_token(t) -> str:
    match t:
        case str():
            return t
        case int():
            return str(t)
        case tuple():
            return f"({show_token(t[0])},{show_token(t[1])})"
        case frozenset():
            return "{" + ",".join(show_token(x) for x in sorted(t, key=token_key)) + "}"
    return repr(t)


def trace_probe(f, budget: int, B: CohBackend | None = None, k: int = 16) -> set:
    """``{(a, b) | b in f({a})}`` for dom tokens ``a`` within budget.

    Outputs are listed in full when finite, otherwise cut to the budget.
    """
    out = set()
    for a in web_tokens(f.dom, budget):
        y = f.run(Fin((a,)), k)
        ys = y.explicit()
        if ys is None:
            ys = restrict(y, f.cod, budget)
        out |= {(a, b) for b in ys}
    return out


def check_clique(a: Obj, x: Clique, budget: int) -> None:
    toks = [t for t in web_tokens(a, budget) if x.has(t)]
    if not is_clique(a, toks):
        raise IncoherentClique(f"incoherent tokens in a clique of {a}")
