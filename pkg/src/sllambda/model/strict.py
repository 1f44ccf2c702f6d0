"""Strict model: pointed domains and strict continuous maps.

Tensor is the smash product, the unit is Sierpinski space, ``!`` is lifting
and N is the flat domain of naturals.  Fixpoints are Kleene iterates
truncated at ``k`` steps.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable

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
    sample_functions,
)


class IllShapedElement(Exception):
    pass


class _Bottom:
    __slots__ = ()

    def __repr__(self):
        return "BOTTOM"


class _Top:
    __slots__ = ()

    def __repr__(self):
        return "TOP"


BOTTOM = _Bottom()
TOP = _Top()


@dataclass(frozen=True)
class NatV:
    n: int


@dataclass(frozen=True)
class Pair:
    """Smash pair; neither component is bottom."""

    fst: Any
    snd: Any


@dataclass(frozen=True)
class Up:
    val: Any


@dataclass(eq=False)
class ProdPair:
    """Cartesian pair with lazily computed components.

    Only the conditional consumes products and it forces a single side, so
    the branch not taken is never evaluated.
    """

    _left: Callable[[], Any]
    _right: Callable[[], Any]
    _cache: dict = field(default_factory=dict)

    def get(self, i: int):
        if i not in self._cache:
            self._cache[i] = (self._left, self._right)[i]()
        return self._cache[i]


@dataclass(eq=False)
class Fun:
    """Element of a strict function space, memoised on hashable arguments."""

    fn: Callable[[Any], Any]
    name: str = "fun"
    memo: dict = field(default_factory=dict, repr=False)

    def __call__(self, x):
        if x is BOTTOM:
            return BOTTOM
        try:
            return self.memo[x]
        except KeyError:
            pass
        except TypeError:
            return self.fn(x)
        y = self.memo[x] = self.fn(x)
        return y


def smash(a, b):
    if a is BOTTOM or b is BOTTOM:
        return BOTTOM
    return Pair(a, b)


def apply(f, x):
    if f is BOTTOM or x is BOTTOM:
        return BOTTOM
    if not isinstance(f, Fun):
        raise IllShapedElement(f"not a function: {f!r}")
    return f(x)


def strict(fn):
    """Wrap an element procedure so that bottom goes to bottom."""

    def run(x, k):
        return BOTTOM if x is BOTTOM else fn(x, k)

    return run


def _pair_of(x) -> Pair:
    if not isinstance(x, Pair):
        raise IllShapedElement(f"expected a smash pair, got {x!r}")
    return x


def _nat(x) -> int:
    if not isinstance(x, NatV):
        raise IllShapedElement(f"expected a numeral, got {x!r}")
    return x.n


def _up(x):
    if not isinstance(x, Up):
        raise IllShapedElement(f"expected a lifted element, got {x!r}")
    return x.val


class StrictBackend(Backend):
    name = "strict"

    def _tensor(self, f, g):
        return strict(lambda x, k: smash(f(_pair_of(x).fst, k), g(x.snd, k)))

    def _sym(self):
        return strict(lambda x, k: Pair(_pair_of(x).snd, x.fst))

    def _assoc(self):
        return strict(lambda x, k: Pair(_pair_of(_pair_of(x).fst).fst, Pair(x.fst.snd, x.snd)))

    def _assoc_inv(self):
        return strict(lambda x, k: Pair(Pair(_pair_of(x).fst, _pair_of(x.snd).fst), x.snd.snd))

    def _lunit(self):
        return strict(lambda x, k: _pair_of(x).snd)

    def _lunit_inv(self):
        return strict(lambda x, k: Pair(TOP, x))

    def _runit(self):
        return strict(lambda x, k: _pair_of(x).fst)

    def _runit_inv(self):
        return strict(lambda x, k: Pair(x, TOP))

    def _curry(self, f):
        return strict(lambda c, k: Fun(lambda a: f(smash(c, a), k)))

    def _eval(self):
        return strict(lambda x, k: apply(_pair_of(x).fst, x.snd))

    def _pair(self, f, g):
        return strict(lambda x, k: ProdPair(lambda: f(x, k), lambda: g(x, k)))

    def _proj(self, i):
        return strict(lambda x, k: x.get(i))

    def _bang(self, f):
        return strict(lambda x, k: Up(f(_up(x), k)))

    def _delta(self):
        return strict(lambda x, k: Up(Up(_up(x))))

    def _eps(self):
        return strict(lambda x, k: _up(x))

    def _q(self):
        return strict(lambda x, k: Up(smash(_up(_pair_of(x).fst), _up(x.snd))))

    def _q1(self):
        return strict(lambda x, k: Up(TOP))

    def _d(self):
        return strict(lambda x, k: Pair(Up(_up(x)), x))

    def _e(self):
        return strict(lambda x, k: (_up(x), TOP)[1])

    def _num(self, n):
        v = NatV(n)
        return strict(lambda x, k: v)

    def _succ(self):
        return strict(lambda x, k: NatV(_nat(x) + 1))

    def _pred(self):
        # pred 0 = 0; the calculus never reduces `pred 0`, so any choice is sound
        return strict(lambda x, k: NatV(max(_nat(x) - 1, 0)))

    def _p(self):
        return strict(lambda x, k: Up(NatV(_nat(x))))

    def _cN(self):
        return strict(lambda x, k: Pair(NatV(_nat(x)), x))

    def _wN(self):
        return strict(lambda x, k: (_nat(x), TOP)[1])

    def _lif(self):
        def run(x, k):
            c = _nat(_pair_of(x).fst)
            return x.snd.get(0 if c == 0 else 1)

        return strict(run)

    def _fix(self):
        def run(x, k):
            return kleene_fix(_up(x), k)

        return strict(run)

    # observation
    def point(self):
        return TOP

    def ground_value(self, x):
        if x is BOTTOM:
            return None
        return _nat(x)

    def inputs(self, a: Obj, obs: ObsSpec):
        return [(show_elem(x), x) for x in sample_elems(self, a, obs)]

    def observe(self, x, a: Obj, obs: ObsSpec, k: int):
        if x is BOTTOM:
            return "_"
        match a:
            case Unit():
                return "T"
            case Nat():
                return _nat(x)
            case Tensor(l, r):
                x = _pair_of(x)
                return (self.observe(x.fst, l, obs, k), self.observe(x.snd, r, obs, k))
            case Excl(i):
                return ("up", self.observe(_up(x), i, obs, k))
            case Prod(l, r):
                return ("&", self.observe(x.get(0), l, obs, k), self.observe(x.get(1), r, obs, k))
            case Lolli(l, r):
                return tuple(self.observe(apply(x, s), r, obs, k)
                             for s in sample_elems(self, l, obs) if s is not BOTTOM)
        raise BackendFailure(f"cannot observe at {a}")


def kleene_fix(f, k: int):
    """``f^k(bottom)`` for ``f`` an element of ``!B -o B``.

    Iteration stops early once a flat iterate repeats.
    """
    x = BOTTOM
    for _ in range(k):
        nxt = apply(f, Up(x))
        if nxt is x or (isinstance(nxt, NatV) and nxt == x):
            break
        x = nxt
    return x


def sample_elems(B: StrictBackend, a: Obj, obs: ObsSpec) -> list:
    """Bottom plus a deterministic finite sample of the domain ``a``."""
    key = ("elems", a, obs.s, obs.max_inputs, obs.seed, obs.k)
    if key in B._sample_cache:
        return B._sample_cache[key]
    match a:
        case Unit():
            out = [BOTTOM, TOP]
        case Nat():
            out = [BOTTOM] + [NatV(n) for n in range(obs.s + 1)]
        case Tensor(l, r):
            ls = [x for x in sample_elems(B, l, obs) if x is not BOTTOM]
            rs = [x for x in sample_elems(B, r, obs) if x is not BOTTOM]
            out = [BOTTOM] + obs.cap([Pair(x, y) for x, y in itertools.product(ls, rs)], str(a))
        case Excl(i):
            out = [BOTTOM] + [Up(x) for x in sample_elems(B, i, obs)]
        case Prod(l, r):
            ls, rs = sample_elems(B, l, obs), sample_elems(B, r, obs)
            pairs = [ProdPair(lambda x=x: x, lambda y=y: y) for x, y in itertools.product(ls, rs)]
            out = obs.cap(pairs, str(a))
        case Lolli(l, r):
            out = [BOTTOM]
            for src, x in sample_functions(B, a, obs):
                if isinstance(x, Fun):
                    x.name = src
                out.append(x)
            # strict constants x |-> c (c non-bottom), plus the identity where it fits
            consts = [x for x in sample_elems(B, r, obs) if x is not BOTTOM][:4]
            out += [Fun(lambda _x, c=c: c, f"const {show_elem(c)}") for c in consts]
            if l == r:
                out.append(Fun(lambda x: x, "id"))
        case _:
            raise BackendFailure(f"no samples for {a}")
    B._sample_cache[key] = out
    return out


def show_elem(x) -> str:
    match x:
        case _Bottom():
            return "_"
        case _Top():
            return "T"
        case NatV(n):
            return str(n)
        case Pair(a, b):
            return f"<{show_elem(a)},{show_elem(b)}>"
        case Up(v):
            return f"up({show_elem(v)})"
        case ProdPair():
            return f"({show_elem(x.get(0))} & {show_elem(x.get(1))})"
        case Fun():
            return x.name
    return repr(x)
