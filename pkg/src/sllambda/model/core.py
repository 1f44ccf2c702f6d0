"""Backend-independent model machinery.

A backend supplies the structure of a categorical model (objects,
structural maps, the comonad, numerals, conditional and fixpoint) as
element-level procedures.  This module wraps those procedures into
``Morphism`` values with domain/codomain bookkeeping, interprets typing
derivations by structural recursion, and compares morphisms
observationally under explicit budgets.

Contexts are interpreted right-nested: ``[[x1..xn]] = A1 (x) (... (x) (An (x) 1))``.
"""
from __future__ import annotations

import enum
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable

from ..syntax import Arrow, Bang, Ground, Term, Type, VarKind


class BackendFailure(Exception):
    """The backend cannot compute this application (unsupported element shape)."""


class ObjectMismatch(Exception):
    pass


# ---------------------------------------------------------------------------
# Objects


class Obj:
    __slots__ = ()

    def __str__(self) -> str:
        return show_obj(self)


@dataclass(frozen=True, repr=False)
class Unit(Obj):
    def __repr__(self):
        return "UNIT"


@dataclass(frozen=True, repr=False)
class Nat(Obj):
    def __repr__(self):
        return "NAT"


@dataclass(frozen=True)
class Tensor(Obj):
    left: Obj
    right: Obj


@dataclass(frozen=True)
class Lolli(Obj):
    arg: Obj
    res: Obj


@dataclass(frozen=True)
class Excl(Obj):
    inner: Obj


@dataclass(frozen=True)
class Prod(Obj):
    left: Obj
    right: Obj


UNIT = Unit()
NAT = Nat()


def show_obj(a: Obj) -> str:
    match a:
        case Unit():
            return "1"
        case Nat():
            return "N"
        case Tensor(l, r):
            return f"({show_obj(l)} (x) {show_obj(r)})"
        case Lolli(l, r):
            return f"({show_obj(l)} -o {show_obj(r)})"
        case Excl(i):
            return f"!{show_obj(i)}"
        case Prod(l, r):
            return f"({show_obj(l)} & {show_obj(r)})"
    raise TypeError(a)


def interpret_type(t: Type) -> Obj:
    match t:
        case Ground():
            return NAT
        case Arrow(a, r):
            return Lolli(interpret_type(a), interpret_type(r))
        case Bang(i):
            return Excl(interpret_type(i))
    raise TypeError(t)


def entry_obj(e) -> Obj:
    a = interpret_type(e.type)
    return Excl(a) if e.kind is VarKind.STABLE else a


def context_obj(objs) -> Obj:
    out: Obj = UNIT
    for a in reversed(list(objs)):
        out = Tensor(a, out)
    return out


def interpret_basis(basis) -> Obj:
    return context_obj(entry_obj(e) for e in basis)


# ---------------------------------------------------------------------------
# Morphisms

Run = Callable[[Any, int], Any]  # (element, fix depth) -> element


@dataclass(frozen=True, eq=False)
class Morphism:
    backend: str
    dom: Obj
    cod: Obj
    run: Run = field(repr=False)
    label: str = "?"
    parts: tuple = ()

    def __call__(self, x, k: int = 16):
        return self.run(x, k)

    def dump(self, indent: int = 0) -> str:
        pad = "  " * indent
        lines = [f"{pad}{self.label} : {show_obj(self.dom)} -> {show_obj(self.cod)}"]
        lines += [p.dump(indent + 1) for p in self.parts]
        return "\n".join(lines)


class Backend(ABC):
    """Capabilities of a model.  Subclasses implement the ``_``-prefixed hooks.

    Each hook returns a procedure ``(element, k) -> element``; ``k`` is the
    number of fixpoint iterations and only ``_fix`` should consult it.
    """

    name = "abstract"

    def __init__(self):
        self._sample_cache: dict = {}

    def prim(self, label: str, dom: Obj, cod: Obj, run: Run, parts=()) -> Morphism:
        return Morphism(self.name, dom, cod, run, label, tuple(parts))

    def _own(self, *fs: Morphism) -> None:
        for f in fs:
            if f.backend != self.name:
                raise ObjectMismatch(f"{f.label} belongs to backend {f.backend}, not {self.name}")

    # objects
    unit1 = UNIT
    ground = NAT

    @staticmethod
    def tensor(a: Obj, b: Obj) -> Obj:
        return Tensor(a, b)

    @staticmethod
    def arrow(a: Obj, b: Obj) -> Obj:
        return Lolli(a, b)

    @staticmethod
    def bang(a: Obj) -> Obj:
        return Excl(a)

    @staticmethod
    def product(a: Obj, b: Obj) -> Obj:
        return Prod(a, b)

    # category
    def identity(self, a: Obj) -> Morphism:
        return self.prim("id", a, a, lambda x, k: x)

    def compose(self, f: Morphism, g: Morphism) -> Morphism:
        """``f . g``"""
        self._own(f, g)
        if g.cod != f.dom:
            raise ObjectMismatch(f"cannot compose {f.label} after {g.label}: "
                                 f"{show_obj(g.cod)} vs {show_obj(f.dom)}")
        fr, gr = f.run, g.run
        return self.prim("compose", g.dom, f.cod, lambda x, k: fr(gr(x, k), k), (f, g))

    def chain(self, *fs: Morphism) -> Morphism:
        """``chain(f, g, h) == f . g . h``"""
        out = fs[-1]
        for f in reversed(fs[:-1]):
            out = self.compose(f, out)
        return out

    def tensor_mor(self, f: Morphism, g: Morphism) -> Morphism:
        self._own(f, g)
        return self.prim("tensor", Tensor(f.dom, g.dom), Tensor(f.cod, g.cod),
                         self._tensor(f.run, g.run), (f, g))

    def sym(self, a: Obj, b: Obj) -> Morphism:
        return self.prim("sym", Tensor(a, b), Tensor(b, a), self._sym())

    def assoc(self, a: Obj, b: Obj, c: Obj) -> Morphism:
        return self.prim("assoc", Tensor(Tensor(a, b), c), Tensor(a, Tensor(b, c)), self._assoc())

    def assoc_inv(self, a: Obj, b: Obj, c: Obj) -> Morphism:
        return self.prim("assoc_inv", Tensor(a, Tensor(b, c)), Tensor(Tensor(a, b), c),
                         self._assoc_inv())

    def lunit(self, a: Obj) -> Morphism:
        return self.prim("lunit", Tensor(UNIT, a), a, self._lunit())

    def lunit_inv(self, a: Obj) -> Morphism:
        return self.prim("lunit_inv", a, Tensor(UNIT, a), self._lunit_inv())

    def runit(self, a: Obj) -> Morphism:
        return self.prim("runit", Tensor(a, UNIT), a, self._runit())

    def runit_inv(self, a: Obj) -> Morphism:
        return self.prim("runit_inv", a, Tensor(a, UNIT), self._runit_inv())

    # closed structure
    def curry(self, f: Morphism) -> Morphism:
        self._own(f)
        if not isinstance(f.dom, Tensor):
            raise ObjectMismatch("curry needs a map out of a tensor")
        c, a = f.dom.left, f.dom.right
        return self.prim("curry", c, Lolli(a, f.cod), self._curry(f.run), (f,))

    def eval(self, a: Obj, b: Obj) -> Morphism:
        return self.prim("eval", Tensor(Lolli(a, b), a), b, self._eval())

    # cartesian product
    def pairing(self, f: Morphism, g: Morphism) -> Morphism:
        self._own(f, g)
        if f.dom != g.dom:
            raise ObjectMismatch("pairing needs a common domain")
        return self.prim("pair", f.dom, Prod(f.cod, g.cod), self._pair(f.run, g.run), (f, g))

    def proj1(self, a: Obj, b: Obj) -> Morphism:
        return self.prim("proj1", Prod(a, b), a, self._proj(0))

    def proj2(self, a: Obj, b: Obj) -> Morphism:
        return self.prim("proj2", Prod(a, b), b, self._proj(1))

    # exponential comonad
    def bang_mor(self, f: Morphism) -> Morphism:
        self._own(f)
        return self.prim("bang", Excl(f.dom), Excl(f.cod), self._bang(f.run), (f,))

    def delta(self, a: Obj) -> Morphism:
        return self.prim("delta", Excl(a), Excl(Excl(a)), self._delta())

    def eps(self, a: Obj) -> Morphism:
        return self.prim("eps", Excl(a), a, self._eps())

    def q(self, a: Obj, b: Obj) -> Morphism:
        return self.prim("q", Tensor(Excl(a), Excl(b)), Excl(Tensor(a, b)), self._q())

    def q1(self) -> Morphism:
        return self.prim("q1", UNIT, Excl(UNIT), self._q1())

    def d(self, a: Obj) -> Morphism:
        return self.prim("d", Excl(a), Tensor(Excl(a), Excl(a)), self._d())

    def e(self, a: Obj) -> Morphism:
        return self.prim("e", Excl(a), UNIT, self._e())

    # numerals
    def zero(self) -> Morphism:
        return self.prim("zero", UNIT, NAT, self._num(0))

    def num(self, n: int) -> Morphism:
        return self.prim(f"num{n}", UNIT, NAT, self._num(n))

    def succ_m(self) -> Morphism:
        return self.prim("succ", NAT, NAT, self._succ())

    def pred_m(self) -> Morphism:
        return self.prim("pred", NAT, NAT, self._pred())

    def p(self) -> Morphism:
        return self.prim("p", NAT, Excl(NAT), self._p())

    def c_N(self) -> Morphism:
        return self.prim("c_N", NAT, Tensor(NAT, NAT), self._cN())

    def w_N(self) -> Morphism:
        return self.prim("w_N", NAT, UNIT, self._wN())

    # control
    def lif_m(self) -> Morphism:
        return self.prim("lif", Tensor(NAT, Prod(NAT, NAT)), NAT, self._lif())

    def fix(self, b: Obj) -> Morphism:
        return self.prim("fix", Excl(Lolli(Excl(b), b)), b, self._fix())

    # hooks
    @abstractmethod
    def _tensor(self, f: Run, g: Run) -> Run: ...
    @abstractmethod
    def _sym(self) -> Run: ...
    @abstractmethod
    def _assoc(self) -> Run: ...
    @abstractmethod
    def _assoc_inv(self) -> Run: ...
    @abstractmethod
    def _lunit(self) -> Run: ...
    @abstractmethod
    def _lunit_inv(self) -> Run: ...
    @abstractmethod
    def _runit(self) -> Run: ...
    @abstractmethod
    def _runit_inv(self) -> Run: ...
    @abstractmethod
    def _curry(self, f: Run) -> Run: ...
    @abstractmethod
    def _eval(self) -> Run: ...
    @abstractmethod
    def _pair(self, f: Run, g: Run) -> Run: ...
    @abstractmethod
    def _proj(self, i: int) -> Run: ...
    @abstractmethod
    def _bang(self, f: Run) -> Run: ...
    @abstractmethod
    def _delta(self) -> Run: ...
    @abstractmethod
    def _eps(self) -> Run: ...
    @abstractmethod
    def _q(self) -> Run: ...
    @abstractmethod
    def _q1(self) -> Run: ...
    @abstractmethod
    def _d(self) -> Run: ...
    @abstractmethod
    def _e(self) -> Run: ...
    @abstractmethod
    def _num(self, n: int) -> Run: ...
    @abstractmethod
    def _succ(self) -> Run: ...
    @abstractmethod
    def _pred(self) -> Run: ...
    @abstractmethod
    def _p(self) -> Run: ...
    @abstractmethod
    def _cN(self) -> Run: ...
    @abstractmethod
    def _wN(self) -> Run: ...
    @abstractmethod
    def _lif(self) -> Run: ...
    @abstractmethod
    def _fix(self) -> Run: ...

    # observation
    @abstractmethod
    def point(self) -> Any:
        """The global element of the unit object."""

    @abstractmethod
    def ground_value(self, x) -> int | None:
        """Numeral carried by an element of N, or None for bottom/empty."""

    @abstractmethod
    def inputs(self, a: Obj, obs: "ObsSpec") -> list[tuple[str, Any]]:
        """Labelled probe inputs for maps out of ``a``."""

    @abstractmethod
    def observe(self, x, a: Obj, obs: "ObsSpec", k: int) -> Any:
        """Finite hashable observation of element ``x`` of ``a``."""


# ---------------------------------------------------------------------------
# Canonical isomorphisms on right-nested contexts


def _at(B: Backend, objs: list, i: int, m: Morphism) -> Morphism:
    """Apply ``m`` to the tail of ``[[objs]]`` starting at position ``i``."""
    if i == 0:
        return m
    return B.tensor_mor(B.identity(objs[0]), _at(B, objs[1:], i - 1, m))


def snoc_iso(B: Backend, objs: list, x: Obj) -> Morphism:
    """``[[objs]] (x) X -> [[objs, X]]``"""
    if not objs:
        return B.sym(UNIT, x)
    a, rest = objs[0], objs[1:]
    return B.compose(B.tensor_mor(B.identity(a), snoc_iso(B, rest, x)),
                     B.assoc(a, context_obj(rest), x))


def split_iso(B: Backend, g: list, dl: list) -> Morphism:
    """``[[g, dl]] -> [[g]] (x) [[dl]]``"""
    if not g:
        return B.lunit_inv(context_obj(dl))
    a, rest = g[0], g[1:]
    return B.compose(B.assoc_inv(a, context_obj(rest), context_obj(dl)),
                     B.tensor_mor(B.identity(a), split_iso(B, rest, dl)))


def swap_at(B: Backend, objs: list, i: int) -> Morphism:
    """``[[objs]] -> [[objs with i, i+1 swapped]]``"""
    a, b = objs[i], objs[i + 1]
    r = context_obj(objs[i + 2:])
    local = B.chain(B.assoc(b, a, r), B.tensor_mor(B.sym(a, b), B.identity(r)),
                    B.assoc_inv(a, b, r))
    return _at(B, objs, i, local)


def q_star(B: Backend, objs: list) -> Morphism:
    """``!X1 (x) (... (x) (!Xn (x) 1)) -> !(X1 (x) (... (x) 1))``"""
    if not objs:
        return B.q1()
    x, rest = objs[0], objs[1:]
    return B.compose(B.q(x, context_obj(rest)),
                     B.tensor_mor(B.identity(Excl(x)), q_star(B, rest)))


def entrywise(B: Backend, maps: list) -> Morphism:
    out = B.identity(UNIT)
    for m in reversed(maps):
        out = B.tensor_mor(m, out)
    return out


# ---------------------------------------------------------------------------
# Interpretation of derivations


def interpret(d, B: Backend) -> Morphism:
    """The morphism denoted by a (validated) typing derivation."""
    objs = [entry_obj(e) for e in d.basis]
    ps = d.premises
    match d.rule:
        case "z":
            return B.zero()
        case "s":
            return B.curry(B.compose(B.succ_m(), B.lunit(NAT)))
        case "p":
            return B.curry(B.compose(B.pred_m(), B.lunit(NAT)))
        case "gv" | "hv":
            return B.runit(objs[0])
        case "sv":
            return B.compose(B.eps(objs[0].inner), B.runit(objs[0]))
        case "ex":
            (i,) = d.aux
            return B.compose(interpret(ps[0], B), swap_at(B, objs, i))
        case "gw" | "sw":
            e = objs[-1]
            drop = B.w_N() if d.rule == "gw" else B.e(e.inner)
            tail = B.compose(B.lunit(UNIT), B.tensor_mor(drop, B.identity(UNIT)))
            return B.compose(interpret(ps[0], B), _at(B, objs, len(objs) - 1, tail))
        case "gc" | "sc":
            e = objs[-1]
            dup = B.c_N() if d.rule == "gc" else B.d(e.inner)
            tail = B.chain(B.tensor_mor(B.identity(e), B.runit_inv(e)), dup, B.runit(e))
            return B.compose(interpret(ps[0], B), _at(B, objs, len(objs) - 1, tail))
        case "lam":
            f = interpret(ps[0], B)
            x = entry_obj(ps[0].basis[-1])
            return B.curry(B.compose(f, snoc_iso(B, objs, x)))
        case "ap":
            pm, pn = ps
            fm, fn = interpret(pm, B), interpret(pn, B)
            n = len(pm.basis)
            return B.chain(B.eval(fn.cod, fm.cod.res), B.tensor_mor(fm, fn),
                           split_iso(B, objs[:n], objs[n:]))
        case "lif":
            pc, pl, pr = ps
            fc = interpret(pc, B)
            branches = B.pairing(interpret(pl, B), interpret(pr, B))
            n = len(pc.basis)
            return B.chain(B.lif_m(), B.tensor_mor(fc, branches), split_iso(B, objs[:n], objs[n:]))
        case "mu":
            body = interpret(ps[0], B)
            b = body.cod
            lift = [B.p() if a == NAT else B.delta(a.inner) for a in objs]
            step = B.curry(B.compose(body, snoc_iso(B, objs, Excl(b))))
            return B.chain(B.fix(b), B.bang_mor(step), q_star(B, objs), entrywise(B, lift))
        case "pr":
            return B.compose(B.p(), interpret(ps[0], B))
        case "der":
            return B.compose(B.eps(NAT), interpret(ps[0], B))
        case "ds" | "ds!":
            pm, pn = ps
            fm, fn = interpret(pm, B), interpret(pn, B)
            n = len(pm.basis)
            drop = B.w_N() if d.rule == "ds" else B.e(NAT)
            rest = context_obj(objs[n:])
            return B.chain(fn, B.lunit(rest),
                           B.tensor_mor(B.compose(drop, fm), B.identity(rest)),
                           split_iso(B, objs[:n], objs[n:]))
        case "cp" | "cp!":
            pm, pn = ps
            fm, fn = interpret(pm, B), interpret(pn, B)
            n = len(pm.basis)
            x = fm.cod
            dl = objs[n:]
            rest = context_obj(dl)
            dup = B.c_N() if d.rule == "cp" else B.d(NAT)
            into = B.chain(snoc_iso(B, dl + [x], x),
                           B.tensor_mor(snoc_iso(B, dl, x), B.identity(x)),
                           B.assoc_inv(rest, x, x))
            return B.chain(fn, into, B.sym(Tensor(x, x), rest),
                           B.tensor_mor(B.compose(dup, fm), B.identity(rest)),
                           split_iso(B, objs[:n], objs[n:]))
    raise BackendFailure(f"no interpretation for rule {d.rule!r}")


def denote(basis, t: Term, B: Backend, ext: bool = False) -> Morphism:
    from ..typecheck import infer

    _, d = infer(basis, t, ext=ext)
    return interpret(d, B)


# ---------------------------------------------------------------------------
# Observation


DEFAULT_SAMPLE_TERMS = {
    "iota -o iota": ("succ", "pred", "\\x:iota. x", "\\x:iota. lif x then 0 else 1",
                     "\\x:iota. succ (succ x)"),
    "iota -o iota -o iota": ("\\x:iota. \\y:iota. lif x then y else x",
                             "\\x:iota. \\y:iota. y",
                             "\\x:iota. \\y:iota. succ x"),
}


@dataclass(frozen=True)
class ObsSpec:
    s: int = 8  # numerals 0..s are probed
    b: int = 3  # token budget for trace probes
    k: int = 16  # fixpoint iterations; results are re-checked at 2k
    seed: int = 0
    max_inputs: int = 48
    sample_terms: dict = field(default_factory=lambda: dict(DEFAULT_SAMPLE_TERMS), hash=False,
                               compare=False)

    def __post_init__(self):
        if min(self.s, self.b, self.k, self.max_inputs) < 1:
            raise ValueError("observation bounds must be >= 1")

    def cap(self, items: list, salt: str = "") -> list:
        if len(items) <= self.max_inputs:
            return items
        rng = random.Random(f"{self.seed}:{salt}:{len(items)}")
        keep = sorted(rng.sample(range(len(items)), self.max_inputs))
        return [items[i] for i in keep]


def sample_functions(B: Backend, a: Obj, obs: ObsSpec) -> list:
    """Denotations of the configured closed sample terms whose type denotes ``a``."""
    from ..parser import parse_term
    from ..typecheck import infer

    key = ("fun", a, obs.s, tuple(sorted(obs.sample_terms.items())))
    if key in B._sample_cache:
        return B._sample_cache[key]
    out = []
    for _, srcs in sorted(obs.sample_terms.items()):
        for src in srcs:
            t = parse_term(src)
            ty, d = infer((), t)
            if interpret_type(ty) == a:
                out.append((src, interpret(d, B).run(B.point(), obs.k)))
    B._sample_cache[key] = out
    return out


class Verdict(enum.Enum):
    EQUAL = "equal"
    DISTINCT = "distinct"
    INCONCLUSIVE = "inconclusive"


@dataclass
class EqResult:
    verdict: Verdict
    witness: Any = None
    tried: int = 0
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return self.verdict is not Verdict.DISTINCT

    def __bool__(self):
        return self.verdict is Verdict.EQUAL


def _observe_at(B: Backend, f: Morphism, x, obs: ObsSpec, k: int):
    return B.observe(f.run(x, k), f.cod, obs, k)


def semantic_eq(f: Morphism, g: Morphism, B: Backend, obs: ObsSpec = ObsSpec()) -> EqResult:
    """Compare two parallel morphisms on the backend's probe inputs.

    Each input is observed at ``k`` and ``2k`` fixpoint iterations.  The
    verdict is Distinct only if some input separates the two sides while both
    are stable between ``k`` and ``2k``; Inconclusive if they differ but one
    side is still moving.  Inputs the backend cannot evaluate are skipped.
    """
    if f.dom != g.dom or f.cod != g.cod:
        raise ObjectMismatch(f"{show_obj(f.dom)} -> {show_obj(f.cod)} vs "
                             f"{show_obj(g.dom)} -> {show_obj(g.cod)}")
    k1, k2 = obs.k, 2 * obs.k
    verdict = Verdict.EQUAL
    witness = None
    tried = skipped = 0
    for label, x in B.inputs(f.dom, obs):
        try:
            f2, g2 = _observe_at(B, f, x, obs, k2), _observe_at(B, g, x, obs, k2)
            if f2 == g2:
                tried += 1
                continue
            f1, g1 = _observe_at(B, f, x, obs, k1), _observe_at(B, g, x, obs, k1)
        except BackendFailure:
            skipped += 1
            continue
        tried += 1
        if f1 == f2 and g1 == g2:
            return EqResult(Verdict.DISTINCT, (label, f2, g2), tried, skipped)
        if verdict is Verdict.EQUAL:
            verdict, witness = Verdict.INCONCLUSIVE, (label, f2, g2)
    if tried == 0 and skipped:
        # nothing could be evaluated; equality would be vacuous
        verdict = Verdict.INCONCLUSIVE
    return EqResult(verdict, witness, tried, skipped)


class GroundKind(enum.Enum):
    BOTTOM = "bottom"
    NUM = "num"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class GroundResult:
    kind: GroundKind
    value: int | None = None

    def __str__(self):
        match self.kind:
            case GroundKind.NUM:
                return str(self.value)
            case GroundKind.BOTTOM:
                return "bottom"
        return "unstable"


def Num(n: int) -> GroundResult:
    return GroundResult(GroundKind.NUM, n)


BOTTOM_RESULT = GroundResult(GroundKind.BOTTOM)
UNSTABLE = GroundResult(GroundKind.UNSTABLE)


def ground_at(f: Morphism, B: Backend, k: int) -> int | None:
    return B.ground_value(f.run(B.point(), k))


def denote_ground(t: Term, B: Backend, obs: ObsSpec = ObsSpec(), ext: bool = False) -> GroundResult:
    from ..syntax import IOTA
    from ..typecheck import TypeCheckError, infer

    ty, d = infer((), t, ext=ext)
    if ty != IOTA:
        raise TypeCheckError("TypeMismatch", f"expected a closed term of type iota, got {ty}")
    f = interpret(d, B)
    v1, v2 = ground_at(f, B, obs.k), ground_at(f, B, 2 * obs.k)
    if v1 != v2:
        return UNSTABLE
    return BOTTOM_RESULT if v1 is None else Num(v1)
