"""Random generation of well-typed terms.

Generation is goal-directed: a term is built for a target type while every
higher-order (linear) variable in scope is threaded to exactly one
multiplicative position, or to both branches of a conditional.  Ground and
stable variables may be used any number of times.  The redex shapes of the
calculus (both beta rules, Y, the delta rules) are offered explicitly so that
small terms still reduce.
"""
from __future__ import annotations

import random
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
    PromoteG,
    Succ,
    Term,
    Type,
    Var,
    VarKind,
    numeral,
    size as term_size,
)
from .typecheck import TypeCheckError, infer

IOTA_IOTA = Arrow(IOTA, IOTA)
BANG_IOTA = Bang(IOTA)
ARG_TYPES = (IOTA, IOTA, IOTA_IOTA)
CLOSED_TYPES = (IOTA, IOTA, IOTA, IOTA_IOTA, Arrow(IOTA, IOTA_IOTA), Arrow(IOTA_IOTA, IOTA))


class GenerationFailed(Exception):
    pass


def _result_chain(ty: Type) -> list[Type]:
    """Argument types of ``ty`` up to its ground result."""
    args = []
    while isinstance(ty, Arrow):
        args.append(ty.arg)
        ty = ty.res
    return args


class _Gen:
    def __init__(self, rng: random.Random, ext: bool):
        self.rng = rng
        self.ext = ext
        self.counter = 0

    def fresh(self, ty: Type, stable: bool = False) -> Entry:
        self.counter += 1
        if stable:
            return Entry(f"$F{self.counter}", VarKind.STABLE, ty)
        if ty == IOTA:
            return Entry(f"x{self.counter}", VarKind.GROUND, ty)
        return Entry(f"f{self.counter}", VarKind.HIGHER, ty)

    def split(self, lin: list) -> tuple[list, list]:
        a, b = [], []
        for e in lin:
            (a if self.rng.random() < 0.5 else b).append(e)
        return a, b

    def sizes(self, n: int, parts: int) -> list[int]:
        n = max(n - 1, parts)
        cuts = sorted(self.rng.randint(0, n) for _ in range(parts - 1))
        bounds = [0] + cuts + [n]
        return [max(1, bounds[i + 1] - bounds[i]) for i in range(parts)]

    # -- entry point

    def term(self, lin: list, env: list, ty: Type, size: int) -> Term:
        if size <= 2:
            return self.leaf(lin, env, ty)
        options = self.options(lin, env, ty)
        name = self.rng.choices([o[0] for o in options], [o[1] for o in options])[0]
        return getattr(self, "gen_" + name)(lin, env, ty, size)

    def options(self, lin, env, ty):
        opts = [("app", 2), ("beta_higher", 1), ("head", 3 if lin else 0)]
        if ty == IOTA:
            opts += [("succ", 2), ("pred", 1), ("pred_succ", 1), ("lif", 3), ("beta_iota", 2)]
            if self.ext:
                opts += [("discard", 1), ("copy", 1), ("derelict", 1), ("bang_ops", 1)]
        else:
            opts += [("lam", 5)]
        if not lin:
            opts += [("mu", 1)]
        return [o for o in opts if o[1] > 0]

    # -- leaves

    def leaf(self, lin: list, env: list, ty: Type) -> Term:
        if isinstance(ty, Arrow) and not (len(lin) == 1 and lin[0].type == ty):
            x = self.fresh(ty.arg)
            lin2, env2 = (lin, env + [x]) if x.kind is VarKind.GROUND else (lin + [x], env)
            return Lam(x.name, ty.arg, self.leaf(lin2, env2, ty.res))
        if lin:
            return self.consume(lin, env, ty)
        usable = [e for e in env if e.type == ty]
        r = self.rng.random()
        if usable and r < 0.5:
            e = self.rng.choice(usable)
            return Var(e.name, e.kind)
        return numeral(self.rng.randint(0, 3))

    def consume(self, lin: list, env: list, ty: Type) -> Term:
        """A small term of type ``ty`` using every variable in ``lin`` once."""
        if len(lin) == 1 and lin[0].type == ty:
            return Var(lin[0].name, VarKind.HIGHER)
        h, rest = lin[0], lin[1:]
        if h.type == BANG_IOTA:
            if rest and self.rng.random() < 0.5:
                return DiscardG(Var(h.name, VarKind.HIGHER), self.consume(rest, env, ty))
            t = Derelict(Var(h.name, VarKind.HIGHER))
            return self.wrap_rest(t, rest, env)
        args = _result_chain(h.type)
        t: Term = Var(h.name, VarKind.HIGHER)
        for i, a in enumerate(args):
            t = App(t, self.leaf(rest if i == 0 else [], env, a))
        return t

    def wrap_rest(self, t: Term, rest: list, env: list) -> Term:
        if not rest:
            return t
        # thread the remaining linear variables through both branches
        body = self.consume(rest, env, IOTA)
        return LIf(t, body, body)

    # -- constructors

    def gen_head(self, lin, env, ty, size):
        heads = [e for e in lin if e.type != BANG_IOTA and
                 (e.type == ty or (isinstance(e.type, Arrow) and ty == IOTA))]
        if not heads:
            return self.gen_app(lin, env, ty, size)
        h = self.rng.choice(heads)
        rest = [e for e in lin if e is not h]
        t: Term = Var(h.name, VarKind.HIGHER)
        if h.type == ty:
            return t if not rest else self.gen_app(lin, env, ty, size)
        args = _result_chain(h.type)
        parts = self.split_many(rest, len(args))
        for a, part, sz in zip(args, parts, self.sizes(size, len(args))):
            t = App(t, self.term(part, env, a, sz))
        return t

    def split_many(self, lin, n):
        parts = [[] for _ in range(n)]
        for e in lin:
            parts[self.rng.randrange(n)].append(e)
        return parts

    def gen_app(self, lin, env, ty, size):
        a = self.rng.choice(ARG_TYPES)
        l1, l2 = self.split(lin)
        s1, s2 = self.sizes(size, 2)
        return App(self.term(l1, env, Arrow(a, ty), s1), self.term(l2, env, a, s2))

    def gen_lam(self, lin, env, ty, size):
        x = self.fresh(ty.arg)
        if x.kind is VarKind.GROUND:
            return Lam(x.name, ty.arg, self.term(lin, env + [x], ty.res, size - 1))
        return Lam(x.name, ty.arg, self.term(lin + [x], env, ty.res, size - 1))

    def gen_beta_higher(self, lin, env, ty, size):
        a = self.rng.choice((IOTA_IOTA, IOTA_IOTA, Arrow(IOTA, IOTA_IOTA)))
        f = self.fresh(a)
        l1, l2 = self.split(lin)
        s1, s2 = self.sizes(size, 2)
        return App(Lam(f.name, a, self.term(l1 + [f], env, ty, s1)), self.term(l2, env, a, s2))

    def gen_beta_iota(self, lin, env, ty, size):
        x = self.fresh(IOTA)
        l1, l2 = self.split(lin)
        s1, s2 = self.sizes(size, 2)
        arg = numeral(self.rng.randint(0, 3)) if not l2 and self.rng.random() < 0.6 \
            else self.term(l2, env, IOTA, s2)
        return App(Lam(x.name, IOTA, self.term(l1, env + [x], ty, s1)), arg)

    def gen_succ(self, lin, env, ty, size):
        return App(Succ(), self.term(lin, env, IOTA, size - 1))

    def gen_pred(self, lin, env, ty, size):
        return App(Pred(), self.term(lin, env, IOTA, size - 1))

    def gen_pred_succ(self, lin, env, ty, size):
        return App(Pred(), App(Succ(), self.term(lin, env, IOTA, size - 2)))

    def gen_lif(self, lin, env, ty, size):
        lc, lb = self.split(lin)
        sc, sl, sr = self.sizes(size, 3)
        if not lc and self.rng.random() < 0.4:
            cond = numeral(self.rng.randint(0, 2))
        else:
            cond = self.term(lc, env, IOTA, sc)
        return LIf(cond, self.term(lb, env, IOTA, sl), self.term(lb, env, IOTA, sr))

    def gen_mu(self, lin, env, ty, size):
        f = self.fresh(ty, stable=True)
        env2 = env + [f]
        if ty != IOTA_IOTA or self.rng.random() < 0.4:
            return Mu(f.name, ty, self.term([], env2, ty, size - 1))
        # guarded recursion on a ground argument, which usually terminates
        x = self.fresh(IOTA)
        env3 = env2 + [x]
        base = self.term([], env3, IOTA, max(1, size // 3))
        rec: Term = App(Var(f.name, VarKind.STABLE), App(Pred(), Var(x.name, VarKind.GROUND)))
        if self.rng.random() < 0.5:
            rec = App(Succ(), rec)
        return Mu(f.name, ty, Lam(x.name, IOTA, LIf(Var(x.name, VarKind.GROUND), base, rec)))

    # -- extension

    def gen_discard(self, lin, env, ty, size):
        l1, l2 = self.split(lin)
        s1, s2 = self.sizes(size, 2)
        return DiscardG(self.term(l1, env, IOTA, s1), self.term(l2, env, ty, s2))

    def gen_copy(self, lin, env, ty, size):
        l1, l2 = self.split(lin)
        s1, s2 = self.sizes(size, 2)
        x, y = self.fresh(IOTA), self.fresh(IOTA)
        return CopyG(self.term(l1, env, IOTA, s1), x.name, y.name,
                     self.term(l2, env + [x, y], ty, s2))

    def gen_derelict(self, lin, env, ty, size):
        return Derelict(PromoteG(self.term(lin, env, IOTA, size - 2)))

    def gen_bang_ops(self, lin, env, ty, size):
        l1, l2 = self.split(lin)
        s1, s2 = self.sizes(size, 2)
        m = PromoteG(self.term(l1, env, IOTA, s1 - 1))
        if self.rng.random() < 0.5:
            return DiscardG(m, self.term(l2, env, ty, s2))
        x, y = self.fresh(BANG_IOTA), self.fresh(BANG_IOTA)
        x = Entry(x.name, VarKind.HIGHER, BANG_IOTA)
        y = Entry(y.name, VarKind.HIGHER, BANG_IOTA)
        return CopyG(m, x.name, y.name, self.term(l2 + [x, y], env, ty, s2))


def gen_term(basis, ty: Type, size: int, seed: int = 0, ext: bool = False,
             max_size: int | None = None, retries: int = 50) -> Term:
    """A term ``t`` with ``basis |- t : ty``, of roughly ``size`` nodes.

    Higher-order basis entries are used exactly once; ground and stable ones
    freely.  ``max_size`` rejects and retries oversized results.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    basis = tuple(basis)
    lin = [e for e in basis if e.kind is VarKind.HIGHER]
    env = [e for e in basis if e.kind is not VarKind.HIGHER]
    rng = random.Random(seed)
    last = None
    for _ in range(retries):
        g = _Gen(rng, ext)
        t = g.term(list(lin), list(env), ty, size)
        if max_size is not None and term_size(t) > max_size:
            last = f"size {term_size(t)} exceeds {max_size}"
            size = max(1, size * 3 // 4)
            continue
        try:
            got, _ = infer(basis, t, ext=ext)
        except TypeCheckError as exc:  # pragma: no cover - generator bug
            last = f"{exc.code}: {exc}"
            continue
        if got == ty:
            return t
        last = f"generated type {got}"
    raise GenerationFailed(f"no term of type {ty} after {retries} attempts ({last})")


@dataclass
class CorpusItem:
    index: int
    seed: int
    type: Type
    term: Term


def corpus(n: int, max_size: int = 25, seed: int = 0, ext: bool = False,
           types=CLOSED_TYPES) -> list[CorpusItem]:
    """``n`` closed well-typed terms of size at most ``max_size``, deterministic in ``seed``."""
    rng = random.Random(seed)
    out = []
    for i in range(n):
        s = rng.randrange(1 << 30)
        ty = types[i % len(types)]
        target = rng.randint(3, max_size)
        t = gen_term((), ty, target, seed=s, ext=ext, max_size=max_size)
        out.append(CorpusItem(i, s, ty, t))
    return out
