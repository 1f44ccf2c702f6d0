"""Linear type checking and elaboration into declarative derivations.

Checking is algorithmic: each subterm reports the set of higher-order
variables it consumed, and splits are validated afterwards.  A successful
check is followed by elaboration, which produces a derivation tree using
exactly the rule schemas of the type system, with explicit exchange,
weakening and contraction nodes.

Elaboration canon: unused ground/stable entries are weakened as soon as a
subterm's basis is fixed; contraction happens at the node whose premises
share the variable; exchange nodes reorder the basis into the premise split.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    IOTA,
    App,
    Arrow,
    Bang,
    Basis,
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
    alpha_eq,
    all_names,
    free_names,
    fresh,
    kind_for,
    rename_free,
    show_type,
)

G, H, S = VarKind.GROUND, VarKind.HIGHER, VarKind.STABLE
IOTA_IOTA = Arrow(IOTA, IOTA)
BANG_IOTA = Bang(IOTA)

ERROR_CODES = (
    "UnboundVariable", "KindMismatch", "NotAFunction", "ArgTypeMismatch",
    "LinearVariableUnused", "LinearVariableReused", "BranchLinearityMismatch",
    "MuBodyHasLinearFreeVars", "ConditionNotGround", "BranchNotGround",
    "TypeMismatch", "ExtensionDisabled", "UntypedExtension",
)


class TypeCheckError(Exception):
    def __init__(self, code: str, message: str, span=None):
        assert code in ERROR_CODES, code
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.span = span


@dataclass(frozen=True)
class Derivation:
    rule: str
    basis: Basis
    term: Term
    type: Type
    premises: tuple["Derivation", ...] = ()
    # rule-specific data: swap index for 'ex', (x1, x2) for contraction
    aux: tuple = field(default=())

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def rules(self) -> set:
        out = {self.rule}
        for p in self.premises:
            out |= p.rules()
        return out

    def to_record(self) -> dict:
        rec = {
            "rule": self.rule,
            "basis": [str(e) for e in self.basis],
            "term": str(self.term),
            "type": show_type(self.type),
        }
        if self.aux:
            rec["aux"] = list(self.aux)
        if self.premises:
            rec["premises"] = [p.to_record() for p in self.premises]
        return rec

    def dump(self, indent: int = 0) -> str:
        pad = "  " * indent
        aux = f" {list(self.aux)}" if self.aux else ""
        basis = ", ".join(str(e) for e in self.basis)
        lines = [f"{pad}({self.rule}){aux} {basis} |- {self.term} : {show_type(self.type)}"]
        lines += [p.dump(indent + 1) for p in self.premises]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Algorithmic check


def _check(t: Term, env: dict[str, Entry], ext: bool) -> tuple[Type, frozenset]:
    """Return the type of ``t`` and the linear variables it consumes."""
    sp = getattr(t, "span", None)
    match t:
        case Zero():
            return IOTA, frozenset()
        case Succ() | Pred():
            return IOTA_IOTA, frozenset()
        case Var(x, kind):
            e = env.get(x)
            if e is None:
                raise TypeCheckError("UnboundVariable", f"{x} is not in scope", sp)
            if kind is not None and kind is not e.kind:
                raise TypeCheckError("KindMismatch",
                                     f"{x} used as {kind.value} but bound as {e.kind.value}", sp)
            return e.type, frozenset((x,)) if e.kind is H else frozenset()
        case Lam(x, ty, body):
            if x.startswith("$"):
                raise TypeCheckError("KindMismatch", f"lambda cannot bind stable {x}", sp)
            if isinstance(ty, Bang):
                raise TypeCheckError("KindMismatch", f"lambda cannot bind {x} at a ! type", sp)
            e = Entry(x, kind_for(x, ty), ty)
            rt, used = _check(body, {**env, x: e}, ext)
            if e.kind is H and x not in used:
                raise TypeCheckError("LinearVariableUnused", f"{x} is never used", sp)
            return Arrow(ty, rt), used - {x}
        case App(f, a):
            ft, uf = _check(f, env, ext)
            at, ua = _check(a, env, ext)
            if not isinstance(ft, Arrow):
                raise TypeCheckError("NotAFunction", f"{f} has type {show_type(ft)}", sp)
            if ft.arg != at:
                raise TypeCheckError(
                    "ArgTypeMismatch",
                    f"expected {show_type(ft.arg)}, argument has {show_type(at)}", sp)
            _disjoint(uf, ua, sp)
            return ft.res, uf | ua
        case LIf(c, l, r):
            ct, uc = _check(c, env, ext)
            if ct != IOTA:
                raise TypeCheckError("ConditionNotGround", f"condition has {show_type(ct)}", sp)
            lt, ul = _check(l, env, ext)
            rt, ur = _check(r, env, ext)
            if lt != IOTA or rt != IOTA:
                bad = lt if lt != IOTA else rt
                raise TypeCheckError("BranchNotGround", f"branch has {show_type(bad)}", sp)
            if ul != ur:
                raise TypeCheckError(
                    "BranchLinearityMismatch",
                    f"branches consume {sorted(ul)} vs {sorted(ur)}", sp)
            _disjoint(uc, ul, sp)
            return IOTA, uc | ul
        case Mu(x, ty, body):
            if not x.startswith("$"):
                raise TypeCheckError("KindMismatch", f"mu binds stable variables, not {x}", sp)
            bt, used = _check(body, {**env, x: Entry(x, S, ty)}, ext)
            linear = {y for y in free_names(body) - {x} if env.get(y) and env[y].kind is H}
            if used or linear:
                raise TypeCheckError("MuBodyHasLinearFreeVars",
                                     f"mu body uses {sorted(used | linear)}", sp)
            if bt != ty:
                raise TypeCheckError("TypeMismatch",
                                     f"mu body has {show_type(bt)}, annotation {show_type(ty)}", sp)
            return ty, frozenset()
    if not ext:
        raise TypeCheckError("ExtensionDisabled", f"{type(t).__name__} needs extension mode", sp)
    match t:
        case PromoteG(m):
            mt, um = _check(m, env, ext)
            _expect(mt, IOTA, sp)
            return BANG_IOTA, um
        case Derelict(m):
            mt, um = _check(m, env, ext)
            _expect(mt, BANG_IOTA, sp)
            return IOTA, um
        case DiscardG(m, n):
            mt, um = _check(m, env, ext)
            if mt not in (IOTA, BANG_IOTA):
                raise TypeCheckError("TypeMismatch", f"cannot discard {show_type(mt)}", sp)
            nt, un = _check(n, env, ext)
            _disjoint(um, un, sp)
            return nt, um | un
        case CopyG(m, x1, x2, n):
            mt, um = _check(m, env, ext)
            if mt not in (IOTA, BANG_IOTA) or x1 == x2 or "$" in x1 + x2:
                raise TypeCheckError("TypeMismatch", f"cannot copy {show_type(mt)}", sp)
            kind = G if mt == IOTA else H
            inner = {**env, x1: Entry(x1, kind, mt), x2: Entry(x2, kind, mt)}
            nt, un = _check(n, inner, ext)
            if kind is H and not {x1, x2} <= un:
                raise TypeCheckError("LinearVariableUnused", f"copies {x1},{x2} must be used", sp)
            un = un - {x1, x2}
            _disjoint(um, un, sp)
            return nt, um | un
        case PromoteAs():
            raise TypeCheckError("UntypedExtension", "general promote has no typing rule", sp)
    raise TypeError(t)


def _expect(found: Type, want: Type, sp) -> None:
    if found != want:
        raise TypeCheckError("TypeMismatch", f"expected {show_type(want)}, found {show_type(found)}", sp)


def _disjoint(a: frozenset, b: frozenset, sp) -> None:
    both = a & b
    if both:
        raise TypeCheckError("LinearVariableReused", f"{sorted(both)} used more than once", sp)


# ---------------------------------------------------------------------------
# Elaboration


def _ordered(basis: Basis, names) -> Basis:
    return tuple(e for e in basis if e.name in names)


class _Elaborator:
    def __init__(self, avoid: set):
        self.avoid = set(avoid)

    def fresh(self, base: str) -> str:
        n = fresh(base, self.avoid)
        self.avoid.add(n)
        return n

    def permute(self, d: Derivation, target: Basis) -> Derivation:
        """Stack exchange nodes so that the conclusion basis becomes ``target``."""
        cur = list(d.basis)
        assert sorted(e.name for e in cur) == sorted(e.name for e in target), (cur, target)
        for i, want in enumerate(target):
            j = next(k for k in range(i, len(cur)) if cur[k].name == want.name)
            while j > i:
                cur[j - 1], cur[j] = cur[j], cur[j - 1]
                d = Derivation("ex", tuple(cur), d.term, d.type, (d,), (j - 1,))
                j -= 1
        return d

    def derive(self, t: Term, basis: Basis) -> Derivation:
        fv = free_names(t)
        unused = [e for e in basis if e.name not in fv]
        if unused:
            e = unused[-1]
            assert e.kind is not H, f"linear {e.name} unused"
            rest = tuple(x for x in basis if x.name != e.name)
            d0 = self.derive(t, rest)
            d1 = Derivation("gw" if e.kind is G else "sw", rest + (e,), t, d0.type, (d0,))
            return self.permute(d1, basis)
        match t:
            case Zero():
                return Derivation("z", (), t, IOTA)
            case Succ():
                return Derivation("s", (), t, IOTA_IOTA)
            case Pred():
                return Derivation("p", (), t, IOTA_IOTA)
            case Var(x):
                (e,) = basis
                rule = {G: "gv", H: "hv", S: "sv"}[e.kind]
                return Derivation(rule, basis, Var(x, e.kind), e.type)
            case Lam(x, ty, body):
                if x in {e.name for e in basis}:
                    y = self.fresh(x)
                    body = rename_free(body, x, y, kind_for(y, ty))
                    x = y
                    t = Lam(x, ty, body)
                d0 = self.derive(body, basis + (Entry(x, kind_for(x, ty), ty),))
                return Derivation("lam", basis, t, Arrow(ty, d0.type), (d0,))
            case Mu(x, ty, body):
                if x in {e.name for e in basis}:
                    y = self.fresh(x)
                    body = rename_free(body, x, y, S)
                    x = y
                    t = Mu(x, ty, body)
                d0 = self.derive(body, basis + (Entry(x, S, ty),))
                return Derivation("mu", basis, t, ty, (d0,))
            case App(f, a):
                return self.split2(t, basis, f, a, "ap")
            case LIf():
                return self.split_if(t, basis)
            case PromoteG(m):
                d0 = self.derive(m, basis)
                return Derivation("pr", basis, t, BANG_IOTA, (d0,))
            case Derelict(m):
                d0 = self.derive(m, basis)
                return Derivation("der", basis, t, IOTA, (d0,))
            case DiscardG(m, n):
                return self.split2(t, basis, m, n, "ds")
            case CopyG():
                return self.split_copy(t, basis)
        raise TypeError(t)

    def contract(self, t: Term, basis: Basis, e: Entry, rebuild) -> Derivation:
        """Contraction of ``e``: ``rebuild(x1, x2)`` gives the premise term."""
        x1, x2 = self.fresh(e.name), self.fresh(e.name)
        rest = tuple(x for x in basis if x.name != e.name)
        prem_basis = rest + (Entry(x1, e.kind, e.type), Entry(x2, e.kind, e.type))
        d0 = self.derive(rebuild(x1, x2), prem_basis)
        d1 = Derivation("gc" if e.kind is G else "sc", rest + (e,), t, d0.type, (d0,), (x1, x2))
        return self.permute(d1, basis)

    def split2(self, t: Term, basis: Basis, m: Term, n: Term, rule: str) -> Derivation:
        fm, fn = free_names(m), free_names(n)
        shared = [e for e in basis if e.name in fm and e.name in fn]
        if shared:
            e = shared[0]
            assert e.kind is not H

            def rebuild(x1, x2):
                return type(t)(rename_free(m, e.name, x1, e.kind),
                               rename_free(n, e.name, x2, e.kind))

            return self.contract(t, basis, e, rebuild)
        gam, dlt = _ordered(basis, fm), _ordered(basis, fn)
        dm, dn = self.derive(m, gam), self.derive(n, dlt)
        if rule == "ap":
            ty = dm.type.res
        else:
            ty = dn.type
            if dm.type == BANG_IOTA:
                rule = "ds!"
        d = Derivation(rule, gam + dlt, t, ty, (dm, dn))
        return self.permute(d, basis)

    def split_if(self, t: LIf, basis: Basis) -> Derivation:
        c, l, r = t.cond, t.then, t.else_
        fc, fb = free_names(c), free_names(l) | free_names(r)
        shared = [e for e in basis if e.name in fc and e.name in fb]
        if shared:
            e = shared[0]
            assert e.kind is not H

            def rebuild(x1, x2):
                return LIf(rename_free(c, e.name, x1, e.kind),
                           rename_free(l, e.name, x2, e.kind),
                           rename_free(r, e.name, x2, e.kind))

            return self.contract(t, basis, e, rebuild)
        gam, dlt = _ordered(basis, fc), _ordered(basis, fb)
        dc, dl, dr = self.derive(c, gam), self.derive(l, dlt), self.derive(r, dlt)
        return self.permute(Derivation("lif", gam + dlt, t, IOTA, (dc, dl, dr)), basis)

    def split_copy(self, t: CopyG, basis: Basis) -> Derivation:
        m, x1, x2, n = t.scrut, t.x1, t.x2, t.cont
        names = {e.name for e in basis}
        for old in (x1, x2):
            if old in names:
                new = self.fresh(old)
                n = rename_free(n, old, new)
                x1, x2 = (new, x2) if old == x1 else (x1, new)
        t = CopyG(m, x1, x2, n)
        fm, fn = free_names(m), free_names(n) - {x1, x2}
        shared = [e for e in basis if e.name in fm and e.name in fn]
        if shared:
            e = shared[0]

            def rebuild(y1, y2):
                return CopyG(rename_free(m, e.name, y1, e.kind), x1, x2,
                             rename_free(n, e.name, y2, e.kind))

            return self.contract(t, basis, e, rebuild)
        gam, dlt = _ordered(basis, fm), _ordered(basis, fn)
        dm = self.derive(m, gam)
        kind = G if dm.type == IOTA else H
        binders = (Entry(x1, kind, dm.type), Entry(x2, kind, dm.type))
        dn = self.derive(n, dlt + binders)
        rule = "cp" if kind is G else "cp!"
        return self.permute(Derivation(rule, gam + dlt, t, dn.type, (dm, dn)), basis)


# ---------------------------------------------------------------------------
# Public API


def _env(basis: Basis) -> dict[str, Entry]:
    env = {}
    for e in basis:
        if e.name in env:
            raise ValueError(f"duplicate basis name {e.name!r}")
        env[e.name] = e
    return env


def infer(basis: Basis, t: Term, ext: bool = False) -> tuple[Type, Derivation]:
    basis = tuple(basis)
    env = _env(basis)
    ty, used = _check(t, env, ext)
    unused = [e.name for e in basis if e.kind is H and e.name not in used]
    if unused:
        raise TypeCheckError("LinearVariableUnused", f"{unused} never used", getattr(t, "span", None))
    avoid = all_names(t) | set(env)
    d = _Elaborator(avoid).derive(t, basis)
    assert d.type == ty, (d.type, ty)
    return ty, d


def type_of(basis: Basis, t: Term, ext: bool = False) -> Type:
    """Type of ``t`` without building the derivation."""
    basis = tuple(basis)
    ty, used = _check(t, _env(basis), ext)
    unused = [e.name for e in basis if e.kind is H and e.name not in used]
    if unused:
        raise TypeCheckError("LinearVariableUnused", f"{unused} never used")
    return ty


def check(basis: Basis, t: Term, claimed: Type, ext: bool = False) -> Derivation:
    ty, d = infer(basis, t, ext)
    if ty != claimed:
        raise TypeCheckError("TypeMismatch",
                             f"found {show_type(ty)}, claimed {show_type(claimed)}",
                             getattr(t, "span", None))
    return d


# ---------------------------------------------------------------------------
# Local schema checker


class InvalidDerivation(Exception):
    pass


def _fail(d: Derivation, why: str):
    raise InvalidDerivation(f"({d.rule}) {why}: {d.dump().splitlines()[0]}")


def _well_formed_basis(d: Derivation) -> None:
    names = [e.name for e in d.basis]
    if len(set(names)) != len(names):
        _fail(d, "basis names not distinct")
    for e in d.basis:
        if e.kind is not kind_for(e.name, e.type) and not (e.kind is H and isinstance(e.type, Bang)):
            _fail(d, f"entry {e} has kind {e.kind.value}")
        if e.kind is G and e.type != IOTA:
            _fail(d, f"ground entry {e} not at iota")


def _check_node(d: Derivation, ext: bool) -> None:
    _well_formed_basis(d)
    ps = d.premises
    t = d.term
    rule = d.rule

    def need(cond, why):
        if not cond:
            _fail(d, why)

    def arity(n):
        need(len(ps) == n, f"expected {n} premises")

    def disjoint(a: Basis, b: Basis):
        need(not ({e.name for e in a} & {e.name for e in b}), "contexts overlap")

    if rule in ("z", "s", "p"):
        arity(0)
        need(d.basis == (), "axiom with non-empty basis")
        want = {"z": (Zero, IOTA), "s": (Succ, IOTA_IOTA), "p": (Pred, IOTA_IOTA)}[rule]
        need(isinstance(t, want[0]) and d.type == want[1], "wrong constant")
    elif rule in ("gv", "hv", "sv"):
        arity(0)
        kind = {"gv": G, "hv": H, "sv": S}[rule]
        need(len(d.basis) == 1, "variable axiom needs a singleton basis")
        (e,) = d.basis
        need(e.kind is kind, "variable kind")
        need(isinstance(t, Var) and t.name == e.name and d.type == e.type, "variable mismatch")
    elif rule == "ex":
        arity(1)
        (i,) = d.aux
        p = ps[0]
        need(0 <= i < len(d.basis) - 1, "swap index")
        swapped = list(d.basis)
        swapped[i], swapped[i + 1] = swapped[i + 1], swapped[i]
        need(tuple(swapped) == p.basis, "premise is not the swapped basis")
        need(alpha_eq(t, p.term) and d.type == p.type, "exchange changes the judgment")
    elif rule in ("gw", "sw"):
        arity(1)
        p = ps[0]
        need(len(d.basis) >= 1 and d.basis[:-1] == p.basis, "weakened entry must be last")
        e = d.basis[-1]
        need(e.kind is (G if rule == "gw" else S), "weakening kind")
        need(alpha_eq(t, p.term) and d.type == p.type, "weakening changes the judgment")
    elif rule in ("gc", "sc"):
        arity(1)
        p = ps[0]
        x1, x2 = d.aux
        need(len(d.basis) >= 1 and len(p.basis) == len(d.basis) + 1, "contraction shape")
        e = d.basis[-1]
        need(e.kind is (G if rule == "gc" else S), "contraction kind")
        need(p.basis[:-2] == d.basis[:-1], "contraction context")
        need(p.basis[-2] == Entry(x1, e.kind, e.type) and p.basis[-1] == Entry(x2, e.kind, e.type),
             "contracted copies")
        merged = rename_free(rename_free(p.term, x1, e.name, e.kind), x2, e.name, e.kind)
        need(alpha_eq(t, merged) and d.type == p.type, "contraction term")
    elif rule == "ap":
        arity(2)
        pm, pn = ps
        disjoint(pm.basis, pn.basis)
        need(d.basis == pm.basis + pn.basis, "basis is not the concatenation")
        need(isinstance(t, App) and alpha_eq(t.fun, pm.term) and alpha_eq(t.arg, pn.term), "term")
        need(isinstance(pm.type, Arrow) and pm.type.arg == pn.type and d.type == pm.type.res,
             "application types")
    elif rule == "lif":
        arity(3)
        pc, pl, pr = ps
        need(pl.basis == pr.basis, "branches need the same context")
        disjoint(pc.basis, pl.basis)
        need(d.basis == pc.basis + pl.basis, "basis is not the concatenation")
        need(isinstance(t, LIf) and alpha_eq(t.cond, pc.term) and alpha_eq(t.then, pl.term)
             and alpha_eq(t.else_, pr.term), "term")
        need(pc.type == pl.type == pr.type == d.type == IOTA, "conditional types")
    elif rule == "lam":
        arity(1)
        p = ps[0]
        need(isinstance(t, Lam), "term")
        need(p.basis == d.basis + (Entry(t.var, kind_for(t.var, t.ty), t.ty),), "lambda basis")
        need(alpha_eq(t.body, p.term) and d.type == Arrow(t.ty, p.type), "lambda types")
    elif rule == "mu":
        arity(1)
        p = ps[0]
        need(isinstance(t, Mu), "term")
        need(all(e.kind in (G, S) for e in d.basis), "mu context must be ground/stable")
        need(p.basis == d.basis + (Entry(t.var, S, t.ty),), "mu basis")
        need(alpha_eq(t.body, p.term) and d.type == p.type == t.ty, "mu types")
    elif rule in ("pr", "der") and ext:
        arity(1)
        p = ps[0]
        need(p.basis == d.basis, "context")
        if rule == "pr":
            need(isinstance(t, PromoteG) and alpha_eq(t.body, p.term), "term")
            need(p.type == IOTA and d.type == BANG_IOTA, "promotion types")
        else:
            need(isinstance(t, Derelict) and alpha_eq(t.body, p.term), "term")
            need(p.type == BANG_IOTA and d.type == IOTA, "dereliction types")
    elif rule in ("ds", "ds!") and ext:
        arity(2)
        pm, pn = ps
        disjoint(pm.basis, pn.basis)
        need(d.basis == pm.basis + pn.basis, "basis is not the concatenation")
        need(isinstance(t, DiscardG) and alpha_eq(t.scrut, pm.term) and alpha_eq(t.cont, pn.term),
             "term")
        need(pm.type == (IOTA if rule == "ds" else BANG_IOTA) and d.type == pn.type, "types")
    elif rule in ("cp", "cp!") and ext:
        arity(2)
        pm, pn = ps
        need(isinstance(t, CopyG), "term")
        kind, ty = (G, IOTA) if rule == "cp" else (H, BANG_IOTA)
        dlt = pn.basis[:-2]
        need(pn.basis[-2:] == (Entry(t.x1, kind, ty), Entry(t.x2, kind, ty)), "copy binders")
        disjoint(pm.basis, dlt)
        need(d.basis == pm.basis + dlt, "basis is not the concatenation")
        need(alpha_eq(t.scrut, pm.term) and alpha_eq(t.cont, pn.term), "term")
        need(pm.type == ty and d.type == pn.type, "types")
    else:
        _fail(d, "unknown rule")


def validate_derivation(d: Derivation, ext: bool = False) -> tuple[bool, str | None]:
    """Check every node against its rule schema; return (ok, first failure)."""
    stack = [d]
    while stack:
        node = stack.pop()
        try:
            _check_node(node, ext)
        except InvalidDerivation as exc:
            return False, str(exc)
        stack.extend(node.premises)
    return True, None
