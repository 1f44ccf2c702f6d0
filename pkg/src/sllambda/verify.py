"""Executable checks: model laws, substitution, soundness and the incompleteness witness."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any

from .generate import GenerationFailed, gen_term
from .model.core import (
    NAT,
    UNIT,
    Backend,
    Excl,
    Lolli,
    Morphism,
    ObsSpec,
    Tensor,
    Verdict,
    context_obj,
    entry_obj,
    entrywise,
    interpret,
    q_star,
    semantic_eq,
    snoc_iso,
    split_iso,
)
from .parser import parse_term, pretty
from .reduce import normalize, reduction_graph
from .syntax import (
    IOTA,
    Arrow,
    Entry,
    Term,
    VarKind,
    subst_ground,
    subst_higher,
    subst_stable,
)
from .typecheck import infer

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

IOTA_IOTA = Arrow(IOTA, IOTA)


@dataclass
class LawReport:
    name: str
    backend: str
    tried: int
    verdict: str
    counterexample: Any = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def line(self) -> str:
        s = f"{self.verdict.upper():12} {self.backend:6} {self.name} (tried {self.tried})"
        if self.counterexample is not None:
            s += f" counterexample: {self.counterexample}"
        return s

    def record(self) -> dict:
        return {"law": self.name, "backend": self.backend, "tried": self.tried,
                "verdict": self.verdict,
                "counterexample": None if self.counterexample is None else str(self.counterexample),
                **{k: v for k, v in self.details.items() if isinstance(v, (int, str, float, bool))}}


def _report(name: str, B: Backend, results: list) -> LawReport:
    """Fold a list of ``(label, EqResult)`` into one report."""
    verdict, cex = PASS, None
    for label, r in results:
        if r.verdict is Verdict.DISTINCT:
            return LawReport(name, B.name, len(results), FAIL, (label, r.witness))
        if r.verdict is Verdict.INCONCLUSIVE and verdict == PASS:
            verdict, cex = INCONCLUSIVE, (label, r.witness)
    return LawReport(name, B.name, len(results), verdict, cex)


def _law(name, B, lhs, rhs, obs, label=""):
    return _report(name, B, [(label, semantic_eq(lhs, rhs, B, obs))])


# ---------------------------------------------------------------------------
# Law suite


def _ground_points(B: Backend, obs: ObsSpec) -> list[tuple[str, Morphism]]:
    """Sampled maps ``1 -> N``: numerals and the everywhere-undefined map."""
    pts = [(str(i), B.num(i)) for i in range(4)]
    omega = interpret(infer((), parse_term("mu $w:iota. $w"))[1], B)
    pts.append(("omega", omega))
    return pts


FIX_BODIES = {
    IOTA: ["$F", "succ $F", "0", "lif $F then 1 else 2", "pred (succ 3)"],
    IOTA_IOTA: ["$F", "\\x:iota. $F x", "succ", "\\x:iota. lif x then 0 else succ ($F (pred x))",
                "\\x:iota. lif x then 5 else $F (pred x)", "\\x:iota. $F (succ x)"],
}


def _functional(B: Backend, body: str, ty) -> Morphism:
    """``1 -> !(!B -o B)``: the promoted curried denotation of ``$F:ty |- body : ty``."""
    basis = (Entry("$F", VarKind.STABLE, ty),)
    _, d = infer(basis, parse_term(body, basis))
    m = interpret(d, B)
    bb = entry_obj(basis[0])
    phi = B.curry(B.compose(m, B.sym(UNIT, bb)))
    return B.compose(B.bang_mor(phi), B.q1())


def law_suite(B: Backend, obs: ObsSpec = ObsSpec(), objects=None) -> list[LawReport]:
    """Check the model equations by observation; one report per law and object."""
    if objects is None:
        # on coherence spaces !!A grows doubly exponentially in the clique
        # size, so the non-flat test object there is !N rather than N -o N
        objects = [NAT, Excl(NAT) if B.name.startswith("coh") else Lolli(NAT, NAT)]
    N = NAT
    c, w, p = B.c_N(), B.w_N(), B.p()
    idN = B.identity(N)
    out = []

    def law(name, lhs, rhs):
        out.append(_law(name, B, lhs, rhs, obs))

    # (a) comonoid (N, c_N, w_N)
    law("N-comonoid coassociativity",
        B.chain(B.assoc(N, N, N), B.tensor_mor(c, idN), c),
        B.compose(B.tensor_mor(idN, c), c))
    law("N-comonoid left counit", B.chain(B.lunit(N), B.tensor_mor(w, idN), c), idN)
    law("N-comonoid right counit", B.chain(B.runit(N), B.tensor_mor(idN, w), c), idN)
    law("N-comonoid commutativity", B.compose(B.sym(N, N), c), c)

    # (a) comonoid (!A, d, e) and (h) comonad / monoidality, per object
    for a in objects:
        ba = Excl(a)
        d, e, idb = B.d(a), B.e(a), B.identity(ba)
        tag = f"[{a}]"
        law(f"!A-comonoid coassociativity {tag}",
            B.chain(B.assoc(ba, ba, ba), B.tensor_mor(d, idb), d),
            B.compose(B.tensor_mor(idb, d), d))
        law(f"!A-comonoid left counit {tag}", B.chain(B.lunit(ba), B.tensor_mor(e, idb), d), idb)
        law(f"!A-comonoid right counit {tag}", B.chain(B.runit(ba), B.tensor_mor(idb, e), d), idb)
        law(f"!A-comonoid commutativity {tag}", B.compose(B.sym(ba, ba), d), d)
        delta, eps = B.delta(a), B.eps(a)
        law(f"comonad eps.delta = id {tag}", B.compose(B.eps(ba), delta), idb)
        law(f"comonad !eps.delta = id {tag}", B.compose(B.bang_mor(eps), delta), idb)
        law(f"comonad delta coassociativity {tag}",
            B.compose(B.delta(ba), delta), B.compose(B.bang_mor(delta), delta))
        law(f"d is a coalgebra morphism {tag}",
            B.chain(B.q(ba, ba), B.tensor_mor(delta, delta), d),
            B.compose(B.bang_mor(d), delta))
        law(f"e is a coalgebra morphism {tag}",
            B.compose(B.q1(), e), B.compose(B.bang_mor(e), delta))
        law(f"q unit {tag}",
            B.chain(B.bang_mor(B.lunit(a)), B.q(UNIT, a), B.tensor_mor(B.q1(), idb)),
            B.lunit(ba))
        law(f"eps monoidal {tag}",
            B.compose(B.eps(Tensor(a, N)), B.q(a, N)), B.tensor_mor(eps, B.eps(N)))
        law(f"delta monoidal {tag}",
            B.compose(B.delta(Tensor(a, N)), B.q(a, N)),
            B.chain(B.bang_mor(B.q(a, N)), B.q(ba, Excl(N)), B.tensor_mor(delta, B.delta(N))))
    law("q associativity",
        B.chain(B.bang_mor(B.assoc(N, N, N)), B.q(Tensor(N, N), N),
                B.tensor_mor(B.q(N, N), B.identity(Excl(N)))),
        B.chain(B.q(N, Tensor(N, N)), B.tensor_mor(B.identity(Excl(N)), B.q(N, N)),
                B.assoc(Excl(N), Excl(N), Excl(N))))

    # (b) zero and succ are comonoid morphisms
    zero, succ = B.zero(), B.succ_m()
    law("c_N.0 = (0 (x) 0)", B.compose(c, zero),
        B.compose(B.tensor_mor(zero, zero), B.lunit_inv(UNIT)))
    law("c_N.succ = (succ (x) succ).c_N", B.compose(c, succ),
        B.compose(B.tensor_mor(succ, succ), c))
    law("w_N.succ = w_N", B.compose(w, succ), w)
    law("w_N.0 = id", B.compose(w, zero), B.identity(UNIT))

    # (c) coalgebra structure
    law("p.0 = !0.q1", B.compose(p, zero), B.compose(B.bang_mor(zero), B.q1()))
    law("p.succ = !succ.p", B.compose(p, succ), B.compose(B.bang_mor(succ), p))
    law("!p.p = delta.p", B.compose(B.bang_mor(p), p), B.compose(B.delta(N), p))
    law("eps.p = id", B.compose(B.eps(N), p), idN)

    # (d) p is a comonoid morphism
    law("d.p = (p (x) p).c_N", B.compose(B.d(N), p), B.compose(B.tensor_mor(p, p), c))
    law("e.p = w_N", B.compose(B.e(N), p), w)

    # (e) pred diagram
    out.append(_report("pred.num(k+1) = num(k)", B, [
        (str(k), semantic_eq(B.compose(B.pred_m(), B.num(k + 1)), B.num(k), B, obs))
        for k in range(obs.s + 1)]))

    # (f) conditional diagram
    pts = _ground_points(B, obs)
    lif = B.lif_m()
    for cond, side in ((0, 0), (1, 1), (3, 1)):
        results = []
        for (lf, f) in pts:
            for (lg, g) in pts:
                lhs = B.chain(lif, B.tensor_mor(B.num(cond), B.pairing(f, g)), B.lunit_inv(UNIT))
                results.append((f"f={lf},g={lg}", semantic_eq(lhs, (f, g)[side], B, obs)))
        out.append(_report(f"lif.(num {cond} (x) <f,g>) = {'fg'[side]}", B, results))

    # (g) fixpoint diagram
    results = []
    for ty, bodies in FIX_BODIES.items():
        b = entry_obj(Entry("_", VarKind.HIGHER, ty))
        phi_obj = Lolli(Excl(b), b)
        fix = B.fix(b)
        unrolled = B.chain(B.eval(Excl(b), b),
                           B.tensor_mor(B.eps(phi_obj), B.compose(B.bang_mor(fix), B.delta(phi_obj))),
                           B.d(phi_obj))
        for body in bodies:
            f = _functional(B, body, ty)
            results.append((body, semantic_eq(B.compose(fix, f), B.compose(unrolled, f), B, obs)))
    out.append(_report("fix = eval.(eps (x) !fix.delta).d", B, results))
    return out


# ---------------------------------------------------------------------------
# Substitution lemma


def _subst_morphism(B: Backend, case: str, gam, dl, m_der, n_der=None, n: int | None = None):
    """Right-hand side of the substitution lemma as a morphism out of ``[[gam, dl]]``."""
    g_objs = [entry_obj(e) for e in gam]
    fm = interpret(m_der, B)
    if case == "ground":
        inject = B.chain(snoc_iso(B, g_objs, NAT), B.tensor_mor(B.identity(context_obj(g_objs)),
                                                              B.num(n)),
                         B.runit_inv(context_obj(g_objs)))
        return B.compose(fm, inject)
    d_objs = [entry_obj(e) for e in dl]
    fn = interpret(n_der, B)
    if case == "higher":
        arg = fn
    else:
        lift = [B.p() if a == NAT else B.delta(a.inner) for a in d_objs]
        arg = B.chain(B.bang_mor(fn), q_star(B, d_objs), entrywise(B, lift))
    s = arg.cod
    return B.chain(fm, snoc_iso(B, g_objs, s),
                   B.tensor_mor(B.identity(context_obj(g_objs)), arg),
                   split_iso(B, g_objs, d_objs))


def substitution_check(case: str, gam, m: Term, var: Entry, B: Backend, obs: ObsSpec = ObsSpec(),
                       n: int | None = None, dl=(), n_term: Term | None = None) -> LawReport:
    """One instance of the substitution lemma.

    ``gam, var |- m`` with ``var`` the substituted variable (last in the basis);
    ``case`` is ``ground`` (numeral ``n``), ``higher`` or ``stable`` (with
    ``dl |- n_term`` and ``dl`` disjoint from ``gam``).
    """
    gam, dl = tuple(gam), tuple(dl)
    _, m_der = infer(gam + (var,), m)
    if case == "ground":
        lhs_term = subst_ground(m, n, var.name)
        rhs = _subst_morphism(B, case, gam, (), m_der, n=n)
        basis = gam
    else:
        if case == "stable" and any(e.kind is VarKind.HIGHER for e in dl):
            raise ValueError("stable substitution needs a ground/stable context for N")
        _, n_der = infer(dl, n_term)
        lhs_term = (subst_higher if case == "higher" else subst_stable)(m, n_term, var.name)
        rhs = _subst_morphism(B, case, gam, dl, m_der, n_der=n_der)
        basis = gam + dl
    _, lhs_der = infer(basis, lhs_term)
    lhs = interpret(lhs_der, B)
    label = f"M={pretty(m)}; " + (f"n={n}" if case == "ground" else f"N={pretty(n_term)}")
    r = semantic_eq(lhs, rhs, B, obs)
    rep = _report(f"substitution/{case}", B, [(label, r)])
    rep.details["skipped_inputs"] = r.skipped
    return rep


_CTX_POOL = (
    Entry("y", VarKind.GROUND, IOTA),
    Entry("$G", VarKind.STABLE, IOTA),
    Entry("h", VarKind.HIGHER, IOTA_IOTA),
    Entry("$H", VarKind.STABLE, IOTA_IOTA),
)
_DELTA_POOL = (
    Entry("z", VarKind.GROUND, IOTA),
    Entry("$K", VarKind.STABLE, IOTA),
)


def substitution_instances(case: str, count: int, seed: int = 0, max_size: int = 12):
    """Random instances ``(gam, m, var, n, dl, n_term)`` for ``substitution_check``."""
    rng = random.Random(f"subst:{case}:{seed}")
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 50 * count:
            raise GenerationFailed(f"could not build {count} {case} instances")
        gam = tuple(e for e in _CTX_POOL if rng.random() < 0.3)
        res = rng.choice((IOTA, IOTA, IOTA_IOTA))
        s = rng.randrange(1 << 30)
        try:
            if case == "ground":
                var = Entry("x", VarKind.GROUND, IOTA)
                m = gen_term(gam + (var,), res, rng.randint(3, max_size), seed=s, max_size=max_size)
                out.append((gam, m, var, rng.randint(0, 4), (), None))
                continue
            dl = tuple(e for e in _DELTA_POOL if rng.random() < 0.4)
            if case == "higher":
                sigma = rng.choice((IOTA_IOTA, Arrow(IOTA, IOTA_IOTA)))
                var = Entry("f", VarKind.HIGHER, sigma)
                if rng.random() < 0.5:
                    dl += (Entry("g", VarKind.HIGHER, IOTA_IOTA),)
            else:
                sigma = rng.choice((IOTA, IOTA_IOTA))
                var = Entry("$F", VarKind.STABLE, sigma)
            m = gen_term(gam + (var,), res, rng.randint(3, max_size), seed=s, max_size=max_size)
            nt = gen_term(dl, sigma, rng.randint(2, max_size // 2), seed=s + 1, max_size=max_size)
            out.append((gam, m, var, None, dl, nt))
        except GenerationFailed:
            continue
    return out


def substitution_suite(case: str, B: Backend, count: int = 100, obs: ObsSpec = ObsSpec(),
                       seed: int = 0) -> LawReport:
    reports = [substitution_check(case, g, m, v, B, obs, n=n, dl=dl, n_term=nt)
               for g, m, v, n, dl, nt in substitution_instances(case, count, seed)]
    failed = [r for r in reports if r.verdict == FAIL]
    inconclusive = [r for r in reports if r.verdict == INCONCLUSIVE]
    verdict = FAIL if failed else INCONCLUSIVE if inconclusive else PASS
    cex = failed[0].counterexample if failed else None
    return LawReport(f"substitution/{case}", B.name, len(reports), verdict, cex,
                     {"equal": sum(r.passed for r in reports), "distinct": len(failed),
                      "inconclusive": len(inconclusive)})


# ---------------------------------------------------------------------------
# Soundness, subject reduction, incompleteness


def soundness_check(t: Term, B: Backend, fuel: int = 200, obs: ObsSpec = ObsSpec(),
                    ext: bool = False, max_size: int = 200) -> LawReport:
    """Every step of the leftmost reduction of ``t`` preserves its denotation and type."""
    ty, d = infer((), t, ext=ext)
    norm = normalize(t, fuel=fuel, ext=ext, max_size=max_size, keep_trace=True)
    prev = interpret(d, B)
    counts = {"equal": 0, "distinct": 0, "inconclusive": 0, "type_changes": 0}
    cex = None
    cur = t
    for site, nxt in norm.trace:
        ty2, d2 = infer((), nxt, ext=ext)
        if ty2 != ty:
            counts["type_changes"] += 1
            cex = cex or ("type change", pretty(cur), pretty(nxt))
            break
        f = interpret(d2, B)
        r = semantic_eq(prev, f, B, obs)
        counts[r.verdict.value] += 1
        if r.verdict is Verdict.DISTINCT and cex is None:
            cex = (site.tag.value, pretty(cur), pretty(nxt), r.witness)
        prev, cur = f, nxt
    if counts["distinct"] or counts["type_changes"]:
        verdict = FAIL
    elif counts["inconclusive"]:
        verdict = INCONCLUSIVE
    else:
        verdict = PASS
    details = dict(counts, steps=norm.steps, exhausted=norm.exhausted)
    return LawReport("soundness", B.name, norm.steps, verdict, cex, details)


def subject_reduction(t: Term, fuel: int = 200, ext: bool = False, max_size: int = 200) -> tuple[bool, int]:
    ty = infer((), t, ext=ext)[0]
    norm = normalize(t, fuel=fuel, ext=ext, max_size=max_size, keep_trace=True)
    for _, nxt in norm.trace:
        if infer((), nxt, ext=ext)[0] != ty:
            return False, norm.steps
    return True, norm.steps


OMEGA = "mu $f:iota. $f"


def incompleteness_witness(B: Backend, obs: ObsSpec = ObsSpec(), fuel: int = 1000) -> LawReport:
    """``(\\x:iota. x) Omega`` and ``Omega`` are denotationally equal but not convertible.

    The beta rule for ground arguments only fires on numerals, and the only
    redex of either term is the fixpoint inside Omega, which unfolds to itself.
    """
    w1 = parse_term(f"(\\x:iota. x) ({OMEGA})")
    w2 = parse_term(OMEGA)
    f1 = interpret(infer((), w1)[1], B)
    f2 = interpret(infer((), w2)[1], B)
    r = semantic_eq(f1, f2, B, obs)
    g1, complete1 = reduction_graph(w1, fuel)
    g2, complete2 = reduction_graph(w2, fuel)
    common = set(g1) & set(g2)
    exhaustive = complete1 and complete2
    no_join = exhaustive and not common
    if r.verdict is Verdict.EQUAL and no_join:
        verdict = PASS
    elif r.verdict is Verdict.DISTINCT or common:
        verdict = FAIL
    else:
        verdict = INCONCLUSIVE
    # informational: with x unused the two sides differ in the strict model,
    # because the ground weakening map is strict
    w3, w4 = parse_term(f"(\\x:iota. 0) ({OMEGA})"), parse_term("0")
    weak = semantic_eq(interpret(infer((), w3)[1], B), interpret(infer((), w4)[1], B), B, obs)
    details = {
        "semantic": r.verdict.value,
        "graph_nodes_left": len(g1),
        "graph_nodes_right": len(g2),
        "exhaustive": exhaustive,
        "common_reducts": len(common),
        "weakened_case": weak.verdict.value,
        "message": "denotationally equal, not provably convertible within fuel"
        if verdict == PASS else "witness not confirmed",
    }
    return LawReport("incompleteness witness", B.name, 1, verdict,
                     None if verdict == PASS else r.witness, details)
