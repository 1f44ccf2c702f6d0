import itertools

import pytest
from hypothesis import given, settings, strategies as st

from sllambda.generate import corpus
from sllambda.model.coh import (
    EMPTY,
    STAR,
    CohBackend,
    Fin,
    FunC,
    IncoherentClique,
    apply,
    check_clique,
    coherent,
    ground,
    is_clique,
    iter_fix,
    restrict,
    show_token,
    trace_probe,
    web_tokens,
    within,
)
from sllambda.model.core import NAT, UNIT, Excl, Lolli, Prod, Tensor, Verdict, denote, semantic_eq
from sllambda.parser import parse_term
from sllambda.syntax import IOTA, make_entry

B = CohBackend()
E = frozenset()


def test_p_on_numeral():
    assert restrict(B.p()(Fin({3})), Excl(NAT), 3) == {frozenset({3}), E}


def test_c_N_and_w_N():
    assert B.c_N()(Fin({2})).explicit() == {(2, 2)}
    assert trace_probe(B.w_N(), 2) == {(0, STAR), (1, STAR), (2, STAR)}


def test_zero_is_strict():
    assert B.zero()(Fin({STAR})).explicit() == {0}
    assert B.zero()(EMPTY).explicit() == frozenset()


def test_succ_trace():
    assert trace_probe(B.succ_m(), 2) == {(0, 1), (1, 2), (2, 3)}


def test_omega_trace_is_empty():
    f = denote((), parse_term("mu $f:iota. $f"), B)
    assert trace_probe(f, 3) == set()


def test_p_trace_exact():
    expect = {(n, frozenset({n})) for n in range(6)} | {(n, E) for n in range(6)}
    assert trace_probe(B.p(), 5) == expect


@pytest.mark.parametrize("lhs, rhs", [
    ("mu $F:iota. (\\x:iota. y) $G", "(\\x:iota. y) $G"),
    ("mu $F:iota. lif $G then y else $F", "lif $G then y else (mu $H:iota. $H)"),
])
def test_fix_on_token_inputs(lhs, rhs):
    # a stable variable in the context feeds fix a non-promoted clique
    bs = (make_entry("y", IOTA), make_entry("$G", IOTA))
    f, g = (denote(bs, parse_term(src, bs), B) for src in (lhs, rhs))
    r = semantic_eq(f, g, B)
    assert r.verdict is Verdict.EQUAL and r.skipped == 0


def test_iter_fix():
    const = FunC(lambda x: Fin({3}))
    assert iter_fix(const, 1).explicit() == {3}
    # the dereliction functional: x |-> eps(x)
    ident = FunC(lambda bx: B.eps(NAT)(bx))
    for k in range(4):
        assert iter_fix(ident, k).explicit() == frozenset()


def test_fix_add_at_k4():
    add = parse_term("mu $a:iota -o iota -o iota.\\x:iota.\\y:iota. "
                     "lif x then y else succ ($a (pred x) y)")
    f = denote((), add, B)
    g = f(Fin({STAR}), 4)
    assert apply(apply(g, Fin({2})), Fin({3})).explicit() == {5}


def test_nat_is_flat():
    with pytest.raises(IncoherentClique):
        ground(Fin({1, 2}))
    assert not is_clique(NAT, [1, 2])


def test_lolli_coherence():
    A = Lolli(NAT, NAT)
    assert coherent(A, (0, 1), (1, 1))  # incoherent inputs: anything goes
    assert not coherent(A, (0, 1), (0, 2))
    assert coherent(A, (0, 1), (0, 1))


def test_check_clique():
    check_clique(Excl(NAT), Fin({E, frozenset({1})}), 2)
    with pytest.raises(IncoherentClique):
        check_clique(Excl(NAT), Fin({frozenset({1}), frozenset({2})}), 2)


def test_web_order_is_deterministic():
    toks = web_tokens(Excl(NAT), 2)
    assert toks[0] == E and toks[1:4] == (frozenset({0}), frozenset({1}), frozenset({2}))
    assert web_tokens(Excl(NAT), 2) == toks


def test_show_token():
    assert show_token(frozenset({1})) == "{1}"
    assert show_token((0, STAR)) == "(0,*)"


OBJECTS = [NAT, UNIT, Tensor(NAT, NAT), Lolli(NAT, NAT), Excl(NAT), Prod(NAT, NAT)]


@pytest.mark.parametrize("a", OBJECTS, ids=str)
def test_coherence_reflexive_symmetric(a):
    toks = web_tokens(a, 2)
    for s in toks:
        assert coherent(a, s, s)
    for s, t in itertools.combinations(toks, 2):
        assert coherent(a, s, t) == coherent(a, t, s)


def _maps():
    return [B.succ_m(), B.pred_m(), B.p(), B.c_N(), B.w_N(), B.sym(NAT, NAT), B.d(NAT), B.e(NAT),
            B.delta(NAT), B.eps(NAT)]


def _small_cliques(a, budget=2):
    toks = web_tokens(a, budget)
    return [frozenset(c) for n in range(3) for c in itertools.combinations(toks, n)
            if is_clique(a, c)]


@pytest.mark.parametrize("i", range(10))
def test_linearity_on_samples(i):
    f = _maps()[i]
    assert restrict(f(EMPTY), f.cod, 3) == frozenset()
    cl = _small_cliques(f.dom)
    for x, y in itertools.combinations(cl, 2):
        if not is_clique(f.dom, x | y):
            continue
        both = restrict(f(Fin(x | y)), f.cod, 3)
        assert both == restrict(f(Fin(x)), f.cod, 3) | restrict(f(Fin(y)), f.cod, 3)


@pytest.mark.parametrize("i", range(10))
def test_outputs_are_cliques(i):
    f = _maps()[i]
    for x in _small_cliques(f.dom):
        check_clique(f.cod, f(Fin(x)), 3)


@pytest.mark.parametrize("i", range(10))
def test_trace_determines_map(i):
    f = _maps()[i]
    tr = trace_probe(f, 2)
    for x in _small_cliques(f.dom):
        direct = {b for b in web_tokens(f.cod, 2) if f(Fin(x)).has(b)}
        assert direct == {b for a, b in tr if a in x and within(f.cod, b, 2)}


GROUND = [it.term for it in corpus(90, seed=17) if str(it.type) == "iota"]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(GROUND))
def test_ground_denotations_are_flat(t):
    x = denote((), t, B)(Fin({STAR}), 16)
    assert len(restrict(x, NAT, 50)) <= 1
