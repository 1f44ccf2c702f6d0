import pytest
from hypothesis import given, strategies as st

from sllambda.model.core import NAT, UNIT, Excl, Lolli, ObsSpec, Prod, Tensor
from sllambda.model.strict import (
    BOTTOM,
    TOP,
    Fun,
    IllShapedElement,
    NatV,
    Pair,
    ProdPair,
    StrictBackend,
    Up,
    apply,
    kleene_fix,
    sample_elems,
    smash,
)

B = StrictBackend()


def P(a, b):
    return ProdPair(lambda: a, lambda: b)


def test_pred_numeral():
    assert B.pred_m()(NatV(4)) == NatV(3)


def test_pred_zero_convention():
    assert B.pred_m()(NatV(0)) == NatV(0)


def test_lif_picks_first_on_zero():
    lif = B.lif_m()
    assert lif(Pair(NatV(0), P(NatV(7), NatV(9)))) == NatV(7)
    assert lif(Pair(NatV(2), P(NatV(7), NatV(9)))) == NatV(9)


def test_lif_is_lazy_in_the_other_branch():
    def boom():
        raise AssertionError("untaken branch forced")

    assert B.lif_m()(Pair(NatV(0), ProdPair(lambda: NatV(1), boom))) == NatV(1)


def test_lif_bottom_condition():
    assert B.lif_m()(BOTTOM) is BOTTOM


def test_counit():
    e = B.e(NAT)
    assert e(Up(NatV(5))) is TOP
    assert e(BOTTOM) is BOTTOM


def test_structure_maps():
    assert B.p()(NatV(2)) == Up(NatV(2))
    assert B.c_N()(NatV(2)) == Pair(NatV(2), NatV(2))
    assert B.w_N()(NatV(2)) is TOP
    assert B.d(NAT)(Up(NatV(1))) == Pair(Up(NatV(1)), Up(NatV(1)))
    assert B.delta(NAT)(Up(NatV(1))) == Up(Up(NatV(1)))
    assert B.eps(NAT)(Up(NatV(1))) == NatV(1)
    assert B.q1()(TOP) == Up(TOP)


def test_q_collapses_inner_bottom():
    q = B.q(NAT, NAT)
    assert q(Pair(Up(NatV(1)), Up(NatV(2)))) == Up(Pair(NatV(1), NatV(2)))
    assert q(Pair(Up(BOTTOM), Up(NatV(2)))) == Up(BOTTOM)


def test_lifting_separates_bottoms():
    assert Up(BOTTOM) != BOTTOM


def test_smash_never_holds_bottom():
    assert smash(BOTTOM, NatV(1)) is BOTTOM
    assert smash(NatV(1), BOTTOM) is BOTTOM
    assert smash(TOP, NatV(1)) == Pair(TOP, NatV(1))


def test_ill_shaped():
    with pytest.raises(IllShapedElement):
        B.succ_m()(TOP)
    with pytest.raises(IllShapedElement):
        apply(NatV(1), NatV(2))


def test_kleene_fix():
    assert kleene_fix(Fun(lambda u: NatV(3)), 1) == NatV(3)
    ident = Fun(lambda u: u.val)
    for k in range(5):
        assert kleene_fix(ident, k) is BOTTOM


def test_add_functional():
    # F(a) = \x.\y. if x = 0 then y else succ (a (x-1) y)
    def step(up):
        a = up.val

        def on_x(x):
            def on_y(y):
                if x.n == 0:
                    return y
                r = apply(apply(a, NatV(x.n - 1)), y)
                return BOTTOM if r is BOTTOM else NatV(r.n + 1)
            return Fun(on_y)
        return Fun(on_x)

    add = kleene_fix(Fun(step), 4)
    assert apply(apply(add, NatV(2)), NatV(3)) == NatV(5)
    assert apply(apply(kleene_fix(Fun(step), 2), NatV(2)), NatV(3)) is BOTTOM


def test_sample_elems():
    assert sample_elems(B, NAT, ObsSpec(s=2)) == [BOTTOM, NatV(0), NatV(1), NatV(2)]
    assert sample_elems(B, UNIT, ObsSpec()) == [BOTTOM, TOP]
    funs = sample_elems(B, Lolli(NAT, NAT), ObsSpec())
    assert any(isinstance(f, Fun) and f(NatV(1)) == NatV(2) for f in funs)
    assert funs[0] is BOTTOM


OBJECTS = [NAT, UNIT, Tensor(NAT, NAT), Excl(NAT), Lolli(NAT, NAT), Excl(Lolli(NAT, NAT))]


def _maps(a):
    out = [B.identity(a), B.sym(a, NAT), B.d(a), B.e(a), B.delta(a), B.eps(a), B.bang_mor(B.identity(a))]
    if a == NAT:
        out += [B.succ_m(), B.pred_m(), B.p(), B.c_N(), B.w_N()]
    return out


@pytest.mark.parametrize("a", OBJECTS, ids=str)
def test_capabilities_are_strict(a):
    for f in _maps(a):
        assert f(BOTTOM) is BOTTOM, f.label


def test_sampled_functions_are_strict():
    for f in sample_elems(B, Lolli(NAT, NAT), ObsSpec()):
        assert apply(f, BOTTOM) is BOTTOM


@given(st.integers(0, 40))
def test_eps_p_identity(n):
    assert B.eps(NAT)(B.p()(NatV(n))) == NatV(n)


@given(st.integers(0, 40))
def test_pred_after_succ(n):
    assert B.compose(B.pred_m(), B.num(n + 1))(TOP) == NatV(n)


def test_products_sampled():
    xs = sample_elems(B, Prod(NAT, NAT), ObsSpec(s=1))
    assert len(xs) == 9
