import pytest
from hypothesis import given, settings, strategies as st

from sllambda.generate import corpus
from sllambda.parser import parse_term, pretty
from sllambda.syntax import (
    IOTA,
    App,
    Arrow,
    Entry,
    Succ,
    VarKind,
    Zero,
    alpha_eq,
    check_basis,
    free_vars,
    numeral,
    numeral_of,
    rename_free,
    subst_ground,
    subst_higher,
    subst_stable,
)

F = Entry("f", VarKind.HIGHER, Arrow(IOTA, IOTA))
X = Entry("x", VarKind.GROUND, IOTA)


def T(src, basis=()):
    return parse_term(src, basis)


def test_free_vars_closed_mu():
    fv = free_vars(T("mu $f:iota. $f"))
    assert not fv.names


def test_free_vars_partitioned():
    fv = free_vars(T("f x", (F, X)))
    assert (fv.ground, fv.higher, fv.stable) == ({"x"}, {"f"}, frozenset())


def test_free_vars_under_lambda():
    fv = free_vars(T("\\x:iota. f x", (F,)))
    assert (fv.ground, fv.higher, fv.stable) == (frozenset(), {"f"}, frozenset())


@pytest.mark.parametrize("a,b,expected", [
    ("\\x:iota. x", "\\y:iota. y", True),
    ("\\x:iota. x", "\\x:iota. succ x", False),
    ("mu $f:iota. $f", "mu $g:iota. $g", True),
    ("\\f:iota -o iota. \\x:iota. f x", "\\g:iota -o iota. \\y:iota. g y", True),
    ("\\x:iota. \\y:iota. x", "\\x:iota. \\y:iota. y", False),
])
def test_alpha_eq(a, b, expected):
    assert alpha_eq(T(a), T(b)) is expected


def test_numeral_shapes():
    assert numeral(0) == Zero()
    assert numeral(2) == App(Succ(), App(Succ(), Zero()))
    assert pretty(numeral(2)) == "2"


def test_numeral_round_trip():
    for k in range(101):
        assert numeral_of(numeral(k)) == k


@pytest.mark.parametrize("src,expected", [
    ("succ (succ 0)", 2), ("pred (succ 0)", None), ("\\x:iota. x", None), ("0", 0),
])
def test_numeral_of(src, expected):
    assert numeral_of(T(src)) == expected


def test_negative_numeral_rejected():
    with pytest.raises(ValueError):
        numeral(-1)


def test_subst_ground():
    assert alpha_eq(subst_ground(T("succ x", (X,)), 2, "x"), T("succ (succ (succ 0))"))
    lam = T("\\x:iota. x")
    assert alpha_eq(subst_ground(lam, 2, "x"), lam)
    assert alpha_eq(subst_ground(T("lif x then x else 0", (X,)), 0, "x"), T("lif 0 then 0 else 0"))


def test_subst_higher():
    assert alpha_eq(subst_higher(T("f 0", (F,)), T("succ"), "f"), T("succ 0"))
    m = T("\\g:iota -o iota. g 0")
    assert alpha_eq(subst_higher(m, T("succ"), "f"), m)


def test_subst_higher_avoids_capture():
    # the free x of the argument must not be captured by the binder x
    m = T("\\x:iota. f x", (F,))
    n = T("\\y:iota. x", (X,))
    r = subst_higher(m, n, "f")
    assert "x" in free_vars(r).ground
    assert alpha_eq(r, T("\\z:iota. (\\y:iota. x) z", (X,)))


def test_subst_stable():
    omega = T("mu $f:iota. $f")
    assert alpha_eq(subst_stable(T("$f"), omega, "$f"), omega)
    assert alpha_eq(subst_stable(T("lif $f then $f else 0"), T("0"), "$f"),
                    T("lif 0 then 0 else 0"))
    m = T("succ 0")
    assert subst_stable(m, omega, "$f") == m


def test_basis_invariants():
    with pytest.raises(ValueError):
        check_basis([X, X])
    with pytest.raises(ValueError):
        check_basis([Entry("x", VarKind.GROUND, Arrow(IOTA, IOTA))])


CORPUS = [it.term for it in corpus(60, seed=11)]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(CORPUS))
def test_alpha_eq_reflexive_and_renaming(t):
    assert alpha_eq(t, t)
    u = parse_term(pretty(t))
    assert alpha_eq(t, u) and alpha_eq(u, t)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CORPUS), st.sampled_from(CORPUS), st.sampled_from(CORPUS))
def test_alpha_eq_transitive(a, b, c):
    if alpha_eq(a, b) and alpha_eq(b, c):
        assert alpha_eq(a, c)


@given(st.integers(0, 300))
def test_numeral_of_numeral(k):
    assert numeral_of(numeral(k)) == k


@given(st.integers(0, 20))
def test_numeral_of_rejects_pred_head(k):
    assert numeral_of(App(T("pred"), numeral(k))) is None


def test_free_vars_after_higher_subst():
    m = T("\\x:iota. f (g x)", (F, Entry("g", VarKind.HIGHER, Arrow(IOTA, IOTA))))
    n = T("\\y:iota. h (succ y)", (Entry("h", VarKind.HIGHER, Arrow(IOTA, IOTA)),))
    fm, fn = free_vars(m), free_vars(n)
    got = free_vars(subst_higher(m, n, "f"))
    assert got.higher == (fm.higher - {"f"}) | fn.higher


def test_rename_free_respects_binders():
    m = T("\\x:iota. succ x")
    assert alpha_eq(rename_free(m, "x", "y"), m)
