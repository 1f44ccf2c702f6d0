import pytest
from hypothesis import given, settings, strategies as st

from sllambda.generate import corpus
from sllambda.model.core import (
    BOTTOM_RESULT,
    NAT,
    UNIT,
    Excl,
    GroundKind,
    Lolli,
    Num,
    ObjectMismatch,
    ObsSpec,
    Tensor,
    Verdict,
    denote,
    denote_ground,
    interpret,
    interpret_basis,
    interpret_type,
    semantic_eq,
)
from sllambda.parser import parse_term
from sllambda.syntax import IOTA, Arrow, Bang, Entry, Var, VarKind, numeral
from sllambda.typecheck import Derivation, infer, validate_derivation

ADD = "mu $a:iota -o iota -o iota.\\x:iota.\\y:iota. lif x then y else succ ($a (pred x) y)"
OMEGA = "mu $f:iota. $f"


def test_interpret_type():
    assert interpret_type(IOTA) == NAT
    assert interpret_type(Arrow(IOTA, IOTA)) == Lolli(NAT, NAT)
    assert interpret_type(Bang(IOTA)) == Excl(NAT)


def test_interpret_basis():
    assert interpret_basis(()) == UNIT
    assert interpret_basis((Entry("x", VarKind.GROUND, IOTA),)) == Tensor(NAT, UNIT)
    stable = Entry("$f", VarKind.STABLE, Arrow(IOTA, IOTA))
    assert interpret_basis((stable,)) == Tensor(Excl(Lolli(NAT, NAT)), UNIT)


def test_zero_clause(backend):
    f = denote((), parse_term("0"), backend)
    assert semantic_eq(f, backend.zero(), backend).verdict is Verdict.EQUAL


def test_ground_variable_is_identity(backend):
    x = Entry("x", VarKind.GROUND, IOTA)
    f = denote((x,), parse_term("x"), backend)
    assert f.dom == Tensor(NAT, UNIT) and f.cod == NAT
    assert semantic_eq(f, backend.runit(NAT), backend).verdict is Verdict.EQUAL


def test_pred_succ_zero(backend):
    f = denote((), parse_term("pred (succ 0)"), backend)
    assert semantic_eq(f, backend.zero(), backend).verdict is Verdict.EQUAL


def test_distinct_numerals(backend):
    r = semantic_eq(backend.zero(), backend.num(1), backend)
    assert r.verdict is Verdict.DISTINCT and r.witness is not None


def test_object_mismatch(backend):
    with pytest.raises(ObjectMismatch):
        semantic_eq(backend.zero(), backend.succ_m(), backend)
    with pytest.raises(ObjectMismatch):
        backend.compose(backend.zero(), backend.zero())


def test_identity_beta_on_omega(backend):
    a = denote((), parse_term(f"(\\x:iota.x) ({OMEGA})"), backend)
    b = denote((), parse_term(OMEGA), backend)
    assert semantic_eq(a, b, backend).verdict is Verdict.EQUAL


def test_denote_ground_examples(backend):
    assert denote_ground(parse_term("pred (succ 0)"), backend) == Num(0)
    assert denote_ground(parse_term(OMEGA), backend) == BOTTOM_RESULT
    r = denote_ground(parse_term(f"({ADD}) 2 3"), backend, ObsSpec(k=4))
    assert r == Num(5)


def test_denote_ground_flags_unstable(backend):
    # needs more than 2k unfoldings to reach its value
    t = parse_term(f"({ADD}) 6 0")
    r = denote_ground(t, backend, ObsSpec(k=3))
    assert r.kind in (GroundKind.UNSTABLE, GroundKind.BOTTOM)
    assert denote_ground(t, backend, ObsSpec(k=16)) == Num(6)


def test_numeral_coherence(backend):
    for k in range(9):
        assert denote_ground(numeral(k), backend) == Num(k)


def test_obs_bounds():
    with pytest.raises(ValueError):
        ObsSpec(s=0)
    with pytest.raises(ValueError):
        ObsSpec(k=0)


def test_morphism_dump(backend):
    f = denote((), parse_term("succ 0"), backend)
    text = f.dump()
    assert "eval" in text and "zero" in text


CORPUS = corpus(120, seed=13)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(CORPUS))
def test_object_bookkeeping(it):
    from sllambda.model.strict import StrictBackend

    B = StrictBackend()
    _, d = infer((), it.term)
    f = interpret(d, B)
    assert f.dom == interpret_basis(()) and f.cod == interpret_type(it.type)


def _contract_then_weaken(kind, a, ty):
    """``a |- a`` derived by contracting ``a`` and weakening one copy."""
    leaf, weak, con = ("gv", "gw", "gc") if kind is VarKind.GROUND else ("sv", "sw", "sc")
    b, c = a + "1", a + "2"
    E = lambda n: Entry(n, kind, ty)  # noqa: E731
    v = Derivation(leaf, (E(b),), Var(b, kind), ty)
    w = Derivation(weak, (E(b), E(c)), Var(b, kind), ty, (v,))
    return Derivation(con, (E(a),), Var(a, kind), ty, (w,), (b, c)), (E(a),)


@pytest.mark.parametrize("kind,name,ty", [
    (VarKind.GROUND, "x", IOTA),
    (VarKind.STABLE, "$f", Arrow(IOTA, IOTA)),
    (VarKind.STABLE, "$g", IOTA),
])
def test_elaboration_canon_independence(backend, kind, name, ty):
    alt, basis = _contract_then_weaken(kind, name, ty)
    assert validate_derivation(alt) == (True, None)
    canon = infer(basis, Var(name, kind))[1]
    assert canon.rule != alt.rule
    r = semantic_eq(interpret(alt, backend), interpret(canon, backend), backend)
    assert r.verdict is Verdict.EQUAL
