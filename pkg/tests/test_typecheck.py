import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from sllambda.generate import corpus
from sllambda.parser import parse_term
from sllambda.syntax import IOTA, Arrow, Entry, VarKind
from sllambda.typecheck import TypeCheckError, check, infer, validate_derivation

II = Arrow(IOTA, IOTA)
H = Entry("h", VarKind.HIGHER, II)


def code_of(basis, src):
    with pytest.raises(TypeCheckError) as ei:
        infer(basis, parse_term(src, basis))
    return ei.value.code


def test_succ_type():
    assert infer((), parse_term("succ"))[0] == II


def test_linear_reuse():
    assert code_of((), "\\f:iota-o iota.\\x:iota. f (f x)") == "LinearVariableReused"


def test_mu_rejects_linear_context():
    assert code_of((H,), "mu $g:iota. h 0") == "MuBodyHasLinearFreeVars"


def test_ground_sharing_uses_gc():
    ty, d = infer((), parse_term("\\x:iota. lif x then x else succ x"))
    assert ty == II
    assert "gc" in d.rules()


@pytest.mark.parametrize("basis,src,code", [
    ((), "y", "UnboundVariable"),
    ((), "\\f:iota -o iota. 0", "LinearVariableUnused"),
    ((), "0 0", "NotAFunction"),
    ((), "succ succ", "ArgTypeMismatch"),
    ((), "lif succ then 0 else 1", "ConditionNotGround"),
    ((), "lif 0 then succ else succ", "BranchNotGround"),
    ((H,), "lif 0 then h 0 else 1", "BranchLinearityMismatch"),
])
def test_error_variants(basis, src, code):
    assert code_of(basis, src) == code


def test_check():
    check((), parse_term("0"), IOTA)
    with pytest.raises(TypeCheckError) as ei:
        check((), parse_term("0"), II)
    assert ei.value.code == "TypeMismatch"
    basis = (Entry("$f", VarKind.STABLE, IOTA),)
    d = check(basis, parse_term("lif $f then $f else $f", basis), IOTA)
    assert "sc" in d.rules()


def test_additive_branches_share_linear_variable():
    ty, _ = infer((H,), parse_term("lif 0 then h 0 else h 1", (H,)))
    assert ty == IOTA


def test_condition_and_branch_cannot_share():
    assert code_of((H,), "lif h 0 then h 1 else h 2") in ("LinearVariableReused",
                                                         "BranchLinearityMismatch")


def _find(d, rule):
    if d.rule == rule:
        return d
    for p in d.premises:
        r = _find(p, rule)
        if r is not None:
            return r
    return None


def _replace(d, old, new):
    if d is old:
        return new
    return dataclasses.replace(d, premises=tuple(_replace(p, old, new) for p in d.premises))


def test_corrupted_ap_is_rejected():
    basis = (H, Entry("g", VarKind.HIGHER, II))
    _, d = infer(basis, parse_term("h (g 0)", basis))
    ap = _find(d, "ap")
    fun, arg = ap.premises
    # both premises now claim h: the contexts overlap
    bad_arg = dataclasses.replace(arg, basis=fun.basis)
    bad = _replace(d, ap, dataclasses.replace(ap, premises=(fun, bad_arg)))
    assert validate_derivation(bad)[0] is False


def test_corrupted_mu_is_rejected():
    _, d = infer((), parse_term("mu $g:iota. 0"))
    mu = _find(d, "mu")
    bad = dataclasses.replace(mu, basis=(H,) + mu.basis)
    assert validate_derivation(bad)[0] is False


def test_extension_gated():
    t = parse_term("discard 0 in 1")
    with pytest.raises(TypeCheckError) as ei:
        infer((), t)
    assert ei.value.code == "ExtensionDisabled"
    assert infer((), t, ext=True)[0] == IOTA


CORPUS = corpus(1000, seed=21)


def test_kernel_accepts_elaborations():
    for it in CORPUS:
        ok, why = validate_derivation(infer((), it.term)[1])
        assert ok, (str(it.term), why)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(CORPUS))
def test_infer_is_deterministic(it):
    a, b = infer((), it.term), infer((), it.term)
    assert a[0] == b[0] == it.type
    assert a[1].to_record() == b[1].to_record()


def test_extended_elaborations_validate():
    for it in corpus(100, seed=5, ext=True):
        ok, why = validate_derivation(infer((), it.term, ext=True)[1], ext=True)
        assert ok, (str(it.term), why)
