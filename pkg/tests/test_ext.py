import pytest

from conftest import T
from sllambda.ext import (
    EXT_TAGS,
    denote_ext,
    ext_redexes,
    ext_soundness_suite,
    infer_ext,
    step_ext,
)
from sllambda.model.core import Num, ObsSpec, Verdict, denote_ground, semantic_eq
from sllambda.reduce import InvalidSite, RedexSite, RuleTag, normalize
from sllambda.syntax import IOTA, Bang, alpha_eq
from sllambda.typecheck import TypeCheckError, infer
from sllambda.verify import FAIL


@pytest.mark.parametrize("src, ty", [
    ("discard 0 in 1", IOTA),
    ("copy 2 as x,y in lif x then y else 0", IOTA),
    ("promote!(succ 0)", Bang(IOTA)),
])
def test_typing_examples(src, ty):
    got, d = infer_ext((), T(src))
    assert got == ty and d.type == ty


def test_extension_is_gated():
    with pytest.raises(TypeCheckError) as e:
        infer((), T("discard 0 in 1"))
    assert e.value.code == "ExtensionDisabled"


def test_copy_scrutinee_must_be_ground():
    with pytest.raises(TypeCheckError) as e:
        infer_ext((), T("copy succ as x,y in x"))
    assert e.value.code == "TypeMismatch"


def _fire(src):
    t = T(src)
    (site,) = ext_redexes(t)
    return site.tag, step_ext(t, site)


@pytest.mark.parametrize("src, tag, out", [
    ("discard (succ 2) in 7", RuleTag.DISCARD_SUCC, "discard 2 in 7"),
    ("copy 0 as x,y in lif x then y else 1", RuleTag.COPY_ZERO, "lif 0 then 0 else 1"),
    ("derelict (promote!(3))", RuleTag.DERELICT_PROMOTE, "3"),
    ("discard 0 in 1", RuleTag.DISCARD_ZERO, "1"),
    ("copy succ 2 as x,y in lif x then y else 1", RuleTag.COPY_SUCC,
     "copy 2 as x,y in lif succ x then succ y else 1"),
    ("discard promote!(2) in 5", RuleTag.PROMOTE_COMONOID_DISCARD, "discard 2 in 5"),
    ("copy promote!(2) as x,y in discard y in derelict x", RuleTag.PROMOTE_COMONOID_COPY,
     "copy 2 as x,y in discard promote!(y) in derelict (promote!(x))"),
    ("promote (promote! 3) as z in promote! (derelict z)", RuleTag.PROMOTE_PROMOTE,
     "promote promote!(3) as z in z"),
])
def test_step_ext(src, tag, out):
    got_tag, got = _fire(src)
    assert got_tag is tag
    assert alpha_eq(got, T(out))


def test_step_ext_accepts_a_path():
    assert alpha_eq(step_ext(T("succ (discard 0 in 1)"), (1,)), T("succ 1"))


@pytest.mark.parametrize("src, site", [
    ("discard 0 in 1", (1,)),
    ("discard 0 in 1", (5, 5)),
    ("pred (succ 0)", ()),
    ("pred (succ 0)", RedexSite((), RuleTag.DELTA_PRED_SUCC)),
    ("discard 0 in 1", RedexSite((), RuleTag.DISCARD_SUCC)),
])
def test_invalid_site(src, site):
    with pytest.raises(InvalidSite):
        step_ext(T(src), site)


def test_ext_tags():
    assert len(EXT_TAGS) == 8
    assert RuleTag.BETA_HIGHER not in EXT_TAGS


@pytest.mark.parametrize("lhs, rhs", [
    ("discard 0 in 1", "1"),
    ("copy 2 as x,y in discard y in x", "2"),
    ("derelict (promote! 3)", "3"),
])
def test_denote_ext_examples(backend, lhs, rhs):
    f = denote_ext(infer_ext((), T(lhs))[1], backend)
    g = denote_ext(infer_ext((), T(rhs))[1], backend)
    assert semantic_eq(f, g, backend).verdict is Verdict.EQUAL


@pytest.mark.parametrize("src, n", [
    ("copy 3 as x,y in lif x then y else succ y", 4),
    ("discard promote!(succ 4) in 2", 2),
    ("derelict (promote! (pred 3))", 2),
])
def test_ext_ground_agrees_with_normal_form(backend, src, n):
    t = T(src)
    assert alpha_eq(normalize(t, ext=True).term, T(str(n)))
    assert denote_ground(t, backend, ext=True) == Num(n)


def test_ext_soundness_small(backend):
    r = ext_soundness_suite(backend, n=20, obs=ObsSpec(s=4, k=8))
    assert r.verdict is not FAIL
    assert r.details["distinct"] == 0
    assert r.details["ext_steps"] > 0
