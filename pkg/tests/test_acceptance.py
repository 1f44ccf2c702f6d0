"""Acceptance gate.  Each test records one PASS/FAIL line, shown in the summary."""
import time

import pytest

from conftest import ACCEPTANCE, T
from mutants import MUTANTS
from sllambda.ext import EXT_TAGS, ext_redexes, ext_soundness_suite, step_ext
from sllambda.generate import corpus
from sllambda.model.coh import EMPTY, STAR, CohBackend, Fin, is_clique, trace_probe
from sllambda.model.core import NAT, Num, ObsSpec, denote, denote_ground
from sllambda.model.strict import StrictBackend
from sllambda.parser import pretty
from sllambda.reduce import RuleTag, find_redexes, join_probe, normalize
from sllambda.syntax import IOTA, Arrow, alpha_eq, numeral, numeral_of
from sllambda.typecheck import infer
from sllambda.verify import FAIL, PASS, incompleteness_witness, law_suite, soundness_check, substitution_suite

BACKENDS = (StrictBackend(), CohBackend())
OBS = ObsSpec(s=8, b=3, k=16)
ADD = "mu $a:iota -o iota -o iota.\\x:iota.\\y:iota. lif x then y else succ ($a (pred x) y)"


def gate(n, ok, detail):
    ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(ACCEPTANCE[n])
    assert ok, detail


@pytest.fixture(scope="module")
def soundness_corpus():
    return corpus(500, max_size=25, seed=0)


def test_1_delta_numeral_agreement():
    t0 = time.perf_counter()
    bad = []
    for k in range(65):
        t = T(f"pred (succ {k})")
        norm = normalize(t, fuel=1)
        if norm.steps != 1 or not alpha_eq(norm.term, numeral(k)):
            bad.append(("reduce", k))
        for B in BACKENDS:
            if denote_ground(t, B, OBS) != Num(k):
                bad.append((B.name, k))
    dt = time.perf_counter() - t0
    gate(1, not bad and dt < 1.0, f"k in 0..64, {dt:.2f}s, mismatches {bad[:3]}")


def test_2_soundness(soundness_corpus):
    parts, ok = [], True
    for B in BACKENDS:
        t0 = time.perf_counter()
        tot = {"equal": 0, "distinct": 0, "inconclusive": 0}
        for item in soundness_corpus:
            r = soundness_check(item.term, B, fuel=200, obs=OBS)
            for key in tot:
                tot[key] += r.details[key]
        dt = time.perf_counter() - t0
        steps = sum(tot.values())
        rate = tot["inconclusive"] / steps if steps else 0.0
        ok &= tot["distinct"] == 0 and rate < 0.05 and dt < 600
        parts.append(f"{B.name}: {steps} steps, {tot['distinct']} distinct, "
                     f"{rate:.1%} inconclusive, {dt:.0f}s")
    gate(2, ok, "500 terms; " + "; ".join(parts))


def test_3_substitution():
    parts, ok = [], True
    for B in BACKENDS:
        for case in ("ground", "higher", "stable"):
            r = substitution_suite(case, B, count=100, obs=OBS)
            ok &= r.details["equal"] >= 100 and r.verdict == PASS
            parts.append(f"{B.name}/{case} {r.details['equal']}/{r.tried}")
    gate(3, ok, ", ".join(parts))


def test_4_laws_and_mutants():
    parts, ok = [], True
    for B in BACKENDS:
        reports = law_suite(B, OBS)
        tried = {r.name.split(" [")[0]: r.tried for r in reports}
        enough = tried["fix = eval.(eps (x) !fix.delta).d"] >= 10 and all(
            t >= 10 for name, t in tried.items() if name.startswith("lif."))
        passed = sum(r.passed for r in reports)
        ok &= passed == len(reports) and enough
        parts.append(f"{B.name} {passed}/{len(reports)}")
    for M in MUTANTS:
        fails = [r for r in law_suite(M(), OBS) if r.verdict == FAIL]
        caught = bool(fails) and all(r.counterexample is not None for r in fails)
        ok &= caught
        parts.append(f"{M.name} fails {len(fails)}" + (f" ({fails[0].name})" if fails else ""))
    gate(4, ok, "; ".join(parts))


def test_5_subject_reduction_and_confluence(soundness_corpus):
    preserved = 0
    for item in soundness_corpus:
        norm = normalize(item.term, fuel=200, max_size=200, keep_trace=True)
        preserved += all(infer((), t)[0] == item.type for _, t in norm.trace)
    multi = [it.term for it in corpus(2000, max_size=25, seed=1)
             if len(find_redexes(it.term)) >= 2][:200]
    reports = [join_probe(t, fuel=200, seed=i) for i, t in enumerate(multi)]
    joined = sum(r.joined for r in reports)
    disproved = sum(not r.joined and not r.exhausted for r in reports)
    ok = (preserved == len(soundness_corpus) and len(multi) == 200
          and joined >= 0.95 * len(multi))
    gate(5, ok, f"types preserved {preserved}/{len(soundness_corpus)}; joined {joined}/{len(multi)}, "
                f"search finished without join {disproved}")


def test_6_incompleteness_witness():
    parts, ok = [], True
    for B in BACKENDS:
        r = incompleteness_witness(B, OBS, fuel=1000)
        d = r.details
        ok &= (r.verdict == PASS and d["semantic"] == "equal" and d["exhaustive"]
               and d["common_reducts"] == 0)
        parts.append(f"{B.name} {d['semantic']}, nodes {d['graph_nodes_left']}/"
                     f"{d['graph_nodes_right']}, common {d['common_reducts']}")
    gate(6, ok, "; ".join(parts))


def test_7_coh_spot_checks():
    B = CohBackend()
    E = frozenset()
    p_ok = trace_probe(B.p(), 5) == ({(n, frozenset({n})) for n in range(6)}
                                     | {(n, E) for n in range(6)})
    zero_ok = B.zero()(Fin({STAR})).explicit() == {0}
    # every closed term, applied to ground arguments, denotes at most one numeral
    args = {IOTA: ("",), Arrow(IOTA, IOTA): (" 0", " 3"),
            Arrow(IOTA, Arrow(IOTA, IOTA)): (" 1 2", " 0 4"), Arrow(Arrow(IOTA, IOTA), IOTA): (" succ",)}
    two = []
    for item in corpus(200, max_size=25, seed=2):
        for arg in args[item.type]:
            out = denote((), T(f"({pretty(item.term)}){arg}"), B).run(B.point(), OBS.k).explicit()
            if out is None or len(out) > 1:
                two.append(item.index)
    web_ok = not any(is_clique(NAT, (m, n)) for m in range(6) for n in range(6) if m != n)
    ok = p_ok and zero_ok and not two and web_ok and B.zero()(EMPTY).explicit() == frozenset()
    gate(7, ok, f"tr(p) exact {p_ok}; zero{{*}} = {{0}} {zero_ok}; "
                f"2-token N cliques {len(two)}; N web discrete {web_ok}")


def test_8_fixpoint_addition():
    t0 = time.perf_counter()
    bad = []
    for m in range(6):
        for n in range(6):
            t = T(f"({ADD}) {m} {n}")
            if numeral_of(normalize(t, fuel=1000).term) != m + n:
                bad.append(("normalize", m, n))
            for B in BACKENDS:
                if denote_ground(t, B, ObsSpec(k=16)) != Num(m + n):
                    bad.append((B.name, m, n))
    dt = time.perf_counter() - t0
    gate(8, not bad and dt < 10.0, f"m,n <= 5, {dt:.2f}s, mismatches {bad[:3]}")


EXT_EXAMPLES = [
    ("discard (succ 2) in 7", RuleTag.DISCARD_SUCC, "discard 2 in 7"),
    ("copy 0 as x,y in lif x then y else 1", RuleTag.COPY_ZERO, "lif 0 then 0 else 1"),
    ("derelict (promote!(3))", RuleTag.DERELICT_PROMOTE, "3"),
]
EXT_COVER = [
    "discard 0 in 1",
    "copy succ 2 as x,y in lif x then y else 1",
    "discard promote!(2) in 5",
    "copy promote!(2) as x,y in discard y in derelict x",
    "promote (promote! 3) as z in promote! (derelict z)",
]


def test_9_extension():
    examples_ok = True
    fired = set()
    for src, tag, out in EXT_EXAMPLES:
        t = T(src)
        (site,) = ext_redexes(t)
        examples_ok &= site.tag is tag and alpha_eq(step_ext(t, site), T(out))
        fired.add(site.tag)
    for src in EXT_COVER:
        fired |= {s.tag for s in ext_redexes(T(src))}
    parts, ok = [], examples_ok and fired == EXT_TAGS
    for B in BACKENDS:
        r = ext_soundness_suite(B, n=100, obs=OBS)
        ok &= r.details["distinct"] == 0 and r.details["type_changes"] == 0
        parts.append(f"{B.name} {r.details['equal']} equal, {r.details['distinct']} distinct, "
                     f"{r.details['ext_steps']} ext steps")
    gate(9, ok, f"examples {examples_ok}; rules fired {len(fired)}/{len(EXT_TAGS)}; "
                + "; ".join(parts))
