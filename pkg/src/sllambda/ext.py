"""Extension with promote!/discard/copy/derelict at ground type.

The constructors live in ``syntax``; typing, rewriting and interpretation are
the ``ext=True`` modes of the core modules.  This module gives them their own
entry points and adds the extension soundness suite.
"""
from __future__ import annotations

from .generate import corpus
from .model.core import Backend, ObsSpec, interpret
from .reduce import (
    CORE_TAGS,
    InvalidSite,
    RedexSite,
    RuleTag,
    find_redexes,
    normalize,
    root_tag,
    step_at,
    subterm,
)
from .syntax import Term
from .typecheck import infer
from .verify import FAIL, INCONCLUSIVE, PASS, LawReport, soundness_check

ExtRuleTag = RuleTag
EXT_TAGS = frozenset(t for t in RuleTag if t not in CORE_TAGS)


def infer_ext(basis, t: Term):
    return infer(basis, t, ext=True)


def ext_redexes(t: Term) -> list[RedexSite]:
    """Redex sites of the extension rewrites only."""
    return [s for s in find_redexes(t, ext=True) if s.tag in EXT_TAGS]


def step_ext(t: Term, site: RedexSite | tuple[int, ...]) -> Term:
    """Fire the extension rewrite at ``site`` (a ``RedexSite`` or a bare path)."""
    if not isinstance(site, RedexSite):
        try:
            tag = root_tag(subterm(t, tuple(site)), ext=True)
        except (IndexError, TypeError) as exc:
            raise InvalidSite(f"no subterm at {site}") from exc
        if tag is None:
            raise InvalidSite(f"no redex at {site}")
        site = RedexSite(tuple(site), tag)
    if site.tag not in EXT_TAGS:
        raise InvalidSite(f"{site.tag.value} is not an extension rewrite")
    return step_at(t, site, ext=True)


def denote_ext(d, B: Backend):
    return interpret(d, B)


def ext_soundness_suite(B: Backend, n: int = 100, seed: int = 0, obs: ObsSpec = ObsSpec(),
                        fuel: int = 200, max_size: int = 25) -> LawReport:
    """Soundness of every reduction step over ``n`` generated extended terms."""
    totals = {"equal": 0, "distinct": 0, "inconclusive": 0, "type_changes": 0, "ext_steps": 0}
    cex = None
    for item in corpus(n, max_size=max_size, seed=seed, ext=True):
        r = soundness_check(item.term, B, fuel=fuel, obs=obs, ext=True)
        for k in ("equal", "distinct", "inconclusive", "type_changes"):
            totals[k] += r.details[k]
        if r.verdict == FAIL and cex is None:
            cex = (item.index, r.counterexample)
    # how many of the steps were extension rewrites
    for item in corpus(n, max_size=max_size, seed=seed, ext=True):
        norm = normalize(item.term, fuel=fuel, ext=True, keep_trace=True)
        totals["ext_steps"] += sum(s.tag in EXT_TAGS for s, _ in norm.trace)
    if totals["distinct"] or totals["type_changes"]:
        verdict = FAIL
    elif totals["inconclusive"]:
        verdict = INCONCLUSIVE
    else:
        verdict = PASS
    return LawReport("extension soundness", B.name, n, verdict, cex, totals)
