"""Small-step reduction: redex sites, contextual steps, normalization, joinability."""
from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass, field

from .syntax import (
    App,
    CopyG,
    Derelict,
    DiscardG,
    LIf,
    Lam,
    Mu,
    Pred,
    PromoteAs,
    PromoteG,
    Succ,
    Term,
    Var,
    Zero,
    canon,
    children,
    numeral,
    numeral_of,
    size,
    subst_ground,
    subst_higher,
    subst_stable,
    substitute,
    binders,
    with_children,
)
from .syntax import IOTA, Arrow


class RuleTag(enum.Enum):
    BETA_HIGHER = "beta"
    BETA_IOTA = "iota"
    Y = "Y"
    DELTA_PRED_SUCC = "delta-pred"
    DELTA_IF_ZERO = "delta-if0"
    DELTA_IF_SUCC = "delta-if+"
    # extension rewrites
    DISCARD_SUCC = "discard-succ"
    DISCARD_ZERO = "discard-zero"
    COPY_SUCC = "copy-succ"
    COPY_ZERO = "copy-zero"
    PROMOTE_COMONOID_DISCARD = "promote-discard"
    PROMOTE_COMONOID_COPY = "promote-copy"
    DERELICT_PROMOTE = "derelict-promote"
    PROMOTE_PROMOTE = "promote-promote"


CORE_TAGS = frozenset(list(RuleTag)[:6])


@dataclass(frozen=True)
class RedexSite:
    path: tuple[int, ...]
    tag: RuleTag


class InvalidSite(Exception):
    pass


def subterm(t: Term, path: tuple[int, ...]) -> Term:
    for i in path:
        t = children(t)[i]
    return t


def replace_at(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    kids = list(children(t))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(t, tuple(kids))


def root_tag(t: Term, ext: bool = False) -> RuleTag | None:
    """Which rule, if any, fires at the root of ``t``."""
    match t:
        case App(Lam(_, ty, _), arg):
            if isinstance(ty, Arrow):
                return RuleTag.BETA_HIGHER
            if ty == IOTA and numeral_of(arg) is not None:
                return RuleTag.BETA_IOTA
            return None
        case Mu():
            return RuleTag.Y
        case App(Pred(), App(Succ(), n)) if numeral_of(n) is not None:
            return RuleTag.DELTA_PRED_SUCC
        case LIf(c, _, _):
            k = numeral_of(c)
            if k is None:
                return None
            return RuleTag.DELTA_IF_ZERO if k == 0 else RuleTag.DELTA_IF_SUCC
    if not ext:
        return None
    match t:
        case DiscardG(App(Succ(), _), _):
            return RuleTag.DISCARD_SUCC
        case DiscardG(Zero(), _):
            return RuleTag.DISCARD_ZERO
        case DiscardG(PromoteG(), _):
            return RuleTag.PROMOTE_COMONOID_DISCARD
        case CopyG(App(Succ(), _), _, _, _):
            return RuleTag.COPY_SUCC
        case CopyG(Zero(), _, _, _):
            return RuleTag.COPY_ZERO
        case CopyG(PromoteG(), _, _, _):
            return RuleTag.PROMOTE_COMONOID_COPY
        case Derelict(PromoteG()):
            return RuleTag.DERELICT_PROMOTE
        case PromoteAs(PromoteG(), z, body) if _has_promoted_derelict(body, z):
            return RuleTag.PROMOTE_PROMOTE
    return None


def _has_promoted_derelict(t: Term, z: str) -> bool:
    if t == PromoteG(Derelict(Var(z))):
        return True
    return any(z not in binders(t, i) and _has_promoted_derelict(c, z)
               for i, c in enumerate(children(t)))


def _collapse_promoted_derelict(t: Term, z: str) -> Term:
    if t == PromoteG(Derelict(Var(z))):
        return Var(z)
    kids = children(t)
    if not kids:
        return t
    return with_children(t, tuple(
        c if z in binders(t, i) else _collapse_promoted_derelict(c, z)
        for i, c in enumerate(kids)))


def find_redexes(t: Term, ext: bool = False) -> list[RedexSite]:
    """All redex sites, leftmost-outermost first (pre-order)."""
    out = []
    stack = [((), t)]
    while stack:
        path, s = stack.pop()
        tag = root_tag(s, ext)
        if tag is not None:
            out.append(RedexSite(path, tag))
        kids = children(s)
        for i in reversed(range(len(kids))):
            stack.append((path + (i,), kids[i]))
    return out


def under_binder(t: Term, path: tuple[int, ...]) -> bool:
    for i in path:
        if binders(t, i):
            return True
        t = children(t)[i]
    return False


def leftmost(t: Term, sites: list[RedexSite]) -> RedexSite:
    """Leftmost-outermost site, preferring sites outside any binder.

    Without the preference a recursive call under a lambda would be unfolded
    forever before the argument that selects the base case is ever evaluated.
    """
    for s in sites:
        if not under_binder(t, s.path):
            return s
    return sites[0]


def contract(t: Term, tag: RuleTag) -> Term:
    """Fire ``tag`` at the root of ``t`` (which must match its left-hand side)."""
    match tag, t:
        case RuleTag.BETA_HIGHER, App(Lam(f, _, body), arg):
            return subst_higher(body, arg, f)
        case RuleTag.BETA_IOTA, App(Lam(x, _, body), arg):
            return subst_ground(body, numeral_of(arg), x)
        case RuleTag.Y, Mu(x, _, body):
            return subst_stable(body, t, x)
        case RuleTag.DELTA_PRED_SUCC, App(_, App(_, n)):
            return n
        case RuleTag.DELTA_IF_ZERO, LIf(_, l, _):
            return l
        case RuleTag.DELTA_IF_SUCC, LIf(_, _, r):
            return r
        case RuleTag.DISCARD_SUCC, DiscardG(App(_, m), n):
            return DiscardG(m, n)
        case RuleTag.DISCARD_ZERO, DiscardG(_, n):
            return n
        case RuleTag.PROMOTE_COMONOID_DISCARD, DiscardG(PromoteG(m), n):
            return DiscardG(m, n)
        case RuleTag.COPY_SUCC, CopyG(App(_, m), x, y, n):
            body = substitute(n, {x: App(Succ(), Var(x)), y: App(Succ(), Var(y))})
            return CopyG(m, x, y, body)
        case RuleTag.COPY_ZERO, CopyG(_, x, y, n):
            return substitute(n, {x: numeral(0), y: numeral(0)})
        case RuleTag.PROMOTE_COMONOID_COPY, CopyG(PromoteG(m), x, y, n):
            body = substitute(n, {x: PromoteG(Var(x)), y: PromoteG(Var(y))})
            return CopyG(m, x, y, body)
        case RuleTag.DERELICT_PROMOTE, Derelict(PromoteG(m)):
            return m
        case RuleTag.PROMOTE_PROMOTE, PromoteAs(m, z, body):
            return PromoteAs(m, z, _collapse_promoted_derelict(body, z))
    raise InvalidSite(f"{tag.value} does not match {t}")


def step_at(t: Term, site: RedexSite, ext: bool = False) -> Term:
    try:
        s = subterm(t, site.path)
    except IndexError:
        raise InvalidSite(f"no subterm at {site.path}") from None
    if root_tag(s, ext or site.tag not in CORE_TAGS) is not site.tag:
        raise InvalidSite(f"{site.tag.value} does not fire at {site.path}")
    return replace_at(t, site.path, contract(s, site.tag))


@dataclass
class Normalization:
    term: Term
    steps: int
    exhausted: bool
    trace: list = field(default_factory=list)  # (site, resulting term)


def normalize(t: Term, strategy: str = "leftmost", fuel: int = 1000, seed: int = 0,
              ext: bool = False, max_size: int | None = None, keep_trace: bool = False) -> Normalization:
    """Reduce until no redex is left or ``fuel`` steps were taken.

    ``strategy`` is ``"leftmost"`` or ``"random"`` (driven by ``seed``).
    ``max_size`` stops early, as exhausted, once the term grows past it.
    """
    rng = random.Random(seed)
    trace = []
    steps = 0
    while True:
        sites = find_redexes(t, ext)
        if not sites:
            return Normalization(t, steps, False, trace)
        if steps >= fuel or (max_size is not None and size(t) > max_size):
            return Normalization(t, steps, True, trace)
        site = leftmost(t, sites) if strategy == "leftmost" else rng.choice(sites)
        t = step_at(t, site, ext)
        steps += 1
        if keep_trace:
            trace.append((site, t))


def format_trace(norm: Normalization) -> list[str]:
    lines = []
    for site, t in norm.trace:
        path = ".".join(map(str, site.path)) or "ε"
        lines.append(f"{path}  {site.tag.value}  {t}")
    return lines


# ---------------------------------------------------------------------------
# Joinability


@dataclass
class JoinReport:
    joined: bool
    witness: Term | None
    exhausted: bool
    left: Term | None = None
    right: Term | None = None
    explored: int = 0


def one_step_reducts(t: Term, ext: bool = False) -> list[Term]:
    return [step_at(t, s, ext) for s in find_redexes(t, ext)]


def join_probe(t: Term, fuel: int = 200, seed: int = 0, ext: bool = False,
               max_size: int = 400) -> JoinReport:
    """Search for a common reduct of two distinct one-step reducts of ``t``.

    First tries leftmost normalization of both sides; failing that, runs a
    breadth-first search from both sides, expanding at most ``fuel`` terms.
    """
    sites = find_redexes(t, ext)
    if len(sites) < 2:
        raise ValueError("join_probe needs a term with at least two redexes")
    rng = random.Random(seed)
    i, j = sorted(rng.sample(range(len(sites)), 2))
    a, b = step_at(t, sites[i], ext), step_at(t, sites[j], ext)
    if canon(a) == canon(b):
        return JoinReport(True, a, False, a, b)
    na = normalize(a, fuel=fuel, ext=ext, max_size=max_size)
    nb = normalize(b, fuel=fuel, ext=ext, max_size=max_size)
    if not na.exhausted and not nb.exhausted and canon(na.term) == canon(nb.term):
        return JoinReport(True, na.term, False, a, b)
    # bidirectional breadth-first search
    seen = ({canon(a): a}, {canon(b): b})
    frontier = (deque([a]), deque([b]))
    explored = 0
    side = 0
    while explored < fuel and (frontier[0] or frontier[1]):
        if not frontier[side]:
            side = 1 - side
        cur = frontier[side].popleft()
        explored += 1
        for r in one_step_reducts(cur, ext):
            if size(r) > max_size:
                continue
            key = canon(r)
            if key in seen[1 - side]:
                return JoinReport(True, r, False, a, b, explored)
            if key not in seen[side]:
                seen[side][key] = r
                frontier[side].append(r)
        side = 1 - side
    exhausted = bool(frontier[0] or frontier[1])
    return JoinReport(False, None, exhausted, a, b, explored)


def reduction_graph(t: Term, fuel: int = 1000, ext: bool = False) -> tuple[dict, bool]:
    """All terms reachable from ``t`` (keyed by canonical form), up to ``fuel`` nodes.

    Returns the node map and whether the graph was explored completely.
    """
    seen = {canon(t): t}
    queue = deque([t])
    while queue:
        if len(seen) > fuel:
            return seen, False
        cur = queue.popleft()
        for r in one_step_reducts(cur, ext):
            key = canon(r)
            if key not in seen:
                seen[key] = r
                queue.append(r)
    return seen, True
