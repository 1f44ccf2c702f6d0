"""Command-line driver.

Exit status: 0 all checks pass, 1 a failure or Distinct verdict (or bad
input), 2 usage error, 3 only inconclusive results.
"""
from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import os
import sys
from dataclasses import dataclass

from .generate import corpus, GenerationFailed
from .model.coh import CohBackend, show_token, trace_probe
from .model.core import Backend, BackendFailure, ObsSpec, denote, denote_ground
from .model.strict import StrictBackend
from .parser import ParseError, parse_judgment, parse_term, pretty
from .reduce import format_trace, normalize
from .syntax import IOTA, Term, Type, show_type
from .typecheck import TypeCheckError, infer
from .verify import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    incompleteness_witness,
    law_suite,
    soundness_check,
    substitution_suite,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
COMMANDS = ("parse", "check", "reduce", "denote", "soundness", "laws", "subst", "witness", "gen")


@dataclass(frozen=True)
class RunConfig:
    command: str
    term: str | None = None
    backend: str = "strict"
    fuel: int = 1000
    s: int = 8
    budget: int = 3
    k: int = 16
    samples: int = 100
    seed: int = 0
    output: str = "text"
    ext: bool = False

    @property
    def obs(self) -> ObsSpec:
        return ObsSpec(s=self.s, b=self.budget, k=self.k, seed=self.seed)

    def make_backend(self) -> Backend:
        return CohBackend() if self.backend == "coh" else StrictBackend()


class _Out:
    """Collects report records and renders them as text lines or JSON lines."""

    def __init__(self, cfg: RunConfig, stream):
        self.cfg = cfg
        self.stream = stream

    def emit(self, text: str, **record):
        if self.cfg.output == "structured":
            self.stream.write(json.dumps(record, sort_keys=True, default=str) + "\n")
        else:
            self.stream.write(text + "\n")


def ast_record(t) -> object:
    """Nested record form of a term, without source spans."""
    if isinstance(t, Term):
        rec = {"node": type(t).__name__}
        for f in dataclasses.fields(t):
            if f.name != "span":
                rec[f.name] = ast_record(getattr(t, f.name))
        return rec
    if isinstance(t, Type):
        return show_type(t)
    if isinstance(t, enum.Enum):
        return t.value
    return t


def _read_input(cfg: RunConfig):
    """``(basis, term, claimed type or None, source name)`` from an inline term or a file."""
    if cfg.term is None:
        raise _Usage(f"{cfg.command} needs a term or an input file")
    text, name = cfg.term, "<input>"
    if os.path.isfile(cfg.term):
        name = cfg.term
        with open(cfg.term, encoding="utf-8") as fh:
            text = fh.read()
    if "|-" in text:
        basis, t, ty = parse_judgment(text, filename=name)
        return basis, t, ty, name
    return (), parse_term(text, filename=name), None, name


class _Usage(Exception):
    pass


def _status(verdicts) -> int:
    verdicts = list(verdicts)
    if FAIL in verdicts:
        return EXIT_FAIL
    if INCONCLUSIVE in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(cfg, out):
    basis, t, ty, _ = _read_input(cfg)
    out.emit(pretty(t), command="parse", term=pretty(t), ast=ast_record(t),
             basis=[str(e) for e in basis], type=None if ty is None else show_type(ty))
    return EXIT_OK


def cmd_check(cfg, out):
    basis, t, claimed, _ = _read_input(cfg)
    ty, d = infer(basis, t, ext=cfg.ext)
    if claimed is not None and claimed != ty:
        out.emit(f"TypeMismatch: claimed {show_type(claimed)}, inferred {show_type(ty)}",
                 command="check", verdict="fail", reason="TypeMismatch",
                 claimed=show_type(claimed), type=show_type(ty))
        return EXIT_FAIL
    out.emit(f"{pretty(t)} : {show_type(ty)}\n{d.dump()}", command="check", verdict="pass",
             type=show_type(ty), derivation=d.to_record())
    return EXIT_OK


def cmd_reduce(cfg, out):
    basis, t, _, _ = _read_input(cfg)
    infer(basis, t, ext=cfg.ext)
    norm = normalize(t, fuel=cfg.fuel, ext=cfg.ext, keep_trace=True)
    status = "exhausted" if norm.exhausted else "normal"
    text = "\n".join([pretty(t)] + format_trace(norm) + [f"{status} after {norm.steps} steps"])
    out.emit(text, command="reduce", start=pretty(t), result=pretty(norm.term),
             steps=norm.steps, exhausted=norm.exhausted,
             trace=[{"path": list(s.path), "rule": s.tag.value, "term": pretty(u)}
                    for s, u in norm.trace])
    return EXIT_INCONCLUSIVE if norm.exhausted else EXIT_OK


def cmd_denote(cfg, out):
    basis, t, _, _ = _read_input(cfg)
    B = cfg.make_backend()
    ty, _ = infer(basis, t, ext=cfg.ext)
    if not basis and ty == IOTA:
        r = denote_ground(t, B, cfg.obs, ext=cfg.ext)
        out.emit(str(r), command="denote", backend=B.name, kind=r.kind.value, value=r.value)
        return EXIT_INCONCLUSIVE if r.kind.value == "unstable" else EXIT_OK
    f = denote(basis, t, B, ext=cfg.ext)
    if isinstance(B, CohBackend):
        pairs = sorted(trace_probe(f, cfg.budget, B, cfg.k), key=repr)
        shown = [f"{show_token(a)} |-> {show_token(b)}" for a, b in pairs]
        out.emit("\n".join(shown) or "(empty trace)", command="denote", backend=B.name,
                 trace=[[show_token(a), show_token(b)] for a, b in pairs])
        return EXIT_OK
    rows = []
    for label, x in B.inputs(f.dom, cfg.obs):
        try:
            rows.append((label, B.observe(f.run(x, cfg.k), f.cod, cfg.obs, cfg.k)))
        except BackendFailure as exc:
            rows.append((label, f"<{exc}>"))
    out.emit("\n".join(f"{a} |-> {v}" for a, v in rows), command="denote", backend=B.name,
             graph=[[a, repr(v)] for a, v in rows])
    return EXIT_OK


def _terms_for(cfg):
    if cfg.term is not None:
        basis, t, _, _ = _read_input(cfg)
        if basis:
            raise _Usage("soundness needs closed terms")
        return [(0, t)]
    return [(it.index, it.term) for it in corpus(cfg.samples, seed=cfg.seed, ext=cfg.ext)]


def cmd_soundness(cfg, out):
    B = cfg.make_backend()
    verdicts = []
    fuel = min(cfg.fuel, 200) if cfg.term is None else cfg.fuel
    for i, t in _terms_for(cfg):
        r = soundness_check(t, B, fuel=fuel, obs=cfg.obs, ext=cfg.ext)
        verdicts.append(r.verdict)
        out.emit(f"[{i}] {r.line()}  {pretty(t)}", command="soundness", index=i,
                 term=pretty(t), **r.record())
    out.emit(f"soundness {B.name}: {verdicts.count(PASS)} pass, {verdicts.count(FAIL)} fail, "
             f"{verdicts.count(INCONCLUSIVE)} inconclusive", command="soundness-summary",
             backend=B.name, passed=verdicts.count(PASS), failed=verdicts.count(FAIL),
             inconclusive=verdicts.count(INCONCLUSIVE), seed=cfg.seed)
    return _status(verdicts)


def cmd_laws(cfg, out):
    B = cfg.make_backend()
    reports = law_suite(B, cfg.obs)
    for r in reports:
        out.emit(r.line(), command="laws", **r.record())
    verdicts = [r.verdict for r in reports]
    out.emit(f"laws {B.name}: {verdicts.count(PASS)}/{len(verdicts)} pass", command="laws-summary",
             backend=B.name, passed=verdicts.count(PASS), total=len(verdicts), seed=cfg.seed,
             s=cfg.s, b=cfg.budget, k=cfg.k)
    return _status(verdicts)


def cmd_subst(cfg, out):
    B = cfg.make_backend()
    verdicts = []
    for case in ("ground", "higher", "stable"):
        r = substitution_suite(case, B, count=cfg.samples, obs=cfg.obs, seed=cfg.seed)
        verdicts.append(r.verdict)
        out.emit(f"{r.line()} {r.details}", command="subst", **r.record())
    return _status(verdicts)


def cmd_witness(cfg, out):
    B = cfg.make_backend()
    r = incompleteness_witness(B, cfg.obs, fuel=cfg.fuel)
    out.emit(f"{r.line()}\n" + "\n".join(f"  {k}: {v}" for k, v in r.details.items()),
             command="witness", **r.record())
    return _status([r.verdict])


def cmd_gen(cfg, out):
    for it in corpus(cfg.samples, seed=cfg.seed, ext=cfg.ext):
        out.emit(pretty(it.term), command="gen", index=it.index, seed=it.seed,
                 type=show_type(it.type), term=pretty(it.term))
    return EXIT_OK


HANDLERS = {name: globals()["cmd_" + name] for name in COMMANDS}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=("strict", "coh"), default="strict")
    common.add_argument("--fuel", type=int, default=1000)
    common.add_argument("-s", type=int, default=8, help="numerals 0..s are probed")
    common.add_argument("--budget", "-b", type=int, default=3, help="token budget for trace probes")
    common.add_argument("-k", type=int, default=16, help="fixpoint iterations")
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", choices=("text", "structured"), default="text")
    common.add_argument("--ext", action="store_true", help="enable promote!/discard/copy/derelict")
    ap = argparse.ArgumentParser(prog="sllambda", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, needs_term in (("parse", True), ("check", True), ("reduce", True),
                             ("denote", True), ("soundness", False), ("laws", False),
                             ("subst", False), ("witness", False), ("gen", False)):
        p = sub.add_parser(name, parents=[common])
        if needs_term:
            p.add_argument("term", help="inline term, judgment, or path to a file")
        elif name == "soundness":
            p.add_argument("term", nargs="?", help="closed term (default: generated corpus)")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(command=ns.command, term=getattr(ns, "term", None), backend=ns.backend,
                     fuel=ns.fuel, s=ns.s, budget=ns.budget, k=ns.k, samples=ns.samples,
                     seed=ns.seed, output=ns.output, ext=ns.ext)


def run(cfg: RunConfig, stream=None) -> int:
    stream = stream or sys.stdout
    out = _Out(cfg, stream)
    try:
        if min(cfg.fuel, cfg.s, cfg.budget, cfg.k, cfg.samples) < 1:
            raise _Usage("numeric bounds must be >= 1")
        return HANDLERS[cfg.command](cfg, out)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        out.emit(exc.render(), command=cfg.command, verdict="fail", reason="ParseError",
                 message=exc.render())
        return EXIT_FAIL
    except TypeCheckError as exc:
        out.emit(f"{exc.code}: {exc.message}", command=cfg.command, verdict="fail",
                 reason=exc.code, message=exc.message)
        return EXIT_FAIL
    except (BackendFailure, GenerationFailed) as exc:
        out.emit(f"{type(exc).__name__}: {exc}", command=cfg.command, verdict="fail",
                 reason=type(exc).__name__, message=str(exc))
        return EXIT_FAIL


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
