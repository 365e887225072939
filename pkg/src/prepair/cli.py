"""Command line interface: ``prepair check|deadlock|repair|simulate FILE``.

Exit codes: 0 safe or repaired, 1 unsafe, deadlocked or unrealizable,
2 input error, 3 unsupported feature.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

from prepair.constraints import to_sexpr
from prepair.deadlock import Deadlock, SelfGuardError, detect_deadlock, pr_overapprox
from prepair.frontend import Document, InputError, load_document, report_json, report_text
from prepair.mc import model_check
from prepair.repair import Mode, RepairOptions, UnsupportedFeature, repair
from prepair.semantics import Kind, ValidationError

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNSUPPORTED = 0, 1, 2, 3


def _fmt(c, sys) -> str:
    if getattr(sys, "automaton", None) is not None:
        from prepair.safety import format_product_config

        return format_product_config(c, sys)
    return str(c)


def _select_errors(doc: Document, name: str | None) -> Document:
    if name is None or name == "C":
        return doc
    if name not in doc.partial_errors:
        raise InputError("--errors", f"no error set {name!r}; available: C, {', '.join(doc.partial_errors) or 'none'}")
    return doc.with_errors(doc.partial_errors[name])


def _write_json(path: str | None, obj) -> None:
    if path:
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")


def cmd_check(args) -> int:
    doc = _select_errors(load_document(args.file), args.errors)
    msys, err = doc.model()
    t0 = time.perf_counter()
    safe, seq = model_check(msys, err)
    dt = time.perf_counter() - t0
    print(f"{doc.name}: {'safe' if safe else 'unsafe'} ({seq.iterations} predecessor rounds, {dt:.3f}s)")
    sets = [[_fmt(c, msys) for c in s.basis] for s in seq.sets]
    if not safe:
        for i, s in enumerate(sets):
            print(f"  E_{i} = {{{', '.join(s)}}}")
    _write_json(args.json, {"verdict": "safe" if safe else "unsafe", "sets": sets if not safe else []})
    return EXIT_OK if safe else EXIT_FAIL


def _deadlock_target(doc: Document):
    sysm = doc.system
    if sysm.kind is Kind.BROADCAST:
        raise UnsupportedFeature("deadlock detection for broadcast systems is undecidable")
    return pr_overapprox(sysm) if sysm.kind is Kind.RENDEZVOUS else sysm


def cmd_deadlock(args) -> int:
    doc = load_document(args.file)
    target = _deadlock_target(doc)
    res = detect_deadlock(target)
    if isinstance(res, Deadlock):
        print(f"{doc.name}: deadlock reachable")
        for i, s in enumerate(res.sequence.sets):
            print(f"  D_{i} = {{{', '.join(str(c) for c in s.basis)}}}")
        if doc.system.kind is Kind.RENDEZVOUS:
            print("  (found in the rendezvous overapproximation; it may be spurious)")
        _write_json(args.json, {"verdict": "deadlock", "sets": [[str(c) for c in s.basis] for s in res.sequence.sets]})
        return EXIT_FAIL
    note = " (iteration cap reached)" if res.capped else ""
    print(f"{doc.name}: no deadlock{note}")
    _write_json(args.json, {"verdict": "no-deadlock", "capped": res.capped})
    return EXIT_OK


def _read_preference(path: str) -> list[str]:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return text.split()  # ids may contain commas, so only whitespace separates them
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        raise InputError(path, "a preference file holds a JSON list of transition ids or whitespace-separated ids")
    return data


def _cross_check(doc: Document, msys, err, outcome, bound: int) -> list[str]:
    from prepair.oracle import explicit_deadlocks, explicit_reach

    problems = []
    restricted = msys.restrict(outcome.kept)
    dl_sys = None
    if doc.system.kind is not Kind.BROADCAST:
        dl_sys = doc.system.restrict(outcome.kept)
    for n in range(1, bound + 1):
        if explicit_reach(restricted, n, err):
            problems.append(f"error reachable with n={n}")
        if dl_sys is not None and explicit_deadlocks(dl_sys, n):
            problems.append(f"deadlock reachable with n={n}")
    return problems


def cmd_repair(args) -> int:
    doc = _select_errors(load_document(args.file), args.errors)
    msys, err = doc.model()
    pref = _read_preference(args.prefer) if args.prefer else list(doc.preference)
    known = set(msys.transition_ids)
    unknown = [p for p in pref if p.lstrip("-") not in known]
    if unknown:
        raise InputError(args.prefer or "$.preference", f"unknown transition ids {unknown}")
    if args.seed is not None:
        rest = [t for t in msys.transition_ids if t not in {p.lstrip("-") for p in pref}]
        random.Random(args.seed).shuffle(rest)
        pref = pref + rest
    opts = RepairOptions(
        mode=Mode(args.mode),
        deadlock_check=False if args.no_deadlock_check else None,
        max_iter=args.max_iter,
        preference=pref,
        emit_dimacs=args.emit_dimacs,
    )
    t0 = time.perf_counter()
    outcome = repair(msys, err, doc.init, opts)
    dt = time.perf_counter() - t0
    print(report_text(outcome), end="")
    if args.emit_constraints:
        for rec in outcome.history:
            if rec.constraint is not None:
                print(f"constraint {rec.index}: {to_sexpr(rec.constraint)}")
        print(f"initial constraint: {to_sexpr(doc.init)}")
    print(f"time: {dt:.3f}s")
    report = report_json(outcome)
    report["name"] = doc.name
    code = EXIT_OK if outcome.repaired else EXIT_FAIL
    if args.cross_check and outcome.repaired:
        problems = _cross_check(doc, msys, err, outcome, args.cross_check)
        report["cross_check"] = {"bound": args.cross_check, "problems": problems}
        if problems:
            print("cross-check FAILED: " + "; ".join(problems))
            code = EXIT_FAIL
        else:
            print(f"cross-check passed for n <= {args.cross_check}")
    _write_json(args.json, report)
    return code


def cmd_simulate(args) -> int:
    from prepair.oracle import config_successors

    doc = load_document(args.file)
    msys, _ = doc.model()
    rng = random.Random(args.seed)
    if hasattr(msys, "initial_configs"):
        cur = msys.initial_configs(args.n)[0]
    else:
        cur = msys.initial_config(args.n)
    print(f"0: {_fmt(cur, msys)}")
    for i in range(1, args.steps + 1):
        nxt = sorted(config_successors(msys, cur), key=lambda c: c.sort_key())
        if not nxt:
            print(f"{i}: no successor (deadlock)")
            break
        cur = rng.choice(nxt)
        print(f"{i}: {_fmt(cur, msys)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prepair", description="Verify and repair parameterized systems.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parameterized model check")
    c.add_argument("file")
    c.add_argument("--errors", help="error set to use: C (default) or a partial set name such as P1")
    c.add_argument("--json", metavar="OUT")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("deadlock", help="parameterized deadlock detection")
    d.add_argument("file")
    d.add_argument("--json", metavar="OUT")
    d.set_defaults(func=cmd_deadlock)

    r = sub.add_parser("repair", help="restrict the transition relation until the system is safe")
    r.add_argument("file")
    r.add_argument("--mode", choices=[m.value for m in Mode], default="full")
    r.add_argument("--errors", help="error set to use: C (default) or a partial set name such as P1")
    r.add_argument("--no-deadlock-check", action="store_true")
    r.add_argument("--max-iter", type=int, metavar="N")
    r.add_argument("--prefer", metavar="FILE", help="solver preference list, overriding the document's")
    r.add_argument("--seed", type=int, help="shuffle the default decision order")
    r.add_argument("--emit-dimacs", metavar="DIR")
    r.add_argument("--emit-constraints", action="store_true")
    r.add_argument("--cross-check", type=int, metavar="N", help="confirm the repair by explicit search up to n=N")
    r.add_argument("--json", metavar="OUT")
    r.set_defaults(func=cmd_repair)

    s = sub.add_parser("simulate", help="print a random bounded run (debugging aid)")
    s.add_argument("file")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, SelfGuardError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except UnsupportedFeature as e:
        print(f"unsupported: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
