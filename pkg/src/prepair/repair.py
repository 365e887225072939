"""The repair loop: model check, constrain, solve, restrict, and check for deadlocks."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from prepair.constraints import (
    FALSE,
    Constraint,
    blocking_clause,
    build_sync_constr,
    conj,
    deadlock_constr,
    disj,
    Not,
    Atom,
)
from prepair.core import Configuration, UpSet
from prepair.deadlock import (
    Deadlock,
    SelfGuardError,
    deadlock_witness,
    detect_deadlock,
    pr_overapprox,
)
from prepair.mc import ErrorSequence, SafeForAll, SafeUpTo, max_safe_size, model_check
from prepair.sat import Sat, export_dimacs, solve, to_cnf
from prepair.semantics import Kind, enabled_local


class Mode(enum.Enum):
    FULL = "full"
    SINGLE = "single"
    NAIVE = "naive"


class UnsupportedFeature(RuntimeError):
    """The requested analysis is not available for this kind of system."""


def reachable_error_sequence(sys, e: ErrorSequence) -> list[frozenset[Configuration]]:
    """Forward-filtered sets ``[RE_k, ..., RE_0]`` of an unsafe error sequence."""
    if e.initial is None:
        raise ValueError("reachable_error_sequence needs an unsafe error sequence")
    sets = e.sets
    cur = frozenset(e.initial.basis)
    out = [cur]
    for i in range(len(sets) - 2, -1, -1):
        up = sets[i]
        nxt = set()
        for s in cur:
            for st in sys.steps(s):
                if up.contains(st.target):
                    nxt.add(st.target)
        cur = frozenset(nxt)
        if not cur:
            raise AssertionError(f"empty reachable error set at level {i}")
        out.append(cur)
    return out


def _sorted(r: Iterable[Configuration]) -> list[Configuration]:
    return sorted(r, key=lambda c: c.sort_key())


def first_error_path(sys, re: Sequence[frozenset[Configuration]]) -> list[tuple[tuple[str, ...], Configuration]]:
    """Lexicographically first concrete path threading ``[RE_k, ..., RE_0]``."""
    s = _sorted(re[0])[0]
    path = []
    for nxt in re[1:]:
        steps = sorted((st for st in sys.steps(s) if st.target in nxt), key=lambda st: (st.tids, st.target.sort_key()))
        st = steps[0]
        path.append((st.tids, st.target))
        s = st.target
    return path


def error_constraint(sys, re: Sequence[frozenset[Configuration]], mode: Mode) -> Constraint:
    if len(re) == 1:
        return FALSE  # an initial configuration is already an error
    if mode is Mode.SINGLE:
        return disj(Not(Atom(t)) for tids, _ in first_error_path(sys, re) for t in tids)
    rest = list(re[1:])
    return conj(build_sync_constr(s, rest, sys) for s in _sorted(re[0]))


@dataclass
class IterationRecord:
    index: int
    kind: str  # "error", "deadlock", "init" or "safe"
    digest: list[list[str]]
    constraint: Constraint | None
    candidate: dict[str, bool]
    excludes_previous: bool = True
    note: str = ""


@dataclass
class RepairOutcome:
    verdict: str  # "repaired", "unrealizable" or "incomplete" (iteration limit hit)
    kept: list[str]
    removed: list[str]
    iterations: int
    history: list[IterationRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    fallback: SafeForAll | SafeUpTo | None = None

    @property
    def repaired(self) -> bool:
        return self.verdict == "repaired"


@dataclass
class RepairOptions:
    mode: Mode = Mode.FULL
    # None: check where supported; True: insist (broadcast raises); False: never
    deadlock_check: bool | None = None
    max_iter: int | None = None
    preference: Sequence[str] = ()
    emit_dimacs: str | None = None


def _deadlock_system(sys):
    base = getattr(sys, "base", sys)
    if base.kind is Kind.BROADCAST:
        return None, "deadlock checking is not supported for broadcast systems; skipped"
    if base.kind is Kind.RENDEZVOUS:
        return pr_overapprox(base), ""
    return base, ""


def _deadlock_round(cur, original, cand: dict[str, bool]) -> tuple[Constraint | None, list[list[str]], str]:
    """Constraint excluding a deadlocking candidate, or ``None`` when it is deadlock-free."""
    dsys, note = _deadlock_system(cur)
    if dsys is None:
        return None, [], note
    try:
        res = detect_deadlock(dsys)
    except SelfGuardError as e:
        return None, [], f"deadlock check skipped: {e}"
    if not isinstance(res, Deadlock):
        return None, [], "capped" if res.capped else ""
    digest = [[str(c) for c in s.basis] for s in res.sequence.sets]
    if dsys is not getattr(cur, "base", cur):
        # rendezvous: the overapproximation only justifies excluding this candidate
        return blocking_clause(cand), digest, "deadlock in the rendezvous overapproximation"
    obase = getattr(original, "base", original)
    parts = []
    for start in _sorted(res.sequence.initial.basis):
        wit = deadlock_witness(dsys, start)
        if wit is None:
            continue
        path, dead = wit
        exits = enabled_local(dead, obase)
        parts.append(deadlock_constr(path, exits) if path else disj(Atom(e) for e in sorted(exits)))
    if not parts:
        return blocking_clause(cand), digest, "no concrete witness; blocking the candidate"
    return conj(parts), digest, ""


def repair(sys, err: UpSet, init_constr: Constraint, options: RepairOptions | None = None, **kw) -> RepairOutcome:
    """Search for a total sub-relation of ``sys``'s transitions under which ``err`` is unreachable."""
    opts = options or RepairOptions(**kw)
    atoms = list(sys.transition_ids)
    bound = 2 ** len(atoms)
    warnings: list[str] = []
    is_bc = getattr(sys, "base", sys).kind is Kind.BROADCAST
    if is_bc and opts.deadlock_check:
        raise UnsupportedFeature("deadlock detection for broadcast systems is undecidable; rerun without it")
    if is_bc and opts.deadlock_check is None:
        warnings.append("deadlock checking is not supported for broadcast systems; skipped")
    dl_check = opts.deadlock_check is not False and not is_bc
    accum: list[Constraint] = []
    history: list[IterationRecord] = []

    def solve_now() -> Sat | None:
        formula = conj(accum + [init_constr])
        cnf = to_cnf(formula, atoms)
        if opts.emit_dimacs:
            os.makedirs(opts.emit_dimacs, exist_ok=True)
            path = os.path.join(opts.emit_dimacs, f"iter{len(history):03d}.cnf")
            with open(path, "w") as fh:
                fh.write(export_dimacs(cnf))
        res = solve(cnf, opts.preference)
        return res if isinstance(res, Sat) else None

    # the first check runs on the unrestricted system, as in the algorithm
    cand = {a: True for a in atoms}
    checks = 0
    while True:
        if checks >= bound:
            raise AssertionError(f"repair exceeded {bound} iterations")
        if opts.max_iter is not None and checks >= opts.max_iter:
            warnings.append(f"stopped after {checks} iterations (--max-iter)")
            return _finish("incomplete", sys, err, cand, checks, history, warnings, fallback=True)
        kept = [a for a in atoms if cand[a]]
        cur = sys.restrict(kept)
        checks += 1
        safe, seq = model_check(cur, err)
        if not safe:
            re = reachable_error_sequence(cur, seq)
            new = error_constraint(cur, re, opts.mode) if opts.mode is not Mode.NAIVE else blocking_clause(cand)
            digest = [[str(c) for c in _sorted(r)] for r in re]
            kind, note = "error", ""
        else:
            new = None
            digest, note = [], ""
            if not init_constr.evaluate(cand):
                # safe, but the unrestricted system violates the initial constraints
                kind, note = "init", "candidate violates the initial constraints"
            else:
                if dl_check:
                    new, digest, note = _deadlock_round(cur, sys, cand)
                    if note and "skipped" in note:
                        warnings.append(note)
                if new is None:
                    history.append(IterationRecord(checks, "safe", [], None, dict(cand), True, note))
                    return _finish("repaired", sys, err, cand, checks, history, warnings)
                kind = "deadlock"
        excludes = not conj([c for c in (new, init_constr) if c is not None]).evaluate(cand)
        if not excludes:
            raise AssertionError(f"iteration {checks}: new constraint does not exclude the current candidate")
        history.append(IterationRecord(checks, kind, digest, new, dict(cand), excludes, note))
        if new is not None:
            accum.append(new)
        nxt = solve_now()
        if nxt is None:
            return _finish("unrealizable", sys, err, cand, checks, history, warnings, fallback=True)
        cand = nxt.assignment


def _finish(verdict, sys, err, cand, checks, history, warnings, fallback=False) -> RepairOutcome:
    atoms = list(sys.transition_ids)
    kept = [a for a in atoms if cand.get(a, True)]
    removed = [a for a in atoms if not cand.get(a, True)]
    fb = None
    if fallback:
        fb = max_safe_size(sys.restrict(kept), err)
    if verdict != "repaired":
        kept, removed = [], []
    return RepairOutcome(verdict, kept, removed, checks, history, warnings, fb)


__all__ = [
    "IterationRecord",
    "Mode",
    "RepairOptions",
    "RepairOutcome",
    "UnsupportedFeature",
    "error_constraint",
    "first_error_path",
    "reachable_error_sequence",
    "repair",
]
