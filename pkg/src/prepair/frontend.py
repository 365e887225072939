"""JSON input documents, their validation, and repair reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from prepair.constraints import (
    Constraint,
    ParseError,
    clause_literals,
    initial_constraint,
    parse_sexpr,
    to_sexpr,
)
from prepair.core import Configuration, UpSet, min_basis
from prepair.safety import AutTransition, SafetyAutomaton, product
from prepair.semantics import SYNC_DIRS, Kind, System, Template, Transition, ValidationError, split_guards

KINDS = {k.value: k for k in Kind}


class InputError(ValueError):
    """A malformed input document; ``location`` points at the offending entry."""

    def __init__(self, location: str, message: str):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}")


@dataclass
class Document:
    """A parsed benchmark: the system, its errors, constraints and optional safety automaton."""

    name: str
    system: System
    err: UpSet
    init: Constraint
    automaton: SafetyAutomaton | None = None
    explicit_b: int = 0
    preference: list[str] = field(default_factory=list)
    partial_errors: dict[str, UpSet] = field(default_factory=dict)
    reconstructed: bool = False
    flags: dict[str, bool] = field(default_factory=dict)
    extra: list[Constraint] = field(default_factory=list)
    description: str = ""

    def model(self):
        """The system to check and its error set, taking the product with the automaton if any."""
        if self.automaton is None:
            return self.system, self.err
        return product(self.system, self.explicit_b, self.automaton)

    def with_errors(self, err: UpSet) -> "Document":
        out = Document(**{**self.__dict__})
        out.err = err
        return out

    def structure(self) -> tuple:
        """Comparable summary used for round-trip checks."""
        return (
            self.name,
            self.system,
            tuple(sorted(c.sort_key() for c in self.err.basis)),
            to_sexpr(self.init),
            self.automaton,
            self.explicit_b,
            tuple(self.preference),
            tuple(sorted((k, tuple(sorted(c.sort_key() for c in v.basis))) for k, v in self.partial_errors.items())),
            self.reconstructed,
        )


# ------------------------------------------------------------------ parsing
def _need(obj: Mapping, key: str, loc: str, kind=None):
    if not isinstance(obj, Mapping):
        raise InputError(loc, "expected an object")
    if key not in obj:
        raise InputError(loc, f"missing key {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise InputError(f"{loc}.{key}", f"expected {_kind_name(kind)}")
    return val


def _kind_name(kind) -> str:
    names = {list: "a list", dict: "an object", str: "a string", int: "an integer", bool: "a boolean"}
    if isinstance(kind, tuple):
        return " or ".join(names.get(k, k.__name__) for k in kind)
    return names.get(kind, kind.__name__)


def _strings(val, loc: str) -> tuple[str, ...]:
    if not isinstance(val, list) or not all(isinstance(x, str) for x in val):
        raise InputError(loc, "expected a list of strings")
    if len(set(val)) != len(val):
        raise InputError(loc, "duplicate entries")
    return tuple(val)


def _parse_transition(raw, loc: str, role: str, kind: Kind, states: Sequence[str], index: int) -> Transition:
    if not isinstance(raw, Mapping):
        raise InputError(loc, "expected an object")
    tid = raw.get("id", f"T{index}")
    if not isinstance(tid, str) or not tid:
        raise InputError(f"{loc}.id", "expected a non-empty string")
    src = _need(raw, "from", loc, str)
    dst = _need(raw, "to", loc, str)
    for key, q in (("from", src), ("to", dst)):
        if q not in states:
            raise InputError(f"{loc}.{key}", f"unknown state {q!r} of template {role}")
    if kind is Kind.DISJUNCTIVE:
        guard = _strings(_need(raw, "guard", loc), f"{loc}.guard")
        if not guard:
            raise InputError(f"{loc}.guard", "guards must name at least one state")
        return Transition(tid, role, src, dst, guard=guard)
    direction = _need(raw, "dir", loc, str)
    if direction not in SYNC_DIRS:
        raise InputError(f"{loc}.dir", f"unknown dir {direction!r}")
    action = raw.get("action")
    if direction != "tau" and not isinstance(action, str):
        raise InputError(f"{loc}.action", "synchronizing transitions need an action name")
    if action is not None and not isinstance(action, str):
        raise InputError(f"{loc}.action", "expected a string")
    return Transition(tid, role, src, dst, action=action, dir=direction)


def _parse_template(raw, loc: str, kind: Kind, counter: list[int]) -> Template:
    role = _need(raw, "role", loc, str)
    if role not in ("A", "B"):
        raise InputError(f"{loc}.role", f"role must be 'A' or 'B', got {role!r}")
    states = _strings(_need(raw, "states", loc), f"{loc}.states")
    if not states:
        raise InputError(f"{loc}.states", "a template needs at least one state")
    init = _need(raw, "init", loc, str)
    if init not in states:
        raise InputError(f"{loc}.init", f"unknown state {init!r}")
    trs = []
    for i, t in enumerate(_need(raw, "transitions", loc, list)):
        trs.append(_parse_transition(t, f"{loc}.transitions[{i}]", role, kind, states, counter[0]))
        counter[0] += 1
    return Template(role, states, init, tuple(trs))


def _complete_receives(b: Template, actions: Sequence[str]) -> tuple[Template, tuple[str, ...]]:
    """Add a self-loop receive for every (state, action) without one."""
    have = {(t.src, t.action) for t in b.transitions if t.dir == "brecv"}
    added = []
    for act in actions:
        for q in b.states:
            if (q, act) not in have:
                added.append(Transition(f"({q},{act}??,{q})", "B", q, q, action=act, dir="brecv"))
    if not added:
        return b, ()
    return Template(b.role, b.states, b.init, b.transitions + tuple(added)), tuple(t.id for t in added)


def _parse_config(raw, loc: str, sys: System) -> list[Configuration]:
    counts_raw = _need(raw, "counts", loc, dict)
    idx = sys.b_index
    counts = [0] * sys.nb
    for q, n in counts_raw.items():
        if q not in idx:
            raise InputError(f"{loc}.counts.{q}", f"unknown B state {q!r}")
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise InputError(f"{loc}.counts.{q}", "counts must be non-negative integers")
        counts[idx[q]] = n
    qa = raw.get("a_state")
    if sys.kind is Kind.BROADCAST:
        if qa is not None:
            raise InputError(f"{loc}.a_state", "broadcast systems have no controller state")
        return [Configuration(None, tuple(counts))]
    if qa is None:
        # no controller state given: the error holds in every one
        return [Configuration(q, tuple(counts)) for q in sys.a.states]
    if qa not in sys.a_states:
        raise InputError(f"{loc}.a_state", f"unknown A state {qa!r}")
    return [Configuration(qa, tuple(counts))]


def _parse_errors(raw, loc: str, sys: System) -> UpSet:
    if not isinstance(raw, list):
        raise InputError(loc, "expected a list")
    found: list[Configuration] = []
    for i, e in enumerate(raw):
        found.extend(_parse_config(e, f"{loc}[{i}]", sys))
    return min_basis(found, sys.order)


def _parse_automaton(raw, loc: str) -> SafetyAutomaton:
    states = _strings(_need(raw, "states", loc), f"{loc}.states")
    init = _need(raw, "init", loc, str)
    acc = _strings(_need(raw, "accepting", loc), f"{loc}.accepting")
    trs = []
    for i, t in enumerate(_need(raw, "transitions", loc, list)):
        tl = f"{loc}.transitions[{i}]"
        trs.append(AutTransition(_need(t, "from", tl, str), _need(t, "obs", tl, str), _need(t, "to", tl, str)))
    aut = SafetyAutomaton(states, init, acc, tuple(trs))
    try:
        aut.validate()
    except ValidationError as e:
        raise InputError(loc, str(e)) from None
    return aut


def parse_document(data: Mapping[str, Any] | str, name: str | None = None) -> Document:
    """Parse and validate an input document given as JSON text or an already decoded object."""
    if isinstance(data, str):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as e:
            raise InputError(f"line {e.lineno} column {e.colno}", f"invalid JSON: {e.msg}") from None
    if not isinstance(data, Mapping):
        raise InputError("$", "the document must be a JSON object")
    kind_s = _need(data, "kind", "$", str)
    if kind_s not in KINDS:
        raise InputError("$.kind", f"unknown kind {kind_s!r}; expected one of {sorted(KINDS)}")
    kind = KINDS[kind_s]
    counter = [0]
    tmpls: dict[str, Template] = {}
    for i, t in enumerate(_need(data, "templates", "$", list)):
        tmpl = _parse_template(t, f"$.templates[{i}]", kind, counter)
        if tmpl.role in tmpls:
            raise InputError(f"$.templates[{i}].role", f"template {tmpl.role} given twice")
        tmpls[tmpl.role] = tmpl
    if "B" not in tmpls:
        raise InputError("$.templates", "template B is missing")
    a = tmpls.get("A")
    if kind is Kind.BROADCAST and a is not None:
        raise InputError("$.templates", "broadcast systems have no template A")
    if kind is not Kind.BROADCAST and a is None:
        raise InputError("$.templates", f"{kind.value} systems need a template A")
    b = tmpls["B"]
    completed: tuple[str, ...] = ()
    if kind is Kind.DISJUNCTIVE:
        a, b = split_guards(a), split_guards(b)
    elif kind is Kind.BROADCAST:
        actions = tuple(dict.fromkeys(t.action for t in b.transitions if t.dir in ("bsend", "brecv")))
        b, completed = _complete_receives(b, actions)
    sys = System(kind, a, b, completed, {"name": data.get("name", name or "")})
    try:
        sys.validate()
    except ValidationError as e:
        raise InputError("$.templates", str(e)) from None

    automaton = None
    k = 0
    if "automaton" in data:
        automaton = _parse_automaton(data["automaton"], "$.automaton")
        k = data.get("explicit_b", 1)
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise InputError("$.explicit_b", "expected a non-negative integer")
        if kind is Kind.BROADCAST:
            raise InputError("$.automaton", "safety automata are supported for disjunctive and rendezvous systems")
        try:
            automaton.compile(sys, k)
        except ValidationError as e:
            raise InputError("$.automaton", str(e)) from None
    elif "explicit_b" in data:
        raise InputError("$.explicit_b", "explicit_b needs an automaton")

    err = _parse_errors(data.get("errors", []), "$.errors", sys)
    if automaton is not None and not err.is_empty():
        raise InputError("$.errors", "give errors either as configurations or as an automaton, not both")
    partial = {}
    for pname, praw in (data.get("partial_errors") or {}).items():
        partial[pname] = _parse_errors(praw, f"$.partial_errors.{pname}", sys)

    cons = data.get("constraints", {})
    if not isinstance(cons, Mapping):
        raise InputError("$.constraints", "expected an object")
    unknown = set(cons) - {"pairing", "one_hot_receive", "keep_tau", "extra"}
    if unknown:
        raise InputError("$.constraints", f"unknown keys {sorted(unknown)}")
    flags = {}
    for key in ("pairing", "one_hot_receive", "keep_tau"):
        v = cons.get(key, False)
        if not isinstance(v, bool):
            raise InputError(f"$.constraints.{key}", "expected a boolean")
        flags[key] = v
    extra = []
    ids = set(sys.transition_ids)
    for i, s in enumerate(cons.get("extra", [])):
        loc = f"$.constraints.extra[{i}]"
        if not isinstance(s, str):
            raise InputError(loc, "expected an S-expression string")
        try:
            c = parse_sexpr(s)
        except ParseError as e:
            raise InputError(loc, str(e)) from None
        missing = c.atoms() - ids
        if missing:
            raise InputError(loc, f"unknown transition ids {sorted(missing)}")
        extra.append(c)
    init = initial_constraint(
        sys, pairing=flags["pairing"], one_hot_recv=flags["one_hot_receive"], keep_tau=flags["keep_tau"], extra=extra
    )

    pref = data.get("preference", [])
    pref = list(_strings(pref, "$.preference"))
    for i, p in enumerate(pref):
        if p.lstrip("-") not in ids:
            raise InputError(f"$.preference[{i}]", f"unknown transition id {p.lstrip('-')!r}")
    recon = data.get("reconstructed", False)
    if not isinstance(recon, bool):
        raise InputError("$.reconstructed", "expected a boolean")
    return Document(
        name=data.get("name", name or ""),
        system=sys,
        err=err,
        init=init,
        automaton=automaton,
        explicit_b=k,
        preference=pref,
        partial_errors=partial,
        reconstructed=recon,
        flags=flags,
        extra=extra,
        description=data.get("description", ""),
    )


def load_document(path: str) -> Document:
    with open(path) as fh:
        text = fh.read()
    return parse_document(text, name=path)


def parse_system(text: str) -> tuple[System, UpSet, Constraint, SafetyAutomaton | None]:
    """The four parts of an input document."""
    doc = parse_document(text)
    return doc.system, doc.err, doc.init, doc.automaton


# ----------------------------------------------------------------- emission
def _emit_transitions(tmpl: Template, sys: System) -> list[dict]:
    out: list[dict] = []
    groups: dict[str, dict] = {}
    for t in tmpl.transitions:
        if t.id in sys.completed:
            continue
        if sys.kind is Kind.DISJUNCTIVE:
            key = t.original_id
            if key in groups:
                groups[key]["guard"].append(t.guard[0])
                continue
            entry = {"id": key, "from": t.src, "guard": list(t.guard), "to": t.dst}
            groups[key] = entry
            out.append(entry)
        else:
            entry = {"id": t.id, "from": t.src, "dir": t.dir, "to": t.dst}
            if t.action is not None:
                entry["action"] = t.action
            out.append(entry)
    return out


def _emit_configs(err: UpSet, sys: System) -> list[dict]:
    out = []
    for c in sorted(err.basis, key=lambda c: c.sort_key()):
        entry: dict[str, Any] = {}
        if c.a_state is not None:
            entry["a_state"] = c.a_state
        entry["counts"] = {q: n for q, n in zip(sys.b.states, c.counts) if n}
        out.append(entry)
    return out


def emit_document(doc: Document) -> dict:
    """The input-format object for ``doc``; parsing it gives back an equal document."""
    sys = doc.system
    tmpls = []
    for tmpl in (sys.a, sys.b):
        if tmpl is None:
            continue
        tmpls.append({"role": tmpl.role, "states": list(tmpl.states), "init": tmpl.init,
                      "transitions": _emit_transitions(tmpl, sys)})
    out: dict[str, Any] = {"name": doc.name}
    if doc.description:
        out["description"] = doc.description
    out["kind"] = sys.kind.value
    out["templates"] = tmpls
    out["errors"] = _emit_configs(doc.err, sys)
    if doc.partial_errors:
        out["partial_errors"] = {k: _emit_configs(v, sys) for k, v in doc.partial_errors.items()}
    out["constraints"] = {**{k: v for k, v in doc.flags.items() if v}, "extra": [to_sexpr(c) for c in doc.extra]}
    if doc.automaton is not None:
        aut = doc.automaton
        out["automaton"] = {
            "states": list(aut.states),
            "init": aut.init,
            "accepting": list(aut.accepting),
            "transitions": [{"from": t.src, "obs": t.obs, "to": t.dst} for t in aut.transitions],
        }
        out["explicit_b"] = doc.explicit_b
    if doc.preference:
        out["preference"] = list(doc.preference)
    if doc.reconstructed:
        out["reconstructed"] = True
    return out


def dumps_document(doc: Document) -> str:
    return json.dumps(emit_document(doc), indent=2)


# ------------------------------------------------------------------ reports
def _clause_list(c: Constraint | None) -> list[str] | None:
    """Literals of a single clause in their printed order, negative ones prefixed with '-'."""
    if c is None or clause_literals(c) is None:
        return None
    parts = c.args if hasattr(c, "args") else (c,)
    return [p.id if hasattr(p, "id") else f"-{p.arg.id}" for p in parts]


def report_json(outcome, sys=None) -> dict:
    """Machine-readable summary of a repair outcome."""
    hist = []
    for rec in outcome.history:
        entry = {
            "index": rec.index,
            "kind": rec.kind,
            "removed": sorted(t for t, v in rec.candidate.items() if not v),
            "excludes_candidate": rec.excludes_previous,
        }
        if rec.digest:
            entry["reachable_errors"] = rec.digest
        if rec.constraint is not None:
            entry["constraint"] = to_sexpr(rec.constraint)
            clause = _clause_list(rec.constraint)
            if clause is not None:
                entry["clause"] = clause
        if rec.note:
            entry["note"] = rec.note
        hist.append(entry)
    out = {
        "verdict": outcome.verdict,
        "iterations": outcome.iterations,
        "kept": list(outcome.kept),
        "removed": list(outcome.removed),
        "history": hist,
        "warnings": list(outcome.warnings),
    }
    if outcome.fallback is not None:
        out["safe_sizes"] = str(outcome.fallback)
    return out


def _ordinal(n: int) -> str:
    return {1: "First", 2: "Second", 3: "Third", 4: "Fourth", 5: "Fifth"}.get(n, f"Call {n}:")


def report_text(outcome) -> str:
    """Human-readable trace: one block per model-checker call and SAT solution."""
    lines: list[str] = []
    acc: list[str] = []
    for rec in outcome.history:
        head = _ordinal(rec.index)
        head = f"{head} call to model checker returns:" if not head.endswith(":") else f"{head} model checker returns:"
        if rec.kind == "safe":
            lines.append(f"{head} safe")
            if rec.note:
                lines.append(f"  ({rec.note})")
            break
        if rec.kind == "error":
            sets = list(reversed(rec.digest))
            lines.append(head + " unsafe")
            lines.append("  " + ", ".join(f"RE_{i}={{{', '.join(s)}}}" for i, s in enumerate(sets)))
        elif rec.kind == "deadlock":
            lines.append(head + " safe, but deadlocks")
            if rec.note:
                lines.append(f"  ({rec.note})")
        else:
            lines.append(head + " safe, but the candidate violates the initial constraints")
        if rec.constraint is not None:
            acc.append(to_sexpr(rec.constraint))
            clause = _clause_list(rec.constraint)
            shown = " or ".join(f"not {x[1:]}" if x.startswith("-") else x for x in clause) if clause else to_sexpr(rec.constraint)
            lines.append(f"  newConstr_{len(acc)} = {shown}")
        lines.append(f"SAT solvers solution {rec.index}:")
        nxt = _next_candidate(outcome, rec.index)
        if nxt is None:
            lines.append("  UNSAT" if outcome.verdict == "unrealizable" else "  (not computed)")
        else:
            removed = [t for t, v in nxt.items() if not v]
            lines.append("  remove " + (", ".join(removed) if removed else "nothing"))
    lines.append(f"verdict: {outcome.verdict}")
    if outcome.repaired:
        lines.append("removed: " + (", ".join(outcome.removed) if outcome.removed else "nothing"))
    if outcome.fallback is not None:
        lines.append(f"safe for: {outcome.fallback}")
    for w in outcome.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def _next_candidate(outcome, index: int) -> dict[str, bool] | None:
    for rec in outcome.history:
        if rec.index == index + 1:
            return rec.candidate
    return None


def emit_report(outcome, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report_json(outcome), indent=2)
    if fmt == "text":
        return report_text(outcome)
    raise ValueError(f"unknown report format {fmt!r}")


__all__ = [
    "Document",
    "InputError",
    "dumps_document",
    "emit_document",
    "emit_report",
    "load_document",
    "parse_document",
    "parse_system",
    "report_json",
    "report_text",
]
