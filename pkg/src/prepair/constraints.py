"""Boolean constraints over transition atoms and the repair constraint builders."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from prepair.core import Configuration, OrderKind, UpSet
from prepair.semantics import Kind, System


# --------------------------------------------------------------------- AST
class Constraint:
    __slots__ = ()

    def atoms(self) -> set[str]:
        out: set[str] = set()
        _collect(self, out)
        return out

    def evaluate(self, assignment: Mapping[str, bool]) -> bool:
        return _eval(self, assignment)

    def __str__(self) -> str:
        return to_sexpr(self)


@dataclass(frozen=True)
class Const(Constraint):
    value: bool


@dataclass(frozen=True)
class Atom(Constraint):
    id: str


@dataclass(frozen=True)
class Not(Constraint):
    arg: Constraint


@dataclass(frozen=True)
class And(Constraint):
    args: tuple[Constraint, ...]


@dataclass(frozen=True)
class Or(Constraint):
    args: tuple[Constraint, ...]


TRUE = Const(True)
FALSE = Const(False)


def neg(c: Constraint) -> Constraint:
    if isinstance(c, Const):
        return Const(not c.value)
    if isinstance(c, Not):
        return c.arg
    return Not(c)


def _flat(args: Iterable[Constraint], cls) -> list[Constraint]:
    out: list[Constraint] = []
    seen: set[Constraint] = set()
    for a in args:
        parts = a.args if isinstance(a, cls) else (a,)
        for p in parts:
            if p not in seen:
                seen.add(p)
                out.append(p)
    return out


def conj(args: Iterable[Constraint]) -> Constraint:
    """Conjunction with flattening, constant folding and syntactic deduplication."""
    items = [a for a in _flat(args, And) if a != TRUE]
    if FALSE in items:
        return FALSE
    if not items:
        return TRUE
    if len(items) == 1:
        return items[0]
    return And(tuple(items))


def disj(args: Iterable[Constraint]) -> Constraint:
    items = [a for a in _flat(args, Or) if a != FALSE]
    if TRUE in items:
        return TRUE
    if not items:
        return FALSE
    if len(items) == 1:
        return items[0]
    return Or(tuple(items))


def _collect(c: Constraint, out: set[str]) -> None:
    if isinstance(c, Atom):
        out.add(c.id)
    elif isinstance(c, Not):
        _collect(c.arg, out)
    elif isinstance(c, (And, Or)):
        for a in c.args:
            _collect(a, out)


def _eval(c: Constraint, v: Mapping[str, bool]) -> bool:
    if isinstance(c, Const):
        return c.value
    if isinstance(c, Atom):
        return bool(v[c.id])
    if isinstance(c, Not):
        return not _eval(c.arg, v)
    if isinstance(c, And):
        return all(_eval(a, v) for a in c.args)
    if isinstance(c, Or):
        return any(_eval(a, v) for a in c.args)
    raise TypeError(c)


def clause_literals(c: Constraint) -> frozenset[tuple[str, bool]] | None:
    """Literal set if ``c`` is a single clause (disjunction of literals), else ``None``."""
    parts = c.args if isinstance(c, Or) else (c,)
    out = set()
    for p in parts:
        if isinstance(p, Atom):
            out.add((p.id, True))
        elif isinstance(p, Not) and isinstance(p.arg, Atom):
            out.add((p.arg.id, False))
        else:
            return None
    return frozenset(out)


# --------------------------------------------------------------- S-expressions
_PLAIN = re.compile(r"^[A-Za-z0-9_.\-\[\]:/@#+*=<>]+$")


def _quote(tid: str) -> str:
    if _PLAIN.match(tid) and tid not in ("and", "or", "not", "true", "false"):
        return tid
    return "|" + tid.replace("\\", "\\\\").replace("|", "\\|") + "|"


def to_sexpr(c: Constraint) -> str:
    if isinstance(c, Const):
        return "true" if c.value else "false"
    if isinstance(c, Atom):
        return _quote(c.id)
    if isinstance(c, Not):
        return f"(not {to_sexpr(c.arg)})"
    op = "and" if isinstance(c, And) else "or"
    return "(" + op + " " + " ".join(to_sexpr(a) for a in c.args) + ")"


class ParseError(ValueError):
    pass


def _tokens(text: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            out.append(ch)
            i += 1
        elif ch == "|":
            j = i + 1
            buf = []
            while j < len(text) and text[j] != "|":
                if text[j] == "\\" and j + 1 < len(text):
                    j += 1
                buf.append(text[j])
                j += 1
            if j >= len(text):
                raise ParseError("unterminated |quoted| atom")
            out.append("|" + "".join(buf))
            i = j + 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()|":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_sexpr(text: str) -> Constraint:
    """Inverse of :func:`to_sexpr`."""
    toks = _tokens(text)
    pos = 0

    def parse() -> Constraint:
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of constraint")
        tok = toks[pos]
        pos += 1
        if tok == "(":
            if pos >= len(toks):
                raise ParseError("unexpected end after '('")
            op = toks[pos]
            pos += 1
            args = []
            while pos < len(toks) and toks[pos] != ")":
                args.append(parse())
            if pos >= len(toks):
                raise ParseError("missing ')'")
            pos += 1
            if op == "not":
                if len(args) != 1:
                    raise ParseError("'not' takes one argument")
                return Not(args[0])
            if op == "and":
                return And(tuple(args)) if len(args) > 1 else conj(args)
            if op == "or":
                return Or(tuple(args)) if len(args) > 1 else disj(args)
            raise ParseError(f"unknown operator {op!r}")
        if tok == ")":
            raise ParseError("unexpected ')'")
        if tok == "true":
            return TRUE
        if tok == "false":
            return FALSE
        return Atom(tok[1:] if tok.startswith("|") else tok)

    out = parse()
    if pos != len(toks):
        raise ParseError("trailing tokens after constraint")
    return out


# ----------------------------------------------------------- base constraints
def tr_constr(sys: System) -> Constraint:
    """Every local state keeps an outgoing transition; broadcast receives stay total."""
    parts: list[Constraint] = []
    for tmpl in (sys.a, sys.b):
        if tmpl is None:
            continue
        for q in tmpl.states:
            out = tmpl.outgoing(q)
            if not out:
                raise ValueError(f"state {q!r} of {tmpl.role} has no outgoing transition in the input")
            parts.append(disj(Atom(t.id) for t in out))
    if sys.kind is Kind.BROADCAST:
        for act in sys.actions:
            for q in sys.b.states:
                recv = [t for t in sys.b.outgoing(q) if t.dir == "brecv" and t.action == act]
                if recv:
                    parts.append(disj(Atom(t.id) for t in recv))
    return conj(parts)


def pairing_constr(sys: System) -> Constraint:
    """A send survives iff some matching receive survives."""
    send_dir, recv_dir = ("bsend", "brecv") if sys.kind is Kind.BROADCAST else ("send", "recv")
    parts = []
    for act in sys.actions:
        sends = [t for t in sys.transitions if t.dir == send_dir and t.action == act]
        recvs = [Atom(t.id) for t in sys.transitions if t.dir == recv_dir and t.action == act]
        for s in sends:
            a = Atom(s.id)
            parts.append(disj([conj([a, disj(recvs)]), conj([Not(a)] + [Not(r) for r in recvs])]))
    return conj(parts)


def one_hot(atoms: Sequence[str]) -> Constraint:
    return disj(conj([Atom(x)] + [Not(Atom(y)) for y in atoms if y != x]) for x in atoms)


def one_hot_receive(sys: System) -> Constraint:
    """Exactly one receive per (state, action)."""
    recv_dirs = ("recv", "brecv")
    parts = []
    for tmpl in (sys.a, sys.b):
        if tmpl is None:
            continue
        for q in tmpl.states:
            for act in sys.actions:
                opts = [t.id for t in tmpl.outgoing(q) if t.dir in recv_dirs and t.action == act]
                if opts:
                    parts.append(one_hot(opts))
    return conj(parts)


def keep_all(tids: Iterable[str]) -> Constraint:
    return conj(Atom(t) for t in tids)


def tau_constr(sys: System) -> Constraint:
    """Keep every internal transition."""
    return keep_all(t.id for t in sys.transitions if t.dir == "tau")


def blocking_clause(assignment: Mapping[str, bool]) -> Constraint:
    """Exclude exactly this assignment."""
    return disj(Not(Atom(t)) if v else Atom(t) for t, v in sorted(assignment.items()))


# --------------------------------------------------------------- repair steps
class _Builder:
    def __init__(self, sys, re: Sequence[Iterable[Configuration]]):
        self.sys = sys
        self.re = [set(r) for r in re]
        self.memo: dict[tuple[Configuration, int], Constraint] = {}

    def build(self, s: Configuration, depth: int) -> Constraint:
        key = (s, depth)
        if key in self.memo:
            return self.memo[key]
        target_set = self.re[depth]
        last = depth == len(self.re) - 1
        parts: list[Constraint] = []
        seen: set[tuple] = set()
        for st in self.sys.steps(s):
            if st.target not in target_set:
                continue
            key2 = (st.tids, st.target)
            if key2 in seen:
                continue
            seen.add(key2)
            cut = disj(Not(Atom(t)) for t in st.tids)
            parts.append(cut if last else disj([cut, self.build(st.target, depth + 1)]))
        out = conj(parts)
        self.memo[key] = out
        return out


def build_constr(s: Configuration, re: Sequence[Iterable[Configuration]], sys) -> Constraint:
    """Ways for ``s`` to avoid every path through ``re`` = [RE_{k-1}, ..., RE_0].

    With an empty ``re`` the start itself is an error and nothing can be cut.
    """
    if not re:
        return FALSE
    return _Builder(sys, re).build(s, 0)


def build_sync_constr(s: Configuration, re: Sequence[Iterable[Configuration]], sys) -> Constraint:
    """Synchronous variant: a synchronized step is cut by dropping any of its participants.

    Internal steps contribute ``not t``; each synchronized step contributes the
    disjunction of the negated send and receive transitions taking part in it.
    """
    return build_constr(s, re, sys)


def deadlock_constr(path: Sequence[tuple[tuple[str, ...], Configuration]], exits: Iterable[str]) -> Constraint:
    """Cut the deadlock path or keep one of the given exits of the deadlocked configuration.

    ``path`` is a list of ``(tids, target)`` steps ending in the deadlock.
    """
    if not path:
        return TRUE
    cut = [Not(Atom(t)) for tids, _ in path for t in tids]
    return disj(cut + [Atom(e) for e in sorted(set(exits))])


def initial_constraint(sys: System, *, pairing: bool = False, one_hot_recv: bool = False,
                       keep_tau: bool = False, extra: Iterable[Constraint] = ()) -> Constraint:
    parts = [tr_constr(sys)]
    if pairing:
        parts.append(pairing_constr(sys))
    if one_hot_recv:
        parts.append(one_hot_receive(sys))
    if keep_tau:
        parts.append(tau_constr(sys))
    parts.extend(extra)
    return conj(parts)


__all__ = [
    "And", "Atom", "Const", "Constraint", "FALSE", "Not", "Or", "ParseError", "TRUE",
    "blocking_clause", "build_constr", "build_sync_constr", "clause_literals", "conj",
    "deadlock_constr", "disj", "initial_constraint", "keep_all", "neg", "one_hot",
    "one_hot_receive", "pairing_constr", "parse_sexpr", "tau_constr", "to_sexpr", "tr_constr",
    "OrderKind", "UpSet",
]
