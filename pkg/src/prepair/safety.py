"""Safety properties as a product with a finite automaton and k explicit B-processes.

A product configuration keeps the controller state and the counters of the
anonymous B-processes as usual; ``extra`` holds the automaton state followed
by the local states of the explicitly tracked processes. Those processes are
not part of the counter vector, but they do act as guard witnesses. On every
step the automaton reads the discrete part ``(q_A, explicit states)`` of the
state the step leaves.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable, Iterator, Sequence

from prepair.core import Configuration, OrderKind, UpSet, min_basis
from prepair.semantics import Kind, Step, System, ValidationError

SINK = "__sink__"

Obs = Callable[[str | None, tuple[str, ...]], bool]


# ------------------------------------------------------------- predicates
_TOKEN = re.compile(r"\s*(?:(\()|(\))|(!)|(&)|(\|)|([A-Za-z0-9_.\-']+))")


def parse_obs(text: str, a_states: Iterable[str], b_states: Iterable[str], k: int) -> Obs:
    """Compile an observation predicate.

    Atoms are controller states (``w``), explicit-process states (``nr_1``
    for process 1), ``true`` and ``false``; connectives are ``!``, ``&``, ``|``
    and parentheses.
    """
    a_states, b_states = set(a_states), set(b_states)
    toks: list[tuple[str, str]] = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValidationError(f"bad observation predicate {text!r} at offset {pos}")
        kinds = ("(", ")", "!", "&", "|", "atom")
        for kind, g in zip(kinds, m.groups()):
            if g is not None:
                toks.append((kind, g))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    i = 0

    def atom(name: str) -> Obs:
        if name == "true":
            return lambda qa, ex: True
        if name == "false":
            return lambda qa, ex: False
        if name in a_states:
            return lambda qa, ex: qa == name
        m = re.fullmatch(r"(.+)_(\d+)", name)
        if m and m.group(1) in b_states and 1 <= int(m.group(2)) <= k:
            q, p = m.group(1), int(m.group(2)) - 1
            return lambda qa, ex: ex[p] == q
        raise ValidationError(f"observation atom {name!r} names neither a controller state nor an explicit process state")

    def parse_or() -> Obs:
        nonlocal i
        left = parse_and()
        while i < len(toks) and toks[i][0] == "|":
            i += 1
            right = parse_and()
            left = (lambda l, r: lambda qa, ex: l(qa, ex) or r(qa, ex))(left, right)
        return left

    def parse_and() -> Obs:
        nonlocal i
        left = parse_not()
        while i < len(toks) and toks[i][0] == "&":
            i += 1
            right = parse_not()
            left = (lambda l, r: lambda qa, ex: l(qa, ex) and r(qa, ex))(left, right)
        return left

    def parse_not() -> Obs:
        nonlocal i
        if i >= len(toks):
            raise ValidationError(f"observation predicate {text!r} ends early")
        kind, val = toks[i]
        if kind == "!":
            i += 1
            inner = parse_not()
            return lambda qa, ex: not inner(qa, ex)
        if kind == "(":
            i += 1
            inner = parse_or()
            if i >= len(toks) or toks[i][0] != ")":
                raise ValidationError(f"missing ')' in {text!r}")
            i += 1
            return inner
        if kind == "atom":
            i += 1
            return atom(val)
        raise ValidationError(f"unexpected {val!r} in observation predicate {text!r}")

    out = parse_or()
    if i != len(toks):
        raise ValidationError(f"trailing input in observation predicate {text!r}")
    return out


# -------------------------------------------------------------- automaton
@dataclass(frozen=True)
class AutTransition:
    src: str
    obs: str
    dst: str


@dataclass(frozen=True)
class SafetyAutomaton:
    """Automaton over observations of ``(q_A, explicit B-states)``; reaching ``accepting`` is a violation."""

    states: tuple[str, ...]
    init: str
    accepting: tuple[str, ...]
    transitions: tuple[AutTransition, ...]

    def validate(self) -> None:
        known = set(self.states)
        if self.init not in known:
            raise ValidationError(f"automaton init {self.init!r} is not a state")
        for q in self.accepting:
            if q not in known:
                raise ValidationError(f"accepting state {q!r} is not a state")
        for t in self.transitions:
            if t.src not in known or t.dst not in known:
                raise ValidationError(f"automaton transition {t.src}->{t.dst} uses an unknown state")
        if SINK in known:
            raise ValidationError(f"state name {SINK!r} is reserved")

    def compile(self, sys: System, k: int) -> "CompiledAutomaton":
        self.validate()
        b_states = sys.b.states
        a_states = sys.a.states if sys.a else ()
        preds = [(t.src, parse_obs(t.obs, a_states, b_states, k), t.dst) for t in self.transitions]
        return CompiledAutomaton(self, preds)


class CompiledAutomaton:
    """Automaton with parsed predicates, completed by a non-accepting sink."""

    def __init__(self, aut: SafetyAutomaton, preds):
        self.aut = aut
        self.preds = preds
        self.states = tuple(aut.states) + (SINK,)
        self.init = aut.init
        self.accepting = frozenset(aut.accepting)

    def step(self, q: str, qa: str | None, explicit: Sequence[str]) -> list[str]:
        if q == SINK:
            return [SINK]
        ex = tuple(explicit)
        out = [dst for src, p, dst in self.preds if src == q and p(qa, ex)]
        return list(dict.fromkeys(out)) or [SINK]

    def back(self, q2: str, qa: str | None, explicit: Sequence[str]) -> list[str]:
        return [q for q in self.states if q2 in self.step(q, qa, explicit)]


# ------------------------------------------------------------------ product
@dataclass(frozen=True)
class ProductSystem:
    """Counter system of ``base x B^k x automaton`` under the product order."""

    base: System
    automaton: CompiledAutomaton = field(compare=False)
    k: int

    def __post_init__(self):
        if self.base.kind is not Kind.DISJUNCTIVE:
            raise ValidationError("safety products are defined for disjunctive systems")
        if self.k < 0:
            raise ValidationError("k must be nonnegative")

    # delegation used by constraint builders and the repair loop
    @property
    def kind(self) -> Kind:
        return self.base.kind

    @property
    def a(self):
        return self.base.a

    @property
    def b(self):
        return self.base.b

    @property
    def nb(self) -> int:
        return self.base.nb

    @property
    def transitions(self):
        return self.base.transitions

    @property
    def transition_ids(self) -> list[str]:
        return self.base.transition_ids

    @property
    def actions(self):
        return self.base.actions

    @property
    def by_id(self):
        return self.base.by_id

    def transition(self, tid: str):
        return self.base.transition(tid)

    @property
    def order(self) -> OrderKind:
        return OrderKind.PRODUCT

    @property
    def b_index(self):
        return self.base.b_index

    def restrict(self, keep: Iterable[str]) -> "ProductSystem":
        return replace(self, base=self.base.restrict(keep))

    # ------------------------------------------------------------- helpers
    def _occ(self, counts: Sequence[int], explicit: Sequence[str], q: str) -> int:
        return counts[self.base.b_index[q]] + sum(1 for e in explicit if e == q)

    def _b_guard(self, qa, counts, explicit, t) -> bool:
        """Guard of B-transition ``t`` for a mover already placed at ``t.src``."""
        (g,) = t.guard
        if g in self.base.a_states:
            return qa == g
        return self._occ(counts, explicit, g) - (1 if g == t.src else 0) >= 1

    def _a_guard(self, counts, explicit, t) -> bool:
        (g,) = t.guard
        return g in self.base.b_index and self._occ(counts, explicit, g) >= 1

    # ----------------------------------------------------------- semantics
    def base_steps(self, s: Configuration) -> Iterator[tuple[str, str | None, tuple[int, ...], tuple[str, ...]]]:
        qa, c = s.a_state, s.counts
        ex = tuple(s.extra[1:])
        idx = self.base.b_index
        for t in self.base._a_out.get(qa, ()):
            if self._a_guard(c, ex, t):
                yield t.id, t.dst, c, ex
        for q, n in zip(self.base.b.states, c):
            if n == 0:
                continue
            for t in self.base._b_out[q]:
                if self._b_guard(qa, c, ex, t):
                    nc = list(c)
                    nc[idx[t.src]] -= 1
                    nc[idx[t.dst]] += 1
                    yield t.id, qa, tuple(nc), ex
        for p, q in enumerate(ex):
            for t in self.base._b_out[q]:
                if self._b_guard(qa, c, ex, t):
                    nex = ex[:p] + (t.dst,) + ex[p + 1:]
                    yield t.id, qa, c, nex

    def steps(self, s: Configuration) -> list[Step]:
        out = []
        aut_q = s.extra[0]
        nexts = self.automaton.step(aut_q, s.a_state, s.extra[1:])
        for tid, qa, c, ex in self.base_steps(s):
            for q2 in nexts:
                out.append(Step((tid,), Configuration(qa, c, (q2,) + ex)))
        return out

    def pred_candidates(self, target: Configuration) -> Iterator[Configuration]:
        idx = self.base.b_index
        qa2, c2 = target.a_state, target.counts
        aut2, ex2 = target.extra[0], tuple(target.extra[1:])
        n = self.base.nb

        def emit(qa, counts, ex):
            for q in self.automaton.back(aut2, qa, ex):
                yield Configuration(qa, tuple(counts), (q,) + tuple(ex))

        def lift_b(qa, counts, ex, t):
            (g,) = t.guard
            if g in self.base.a_states:
                return counts if qa == g else None
            need = 2 if g == t.src else 1
            have = self._occ(counts, ex, g)
            if have >= need:
                return counts
            out = list(counts)
            out[idx[g]] += need - have
            return out

        for t in self.base.a.transitions:
            if t.dst != qa2:
                continue
            (g,) = t.guard
            if g not in idx:
                continue
            counts = list(c2)
            if self._occ(counts, ex2, g) < 1:
                counts[idx[g]] = 1
            yield from emit(t.src, counts, ex2)
        for t in self.base.b.transitions:
            i, j = idx[t.src], idx[t.dst]
            # a counted process moves
            d = [max(c2[x] - (1 if x == j else 0) + (1 if x == i else 0), 1 if x == i else 0) for x in range(n)]
            d = lift_b(qa2, d, ex2, t)
            if d is not None:
                yield from emit(qa2, d, ex2)
            # an explicit process moves
            for p, q in enumerate(ex2):
                if q != t.dst:
                    continue
                ex = ex2[:p] + (t.src,) + ex2[p + 1:]
                d = lift_b(qa2, list(c2), ex, t)
                if d is not None:
                    yield from emit(qa2, d, ex)

    def is_initial(self, c: Configuration) -> bool:
        base = self.base
        if c.a_state != base.a.init or c.extra[0] != self.automaton.init:
            return False
        if any(e != base.b.init for e in c.extra[1:]):
            return False
        return all(n == 0 for q, n in zip(base.b.states, c.counts) if q != base.b.init)

    def initial_cover(self, b: Configuration) -> Configuration | None:
        return b if self.is_initial(b) else None

    def initial_configs(self, n: int) -> list[Configuration]:
        base = self.base
        counts = [0] * base.nb
        counts[base.b_index[base.b.init]] = n
        return [Configuration(base.a.init, tuple(counts), (self.automaton.init,) + (base.b.init,) * self.k)]

    def extra_values(self) -> list[tuple[str, ...]]:
        return [(q,) + ex for q in self.automaton.states for ex in itertools.product(self.base.b.states, repeat=self.k)]

    def error_basis(self) -> UpSet:
        zero = (0,) * self.base.nb
        out = []
        for qa in self.base.a.states:
            for ex in itertools.product(self.base.b.states, repeat=self.k):
                for q in sorted(self.automaton.accepting):
                    out.append(Configuration(qa, zero, (q,) + ex))
        return min_basis(out, OrderKind.PRODUCT)


def product(sys: System, k: int, aut: SafetyAutomaton) -> tuple[ProductSystem, UpSet]:
    """The product system and its error basis (automaton in an accepting state)."""
    p = ProductSystem(sys, aut.compile(sys, k), k)
    return p, p.error_basis()


def format_product_config(c: Configuration, sys: ProductSystem) -> str:
    ex = ",".join(f"{q}_{i + 1}" for i, q in enumerate(c.extra[1:]))
    counts = ",".join(map(str, c.counts))
    inner = ",".join(x for x in (c.a_state or "", ex, f"({counts})") if x)
    return f"(({inner}),{c.extra[0]})"


__all__ = [
    "AutTransition",
    "CompiledAutomaton",
    "ProductSystem",
    "SINK",
    "SafetyAutomaton",
    "format_product_config",
    "parse_obs",
    "product",
]
