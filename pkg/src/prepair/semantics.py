"""Executable semantics of disjunctive, pairwise-rendezvous and broadcast counter systems."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from prepair.core import Configuration, OrderKind

SYNC_DIRS = ("send", "recv", "bsend", "brecv", "tau")


class ValidationError(ValueError):
    """The input system violates a structural requirement."""


class Kind(enum.Enum):
    DISJUNCTIVE = "disjunctive"
    RENDEZVOUS = "rendezvous"
    BROADCAST = "broadcast"


@dataclass(frozen=True)
class Transition:
    """A local transition of template A or B.

    Disjunctive transitions carry a ``guard``; synchronizing ones carry an
    ``action`` and a ``dir`` (``tau`` transitions have ``action=None``).
    ``origin`` names the transition this one was split from, if any.
    """

    id: str
    role: str
    src: str
    dst: str
    guard: tuple[str, ...] | None = None
    action: str | None = None
    dir: str | None = None
    origin: str | None = None

    @property
    def original_id(self) -> str:
        return self.origin or self.id

    @property
    def is_sync(self) -> bool:
        return self.dir is not None

    def label(self) -> str:
        if self.guard is not None:
            g = ",".join(self.guard)
            return f"({self.src},{{{g}}},{self.dst})"
        if self.dir == "tau":
            name = self.action or "tau"
            return f"({self.src},{name},{self.dst})"
        mark = {"send": "!", "recv": "?", "bsend": "!!", "brecv": "??"}[self.dir]
        return f"({self.src},{self.action}{mark},{self.dst})"


@dataclass(frozen=True)
class Template:
    role: str
    states: tuple[str, ...]
    init: str
    transitions: tuple[Transition, ...]

    def outgoing(self, state: str) -> list[Transition]:
        return [t for t in self.transitions if t.src == state]


@dataclass(frozen=True)
class Step:
    """One global step: the local transitions that fire and the resulting configuration."""

    tids: tuple[str, ...]
    target: Configuration


def split_guards(t: Template) -> Template:
    """Replace every guard of size m by m singleton-guarded copies, in guard order."""
    out: list[Transition] = []
    for tr in t.transitions:
        if tr.guard is None:
            out.append(tr)
            continue
        if not tr.guard:
            raise ValidationError(f"transition {tr.id} has an empty guard")
        if len(tr.guard) == 1:
            out.append(tr)
            continue
        for g in tr.guard:
            out.append(replace(tr, id=f"{tr.id}[{g}]", guard=(g,), origin=tr.original_id))
    return replace(t, transitions=tuple(out))


@dataclass(frozen=True)
class System:
    """A parameterized system ``A || B^n`` (or ``B^n`` for broadcast) over split transitions.

    ``completed`` lists receive transitions that were added implicitly to make
    broadcast receives total.
    """

    kind: Kind
    a: Template | None
    b: Template
    completed: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    # ------------------------------------------------------------------ lookup
    @cached_property
    def b_index(self) -> dict[str, int]:
        return {q: i for i, q in enumerate(self.b.states)}

    @cached_property
    def a_states(self) -> frozenset[str]:
        return frozenset(self.a.states) if self.a else frozenset()

    @cached_property
    def b_states(self) -> frozenset[str]:
        return frozenset(self.b.states)

    @property
    def nb(self) -> int:
        return len(self.b.states)

    @cached_property
    def transitions(self) -> tuple[Transition, ...]:
        return (self.a.transitions if self.a else ()) + self.b.transitions

    @cached_property
    def by_id(self) -> dict[str, Transition]:
        return {t.id: t for t in self.transitions}

    @property
    def transition_ids(self) -> list[str]:
        return [t.id for t in self.transitions]

    def transition(self, tid: str) -> Transition:
        try:
            return self.by_id[tid]
        except KeyError:
            raise KeyError(f"unknown transition {tid!r}") from None

    @property
    def order(self) -> OrderKind:
        return OrderKind.COVER

    @cached_property
    def actions(self) -> tuple[str, ...]:
        acts = {t.action for t in self.transitions if t.dir in ("send", "recv", "bsend", "brecv")}
        return tuple(sorted(a for a in acts if a is not None))

    @cached_property
    def _b_out(self) -> dict[str, list[Transition]]:
        out: dict[str, list[Transition]] = {q: [] for q in self.b.states}
        for t in self.b.transitions:
            out[t.src].append(t)
        return out

    @cached_property
    def _a_out(self) -> dict[str, list[Transition]]:
        out: dict[str, list[Transition]] = {q: [] for q in (self.a.states if self.a else ())}
        if self.a:
            for t in self.a.transitions:
                out[t.src].append(t)
        return out

    def _by_dir(self, role: str, direction: str) -> list[Transition]:
        tmpl = self.a if role == "A" else self.b
        if tmpl is None:
            return []
        return [t for t in tmpl.transitions if t.dir == direction]

    # --------------------------------------------------------------- validation
    def validate(self, require_total: bool = True) -> None:
        if self.kind is Kind.BROADCAST:
            if self.a is not None:
                raise ValidationError("broadcast systems have no controller template A")
        elif self.a is None:
            raise ValidationError(f"{self.kind.value} systems need a template A")
        if self.a and self.a_states & self.b_states:
            both = sorted(self.a_states & self.b_states)
            raise ValidationError(f"state names shared by A and B: {both}")
        ids = [t.id for t in self.transitions]
        dup = sorted({x for x in ids if ids.count(x) > 1})
        if dup:
            raise ValidationError(f"duplicate transition ids: {dup}")
        all_states = self.a_states | self.b_states
        for tmpl in (self.a, self.b):
            if tmpl is None:
                continue
            if tmpl.init not in tmpl.states:
                raise ValidationError(f"init state {tmpl.init!r} of {tmpl.role} is not a state")
            for t in tmpl.transitions:
                if t.src not in tmpl.states or t.dst not in tmpl.states:
                    raise ValidationError(f"transition {t.id} leaves template {tmpl.role}")
                if self.kind is Kind.DISJUNCTIVE:
                    if t.guard is None or t.is_sync:
                        raise ValidationError(f"transition {t.id} must carry a guard")
                    if len(t.guard) != 1:
                        raise ValidationError(f"transition {t.id} has a non-singleton guard")
                    unknown = set(t.guard) - all_states
                    if unknown:
                        raise ValidationError(f"transition {t.id} guards on unknown states {sorted(unknown)}")
                else:
                    if t.guard is not None or t.dir not in SYNC_DIRS:
                        raise ValidationError(f"transition {t.id} must carry an action and a dir")
                    legal = ("send", "recv", "tau") if self.kind is Kind.RENDEZVOUS else ("bsend", "brecv", "tau")
                    if t.dir not in legal:
                        raise ValidationError(f"transition {t.id}: dir {t.dir!r} is illegal in {self.kind.value} systems")
                    if t.dir != "tau" and not t.action:
                        raise ValidationError(f"transition {t.id} needs an action name")
            if require_total:
                for q in tmpl.states:
                    if not tmpl.outgoing(q):
                        raise ValidationError(f"state {q!r} of {tmpl.role} has no outgoing transition")
        if self.kind is not Kind.DISJUNCTIVE:
            senders: dict[str, list[str]] = {}
            for t in self.transitions:
                if t.dir in ("send", "bsend"):
                    senders.setdefault(t.action, []).append(t.id)
            for act, ts in senders.items():
                if len(ts) > 1:
                    raise ValidationError(f"action {act!r} is sent by several transitions {ts}; rename them apart")
        if self.kind is Kind.BROADCAST and require_total:
            missing = self.missing_receives()
            if missing:
                raise ValidationError(f"broadcast receives are not total: {missing}")

    def missing_receives(self) -> list[tuple[str, str]]:
        """(action, state) pairs with no broadcast receive transition."""
        out = []
        for act in self.actions:
            for q in self.b.states:
                if not any(t.dir == "brecv" and t.action == act for t in self._b_out[q]):
                    out.append((act, q))
        return out

    # ---------------------------------------------------------------- semantics
    def is_initial(self, c: Configuration) -> bool:
        init = self.b.init
        for q, n in zip(self.b.states, c.counts):
            if q != init and n != 0:
                return False
        if self.kind is Kind.BROADCAST:
            return c.counts[self.b_index[init]] > 0
        return c.a_state == self.a.init

    def initial_config(self, n: int) -> Configuration:
        counts = [0] * self.nb
        counts[self.b_index[self.b.init]] = n
        return Configuration(self.a.init if self.a else None, tuple(counts))

    def steps(self, s: Configuration) -> list[Step]:
        if self.kind is Kind.DISJUNCTIVE:
            return list(_disj_steps(self, s))
        if self.kind is Kind.RENDEZVOUS:
            return list(_pr_steps(self, s))
        return list(_bc_steps(self, s))

    def pred_candidates(self, target: Configuration) -> Iterator[Configuration]:
        """Minimal predecessors of the cover-cone above ``target``, one batch per move."""
        if self.kind is Kind.DISJUNCTIVE:
            return _disj_pred(self, target)
        if self.kind is Kind.RENDEZVOUS:
            return _pr_pred(self, target)
        return _bc_pred(self, target)

    def restrict(self, keep: Iterable[str]) -> "System":
        return restrict(self, keep)


# --------------------------------------------------------------------- guards
def guard_satisfied(s: Configuration, source: str, guard, sys: System) -> bool:
    """Disjunctive guard evaluation for a singleton guard, conditions (a)-(d)."""
    if len(guard) != 1:
        raise ValueError("guard_satisfied expects a singleton guard")
    (g,) = tuple(guard)
    idx = sys.b_index
    if source in sys.a_states:
        # (a): the controller moves and some B-process sits in g
        return g in idx and s.counts[idx[g]] >= 1
    i = idx[source]
    if s.counts[i] < 1:
        return False
    if g in sys.a_states:
        return s.a_state == g  # (b)
    if g == source:
        return s.counts[i] >= 2  # (d)
    return s.counts[idx[g]] >= 1  # (c)


def _moved(counts: tuple[int, ...], i: int, j: int) -> tuple[int, ...]:
    out = list(counts)
    out[i] -= 1
    out[j] += 1
    return tuple(out)


def _disj_steps(sys: System, s: Configuration) -> Iterator[Step]:
    idx = sys.b_index
    for t in sys._a_out.get(s.a_state, ()):
        if guard_satisfied(s, t.src, t.guard, sys):
            yield Step((t.id,), Configuration(t.dst, s.counts, s.extra))
    for q, n in zip(sys.b.states, s.counts):
        if n == 0:
            continue
        for t in sys._b_out[q]:
            if guard_satisfied(s, t.src, t.guard, sys):
                yield Step((t.id,), Configuration(s.a_state, _moved(s.counts, idx[t.src], idx[t.dst]), s.extra))


def _pr_steps(sys: System, s: Configuration) -> Iterator[Step]:
    idx = sys.b_index
    c = s.counts
    a_out = sys._a_out.get(s.a_state, [])
    for t in a_out:
        if t.dir == "tau":
            yield Step((t.id,), Configuration(t.dst, c))
    for q, n in zip(sys.b.states, c):
        if n == 0:
            continue
        for t in sys._b_out[q]:
            if t.dir == "tau":
                yield Step((t.id,), Configuration(s.a_state, _moved(c, idx[t.src], idx[t.dst])))
    b_send = [t for t in sys.b.transitions if t.dir == "send" and c[idx[t.src]] >= 1]
    b_recv = [t for t in sys.b.transitions if t.dir == "recv" and c[idx[t.src]] >= 1]
    for ta in a_out:
        if ta.dir == "send":
            for tb in b_recv:
                if tb.action == ta.action:
                    yield Step((ta.id, tb.id), Configuration(ta.dst, _moved(c, idx[tb.src], idx[tb.dst])))
        elif ta.dir == "recv":
            for tb in b_send:
                if tb.action == ta.action:
                    yield Step((tb.id, ta.id), Configuration(ta.dst, _moved(c, idx[tb.src], idx[tb.dst])))
    for ts in b_send:
        for tr in b_recv:
            if tr.action != ts.action:
                continue
            i, l = idx[ts.src], idx[tr.src]
            if i == l and c[i] < 2:
                continue
            nc = _moved(_moved(c, i, idx[ts.dst]), l, idx[tr.dst])
            yield Step((ts.id, tr.id), Configuration(s.a_state, nc))


def _compositions(m: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All ways to write m as an ordered sum of ``parts`` nonnegative integers."""
    if parts == 1:
        yield (m,)
        return
    for first in range(m, -1, -1):
        for rest in _compositions(m - first, parts - 1):
            yield (first,) + rest


def _bc_receivers(sys: System, action: str) -> dict[str, list[Transition]]:
    out: dict[str, list[Transition]] = {q: [] for q in sys.b.states}
    for t in sys.b.transitions:
        if t.dir == "brecv" and t.action == action:
            out[t.src].append(t)
    return out


def _bc_steps(sys: System, s: Configuration) -> Iterator[Step]:
    idx = sys.b_index
    c = s.counts
    for q, n in zip(sys.b.states, c):
        if n == 0:
            continue
        for t in sys._b_out[q]:
            if t.dir == "tau":
                yield Step((t.id,), Configuration(None, _moved(c, idx[t.src], idx[t.dst])))
    for ts in sys.b.transitions:
        if ts.dir != "bsend" or c[idx[ts.src]] < 1:
            continue
        rest = list(c)
        rest[idx[ts.src]] -= 1
        recv = _bc_receivers(sys, ts.action)
        choices: list[list[tuple[tuple[str, ...], tuple[int, ...]]]] = []
        blocked = False
        for q, m in zip(sys.b.states, rest):
            opts = recv[q]
            if m == 0:
                choices.append([((), (0,) * sys.nb)])
                continue
            if not opts:
                blocked = True
                break
            per_q = []
            for split in _compositions(m, len(opts)):
                used = tuple(o.id for o, k in zip(opts, split) if k > 0)
                vec = [0] * sys.nb
                for o, k in zip(opts, split):
                    vec[idx[o.dst]] += k
                per_q.append((used, tuple(vec)))
            choices.append(per_q)
        if blocked:
            continue
        for combo in itertools.product(*choices):
            used = tuple(sorted(x for u, _ in combo for x in u))
            vec = [0] * sys.nb
            for _, v in combo:
                for k, x in enumerate(v):
                    vec[k] += x
            vec[idx[ts.dst]] += 1
            yield Step((ts.id,) + used, Configuration(None, tuple(vec)))


def broadcast_matrix(sys: System, action: str) -> np.ndarray:
    """Column-stochastic 0/1 matrix of the deterministic receive map of ``action``."""
    n = sys.nb
    m = np.zeros((n, n), dtype=np.int64)
    recv = _bc_receivers(sys, action)
    for q, opts in recv.items():
        if len(opts) != 1:
            raise ValidationError(f"receive of {action!r} at {q!r} is not deterministic")
        m[sys.b_index[opts[0].dst], sys.b_index[q]] = 1
    return m


def broadcast_successor(sys: System, c: Sequence[int], sender: str) -> tuple[int, ...]:
    """``M_a (c - u_i) + u_j`` for the broadcast send ``sender``."""
    t = sys.transition(sender)
    i, j = sys.b_index[t.src], sys.b_index[t.dst]
    vec = np.asarray(c, dtype=np.int64).copy()
    vec[i] -= 1
    out = broadcast_matrix(sys, t.action) @ vec
    out[j] += 1
    return tuple(int(x) for x in out)


# ------------------------------------------------------------ pred candidates
def _lift(c: tuple[int, ...], pos: int, at_least: int) -> tuple[int, ...]:
    if c[pos] >= at_least:
        return c
    out = list(c)
    out[pos] = at_least
    return tuple(out)


def _undo(c: Sequence[int], src: Sequence[int], dst: Sequence[int]) -> tuple[int, ...]:
    """Least vector d with d >= src and d - src + dst >= c."""
    return tuple(max(x - y + z, z) for x, y, z in zip(c, dst, src))


def _unit(n: int, *positions: int) -> list[int]:
    v = [0] * n
    for p in positions:
        v[p] += 1
    return v


def _disj_pred(sys: System, target: Configuration) -> Iterator[Configuration]:
    idx = sys.b_index
    c = target.counts
    n = sys.nb
    for t in sys.a.transitions:
        if t.dst != target.a_state:
            continue
        (g,) = tuple(t.guard)
        if g not in idx:
            continue  # an A-transition guarded by an A-state is never enabled
        yield Configuration(t.src, _lift(c, idx[g], 1), target.extra)
    for t in sys.b.transitions:
        i, j = idx[t.src], idx[t.dst]
        d = _undo(c, _unit(n, i), _unit(n, j))
        (g,) = tuple(t.guard)
        if g in sys.a_states:
            if g != target.a_state:
                continue
        elif idx[g] == i:
            d = _lift(d, i, 2)
        else:
            d = _lift(d, idx[g], 1)
        yield Configuration(target.a_state, d, target.extra)


def _pr_pred(sys: System, target: Configuration) -> Iterator[Configuration]:
    idx = sys.b_index
    c = target.counts
    n = sys.nb
    for t in sys.a.transitions:
        if t.dir == "tau" and t.dst == target.a_state:
            yield Configuration(t.src, c)
    for t in sys.b.transitions:
        if t.dir == "tau":
            yield Configuration(target.a_state, _undo(c, _unit(n, idx[t.src]), _unit(n, idx[t.dst])))
    for ta in sys.a.transitions:
        if ta.dir not in ("send", "recv") or ta.dst != target.a_state:
            continue
        partner = "recv" if ta.dir == "send" else "send"
        for tb in sys.b.transitions:
            if tb.dir == partner and tb.action == ta.action:
                yield Configuration(ta.src, _undo(c, _unit(n, idx[tb.src]), _unit(n, idx[tb.dst])))
    for ts in sys.b.transitions:
        if ts.dir != "send":
            continue
        for tr in sys.b.transitions:
            if tr.dir == "recv" and tr.action == ts.action:
                src = _unit(n, idx[ts.src], idx[tr.src])
                dst = _unit(n, idx[ts.dst], idx[tr.dst])
                yield Configuration(target.a_state, _undo(c, src, dst))


def _bc_pred(sys: System, target: Configuration) -> Iterator[Configuration]:
    idx = sys.b_index
    c = target.counts
    n = sys.nb
    for t in sys.b.transitions:
        if t.dir == "tau":
            yield Configuration(None, _undo(c, _unit(n, idx[t.src]), _unit(n, idx[t.dst])))
    for ts in sys.b.transitions:
        if ts.dir != "bsend":
            continue
        i, j = idx[ts.src], idx[ts.dst]
        demand = list(c)
        demand[j] = max(demand[j] - 1, 0)
        recv = _bc_receivers(sys, ts.action)
        if any(not opts for opts in recv.values()):
            raise ValidationError(f"broadcast receives of {ts.action!r} are not total")
        # sources able to feed each target state
        feeders: list[list[int]] = [[] for _ in range(n)]
        for q, opts in recv.items():
            for o in opts:
                p = idx[q]
                if p not in feeders[idx[o.dst]]:
                    feeders[idx[o.dst]].append(p)
        per_target = []
        ok = True
        for q in range(n):
            if demand[q] == 0:
                per_target.append([tuple([0] * n)])
                continue
            if not feeders[q]:
                ok = False
                break
            opts = []
            for split in _compositions(demand[q], len(feeders[q])):
                v = [0] * n
                for p, k in zip(feeders[q], split):
                    v[p] += k
                opts.append(tuple(v))
            per_target.append(opts)
        if not ok:
            continue
        for combo in itertools.product(*per_target):
            v = [sum(col) for col in zip(*combo)]
            v[i] += 1
            yield Configuration(None, tuple(v))


# ------------------------------------------------------------------ utilities
def enabled_local(s: Configuration, sys: System) -> set[str]:
    """Ids of all local transitions that take part in some step from ``s``."""
    out: set[str] = set()
    for st in sys.steps(s):
        out.update(st.tids)
    return out


def successor(s: Configuration, tid: str, sys, partner: str | None = None) -> Configuration:
    """Configuration reached from ``s`` by firing ``tid``.

    For synchronizing sends with several possible partners or receive
    distributions, ``partner`` (a receive id) narrows the choice; an
    ambiguous request raises ``ValueError``.
    """
    results = {st.target for st in sys.steps(s) if tid in st.tids and (partner is None or partner in st.tids)}
    if not results:
        raise ValueError(f"transition {tid} is not enabled in {s}")
    if len(results) > 1:
        raise ValueError(f"firing {tid} in {s} is ambiguous: {sorted(map(str, results))}")
    return results.pop()


def succ_set(r: Iterable[Configuration], sys) -> set[Configuration]:
    out: set[Configuration] = set()
    for s in r:
        out.update(st.target for st in sys.steps(s))
    return out


def restrict(sys: System, keep: Iterable[str]) -> System:
    """The system with exactly the transitions in ``keep``."""
    keep = set(keep)
    unknown = keep - set(sys.by_id)
    if unknown:
        raise KeyError(f"unknown transitions {sorted(unknown)}")
    a = replace(sys.a, transitions=tuple(t for t in sys.a.transitions if t.id in keep)) if sys.a else None
    b = replace(sys.b, transitions=tuple(t for t in sys.b.transitions if t.id in keep))
    return System(sys.kind, a, b, tuple(x for x in sys.completed if x in keep), dict(sys.meta))
