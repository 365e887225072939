"""Parameterized deadlock detection for disjunctive systems.

Deadlocked configurations are not upward-closed under the plain covering
order, so the search runs under the zero-pattern refinement (``COVER_ZERO``)
with an over-approximating predecessor that also allows a single local
transition to fire several times when that empties its source or fills its
target.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, replace

from prepair.core import Configuration, OrderKind, UpSet, min_basis
from prepair.mc import ErrorSequence, Verdict, backward_search
from prepair.semantics import Kind, System, Template, Transition, ValidationError, guard_satisfied, split_guards


class SelfGuardError(ValidationError):
    """A B-transition guarded by its own source state blocks deadlock checking."""

    def __init__(self, offenders: list[str]):
        self.offenders = offenders
        super().__init__(
            "deadlock detection needs B-transitions not guarded by their own source state; "
            f"normalize the model first (offending: {', '.join(offenders)})"
        )


def _redundant_self_guard(sys: System, t: Transition) -> bool:
    """A copy (q_i,{q_i},q_j) adds nothing if (q_i,{a},q_j) exists for every controller state a."""
    if not sys.a_states:
        return False
    have = {tr.guard[0] for tr in sys.b.transitions if tr.src == t.src and tr.dst == t.dst and tr.guard}
    return sys.a_states <= have


def check_self_guard_assumption(sys: System) -> list[str]:
    """Labels of B-transitions (q_i,{q_i},q_j) that are not redundant; empty means ok."""
    if sys.kind is not Kind.DISJUNCTIVE:
        raise ValidationError("the self-guard check applies to disjunctive systems")
    out = []
    for t in sys.b.transitions:
        if t.guard == (t.src,) and not _redundant_self_guard(sys, t):
            out.append(t.label())
    return out


def drop_redundant_self_guards(sys: System) -> System:
    """The same system without self-guarded copies that a controller-guarded copy subsumes."""
    drop = {t.id for t in sys.b.transitions if t.guard == (t.src,) and _redundant_self_guard(sys, t)}
    if not drop:
        return sys
    return sys.restrict(t for t in sys.transition_ids if t not in drop)


def _require_ok(sys: System) -> System:
    bad = check_self_guard_assumption(sys)
    if bad:
        raise SelfGuardError(bad)
    return drop_redundant_self_guards(sys)


def deadlock_basis(sys: System) -> UpSet:
    """Minimal deadlocked configurations, one per deadlocked (controller state, support) pair."""
    sys = _require_ok(sys)
    n = sys.nb
    found = []
    for qa in sys.a.states:
        for size in range(1, n + 1):
            for support in itertools.combinations(range(n), size):
                counts = tuple(1 if i in support else 0 for i in range(n))
                c = Configuration(qa, counts)
                if not sys.steps(c):
                    found.append(c)
    return min_basis(found, OrderKind.COVER_ZERO)


def _db_candidates(sys: System, target: Configuration):
    idx = sys.b_index
    c = target.counts
    for t in sys.a.transitions:
        if t.dst != target.a_state:
            continue
        if guard_satisfied(Configuration(t.src, c), t.src, t.guard, sys):
            yield Configuration(t.src, c)
    for t in sys.b.transitions:
        i, j = idx[t.src], idx[t.dst]
        if i == j or c[j] < 1:
            continue
        forms = []
        one = list(c)
        one[i] += 1
        one[j] -= 1
        forms.append(one)
        if c[j] == 1:
            fill = list(c)
            fill[i] += 1
            forms.append(fill)
        k = c[j]
        if k > 1:
            many = list(c)
            many[i] += k
            many[j] -= k
            forms.append(many)
        for f in forms:
            pre = Configuration(target.a_state, tuple(f))
            if guard_satisfied(pre, t.src, t.guard, sys):
                yield pre
    # self-loops never change the counters; they only matter for enabledness


def db_pred(r: UpSet, sys: System) -> UpSet:
    """Basis of the O-predecessors of ``r`` under the zero-pattern order."""
    if r.order is not OrderKind.COVER_ZERO:
        raise ValueError(f"db_pred needs order cover_zero, got {r.order.value}")
    cands = []
    for target in r.basis:
        cands.extend(_db_candidates(sys, target))
    return min_basis(cands, OrderKind.COVER_ZERO)


@dataclass(frozen=True)
class NoDeadlock:
    iterations: int = 0
    capped: bool = False

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Deadlock:
    sequence: ErrorSequence

    def __bool__(self) -> bool:
        return True


def detect_deadlock(sys: System) -> NoDeadlock | Deadlock:
    """Backward search from the deadlock basis, giving up after 2^|B| predecessor rounds."""
    sys = _require_ok(sys)
    basis = deadlock_basis(sys)
    if basis.is_empty():
        return NoDeadlock()
    cap = 2 ** sys.nb
    seq = backward_search(sys, basis, lambda r: db_pred(r, sys), cap=cap)
    if seq.verdict is Verdict.UNSAFE:
        return Deadlock(seq)
    return NoDeadlock(seq.iterations, seq.capped)


def deadlock_witness(sys: System, start: Configuration, limit: int = 200_000):
    """Shortest run from ``start`` to a configuration without steps.

    Returns ``(path, dead)`` with ``path`` a list of ``(tids, target)`` pairs,
    or ``None`` if the instance has no reachable deadlock.
    """
    parent: dict[Configuration, tuple[Configuration, tuple[str, ...]] | None] = {start: None}
    todo = deque([start])
    while todo:
        c = todo.popleft()
        steps = sys.steps(c)
        if not steps:
            path = []
            cur = c
            while parent[cur] is not None:
                prev, tids = parent[cur]
                path.append((tids, cur))
                cur = prev
            return path[::-1], c
        for st in steps:
            if st.target not in parent:
                parent[st.target] = (c, st.tids)
                if len(parent) > limit:
                    raise RuntimeError(f"deadlock witness search exceeded {limit} configurations")
                todo.append(st.target)
    return None


def pending_state(t: Transition) -> str:
    return f"<{t.id}>"


def pr_overapprox(sys: System) -> System:
    """Disjunctive system whose runs include every run of a rendezvous system.

    A rendezvous ``a!``/``a?`` is simulated in three disjunctive moves: the
    sender enters a pending state (guarded by the sources of the receives of
    ``a``), a receiver moves (guarded by that pending state), and the sender
    completes (guarded by the targets of the receives). A pending sender may
    also abort back to its source while a receiver could still take it. Original
    configurations have the same enabled moves in both systems, hence every
    reachable deadlock of the original is a reachable deadlock here. Internal
    transitions are guarded by every state. Derived transitions keep the
    original id in ``origin``.
    """
    if sys.kind is Kind.BROADCAST:
        raise ValidationError("deadlock detection for broadcast systems is undecidable and unsupported")
    if sys.kind is Kind.DISJUNCTIVE:
        return sys
    recvs: dict[str, list[Transition]] = {}
    sends: dict[str, Transition] = {}
    for t in sys.transitions:
        if t.dir == "recv":
            recvs.setdefault(t.action, []).append(t)
        elif t.dir == "send":
            sends[t.action] = t
    pend = {role: tuple(pending_state(t) for t in sys.transitions
                        if t.role == role and t.dir == "send" and recvs.get(t.action)) for role in "AB"}
    a_states = tuple(sys.a.states) + pend["A"]
    b_states = tuple(sys.b.states) + pend["B"]
    every = a_states + b_states

    def convert(t: Transition) -> list[Transition]:
        if t.dir == "tau":
            return [Transition(t.id, t.role, t.src, t.dst, guard=b_states if t.role == "A" else every, origin=t.id)]
        if t.dir == "send":
            partners = recvs.get(t.action, [])
            if not partners:
                return []  # a send without receivers can never fire
            p = pending_state(t)
            srcs = tuple(dict.fromkeys(r.src for r in partners))
            return [
                Transition(t.id, t.role, t.src, p, guard=srcs, origin=t.id),
                Transition(f"{t.id}/done", t.role, p, t.dst, guard=tuple(dict.fromkeys(r.dst for r in partners)),
                           origin=t.id),
                Transition(f"{t.id}/abort", t.role, p, t.src, guard=srcs, origin=t.id),
            ]
        sender = sends.get(t.action)
        if sender is None:
            return []
        return [Transition(t.id, t.role, t.src, t.dst, guard=(pending_state(sender),), origin=t.id)]

    def template(tmpl: Template, states: tuple[str, ...]) -> Template:
        conv = tuple(x for t in tmpl.transitions for x in convert(t))
        split = split_guards(Template(tmpl.role, states, tmpl.init, conv))
        out = tuple(replace(t, origin=t.origin or t.id) for t in split.transitions)
        return replace(split, transitions=out)

    disj = System(Kind.DISJUNCTIVE, template(sys.a, a_states), template(sys.b, b_states),
                  meta={**sys.meta, "overapprox_of": "rendezvous"})
    return drop_redundant_self_guards(disj)


def origin_map(sys: System) -> dict[str, str]:
    return {t.id: t.original_id for t in sys.transitions}


__all__ = [
    "Deadlock",
    "NoDeadlock",
    "SelfGuardError",
    "check_self_guard_assumption",
    "db_pred",
    "deadlock_basis",
    "deadlock_witness",
    "detect_deadlock",
    "drop_redundant_self_guards",
    "origin_map",
    "pending_state",
    "pr_overapprox",
]
