"""Brute-force explicit-state reference semantics for differential testing.

Everything here works on concrete process tuples ``(q_A, (q_1, ..., q_n))``
and re-derives the transition rules from their definitions, so it shares no
successor or predecessor code with the symbolic engine.
"""

from __future__ import annotations

import itertools
from collections import deque
from typing import Iterable, Iterator

from prepair.core import Configuration, OrderKind, UpSet

DEFAULT_LIMIT = 10**6


class StateSpaceLimit(RuntimeError):
    """The explicit state space grew past the configured bound."""


def _leq(a: Configuration, b: Configuration, order: OrderKind) -> bool:
    if a.a_state != b.a_state or len(a.counts) != len(b.counts):
        return False
    if order is OrderKind.PRODUCT and a.extra != b.extra:
        return False
    for x, y in zip(a.counts, b.counts):
        if x > y:
            return False
        if order is OrderKind.COVER_ZERO and (x == 0) != (y == 0):
            return False
    return True


def in_upset(r: UpSet, c: Configuration) -> bool:
    return any(_leq(b, c, r.order) for b in r.basis)


# ------------------------------------------------------------ concrete moves
def _kind(sys) -> str:
    base = getattr(sys, "base", sys)
    return base.kind.value


def _base(sys):
    return getattr(sys, "base", sys)


def concrete_moves(sys, qa, procs: tuple[str, ...]) -> Iterator[tuple[str | None, tuple[str, ...]]]:
    """Successor process tuples of one concrete global state."""
    base = _base(sys)
    kind = _kind(sys)
    a_tr = base.a.transitions if base.a else ()
    b_tr = base.b.transitions
    n = len(procs)
    if kind == "disjunctive":
        for t in a_tr:
            if t.src == qa and any(p in t.guard for p in procs):
                yield t.dst, procs
        for k in range(n):
            for t in b_tr:
                if t.src != procs[k]:
                    continue
                others = procs[:k] + procs[k + 1:]
                if qa in t.guard or any(p in t.guard for p in others):
                    yield qa, procs[:k] + (t.dst,) + procs[k + 1:]
        return
    if kind == "rendezvous":
        for t in a_tr:
            if t.src == qa and t.dir == "tau":
                yield t.dst, procs
        for k in range(n):
            for t in b_tr:
                if t.src == procs[k] and t.dir == "tau":
                    yield qa, procs[:k] + (t.dst,) + procs[k + 1:]
        # participants: -1 stands for the controller
        parts = [-1] + list(range(n))

        def local(p):
            return qa if p == -1 else procs[p]

        def trans(p):
            return a_tr if p == -1 else b_tr

        for s, r in itertools.permutations(parts, 2):
            for ts in trans(s):
                if ts.dir != "send" or ts.src != local(s):
                    continue
                for tr in trans(r):
                    if tr.dir != "recv" or tr.src != local(r) or tr.action != ts.action:
                        continue
                    nqa = qa
                    new = list(procs)
                    for p, t in ((s, ts), (r, tr)):
                        if p == -1:
                            nqa = t.dst
                        else:
                            new[p] = t.dst
                    yield nqa, tuple(new)
        return
    if kind == "broadcast":
        for k in range(n):
            for t in b_tr:
                if t.src == procs[k] and t.dir == "tau":
                    yield None, procs[:k] + (t.dst,) + procs[k + 1:]
        for k in range(n):
            for ts in b_tr:
                if ts.dir != "bsend" or ts.src != procs[k]:
                    continue
                options = []
                for m in range(n):
                    if m == k:
                        options.append([ts.dst])
                        continue
                    dsts = [t.dst for t in b_tr if t.dir == "brecv" and t.action == ts.action and t.src == procs[m]]
                    options.append(dsts)
                if any(not o for o in options):
                    continue
                for combo in itertools.product(*options):
                    yield None, tuple(combo)
        return
    raise ValueError(f"unknown system kind {kind}")


def to_config(sys, qa, procs: Iterable[str]) -> Configuration:
    base = _base(sys)
    counts = [0] * len(base.b.states)
    pos = {q: i for i, q in enumerate(base.b.states)}
    for p in procs:
        counts[pos[p]] += 1
    return Configuration(qa, tuple(counts))


def representative(sys, c: Configuration) -> tuple[str | None, tuple[str, ...]]:
    base = _base(sys)
    procs: list[str] = []
    for q, k in zip(base.b.states, c.counts):
        procs.extend([q] * k)
    return c.a_state, tuple(procs)


# ---------------------------------------------------------- product support
def _product_moves(psys, c: Configuration) -> Iterator[Configuration]:
    """Concrete successors of a product configuration (explicit processes first)."""
    aut_state, explicit = c.extra[0], tuple(c.extra[1:])
    qa, counted = representative(psys, c)
    k = len(explicit)
    procs = explicit + counted
    nexts = psys.automaton.step(aut_state, qa, explicit)
    for nqa, nprocs in concrete_moves(psys, qa, procs):
        nexp, ncount = nprocs[:k], nprocs[k:]
        base_c = to_config(psys, nqa, ncount)
        for q2 in nexts:
            yield Configuration(nqa, base_c.counts, (q2,) + tuple(nexp))


def config_successors(sys, c: Configuration) -> set[Configuration]:
    if hasattr(sys, "automaton"):
        return set(_product_moves(sys, c))
    qa, procs = representative(sys, c)
    return {to_config(sys, nqa, np_) for nqa, np_ in concrete_moves(sys, qa, procs)}


# ------------------------------------------------------------ public oracles
def _initial_concrete(sys, n: int) -> list[Configuration]:
    if hasattr(sys, "automaton"):
        return sys.initial_configs(n)
    base = _base(sys)
    counts = [0] * len(base.b.states)
    counts[base.b.states.index(base.b.init)] = n
    return [Configuration(base.a.init if base.a else None, tuple(counts))]


def reachable(sys, n: int, limit: int = DEFAULT_LIMIT) -> set[Configuration]:
    """All counter configurations reachable in the instance with ``n`` counted B-processes."""
    seen = set(_initial_concrete(sys, n))
    todo = deque(seen)
    while todo:
        c = todo.popleft()
        for d in config_successors(sys, c):
            if d not in seen:
                seen.add(d)
                if len(seen) > limit:
                    raise StateSpaceLimit(f"more than {limit} configurations at n={n}")
                todo.append(d)
    return seen


def explicit_reach(sys, n: int, err: UpSet, limit: int = DEFAULT_LIMIT) -> bool:
    """Some configuration of ``err`` is reachable in the instance of size ``n``."""
    return any(in_upset(err, c) for c in reachable(sys, n, limit))


def explicit_deadlocks(sys, n: int, limit: int = DEFAULT_LIMIT) -> set[Configuration]:
    """Reachable configurations without successors."""
    return {c for c in reachable(sys, n, limit) if not config_successors(sys, c)}


def explicit_error_path(sys, n: int, err: UpSet, limit: int = DEFAULT_LIMIT) -> list[Configuration] | None:
    """Shortest run from an initial configuration into ``err``, or ``None``."""
    starts = _initial_concrete(sys, n)
    parent: dict[Configuration, Configuration | None] = {s: None for s in starts}
    todo = deque(starts)
    while todo:
        c = todo.popleft()
        if in_upset(err, c):
            path = [c]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for d in config_successors(sys, c):
            if d not in parent:
                parent[d] = c
                if len(parent) > limit:
                    raise StateSpaceLimit(f"more than {limit} configurations at n={n}")
                todo.append(d)
    return None


def box_configs(sys, box: int) -> Iterator[Configuration]:
    """Every configuration with all counters at most ``box``."""
    base = _base(sys)
    a_states = list(base.a.states) if base.a else [None]
    extras = sys.extra_values() if hasattr(sys, "extra_values") else [()]
    for qa in a_states:
        for counts in itertools.product(range(box + 1), repeat=len(base.b.states)):
            for ex in extras:
                yield Configuration(qa, counts, ex)


def _layer(sys, n: int, qa_states, extras) -> Iterator[Configuration]:
    base = _base(sys)
    d = len(base.b.states)
    for combo in itertools.combinations_with_replacement(range(d), n):
        counts = [0] * d
        for i in combo:
            counts[i] += 1
        for qa in qa_states:
            for ex in extras:
                yield Configuration(qa, tuple(counts), ex)


def bounded_pred(r: UpSet, box: int, sys, multi: bool = False) -> set[Configuration]:
    """Configurations inside the box with a step (``multi``: a run, possibly empty) into ``r``.

    For ``multi`` the search ranges over whole layers of equal process count,
    so runs may leave the box on the way.
    """
    if not multi:
        return {c for c in box_configs(sys, box) if any(in_upset(r, d) for d in config_successors(sys, c))}
    base = _base(sys)
    a_states = list(base.a.states) if base.a else [None]
    extras = sys.extra_values() if hasattr(sys, "extra_values") else [()]
    out: set[Configuration] = set()
    for n in range(box * len(base.b.states) + 1):
        layer = list(_layer(sys, n, a_states, extras))
        back: dict[Configuration, list[Configuration]] = {c: [] for c in layer}
        good: set[Configuration] = set()
        for c in layer:
            if in_upset(r, c):
                good.add(c)
            for d in config_successors(sys, c):
                back.setdefault(d, []).append(c)
        todo = deque(good)
        while todo:
            d = todo.popleft()
            for c in back.get(d, ()):
                if c not in good:
                    good.add(c)
                    todo.append(c)
        out.update(c for c in good if max(c.counts, default=0) <= box)
    return out
