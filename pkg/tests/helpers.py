"""Random system generators shared by the property and acceptance tests."""

from __future__ import annotations

import random

from prepair.core import Configuration, OrderKind, UpSet
from prepair.semantics import Kind, System, Template, Transition


def random_disjunctive(rng: random.Random, max_a: int = 3, max_b: int = 4, max_extra: int = 4) -> System:
    """A total disjunctive system with singleton guards."""
    na, nb = rng.randint(1, max_a), rng.randint(1, max_b)
    qa = tuple(f"a{i}" for i in range(na))
    qb = tuple(f"b{i}" for i in range(nb))
    every = qa + qb
    a_tr, b_tr = [], []
    for q in qa:
        for _ in range(rng.randint(1, 2)):
            a_tr.append((q, rng.choice(qa), rng.choice(qb)))
    for q in qb:
        for _ in range(rng.randint(1, 2)):
            b_tr.append((q, rng.choice(qb), rng.choice(every)))
    for _ in range(rng.randint(0, max_extra)):
        if rng.random() < 0.4:
            a_tr.append((rng.choice(qa), rng.choice(qa), rng.choice(qb)))
        else:
            b_tr.append((rng.choice(qb), rng.choice(qb), rng.choice(every)))
    a = Template("A", qa, qa[0], tuple(
        Transition(f"A{i}", "A", s, d, guard=(g,)) for i, (s, d, g) in enumerate(dict.fromkeys(a_tr))))
    b = Template("B", qb, qb[0], tuple(
        Transition(f"B{i}", "B", s, d, guard=(g,)) for i, (s, d, g) in enumerate(dict.fromkeys(b_tr))))
    sys = System(Kind.DISJUNCTIVE, a, b)
    sys.validate()
    return sys


def without_self_guards(sys: System) -> System:
    """Drop B-transitions guarded by their own source, keeping every state total."""
    keep = []
    for t in sys.transitions:
        if t.role == "B" and t.guard == (t.src,):
            continue
        keep.append(t)
    b_tr = [t for t in keep if t.role == "B"]
    for q in sys.b.states:
        if not any(t.src == q for t in b_tr):
            b_tr.append(Transition(f"{q}_idle", "B", q, q, guard=(sys.a.states[0],)))
    a_tr = tuple(t for t in keep if t.role == "A")
    return System(Kind.DISJUNCTIVE, Template("A", sys.a.states, sys.a.init, a_tr),
                  Template("B", sys.b.states, sys.b.init, tuple(b_tr)))


def random_basis(rng: random.Random, sys, order: OrderKind, size: int = 2, top: int = 2) -> UpSet:
    out = []
    for _ in range(rng.randint(1, size)):
        qa = rng.choice(sys.a.states) if sys.a else None
        counts = [rng.randint(0, top) for _ in sys.b.states]
        if order is OrderKind.COVER_ZERO and not any(counts):
            counts[rng.randrange(len(counts))] = 1
        out.append(Configuration(qa, tuple(counts)))
    return UpSet.of(out, order)


def random_rendezvous(rng: random.Random, max_a: int = 2, max_b: int = 3, n_actions: int = 2) -> System:
    """A total rendezvous system; each action has one sender and at least one receiver."""
    qa = tuple(f"a{i}" for i in range(rng.randint(1, max_a)))
    qb = tuple(f"b{i}" for i in range(rng.randint(1, max_b)))
    roles = {"A": qa, "B": qb}
    trs: list[Transition] = []
    for k in range(n_actions):
        act = f"m{k}"
        role = rng.choice("AB")
        trs.append(Transition(f"s{k}", role, rng.choice(roles[role]), rng.choice(roles[role]), action=act, dir="send"))
        for j in range(rng.randint(1, 2)):
            role = rng.choice("AB")
            trs.append(Transition(f"r{k}_{j}", role, rng.choice(roles[role]), rng.choice(roles[role]),
                                  action=act, dir="recv"))
    for role, states in roles.items():
        for q in states:
            if not any(t.role == role and t.src == q for t in trs) or rng.random() < 0.3:
                trs.append(Transition(f"t{role}{q}", role, q, rng.choice(states), dir="tau"))
    a = Template("A", qa, qa[0], tuple(t for t in trs if t.role == "A"))
    b = Template("B", qb, qb[0], tuple(t for t in trs if t.role == "B"))
    sys = System(Kind.RENDEZVOUS, a, b)
    sys.validate()
    return sys


def random_broadcast(rng: random.Random, max_b: int = 3, n_actions: int = 2) -> System:
    """A broadcast system with total receives; receives may be nondeterministic."""
    qb = tuple(f"b{i}" for i in range(rng.randint(2, max_b)))
    trs: list[Transition] = []
    for k in range(n_actions):
        act = f"m{k}"
        trs.append(Transition(f"s{k}", "B", rng.choice(qb), rng.choice(qb), action=act, dir="bsend"))
        for q in qb:
            for d in dict.fromkeys(rng.choice(qb) for _ in range(rng.randint(1, 2))):
                trs.append(Transition(f"r{k}_{q}_{d}", "B", q, d, action=act, dir="brecv"))
    for q in qb:
        if rng.random() < 0.4:
            trs.append(Transition(f"t{q}", "B", q, rng.choice(qb), dir="tau"))
    sys = System(Kind.BROADCAST, None, Template("B", qb, qb[0], tuple(trs)))
    sys.validate()
    return sys
