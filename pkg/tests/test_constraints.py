import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_basis, random_disjunctive
from prepair.constraints import (
    FALSE,
    TRUE,
    And,
    Atom,
    Not,
    Or,
    ParseError,
    blocking_clause,
    build_sync_constr,
    clause_literals,
    conj,
    deadlock_constr,
    disj,
    one_hot,
    one_hot_receive,
    pairing_constr,
    parse_sexpr,
    tau_constr,
    to_sexpr,
    tr_constr,
)
from prepair.core import OrderKind
from prepair.mc import model_check
from prepair.repair import reachable_error_sequence

ATOMS = ["a", "b", "c", "(x,{y},z)", "not"]


def constraints(depth=3):
    leaf = st.one_of(st.sampled_from(ATOMS).map(Atom), st.sampled_from([TRUE, FALSE]))
    return st.recursive(
        leaf,
        lambda kids: st.one_of(
            kids.map(Not),
            st.lists(kids, min_size=2, max_size=3).map(lambda xs: And(tuple(xs))),
            st.lists(kids, min_size=2, max_size=3).map(lambda xs: Or(tuple(xs))),
        ),
        max_leaves=8,
    )


def assignments():
    for bits in itertools.product((True, False), repeat=len(ATOMS)):
        yield dict(zip(ATOMS, bits))


class TestSexpr:
    @given(constraints())
    def test_round_trip(self, c):
        assert parse_sexpr(to_sexpr(c)) == c

    def test_quoting(self):
        assert to_sexpr(Atom("(x,{y},z)")) == "|(x,{y},z)|"
        assert to_sexpr(Atom("and")) == "|and|"
        assert to_sexpr(Or((Not(Atom("U1")), Atom("U2")))) == "(or (not U1) U2)"

    @pytest.mark.parametrize("bad", ["(and a", "(xor a b)", "a b", ")", "(not a b)", "|open"])
    def test_parse_errors(self, bad):
        with pytest.raises(ParseError):
            parse_sexpr(bad)


class TestSimplification:
    @given(st.lists(constraints(), max_size=4))
    @settings(max_examples=60)
    def test_conj_disj_preserve_meaning(self, cs):
        for v in assignments():
            assert conj(cs).evaluate(v) == all(c.evaluate(v) for c in cs)
            assert disj(cs).evaluate(v) == any(c.evaluate(v) for c in cs)

    def test_constants(self):
        assert conj([]) == TRUE and disj([]) == FALSE
        assert conj([Atom("a"), FALSE]) == FALSE
        assert disj([Atom("a"), TRUE]) == TRUE
        assert conj([Atom("a"), Atom("a")]) == Atom("a")

    def test_clause_literals(self):
        assert clause_literals(Or((Not(Atom("a")), Atom("b")))) == {("a", False), ("b", True)}
        assert clause_literals(And((Atom("a"), Atom("b")))) is None


class TestBaseConstraints:
    def test_one_hot(self):
        c = one_hot(["a", "b", "c"])
        for v in assignments():
            assert c.evaluate(v) == (sum(v[x] for x in "abc") == 1)

    def test_blocking_clause_excludes_only_its_assignment(self):
        target = {"a": True, "b": False, "c": True}
        c = blocking_clause(target)
        for bits in itertools.product((True, False), repeat=3):
            v = dict(zip("abc", bits))
            assert c.evaluate(v) == (v != target)

    def test_tr_constr_reader_writer(self, corpus):
        sys = corpus("reader_writer").system
        c = tr_constr(sys)
        everything = {t: True for t in sys.transition_ids}
        assert c.evaluate(everything)
        assert not c.evaluate({**everything, "nr_r": False})

    def test_tr_constr_keeps_broadcast_receives_total(self, corpus):
        sys = corpus("mesi").system
        c = tr_constr(sys)
        v = {t: True for t in sys.transition_ids}
        v["(E,read??,E)"] = v["(E,read??,S)"] = False
        assert not c.evaluate(v)

    def test_pairing(self, corpus):
        sys = corpus("scheduler_rendezvous").system
        c = pairing_constr(sys)
        v = {t: True for t in sys.transition_ids}
        assert c.evaluate(v)
        recv = next(t.id for t in sys.transitions if t.dir == "recv")
        act = sys.transition(recv).action
        others = [t.id for t in sys.transitions if t.dir == "recv" and t.action == act and t.id != recv]
        w = {**v, recv: False, **{o: False for o in others}}
        assert not c.evaluate(w)

    def test_one_hot_receive_and_tau(self, corpus):
        sys = corpus("mesi").system
        v = {t: True for t in sys.transition_ids}
        assert not one_hot_receive(sys).evaluate(v)
        v["(E,read??,E)"] = False
        assert one_hot_receive(sys).evaluate(v)
        assert tau_constr(sys).atoms() == {t.id for t in sys.transitions if t.dir == "tau"}


class TestPathConstraints:
    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_satisfying_assignments_cut_every_error_path(self, seed):
        rng = random.Random(seed)
        sys = random_disjunctive(rng, 2, 3, 2)
        err = random_basis(rng, sys, OrderKind.COVER)
        safe, seq = model_check(sys, err)
        if safe or seq.k == 0:
            return
        re = reachable_error_sequence(sys, seq)
        start = sorted(re[0], key=lambda c: c.sort_key())[0]
        c = build_sync_constr(start, re[1:], sys)
        ids = sys.transition_ids
        assert not c.evaluate({t: True for t in ids})
        for _ in range(30):
            v = {t: rng.random() < 0.7 for t in ids}
            restricted = sys.restrict([t for t in ids if v[t]])
            frontier = {start}
            for level in re[1:]:
                frontier = {s.target for x in frontier for s in restricted.steps(x) if s.target in level}
            assert c.evaluate(v) == (not frontier)

    def test_empty_sequence_is_false(self, corpus):
        sys = corpus("reader_writer").system
        assert build_sync_constr(sys.initial_config(1), [], sys) == FALSE

    def test_deadlock_constr(self):
        assert deadlock_constr([], ["x"]) == TRUE
        c = deadlock_constr([(("a",), None), (("b", "c"), None)], ["e", "d", "e"])
        assert to_sexpr(c) == "(or (not a) (not b) (not c) d e)"
