import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_basis, random_broadcast, random_disjunctive, random_rendezvous
from prepair.core import Configuration, OrderKind, UpSet
from prepair.oracle import bounded_pred, box_configs, config_successors, in_upset
from prepair.semantics import (
    Kind,
    System,
    Template,
    Transition,
    ValidationError,
    broadcast_matrix,
    broadcast_successor,
    enabled_local,
    guard_satisfied,
    split_guards,
    succ_set,
    successor,
)

seeds = st.integers(0, 10**6)
GENERATORS = {"disjunctive": random_disjunctive, "rendezvous": random_rendezvous, "broadcast": random_broadcast}


def small_configs(sys, box=2):
    return list(box_configs(sys, box))


class TestGuards:
    @pytest.fixture
    def rw(self, corpus):
        return corpus("reader_writer").system

    def test_controller_needs_a_process_in_guard(self, rw):
        # (a)
        assert guard_satisfied(Configuration("w", (0, 1)), "w", ("r",), rw)
        assert not guard_satisfied(Configuration("w", (1, 0)), "w", ("r",), rw)

    def test_process_guarded_by_controller(self, rw):
        # (b)
        assert guard_satisfied(Configuration("nw", (1, 0)), "nr", ("nw",), rw)
        assert not guard_satisfied(Configuration("w", (1, 0)), "nr", ("nw",), rw)

    def test_process_guarded_by_other_b_state(self, rw):
        # (c)
        assert guard_satisfied(Configuration("w", (1, 1)), "nr", ("r",), rw)
        assert not guard_satisfied(Configuration("w", (1, 0)), "nr", ("r",), rw)

    def test_self_guard_needs_a_second_process(self, rw):
        # (d)
        assert not guard_satisfied(Configuration("w", (1, 0)), "nr", ("nr",), rw)
        assert guard_satisfied(Configuration("w", (2, 0)), "nr", ("nr",), rw)

    def test_source_must_be_occupied(self, rw):
        assert not guard_satisfied(Configuration("nw", (0, 1)), "nr", ("nw",), rw)

    def test_non_singleton_rejected(self, rw):
        with pytest.raises(ValueError):
            guard_satisfied(Configuration("nw", (1, 0)), "nr", ("nw", "w"), rw)


class TestStepsMatchOracle:
    @pytest.mark.parametrize("kind", sorted(GENERATORS))
    @given(seed=seeds)
    @settings(max_examples=40, deadline=None)
    def test_random_systems(self, kind, seed):
        sys = GENERATORS[kind](random.Random(seed))
        for c in small_configs(sys):
            assert succ_set([c], sys) == config_successors(sys, c)

    @pytest.mark.parametrize("name", ["reader_writer", "scheduler_rendezvous", "mesi", "smoke_detector"])
    def test_corpus(self, corpus, name):
        sys = corpus(name).system
        rng = random.Random(1)
        cfgs = small_configs(sys, 1)
        for c in rng.sample(cfgs, min(200, len(cfgs))):
            assert succ_set([c], sys) == config_successors(sys, c)

    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_steps_preserve_process_count(self, seed):
        rng = random.Random(seed)
        sys = GENERATORS[rng.choice(sorted(GENERATORS))](rng)
        for c in small_configs(sys):
            for s in sys.steps(c):
                assert s.target.size == c.size


class TestPredCandidates:
    """The upward closure of the candidates equals the one-step predecessors inside a box."""

    @pytest.mark.parametrize("kind", sorted(GENERATORS))
    @given(seed=seeds)
    @settings(max_examples=30, deadline=None)
    def test_against_bounded_pred(self, kind, seed):
        from prepair.mc import pred_basis

        rng = random.Random(seed)
        sys = GENERATORS[kind](rng)
        r = random_basis(rng, sys, OrderKind.COVER)
        basis = pred_basis(r, sys)
        box = 3
        assert {c for c in box_configs(sys, box) if in_upset(basis, c)} == bounded_pred(r, box, sys)


class TestBroadcastMatrix:
    def test_deterministic_receives(self, corpus):
        sys = corpus("mesi").system
        keep = [t for t in sys.transition_ids if t != "(E,read??,E)"]
        det = sys.restrict(keep)
        m = broadcast_matrix(det, "read")
        assert m.shape == (4, 4)
        assert np.all(m.sum(axis=0) == 1)

    def test_nondeterministic_receive_rejected(self, corpus):
        with pytest.raises(ValidationError):
            broadcast_matrix(corpus("mesi").system, "read")

    def test_successor_matches_steps(self, corpus):
        sys = corpus("mesi").system
        det = sys.restrict([t for t in sys.transition_ids if t != "(E,read??,E)"])
        states = det.b.states
        c = [0] * 4
        c[states.index("I")] = 2
        c[states.index("E")] = 1
        send = next(t for t in det.transitions if t.dir == "bsend" and t.action == "read")
        got = broadcast_successor(det, c, send.id)
        assert got == successor(Configuration(None, tuple(c)), send.id, det).counts


class TestValidation:
    def _sys(self, kind, a_tr, b_tr, a_states=("p",), b_states=("x", "y")):
        a = Template("A", a_states, a_states[0], tuple(a_tr)) if a_states else None
        return System(kind, a, Template("B", b_states, b_states[0], tuple(b_tr)))

    def test_shared_state_names(self):
        s = self._sys(Kind.DISJUNCTIVE, [Transition("a", "A", "x", "x", guard=("x",))],
                      [Transition("b", "B", "x", "x", guard=("x",))], a_states=("x",), b_states=("x",))
        with pytest.raises(ValidationError, match="shared"):
            s.validate()

    def test_totality(self):
        s = self._sys(Kind.DISJUNCTIVE, [Transition("a", "A", "p", "p", guard=("x",))],
                      [Transition("b", "B", "x", "y", guard=("p",))])
        with pytest.raises(ValidationError, match="no outgoing"):
            s.validate()
        s.validate(require_total=False)

    def test_duplicate_ids(self):
        s = self._sys(Kind.DISJUNCTIVE, [Transition("a", "A", "p", "p", guard=("x",))],
                      [Transition("a", "B", "x", "y", guard=("p",)), Transition("c", "B", "y", "x", guard=("p",))])
        with pytest.raises(ValidationError, match="duplicate"):
            s.validate()

    def test_two_senders_for_one_action(self):
        s = self._sys(Kind.RENDEZVOUS, [Transition("a", "A", "p", "p", action="m", dir="send")],
                      [Transition("b", "B", "x", "y", action="m", dir="send"),
                       Transition("c", "B", "y", "x", action="m", dir="recv")])
        with pytest.raises(ValidationError, match="several"):
            s.validate()

    def test_broadcast_without_total_receives(self):
        s = self._sys(Kind.BROADCAST, [], [Transition("s", "B", "x", "y", action="m", dir="bsend"),
                                           Transition("r", "B", "y", "x", action="m", dir="brecv")], a_states=())
        assert s.missing_receives() == [("m", "x")]
        with pytest.raises(ValidationError, match="not total"):
            s.validate()

    def test_illegal_direction(self):
        s = self._sys(Kind.RENDEZVOUS, [Transition("a", "A", "p", "p", action="m", dir="bsend")],
                      [Transition("b", "B", "x", "y", dir="tau"), Transition("c", "B", "y", "x", dir="tau")])
        with pytest.raises(ValidationError, match="illegal"):
            s.validate()


def test_split_guards_keeps_origin():
    t = Template("B", ("x", "y"), "x", (Transition("u", "B", "x", "y", guard=("x", "y")),))
    out = split_guards(t).transitions
    assert [tr.id for tr in out] == ["u[x]", "u[y]"]
    assert {tr.original_id for tr in out} == {"u"}


def test_split_guards_rejects_empty_guard():
    t = Template("B", ("x",), "x", (Transition("u", "B", "x", "x", guard=()),))
    with pytest.raises(ValidationError):
        split_guards(t)


def test_restrict_and_enabled_local(corpus):
    sys = corpus("reader_writer").system
    r = sys.restrict(["nw_w[nr]", "w_nw[nr]", "nr_r", "r_nr[nr]"])
    assert r.transition_ids == ["nw_w[nr]", "w_nw[nr]", "nr_r", "r_nr[nr]"]
    assert enabled_local(Configuration("nw", (1, 0)), r) == {"nw_w[nr]", "nr_r"}
    with pytest.raises(KeyError):
        sys.restrict(["nope"])


def test_successor_errors(corpus):
    sys = corpus("reader_writer").system
    with pytest.raises(ValueError, match="not enabled"):
        successor(Configuration("nw", (0, 1)), "nr_r", sys)


def test_initial_configs(corpus):
    rw = corpus("reader_writer").system
    assert rw.initial_config(3) == Configuration("nw", (3, 0))
    assert rw.is_initial(Configuration("nw", (2, 0)))
    assert not rw.is_initial(Configuration("w", (2, 0)))
    mesi = corpus("mesi").system
    assert not mesi.is_initial(Configuration(None, (0, 0, 0, 0)))
