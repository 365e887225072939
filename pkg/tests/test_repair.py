import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_basis, random_disjunctive, without_self_guards
from prepair.constraints import TRUE, tr_constr
from prepair.core import Configuration, OrderKind, UpSet
from prepair.mc import SafeUpTo, model_check
from prepair.repair import (
    Mode,
    RepairOptions,
    UnsupportedFeature,
    error_constraint,
    first_error_path,
    reachable_error_sequence,
    repair,
)


class TestReachableErrors:
    def test_reader_writer(self, corpus):
        doc = corpus("reader_writer")
        _, seq = model_check(doc.system, doc.err)
        re = reachable_error_sequence(doc.system, seq)
        assert [sorted(map(str, r)) for r in re] == [["(nw, (1,0))"], ["(nw, (0,1))"], ["(w, (0,1))"]]
        path = first_error_path(doc.system, re)
        assert [tids for tids, _ in path] == [("nr_r",), ("nw_w[r]",)]

    def test_needs_unsafe_sequence(self, corpus):
        doc = corpus("mesi")
        sys = doc.system.restrict([t for t in doc.system.transition_ids if t != "(E,read??,E)"])
        _, seq = model_check(sys, doc.partial_errors["P1"])
        with pytest.raises(ValueError):
            reachable_error_sequence(sys, seq)

    def test_mesi_path(self, corpus):
        doc = corpus("mesi")
        _, seq = model_check(doc.system, doc.partial_errors["P1"])
        re = reachable_error_sequence(doc.system, seq)
        assert [sorted(str(c) for c in r) for r in re] == [
            ["(0,0,0,2)"], ["(0,0,1,1)"], ["(0,1,0,1)"], ["(0,1,1,0)"], ["(1,0,1,0)"]]

    def test_modes_differ_in_constraint_shape(self, corpus):
        doc = corpus("reader_writer")
        _, seq = model_check(doc.system, doc.err)
        re = reachable_error_sequence(doc.system, seq)
        single = error_constraint(doc.system, re, Mode.SINGLE)
        full = error_constraint(doc.system, re, Mode.FULL)
        assert str(single) == "(or (not nr_r) (not nw_w[r]))"
        assert single.atoms() <= full.atoms()


class TestRepairLoop:
    def test_reader_writer(self, corpus):
        doc = corpus("reader_writer")
        out = repair(doc.system, doc.err, doc.init)
        assert out.repaired and out.history[-1].kind == "safe"
        assert model_check(doc.system.restrict(out.kept), doc.err)[0]
        assert set(out.kept) | set(out.removed) == set(doc.system.transition_ids)

    def test_scheduler_history(self, corpus):
        doc = corpus("scheduler_rendezvous")
        out = repair(doc.system, doc.err, doc.init, preference=doc.preference)
        assert [r.kind for r in out.history] == ["error", "error", "error", "safe"]
        assert sorted(out.removed) == ["U12", "U3", "U6", "U9"]

    def test_initial_constraint_round(self, corpus):
        doc = corpus("mesi")
        # with the complete relation already safe, the one-hot constraints still force a choice
        sys = doc.system
        err = UpSet.of([Configuration(None, (9, 9, 9, 9))], OrderKind.COVER)
        out = repair(sys, err, doc.init, RepairOptions(preference=doc.preference))
        assert out.history[0].kind == "init"
        assert out.history[0].constraint is None and out.history[0].excludes_previous
        assert out.repaired

    def test_unrealizable_reports_safe_sizes(self, corpus):
        doc = corpus("reader_writer")
        err = UpSet.of([Configuration("w", (0, 0)), Configuration("nw", (0, 1))], OrderKind.COVER)
        out = repair(doc.system, err, tr_constr(doc.system))
        assert out.verdict == "unrealizable" and not out.repaired
        assert out.kept == [] and out.removed == []
        assert isinstance(out.fallback, SafeUpTo)

    def test_iteration_cap(self, corpus):
        doc = corpus("reader_writer")
        out = repair(doc.system, doc.err, doc.init, RepairOptions(mode=Mode.NAIVE, max_iter=5))
        assert out.verdict == "incomplete" and out.iterations == 5
        assert any("max-iter" in w for w in out.warnings)

    def test_naive_blocks_one_candidate_per_round(self, corpus):
        doc = corpus("mesi")
        out = repair(doc.system, doc.err, doc.init, RepairOptions(mode=Mode.NAIVE))
        for rec in out.history[:-1]:
            if rec.constraint is not None:
                assert rec.constraint.atoms() == set(rec.candidate)

    def test_dimacs_files(self, corpus, tmp_path):
        doc = corpus("scheduler_rendezvous")
        repair(doc.system, doc.err, doc.init, preference=doc.preference, emit_dimacs=str(tmp_path))
        files = sorted(p.name for p in tmp_path.iterdir())
        assert files == ["iter001.cnf", "iter002.cnf", "iter003.cnf"]


class TestBroadcastDeadlockOption:
    def test_default_warns(self, corpus):
        doc = corpus("mesi")
        out = repair(doc.system, doc.err, doc.init)
        assert any("broadcast" in w for w in out.warnings)

    def test_insisting_raises(self, corpus):
        doc = corpus("mesi")
        with pytest.raises(UnsupportedFeature):
            repair(doc.system, doc.err, doc.init, deadlock_check=True)

    def test_disabled_is_silent(self, corpus):
        doc = corpus("mesi")
        assert repair(doc.system, doc.err, doc.init, deadlock_check=False).warnings == []


def test_deadlock_round_excludes_deadlocking_candidate():
    from prepair.semantics import Kind, System, Template, Transition

    # removing b_out would strand processes in y with A stuck in p
    a = Template("A", ("p", "q"), "p", (Transition("ap", "A", "p", "q", guard=("x",)),
                                        Transition("aq", "A", "q", "p", guard=("x",)),
                                        Transition("ay", "A", "p", "p", guard=("y",))))
    b = Template("B", ("x", "y"), "x", (Transition("bx", "B", "x", "y", guard=("p",)),
                                        Transition("bx2", "B", "x", "x", guard=("q",)),
                                        Transition("by", "B", "y", "x", guard=("q",))))
    sys = System(Kind.DISJUNCTIVE, a, b)
    err = UpSet.of([Configuration("q", (0, 2))], OrderKind.COVER)
    out = repair(sys, err, tr_constr(sys))
    kinds = [r.kind for r in out.history]
    assert out.verdict in ("repaired", "unrealizable")
    if out.repaired:
        from prepair.deadlock import detect_deadlock

        assert not detect_deadlock(sys.restrict(out.kept))
    assert all(r.excludes_previous for r in out.history)
    assert "error" in kinds


@given(seed=st.integers(0, 10**6), mode=st.sampled_from(list(Mode)))
@settings(max_examples=40, deadline=None)
def test_repaired_systems_are_safe(seed, mode):
    rng = random.Random(seed)
    sys = without_self_guards(random_disjunctive(rng, 2, 3, 3))
    err = random_basis(rng, sys, OrderKind.COVER)
    out = repair(sys, err, tr_constr(sys), mode=mode)
    assert out.iterations <= 2 ** len(sys.transition_ids)
    if out.repaired:
        assert model_check(sys.restrict(out.kept), err)[0]
        assert tr_constr(sys).evaluate({t: t in out.kept for t in sys.transition_ids})


def test_options_from_keywords(corpus):
    doc = corpus("reader_writer")
    a = repair(doc.system, doc.err, doc.init, mode=Mode.SINGLE)
    b = repair(doc.system, doc.err, doc.init, RepairOptions(mode=Mode.SINGLE))
    assert a.removed == b.removed and a.iterations == b.iterations
