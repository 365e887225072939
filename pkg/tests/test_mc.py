import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_basis, random_broadcast, random_disjunctive, random_rendezvous
from prepair.core import Configuration, OrderKind, UpSet
from prepair.mc import SafeForAll, SafeUpTo, Verdict, initial_cover, max_safe_size, model_check, pred_basis
from prepair.oracle import explicit_error_path, explicit_reach

GENERATORS = [random_disjunctive, random_rendezvous, random_broadcast]


def test_reader_writer_sequence(corpus):
    doc = corpus("reader_writer")
    safe, seq = model_check(doc.system, doc.err)
    assert not safe and seq.verdict is Verdict.UNSAFE
    assert [[str(c) for c in s.basis] for s in seq.sets] == [["(w, (0,1))"], ["(nw, (0,1))"], ["(nw, (1,0))"]]
    assert seq.k == 2 and seq.initial.basis == (Configuration("nw", (1, 0)),)


def test_reader_writer_repaired_is_safe(corpus):
    doc = corpus("reader_writer")
    sys = doc.system.restrict([t for t in doc.system.transition_ids if not t.startswith("nw_w[r]")
                               and t != "nr_r"])
    safe, seq = model_check(sys, doc.err)
    assert safe and seq.initial is None


def test_order_mismatch(corpus):
    doc = corpus("reader_writer")
    with pytest.raises(ValueError):
        model_check(doc.system, UpSet(OrderKind.COVER_ZERO, doc.err.basis))
    with pytest.raises(ValueError):
        pred_basis(UpSet(OrderKind.COVER_ZERO, doc.err.basis), doc.system)


def test_error_covering_initial_state(corpus):
    doc = corpus("reader_writer")
    err = UpSet.of([Configuration("nw", (1, 0))], OrderKind.COVER)
    safe, seq = model_check(doc.system, err)
    assert not safe and seq.k == 0


def test_initial_cover_broadcast_adds_a_process(corpus):
    mesi = corpus("mesi").system
    i = mesi.b_index[mesi.b.init]
    got = initial_cover(mesi, Configuration(None, (0, 0, 0, 0)))
    assert got.counts[i] == 1 and got.size == 1


def test_sequence_sets_are_new(corpus):
    doc = corpus("mesi")
    safe, seq = model_check(doc.system, doc.err, full_fixpoint=True)
    for i, s in enumerate(seq.sets[1:], 1):
        for c in s.basis:
            assert not any(prev.contains(c) for prev in seq.sets[:i])


class TestAgainstExplicitSearch:
    @pytest.mark.parametrize("gen", GENERATORS, ids=lambda g: g.__name__)
    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=40, deadline=None)
    def test_verdicts(self, gen, seed):
        rng = random.Random(seed)
        sys = gen(rng)
        err = random_basis(rng, sys, OrderKind.COVER)
        safe, seq = model_check(sys, err)
        if safe:
            for n in range(1, 5):
                assert not explicit_reach(sys, n, err)
        else:
            n = min(c.size for c in seq.initial.basis)
            n = max(n, 1)
            assert explicit_reach(sys, n, err)

    def test_error_path_length_matches_k(self, corpus):
        doc = corpus("reader_writer")
        _, seq = model_check(doc.system, doc.err)
        path = explicit_error_path(doc.system, 1, doc.err)
        assert len(path) - 1 == seq.k


class TestMaxSafeSize:
    def test_unsafe_from_one(self, corpus):
        doc = corpus("reader_writer")
        got = max_safe_size(doc.system, doc.err)
        assert isinstance(got, SafeUpTo) and got.bound == 0

    def test_scheduler_needs_two(self, corpus):
        doc = corpus("scheduler_rendezvous")
        got = max_safe_size(doc.system, doc.err)
        assert isinstance(got, SafeUpTo) and got.bound == 1
        assert not explicit_reach(doc.system, 1, doc.err)
        assert explicit_reach(doc.system, 2, doc.err)

    def test_safe_for_all(self, corpus):
        doc = corpus("mesi")
        sys = doc.system.restrict([t for t in doc.system.transition_ids if t != "(E,read??,E)"])
        assert max_safe_size(sys, doc.partial_errors["P1"]) == SafeForAll()
