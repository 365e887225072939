import pytest

from prepair.corpus import corpus_files, corpus_names, corpus_path, load, size
from prepair.semantics import Kind

RECONSTRUCTED = {
    "smoke_detector": (6, 5, 39),
    "two_object_tracker": (12, 8, 128),
    "robot_flocking": (10, 10, 147),
    "lock_service": (10, 8, 95),
}


def test_every_file_parses_and_validates():
    docs = corpus_files()
    assert {n for n, _ in docs} == set(corpus_names())
    for _, doc in docs:
        doc.system.validate()


def test_expected_files_present():
    assert {"reader_writer", "reader_writer_automaton", "scheduler_rendezvous", "mesi"} <= set(corpus_names())
    assert set(RECONSTRUCTED) <= set(corpus_names())


def test_unknown_name():
    with pytest.raises(KeyError):
        corpus_path("nope")


def test_mesi_size():
    assert size(load("mesi")) == (4, 4, 26)


def test_reader_writer_shape():
    doc = load("reader_writer")
    assert len(doc.system.a.states) == 2 and len(doc.system.b.states) == 2
    assert doc.system.kind is Kind.DISJUNCTIVE


@pytest.mark.parametrize("name", sorted(RECONSTRUCTED))
def test_reconstructed_sizes_and_labels(name):
    doc = load(name)
    assert doc.reconstructed
    assert size(doc) == RECONSTRUCTED[name]


def test_printed_models_are_not_marked_reconstructed():
    for name in ("reader_writer", "scheduler_rendezvous", "mesi"):
        assert not load(name).reconstructed


def test_scheduler_has_twelve_user_transitions():
    sys = load("scheduler_rendezvous").system
    assert {f"U{i}" for i in range(1, 13)} <= set(sys.transition_ids)
