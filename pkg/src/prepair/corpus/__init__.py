"""Benchmark input documents shipped with the package.

Files marked ``"reconstructed": true`` are stand-ins that only match the original
benchmarks in size (states, actions, edges); their traces are not reference data.
"""

from __future__ import annotations

from importlib import resources

from prepair.frontend import Document, parse_document


def _files():
    return sorted(
        (p for p in resources.files(__name__).iterdir() if p.name.endswith(".json")),
        key=lambda p: p.name,
    )


def corpus_names() -> list[str]:
    return [p.name[: -len(".json")] for p in _files()]


def corpus_path(name: str) -> str:
    p = resources.files(__name__) / f"{name}.json"
    if not p.is_file():
        raise KeyError(f"no corpus file named {name!r}; known: {corpus_names()}")
    return str(p)


def load(name: str) -> Document:
    with open(corpus_path(name)) as fh:
        return parse_document(fh.read(), name=name)


def corpus_files() -> list[tuple[str, Document]]:
    """Every shipped benchmark, parsed and validated."""
    return [(n, load(n)) for n in corpus_names()]


def size(doc: Document) -> tuple[int, int, int]:
    """(local states, actions, edges) as reported for benchmarks; implicit receives are not counted."""
    sys = doc.system
    states = len(sys.b.states) + (len(sys.a.states) if sys.a else 0)
    explicit = {t.original_id for t in sys.transitions if t.id not in sys.completed}
    return states, len(sys.actions), len(explicit)


__all__ = ["corpus_files", "corpus_names", "corpus_path", "load", "size"]
