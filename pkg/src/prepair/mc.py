"""Backward-reachability model checking over upward-closed sets."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

from prepair.core import Configuration, OrderKind, UpSet, min_basis


class Verdict(enum.Enum):
    SAFE = "safe"
    UNSAFE = "unsafe"


@dataclass(frozen=True)
class ErrorSequence:
    """Bases E_0..E_k; for an unsafe verdict the last entry is E_k restricted to initial states.

    Each reported E_i holds only elements not covered by E_0..E_{i-1}.
    ``visited`` is the accumulated antichain at termination.
    """

    verdict: Verdict
    sets: tuple[UpSet, ...] = ()
    visited: UpSet | None = None
    iterations: int = 0
    capped: bool = False

    @property
    def k(self) -> int:
        return len(self.sets) - 1

    @property
    def initial(self) -> UpSet | None:
        return self.sets[-1] if self.verdict is Verdict.UNSAFE else None


def initial_cover(sys, b: Configuration) -> Configuration | None:
    """Least initial configuration above basis element ``b``, if any."""
    if hasattr(sys, "initial_cover"):
        return sys.initial_cover(b)
    if sys.a is not None and b.a_state != sys.a.init:
        return None
    init = sys.b_index[sys.b.init]
    if any(n for i, n in enumerate(b.counts) if i != init):
        return None
    if sys.a is None and b.counts[init] == 0:
        counts = list(b.counts)
        counts[init] = 1
        return b.with_counts(counts)
    return b


def pred_basis(r: UpSet, sys) -> UpSet:
    """Finite basis of pred of the upward closure of ``r``."""
    if r.order is not sys.order:
        raise ValueError(f"pred_basis needs order {sys.order.value}, got {r.order.value}")
    cands: list[Configuration] = []
    for target in r.basis:
        cands.extend(sys.pred_candidates(target))
    return min_basis(cands, r.order)


def backward_search(
    sys,
    err: UpSet,
    pred: Callable[[UpSet], UpSet],
    *,
    stop_at_initial: bool = True,
    cap: int | None = None,
) -> ErrorSequence:
    """Shared fixpoint loop of the safety and deadlock checkers."""
    order = err.order
    sets = [err]
    visited = err
    hits = [x for x in (initial_cover(sys, b) for b in err.basis) if x is not None]
    if hits and stop_at_initial:
        return ErrorSequence(Verdict.UNSAFE, (min_basis(hits, order),), visited, 0)
    frontier = err
    found = bool(hits)
    it = 0
    while frontier.basis:
        if cap is not None and it >= cap:
            return ErrorSequence(Verdict.UNSAFE if found else Verdict.SAFE, tuple(sets), visited, it, capped=True)
        it += 1
        pre = pred(frontier)
        new = [p for p in pre.basis if not visited.contains(p)]
        if not new:
            break
        step = min_basis(new, order)
        hits = [x for x in (initial_cover(sys, b) for b in step.basis) if x is not None]
        if hits:
            found = True
            if stop_at_initial:
                sets.append(min_basis(hits, order))
                return ErrorSequence(Verdict.UNSAFE, tuple(sets), visited.union(step.basis), it)
        sets.append(step)
        visited = visited.union(step.basis)
        frontier = step
    return ErrorSequence(Verdict.UNSAFE if found else Verdict.SAFE, tuple(sets) if found else (), visited, it)


def model_check(sys, err: UpSet, *, full_fixpoint: bool = False) -> tuple[bool, ErrorSequence]:
    """Return ``(True, seq)`` when no initial state reaches ``err``, else ``(False, seq)``."""
    if err.order is not sys.order:
        raise ValueError(f"error set order {err.order.value} does not match the system ({sys.order.value})")
    seq = backward_search(sys, err, lambda r: pred_basis(r, sys), stop_at_initial=not full_fixpoint)
    return seq.verdict is Verdict.SAFE, seq


@dataclass(frozen=True)
class SafeForAll:
    """No system size reaches the error set."""

    def __str__(self) -> str:
        return "safe for all sizes"


@dataclass(frozen=True)
class SafeUpTo:
    """Safe for every system with at most ``bound`` counted processes."""

    bound: int
    witness: Configuration | None = field(default=None, compare=False)


def max_safe_size(sys, err: UpSet) -> SafeForAll | SafeUpTo:
    """Largest process count guaranteed safe, from the full backward fixpoint."""
    _, seq = model_check(sys, err, full_fixpoint=True)
    covers = [x for x in (initial_cover(sys, b) for b in seq.visited.basis) if x is not None]
    if not covers:
        return SafeForAll()
    best = min(covers, key=lambda c: (c.size, c.sort_key()))
    return SafeUpTo(best.size - 1, best)


__all__ = [
    "ErrorSequence",
    "OrderKind",
    "SafeForAll",
    "SafeUpTo",
    "Verdict",
    "backward_search",
    "initial_cover",
    "max_safe_size",
    "model_check",
    "pred_basis",
]
