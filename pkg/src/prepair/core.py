"""Configurations of counter systems, their orders, and antichain-based upward-closed sets."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from prepair import kernels


class DimensionError(ValueError):
    """Two configurations over counter vectors of different length were compared."""


class OrderKind(enum.Enum):
    COVER = "cover"
    COVER_ZERO = "cover_zero"
    PRODUCT = "product"


@dataclass(frozen=True)
class Configuration:
    """A global state ``(q_A, c)`` of a counter system.

    ``a_state`` is ``None`` for broadcast systems, which have no controller.
    ``extra`` carries discrete components of product systems: the safety
    automaton state followed by the states of the explicitly tracked
    B-processes. It is empty for plain systems.
    """

    a_state: str | None
    counts: tuple[int, ...]
    extra: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        counts = tuple(int(x) for x in self.counts)
        if any(x < 0 for x in counts):
            raise ValueError(f"negative counter in {counts}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "extra", tuple(self.extra))

    @property
    def size(self) -> int:
        """Number of counted B-processes."""
        return sum(self.counts)

    def zero_pattern(self) -> tuple[bool, ...]:
        return tuple(x == 0 for x in self.counts)

    def with_counts(self, counts: Sequence[int]) -> "Configuration":
        return Configuration(self.a_state, tuple(counts), self.extra)

    def sort_key(self) -> tuple:
        return (self.a_state or "", self.counts, self.extra)

    def __str__(self) -> str:
        vec = "(" + ",".join(str(x) for x in self.counts) + ")"
        parts = []
        if self.a_state is not None:
            parts.append(self.a_state)
        if self.extra:
            parts.extend(self.extra[1:])
        parts.append(vec)
        body = "(" + ", ".join(parts) + ")" if len(parts) > 1 else vec
        if self.extra:
            return f"({body}, {self.extra[0]})"
        return body


def config_leq(a: Configuration, b: Configuration, order: OrderKind) -> bool:
    """``a`` is below ``b`` in the given well-quasi-order."""
    if len(a.counts) != len(b.counts):
        raise DimensionError(f"vectors of length {len(a.counts)} and {len(b.counts)}")
    if a.a_state != b.a_state:
        return False
    if order is OrderKind.PRODUCT and a.extra != b.extra:
        return False
    if order is OrderKind.COVER_ZERO:
        for x, y in zip(a.counts, b.counts):
            if x > y or (x == 0) != (y == 0):
                return False
        return True
    return all(x <= y for x, y in zip(a.counts, b.counts))


def _group_key(c: Configuration, order: OrderKind) -> tuple:
    key: tuple = (c.a_state, len(c.counts))
    if order is OrderKind.PRODUCT:
        key += (c.extra,)
    if order is OrderKind.COVER_ZERO:
        key += (c.zero_pattern(),)
    return key


def min_basis(configs: Iterable[Configuration], order: OrderKind) -> "UpSet":
    """Minimal elements of ``configs`` under ``order`` as an :class:`UpSet`."""
    groups: dict[tuple, list[Configuration]] = {}
    for c in set(configs):
        groups.setdefault(_group_key(c, order), []).append(c)
    kept: list[Configuration] = []
    for members in groups.values():
        # Within a group the order is plain componentwise comparison.
        members.sort(key=lambda c: (sum(c.counts), c.counts))
        mask = kernels.minimal_mask([m.counts for m in members])
        kept.extend(m for m, keep in zip(members, mask) if keep)
    kept.sort(key=Configuration.sort_key)
    return UpSet(order, tuple(kept))


@dataclass(frozen=True)
class UpSet:
    """Upward closure of ``basis`` with respect to ``order``; ``basis`` is a sorted antichain."""

    order: OrderKind
    basis: tuple[Configuration, ...] = ()

    @staticmethod
    def of(configs: Iterable[Configuration], order: OrderKind) -> "UpSet":
        return min_basis(configs, order)

    def contains(self, c: Configuration) -> bool:
        return any(config_leq(b, c, self.order) for b in self.basis)

    def __contains__(self, c: Configuration) -> bool:
        return self.contains(c)

    def __iter__(self):
        return iter(self.basis)

    def __len__(self) -> int:
        return len(self.basis)

    def is_empty(self) -> bool:
        return not self.basis

    def union(self, other: Iterable[Configuration]) -> "UpSet":
        return min_basis([*self.basis, *other], self.order)

    def covers_set(self, other: "UpSet") -> bool:
        """Every basis element of ``other`` lies in this set."""
        return all(self.contains(c) for c in other.basis)


def upset_contains(s: UpSet, c: Configuration) -> bool:
    return s.contains(c)
