"""Columns of the set-partitioning master and the deduplicating pool."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from ..model import Instance, evaluate_shift


def mask_of(legs: Iterable[int]) -> int:
    m = 0
    for i in legs:
        m |= 1 << i
    return m


def legs_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class Column:
    """A feasible shift over leg indices of one instance."""

    legs: tuple[int, ...]
    mask: int
    cost: int

    @classmethod
    def of(cls, legs: Iterable[int], inst: Instance) -> "Column":
        legs = tuple(sorted(legs))
        ev = evaluate_shift([inst.legs[i] for i in legs], inst)
        if not ev.feasible:
            raise ValueError(f"infeasible column {legs}: {ev.reason}")
        return cls(legs, mask_of(legs), ev.cost)

    def leg_ids(self, inst: Instance) -> tuple[int, ...]:
        return tuple(inst.legs[i].id for i in self.legs)

    def consecutive(self) -> Iterator[tuple[int, int]]:
        return zip(self.legs, self.legs[1:])


class ColumnPool:
    """Insertion-ordered, deduplicated by leg mask."""

    def __init__(self, columns: Iterable[Column] = ()):
        self.columns: list[Column] = []
        self._index: dict[int, int] = {}
        for c in columns:
            self.add(c)

    def add(self, col: Column) -> bool:
        if col.mask in self._index:
            return False
        self._index[col.mask] = len(self.columns)
        self.columns.append(col)
        return True

    def extend(self, cols: Iterable[Column]) -> int:
        return sum(self.add(c) for c in cols)

    def __len__(self) -> int:
        return len(self.columns)

    def __iter__(self):
        return iter(self.columns)

    def __getitem__(self, k: int) -> Column:
        return self.columns[k]

    def __contains__(self, mask: int) -> bool:
        return mask in self._index

    def index(self, mask: int) -> int:
        return self._index[mask]

    def filtered(self, keep: Callable[[Column], bool]) -> "ColumnPool":
        return ColumnPool(c for c in self.columns if keep(c))

    def covered(self) -> int:
        m = 0
        for c in self.columns:
            m |= c.mask
        return m

    def uncovered(self, n_legs: int) -> list[int]:
        cov = self.covered()
        return [i for i in range(n_legs) if not (cov >> i) & 1]

    @classmethod
    def singletons(cls, inst: Instance) -> "ColumnPool":
        return cls(Column.of((i,), inst) for i in range(inst.n_legs))
