"""Bookkeeping for a growing matching between two normalised families."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..funcspace import PLFunction, level_crossings, pl_difference
from .checks import interval_points


@dataclass
class PartialMatch:
    """Matched PL functions ``left[k] <-> right[k]`` with cached crossing tables.

    Tables are keyed by positions ``(i, j)``, ``i < j``.
    """

    left: list
    right: list
    mode: str = "sd"
    left_table: dict = field(default_factory=dict)
    right_table: dict = field(default_factory=dict)
    left_floors: dict = field(default_factory=dict)
    right_floors: dict = field(default_factory=dict)

    def __post_init__(self):
        self.left = list(self.left)
        self.right = list(self.right)
        if not self.left_table and len(self.left) > 1:
            self.left_table = table_for(self.left)
        if not self.right_table and len(self.right) > 1:
            self.right_table = table_for(self.right)

    @property
    def pairs(self) -> list:
        return [(f.id, g.id) for f, g in zip(self.left, self.right)]

    def __len__(self) -> int:
        return len(self.left)

    @property
    def X(self) -> list:
        return interval_points(self.left_table)

    @property
    def Y(self) -> list:
        return interval_points(self.right_table)

    def swapped(self) -> "PartialMatch":
        return PartialMatch(
            self.right, self.left, self.mode, self.right_table, self.left_table, self.right_floors, self.left_floors
        )

    def extended(self, f: PLFunction, g: PLFunction, ftab: dict | None = None, gtab: dict | None = None) -> "PartialMatch":
        ftab = extend_table(self.left_table, self.left, f) if ftab is None else ftab
        gtab = extend_table(self.right_table, self.right, g) if gtab is None else gtab
        return PartialMatch(
            self.left + [f], self.right + [g], self.mode, ftab, gtab, dict(self.left_floors), dict(self.right_floors)
        )


def table_for(fs) -> dict:
    out = {}
    for j in range(1, len(fs)):
        for i in range(j):
            out[(i, j)] = level_crossings(pl_difference(fs[i], fs[j]), pair=(fs[i].id, fs[j].id))
    return out


def extend_table(table: dict, fs, new) -> dict:
    """Crossing table of ``fs + [new]`` from the table of ``fs``."""
    out = dict(table)
    n = len(fs)
    for i, f in enumerate(fs):
        out[(i, n)] = level_crossings(pl_difference(f, new), pair=(f.id, new.id))
    return out
