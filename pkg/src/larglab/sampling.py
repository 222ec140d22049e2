"""Seeded random functions: PL, polynomial and shifted Brownian families.

Every draw is addressed by ``(seed, index)``: the generator for function
``index`` is built from ``SeedSequence(seed, spawn_key=(index,))``, so a
family can be generated in any order, in parallel, or extended lazily past
its nominal size without changing earlier members.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .funcspace import DyadicPath, Func, PLFunction, Polynomial, snap, snap_array

KINDS = ("pl", "poly", "bm")
SEED_MASK = (1 << 64) - 1


def _rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def sample_pl(seed: int, index: int, poisson_mean: float = 1.0, n: int | None = None) -> PLFunction:
    """One PL draw: Poisson many interior change points, uniform x, normal y.

    ``n`` forces the number of interior change points.
    """
    rng = _rng(seed, index)
    count = int(rng.poisson(poisson_mean)) if n is None else int(n)
    if count < 0:
        raise DomainError("number of interior change points must be >= 0")
    xs: set = set()
    while len(xs) < count:
        x = snap(rng.random())
        if 0 < x < 1:
            xs.add(x)
    ys = snap_array(rng.standard_normal(count + 2))
    grid = [Fraction(0), *sorted(xs), Fraction(1)]
    return PLFunction(tuple(zip(grid, (Fraction(float(y)) for y in ys))), id=index)


def sample_poly(seed: int, index: int, poisson_mean: float = 1.0, n: int | None = None) -> Polynomial:
    """One polynomial draw: Poisson degree, standard normal coefficients."""
    rng = _rng(seed, index)
    degree = int(rng.poisson(poisson_mean)) if n is None else int(n)
    if degree < 0:
        raise DomainError("degree must be >= 0")
    return Polynomial(tuple(snap_array(rng.standard_normal(degree + 1))), id=index)


def sample_brownian(seed: int, index: int, depth: int) -> DyadicPath:
    """Shifted Brownian path ``N + X(t)`` on the dyadic grid of ``depth``.

    Level ``L`` of the midpoint refinement has its own substream
    ``(index, L)``, so a deeper draw refines a shallower one exactly.
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    shift, end = _rng(seed, index, 0).standard_normal(2)
    shift = float(snap_array(shift))
    values = np.array([0.0, float(snap_array(end))])
    for level in range(1, depth + 1):
        z = _rng(seed, index, level).standard_normal(len(values) - 1)
        half = 1.0 / (1 << level)  # (b - a) / 2 at this level; variance is (b - a) / 4
        mids = snap_array(0.5 * (values[:-1] + values[1:]) + np.sqrt(half / 2.0) * z)
        refined = np.empty(2 * len(values) - 1)
        refined[0::2] = values
        refined[1::2] = mids
        values = refined
    return DyadicPath(depth, tuple(values.tolist()), shift, id=index)


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    count: int
    seed: int
    bm_depth: int | None = None
    poisson_mean: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown family kind {self.kind!r}")
        if self.count < 1:
            raise DomainError("count must be >= 1")
        if self.kind == "bm":
            if self.bm_depth is None or self.bm_depth < 0:
                raise DomainError("bm families need bm_depth >= 0")
        if not 0 <= int(self.seed) <= SEED_MASK:
            raise DomainError("seed must be an unsigned 64-bit integer")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "count": self.count,
            "seed": int(self.seed),
            "bm_depth": self.bm_depth,
            "poisson_mean": self.poisson_mean,
        }


def draw(spec: FamilySpec, index: int) -> Func:
    """Member ``index`` of the infinite sequence that ``spec`` truncates."""
    if spec.kind == "pl":
        return sample_pl(spec.seed, index, spec.poisson_mean)
    if spec.kind == "poly":
        return sample_poly(spec.seed, index, spec.poisson_mean)
    return sample_brownian(spec.seed, index, spec.bm_depth)


@dataclass(frozen=True)
class FunctionFamily:
    spec: FamilySpec | None
    functions: tuple
    _extra: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        for i, f in enumerate(self.functions):
            if f.id != i:
                raise DomainError(f"family member {i} carries id {f.id}")

    def __len__(self) -> int:
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)

    def __getitem__(self, i):
        return self.functions[i]

    def member(self, index: int) -> Func:
        """Member ``index``, drawing lazily beyond ``count`` when a spec exists."""
        if index < len(self.functions):
            return self.functions[index]
        if self.spec is None:
            raise IndexError(f"family has no member {index}")
        if index not in self._extra:
            self._extra[index] = draw(self.spec, index)
        return self._extra[index]

    @property
    def extendable(self) -> bool:
        return self.spec is not None

    def at_depth(self, depth: int) -> "FunctionFamily":
        """The same Brownian family rendered at another dyadic depth."""
        if self.spec is None or self.spec.kind != "bm":
            raise DomainError("only sampled Brownian families can change depth")
        return sample_family(replace(self.spec, bm_depth=depth))


def sample_family(spec: FamilySpec) -> FunctionFamily:
    return FunctionFamily(spec, tuple(draw(spec, i) for i in range(spec.count)))


def family_of(functions) -> FunctionFamily:
    """Wrap explicit functions as a family, renumbering ids 0..n-1."""
    return FunctionFamily(None, tuple(f.with_id(i) for i, f in enumerate(functions)))
