"""Local area random graphs on finite function families.

Every pair ``u, v`` at sup distance below 1 is joined with probability ``p``
by a coin addressed by ``(seed, min(u, v), max(u, v))``.  Coins never depend
on which other vertices exist, so a graph on a prefix of a family is the
induced subgraph of the graph on any longer prefix.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import AmbiguousDistance, DomainError
from .funcspace import Func, as_pl, floor_norm_diff, sup_norm_bounds
from .structure import members

_SCALE = float(1 << 64)


def coin(seed: int, u: int, v: int) -> float:
    """Uniform [0, 1) variate owned by the unordered pair ``{u, v}``."""
    a, b = (u, v) if u <= v else (v, u)
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(a), int(b)))
    return float(ss.generate_state(1, dtype=np.uint64)[0]) / _SCALE


def _fast_floor(f: Func, g: Func):
    """Float shortcut for long renderings; ``None`` when too close to call."""
    pf, pg = as_pl(f), as_pl(g)
    if pf is None or pg is None or len(pf.points) + len(pg.points) < 128:
        return None
    grid = np.union1d(pf.float_xs, pg.float_xs)
    d = float(np.max(np.abs(np.interp(grid, pf.float_xs, pf.float_ys) - np.interp(grid, pg.float_xs, pg.float_ys))))
    k = np.floor(d)
    if d - k > 1e-9 and k + 1 - d > 1e-9:
        return int(k)
    return None


def distance_floor(f: Func, g: Func, strict: bool = True):
    """``floor(||f - g||)``; ambiguous enclosures raise (strict) or give ``None``."""
    k = _fast_floor(f, g)
    if k is not None:
        return k
    k = floor_norm_diff(f, g)
    if k is None and strict:
        raise AmbiguousDistance((f.id, g.id), tuple(sup_norm_bounds(f, g, 1e-14)))
    return k


@dataclass
class LargGraph:
    family: str
    p: float
    seed: int
    vertices: tuple
    edges: frozenset
    floors: dict = field(default_factory=dict)
    flagged: tuple = ()
    strict: bool = True

    def __post_init__(self):
        self._adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            self._adj[u].add(v)
            self._adj[v].add(u)

    def adjacent(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def neighbors(self, u: int) -> set:
        return set(self._adj.get(u, ()))

    def edge_list(self) -> list:
        return sorted(tuple(sorted(e)) for e in self.edges)

    def decide_edge(self, f: Func, g: Func) -> bool:
        """Adjacency of two family members, whether or not they are vertices yet.

        Uses the stored edge set when both ids are vertices, otherwise the
        same distance gate and pair-addressed coin the builder uses.
        """
        if f.id == g.id:
            return False
        if f.id in self._adj and g.id in self._adj:
            return self.adjacent(f.id, g.id)
        if coin(self.seed, f.id, g.id) >= self.p:
            return False
        return distance_floor(f, g, self.strict) == 0

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "p": self.p,
            "seed": int(self.seed),
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edge_list()],
            "flagged": [list(e) for e in self.flagged],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LargGraph":
        try:
            edges = frozenset(tuple(sorted(e)) for e in doc["edges"])
            vertices = tuple(doc.get("vertices") or sorted({k for e in edges for k in e}))
            return cls(
                doc["family"],
                float(doc["p"]),
                int(doc["seed"]),
                vertices,
                edges,
                flagged=tuple(tuple(e) for e in doc.get("flagged", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"malformed graph document: {exc}") from exc


def build_larg(F, p: float, seed: int, strict: bool = True, family_ref: str = "") -> LargGraph:
    """LARG on the family ``F`` with edge probability ``p``."""
    if not 0 < p < 1:
        raise DomainError("p must lie strictly between 0 and 1")
    fs = members(F)
    ids = [f.id for f in fs]
    if len(set(ids)) != len(ids) or any(i is None for i in ids):
        raise DomainError("vertices need distinct ids")
    floors = {}
    flagged = []
    edges = set()
    for f, g in combinations(fs, 2):
        key = (min(f.id, g.id), max(f.id, g.id))
        k = distance_floor(f, g, strict)
        floors[key] = k
        if k is None:
            flagged.append(key)
            continue
        if k == 0 and coin(seed, f.id, g.id) < p:
            edges.add(key)
    return LargGraph(family_ref, float(p), int(seed), tuple(ids), frozenset(edges), floors, tuple(flagged), strict)


def correct_join_prob(k: int, l: int, p: float) -> float:
    """Probability that a new vertex hits all ``k`` targets and misses ``l`` others."""
    if k < 0 or l < 0:
        raise DomainError("k and l must be non-negative")
    if not 0 <= p <= 1:
        raise DomainError("p must lie in [0, 1]")
    return p**k * (1 - p) ** l


def find_correctly_joined(G: LargGraph, A: Iterable[int], B: Iterable[int], candidates: Sequence[int]):
    """First candidate adjacent to all of ``A`` and none of ``B``."""
    A, B = set(A), set(B)
    if A & B:
        raise DomainError("A and B must be disjoint")
    if (A | B) & set(candidates):
        raise DomainError("candidates must avoid A and B")
    for z in candidates:
        nb = G.neighbors(z)
        if A <= nb and not (B & nb):
            return z
    return None


@dataclass(frozen=True)
class JoinEstimate:
    frequency: float
    stderr: float
    trials: int
    k: int
    l: int
    expected: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def join_hits(near: np.ndarray, wanted: np.ndarray, p: float, seed: int, start: int, stop: int) -> int:
    """Correctly joined trials among ``start..stop-1``; each trial owns its stream."""
    hits = 0
    for t in range(start, stop):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(t,))))
        edge = near & (rng.random(len(near)) < p)
        hits += bool(np.array_equal(edge, wanted))
    return hits


def _chunks(trials: int, jobs: int) -> list:
    bounds = np.linspace(0, trials, max(1, jobs) + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


def parallel_join_hits(near, wanted, p: float, seed: int, trials: int, jobs: int = 1) -> int:
    """:func:`join_hits` over all trials, optionally split across processes."""
    chunks = _chunks(trials, jobs)
    if jobs <= 1 or len(chunks) == 1:
        return join_hits(near, wanted, p, seed, 0, trials)
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as ex:
        futs = [ex.submit(join_hits, near, wanted, p, seed, a, b) for a, b in chunks]
        return sum(f.result() for f in futs)


def estimate_join_frequency(
    F, f_target: Func, targets, trials: int, p: float, seed: int, jobs: int = 1
) -> JoinEstimate:
    """Monte Carlo frequency that a fresh copy of ``f_target`` is correctly joined.

    Each trial treats ``f_target`` as a new vertex with its own coins
    (derived from ``(seed, trial)``) against every member of ``F``; it is
    correctly joined when adjacent to all of ``targets`` and to nothing else
    in ``F``.  Members at distance >= 1 can never be joined, so ``l`` counts
    only the non-targets inside the unit ball.
    """
    if trials <= 0:
        raise DomainError("trials must be positive")
    fs = members(F)
    want = {h.id for h in targets}
    near = np.array([distance_floor(f_target, h) == 0 for h in fs], dtype=bool)
    wanted = np.array([h.id in want for h in fs], dtype=bool)
    if np.any(wanted & ~near):
        raise DomainError("every adjacency target must lie within distance 1 of f_target")
    k = int(wanted.sum())
    l = int((near & ~wanted).sum())
    hits = parallel_join_hits(near, wanted, p, seed, trials, jobs)
    freq = hits / trials
    stderr = float(np.sqrt(max(freq * (1 - freq), 1e-300) / trials))
    return JoinEstimate(freq, stderr, trials, k, l, correct_join_prob(k, l, p))


def graph_distance(G: LargGraph, u: int, v: int):
    """Breadth-first hop distance, or ``None`` if ``v`` is unreachable."""
    if u == v:
        return 0
    seen = {u}
    queue = deque([(u, 0)])
    while queue:
        w, d = queue.popleft()
        for z in sorted(G.neighbors(w)):
            if z == v:
                return d + 1
            if z not in seen:
                seen.add(z)
                queue.append((z, d + 1))
    return None
