"""Structural predicates on finite families: transversality, crossing partitions,
crossing runs, circular order, steep approximation targets and crossing
profiles across resolutions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, StructuralError, UnsupportedError
from .funcspace import (
    Crossing,
    DyadicPath,
    Func,
    Order,
    PLFunction,
    Polynomial,
    _max_abs_enclosure,
    as_pl,
    crossings,
    frac,
    fractional_order,
    level_crossings,
    lipschitz_bound,
    pl_difference,
    sup_norm_bounds,
    sup_norm_diff,
    to_pl,
    values_at,
)

DEFAULT_RESOLUTION = 1 << 12


def members(F) -> list:
    return list(F.functions) if hasattr(F, "functions") else list(F)


def _exact_members(F, mode: str, resolution: int) -> list:
    fs = members(F)
    out = []
    for f in fs:
        pl = as_pl(f)
        if pl is None:
            if mode == "exact":
                raise UnsupportedError(
                    f"function {f.id} is not PL; use mode='tolerant' or discretise with to_pl"
                )
            pl = to_pl(f, resolution)[0]
        out.append(pl)
    ids = [f.id for f in out]
    if len(set(ids)) != len(ids):
        raise DomainError("function ids must be unique within a family")
    return out


def all_crossings(fs: Sequence[PLFunction]) -> dict:
    """Crossing lists for every unordered pair, keyed by ``(id_i, id_j)`` with i before j."""
    return {
        (f.id, g.id): level_crossings(pl_difference(f, g), pair=(f.id, g.id))
        for f, g in combinations(fs, 2)
    }


# -- transversality ---------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple
    x: Fraction | None = None

    def as_dict(self) -> dict:
        return {"kind": self.kind, "ids": list(self.ids), "x": self.x}


@dataclass(frozen=True)
class TransversalityReport:
    violations: tuple = ()
    advisories: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v.kind for v in self.violations}

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [v.as_dict() for v in self.violations],
            "advisories": [v.as_dict() for v in self.advisories],
        }


def check_transverse(F, mode: str = "exact", resolution: int = DEFAULT_RESOLUTION) -> TransversalityReport:
    """Pairwise transversality of a finite family.

    Shared slopes are reported as advisories only: they are what makes
    random PL families transverse almost surely, but they are not part of
    the definition (``{f, f + 1/2}`` is transverse).
    """
    if mode not in ("exact", "tolerant"):
        raise DomainError(f"unknown mode {mode!r}")
    fs = _exact_members(F, mode, resolution)
    violations = []
    where = {}
    for (i, j), crs in all_crossings(fs).items():
        flat = [c.x for c in crs if c.flat]
        if flat:
            violations.append(Violation("infinite_crossing", (i, j), min(flat)))
        for c in crs:
            if c.x == 0 or c.x == 1:
                violations.append(Violation("boundary_crossing", (i, j), c.x))
            elif c.direction == "tangent" and not c.flat:
                violations.append(Violation("extremum_crossing", (i, j), c.x))
            where.setdefault(c.x, []).append((i, j))
    for x in sorted(where):
        pairs = where[x]
        if len(pairs) > 1:
            ids = tuple(sorted({k for p in pairs for k in p}))
            violations.append(Violation("shared_crossing", ids, x))
    advisories = []
    slope_sets = {f.id: set(f.segment_slopes) for f in fs}
    for f, g in combinations(fs, 2):
        if slope_sets[f.id] & slope_sets[g.id]:
            advisories.append(Violation("shared_slope", (f.id, g.id)))
    return TransversalityReport(tuple(violations), tuple(advisories))


# -- crossing partition -------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    lo: Fraction
    hi: Fraction
    closed: bool
    pair: tuple | None = None

    @property
    def lo_included(self) -> bool:
        return self.closed or self.lo == 0

    @property
    def hi_included(self) -> bool:
        return self.closed or self.hi == 1

    def contains(self, x) -> bool:
        lo_ok = self.lo <= x if self.lo_included else self.lo < x
        hi_ok = x <= self.hi if self.hi_included else x < self.hi
        return lo_ok and hi_ok

    @property
    def point(self) -> Fraction:
        """A representative point of the cell."""
        return (self.lo + self.hi) / 2

    def as_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "closed": self.closed,
            "pair": list(self.pair) if self.pair is not None else None,
        }


@dataclass(frozen=True)
class CrossingPartition:
    cells: tuple
    steps: int = 0  # iterations of the scan before it stopped

    @property
    def closed_cells(self) -> list:
        return [c for c in self.cells if c.closed]

    @property
    def crossing_pairs(self) -> list:
        return [c.pair for c in self.closed_cells]

    @property
    def a(self) -> list:
        return [c.lo for c in self.closed_cells]

    @property
    def b(self) -> list:
        return [c.hi for c in self.closed_cells]

    def locate(self, x) -> int:
        for k, c in enumerate(self.cells):
            if c.contains(x):
                return k
        raise DomainError(f"{x} is not covered by the partition")

    def as_dict(self) -> dict:
        return {"cells": [c.as_dict() for c in self.cells], "steps": self.steps}


def cells_from_runs(runs: Sequence[tuple]) -> tuple:
    """Alternating cells from increasing closed runs ``(a, b, pair)``."""
    if not runs:
        return (Cell(Fraction(0), Fraction(1), False),)
    cells = [Cell(Fraction(0), runs[0][0], False)]
    for k, (a, b, pair) in enumerate(runs):
        cells.append(Cell(a, b, True, pair))
        nxt = runs[k + 1][0] if k + 1 < len(runs) else Fraction(1)
        cells.append(Cell(b, nxt, False))
    return tuple(cells)


def crossing_events(fs: Sequence[PLFunction], table: dict | None = None) -> list:
    """All crossings of the family, sorted, as ``(x, pair)``; shared points are fatal."""
    table = all_crossings(fs) if table is None else table
    events = sorted((c.x, pair) for pair, crs in table.items() for c in crs)
    for (x0, p0), (x1, p1) in zip(events, events[1:]):
        if x0 == x1:
            raise StructuralError(
                f"pairs {p0} and {p1} cross at the same point {x0}", witness={"x": x0, "pairs": [p0, p1]}
            )
    return events


def crossing_partition(F, table: dict | None = None) -> CrossingPartition:
    """Alternating open/closed decomposition of [0, 1] by the min/max scan.

    ``a_1`` is the first crossing of any pair; ``a_{n+1}`` is the first
    crossing after ``a_n`` of a pair other than the one crossing at ``a_n``;
    ``b_n`` is the last crossing of that pair in ``[a_n, a_{n+1}]``.
    """
    fs = _exact_members(F, "exact", DEFAULT_RESOLUTION)
    events = crossing_events(fs, table)
    if not events:
        return CrossingPartition(cells_from_runs([]), 0)
    runs = []
    k = 0
    steps = 0
    a, pair = events[0]
    while True:
        steps += 1
        nxt = None
        b = a
        j = k + 1
        while j < len(events):
            x, p = events[j]
            if p != pair:
                nxt = j
                break
            b = x
            j += 1
        runs.append((a, b, pair))
        if nxt is None:
            break
        k = nxt
        a, pair = events[k]
    return CrossingPartition(cells_from_runs(runs), steps)


# -- crossing runs ------------------------------------------------------------


@dataclass(frozen=True)
class CrossingRun:
    lo: Fraction
    hi: Fraction
    pair: tuple
    type: str
    levels: tuple = ()

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "pair": list(self.pair), "type": self.type, "levels": list(self.levels)}


_ORDER_CHAR = {Order.LESS: "<", Order.GREATER: ">", Order.EQUAL: "="}


def group_runs(h: PLFunction, crs: Sequence[Crossing], gap=0) -> list:
    """Group sorted crossings of ``h`` into maximal runs.

    Consecutive crossings join a run when ``h`` stays on the integer level
    between them or when they are at most ``gap`` apart.
    """
    groups = []
    for c in crs:
        if groups:
            prev = groups[-1][-1]
            mid = (prev.x + c.x) / 2
            if c.x - prev.x <= gap or h(mid).denominator == 1:
                groups[-1].append(c)
                continue
        groups.append([c])
    return groups


def _flank(pf: PLFunction, pg: PLFunction, x, limit):
    """A point between ``limit`` and ``x`` closer to ``x`` than any knot of
    either function and any point where either takes an integer value."""
    lo, hi = (limit, x) if limit < x else (x, limit)
    near = limit
    for h in (pf, pg):
        for k in h.xs:
            if lo < k < hi and abs(k - x) < abs(near - x):
                near = k
    for h in (pf, pg):
        a, b = h(x), h(near)
        if a == b:
            continue
        n = math.floor(a) + 1 if b > a else math.ceil(a) - 1
        if min(a, b) <= n <= max(a, b):
            t = x + (near - x) * (n - a) / (b - a)
            if t != x and abs(t - x) < abs(near - x):
                near = t
    return (x + near) / 2


def crossing_runs(f: Func, g: Func, gap=0, resolution: int | None = None) -> list:
    """Runs of crossings of ``(f, g)`` with the remainder order on each flank."""
    pf, pg = as_pl(f), as_pl(g)
    if pf is None or pg is None:
        if resolution is None:
            raise UnsupportedError("crossing runs need PL inputs or a resolution")
        pf = pf or to_pl(f, resolution)[0]
        pg = pg or to_pl(g, resolution)[0]
    h = pl_difference(pf, pg)
    crs = level_crossings(h, pair=(f.id, g.id))
    groups = group_runs(h, crs, gap)
    out = []
    for k, grp in enumerate(groups):
        lo, hi = grp[0].x, grp[-1].x
        left_end = groups[k - 1][-1].x if k else Fraction(0)
        right_end = groups[k + 1][0].x if k + 1 < len(groups) else Fraction(1)
        left = _ORDER_CHAR[fractional_order(pf, pg, _flank(pf, pg, lo, left_end))] if lo > 0 else "="
        right = _ORDER_CHAR[fractional_order(pf, pg, _flank(pf, pg, hi, right_end))] if hi < 1 else "="
        levels = tuple(sorted({c.offset for c in grp}))
        out.append(CrossingRun(lo, hi, (f.id, g.id), left + right, levels))
    return out


def crossing_sites(f: Func, g: Func, resolution: int | None = None) -> list:
    """Crossing points with flat runs collapsed to their midpoints."""
    return [(r.lo + r.hi) / 2 for r in crossing_runs(f, g, resolution=resolution)]


def sim_eps(xs: Sequence, ys: Sequence, eps) -> bool:
    """Equal cardinality and matching sorted elements within ``eps``."""
    if len(xs) != len(ys):
        return False
    return all(abs(a - b) < eps for a, b in zip(sorted(xs), sorted(ys)))


# -- circular order -------------------------------------------------------------


def circular_orientation(a, b, c) -> int:
    """+1 when the remainders of a, b, c run counter-clockwise, -1 clockwise, 0 on ties."""
    u, v, w = frac(a), frac(b), frac(c)
    if u == v or v == w or u == w:
        return 0
    if (u < v < w) or (v < w < u) or (w < u < v):
        return 1
    return -1


def same_circular_order(xs: Sequence, ys: Sequence) -> bool:
    if len(xs) != len(ys):
        raise DomainError("sequences must have equal length")
    for i, j, k in combinations(range(len(xs)), 3):
        if circular_orientation(xs[i], xs[j], xs[k]) != circular_orientation(ys[i], ys[j], ys[k]):
            return False
    return True


# -- steep targets ---------------------------------------------------------------


def min_integer_distance(h: PLFunction, lo, hi) -> Fraction:
    """Exact ``min d(h(x), Z)`` over ``[lo, hi]`` (zero if ``h`` meets an integer)."""
    xs = [lo] + [x for x in h.xs if lo < x < hi] + ([hi] if hi > lo else [])
    vals = values_at(h, xs)
    best = None
    for k, v in enumerate(vals):
        d = min(frac(v), 1 - frac(v))
        if d == 0:
            return Fraction(0)
        if k and math.floor(vals[k - 1]) != math.floor(v):
            return Fraction(0)
        best = d if best is None else min(best, d)
    return best


@dataclass(frozen=True)
class Neighborhood:
    id: int
    t: Fraction
    offset: int
    lo: Fraction
    hi: Fraction
    slope: Fraction
    delta: Fraction

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("id", "t", "offset", "lo", "hi", "slope", "delta")}


@dataclass(frozen=True)
class SteepTarget:
    source: PLFunction
    target: PLFunction
    neighborhoods: tuple
    eta: Fraction | None
    zeta: Fraction
    K: Fraction

    def accepts(self, g: Func) -> bool:
        """Does ``g`` lie in the window ``||g - target|| < zeta`` with matching slopes on N?"""
        pg = as_pl(g)
        if pg is not None:
            if sup_norm_diff(pg, self.target) >= self.zeta:
                return False
            for nb in self.neighborhoods:
                for (x0, y0), (x1, y1) in zip(pg.points, pg.points[1:]):
                    if x1 > nb.lo and x0 < nb.hi and abs((y1 - y0) / (x1 - x0) - nb.slope) >= 1:
                        return False
            return True
        if sup_norm_bounds(g, self.target).hi >= float(self.zeta):
            return False
        for nb in self.neighborhoods:
            deriv = np.array([i * a for i, a in enumerate(g.coeffs)][1:] or [0.0])
            deriv[0] -= float(nb.slope)
            if _max_abs_enclosure([(float(nb.lo), float(nb.hi), deriv)], 1e-9).hi >= 1:
                return False
        return True

    def as_dict(self) -> dict:
        return {
            "neighborhoods": [nb.as_dict() for nb in self.neighborhoods],
            "eta": self.eta,
            "zeta": self.zeta,
            "K": self.K,
        }


def _require_pl(f: Func, what: str) -> PLFunction:
    pf = as_pl(f)
    if pf is None:
        raise UnsupportedError(f"{what} must be PL (discretise with to_pl)")
    return pf


def build_steep_target(f: Func, F, eps) -> SteepTarget:
    """Replace ``f`` near each crossing with a family member by a steep line.

    Around each crossing ``t`` with ``h_j`` the target is linear with slope
    ``+-(K + 2)`` (``K`` the largest Lipschitz constant in ``F``) on a
    neighbourhood ``N``, agrees with ``f`` outside ``[t - delta, t + delta]``
    and stays within ``eta`` of ``f``.  Any ``g`` with ``||g - target|| <
    zeta`` and ``|g' - target'| < 1`` on every ``N`` has crossing sets
    ``eps``-similar to those of ``f``.
    """
    pf = _require_pl(f, "f")
    fs = [_require_pl(h, "family members") for h in members(F)]
    eps = Fraction(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    K = max((Fraction(lipschitz_bound(h)) for h in fs), default=Fraction(0))
    crosses = []
    for j, h in enumerate(fs):
        for c in level_crossings(pl_difference(pf, h), pair=(pf.id, h.id)):
            if c.x in (0, 1) or c.direction == "tangent":
                raise StructuralError(
                    f"f is not transverse to member {h.id} at {c.x}", witness={"id": h.id, "x": c.x}
                )
            crosses.append((c.x, j, c))
    crosses.sort(key=lambda t: t[0])
    for (x0, j0, _), (x1, j1, _) in zip(crosses, crosses[1:]):
        if x0 == x1:
            raise StructuralError(
                f"f crosses members {fs[j0].id} and {fs[j1].id} at the same point {x0}",
                witness={"x": x0, "ids": [fs[j0].id, fs[j1].id]},
            )
    breaks = set(pf.xs)
    for h in fs:
        breaks.update(h.xs)
    xs_cross = [t for t, _, _ in crosses]
    pieces = []
    neighborhoods = []
    etas = []
    for idx, (t, j, c) in enumerate(crosses):
        gaps = [abs(t - x) for x in xs_cross if x != t] + [abs(t - b) for b in breaks if b != t]
        delta = min([eps / 2] + [d / 3 for d in gaps])
        lo, hi = t - delta, t + delta
        others = [h for i, h in enumerate(fs) if i != j]
        if others:
            eta = min(min_integer_distance(pl_difference(pf, h), lo, hi) for h in others) / 2
        else:
            eta = Fraction(1, 2)
        eta = min(eta, Fraction(1, 2))
        etas.append(eta)
        s = (K + 2) if c.direction == "up" else -(K + 2)
        ft, flo, fhi = pf(t), pf(lo), pf(hi)
        nu = delta / 2
        for _ in range(400):
            local = [(lo, flo), (t - nu, ft - s * nu), (t, ft), (t + nu, ft + s * nu), (hi, fhi)]
            if all(abs(y - pf(x)) < eta for x, y in local):
                break
            nu /= 2
        else:  # pragma: no cover - eta > 0 guarantees termination
            raise StructuralError("could not fit a steep segment", witness={"x": t})
        pieces.append((lo, hi, local))
        neighborhoods.append(Neighborhood(fs[j].id, t, c.offset, t - nu, t + nu, s, delta))
    pts = []
    k = 0
    for x, y in pf.points:
        while k < len(pieces) and pieces[k][1] < x:
            pts.extend(pieces[k][2])
            k += 1
        if k < len(pieces) and pieces[k][0] <= x <= pieces[k][1]:
            continue
        pts.append((x, y))
    while k < len(pieces):
        pts.extend(pieces[k][2])
        k += 1
    target = PLFunction(tuple(pts), id=pf.id).simplified()
    # zeta: half the integer clearance of target - h outside the steep neighbourhoods
    clear = []
    region = []
    start = Fraction(0)
    for nb in sorted(neighborhoods, key=lambda n: n.lo):
        region.append((start, nb.lo))
        start = nb.hi
    region.append((start, Fraction(1)))
    for h in fs:
        diff = pl_difference(target, h)
        for lo, hi in region:
            clear.append(min_integer_distance(diff, lo, hi))
    zeta = min(clear) / 2 if clear else Fraction(1, 2)
    if zeta <= 0:
        raise StructuralError("steep target has no integer clearance outside its neighbourhoods")
    return SteepTarget(pf, target, tuple(neighborhoods), min(etas) if etas else None, zeta, K)


def _as_stream(stream, budget: int) -> Iterable:
    if hasattr(stream, "member"):
        for i in range(budget):
            try:
                yield stream.member(i)
            except IndexError:
                return
    else:
        for i, g in enumerate(stream):
            if i >= budget:
                return
            yield g


def find_smooth_approx(
    f: Func,
    F,
    eps,
    stream,
    adjacency_targets=None,
    budget: int = 10_000,
    graph=None,
    resolution: int = DEFAULT_RESOLUTION,
):
    """First stream element that is a smooth ``eps``-approximation of ``f``.

    Candidates are re-verified from scratch: ``||f - g|| < eps`` and, for
    each ``h`` in ``F``, crossing sites of ``(g, h)`` ``eps``-similar to
    those of ``(f, h)``.  With a graph, ``g`` must also be adjacent to
    exactly the members of ``adjacency_targets``.  Returns ``None`` when the
    budget runs out.
    """
    if budget <= 0:
        raise DomainError("budget must be positive")
    fs = members(F)
    targets = {h.id for h in (adjacency_targets or ())}
    ref = [crossing_sites(f, h, resolution) for h in fs]
    for g in _as_stream(stream, budget):
        if any(g == h for h in fs):
            continue
        pg, pf = as_pl(g), as_pl(f)
        if pg is not None and pf is not None:
            if sup_norm_diff(pg, pf) >= eps:
                continue
        elif sup_norm_bounds(g, f).hi >= eps:
            continue
        if not all(sim_eps(crossing_sites(g, h, resolution), r, eps) for h, r in zip(fs, ref)):
            continue
        if graph is not None and adjacency_targets is not None:
            if any(graph.decide_edge(g, h) != (h.id in targets) for h in fs):
                continue
        return g
    return None


# -- crossing profiles -------------------------------------------------------------


@dataclass(frozen=True)
class ICProfile:
    pair: tuple
    counts: tuple  # ((depth, count), ...)

    def as_dict(self) -> dict:
        return {"pair": list(self.pair), "counts": [list(c) for c in self.counts]}


def level_change_count(h: np.ndarray) -> int:
    """Crossings of integer levels by the linear interpolant of node values ``h``."""
    fl = np.floor(np.asarray(h, dtype=float))
    return int(np.abs(np.diff(fl)).sum())


def _render_nodes(f: Func, depth: int) -> np.ndarray:
    n = 1 << depth
    if isinstance(f, DyadicPath):
        if depth > f.depth:
            raise DomainError(f"path {f.id} is only known to depth {f.depth}")
        return f.coarsen(depth).node_values()
    grid = np.linspace(0.0, 1.0, n + 1)
    if isinstance(f, Polynomial):
        return np.polyval(np.asarray(f.coeffs[::-1]), grid)
    return np.interp(grid, f.float_xs, f.float_ys)


def _trim(p: list) -> list:
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _poly_rem(a: list, b: list) -> list:
    """Remainder of ``a / b`` for coefficient lists (lowest degree first)."""
    a = list(a)
    lead = b[-1]
    while len(a) >= len(b) and any(a):
        q = a[-1] / lead
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] -= q * c
        a.pop()
    return _trim(a or [Fraction(0)])


def _sturm_changes(seq: list, x: Fraction) -> int:
    signs = []
    for p in seq:
        v = Fraction(0)
        for c in reversed(p):
            v = v * x + c
        if v != 0:
            signs.append(v > 0)
    return sum(a != b for a, b in zip(signs, signs[1:]))


def distinct_roots(p: Sequence[Fraction], lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots of ``p`` (lowest degree first) in ``(lo, hi]`` by Sturm's theorem."""
    p = _trim([Fraction(c) for c in p])
    if len(p) == 1:
        if p[0] == 0:
            raise DomainError("the zero polynomial has infinitely many roots")
        return 0
    seq = [p, _trim([i * c for i, c in enumerate(p)][1:])]
    while len(seq[-1]) > 1 or seq[-1][0] != 0:
        r = _poly_rem(seq[-2], seq[-1])
        if len(r) == 1 and r[0] == 0:
            break
        seq.append([-c for c in r])
    return _sturm_changes(seq, lo) - _sturm_changes(seq, hi)


def _poly_shift_sub(coeffs: list, a, b) -> list:
    """Coefficients of ``p(x) - (a + b x)``."""
    out = [Fraction(c) for c in coeffs] + [Fraction(0)] * max(0, 2 - len(coeffs))
    out[0] -= a
    out[1] -= b
    return out


def _exact_pieces(f: Func, g: Func) -> list:
    """``f - g`` as exact polynomial pieces ``(lo, hi, coeffs)`` when both are PL or polynomial."""
    pieces = []
    if isinstance(f, DyadicPath) or isinstance(g, DyadicPath):
        return []
    pf, pg = as_pl(f), as_pl(g)
    if pf is not None and pg is not None:
        d = pl_difference(pf, pg)
        for (x0, y0), (x1, y1) in zip(d.points, d.points[1:]):
            b = (y1 - y0) / (x1 - x0)
            pieces.append((x0, x1, [y0 - b * x0, b]))
        return pieces
    poly = f if isinstance(f, Polynomial) else g
    other = g if poly is f else f
    sign = 1 if poly is f else -1
    base = [Fraction(c) for c in poly.coeffs]
    if isinstance(other, Polynomial):
        oc = [Fraction(c) for c in other.coeffs]
        n = max(len(base), len(oc))
        base += [Fraction(0)] * (n - len(base))
        oc += [Fraction(0)] * (n - len(oc))
        return [(Fraction(0), Fraction(1), [sign * (a - c) for a, c in zip(base, oc)])]
    for (x0, y0), (x1, y1) in zip(other.points, other.points[1:]):
        b = (y1 - y0) / (x1 - x0)
        pieces.append((x0, x1, [sign * c for c in _poly_shift_sub(base, y0 - b * x0, b)]))
    return pieces


def exact_crossing_count(f: Func, g: Func) -> int:
    """``|cr(f, g)|`` for PL and polynomial inputs, independent of any rendering."""
    pieces = _exact_pieces(f, g)
    if not pieces:
        raise UnsupportedError("exact crossing counts need PL or polynomial inputs")
    total = 0
    first = True
    for lo, hi, p in pieces:
        bound = sum(abs(c) for c in p)
        for k in range(math.floor(-bound), math.ceil(bound) + 1):
            q = list(p)
            q[0] -= k
            if len(_trim(q)) == 1 and q[0] == 0:
                raise DomainError("f - g is constant and integral on a segment: infinitely many crossings")
            total += distinct_roots(q, lo, hi)
            if first and q[0] == 0:
                total += 1  # root at x = 0 lies outside every half-open piece
        first = False
    return total


def ic_profile(f: Func, g: Func, depths: Sequence[int]) -> ICProfile:
    """Crossing counts of ``f - g`` at each depth.

    Brownian paths are rendered at each dyadic depth and the level changes
    of the rendering counted; PL and polynomial pairs have a finite crossing
    set, counted exactly once and reported at every depth.
    """
    if f is g or (f.id is not None and f.id == g.id) or f == g:
        raise DomainError("ic_profile needs two distinct functions")
    depths = list(depths)
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise DomainError("depths must be strictly increasing")
    if not isinstance(f, DyadicPath) and not isinstance(g, DyadicPath):
        n = exact_crossing_count(f, g)
        return ICProfile((f.id, g.id), tuple((d, n) for d in depths))
    counts = tuple((d, level_change_count(_render_nodes(f, d) - _render_nodes(g, d))) for d in depths)
    return ICProfile((f.id, g.id), counts)
