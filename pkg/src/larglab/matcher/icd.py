"""Target functions for extending a suitable matching between crossing-dense families."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ResolutionExhausted, StructuralError
from ..funcspace import Func, PLFunction, frac, pl_difference, pl_envelope, pl_linear, values_at
from ..structure import crossing_partition, min_integer_distance
from .checks import _pl, _relabel
from .state import PartialMatch, extend_table

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class CellImage:
    source: tuple  # (lo, hi, closed) in the left refinement
    image: tuple  # (lo, hi) on the right
    kind: str  # "plain" or "crossing"
    partner: int | None = None  # position crossed by the new function

    def as_dict(self) -> dict:
        return {"source": list(self.source), "image": list(self.image), "kind": self.kind, "partner": self.partner}


@dataclass(frozen=True)
class ICDTargetContext:
    cells: tuple
    runs: tuple  # chosen crossing runs on the right, (cell index, lo, hi)
    delta1: Fraction
    delta2: Fraction
    delta3: Fraction

    @property
    def delta(self) -> Fraction:
        return min(self.delta1, self.delta2, self.delta3)

    def as_dict(self) -> dict:
        return {
            "cells": [c.as_dict() for c in self.cells],
            "runs": [list(r) for r in self.runs],
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta3": self.delta3,
            "delta": self.delta,
        }


def _order(a: PLFunction, b: PLFunction, x) -> tuple:
    """Integer part of ``a - b`` and the order of the remainders at ``x``."""
    ax, bx = a(x), b(x)
    u, v = frac(ax), frac(bx)
    return math.floor(ax - bx), (u > v) - (u < v)


def _split_runs(cr_g, run_levels, gap_orders, G_l, G_m):
    """Leftmost split of the right-hand crossings into consecutive groups.

    Group ``r`` must cross exactly the levels ``run_levels[r]`` and the pair
    must match ``gap_orders[r]`` (integer part and remainder order) between groups ``r`` and ``r+1``.
    """
    R = len(run_levels)
    K = len(cr_g)

    def levels(s, e):
        return {c.offset for c in cr_g[s : e + 1]}

    def search(r, s):
        if r == R - 1:
            return [(s, K - 1)] if s <= K - 1 and levels(s, K - 1) == run_levels[r] else None
        for e in range(s, K - 1):
            if levels(s, e) != run_levels[r]:
                if not levels(s, e) <= run_levels[r]:
                    break
                continue
            mid = (cr_g[e].x + cr_g[e + 1].x) / 2
            if _order(G_l, G_m, mid) != gap_orders[r]:
                continue
            rest = search(r + 1, e + 1)
            if rest is not None:
                return [(s, e)] + rest
        return None

    return search(0, 0)


def _spread(lo, hi, count):
    step = (hi - lo) / count
    return [lo + k * step for k in range(count + 1)]


def build_icd_target(f_new: Func, state: PartialMatch) -> tuple:
    """Target ``g`` on the right whose crossing pattern mirrors that of ``f_new``.

    The left partition refined by ``f_new`` is transported cell by cell:
    each crossing run of the pair owning a closed cell goes to a right-hand
    run of the same levels (leftmost feasible choice), and the open pieces
    and crossing cells of ``f_new`` are spread evenly over the matching gaps.
    Off the crossing cells ``g`` is the midpoint of its bounding image
    translates; across a crossing cell it walks through the midpoints of the
    successive bands ``f_new`` visits.
    """
    f = _pl(f_new)
    fs, gs = state.left, state.right
    n = len(fs)
    tf, tg = state.left_table, state.right_table
    P = crossing_partition(_relabel(fs), tf)
    Q = crossing_partition(_relabel(gs), tg)
    if len(P.cells) != len(Q.cells):
        raise StructuralError("state partitions differ in shape")
    tf2 = extend_table(tf, fs, f)
    P2 = crossing_partition(_relabel(fs + [f]), tf2)

    def band(x):
        fx = f(x)
        return tuple(math.floor(fx - h(x)) for h in fs)

    mids: dict = {}

    def mid_function(b):
        if b not in mids:
            lower = pl_envelope([g.shifted(b[k]) for k, g in enumerate(gs)], upper=True)
            upper = pl_envelope([g.shifted(b[k] + 1) for k, g in enumerate(gs)], upper=False)
            mids[b] = (pl_linear([(HALF, lower), (HALF, upper)]), pl_difference(upper, lower))
        return mids[b]

    groups = [[] for _ in P.cells]
    for s in P2.cells:
        rep = s.lo if s.closed else s.point
        groups[P.locate(rep)].append(s)

    images = []  # (P2 cell, (lo', hi'), kind)
    runs_chosen = []
    for k, (cf, cg) in enumerate(zip(P.cells, Q.cells)):
        sub = groups[k]
        if cf.closed:
            pair = cf.pair
            run_idx = [i for i, s in enumerate(sub) if s.closed and s.pair == pair]
            if not run_idx or run_idx[0] != 0 or run_idx[-1] != len(sub) - 1:
                raise StructuralError("refined crossing cell does not start and end with its own runs", witness={"cell": k})
            run_levels = [
                {c.offset for c in tf[pair] if sub[i].lo <= c.x <= sub[i].hi} for i in run_idx
            ]
            l, m = pair
            gap_orders = [_order(fs[l], fs[m], sub[i + 1].point) for i in run_idx[:-1]]
            cr_g = [c for c in tg[pair] if cg.lo <= c.x <= cg.hi]
            split = _split_runs(cr_g, run_levels, gap_orders, gs[l], gs[m])
            if split is None:
                raise ResolutionExhausted(
                    f"cell {k}: no right-hand crossing runs match {len(run_idx)} required runs",
                    cell=k,
                    kind="runs",
                )
            for r, (i, (s_, e_)) in enumerate(zip(run_idx, split)):
                lo, hi = cr_g[s_].x, cr_g[e_].x
                images.append((sub[i], (lo, hi), "plain"))
                runs_chosen.append((k, lo, hi))
                if r + 1 < len(run_idx):
                    seg = sub[i + 1 : run_idx[r + 1]]
                    ticks = _spread(hi, cr_g[split[r + 1][0]].x, len(seg))
                    for t, s in enumerate(seg):
                        images.append((s, (ticks[t], ticks[t + 1]), "crossing" if s.closed else "plain"))
        else:
            ticks = _spread(cg.lo, cg.hi, len(sub))
            for t, s in enumerate(sub):
                images.append((s, (ticks[t], ticks[t + 1]), "crossing" if s.closed else "plain"))

    nodes: dict = {}

    def put(y, v):
        if y in nodes and nodes[y] != v:
            raise StructuralError("target is discontinuous", witness={"y": y, "values": [nodes[y], v]})
        nodes[y] = v

    def check_band(b, lo, hi, k):
        _, width = mid_function(b)
        pts = [lo] + [x for x in width.xs if lo < x < hi] + [hi]
        if min(values_at(width, pts)) <= 0:
            raise ResolutionExhausted(f"image band collapses on cell {k}", cell=k, kind="band")

    cells_out = []
    crossing_cells = []  # (lo', hi', partner, translates)
    for k, (s, (lo, hi), kind) in enumerate(images):
        if kind == "plain":
            b = band(s.lo if s.closed else s.point)
            check_band(b, lo, hi, k)
            M, _ = mid_function(b)
            for y in [lo] + [x for x in M.xs if lo < x < hi] + [hi]:
                put(y, M(y))
            cells_out.append(CellImage((s.lo, s.hi, s.closed), (lo, hi), "plain"))
            continue
        j = s.pair[0] if s.pair[1] == n else s.pair[1]
        cs = [c for c in tf2[(j, n)] if s.lo <= c.x <= s.hi]
        left_pt = images[k - 1][0].point
        right_pt = images[k + 1][0].point
        bands = [band(left_pt)]
        bands += [band((a.x + c.x) / 2) for a, c in zip(cs, cs[1:])]
        bands.append(band(right_pt))
        u = _spread(lo, hi, len(cs))
        for i in range(len(cs)):
            check_band(bands[i], u[i], u[i + 1], k)
            A, _ = mid_function(bands[i])
            B, _ = mid_function(bands[i + 1])
            ys = {u[i], u[i + 1]}
            ys.update(x for x in A.xs if u[i] < x < u[i + 1])
            ys.update(x for x in B.xs if u[i] < x < u[i + 1])
            for y in sorted(ys):
                w = (y - u[i]) / (u[i + 1] - u[i])
                put(y, (1 - w) * A(y) + w * B(y))
        check_band(bands[-1], u[-1], u[-1], k)
        translates = sorted({-c.offset for c in cs})
        crossing_cells.append((lo, hi, j, translates))
        cells_out.append(CellImage((s.lo, s.hi, s.closed), (lo, hi), "crossing", j))

    g = PLFunction(tuple(sorted(nodes.items())), id=f.id).simplified()

    # delta1: clearance from every image translate away from the crossing cells
    region = [(Fraction(0), Fraction(1))]
    if crossing_cells:
        spans = sorted((lo, hi) for lo, hi, _, _ in crossing_cells)
        gaps = [b[0] - a[1] for a, b in zip(spans, spans[1:])]
        gaps += [spans[0][0], 1 - spans[-1][1]]
        eps_n = min(gaps) / 3
        region = []
        start = Fraction(0)
        for lo, hi in spans:
            region.append((start, max(start, lo - eps_n)))
            start = hi + eps_n
        region.append((start, Fraction(1)))
    diffs = [pl_difference(g, h) for h in gs]
    delta1 = min(min_integer_distance(d, lo, hi) for d in diffs for lo, hi in region)
    # delta2: overshoot on both sides of each crossed translate
    delta2 = Fraction(1)
    for lo, hi, j, translates in crossing_cells:
        d = diffs[j]
        pts = [lo] + [x for x in d.xs if lo < x < hi] + [hi]
        vals = values_at(d, pts)
        for t in translates:
            delta2 = min(delta2, max(v - t for v in vals), max(t - v for v in vals))
    g0 = g.points[0][1]
    delta3 = min((min(frac(g0 - h.points[0][1]), 1 - frac(g0 - h.points[0][1])) for h in gs), default=Fraction(1))
    ctx = ICDTargetContext(tuple(cells_out), tuple(runs_chosen), delta1, delta2, delta3)
    if ctx.delta <= 0:
        raise ResolutionExhausted("target has no positive acceptance radius", kind="delta")
    return g, ctx
