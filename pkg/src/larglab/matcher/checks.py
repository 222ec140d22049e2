"""Verifiers for partial matchings between finite function families.

All checks work on PL functions (exact); other representations are
rendered with :func:`larglab.funcspace.as_pl` first.  Families are paired
positionally unless an explicit ``pairing`` of index pairs is given.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from ..errors import StructuralError, UnsupportedError
from ..funcspace import Func, PLFunction, as_pl, frac, values_at
from ..larg import distance_floor
from ..structure import all_crossings, circular_orientation, crossing_partition, members


@dataclass(frozen=True)
class Check:
    ok: bool
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.ok

    def as_dict(self) -> dict:
        return {"ok": self.ok, "witness": self.witness}


PASS = Check(True)


def _pl(f: Func) -> PLFunction:
    pf = as_pl(f)
    if pf is None:
        raise UnsupportedError(f"function {f.id} must be PL for exact matching checks")
    return pf


def paired(F, G, pairing=None) -> tuple:
    fs, gs = members(F), members(G)
    if pairing is None:
        if len(fs) != len(gs):
            raise StructuralError("paired families must have equal size")
        return fs, gs
    return [fs[i] for i, _ in pairing], [gs[j] for _, j in pairing]


def is_step_isometry(V_sub, W_sub, pairing=None, floors=None) -> Check:
    """``floor(||v_i - v_j||) == floor(||w_i - w_j||)`` for every pair.

    ``floors`` may supply a pair of dicts caching floors by ``(i, j)`` positions.
    """
    vs, ws = paired(V_sub, W_sub, pairing)
    fv, fw = floors if floors is not None else ({}, {})
    for i, j in combinations(range(len(vs)), 2):
        if (i, j) not in fv:
            fv[(i, j)] = distance_floor(vs[i], vs[j], strict=False)
        if (i, j) not in fw:
            fw[(i, j)] = distance_floor(ws[i], ws[j], strict=False)
        a, b = fv[(i, j)], fw[(i, j)]
        if a is None or b is None or a != b:
            return Check(False, {"pair": [vs[i].id, vs[j].id], "image": [ws[i].id, ws[j].id], "floors": [a, b]})
    return PASS


def interval_points(table: dict) -> list:
    pts = {Fraction(0), Fraction(1)}
    for crs in table.values():
        pts.update(c.x for c in crs)
    return sorted(pts)


def _open_floor(f: PLFunction, lo, hi):
    """Constant ``floor(f)`` on the open interval ``(lo, hi)``, else ``None``."""
    inner = [x for x in f.xs if lo < x < hi]
    k = math.floor(f((lo + hi) / 2))
    ends = values_at(f, [lo, hi])
    if any(not k <= v <= k + 1 for v in ends):
        return None
    if any(not k <= v < k + 1 for v in values_at(f, inner)):
        return None
    return k


def _positional_table(fs, table=None) -> dict:
    """Crossing table keyed by positions ``(i, j)``, i < j."""
    if table is not None:
        return table
    raw = all_crossings(fs)
    pos = {f.id: k for k, f in enumerate(fs)}
    return {(pos[a], pos[b]): crs for (a, b), crs in raw.items()}


def check_order_preserving(F, G, pairing=None, tables=None) -> Check:
    """Order preservation on every matched pair of crossing-free intervals.

    ``X`` (resp. ``Y``) collects 0, 1 and every crossing inside ``F`` (resp.
    ``G``).  On the i-th intervals of each, every function must keep a
    constant integer part equal to its image's, and every pair of remainders
    must be strictly ordered the same way as their images.  Raises
    :class:`StructuralError` when ``|X| != |Y|``.
    """
    fs, gs = paired(F, G, pairing)
    fs, gs = [_pl(f) for f in fs], [_pl(g) for g in gs]
    tf, tg = tables if tables is not None else (None, None)
    X = interval_points(_positional_table(fs, tf))
    Y = interval_points(_positional_table(gs, tg))
    if len(X) != len(Y):
        raise StructuralError(f"interval systems differ in size: {len(X)} vs {len(Y)}", witness={"X": len(X), "Y": len(Y)})
    for i in range(1, len(X)):
        (x0, x1), (y0, y1) = (X[i - 1], X[i]), (Y[i - 1], Y[i])
        for f, g in zip(fs, gs):
            kf, kg = _open_floor(f, x0, x1), _open_floor(g, y0, y1)
            if kf is None or kg is None or kf != kg:
                return Check(False, {"interval": i, "kind": "integer_part", "id": f.id, "image": g.id, "floors": [kf, kg]})
        xm, ym = (x0 + x1) / 2, (y0 + y1) / 2
        rf = [frac(f(xm)) for f in fs]
        rg = [frac(g(ym)) for g in gs]
        for a, b in combinations(range(len(fs)), 2):
            sf = (rf[a] > rf[b]) - (rf[a] < rf[b])
            sg = (rg[a] > rg[b]) - (rg[a] < rg[b])
            if sf == 0 or sf != sg:
                return Check(
                    False,
                    {"interval": i, "kind": "remainder_order", "pair": [fs[a].id, fs[b].id], "signs": [sf, sg]},
                )
    return PASS


def check_induced_isomorphism(F, G, graph_f, graph_g, pairing=None) -> Check:
    fs, gs = paired(F, G, pairing)
    for i, j in combinations(range(len(fs)), 2):
        a = graph_f.decide_edge(fs[i], fs[j])
        b = graph_g.decide_edge(gs[i], gs[j])
        if a != b:
            return Check(False, {"pair": [fs[i].id, fs[j].id], "image": [gs[i].id, gs[j].id], "edges": [a, b]})
    return PASS


@dataclass(frozen=True)
class MatchingReport:
    sm1: Check
    sm2: Check
    sm3a: Check
    sm3b: Check
    sm3c: Check
    bands: Check

    @property
    def ok(self) -> bool:
        return all((self.sm1, self.sm2, self.sm3a, self.sm3b, self.sm3c, self.bands))

    def __bool__(self) -> bool:
        return self.ok

    def as_dict(self) -> dict:
        out = {k: getattr(self, k).as_dict() for k in ("sm1", "sm2", "sm3a", "sm3b", "sm3c", "bands")}
        out["ok"] = self.ok
        return out


def _cell_points(partition) -> list:
    return [c.lo if c.closed else c.point for c in partition.cells]


def _band_signature(diff_at, table, pair, cell, point):
    if cell.closed and cell.pair == pair:
        levels = sorted({c.offset for c in table[pair] if cell.lo <= c.x <= cell.hi})
        return ("cross", tuple(levels))
    return ("floor", math.floor(diff_at(point)))


def check_suitable_matching(F, G, graph_f, graph_g, pairing=None, tables=None) -> MatchingReport:
    """Suitable-matching conditions plus an integer-band condition.

    ``bands`` additionally requires, for every pair and every cell, the same
    integer part of ``F_i - F_j`` (or the same crossed levels on that pair's
    own crossing cells) as for the images.  Without it the other conditions
    do not determine ``floor(||F_i - F_j||)``.
    """
    fs, gs = paired(F, G, pairing)
    fs, gs = [_pl(f) for f in fs], [_pl(g) for g in gs]
    n = len(fs)
    sm1 = check_induced_isomorphism(fs, gs, graph_f, graph_g) if graph_f is not None else PASS

    sm2 = PASS
    f0 = [f.points[0][1] for f in fs]
    g0 = [g.points[0][1] for g in gs]
    for i, j in combinations(range(n), 2):
        if math.floor(abs(f0[i] - f0[j])) != math.floor(abs(g0[i] - g0[j])) or (f0[i] < f0[j]) != (g0[i] < g0[j]):
            sm2 = Check(False, {"pair": [fs[i].id, fs[j].id], "at0": [f0[i] - f0[j], g0[i] - g0[j]]})
            break

    tf, tg = tables if tables is not None else (None, None)
    tf, tg = _positional_table(fs, tf), _positional_table(gs, tg)
    pf = crossing_partition(_relabel(fs), tf)
    pg = crossing_partition(_relabel(gs), tg)
    if len(pf.cells) != len(pg.cells):
        fail = Check(False, {"cells": [len(pf.cells), len(pg.cells)]})
        return MatchingReport(sm1, sm2, fail, Check(False), Check(False), Check(False))
    sm3a = PASS
    sm3b = PASS
    for k, (cf, cg) in enumerate(zip(pf.cells, pg.cells)):
        if cf.closed != cg.closed or cf.pair != cg.pair:
            sm3b = Check(False, {"cell": k, "pairs": [cf.pair, cg.pair]})
            break

    ptf, ptg = _cell_points(pf), _cell_points(pg)
    vf = [values_at(f, sorted(set(ptf))) for f in fs]
    vg = [values_at(g, sorted(set(ptg))) for g in gs]
    idx_f = {x: k for k, x in enumerate(sorted(set(ptf)))}
    idx_g = {x: k for k, x in enumerate(sorted(set(ptg)))}
    sm3c = PASS
    bands = PASS
    for k, (cf, cg) in enumerate(zip(pf.cells, pg.cells)):
        xf, xg = idx_f[ptf[k]], idx_g[ptg[k]]
        a = [v[xf] for v in vf]
        b = [v[xg] for v in vg]
        if sm3c:
            skip = set(cf.pair) if cf.closed else set()
            for tri in combinations(range(n), 3):
                if len(skip) == 2 and skip <= set(tri):
                    continue
                oa = circular_orientation(*(a[t] for t in tri))
                ob = circular_orientation(*(b[t] for t in tri))
                if oa != ob:
                    sm3c = Check(False, {"cell": k, "triple": [fs[t].id for t in tri], "orientation": [oa, ob]})
                    break
        if bands and sm3b:
            for pair in combinations(range(n), 2):
                i, j = pair
                sf = _band_signature(lambda _x: a[i] - a[j], tf, pair, cf, ptf[k])
                sg = _band_signature(lambda _x: b[i] - b[j], tg, pair, cg, ptg[k])
                if sf != sg:
                    bands = Check(False, {"cell": k, "pair": [fs[i].id, fs[j].id], "signatures": [sf, sg]})
                    break
    return MatchingReport(sm1, sm2, sm3a, sm3b, sm3c, bands)


def _relabel(fs):
    """Use positions as ids so partitions of both sides are comparable."""
    return [f.with_id(k) for k, f in enumerate(fs)]
