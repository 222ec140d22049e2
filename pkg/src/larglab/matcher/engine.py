"""Back-and-forth extension of a partial isomorphism between two LARGs.

Both families are normalised by subtracting their first member, which
makes the first members the zero function and leaves every distance (and
so every graph) unchanged.  Steps alternate: *forth* takes the lowest
unmatched vertex of ``V`` and searches ``W`` for an image, *back* does the
mirror image.  A candidate is accepted when the extended pairing carries
exact certificates (step-isometry, order preservation or suitable
matching, induced-subgraph isomorphism).  Whether it also lies inside the
acceptance window around the constructed target is recorded per step and
can be made mandatory with ``require_window``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import (
    CertificateError,
    DomainError,
    LarglabError,
    ResolutionExhausted,
    StructuralError,
    UnsupportedError,
)
from ..funcspace import DyadicPath, PLFunction, as_pl, pl_linear, sup_norm_diff
from ..larg import LargGraph, coin, distance_floor
from ..structure import build_steep_target, members
from .checks import check_induced_isomorphism, check_order_preserving, check_suitable_matching, is_step_isometry
from .icd import build_icd_target
from .sd import build_sd_target
from .state import PartialMatch, extend_table

MODES = ("sd", "icd")
GRID = 513
DEFAULT_MAX_DEPTH = 16
_CHUNK = 512


def max_depth() -> int:
    try:
        return int(os.environ.get("LARGLAB_MAX_DEPTH", DEFAULT_MAX_DEPTH))
    except ValueError as exc:
        raise DomainError("LARGLAB_MAX_DEPTH must be an integer") from exc


def _float_knots(f) -> tuple:
    if isinstance(f, PLFunction):
        return f.float_xs, f.float_ys
    if isinstance(f, DyadicPath):
        return np.linspace(0.0, 1.0, (1 << f.depth) + 1), f.shift + np.asarray(f.values, dtype=float)
    raise UnsupportedError("the matching engine needs PL or Brownian families")


class _Side:
    """A family with its graph, normalised exact renderings and cached float rows."""

    def __init__(self, family, graph: LargGraph, grid: np.ndarray):
        self.family = family
        self.graph = graph
        self.grid = grid
        self.extendable = bool(getattr(family, "extendable", False))
        self.size = len(family)
        if self.size == 0:
            raise DomainError("families must be non-empty")
        self._reset()

    def _reset(self):
        first = self.raw(0)
        self._base = as_pl(first)
        if self._base is None:
            raise UnsupportedError("the matching engine needs PL or Brownian families")
        xs, ys = _float_knots(first)
        self._base_row = np.interp(self.grid, xs, ys)
        self._pl: dict = {}
        self._rows = np.empty((0, len(self.grid)))

    @property
    def depth(self):
        spec = getattr(self.family, "spec", None)
        return spec.bm_depth if spec is not None and spec.kind == "bm" else None

    def deeper(self, depth: int) -> "_Side":
        return _Side(self.family.at_depth(depth), self.graph, self.grid)

    def exists(self, i: int) -> bool:
        return i < self.size or self.extendable

    def raw(self, i: int):
        f = self.family.member(i) if hasattr(self.family, "member") else self.family[i]
        return f if f.id == i else f.with_id(i)

    def pl(self, i: int) -> PLFunction:
        if i not in self._pl:
            if i == 0:
                self._pl[i] = PLFunction.constant(0, id=0)
            else:
                self._pl[i] = pl_linear([(1, as_pl(self.raw(i))), (-1, self._base)], 0, id=i)
        return self._pl[i]

    def rows(self, upto: int) -> np.ndarray:
        have = len(self._rows)
        if upto > have:
            new = []
            for i in range(have, max(upto, have + _CHUNK)):
                if not self.exists(i):
                    break
                xs, ys = _float_knots(self.raw(i))
                new.append(np.interp(self.grid, xs, ys) - self._base_row)
            if new:
                self._rows = np.vstack([self._rows, np.array(new)])
        return self._rows[:upto]


@dataclass
class MatchTranscript:
    mode: str
    pairs: list
    steps: list = field(default_factory=list)
    status: str = "accepted"
    message: str = ""
    config: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"

    def prefix(self, n: int) -> list:
        """The first ``n`` pairs (the base pair counts as one)."""
        return self.pairs[:n]

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "status": self.status,
            "message": self.message,
            "pairs": [list(p) for p in self.pairs],
            "steps": self.steps,
            "config": self.config,
        }


def _interval_signature(rows: np.ndarray, counts: bool) -> tuple:
    """Integer parts at both ends (and level-change counts) of each row."""
    fl = np.floor(rows)
    ends = (fl[..., 0], fl[..., -1])
    near = (np.abs(rows[..., 0] - np.round(rows[..., 0])) < 1e-9, np.abs(rows[..., -1] - np.round(rows[..., -1])) < 1e-9)
    n = np.abs(np.diff(fl, axis=-1)).sum(axis=-1) if counts else None
    return ends, near, n


def _prefilter(new_row: np.ndarray, mine: np.ndarray, theirs: np.ndarray, cands: np.ndarray, counts: bool) -> np.ndarray:
    """Mask of candidate rows whose differences with the matched images look right."""
    keep = np.ones(len(cands), dtype=bool)
    for k in range(len(mine)):
        (a0, a1), (z0, z1), ca = _interval_signature(new_row - mine[k], counts)
        (b0, b1), (y0, y1), cb = _interval_signature(cands - theirs[k], counts)
        ok0 = (b0 == a0) | y0 | z0
        ok1 = (b1 == a1) | y1 | z1
        keep &= ok0 & ok1
        if counts and not (z0 or z1):
            keep &= cb == ca
    return keep


def _certify(state: PartialMatch, f: PLFunction, g: PLFunction, ftab: dict, gtab: dict, mode: str) -> dict:
    """Exact certificates for appending ``f -> g`` to ``state``."""
    fs, gs = state.left + [f], state.right + [g]
    if mode == "sd":
        try:
            order = bool(check_order_preserving(fs, gs, tables=(ftab, gtab)))
        except StructuralError:
            order = False
    else:
        order = bool(check_suitable_matching(fs, gs, None, None, tables=(ftab, gtab)))
    return {"order_or_matching": order}


class _Engine:
    def __init__(self, V, W, G1, G2, mode, budget, eps0, require_window, depth_cap):
        if mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if budget <= 0:
            raise DomainError("budget must be positive")
        if G1 is None or G2 is None:
            raise DomainError("both graphs are required")
        self.mode = mode
        self.budget = int(budget)
        self.eps0 = Fraction(eps0)
        self.require_window = require_window
        self.depth_cap = max_depth() if depth_cap is None else depth_cap
        grid = np.linspace(0.0, 1.0, GRID) if mode == "sd" else np.array([0.0, 1.0])
        self.sides = [_Side(V, G1, grid), _Side(W, G2, grid)]
        self.ids = [[0], [0]]  # matched ids per side, in match order
        self.state = PartialMatch([self.sides[0].pl(0)], [self.sides[1].pl(0)], mode=mode)

    # -- state helpers -------------------------------------------------------------

    def _oriented(self, forth: bool) -> tuple:
        a, b = (0, 1) if forth else (1, 0)
        st = self.state if forth else self.state.swapped()
        return a, b, st

    def _rebuild(self, sides) -> PartialMatch:
        left = [sides[0].pl(i) for i in self.ids[0]]
        right = [sides[1].pl(i) for i in self.ids[1]]
        return PartialMatch(left, right, mode=self.mode)

    def _try_deeper(self) -> bool:
        """Re-render both Brownian families two levels deeper if the match survives."""
        depths = [s.depth for s in self.sides]
        if None in depths or max(depths) + 2 > self.depth_cap:
            return False
        sides = [s.deeper(d + 2) for s, d in zip(self.sides, depths)]
        st = self._rebuild(sides)
        if not check_suitable_matching(st.left, st.right, None, None, tables=(st.left_table, st.right_table)):
            return False
        if not is_step_isometry(st.left, st.right):
            return False
        self.sides, self.state = sides, st
        return True

    # -- targets ---------------------------------------------------------------------

    def _target(self, forth: bool, i: int, eps: Fraction) -> tuple:
        """(window predicate or None, description) for ingesting vertex ``i``."""
        if self.mode == "sd":
            a, _, st = self._oriented(forth)
            t, ctx = build_sd_target(self.sides[a].pl(i), st)
            desc = {"kind": "sd", "breakpoints": len(t.points), "crossings": len(ctx.crossings), "pieces": len(ctx.pieces)}
            cache = {}

            def window(g):
                if "steep" not in cache:
                    try:
                        cache["steep"] = build_steep_target(t, st.right, eps)
                    except LarglabError:
                        cache["steep"] = None
                steep = cache["steep"]
                return steep is not None and steep.accepts(g)

            return window, desc
        while True:
            a, _, st = self._oriented(forth)
            try:
                g, ctx = build_icd_target(self.sides[a].pl(i), st)
                break
            except ResolutionExhausted as exc:
                if not self._try_deeper():
                    return None, {"kind": "icd", "exhausted": str(exc), "cell": exc.cell, "type": exc.kind}
        delta = ctx.delta
        desc = {"kind": "icd", "breakpoints": len(g.points), "delta": float(delta), "cells": len(ctx.cells)}
        return (lambda w: sup_norm_diff(w, g) < delta), desc

    # -- one step --------------------------------------------------------------------------

    def step(self, index: int) -> dict:
        forth = index % 2 == 0
        a, b, st = self._oriented(forth)
        A, B = self.sides[a], self.sides[b]
        matched_a, matched_b = set(self.ids[a]), set(self.ids[b])
        i = 0
        while i in matched_a:
            i += 1
        if not A.exists(i):
            raise DomainError("no unmatched vertex left on the ingesting side")
        eps = self.eps0 / (1 << index)
        try:
            window, desc = self._target(forth, i, eps)
        except StructuralError as exc:
            return self._record(forth, i, None, eps, 0, False, {}, {"error": str(exc)}, "structural")
        # the target search may have re-rendered both families
        a, b, st = self._oriented(forth)
        A, B = self.sides[a], self.sides[b]
        f = A.pl(i)
        if window is None and self.require_window:
            return self._record(forth, i, None, eps, 0, False, {}, desc, "exhausted")
        ftab = extend_table(st.left_table, st.left, f)
        need = [A.graph.decide_edge(f, h) for h in st.left]
        near = [distance_floor(f, h, strict=False) for h in st.left]
        rows_a = A.rows(max(self.ids[a] + [i]) + 1)
        mine, new_row = rows_a[self.ids[a]], rows_a[i]
        theirs = B.rows(max(self.ids[b]) + 1)[self.ids[b]]
        examined = 0
        j0 = 0
        counts = self.mode == "sd"
        while examined < self.budget and B.exists(j0):
            hi = j0 + _CHUNK
            block = B.rows(hi)[j0:hi]
            if len(block) == 0:
                break
            ids = np.arange(j0, j0 + len(block))
            fresh = np.array([j not in matched_b for j in ids], dtype=bool)
            room = self.budget - examined
            if fresh.sum() > room:
                cut = np.nonzero(fresh)[0][room - 1] + 1
                block, ids, fresh = block[:cut], ids[:cut], fresh[:cut]
            examined += int(fresh.sum())
            keep = fresh & _prefilter(new_row, mine, theirs, block, counts)
            for j in ids[keep]:
                j = int(j)
                if not all(
                    coin(B.graph.seed, j, h.id) < B.graph.p for h, e in zip(st.right, need) if e
                ):
                    continue
                g = B.pl(j)
                gtab = extend_table(st.right_table, st.right, g)
                cert = _certify(st, f, g, ftab, gtab, self.mode)
                if not cert["order_or_matching"]:
                    continue
                iso = all(distance_floor(g, h, strict=False) == k for h, k in zip(st.right, near))
                adj = all(B.graph.decide_edge(g, h) == e for h, e in zip(st.right, need))
                if not (iso and adj):
                    continue
                in_window = bool(window(g)) if window is not None else False
                if self.require_window and not in_window:
                    continue
                cert.update(step_isometry=iso, adjacency=adj)
                self._accept(forth, f, g, ftab, gtab)
                return self._record(forth, i, j, eps, examined_before(j, ids, examined, fresh), in_window, cert, desc, None)
            j0 = int(ids[-1]) + 1
        return self._record(forth, i, None, eps, examined, False, {}, desc, "exhausted")

    def _accept(self, forth, f, g, ftab, gtab):
        if forth:
            self.state = self.state.extended(f, g, ftab, gtab)
            self.ids[0].append(f.id)
            self.ids[1].append(g.id)
        else:
            self.state = self.state.extended(g, f, gtab, ftab)
            self.ids[0].append(g.id)
            self.ids[1].append(f.id)

    def _record(self, forth, new, chosen, eps, examined, in_window, cert, desc, failure) -> dict:
        return {
            "direction": "forth" if forth else "back",
            "new_v": new,
            "chosen_w": chosen,
            "target_description": desc,
            "eps_used": eps,
            "candidates_examined": examined,
            "in_window": in_window,
            "depth": self.sides[0].depth,
            "certificates": {
                "step_isometry": bool(cert.get("step_isometry", False)),
                "order_or_matching": bool(cert.get("order_or_matching", False)),
                "adjacency": bool(cert.get("adjacency", False)),
            },
            "failure": failure,
        }

    def recertify(self):
        """Independent full-prefix certification; any failure is a bug."""
        fs, gs = self.state.left, self.state.right
        checks = {"step_isometry": is_step_isometry(fs, gs)}
        checks["adjacency"] = check_induced_isomorphism(fs, gs, self.sides[0].graph, self.sides[1].graph)
        if self.mode == "sd":
            checks["order_or_matching"] = check_order_preserving(fs, gs)
        else:
            checks["order_or_matching"] = check_suitable_matching(fs, gs, None, None)
        bad = [k for k, v in checks.items() if not v]
        if bad:
            raise CertificateError(
                f"prefix of length {len(fs)} fails {bad}",
                state={"pairs": self.state.pairs, "failed": bad},
            )


def examined_before(j: int, ids: np.ndarray, examined: int, fresh: np.ndarray) -> int:
    """Candidates examined up to and including ``j``."""
    later = int(fresh[ids > j].sum())
    return examined - later


def back_and_forth(
    V,
    W,
    G1: LargGraph,
    G2: LargGraph,
    steps: int,
    mode: str = "sd",
    budget: int = 10_000,
    eps0=Fraction(1, 4),
    require_window: bool = False,
    depth_cap: int | None = None,
) -> MatchTranscript:
    """Run ``steps`` alternating forth/back extensions of the base pairing ``0 <-> 0``.

    Returns a transcript whose ``status`` is ``"accepted"`` when every step
    found an image, ``"exhausted"`` when a step ran out of budget (or, with
    ``require_window``, of resolution) and ``"structural"`` when a target
    could not be built.  After every accepted step the whole prefix is
    re-certified from scratch; a failure raises :class:`CertificateError`.
    """
    if steps < 0:
        raise DomainError("steps must be non-negative")
    eng = _Engine(V, W, G1, G2, mode, budget, eps0, require_window, depth_cap)
    config = {"mode": mode, "steps": steps, "budget": int(budget), "eps0": Fraction(eps0), "require_window": require_window}
    tr = MatchTranscript(mode, [(0, 0)], config=config)
    for s in range(steps):
        rec = eng.step(s)
        tr.steps.append(rec)
        if rec["failure"] is not None:
            tr.status = rec["failure"]
            tr.message = f"step {s} ({rec['direction']}) failed: {rec['failure']}"
            break
        eng.recertify()
        tr.pairs = list(zip(eng.ids[0], eng.ids[1]))
    return tr


def certify_prefixes(tr: MatchTranscript, V, W, G1, G2) -> list:
    """Re-check every prefix of a transcript against fresh renderings.

    Returns one dict per prefix length with the three certificates
    (order preservation is reported for SD, suitable matching for ICD).
    """
    depth = tr.steps[-1]["depth"] if tr.steps else None
    sides = []
    for fam, graph in ((V, G1), (W, G2)):
        if depth is not None and getattr(fam, "spec", None) is not None and fam.spec.kind == "bm" and fam.spec.bm_depth != depth:
            fam = fam.at_depth(depth)
        sides.append(_Side(fam, graph, np.array([0.0, 1.0])))
    out = []
    for n in range(1, len(tr.pairs) + 1):
        fs = [sides[0].pl(v) for v, _ in tr.pairs[:n]]
        gs = [sides[1].pl(w) for _, w in tr.pairs[:n]]
        if tr.mode == "sd":
            try:
                order = bool(check_order_preserving(fs, gs))
            except StructuralError:
                order = False
        else:
            order = bool(check_suitable_matching(fs, gs, None, None))
        out.append(
            {
                "n": n,
                "step_isometry": bool(is_step_isometry(fs, gs)),
                "adjacency": bool(check_induced_isomorphism(fs, gs, G1, G2)),
                "order_or_matching": order,
            }
        )
    return out
