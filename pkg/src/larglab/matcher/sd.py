"""Target functions for extending an order-preserving matching."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import StructuralError
from ..funcspace import Func, PLFunction, level_crossings, pl_difference
from .checks import _pl
from .state import PartialMatch


@dataclass(frozen=True)
class SubInterval:
    x_lo: Fraction
    x_hi: Fraction
    y_lo: Fraction
    y_hi: Fraction
    lower: tuple  # (position, integer offset) of the translate just below
    upper: tuple  # (position, integer offset) of the translate just above

    def as_dict(self) -> dict:
        return {
            "x": [self.x_lo, self.x_hi],
            "y": [self.y_lo, self.y_hi],
            "lower": list(self.lower),
            "upper": list(self.upper),
        }


@dataclass(frozen=True)
class SDTargetContext:
    X: tuple
    Y: tuple
    crossings: tuple  # crossings of g_new with the left family, as (x, position, offset)
    pieces: tuple

    def alpha(self, piece: SubInterval, g: PLFunction, left: list, x) -> Fraction:
        (pl, nl), (pu, nu) = piece.lower, piece.upper
        lo = left[pl](x) + nl
        hi = left[pu](x) + nu
        return (g(x) - lo) / (hi - lo)

    def as_dict(self) -> dict:
        return {
            "X": list(self.X),
            "Y": list(self.Y),
            "crossings": [list(c) for c in self.crossings],
            "pieces": [p.as_dict() for p in self.pieces],
        }


def new_crossings(g: PLFunction, fs: list, X: list) -> list:
    """Crossings of ``g`` with the family, checked for transversality."""
    out = []
    xset = set(X)
    for k, f in enumerate(fs):
        for c in level_crossings(pl_difference(g, f), pair=(g.id, f.id)):
            if c.x in (0, 1) or c.direction == "tangent" or c.x in xset:
                raise StructuralError(
                    f"new function is not transverse to member {f.id} at {c.x}",
                    witness={"x": c.x, "id": f.id, "direction": c.direction},
                )
            out.append((c.x, k, c.offset))
    out.sort()
    for a, b in zip(out, out[1:]):
        if a[0] == b[0]:
            raise StructuralError("new function crosses two members at one point", witness={"x": a[0]})
    return out


def _bounding(g: PLFunction, fs: list, x) -> tuple:
    gv = g(x)
    below = []
    for k, f in enumerate(fs):
        v = f(x)
        n = math.floor(gv - v)
        below.append((v + n, k, n))
    lo = max(below)
    hi = min((v + 1, k, n + 1) for v, k, n in below)
    return (lo[1], lo[2]), (hi[1], hi[2])


def build_sd_target(g_new: Func, state: PartialMatch) -> tuple:
    """Target ``t`` on the right side mirroring how ``g_new`` sits among the left family.

    On each sub-interval ``I_{i,l}`` (between consecutive crossings of
    ``g_new`` inside ``I_i``) ``g_new`` is the convex combination
    ``alpha * (upper translate) + (1 - alpha) * (lower translate)``; ``t``
    uses the same ``alpha`` (pulled back through the affine map ``q: J_i ->
    I_i``) against the images of those translates evaluated on ``J_i``.  The
    result is interpolated exactly at every change point of the pieces
    involved, which keeps it strictly between the image translates.
    """
    g = _pl(g_new)
    fs, gs = state.left, state.right
    X, Y = state.X, state.Y
    if len(X) != len(Y):
        raise StructuralError("state is not order-preserving: interval systems differ in size")
    cross = new_crossings(g, fs, X)
    nodes: dict = {}
    pieces = []
    ci = 0
    for i in range(1, len(X)):
        x0, x1, y0, y1 = X[i - 1], X[i], Y[i - 1], Y[i]
        scale = (x1 - x0) / (y1 - y0)

        def q(y, x0=x0, y0=y0, scale=scale):
            return x0 + scale * (y - y0)

        def qinv(x, x0=x0, y0=y0, scale=scale):
            return y0 + (x - x0) / scale

        inner = []
        while ci < len(cross) and cross[ci][0] < x1:
            inner.append(cross[ci][0])
            ci += 1
        bounds = [x0] + inner + [x1]
        for a, b in zip(bounds, bounds[1:]):
            lower, upper = _bounding(g, fs, (a + b) / 2)
            (pl_, nl), (pu, nu) = lower, upper
            ya, yb = qinv(a), qinv(b)
            pieces.append(SubInterval(a, b, ya, yb, lower, upper))
            ys = {ya, yb}
            for h in (gs[pl_], gs[pu]):
                ys.update(y for y in h.xs if ya < y < yb)
            for h in (g, fs[pl_], fs[pu]):
                ys.update(qinv(x) for x in h.xs if a < x < b)
            for y in sorted(ys):
                x = q(y)
                lo = fs[pl_](x) + nl
                hi = fs[pu](x) + nu
                alpha = (g(x) - lo) / (hi - lo)
                val = alpha * (gs[pu](y) + nu) + (1 - alpha) * (gs[pl_](y) + nl)
                if y in nodes and nodes[y] != val:
                    raise StructuralError(
                        "target is discontinuous at an interval boundary", witness={"y": y, "values": [nodes[y], val]}
                    )
                nodes[y] = val
    t = PLFunction(tuple(sorted(nodes.items())), id=g.id).simplified()
    ctx = SDTargetContext(tuple(X), tuple(Y), tuple(cross), tuple(pieces))
    return t, ctx
