"""Exact and certified geometry of functions on [0, 1].

Three representations are supported:

* :class:`PLFunction` -- continuous piecewise-linear functions with rational
  change points.  Everything about PL pairs (norms, crossings, orders) is
  decided exactly with :class:`fractions.Fraction`.
* :class:`Polynomial` -- float coefficients; norms come from a certified
  branch-and-bound enclosure.
* :class:`DyadicPath` -- a Brownian path sampled on the dyadic grid of depth
  ``D``.  Its values are multiples of ``2**-53`` so the linear interpolant is
  an exact PL function.
"""
from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, replace
from enum import IntEnum
from fractions import Fraction
from functools import cached_property
from itertools import count
from typing import Iterable, NamedTuple, Sequence, Union

import numpy as np

from .errors import DomainError, UnsupportedError

SNAP_BITS = 53
_SNAP = 1 << SNAP_BITS

ZERO = Fraction(0)
ONE = Fraction(1)


def snap(value) -> Fraction:
    """Round ``value`` to the nearest multiple of ``2**-53``, exactly."""
    q = value if isinstance(value, Fraction) else Fraction(float(value))
    return Fraction(round(q * _SNAP), _SNAP)


def snap_array(values) -> np.ndarray:
    """Vectorised :func:`snap` that stays in float64.

    Scaling by a power of two is exact, and a snapped float is exactly
    representable, so ``Fraction(snap_array(v)[i]) == snap(v[i])``.
    """
    v = np.asarray(values, dtype=float)
    return np.round(v * float(_SNAP)) / float(_SNAP)


def frac(q):
    """Fractional part ``q - floor(q)`` (exact for Fractions)."""
    return q - math.floor(q)


def _as_point(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(float(x))


@dataclass(frozen=True)
class PLFunction:
    """Continuous piecewise-linear function given by its change points."""

    points: tuple
    id: int | None = None

    def __post_init__(self):
        pts = tuple((_as_point(x), _as_point(y)) for x, y in self.points)
        if len(pts) < 2:
            raise DomainError("a PL function needs at least two change points")
        if pts[0][0] != 0 or pts[-1][0] != 1:
            raise DomainError("change points must start at x=0 and end at x=1")
        for (xa, _), (xb, _) in zip(pts, pts[1:]):
            if not xa < xb:
                raise DomainError("change point x-coordinates must increase strictly")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_values(cls, xs: Sequence, ys: Sequence, id: int | None = None) -> "PLFunction":
        return cls(tuple(zip(xs, ys)), id=id)

    @classmethod
    def constant(cls, c, id: int | None = None) -> "PLFunction":
        c = _as_point(c)
        return cls(((ZERO, c), (ONE, c)), id=id)

    @classmethod
    def line(cls, intercept, slope, id: int | None = None) -> "PLFunction":
        a, b = _as_point(intercept), _as_point(slope)
        return cls(((ZERO, a), (ONE, a + b)), id=id)

    @cached_property
    def xs(self) -> list:
        return [p[0] for p in self.points]

    @cached_property
    def ys(self) -> list:
        return [p[1] for p in self.points]

    @cached_property
    def float_xs(self) -> np.ndarray:
        return np.array([float(x) for x in self.xs])

    @cached_property
    def float_ys(self) -> np.ndarray:
        return np.array([float(y) for y in self.ys])

    @property
    def segment_slopes(self) -> list:
        pts = self.points
        return [(y1 - y0) / (x1 - x0) for (x0, y0), (x1, y1) in zip(pts, pts[1:])]

    def __call__(self, x):
        x = _as_point(x)
        if x < 0 or x > 1:
            raise DomainError(f"x={x} outside [0, 1]")
        xs = self.xs
        k = bisect.bisect_right(xs, x) - 1
        if k >= len(xs) - 1:
            return self.points[-1][1]
        (x0, y0), (x1, y1) = self.points[k], self.points[k + 1]
        if x == x0:
            return y0
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def with_id(self, id: int | None) -> "PLFunction":
        return replace(self, id=id)

    def shifted(self, c) -> "PLFunction":
        c = _as_point(c)
        return PLFunction(tuple((x, y + c) for x, y in self.points), id=self.id)

    def simplified(self) -> "PLFunction":
        """Drop interior change points where the slope does not change."""
        pts = list(self.points)
        out = [pts[0]]
        for k in range(1, len(pts) - 1):
            (x0, y0), (x1, y1), (x2, y2) = out[-1], pts[k], pts[k + 1]
            if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
                out.append(pts[k])
        out.append(pts[-1])
        return PLFunction(tuple(out), id=self.id)


@dataclass(frozen=True)
class Polynomial:
    """Polynomial ``a_0 + a_1 x + ... + a_n x**n`` with float coefficients."""

    coeffs: tuple
    id: int | None = None

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coeffs)
        if not coeffs:
            raise DomainError("a polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x) -> float:
        x = float(x)
        if x < 0 or x > 1:
            raise DomainError(f"x={x} outside [0, 1]")
        return _horner(self.coeffs, x)

    def exact(self, x: Fraction) -> Fraction:
        acc = ZERO
        for a in reversed(self.coeffs):
            acc = acc * x + Fraction(a)
        return acc

    def with_id(self, id: int | None) -> "Polynomial":
        return replace(self, id=id)


@dataclass(frozen=True)
class DyadicPath:
    """Shifted path ``shift + X(t)`` known at ``t = k / 2**depth``."""

    depth: int
    values: tuple
    shift: float = 0.0
    id: int | None = None

    def __post_init__(self):
        if self.depth < 0:
            raise DomainError("depth must be non-negative")
        values = tuple(float(v) for v in self.values)
        if len(values) != (1 << self.depth) + 1:
            raise DomainError(
                f"depth {self.depth} needs {(1 << self.depth) + 1} values, got {len(values)}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "shift", float(self.shift))

    def __call__(self, x) -> float:
        x = float(x)
        if x < 0 or x > 1:
            raise DomainError(f"x={x} outside [0, 1]")
        n = 1 << self.depth
        return self.shift + float(np.interp(x, np.linspace(0.0, 1.0, n + 1), self.values))

    def coarsen(self, depth: int) -> "DyadicPath":
        """The same path seen at a coarser dyadic depth."""
        if not 0 <= depth <= self.depth:
            raise DomainError(f"cannot view depth-{self.depth} path at depth {depth}")
        step = 1 << (self.depth - depth)
        return DyadicPath(depth, self.values[::step], self.shift, self.id)

    def node_values(self) -> np.ndarray:
        return self.shift + np.asarray(self.values)

    def with_id(self, id: int | None) -> "DyadicPath":
        return replace(self, id=id)


Func = Union[PLFunction, Polynomial, DyadicPath]


class Order(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class Crossing:
    """A point where two remainders agree, i.e. ``f(x) - g(x) == offset``."""

    x: Fraction
    pair: tuple
    offset: int
    direction: str  # "up", "down" or "tangent"
    flat: bool = False


class NormBounds(NamedTuple):
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _horner(coeffs, x):
    acc = 0.0
    for a in reversed(coeffs):
        acc = acc * x + a
    return acc


def evaluate(f: Func, x):
    """Value of ``f`` at ``x``; exact when ``f`` is PL and ``x`` rational."""
    return f(x)


def values_at(f: PLFunction, xs: Sequence[Fraction]) -> list:
    """Exact values of ``f`` at the increasing points ``xs`` (one merge pass)."""
    pts = f.points
    out = []
    k = 0
    last = len(pts) - 2
    for x in xs:
        while k < last and pts[k + 1][0] <= x:
            k += 1
        (x0, y0), (x1, y1) = pts[k], pts[k + 1]
        if x == x0:
            out.append(y0)
        elif x == x1:
            out.append(y1)
        else:
            out.append(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    return out


def merged_grid(*fs: PLFunction) -> list:
    grid = set()
    for f in fs:
        grid.update(f.xs)
    return sorted(grid)


def pl_linear(terms: Iterable[tuple], const=0, id: int | None = None) -> PLFunction:
    """Exact ``const + sum(c * f)`` over ``(c, f)`` terms, on the merged grid."""
    terms = [(_as_point(c), f) for c, f in terms]
    const = _as_point(const)
    if not terms:
        return PLFunction.constant(const, id=id)
    grid = merged_grid(*(f for _, f in terms))
    total = [const] * len(grid)
    for c, f in terms:
        vals = values_at(f, grid)
        total = [t + c * v for t, v in zip(total, vals)]
    return PLFunction(tuple(zip(grid, total)), id=id)


def pl_difference(f: PLFunction, g: PLFunction) -> PLFunction:
    """``f - g`` on the union of both change-point sets."""
    grid = merged_grid(f, g)
    return PLFunction(
        tuple(zip(grid, (a - b for a, b in zip(values_at(f, grid), values_at(g, grid)))))
    )


def _segment_envelope(x0, x1, lines, sign):
    """Breakpoints strictly inside (x0, x1) of the max (sign=1) or min of lines."""
    # lines: [(value at x0, value at x1)]; work in u in [0, 1] on sign * value
    cand = [(sign * a, sign * (b - a)) for a, b in lines]
    cur = max(range(len(cand)), key=lambda i: (cand[i][0], cand[i][1]))
    u = ZERO
    out = []
    while True:
        a_c, s_c = cand[cur]
        best = None
        for j, (a_j, s_j) in enumerate(cand):
            if s_j <= s_c:
                continue
            u_star = (a_c - a_j) / (s_j - s_c)
            if u_star < u:
                continue
            key = (u_star, -s_j)
            if best is None or key < best[0]:
                best = (key, j)
        if best is None or best[0][0] >= 1:
            return out
        u_star, cur = best[0][0], best[1]
        if u_star > u or not out:
            if u_star > 0:
                out.append((x0 + u_star * (x1 - x0), sign * (a_c + s_c * u_star)))
        u = u_star


def pl_envelope(fs: Sequence[PLFunction], upper: bool = True, id: int | None = None) -> PLFunction:
    """Exact pointwise max (``upper=True``) or min of PL functions."""
    if len(fs) == 1:
        return fs[0].with_id(id)
    sign = 1 if upper else -1
    grid = merged_grid(*fs)
    table = [values_at(f, grid) for f in fs]
    pts = []
    for k in range(len(grid)):
        col = [row[k] for row in table]
        pts.append((grid[k], max(col) if upper else min(col)))
        if k + 1 < len(grid):
            lines = [(row[k], row[k + 1]) for row in table]
            pts.extend(_segment_envelope(grid[k], grid[k + 1], lines, sign))
    return PLFunction(tuple(pts), id=id)


def compose(f: PLFunction, psi: PLFunction) -> PLFunction:
    """``f o psi`` for an increasing PL homeomorphism ``psi`` of [0, 1]."""
    if psi.ys[0] != 0 or psi.ys[-1] != 1 or any(b <= a for a, b in zip(psi.ys, psi.ys[1:])):
        raise DomainError("psi must be an increasing homeomorphism of [0, 1]")
    inv = PLFunction(tuple(zip(psi.ys, psi.xs)))
    grid = sorted(set(psi.xs) | set(values_at(inv, f.xs)))
    inner = values_at(psi, grid)
    return PLFunction(tuple(zip(grid, (f(x) for x in inner))), id=f.id)


def as_pl(f: Func) -> PLFunction | None:
    """Exact PL view of ``f`` when one exists, else ``None``."""
    if isinstance(f, PLFunction):
        return f
    if isinstance(f, DyadicPath):
        return _render_path(f)
    return None


def _render_path(f: DyadicPath) -> PLFunction:
    n = 1 << f.depth
    shift = Fraction(f.shift)
    pts = tuple((Fraction(k, n), shift + Fraction(v)) for k, v in enumerate(f.values))
    return PLFunction(pts, id=f.id)


def _pl_pair(f: Func, g: Func, resolution: int | None):
    pf, pg = as_pl(f), as_pl(g)
    if pf is None or pg is None:
        if resolution is None:
            raise UnsupportedError(
                "exact crossings need PL inputs; pass a resolution or discretise with to_pl"
            )
        pf = pf if pf is not None else to_pl(f, resolution)[0]
        pg = pg if pg is not None else to_pl(g, resolution)[0]
    return pf, pg


# -- norms -----------------------------------------------------------------


def _taylor(coeffs, c):
    """Coefficients of ``p(c + u)`` in ``u``."""
    a = list(coeffs)
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] += c * a[j + 1]
    return a


def _difference_pieces(f: Func, g: Func):
    """Split ``[0,1]`` into pieces on which ``f - g`` is one float polynomial."""

    def poly_of(h):
        return np.asarray(h.coeffs, dtype=float)

    if isinstance(f, Polynomial) and isinstance(g, Polynomial):
        n = max(len(f.coeffs), len(g.coeffs))
        c = np.zeros(n)
        c[: len(f.coeffs)] += f.coeffs
        c[: len(g.coeffs)] -= g.coeffs
        return [(0.0, 1.0, c)]
    if isinstance(g, Polynomial):
        pieces = _difference_pieces(g, f)
        return [(a, b, -c) for a, b, c in pieces]
    # f polynomial, g PL-like
    pg = as_pl(g)
    base = poly_of(f)
    pieces = []
    for (x0, y0), (x1, y1) in zip(pg.points, pg.points[1:]):
        slope = (y1 - y0) / (x1 - x0)
        c = np.zeros(max(2, len(base)))
        c[: len(base)] += base
        c[0] -= float(y0 - slope * x0)
        c[1] -= float(slope)
        pieces.append((float(x0), float(x1), c))
    return pieces


def _max_abs_enclosure(pieces, tol: float, max_iter: int = 500_000) -> NormBounds:
    """Certified enclosure of ``max |p|`` over polynomial pieces."""
    tiebreak = count()
    lo = 0.0
    heap = []

    def upper(a, b, c):
        mid, r = 0.5 * (a + b), 0.5 * (b - a)
        t = _taylor(c, mid)
        val = abs(t[0])
        bound = val + sum(abs(tk) * r**k for k, tk in enumerate(t) if k)
        return bound, val

    for a, b, c in pieces:
        lo = max(lo, abs(_horner(c, a)), abs(_horner(c, b)))
        up, mid_val = upper(a, b, c)
        lo = max(lo, mid_val)
        heapq.heappush(heap, (-up, next(tiebreak), a, b, c))
    for _ in range(max_iter):
        if not heap or -heap[0][0] <= lo + tol:
            break
        _, _, a, b, c = heapq.heappop(heap)
        m = 0.5 * (a + b)
        for a2, b2 in ((a, m), (m, b)):
            up, mid_val = upper(a2, b2, c)
            lo = max(lo, mid_val, abs(_horner(c, m)))
            if up > lo:
                heapq.heappush(heap, (-up, next(tiebreak), a2, b2, c))
    hi = max(lo, -heap[0][0]) if heap else lo
    # float rounding slack
    slack = 1e-13 * (1.0 + hi)
    return NormBounds(float(max(0.0, lo - slack)), float(hi + slack))


def sup_norm_bounds(f: Func, g: Func, tol: float = 1e-9) -> NormBounds:
    """Enclosure ``lo <= ||f - g|| <= hi``; degenerate for exact pairs."""
    pf, pg = as_pl(f), as_pl(g)
    if pf is not None and pg is not None:
        d = float(_pl_sup(pf, pg))
        return NormBounds(d, d)
    return _max_abs_enclosure(_difference_pieces(f, g), tol)


def _pl_sup(f: PLFunction, g: PLFunction) -> Fraction:
    grid = merged_grid(f, g)
    return max(abs(a - b) for a, b in zip(values_at(f, grid), values_at(g, grid)))


def sup_norm_diff(f: Func, g: Func, tol: float = 1e-9):
    """``||f - g||`` -- a Fraction for exact pairs, else an enclosure midpoint."""
    pf, pg = as_pl(f), as_pl(g)
    if pf is not None and pg is not None:
        return _pl_sup(pf, pg)
    lo, hi = _max_abs_enclosure(_difference_pieces(f, g), tol)
    return 0.5 * (lo + hi)


def floor_norm_diff(f: Func, g: Func, tol: float = 1e-9, min_tol: float = 1e-14) -> int | None:
    """``floor(||f - g||)``, or ``None`` when the enclosure cannot be resolved."""
    pf, pg = as_pl(f), as_pl(g)
    if pf is not None and pg is not None:
        return math.floor(_pl_sup(pf, pg))
    pieces = _difference_pieces(f, g)
    while True:
        lo, hi = _max_abs_enclosure(pieces, tol)
        if math.floor(lo) == math.floor(hi) and hi != math.floor(hi):
            return math.floor(lo)
        if tol <= min_tol:
            return None
        tol = max(tol / 100.0, min_tol)


# -- crossings --------------------------------------------------------------


def _sign(q) -> int:
    return (q > 0) - (q < 0)


def level_crossings(h: PLFunction, pair=(None, None)) -> list:
    """All ``x`` with ``h(x)`` an integer, for a PL ``h``."""
    pts = h.points
    xs = h.xs
    found = {}
    flat = set()
    for k in range(len(pts) - 1):
        (x0, h0), (x1, h1) = pts[k], pts[k + 1]
        if h0 == h1:
            if h0.denominator == 1:
                found[x0] = found[x1] = int(h0)
                flat.update((x0, x1))
            continue
        lo, hi = (h0, h1) if h0 < h1 else (h1, h0)
        for level in range(math.ceil(lo), math.floor(hi) + 1):
            if level == h0:
                x = x0
            elif level == h1:
                x = x1
            else:
                x = x0 + (level - h0) * (x1 - x0) / (h1 - h0)
            found.setdefault(x, level)
    slopes = h.segment_slopes
    out = []
    for x in sorted(found):
        k = bisect.bisect_left(xs, x)
        if k < len(xs) and xs[k] == x:
            left = -_sign(slopes[k - 1]) if k > 0 else None
            right = _sign(slopes[k]) if k < len(slopes) else None
        else:
            s = _sign(slopes[k - 1])
            left, right = -s, s
        if left is None:
            left = -right
        if right is None:
            right = -left
        if left < 0 < right:
            direction = "up"
        elif right < 0 < left:
            direction = "down"
        else:
            direction = "tangent"
        out.append(Crossing(x, tuple(pair), found[x], direction, x in flat))
    return out


def crossings(f: Func, g: Func, resolution: int | None = None) -> list:
    """Sorted crossings of ``f`` and ``g``: points where ``f - g`` is an integer."""
    pf, pg = _pl_pair(f, g, resolution)
    return level_crossings(pl_difference(pf, pg), pair=(f.id, g.id))


def fractional_order(f: Func, g: Func, x) -> Order:
    """Compare the remainders of ``f(x)`` and ``g(x)``."""
    a, b = frac(f(x)), frac(g(x))
    return Order(_sign(a - b))


def slopes(f: PLFunction) -> set:
    if not isinstance(f, PLFunction):
        raise UnsupportedError("slopes are defined for PL functions only")
    return set(f.segment_slopes)


def lipschitz_bound(f: Func):
    if isinstance(f, PLFunction):
        return max(abs(s) for s in f.segment_slopes)
    if isinstance(f, Polynomial):
        return float(sum(i * abs(a) for i, a in enumerate(f.coeffs)))
    v = np.asarray(f.values)
    return float(np.max(np.abs(np.diff(v)))) * (1 << f.depth) if len(v) > 1 else 0.0


def to_pl(f: Func, resolution: int | None = None) -> tuple:
    """PL interpolant on ``resolution + 1`` equispaced nodes and an error bound.

    For a :class:`DyadicPath` with ``resolution == 2**depth`` (the default)
    the rendering is exact.  Polynomials are interpolated at exact rational
    nodes; the bound is ``h**2 / 8 * max|f''|``.
    """
    if isinstance(f, PLFunction):
        if resolution is None:
            return f, 0
        resolution = int(resolution)
    if resolution is not None and resolution < 1:
        raise DomainError("resolution must be a positive integer")
    if isinstance(f, DyadicPath):
        n = 1 << f.depth
        if resolution is None or resolution == n:
            return _render_path(f), 0
        if n % resolution == 0 and resolution & (resolution - 1) == 0:
            coarse = f.coarsen(resolution.bit_length() - 1)
            return _render_path(coarse), lipschitz_bound(f) / resolution
    if resolution is None:
        raise DomainError("a resolution is required for this representation")
    nodes = [Fraction(k, resolution) for k in range(resolution + 1)]
    if isinstance(f, Polynomial):
        vals = [f.exact(x) for x in nodes]
        curvature = sum(i * (i - 1) * abs(a) for i, a in enumerate(f.coeffs))
        bound = curvature / (8.0 * resolution * resolution)
        return PLFunction(tuple(zip(nodes, vals)), id=f.id), bound
    if isinstance(f, DyadicPath):
        path = _render_path(f)
        return PLFunction(tuple(zip(nodes, values_at(path, nodes))), id=f.id), (
            lipschitz_bound(f) / resolution
        )
    pl = f
    return PLFunction(tuple(zip(nodes, values_at(pl, nodes))), id=f.id), (
        float(lipschitz_bound(pl)) / resolution
    )
