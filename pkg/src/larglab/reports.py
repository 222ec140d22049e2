"""Plot-ready Monte Carlo tables: join frequencies, sampler calibration and
crossing-count separation between Brownian and polynomial pairs."""
from __future__ import annotations

import csv
import io

import numpy as np

from .errors import DomainError
from .larg import correct_join_prob, parallel_join_hits
from .sampling import sample_brownian, sample_poly
from .structure import ic_profile


def join_table(p: float, seed: int, trials: int, ks=(0, 1, 2, 3), ls=(0, 1, 2), jobs: int = 1) -> list:
    """Observed correct-join frequency against ``p^k (1-p)^l`` on a grid of ``(k, l)``."""
    if trials <= 0:
        raise DomainError("trials must be positive")
    rows = []
    for k in ks:
        for l in ls:
            near = np.ones(k + l, dtype=bool)
            wanted = np.arange(k + l) < k
            hits = parallel_join_hits(near, wanted, p, seed, trials, jobs)
            freq = hits / trials
            expected = correct_join_prob(k, l, p)
            rows.append(
                {
                    "k": k,
                    "l": l,
                    "p": p,
                    "trials": trials,
                    "expected": expected,
                    "frequency": freq,
                    "stderr": float(np.sqrt(expected * (1 - expected) / trials)),
                }
            )
    return rows


def brownian_values(seed: int, n: int, depth: int, ts=(0.5, 1.0)) -> np.ndarray:
    """``X(t)`` (without the random shift) of paths ``0..n-1`` at the dyadic times ``ts``."""
    scale = 1 << depth
    idx = []
    for t in ts:
        k = t * scale
        if k != int(k) or not 0 <= t <= 1:
            raise DomainError(f"t={t} is not a node at depth {depth}")
        idx.append(int(k))
    out = np.empty((n, len(ts)))
    for i in range(n):
        vals = sample_brownian(seed, i, depth).values
        out[i] = [vals[k] for k in idx]
    return out


def calibration_table(seed: int, n: int, depth: int, ts=(0.25, 0.5, 1.0)) -> list:
    """Empirical mean and variance of ``X(t)`` against the Brownian law ``Var X(t) = t``."""
    if n < 2:
        raise DomainError("need at least two paths")
    vals = brownian_values(seed, n, depth, ts)
    return [
        {
            "t": t,
            "paths": n,
            "depth": depth,
            "mean": float(vals[:, j].mean()),
            "variance": float(vals[:, j].var(ddof=1)),
            "expected_variance": t,
        }
        for j, t in enumerate(ts)
    ]


def separation_profiles(seed: int, pairs: int, depths=(6, 8, 10, 12, 14), max_tries: int = 20) -> dict:
    """Crossing counts per depth for Brownian pairs (with a crossing at the
    coarsest depth) and for polynomial pairs."""
    depths = sorted(depths)
    bm = []
    i = 0
    while len(bm) < pairs:
        if i >= pairs * max_tries:
            raise DomainError("too few Brownian pairs cross at the coarsest depth")
        f = sample_brownian(seed, 2 * i, depths[-1])
        g = sample_brownian(seed, 2 * i + 1, depths[-1])
        prof = ic_profile(f, g, depths)
        if prof.counts[0][1] >= 1:
            bm.append([c for _, c in prof.counts])
        i += 1
    poly = []
    for j in range(pairs):
        f, g = sample_poly(seed, 2 * j), sample_poly(seed, 2 * j + 1)
        poly.append([c for _, c in ic_profile(f, g, depths).counts])
    return {"depths": depths, "bm": np.array(bm), "poly": np.array(poly)}


def separation_table(seed: int, pairs: int, depths=(6, 8, 10, 12, 14)) -> list:
    prof = separation_profiles(seed, pairs, depths)
    rows = []
    for kind in ("bm", "poly"):
        counts = prof[kind]
        constant = int(np.all(counts == counts[:, :1], axis=1).sum())
        for j, d in enumerate(prof["depths"]):
            rows.append(
                {
                    "kind": kind,
                    "depth": d,
                    "pairs": len(counts),
                    "median": float(np.median(counts[:, j])),
                    "mean": float(counts[:, j].mean()),
                    "constant_pairs": constant,
                }
            )
    return rows


def rows_to_csv(rows: list) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()
