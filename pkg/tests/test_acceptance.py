"""End-to-end acceptance checks.  Each test prints one PASS/FAIL line."""
import json
import math
import time
from fractions import Fraction
from itertools import groupby

import numpy as np
import pytest

from larglab.cli import main
from larglab.errors import ResolutionExhausted, StructuralError
from larglab.funcspace import PLFunction, as_pl, compose, crossings, pl_difference
from larglab.larg import build_larg, estimate_join_frequency
from larglab.matcher import (
    PartialMatch,
    back_and_forth,
    build_icd_target,
    build_sd_target,
    certify_prefixes,
    check_order_preserving,
    check_suitable_matching,
    is_step_isometry,
)
from larglab.reports import calibration_table, separation_profiles
from larglab.sampling import FamilySpec, sample_brownian, sample_family, sample_pl
from larglab.structure import all_crossings, check_transverse, crossing_partition

Q = Fraction


def report(name, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


def homeomorphism(rng) -> PLFunction:
    k = int(rng.integers(1, 5))
    xs = np.sort(rng.choice(np.arange(1, 256), k, replace=False))
    ys = np.sort(rng.choice(np.arange(1, 256), k, replace=False))
    inner = tuple((Q(int(x), 256), Q(int(y), 256)) for x, y in zip(xs, ys))
    return PLFunction(((Q(0), Q(0)),) + inner + ((Q(1), Q(1)),))


def normalised(fs):
    return [pl_difference(f, fs[0]).with_id(f.id) for f in fs]


def test_join_frequency():
    t0 = time.time()
    fam = [PLFunction.constant(c, id=i) for i, c in enumerate((Q(1, 4), Q(1, 2), Q(-1, 2)))]
    est = estimate_join_frequency(fam, PLFunction.constant(0), fam[:2], 10_000, 0.5, 2024)
    dt = time.time() - t0
    ok = (est.k, est.l) == (2, 1) and abs(est.frequency - 0.125) <= 0.0099 and dt < 10
    report("join frequency", ok, f"k=2 l=1 p=0.5 freq={est.frequency:.4f} expected 0.125 +- 0.0099, {dt:.1f}s")


def _grid_crossings(f: PLFunction, g: PLFunction, n=100_000):
    """Integer-level sign changes of ``f - g`` on a uniform grid: (cell midpoint, level)."""
    xs = np.linspace(0.0, 1.0, n + 1)
    h = np.interp(xs, f.float_xs, f.float_ys) - np.interp(xs, g.float_xs, g.float_ys)
    fl = np.floor(h)
    out = []
    for k in np.nonzero(fl[1:] != fl[:-1])[0]:
        a, b = int(fl[k]), int(fl[k + 1])
        mid = (xs[k] + xs[k + 1]) / 2
        levels = range(a + 1, b + 1) if b > a else range(a, b, -1)
        out.extend((mid, lv) for lv in levels)
    return out


def test_crossing_oracle():
    t0 = time.time()
    bad = []
    total = 0
    for i in range(200):
        f, g = sample_pl(77, 2 * i), sample_pl(77, 2 * i + 1)
        exact = [(float(c.x), c.offset) for c in crossings(f, g) if 0 < c.x < 1]
        grid = _grid_crossings(f, g)
        total += len(exact)
        if len(exact) != len(grid) or any(
            lv != lw or abs(x - y) > 2e-5 for (x, lv), (y, lw) in zip(exact, grid)
        ):
            bad.append(i)
    dt = time.time() - t0
    report("crossing oracle", not bad and dt < 30, f"200 pairs, {total} crossings, mismatches={bad}, {dt:.1f}s")


def test_order_preserving_law():
    rng = np.random.default_rng(5)
    passed = generated = broken = 0
    errors = []
    adversarial = []
    seed = 0
    while generated < 500:
        raw = list(sample_family(FamilySpec("pl", 4, seed)).functions)
        fs = normalised(raw)
        phi = homeomorphism(rng)
        gs = [compose(f, phi) for f in fs]
        instances = [(fs, gs)]
        g_new = pl_difference(sample_pl(seed, 999), raw[0]).with_id(999)
        try:
            t, _ = build_sd_target(g_new, PartialMatch(fs, gs))
            instances.append((fs + [g_new], gs + [t]))
        except StructuralError:
            pass
        for F, G in instances:
            if generated >= 500:
                break
            try:
                if not check_order_preserving(F, G):
                    errors.append(f"seed {seed}: generator produced a non-order-preserving instance")
                    continue
                generated += 1
                passed += bool(is_step_isometry(F, G))
            except Exception as exc:  # the law demands zero exceptions
                errors.append(f"seed {seed}: {exc!r}")
        if len(adversarial) < 50:
            adversarial.append((fs, gs))
        seed += 1
    for fs, gs in adversarial:
        # shift one image by an integer large enough to change its distance floor to member 0
        j = len(fs) - 1
        norm = max(abs(y) for _, y in gs[j].points)
        s = 2 * math.ceil(norm) + 2
        G = gs[:j] + [gs[j].shifted(s)]
        try:
            broken += not check_order_preserving(fs, G) and not is_step_isometry(fs, G)
        except Exception as exc:
            errors.append(f"adversarial: {exc!r}")
    ok = passed == 500 and broken == 50 and not errors
    report("order-preserving law", ok, f"{passed}/500 step-isometries, {broken}/50 broken rejected, errors={errors[:3]}")


def test_suitable_matching_law():
    rng = np.random.default_rng(11)
    fixtures = []
    for s in range(30):
        fs = normalised(list(sample_family(FamilySpec("pl", 4, 500 + s)).functions))
        phi = homeomorphism(rng)
        fixtures.append(("reparametrized", fs, [compose(f, phi) for f in fs]))
    for s in range(20):
        fs = normalised([as_pl(sample_brownian(s, i, 7)).with_id(i) for i in range(4)])
        phi = homeomorphism(rng)
        gs = [compose(f, phi) for f in fs]
        for k in (1, 2, 3):
            try:
                g, _ = build_icd_target(fs[k], PartialMatch(fs[:k], gs[:k], mode="icd"))
            except (StructuralError, ResolutionExhausted):
                continue
            fixtures.append(("target", fs[: k + 1], gs[:k] + [g]))
    for seed in (1, 2, 3):
        V = sample_family(FamilySpec("bm", 8, 40 + seed, 6))
        W = sample_family(FamilySpec("bm", 8, 50 + seed, 6))
        G1, G2 = build_larg(V, 0.5, seed), build_larg(W, 0.5, seed + 7)
        for A, B, GA, GB in ((V, V, G1, G1), (V, W, G1, G2)):
            tr = back_and_forth(A, B, GA, GB, 4, mode="icd", budget=300, depth_cap=8)
            depth = tr.steps[-1]["depth"] if tr.steps else 6
            fa, fb = A.at_depth(depth), B.at_depth(depth)
            for n in range(2, len(tr.pairs) + 1):
                F = normalised([as_pl(fa.member(v)).with_id(v) for v, _ in tr.pairs[:n]])
                G = normalised([as_pl(fb.member(w)).with_id(w) for _, w in tr.pairs[:n]])
                fixtures.append(("engine", F, G))
    errors = []
    matched = passed = 0
    for kind, F, G in fixtures[:100]:
        try:
            if not check_suitable_matching(F, G, None, None).ok:
                errors.append(f"{kind} fixture is not suitably matched")
                continue
            matched += 1
            passed += bool(is_step_isometry(F, G))
        except Exception as exc:
            errors.append(f"{kind}: {exc!r}")
    kinds = {k: sum(1 for f in fixtures[:100] if f[0] == k) for k in ("reparametrized", "target", "engine")}
    ok = matched >= 100 and passed == matched and not errors
    report("suitable-matching law", ok, f"{passed}/{matched} step-isometries over fixtures {kinds}, errors={errors[:3]}")


def test_back_and_forth_engine():
    t0 = time.time()
    accepted = 0
    failures = []
    lengths = []
    for s in range(20):
        V = sample_family(FamilySpec("pl", 60, 2 * s + 100))
        W = sample_family(FamilySpec("pl", 60, 2 * s + 101))
        G1, G2 = build_larg(V, 0.5, s), build_larg(W, 0.5, s + 1000)
        tr = back_and_forth(V, W, G1, G2, 10, budget=10_000)
        accepted += tr.status == "accepted"
        lengths.append(len(tr.pairs))
        for row in certify_prefixes(tr, V, W, G1, G2):
            if not (row["adjacency"] and row["step_isometry"] and row["order_or_matching"]):
                failures.append((s, row))
    dt = time.time() - t0
    rate = accepted / 20
    ok = not failures and dt < 300
    report(
        "back-and-forth engine",
        ok,
        f"acceptance rate {rate:.0%} (target 50%), matched prefix lengths {lengths}, "
        f"uncertified prefixes={failures[:2]}, {dt:.0f}s",
    )


def test_transversality_at_scale():
    t0 = time.time()
    viol = shared = 0
    for s in range(20):
        rep = check_transverse(sample_family(FamilySpec("pl", 100, 3000 + s)))
        viol += len(rep.violations)
        shared += sum(a.kind == "shared_slope" for a in rep.advisories)
    dt = time.time() - t0
    report("transversality", viol == 0 and shared == 0 and dt < 120, f"{viol} violations, {shared} shared slopes, {dt:.0f}s")


def _oracle_runs(fs):
    events = sorted((c.x, pair) for pair, crs in all_crossings(fs).items() for c in crs)
    return [(xs[0][0], xs[-1][0], pair) for pair, xs in ((p, list(g)) for p, g in groupby(events, key=lambda e: e[1]))]


def test_crossing_partition():
    bad = []
    for s in range(50):
        fs = list(sample_family(FamilySpec("pl", 4, 7000 + s)).functions)
        cells = crossing_partition(fs).cells
        table = all_crossings(fs)
        tiles = cells[0].lo == 0 and cells[-1].hi == 1 and all(a.hi == b.lo for a, b in zip(cells, cells[1:]))
        open_free = all(
            not any(c.lo < x.x < c.hi for crs in table.values() for x in crs) for c in cells if not c.closed
        )
        single = all(
            {p for p, crs in table.items() for x in crs if c.lo <= x.x <= c.hi} == {c.pair} for c in cells if c.closed
        )
        oracle = [(c.lo, c.hi, c.pair) for c in cells if c.closed] == _oracle_runs(fs)
        if not (tiles and open_free and single and oracle):
            bad.append(s)
    report("crossing partition", not bad, f"50 families, failures={bad}")


def test_brownian_calibration():
    t0 = time.time()
    rows = {r["t"]: r for r in calibration_table(1, 10_000, 10, ts=(0.5, 1.0))}
    v1, vh = rows[1.0]["variance"], rows[0.5]["variance"]
    ok = 0.95 <= v1 <= 1.05 and 0.45 <= vh <= 0.55
    report("Brownian calibration", ok, f"Var X(1)={v1:.4f} Var X(1/2)={vh:.4f}, {time.time() - t0:.1f}s")


def test_separation_statistic():
    t0 = time.time()
    prof = separation_profiles(7, 100, (6, 8, 10, 12, 14))
    med = np.median(prof["bm"], axis=0)
    poly = prof["poly"]
    constant = int(np.all(poly == poly[:, :1], axis=1).sum())
    increasing = bool(np.all(np.diff(med) > 0))
    dt = time.time() - t0
    ok = increasing and constant == 100 and dt < 120
    report("separation statistic", ok, f"Brownian medians {med.tolist()}, constant polynomial pairs {constant}/100, {dt:.1f}s")


def _run_twice(tmp_path, name, argv):
    outs = []
    for k in (0, 1):
        out = tmp_path / f"{name}-{k}.out"
        try:
            code = main([str(a) for a in argv] + ["--out", str(out)])
        except SystemExit as exc:
            code = exc.code
        outs.append((code, out.read_bytes() if out.exists() else None))
    return outs[0] == outs[1] and outs[0][1] is not None, outs[0][0]


def test_cli_determinism(tmp_path):
    fam = tmp_path / "fam.json"
    bm = tmp_path / "bm.json"
    graph = tmp_path / "g.json"
    main(["sample", "--kind", "pl", "--n", "10", "--seed", "4", "--out", str(fam)])
    main(["sample", "--kind", "bm", "--n", "3", "--depth", "8", "--seed", "4", "--out", str(bm)])
    main(["larg", "--family", str(fam), "--p", "0.5", "--seed", "1", "--out", str(graph)])
    commands = {
        "sample-pl": ["sample", "--kind", "pl", "--n", 5, "--seed", 2],
        "sample-poly": ["sample", "--kind", "poly", "--n", 5, "--seed", 2],
        "sample-bm": ["sample", "--kind", "bm", "--n", 2, "--depth", 8, "--seed", 2],
        "check": ["check", "--family", fam],
        "partition": ["partition", "--family", fam, "--ids", 0, 1, 2],
        "larg": ["larg", "--family", fam, "--p", 0.5, "--seed", 1],
        "match": ["match", "--left", fam, "--graph-left", graph, "--right", fam, "--graph-right", graph, "--steps", 2],
        "ic-profile": ["ic-profile", "--family", bm, "--depths", 4, 6, 8],
        "ic-profile-csv": ["ic-profile", "--family", bm, "--depths", 4, 6, 8, "--format", "csv"],
        "join-prob": ["join-prob", "--k", 2, "--l", 1, "--p", 0.5, "--trials", 1000, "--seed", 3],
        "report-join": ["report", "join", "--trials", 500, "--seed", 3, "--jobs", 2],
        "report-calibration": ["report", "calibration", "--paths", 100, "--depth", 6],
        "report-separation": ["report", "separation", "--pairs", 5, "--depths", 4, 6, 8],
    }
    bad = []
    for name, argv in commands.items():
        same, code = _run_twice(tmp_path, name, argv)
        if not same or code != 0:
            bad.append(name)
    report("CLI determinism", not bad, f"{len(commands)} commands rerun, differing or failing={bad}")
