"""Acceptance suite: one PASS/FAIL line per criterion.

Each criterion is a plain function returning ``(ok, detail)``. The pytest
wrappers time it, record the verdict (runtime budget included) and assert.
Running this file as a script prints the same lines without pytest.
"""
import math
import time

import numpy as np
import pytest

from aahspec.convergence import (bloch_norm, delta_bound, delta_report, deviation_sweep,
                                 duality_check, samuelson_norm_check, schedule_check)
from aahspec.greens import (averaged_pgf, find_gap_zero, impurity_bound_states, local_green,
                            merge_poles, sampled_poles)
from aahspec.io import render_table, interval_table
from aahspec.models import CHIRAL, ModelParams, build_cell, chain_cell, open_chain
from aahspec.rational import convergents_of
from aahspec.spectral import (SpectrumSet, butterfly, compute_bands, detect_gaps, family_ids, family_poles,
                              family_spectrum, gap_zeros, hausdorff_distance, label_gaps,
                              spectrum_intervals)
from aahspec.transfer import EnergyClass, PropagationBlocked, transfer_matrix_at

pytestmark = pytest.mark.acceptance

RESULTS = []
CRITICAL = [(1, 2), (1, 3), (2, 5), (3, 8), (5, 13)]


def _coprime(q, rng):
    return int(rng.choice([p for p in range(1, q) if math.gcd(p, q) == 1]))


def _one_zero_per_gap(e, w):
    """Worst residual over all gaps, or inf if a gap has no single sign change."""
    worst = 0.0
    for a, b in zip(e, e[1:]):
        om, res = find_gap_zero(e, (a, b), w, full_output=True)
        if not a < om < b:
            return math.inf
        # strict decrease between poles means one zero; spot check on a grid
        xs = np.linspace(a, b, 9)[1:-1]
        vals = np.array([averaged_pgf(e, x, w) for x in xs])
        if np.count_nonzero(np.diff(np.sign(vals)) != 0) > 1:
            return math.inf
        worst = max(worst, abs(res))
    return worst


def criterion_1():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 201))
        e, w = merge_poles(rng.uniform(-4, 4, n), rng.uniform(0.5, 2, n))
        worst = max(worst, _one_zero_per_gap(e, w))
    for p, q in CRITICAL:
        e, w = sampled_poles(build_cell(ModelParams(p, q)), 64)
        worst = max(worst, _one_zero_per_gap(e, w))
    return worst < 1e-10, f"worst residual {worst:.3g}"


def criterion_2():
    rng = np.random.default_rng(2)
    worst, count = 0.0, 0
    for q in range(1, 9):
        p = _coprime(q, rng) if q > 1 else 0
        cell = build_cell(ModelParams(p, q, delta=rng.uniform(0, 2 * np.pi)))
        ss = spectrum_intervals(compute_bands(cell))
        # the grid spans the spectral hull, gaps included
        for E in np.linspace(ss.intervals[0][0], ss.intervals[-1][1], 2000):
            try:
                T = transfer_matrix_at(cell, E)
            except (ValueError, PropagationBlocked):
                continue
            if T.classification == EnergyClass.DEFICIENT:
                continue
            lam = T.eigenvalues
            worst = max(worst, abs(lam[0] * lam[1] - 1))
            count += 1
    return worst < 1e-10, f"{count} matrices, worst |l1 l2 - 1| {worst:.3g}"


def criterion_3():
    reports = [delta_report(c, alpha, d)
               for alpha in ("golden", "sqrt2")
               for c in convergents_of(alpha, q_max=987)
               for d in (0.0, 0.3, math.pi / 2)]
    bad = [r for r in reports if not r.margin > 0]
    detail = f"{len(reports)} reports, {len(bad)} with margin <= 0"
    if bad:
        detail += " (q = " + ", ".join(sorted({str(r.q) for r in bad}, key=int)) + ")"
    return not bad, detail


def criterion_4():
    rng = np.random.default_rng(4)
    worst = -math.inf
    n = 0
    for q in range(2, 234):
        p = _coprime(q, rng)
        for d in rng.uniform(0, 2 * np.pi, 20):
            r = samuelson_norm_check(build_cell(ModelParams(p, q, delta=d, variant=CHIRAL)))
            worst = max(worst, r.measured - r.bound)
            n += 1
    return worst <= 1e-9, f"{n} cells, worst norm - 2 sqrt(q) {worst:.3g}"


def criterion_5():
    reps = deviation_sweep("golden", [13, 21, 34, 55], 0.0, 0.1, 610)
    ok = True
    parts = []
    for part in ("re", "im"):
        v = [r.measured for r in reps if r.name.endswith(part)]
        ok &= all(a > b for a, b in zip(v, v[1:]))
        parts.append(part + " " + " > ".join(f"{x:.3g}" for x in v))
    sched = schedule_check("golden", 0.5, 0.5)
    ok &= bool(sched) and all(r.passed for r in sched) and all(r.q > 64 for r in sched)
    parts.append("schedule " + ", ".join(f"q={r.q}:{r.measured:.3g}" for r in sched))
    return ok, "; ".join(parts)


def criterion_6():
    n_gaps, bad = 0, 0
    for q in range(2, 21):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            params = ModelParams(p, q)
            gaps = detect_gaps(family_spectrum(params, n_theta=16))
            if not gaps:
                continue
            labels = label_gaps(params, gaps)
            v = family_ids(params, [0.5 * (g.lo + g.hi) for g in gaps])
            for g, lab, x in zip(gaps, labels, v):
                n_gaps += 1
                if lab.m * p + lab.n * q != g.index_r or abs(x - g.index_r / q) > 1e-6:
                    bad += 1
    return bad == 0 and n_gaps > 0, f"{n_gaps} gaps, {bad} mismatches"


def criterion_7():
    from aahspec.rational import Convergent
    ds = [duality_check(Convergent(p, q)).measured for p, q in CRITICAL]
    return max(ds) < 1e-6, "distances " + ", ".join(f"{d:.2g}" for d in ds)


def criterion_8():
    convs = [c for c in convergents_of("golden", q_max=55) if c.q >= 5]
    ends, ok, widths = [], True, []
    for c in convs:
        p, q = c.p % c.q, c.q
        params = ModelParams(p, q)
        gaps = detect_gaps(family_spectrum(params))
        # label (1, 0) means IDS equal to p/q, so r = p
        g = next((g for g in gaps if g.index_r == p), None)
        if g is None or g.width <= 1e-8:
            return False, f"(1,0) gap missing or closed at q={q}"
        e, w = family_poles(params)
        zs = gap_zeros(e, w, [g])
        ok &= len(zs) == 1 and g.lo < zs[0][1] < g.hi
        widths.append(g.width)
        ends.append(SpectrumSet(((g.lo, g.hi),)))
    drift = [hausdorff_distance(a, b) for a, b in zip(ends, ends[1:])]
    ok &= all(a > b for a, b in zip(drift, drift[1:]))
    return ok, ("q " + ",".join(str(c.q) for c in convs) + "; min width "
                f"{min(widths):.3g}; drift " + " > ".join(f"{d:.2g}" for d in drift))


def _reflect_check(rows):
    sets = {}
    for p, q, _, lo, hi in rows:
        sets.setdefault((p, q), []).append((lo, hi))
    worst = 0.0
    for (p, q), iv in sets.items():
        s = SpectrumSet(tuple(iv))
        worst = max(worst, hausdorff_distance(s, s.reflected()),
                    hausdorff_distance(s, SpectrumSet(tuple(sets[(q - p, q)]))))
    return worst


def criterion_9():
    a = butterfly(20)
    b = butterfly(20)
    c = butterfly(20, workers=4)
    same = len({render_table(interval_table(x)) for x in (a, b, c)}) == 1
    worst = _reflect_check(a)
    return same and worst < 1e-9, f"{len(a)} rows, byte-identical {same}, symmetry {worst:.3g}"


def criterion_10():
    cell = chain_cell([0.0], [1.0])
    (root,) = impurity_bound_states(cell, 3.0, (2.0, math.inf))
    H = np.diag(np.ones(1999), 1)
    H = H + H.T
    H[1000, 1000] = 3.0
    dense = np.linalg.eigvalsh(H)[-1]
    ok = abs(root - math.sqrt(13)) < 1e-6 and abs(dense - math.sqrt(13)) < 1e-6
    trail = []
    for sign, window in ((1, (2.0, math.inf)), (-1, (-math.inf, -2.0))):
        roots, g0 = [], []
        for v in (10.0, 100.0, 1000.0):
            (r,) = impurity_bound_states(cell, sign * v, window)
            roots.append(r)
            g0.append(abs(local_green(cell, r)))
        # the projected G0 zero sits at infinity for the uniform chain
        ok &= all(abs(x) < abs(y) for x, y in zip(roots, roots[1:]))
        ok &= all(x > y for x, y in zip(g0, g0[1:]))
        trail.append(", ".join(f"{x:.6g}" for x in roots))
    return ok, f"root {root:.12g}, dense {dense:.12g}; roots {' | '.join(trail)}"


CRITERIA = [
    (1, "interlacing: one averaged-pGF zero per pole gap", criterion_1, 10),
    (2, "unimodularity of reduced transfer matrices", criterion_2, 30),
    (3, "Delta_N below 2 pi sqrt(1/(15 q)) for every report", criterion_3, 60),
    (4, "Samuelson bound on chiral Bloch norms", criterion_4, 60),
    (5, "complex pGF deviation decreases and meets schedule", criterion_5, 120),
    (6, "gap labels and IDS in gaps for q <= 20", criterion_6, 60),
    (7, "AAH and chiral family spectra coincide", criterion_7, 60),
    (8, "(1,0) gap persists along golden convergents", criterion_8, 120),
    (9, "butterfly symmetries and determinism", criterion_9, 120),
    (10, "impurity bound state oracle", criterion_10, 30),
]


def evaluate(number, title, fn, budget):
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported like any other
        ok, detail = False, f"error: {exc!r}"
    dt = time.perf_counter() - t0
    if dt >= budget:
        ok, detail = False, detail + f"; over budget {budget} s"
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{dt:.1f} s] {detail}"
    RESULTS.append(line)
    print(line)
    return ok, line


@pytest.mark.parametrize("number,title,fn,budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, fn, budget):
    ok, line = evaluate(number, title, fn, budget)
    assert ok, line


if __name__ == "__main__":
    verdicts = [evaluate(*c)[0] for c in CRITERIA]
    raise SystemExit(0 if all(verdicts) else 1)
