import json
import math

import numpy as np
import pytest

from aahspec.convergence import (BoundReport, bloch_norm, delta_bound, delta_report,
                                 deviation_sweep, duality_check, hamiltonian_distance,
                                 pgf_complex_deviation, reference_convergent,
                                 samuelson_norm_check, schedule_q)
from aahspec.io import REPORT_COLUMNS, read_table, report_table, write_table
from aahspec.models import CHIRAL, ModelParams, bloch_matrix, build_cell
from aahspec.rational import Convergent, convergents_of


def test_delta_bound_values():
    assert delta_bound(15) == pytest.approx(2 * math.pi / 15)
    assert delta_bound(60) == pytest.approx(0.2094, abs=1e-4)
    assert delta_bound(60) == pytest.approx(delta_bound(15) / 2)
    assert delta_bound(1) == pytest.approx(1.622, abs=1e-3)
    with pytest.raises(ValueError):
        delta_bound(0)


def test_distance_zero_for_rational_alpha():
    assert hamiltonian_distance(Convergent(7, 5), "7/5") < 1e-14


def test_distance_golden_three_fifths():
    d = hamiltonian_distance(Convergent(3, 5), "golden", 0.0)
    assert 0 < d < delta_bound(5)


def test_distance_decreases_along_fibonacci():
    ds = [hamiltonian_distance(Convergent(p, q), "golden") for p, q in [(5, 8), (8, 13), (13, 21)]]
    assert ds[0] > ds[1] > ds[2]


def test_distance_requires_convergent():
    with pytest.raises(ValueError):
        hamiltonian_distance(Convergent(2, 5), "golden")


def test_report_pass_semantics():
    r = delta_report(Convergent(8, 13), "golden", 0.3)
    assert r.passed is True and r.margin == pytest.approx(r.bound - r.measured)
    bad = BoundReport.make("x", 1, 2, 2.0, 1.0)
    assert bad.passed is False
    none = BoundReport.make("x", 1, 2, 2.0, 1.0, assert_pass=False)
    assert none.passed is None
    assert BoundReport.from_record(r.as_record()) == r
    assert list(r.as_record()) == [c for c, _ in REPORT_COLUMNS]


def test_bloch_norm_matches_dense():
    rng = np.random.default_rng(2)
    for _ in range(30):
        q = int(rng.integers(1, 25))
        p = int(rng.choice([k for k in range(q + 1) if math.gcd(k, q) == 1]))
        c = build_cell(ModelParams(p, q, delta=rng.uniform(0, 6.3), variant=CHIRAL))
        th = rng.uniform(0, 6.3)
        ref = np.max(np.abs(np.linalg.eigvalsh(bloch_matrix(c, th))))
        assert bloch_norm(c, th) == pytest.approx(ref, abs=1e-12)


def test_samuelson_q4():
    for p in (1, 3):
        for d in (0.0, 0.4, 1.3):
            r = samuelson_norm_check(build_cell(ModelParams(p, 4, delta=d, variant=CHIRAL)))
            assert r.bound == 4.0
            assert r.measured <= 4.0
            assert r.passed


def test_samuelson_edges_dominate_grid():
    rng = np.random.default_rng(5)
    for _ in range(40):
        q = int(rng.integers(2, 40))
        p = int(rng.choice([k for k in range(1, q) if math.gcd(k, q) == 1]))
        c = build_cell(ModelParams(p, q, delta=rng.uniform(0, 6.3), variant=CHIRAL))
        edge = samuelson_norm_check(c).measured
        assert samuelson_norm_check(c, n_theta=64).measured == pytest.approx(edge, abs=1e-12)
        th = rng.uniform(0, 2 * np.pi, 8)
        assert max(bloch_norm(c, x) for x in th) <= edge + 1e-12


def test_samuelson_scalar_logged():
    r = samuelson_norm_check(build_cell(ModelParams(0, 1, delta=math.pi / 2, variant=CHIRAL)))
    assert r.passed is None
    assert r.measured == pytest.approx(4.0)
    assert r.bound == 2.0


def test_samuelson_saturated_at_half_flux():
    r = samuelson_norm_check(build_cell(ModelParams(1, 2, delta=math.pi / 4, variant=CHIRAL)))
    assert r.measured == pytest.approx(r.bound, abs=1e-12)


def test_samuelson_needs_chiral():
    with pytest.raises(ValueError):
        samuelson_norm_check(build_cell(ModelParams(1, 2)))


def test_reference_convergent():
    assert reference_convergent("golden", 260).q == 377
    assert reference_convergent("7/5", 100).q == 5


def test_self_comparison_vanishes():
    assert pgf_complex_deviation(Convergent(8, 13), "golden", 0.0, 0.1, q_ref=13) == (0.0, 0.0)


def test_deviation_needs_eps():
    with pytest.raises(ValueError):
        pgf_complex_deviation(Convergent(8, 13), "golden", 0.0, 0.0)


def test_deviation_decreases_golden():
    reps = deviation_sweep("golden", [13, 21, 34], 0.0, 0.1, 610)
    re = [r.measured for r in reps if r.name.endswith("re")]
    im = [r.measured for r in reps if r.name.endswith("im")]
    assert re[0] > re[1] > re[2]
    assert im[0] > im[1] > im[2]
    assert all(r.passed is None for r in reps)


@pytest.mark.parametrize("omega", [0.0, 1.0])
@pytest.mark.parametrize("eps", [0.05, 0.1, 0.5])
def test_deviation_non_increasing(omega, eps):
    reps = deviation_sweep("golden", [13, 21, 34, 55], omega, eps, 610)
    for part in ("re", "im"):
        v = [r.measured for r in reps if r.name.endswith(part)]
        assert all(a >= b for a, b in zip(v, v[1:])), (part, v)


def test_schedule_q():
    assert schedule_q(0.5, 0.5) == pytest.approx(64.0)


def test_duality_examples():
    for p, q in [(1, 3), (2, 5)]:
        r = duality_check(Convergent(p, q))
        assert r.measured < 1e-6 and r.passed
    r = duality_check(Convergent(1, 3), V=0.5)
    assert r.passed is None


def test_reports_roundtrip(tmp_path):
    reps = [delta_report(c, "sqrt2", d) for c in convergents_of("sqrt2", q_max=30)
            for d in (0.0, 0.3)]
    reps.append(duality_check(Convergent(1, 2)))
    for fmt in ("csv", "json"):
        path = tmp_path / f"r.{fmt}"
        write_table(report_table(reps), path, fmt)
        back = read_table(path, REPORT_COLUMNS, fmt)
        recs = [dict(zip([c for c, _ in REPORT_COLUMNS], row)) for row in back.rows]
        assert [BoundReport.from_record(x) for x in recs] == reps
    line = (tmp_path / "r.json").read_text().splitlines()[0]
    assert list(json.loads(line)) == [c for c, _ in REPORT_COLUMNS]
