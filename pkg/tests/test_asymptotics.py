import math

import numpy as np
import pytest

from dslv.asymptotics import (
    ScanConfig,
    affine_decomposition_defect,
    scan_h_growth,
    scan_y_bound,
    sup_stats,
)
from dslv.errors import DomainError
from dslv.lattice import forward_recurrence, unit_problem
from dslv.potentials import Potential, parse_potential

DECAY1 = Potential("decay", (1.0,))


def test_affine_hand_example():
    q = np.zeros(4)
    prob = unit_problem(q, 3, 1.0)
    assert list(forward_recurrence(prob, 2.0, "x", 3).values) == [-1, 1, 1, -1]
    assert list(forward_recurrence(prob, 2.0, "y", 3).values) == [1, 0, -1, 0]
    assert list(forward_recurrence(prob, 2.0, "s", 3).values) == [0, 1, 0, -1]
    assert affine_decomposition_defect(q, 2.0, 1.0, 3) == 0.0


def test_affine_h_zero():
    q = np.random.default_rng(0).uniform(-1, 1, 101)
    assert affine_decomposition_defect(q, 1.1, 0.0, 100) == 0.0


def test_affine_large_h_long_horizon():
    N = 10_000
    q = parse_potential("random:5,-0.05,0.05").values(0, N)
    assert affine_decomposition_defect(q, 1.3, 1e4, N) <= 1e-9


def test_affine_overflow_reports_inf():
    assert affine_decomposition_defect(np.zeros(2001), 6.0, 1.0, 2000) == math.inf


def test_sup_stats_matches_direct_computation():
    N = 500
    prob = unit_problem(DECAY1.lattice(0, N), N)
    st, vals = sup_stats(prob, 1.5, "y", N)
    ref = np.abs(forward_recurrence(prob, 1.5, "y", N).values)
    assert st.sup_full == ref.max() and st.sup_tenth == ref[:51].max()
    assert not st.overflow and vals is not None


def test_sup_stats_log_scale_on_overflow():
    N = 2000
    prob = unit_problem(np.zeros(N + 1), N)
    st, vals = sup_stats(prob, 6.0, "y", N)
    assert st.overflow and vals is None
    # roots of t^2 + 4t + 1: dominant modulus 2 + sqrt(3)
    growth = math.log10(2 + math.sqrt(3))
    assert st.log10_full == pytest.approx(N * growth, rel=1e-3)
    assert st.log10_tenth == pytest.approx((N // 10) * growth, rel=1e-2)


def test_scan_config_validation():
    with pytest.raises(DomainError):
        ScanConfig(lambda_grid=(), N=1000)
    with pytest.raises(DomainError):
        ScanConfig(lambda_grid=(1.0,), N=99)
    with pytest.raises(DomainError):
        ScanConfig(lambda_grid=(1.0,), stabilization_ratio=0.9)
    with pytest.raises(DomainError):
        ScanConfig(lambda_grid=(1.0,), q_families=())
    with pytest.raises(DomainError):
        ScanConfig(lambda_grid=(math.nan,))


def test_y_bound_period_four():
    rep = scan_y_bound(ScanConfig(lambda_grid=(2.0,), N=10_000))
    (row,) = rep.rows
    assert row.sup_full == 1.0 and row.passed and not row.outside_disc


def test_y_bound_period_six():
    (row,) = scan_y_bound(ScanConfig(lambda_grid=(1.0,), N=1000)).rows
    assert row.sup_full <= 2 and row.passed


def test_y_bound_constant_shift_examples():
    inside = scan_y_bound(ScanConfig((2.0,), N=10_000, q_families=(Potential("const", (1.0,)),)))
    outside = scan_y_bound(ScanConfig((3.9,), N=10_000, q_families=(Potential("const", (0.5,)),)))
    assert inside.rows[0].passed
    assert not outside.rows[0].passed and outside.rows[0].overflow


def test_y_bound_outside_disc_control():
    (row,) = scan_y_bound(ScanConfig((5.0,), N=1000)).rows
    assert row.outside_disc and not row.passed
    assert row.log10_sup_full > row.log10_sup_tenth + 100


def test_y_bound_counts_and_order():
    fams = (Potential.zero(), DECAY1, Potential("decay", (-1.0,)))
    rep = scan_y_bound(ScanConfig((0.5, 2.0, 3.5), N=2000, q_families=fams))
    assert [(r.lam, r.family) for r in rep.rows] == [
        (lam, str(f)) for lam in (0.5, 2.0, 3.5) for f in fams
    ]
    assert rep.counts() == {"pass": 9, "fail": 0}


def test_h_growth_explicit_solution():
    rep = scan_h_growth(ScanConfig((2.0,), h_grid=(100.0, 10_000.0), N=10_000))
    assert [r.sup_x_over_abs_h for r in rep.rows] == [1.0, 1.0]
    assert all(r.passed and r.affine_defect == 0 for r in rep.rows)
    assert rep.y_rows[0].passed


def test_h_growth_small_h_sup():
    rep = scan_h_growth(ScanConfig((2.0,), h_grid=(0.5, 1.0, 3.0), N=200))
    assert [r.sup_x for r in rep.rows] == [1.0, 1.0, 3.0]
    assert not any(r.passed for r in rep.rows)  # no h in the [1e2, 1e6] window


def test_h_growth_decay_family():
    cfg = ScanConfig((1.5,), h_grid=(1e2, 1e4), N=10_000, q_families=(DECAY1,))
    rows = scan_h_growth(cfg).rows
    r1, r2 = (r.sup_x_over_abs_h for r in rows)
    assert abs(r1 - r2) < 0.05 * min(r1, r2)
    assert all(r.passed for r in rows)


@pytest.mark.parametrize("lam", [0.7, 2.0, 3.3])
@pytest.mark.parametrize("fam", [Potential.zero(), DECAY1, Potential("random", (3, -0.05, 0.05))])
def test_triangle_sandwich(lam, fam):
    rep = scan_h_growth(ScanConfig((lam,), h_grid=(1.0, 7.0, 1e3), N=3000, q_families=(fam,)))
    for r in rep.rows:
        assert r.affine_defect <= 1e-9
        assert abs(r.sup_x - abs(r.h) * r.sup_y) <= r.sup_s * (1 + 1e-12) + 1e-9 * abs(r.h)


def test_h_growth_requires_two_large_h():
    with pytest.raises(DomainError):
        scan_h_growth(ScanConfig((2.0,), h_grid=(0.5, 100.0), N=200))


def test_scans_are_deterministic():
    fams = (Potential("random", (11, -0.1, 0.1)), DECAY1)
    cfg = ScanConfig((0.5, 1.5, 5.0), h_grid=(1.0, 1e2, 1e4), N=2000, q_families=fams)
    assert scan_y_bound(cfg) == scan_y_bound(cfg)
    assert scan_h_growth(cfg) == scan_h_growth(cfg)
    assert scan_h_growth(cfg, jobs=2) == scan_h_growth(cfg, jobs=1)
