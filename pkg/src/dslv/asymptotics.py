"""Empirical checks of the growth estimates ``x(n) = O(|h|)`` and ``y(n) = O(1)``.

Two kinds of evidence are produced. The affine identity

    x(n; h) = -h y(n) + s(n),

where x, y, s start from ``(-h, 1)``, ``(1, 0)`` and ``(0, 1)``, holds exactly
by linearity of the recurrence, so ``sup |x| <= |h| sup |y| + sup |s|``. The
scans then look for boundedness of y by comparing the running supremum at
the full horizon with the one at a tenth of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dslv.errors import DomainError
from dslv.lattice import forward_recurrence, initial_data, unit_problem
from dslv.parallel import run_ordered
from dslv.potentials import Potential

H_WINDOW = (1e2, 1e6)
H_RATIO_SPREAD = 0.05
_RESCALE = 1e100


def affine_decomposition_defect(q, lam: float, h: float, N: int) -> float:
    """``max_n |x(n; h) + h y(n) - s(n)| / (1 + |h|)`` over ``n = 0, ..., N``.

    Zero up to roundoff; ``inf`` if any of the three runs overflowed.
    """
    prob = unit_problem(q, N, h)
    x = forward_recurrence(prob, lam, "x", N).values
    y = forward_recurrence(prob, lam, "y", N).values
    s = forward_recurrence(prob, lam, "s", N).values
    with np.errstate(invalid="ignore", over="ignore"):
        d = np.abs(x + h * y - s)
    if not np.all(np.isfinite(d)):
        return math.inf
    return float(np.max(d)) / (1.0 + abs(h))


@dataclass(frozen=True)
class ScanConfig:
    lambda_grid: tuple[float, ...]
    h_grid: tuple[float, ...] = ()
    N: int = 10_000
    q_families: tuple[Potential, ...] = (Potential.zero(),)
    stabilization_ratio: float = 1.05

    def __post_init__(self):
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        object.__setattr__(self, "h_grid", tuple(float(v) for v in self.h_grid))
        object.__setattr__(self, "q_families", tuple(self.q_families))
        if not self.lambda_grid:
            raise DomainError("lambda grid is empty")
        if not self.q_families:
            raise DomainError("no q family given")
        if self.N < 100:
            raise DomainError(f"scan horizon must be >= 100, got {self.N}")
        if self.stabilization_ratio < 1.0:
            raise DomainError("stabilization ratio must be >= 1")
        if not all(map(math.isfinite, self.lambda_grid + self.h_grid)):
            raise DomainError("grids must be finite")


@dataclass(frozen=True)
class SupStats:
    sup_full: float
    sup_tenth: float
    log10_full: float
    log10_tenth: float
    overflow: bool


@dataclass(frozen=True)
class YBoundRow:
    lam: float
    family: str
    sup_full: float
    sup_tenth: float
    ratio: float
    log10_sup_full: float
    log10_sup_tenth: float
    outside_disc: bool
    overflow: bool
    passed: bool


@dataclass(frozen=True)
class HGrowthRow:
    lam: float
    family: str
    h: float
    sup_x: float
    sup_x_over_abs_h: float
    sup_y: float
    sup_s: float
    affine_defect: float
    log10_sup_x: float
    outside_disc: bool
    overflow: bool
    y_passed: bool
    passed: bool


@dataclass
class EstimateReport:
    mode: str
    y_rows: list[YBoundRow] = field(default_factory=list)
    h_rows: list[HGrowthRow] = field(default_factory=list)

    @property
    def rows(self) -> list:
        return self.h_rows if self.mode == "h-growth" else self.y_rows

    def counts(self) -> dict[str, int]:
        passed = sum(row.passed for row in self.rows)
        return {"pass": passed, "fail": len(self.rows) - passed}


def _log10(v: float) -> float:
    return math.log10(v) if v > 0 else -math.inf


def _scaled_log_sups(prob, lam: float, init, N: int) -> tuple[float, float]:
    # Same marching rule as forward_recurrence for p = r = 1, renormalized so
    # exponential growth stays representable; returns log10 of the running
    # sup at N // 10 and at N.
    q = prob.coeff.q.window(1, N - 1).astype(float).tolist()
    prev, cur = (complex(v) for v in initial_data(prob, init))
    log_scale = 0.0
    best = max(_log10(abs(prev)), _log10(abs(cur)))
    tenth = best if N // 10 <= 1 else None
    for n in range(1, N):
        prev, cur = cur, (2.0 - q[n - 1] - lam) * cur - prev
        mag = max(abs(prev), abs(cur))
        if mag > _RESCALE:
            prev, cur = prev / mag, cur / mag
            log_scale += math.log10(mag)
        best = max(best, _log10(abs(cur)) + log_scale)
        if n + 1 == N // 10:
            tenth = best
    return tenth, best


def sup_stats(prob, lam: float, init, N: int) -> tuple[SupStats, np.ndarray | None]:
    """Running sup of ``|x(n)|`` at ``N // 10`` and ``N`` for the given start.

    Values come straight from :func:`forward_recurrence`; when that overflows
    the logarithmic sups come from a renormalized march and the plain sups
    are reported as ``inf`` where unrepresentable.
    """
    vals = forward_recurrence(prob, lam, init, N).values
    absv = np.abs(vals)
    if np.all(np.isfinite(absv)):
        full = float(absv.max())
        tenth = float(absv[: N // 10 + 1].max())
        return SupStats(full, tenth, _log10(full), _log10(tenth), False), vals
    log_tenth, log_full = _scaled_log_sups(prob, lam, init, N)

    def back(lg):
        return 10.0**lg if lg < 308 else math.inf

    return SupStats(back(log_full), back(log_tenth), log_full, log_tenth, True), None


def _passes_ratio(st: SupStats, ratio: float) -> bool:
    if not st.overflow:
        return st.sup_full <= ratio * st.sup_tenth
    return st.log10_full - st.log10_tenth <= math.log10(ratio)


def _y_cell(args) -> YBoundRow:
    lam, family, N, ratio = args
    prob = unit_problem(family.lattice(0, N), N)
    st, _ = sup_stats(prob, lam, "y", N)
    gap = st.log10_full - st.log10_tenth
    if not st.overflow and st.sup_tenth > 0:
        r = st.sup_full / st.sup_tenth
    elif math.isfinite(gap) and gap < 308:
        r = 10.0**gap
    else:
        r = math.inf
    return YBoundRow(
        lam=lam,
        family=str(family),
        sup_full=st.sup_full,
        sup_tenth=st.sup_tenth,
        ratio=r,
        log10_sup_full=st.log10_full,
        log10_sup_tenth=st.log10_tenth,
        outside_disc=abs(lam - 2.0) >= 2.0,
        overflow=st.overflow,
        passed=_passes_ratio(st, ratio),
    )


def _h_cell(args) -> tuple[YBoundRow, list[HGrowthRow]]:
    lam, family, hs, N, ratio = args
    y_row = _y_cell((lam, family, N, ratio))
    q = family.lattice(0, N)
    base = unit_problem(q, N)
    y_st, y = sup_stats(base, lam, "y", N)
    s_st, s = sup_stats(base, lam, "s", N)

    pending = []
    for h in hs:
        prob = unit_problem(q, N, h)
        x_st, x = sup_stats(prob, lam, "x", N)
        if x is None or y is None or s is None:
            defect = math.inf
        else:
            defect = float(np.max(np.abs(x + h * y - s))) / (1.0 + abs(h))
        ah = abs(h)
        over_h = x_st.sup_full / ah if ah > 0 else math.inf
        pending.append((h, x_st, over_h, defect))

    window = [
        over_h for h, _, over_h, _ in pending if H_WINDOW[0] <= abs(h) <= H_WINDOW[1]
    ]
    ok = (
        y_row.passed
        and len(window) >= 2
        and all(map(math.isfinite, window))
        and (max(window) - min(window)) < H_RATIO_SPREAD * min(window)
    )
    return y_row, [
        HGrowthRow(
            lam=lam,
            family=str(family),
            h=h,
            sup_x=x_st.sup_full,
            sup_x_over_abs_h=over_h,
            sup_y=y_st.sup_full,
            sup_s=s_st.sup_full,
            affine_defect=defect,
            log10_sup_x=x_st.log10_full,
            outside_disc=abs(lam - 2.0) >= 2.0,
            overflow=x_st.overflow or y_st.overflow or s_st.overflow,
            y_passed=y_row.passed,
            passed=ok,
        )
        for h, x_st, over_h, defect in pending
    ]


def scan_y_bound(config: ScanConfig, jobs: int = 1) -> EstimateReport:
    """One row per (lambda, family): PASS when the sup over ``[0, N]`` is at
    most ``stabilization_ratio`` times the sup over ``[0, N // 10]``."""
    cells = [
        (lam, fam, config.N, config.stabilization_ratio)
        for lam in config.lambda_grid
        for fam in config.q_families
    ]
    return EstimateReport("y-bound", y_rows=run_ordered(_y_cell, cells, jobs))


def scan_h_growth(config: ScanConfig, jobs: int = 1) -> EstimateReport:
    """One row per (lambda, family, h).

    A (lambda, family) group passes when its y-bound row passes and
    ``sup |x| / |h|`` varies by less than 5% over the h values with
    ``|h|`` in ``[1e2, 1e6]`` (at least two are needed).
    """
    if sum(abs(h) >= 1 for h in config.h_grid) < 2:
        raise DomainError("h grid needs at least two values with |h| >= 1")
    cells = [
        (lam, fam, config.h_grid, config.N, config.stabilization_ratio)
        for lam in config.lambda_grid
        for fam in config.q_families
    ]
    groups = run_ordered(_h_cell, cells, jobs)
    return EstimateReport(
        "h-growth",
        y_rows=[y_row for y_row, _ in groups],
        h_rows=[row for _, rows in groups for row in rows],
    )
