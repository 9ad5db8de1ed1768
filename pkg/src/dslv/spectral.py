"""Spectrum of the two-point boundary problem by two independent routes.

Route one folds the boundary conditions into a Jacobi (symmetric tridiagonal)
matrix and bisects with Sturm counts. Route two shoots: it enforces the left
condition exactly, marches the recurrence and finds the zeros of the right
boundary mismatch ``phi(lam) = x(b+1) + k x(b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dslv.errors import BracketError, DomainError, NumericalFailure
from dslv.lattice import LatticeFunction, ProblemSpec, forward_recurrence, r_norm

PIVOT_TINY = 1e-300
SCAN_POINTS_PER_ROOT = 8
SCAN_MAX_FACTOR = 2**14


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Symmetric tridiagonal matrix with ``diag`` (length N) and ``offdiag``
    (length N - 1); ``weight`` keeps the r(n) used to symmetrize and ``a`` the
    lattice index of the first row."""

    diag: np.ndarray
    offdiag: np.ndarray
    weight: np.ndarray
    a: int = 1

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        e = np.asarray(self.offdiag, dtype=float)
        w = np.asarray(self.weight, dtype=float)
        if d.ndim != 1 or d.size < 1:
            raise DomainError("operator needs at least one diagonal entry")
        if e.shape != (d.size - 1,) or w.shape != d.shape:
            raise DomainError("inconsistent tridiagonal array lengths")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)
        object.__setattr__(self, "weight", w)

    @property
    def dim(self) -> int:
        return self.diag.size

    def gershgorin(self) -> tuple[float, float]:
        radius = np.zeros(self.dim)
        radius[:-1] += np.abs(self.offdiag)
        radius[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - radius)), float(np.max(self.diag + radius))

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True, eq=False)
class EigenPair:
    eigenvalue: float
    vector: LatticeFunction
    method: str
    defect: float


@dataclass(eq=False)
class SpectrumReport:
    """Both spectra, their elementwise deviation and eigenvector orthogonality."""

    sturm: list[float]
    shooting: list[float] | None
    deviations: list[float]
    max_deviation: float
    spacings: list[float]
    max_orthogonality: float
    eigenpairs: list[EigenPair]
    outside_disc: list[bool]
    notes: list[str] = field(default_factory=list)


def assemble_operator(problem: ProblemSpec) -> TridiagonalOperator:
    """Jacobi matrix of the boundary problem.

    Row n reads ``-p(n-1) x(n-1) + (p(n) + p(n-1) - q(n)) x(n) - p(n) x(n+1)
    = lam r(n) x(n)``; substituting ``x(a-1) = -h x(a)`` adds ``h p(a-1)`` to
    the first diagonal entry and ``x(b+1) = -k x(b)`` adds ``k p(b)`` to the
    last. The result is congruence-transformed with ``diag(1/sqrt(r))``.
    """
    a, b = problem.a, problem.b
    c = problem.coeff
    p_prev = c.p.window(a - 1, b - 1).astype(float)
    p_cur = c.p.window(a, b).astype(float)
    q = c.q.window(a, b).astype(float)
    r = c.r.window(a, b).astype(float)
    if np.any(p_prev <= 0) or np.any(p_cur <= 0) or np.any(r <= 0):
        raise DomainError("p and r must be positive")

    diag = p_cur + p_prev - q
    diag[0] += problem.boundary.h * p_prev[0]
    diag[-1] += problem.boundary.k * p_cur[-1]
    off = -p_cur[:-1]

    sr = np.sqrt(r)
    return TridiagonalOperator(diag / r, off / (sr[:-1] * sr[1:]), r, a)


def _sturm_counts(T: TridiagonalOperator, mu: np.ndarray) -> np.ndarray:
    off2 = T.offdiag**2
    pivmin = PIVOT_TINY * max(1.0, float(np.max(off2, initial=0.0)))
    d = T.diag[0] - mu
    d = np.where(np.abs(d) < pivmin, np.where(d < 0, -pivmin, pivmin), d)
    count = (d < 0).astype(int)
    for i in range(1, T.dim):
        d = (T.diag[i] - mu) - off2[i - 1] / d
        d = np.where(np.abs(d) < pivmin, np.where(d < 0, -pivmin, pivmin), d)
        count += d < 0
    return count


def sturm_count(T: TridiagonalOperator, mu: float) -> int:
    """Number of eigenvalues of ``T`` strictly below ``mu``."""
    return int(_sturm_counts(T, np.array([float(mu)]))[0])


def eigenvalues_bisection(T: TridiagonalOperator, tol: float = 1e-12) -> list[float]:
    """All eigenvalues of ``T`` in ascending order, each to bracket width ``tol``.

    The N brackets start from the Gershgorin interval and are bisected
    together, one Sturm count per bracket per sweep.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    lo0, hi0 = T.gershgorin()
    pad = 1e-12 * max(1.0, abs(lo0), abs(hi0))
    lo = np.full(T.dim, lo0 - pad)
    hi = np.full(T.dim, hi0 + pad)
    target = np.arange(T.dim)
    while True:
        active = hi - lo > tol
        mid = 0.5 * (lo + hi)
        # floating midpoint collapsed onto an endpoint: bracket is as tight as it gets
        active &= (mid > lo) & (mid < hi)
        if not active.any():
            break
        counts = _sturm_counts(T, mid[active])
        idx = np.flatnonzero(active)
        above = counts > target[idx]
        hi[idx[above]] = mid[active][above]
        lo[idx[~above]] = mid[active][~above]
    return (0.5 * (lo + hi)).tolist()


def characteristic_function(problem: ProblemSpec, lam: float) -> float:
    """``phi(lam) = x(b+1) + k x(b)`` for the solution with ``x(a-1) = -h``,
    ``x(a) = 1``. Its zeros are exactly the eigenvalues."""
    x = forward_recurrence(problem, lam, (-problem.boundary.h, 1.0))
    return x[problem.b + 1] + problem.boundary.k * x[problem.b]


def _phi_scaled(problem: ProblemSpec, lams: np.ndarray) -> np.ndarray:
    # Marches every lam at once, rescaling by positive factors so the sign of
    # phi survives overflow-prone horizons; magnitudes are not meaningful.
    a, b = problem.a, problem.b
    c = problem.coeff
    p = c.p.window(a - 1, b).astype(float)
    q = c.q.window(a, b).astype(float)
    r = c.r.window(a, b).astype(float)
    prev = np.full(lams.shape, -problem.boundary.h)
    cur = np.ones(lams.shape)
    for j in range(b - a + 1):
        nxt = ((p[j + 1] + p[j] - q[j] - lams * r[j]) * cur - p[j] * prev) / p[j + 1]
        scale = np.maximum(np.abs(nxt), np.abs(cur))
        scale = np.where(scale > 1e100, scale, 1.0)
        prev, cur = cur / scale, nxt / scale
    return cur + problem.boundary.k * prev


def _bisect_phi(problem: ProblemSpec, lo: float, hi: float, f_lo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = _phi_scaled(problem, np.array([mid]))[0]
        if f_mid == 0:
            return mid
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def eigenvalues_shooting(problem: ProblemSpec, tol: float = 1e-12) -> list[float]:
    """Eigenvalues as the sign changes of ``phi`` over the Gershgorin interval.

    The scan grid starts at 8N points and doubles until N sign changes are
    seen; more than ``2**14 N`` points raises :class:`BracketError`.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    T = assemble_operator(problem)
    n_roots = T.dim
    lo, hi = T.gershgorin()
    pad = 1e-3 * max(1.0, hi - lo)
    lo, hi = lo - pad, hi + pad

    points = SCAN_POINTS_PER_ROOT * n_roots
    while True:
        grid = np.linspace(lo, hi, points)
        f = _phi_scaled(problem, grid)
        exact = [float(grid[i]) for i in np.flatnonzero(f == 0)]
        sign_change = (f[:-1] * f[1:] < 0).nonzero()[0]
        if len(exact) + sign_change.size == n_roots:
            break
        points *= 2
        if points > SCAN_MAX_FACTOR * n_roots:
            raise BracketError(
                f"found {len(exact) + sign_change.size} of {n_roots} sign changes "
                f"with {points // 2} scan points"
            )
    roots = exact + [
        _bisect_phi(problem, float(grid[i]), float(grid[i + 1]), float(f[i]), tol)
        for i in sign_change
    ]
    return sorted(roots)


def polish_eigenvalue(T: TridiagonalOperator, lam: float, window: float = 1e-6) -> float:
    """Bisect to full precision when ``[lam - w, lam + w]`` isolates exactly one
    eigenvalue (``w = window * max(1, |lam|)``); otherwise return ``lam``.

    Shooting from the left amplifies eigenvalue errors at the spectrum edges,
    so eigenvectors are built from the polished value.
    """
    w = window * max(1.0, abs(lam))
    lo, hi = lam - w, lam + w
    c_lo, c_hi = _sturm_counts(T, np.array([lo, hi]))
    if c_hi - c_lo != 1:
        return float(lam)
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            return float(mid)
        if sturm_count(T, mid) > c_lo:
            hi = mid
        else:
            lo = mid


def eigenvector(problem: ProblemSpec, lam: float, method: str = "sturm_bisection") -> EigenPair:
    """Shooting solution at ``lam`` on ``[a, b]``, scaled to unit r-weighted norm.

    ``lam`` is first polished with :func:`polish_eigenvalue`; the stored
    eigenvalue is the polished one. The normalized right-boundary defect ``|x(b+1) + k x(b)|`` is recorded;
    above 1e-6 ``lam`` is not an eigenvalue and :class:`NumericalFailure` is raised.
    """
    a, b = problem.a, problem.b
    lam = polish_eigenvalue(assemble_operator(problem), lam)
    x = forward_recurrence(problem, lam, (-problem.boundary.h, 1.0))
    norm = r_norm(x, problem.coeff.r, a, b)
    if norm == 0 or not math.isfinite(norm):
        raise NumericalFailure(f"degenerate eigenvector norm {norm} at lambda={lam}")
    defect = abs(x[b + 1] + problem.boundary.k * x[b]) / norm
    if defect > 1e-6:
        raise NumericalFailure(f"boundary defect {defect:.3g} at lambda={lam}: not an eigenvalue")
    return EigenPair(float(lam), LatticeFunction(a, x.window(a, b) / norm), method, defect)


def cross_validate(problem: ProblemSpec, tol: float = 1e-12) -> SpectrumReport:
    T = assemble_operator(problem)
    sturm = eigenvalues_bisection(T, tol)
    notes = []
    try:
        shooting = eigenvalues_shooting(problem, tol)
    except BracketError as exc:
        shooting = None
        notes.append(f"shooting failed ({exc}); Sturm bisection used alone")

    if shooting is not None:
        deviations = [abs(s - t) for s, t in zip(sturm, shooting)]
        max_dev = max(deviations)
    else:
        deviations, max_dev = [], math.nan

    pairs = [eigenvector(problem, lam) for lam in sturm]
    vecs = np.array([ep.vector.values for ep in pairs])
    gram = (vecs * T.weight) @ vecs.T
    off = gram - np.diag(np.diag(gram))
    max_orth = float(np.max(np.abs(off))) if len(pairs) > 1 else 0.0

    outside = [not 0.0 <= lam <= 4.0 for lam in sturm]
    if any(outside):
        notes.append(f"{sum(outside)} eigenvalue(s) outside [0, 4]")
    return SpectrumReport(
        sturm=sturm,
        shooting=shooting,
        deviations=deviations,
        max_deviation=max_dev,
        spacings=np.diff(sturm).tolist(),
        max_orthogonality=max_orth,
        eigenpairs=pairs,
        outside_disc=outside,
        notes=notes,
    )
