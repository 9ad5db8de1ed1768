"""Lattice functions, problem data, difference calculus and the marching solver.

Everything here works on finite sequences indexed by consecutive integers.
The difference equation handled throughout is

    p(n) x(n+1) - (p(n) + p(n-1)) x(n) + p(n-1) x(n-1) + (q(n) + lam r(n)) x(n) = 0

for ``n = a, ..., b``, closed by the separated conditions
``x(a-1) + h x(a) = 0`` and ``x(b+1) + k x(b) = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from dslv.errors import DomainError, IndexRangeError

DEFAULT_RTOL = 1e-10

Scalar = Union[int, float, complex]


def _as_python(value):
    return value.item() if isinstance(value, np.generic) else value


@dataclass(frozen=True, eq=False)
class LatticeFunction:
    """Finite sequence ``f(start), f(start + 1), ..., f(stop)``.

    ``values`` is stored as a read-only 1-D numpy array. Integer, float,
    complex and object (e.g. ``Fraction``) dtypes are all accepted so that
    identity checks can run in exact arithmetic.
    """

    start: int
    values: np.ndarray

    def __post_init__(self):
        if isinstance(self.start, bool) or not isinstance(self.start, (int, np.integer)):
            raise DomainError(f"start index must be an integer, got {self.start!r}")
        vals = np.array(self.values)
        if vals.ndim != 1 or vals.size == 0:
            raise DomainError("a lattice function needs a non-empty 1-D array of values")
        vals.setflags(write=False)
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, func, start: int, stop: int) -> "LatticeFunction":
        return cls(start, [func(n) for n in range(start, stop + 1)])

    @property
    def stop(self) -> int:
        """Last index (inclusive)."""
        return self.start + self.values.size - 1

    @property
    def indices(self) -> range:
        return range(self.start, self.stop + 1)

    def __len__(self) -> int:
        return self.values.size

    def covers(self, lo: int, hi: int) -> bool:
        return self.start <= lo and hi <= self.stop

    def require(self, lo: int, hi: int, what: str = "lattice function") -> None:
        if not self.covers(lo, hi):
            raise IndexRangeError(
                f"{what} is defined on [{self.start}, {self.stop}] "
                f"but [{lo}, {hi}] is required"
            )

    def __getitem__(self, n: int) -> Scalar:
        if isinstance(n, slice):
            raise TypeError("use window(lo, hi) for ranges")
        if not self.start <= n <= self.stop:
            raise IndexRangeError(f"index {n} outside [{self.start}, {self.stop}]")
        return _as_python(self.values[n - self.start])

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Values on ``[lo, hi]`` as an array view."""
        self.require(lo, hi)
        return self.values[lo - self.start : hi - self.start + 1]

    def restrict(self, lo: int, hi: int) -> "LatticeFunction":
        return LatticeFunction(lo, self.window(lo, hi))

    def items(self) -> Iterator[tuple[int, Scalar]]:
        for i, v in enumerate(self.values):
            yield self.start + i, _as_python(v)

    def is_real(self, atol: float = 0.0) -> bool:
        if not np.iscomplexobj(self.values):
            return True
        return bool(np.all(np.abs(self.values.imag) <= atol))

    def real(self) -> "LatticeFunction":
        return LatticeFunction(self.start, np.real(self.values))

    def __repr__(self) -> str:
        return f"LatticeFunction(start={self.start}, values={self.values!r})"


@dataclass(frozen=True)
class GridSpec:
    """Integer interval ``[a, b]``; solutions live on ``[a - 1, b + 1]``."""

    a: int
    b: int

    def __post_init__(self):
        for name in ("a", "b"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise DomainError(f"{name} must be an integer, got {v!r}")
        if self.a < 0:
            raise DomainError(f"a must be >= 0, got {self.a}")
        if self.a > self.b:
            raise DomainError(f"need a <= b, got a={self.a}, b={self.b}")

    @property
    def size(self) -> int:
        return self.b - self.a + 1


CoefficientInput = Union[float, Sequence[float], np.ndarray, LatticeFunction]


def _coefficient(value: CoefficientInput, lo: int, hi: int, name: str) -> LatticeFunction:
    if isinstance(value, LatticeFunction):
        return value
    arr = np.asarray(value)
    if arr.ndim == 0:
        return LatticeFunction(lo, np.full(hi - lo + 1, arr.item(), dtype=float))
    if arr.shape != (hi - lo + 1,):
        raise DomainError(
            f"{name} must have {hi - lo + 1} values for [{lo}, {hi}], got shape {arr.shape}"
        )
    return LatticeFunction(lo, arr.astype(float))


@dataclass(frozen=True, eq=False)
class Coefficients:
    """Coefficient sequences ``p`` on ``[a-1, b]``, ``q`` and ``r`` on ``[a, b]``.

    Each sequence may extend past its minimal range; the marching solver uses
    the extra values when asked for a horizon beyond ``b + 1``.
    """

    p: LatticeFunction
    q: LatticeFunction
    r: LatticeFunction

    def __post_init__(self):
        for name in ("p", "q", "r"):
            vals = getattr(self, name).values
            if np.iscomplexobj(vals):
                raise DomainError(f"{name} must be real")
            if not np.all(np.isfinite(vals.astype(float))):
                raise DomainError(f"{name} must be finite")
        if np.any(self.p.values <= 0):
            raise DomainError("p(n) must be positive everywhere")
        if np.any(self.r.values <= 0):
            raise DomainError("r(n) must be positive everywhere")

    @classmethod
    def on_grid(
        cls,
        grid: GridSpec,
        p: CoefficientInput = 1.0,
        q: CoefficientInput = 0.0,
        r: CoefficientInput = 1.0,
    ) -> "Coefficients":
        """Build coefficients from scalars (constant), arrays over the exact
        ranges, or ready-made lattice functions."""
        return cls(
            p=_coefficient(p, grid.a - 1, grid.b, "p"),
            q=_coefficient(q, grid.a, grid.b, "q"),
            r=_coefficient(r, grid.a, grid.b, "r"),
        )


def alpha_to_h(alpha: float, p_a: float) -> float:
    """Convert the angle form ``cos(alpha) x(a) - sin(alpha) p(a) grad x(a) = 0``
    of the left condition into ``x(a-1) + h x(a) = 0``.

    Returns ``h = cot(alpha) / p_a - 1``.
    """
    if not 0.0 < alpha < math.pi:
        raise DomainError(f"alpha must lie in (0, pi), got {alpha}")
    if alpha < 1e-12 or math.pi - alpha < 1e-12:
        raise DomainError("cot(alpha) is unbounded this close to 0 or pi")
    if p_a <= 0:
        raise DomainError(f"p(a) must be positive, got {p_a}")
    return math.cos(alpha) / math.sin(alpha) / p_a - 1.0


@dataclass(frozen=True)
class BoundaryData:
    """Left/right boundary parameters ``h`` and ``k``.

    ``alpha`` optionally records the angle the left condition came from; the
    owning :class:`ProblemSpec` checks it against ``h``.
    """

    h: float
    k: float = 0.0
    alpha: float | None = None

    def __post_init__(self):
        for name in ("h", "k"):
            v = getattr(self, name)
            if isinstance(v, complex) or not math.isfinite(v):
                raise DomainError(f"{name} must be a finite real number, got {v!r}")
        if self.alpha is not None and not 0.0 < self.alpha < math.pi:
            raise DomainError(f"alpha must lie in (0, pi), got {self.alpha}")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    grid: GridSpec
    coeff: Coefficients
    boundary: BoundaryData

    def __post_init__(self):
        a, b = self.grid.a, self.grid.b
        self.coeff.p.require(a - 1, b, "p")
        self.coeff.q.require(a, b, "q")
        self.coeff.r.require(a, b, "r")
        alpha = self.boundary.alpha
        if alpha is not None:
            h_alpha = alpha_to_h(alpha, self.coeff.p[a])
            if abs(h_alpha - self.boundary.h) > 1e-12 * max(1.0, abs(h_alpha)):
                raise DomainError(
                    f"h={self.boundary.h} disagrees with alpha={alpha} (expects h={h_alpha})"
                )

    @property
    def a(self) -> int:
        return self.grid.a

    @property
    def b(self) -> int:
        return self.grid.b


def make_problem(
    a: int,
    b: int,
    *,
    p: CoefficientInput = 1.0,
    q: CoefficientInput = 0.0,
    r: CoefficientInput = 1.0,
    h: float = 0.0,
    k: float = 0.0,
    alpha: float | None = None,
) -> ProblemSpec:
    """Shorthand for assembling a :class:`ProblemSpec`.

    >>> prob = make_problem(1, 3)          # Dirichlet Laplacian, N = 3
    >>> prob.grid.size
    3
    """
    grid = GridSpec(a, b)
    return ProblemSpec(grid, Coefficients.on_grid(grid, p=p, q=q, r=r), BoundaryData(h, k, alpha))


def unit_problem(q, N: int, h: float = 0.0) -> ProblemSpec:
    """Problem with ``p = r = 1`` on ``[1, N - 1]``, so that marching to
    horizon N yields ``x(0), ..., x(N)``.

    ``q`` may be a constant, an array over ``[0, N]`` or a lattice function
    covering ``[1, N - 1]``; ``q(0)`` never enters the recurrence.
    """
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if isinstance(q, LatticeFunction):
        q = q.restrict(1, N - 1)
    elif np.ndim(q) == 1:
        arr = np.asarray(q, dtype=float)
        if arr.size < N + 1:
            raise DomainError(f"q must provide values on [0, {N}]")
        q = arr[1:N]
    return make_problem(1, N - 1, q=q, h=h)


def diff_forward(f: LatticeFunction, n: int) -> Scalar:
    """``f(n+1) - f(n)``."""
    return f[n + 1] - f[n]


def diff_backward(f: LatticeFunction, n: int) -> Scalar:
    """``f(n) - f(n-1)``."""
    return f[n] - f[n - 1]


def initial_data(problem: ProblemSpec, init) -> tuple[Scalar, Scalar]:
    """Resolve a named initializer into ``(x(a-1), x(a))``.

    ``"x"`` gives ``(-h, 1)`` and is only meaningful for ``a = 1`` where the
    pair doubles as ``x(0) = -h, x(1) = 1``; ``"y"`` gives ``(1, 0)`` and
    ``"s"`` gives ``(0, 1)``. A 2-tuple passes through unchanged.
    """
    if isinstance(init, str):
        kind = init.lower()
        if kind == "x":
            if problem.a != 1:
                raise DomainError("initializer 'x' requires a = 1")
            x_left, x_a = -problem.boundary.h, 1.0
            # x(a-1) + h x(a) = 0 must hold for this initializer
            assert x_left + problem.boundary.h * x_a == 0
            return x_left, x_a
        if kind == "y":
            return 1.0, 0.0
        if kind == "s":
            return 0.0, 1.0
        raise DomainError(f"unknown initializer {init!r}; expected x, y or s")
    try:
        x_left, x_a = init
    except (TypeError, ValueError):
        raise DomainError(f"initial data must be a kind or a pair, got {init!r}") from None
    return x_left, x_a


def forward_recurrence(
    problem: ProblemSpec,
    lam: float,
    init="x",
    horizon: int | None = None,
) -> LatticeFunction:
    """March the difference equation from ``(x(a-1), x(a))`` up to ``horizon``.

    Each step applies

        x(n+1) = [(p(n) + p(n-1) - q(n) - lam r(n)) x(n) - p(n-1) x(n-1)] / p(n)

    for ``n = a, ..., horizon - 1``. The result lives on ``[a-1, horizon]``.
    Coefficients must cover ``[a-1, horizon-1]`` (``p``) and ``[a, horizon-1]``
    (``q``, ``r``).
    """
    a, b = problem.a, problem.b
    if horizon is None:
        horizon = b + 1
    if horizon < b + 1:
        raise DomainError(f"horizon must be >= b + 1 = {b + 1}, got {horizon}")
    x_left, x_a = initial_data(problem, init)

    coeff = problem.coeff
    p_all = coeff.p.window(a - 1, horizon - 1).astype(float)
    q = coeff.q.window(a, horizon - 1).astype(float)
    r = coeff.r.window(a, horizon - 1).astype(float)
    p_prev, p_cur = p_all[:-1], p_all[1:]
    if np.any(p_all <= 0):
        raise DomainError("p(n) must be positive along the marching range")
    centre = (p_cur + p_prev - q - lam * r).tolist()

    out = [x_left, x_a]
    prev, cur = x_left, x_a
    for c, pm, pn in zip(centre, p_prev.tolist(), p_cur.tolist()):
        prev, cur = cur, (c * cur - pm * prev) / pn
        out.append(cur)
    return LatticeFunction(a - 1, np.array(out))


def recurrence_residual(problem: ProblemSpec, lam: float, x: LatticeFunction) -> float:
    """Largest scaled defect of the difference equation along ``x``.

    For every ``n`` with ``n - 1`` and ``n + 1`` inside ``x``'s range, the
    defect ``|p(n) x(n+1) - (p(n)+p(n-1)-q(n)-lam r(n)) x(n) + p(n-1) x(n-1)|``
    is divided by ``1 + max(|x(n-1)|, |x(n)|, |x(n+1)|)``.
    """
    lo, hi = x.start + 1, x.stop - 1
    if hi < lo:
        raise DomainError("need at least three points to evaluate the residual")
    coeff = problem.coeff
    p_prev = coeff.p.window(lo - 1, hi - 1).astype(float)
    p_cur = coeff.p.window(lo, hi).astype(float)
    q = coeff.q.window(lo, hi).astype(float)
    r = coeff.r.window(lo, hi).astype(float)
    v = x.values
    left, mid, right = v[:-2], v[1:-1], v[2:]
    defect = np.abs(p_cur * right - (p_cur + p_prev - q - lam * r) * mid + p_prev * left)
    scale = 1.0 + np.maximum(np.maximum(np.abs(left), np.abs(mid)), np.abs(right))
    return float(np.max(defect / scale))


def _p_at(p, n: int) -> float:
    if isinstance(p, Coefficients):
        return p.p[n]
    if isinstance(p, LatticeFunction):
        return p[n]
    return p


def casoratian(y: LatticeFunction, z: LatticeFunction, n: int, p=1.0) -> Scalar:
    """``W[y, z](n) = -p(n-1) [y(n) z(n-1) - y(n-1) z(n)]``.

    ``p`` may be a :class:`Coefficients`, a lattice function or a constant.
    Along two solutions of the same equation this value does not depend on n.
    """
    return -_p_at(p, n - 1) * (y[n] * z[n - 1] - y[n - 1] * z[n])


def sum_x_diff_y(x: LatticeFunction, y: LatticeFunction, m: int, n: int) -> Scalar:
    """Direct evaluation of ``sum_{k=m}^{n-1} x(k) (y(k+1) - y(k))``."""
    return sum((x[k] * (y[k + 1] - y[k]) for k in range(m, n)), 0)


def sum_by_parts_rhs(x: LatticeFunction, y: LatticeFunction, m: int, n: int) -> Scalar:
    """Right-hand side of summation by parts,

        [x(k) y(k)]_m^n - sum_{k=m}^{n-1} (x(k+1) - x(k)) y(k+1),

    which equals :func:`sum_x_diff_y` over the same range.
    """
    if m >= n:
        raise DomainError(f"summation by parts needs m < n, got m={m}, n={n}")
    x.require(m, n, "x")
    y.require(m, n, "y")
    boundary = x[n] * y[n] - x[m] * y[m]
    return boundary - sum((diff_forward(x, k) * y[k + 1] for k in range(m, n)), 0)


def telescoping_sum(x: LatticeFunction, m: int, n: int) -> Scalar:
    """``sum_{k=m}^{n-1} (x(k+1) - x(k))``; zero when ``m == n``."""
    if m > n:
        raise DomainError(f"need m <= n, got m={m}, n={n}")
    if m == n:
        return 0
    x.require(m, n, "x")
    return sum((diff_forward(x, k) for k in range(m, n)), 0)


def weighted_inner_product(
    x: LatticeFunction, y: LatticeFunction, r=1.0, a: int | None = None, b: int | None = None
) -> Scalar:
    """``sum_{n=a}^{b} r(n) x(n) y(n)`` (no complex conjugation).

    ``a`` and ``b`` default to the overlap of the two index ranges.
    """
    if a is None:
        a = max(x.start, y.start)
    if b is None:
        b = min(x.stop, y.stop)
    xv = x.window(a, b)
    yv = y.window(a, b)
    if isinstance(r, Coefficients):
        r = r.r
    w = r.window(a, b) if isinstance(r, LatticeFunction) else r
    return _as_python(np.sum(w * xv * yv))


def r_norm(x: LatticeFunction, r=1.0, a: int | None = None, b: int | None = None) -> float:
    val = weighted_inner_product(x, LatticeFunction(x.start, np.conj(x.values)), r, a, b)
    return math.sqrt(abs(val))
