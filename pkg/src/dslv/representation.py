"""Closed-form solution representations for the unit-coefficient equation

    x(n+1) - 2 x(n) + x(n-1) + (q(n) + lam) x(n) = 0,

built by variation of parameters on the homogeneous solutions
``x1(n) = root_plus**n`` and ``x2(n) = root_minus**n``.

Written out, both representations share the shape

    x(n) = A x1(n) + B x2(n)
           - x1(n) sum_{i=0}^{n} q(i) x(i) x2(i) / s
           + x2(n) sum_{i=0}^{n} q(i) x(i) x1(i) / s,      s = sqrt(lam (lam - 4)).

The ``i = n`` summands cancel (both equal ``q(n) x(n) x1(n) x2(n) / s``), so
x(n) only needs x(0), ..., x(n-1) and the formula can be evaluated by
marching forward with two running sums.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from dslv.errors import DegenerateLambdaError, DomainError, NumericalFailure
from dslv.lattice import Coefficients, LatticeFunction

DEGENERATE_TOL = 1e-14
IMAG_TOL = 1e-9


class OutsideDiscWarning(UserWarning):
    """lam lies outside the open disc |lam - 2| < 2; roots are no longer unimodular."""


@dataclass(frozen=True)
class RootPair:
    """Roots of ``t**2 - (2 - lam) t + 1 = 0`` with ``root_plus - root_minus = sqrt_disc``."""

    lam: float
    sqrt_disc: complex
    root_plus: complex
    root_minus: complex
    degenerate: bool
    outside_disc: bool

    @property
    def casoratian(self) -> complex:
        """``W[x1, x2]``, constant in n and equal to ``-sqrt_disc``."""
        return -self.sqrt_disc

    def powers(self, n_max: int) -> tuple[np.ndarray, np.ndarray]:
        """``(root_plus**n, root_minus**n)`` for ``n = 0, ..., n_max``."""
        n = np.arange(n_max + 1)
        return np.power(self.root_plus, n), np.power(self.root_minus, n)


def characteristic_roots(lam: float) -> RootPair:
    disc = lam * (lam - 4.0)
    # principal branch; +0j keeps negative discriminants on the upper half-plane
    s = cmath.sqrt(complex(disc, 0.0))
    return RootPair(
        lam=lam,
        sqrt_disc=s,
        root_plus=(2.0 - lam + s) / 2.0,
        root_minus=(2.0 - lam - s) / 2.0,
        degenerate=abs(disc) < DEGENERATE_TOL,
        outside_disc=abs(lam - 2.0) >= 2.0,
    )


def _regular_roots(lam: float) -> RootPair:
    roots = characteristic_roots(lam)
    if roots.degenerate:
        raise DegenerateLambdaError(
            f"degenerate discriminant at lambda={lam}: lambda*(lambda-4) = 0"
        )
    if roots.outside_disc:
        warnings.warn(
            f"lambda={lam} lies outside |lambda - 2| < 2", OutsideDiscWarning, stacklevel=3
        )
    return roots


def _potential(q, n_max: int) -> list[float]:
    if isinstance(q, Coefficients):
        q = q.q
    if isinstance(q, LatticeFunction):
        vals = q.window(0, n_max)
    else:
        vals = np.asarray(q)
        if vals.ndim != 1 or vals.size < n_max + 1:
            raise DomainError(f"q must provide values on [0, {n_max}]")
        vals = vals[: n_max + 1]
    if np.iscomplexobj(vals):
        raise DomainError("q must be real")
    return vals.astype(float).tolist()


def leading_constants(x0: complex, x1: complex, q0: float, roots: RootPair) -> tuple[complex, complex]:
    """Constants ``(A, B)`` of the two closed-form leading terms.

    They solve ``A + B = x(0)`` and ``A r+ + B r- = x(1) + q(0) x(0)``; the
    ``q(0) x(0)`` shift compensates for the ``i = 0`` summand, which already
    contributes ``-q(0) x(0)`` at ``n = 1``.
    """
    s = roots.sqrt_disc
    rhs = x1 + q0 * x0
    a = (rhs - roots.root_minus * x0) / s
    b = (roots.root_plus * x0 - rhs) / s
    return a, b


def leading_constants_x(h: float, q0: float, roots: RootPair) -> tuple[complex, complex]:
    """Constants for ``x(0) = -h, x(1) = 1`` written in closed form."""
    s, lam = roots.sqrt_disc, roots.lam
    a = (2.0 - h * (2.0 * q0 - 2.0 + lam + s)) / (2.0 * s)
    b = (-2.0 + h * (2.0 * q0 - 2.0 + lam - s)) / (2.0 * s)
    return a, b


def leading_constants_y(q0: float, roots: RootPair) -> tuple[complex, complex]:
    """Constants for ``y(0) = 1, y(1) = 0`` written in closed form.

    The ``q(0)`` terms enter with the same sign as in :func:`leading_constants_x`
    (per unit ``x(0)``); the opposite sign gives ``y(1) = -2 q(0)``.
    """
    s, lam = roots.sqrt_disc, roots.lam
    a = (-2.0 + lam + s + 2.0 * q0) / (2.0 * s)
    b = (2.0 - lam + s - 2.0 * q0) / (2.0 * s)
    return a, b


def _march(q: list[float], roots: RootPair, n_max: int, a: complex, b: complex) -> LatticeFunction:
    s = roots.sqrt_disc
    x1, x2 = roots.powers(n_max)
    x1, x2 = x1.tolist(), x2.tolist()
    out = []
    sum_x1 = 0j  # sum_{i<n} q(i) x(i) x1(i)
    sum_x2 = 0j  # sum_{i<n} q(i) x(i) x2(i)
    for n in range(n_max + 1):
        val = a * x1[n] + b * x2[n] - x1[n] * sum_x2 / s + x2[n] * sum_x1 / s
        t1 = q[n] * val * x1[n]
        t2 = q[n] * val * x2[n]
        lead = x1[n] * t2 / s
        if abs(x2[n] * t1 / s - lead) > 1e-12 * abs(lead) + 1e-300:
            raise NumericalFailure(f"i = n summands failed to cancel at n={n}")
        sum_x1 += t1
        sum_x2 += t2
        out.append(val)

    vals = np.array(out)
    scale = max(1.0, float(np.max(np.abs(vals))))
    max_imag = float(np.max(np.abs(vals.imag)))
    if max_imag > IMAG_TOL * scale:
        raise NumericalFailure(
            f"representation has imaginary part {max_imag:.3g} (scale {scale:.3g})"
        )
    return LatticeFunction(0, vals.real.copy())


def representation_x(q, h: float, lam: float, N: int) -> LatticeFunction:
    """Evaluate the representation of the solution with ``x(0) = -h, x(1) = 1``
    on ``[0, N]``.

    ``q`` is a lattice function, coefficient set, or array covering ``[0, N]``.
    Raises :class:`DegenerateLambdaError` for ``lam`` in ``{0, 4}``.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    roots = _regular_roots(lam)
    qv = _potential(q, N)
    a, b = leading_constants_x(h, qv[0], roots)
    return _march(qv, roots, N, a, b)


def representation_y(q, lam: float, N: int) -> LatticeFunction:
    """Evaluate the representation of the solution with ``y(0) = 1, y(1) = 0``
    on ``[0, N]``."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    roots = _regular_roots(lam)
    qv = _potential(q, N)
    a, b = leading_constants_y(qv[0], roots)
    return _march(qv, roots, N, a, b)


@dataclass(frozen=True, eq=False)
class VariationCoefficients:
    """Varying coefficients ``c1``, ``c2`` on ``[-1, n]`` and the raw running
    sums behind them.

    ``sum_x1(m) = sum_{i=0}^{m} q(i) x(i) x1(i)``, likewise ``sum_x2``; all
    four sequences vanish at ``m = -1``.
    """

    c1: LatticeFunction
    c2: LatticeFunction
    sum_x1: LatticeFunction
    sum_x2: LatticeFunction
    roots: RootPair

    def particular(self) -> LatticeFunction:
        """``c1(m) x1(m) + c2(m) x2(m)`` for ``m = 0, ..., n``."""
        n = self.c1.stop
        x1, x2 = self.roots.powers(n)
        vals = self.c1.window(0, n) * x1 + self.c2.window(0, n) * x2
        return LatticeFunction(0, vals)


def variation_coefficients(q, x: LatticeFunction, lam: float, n: int) -> VariationCoefficients:
    """``c1(m) = sum q(i) x(i) x2(i) / W`` and ``c2(m) = -sum q(i) x(i) x1(i) / W``
    for ``m = -1, ..., n`` with ``W = -sqrt(lam (lam - 4))``."""
    roots = _regular_roots(lam)
    if n < -1:
        raise DomainError(f"n must be >= -1, got {n}")
    w = roots.casoratian
    if n == -1:
        zero = LatticeFunction(-1, np.zeros(1, dtype=complex))
        return VariationCoefficients(zero, zero, zero, zero, roots)
    qv = np.asarray(_potential(q, n))
    xv = x.window(0, n)
    x1, x2 = roots.powers(n)
    sum_x1 = np.concatenate([[0j], np.cumsum(qv * xv * x1)])
    sum_x2 = np.concatenate([[0j], np.cumsum(qv * xv * x2)])
    return VariationCoefficients(
        c1=LatticeFunction(-1, sum_x2 / w),
        c2=LatticeFunction(-1, -sum_x1 / w),
        sum_x1=LatticeFunction(-1, sum_x1),
        sum_x2=LatticeFunction(-1, sum_x2),
        roots=roots,
    )


def residual_check(x: LatticeFunction, q, lam: float) -> float:
    """Largest scaled defect of ``x(n+1) - 2x(n) + x(n-1) + (q(n) + lam) x(n)``
    over the interior of ``x``'s range, each stencil divided by
    ``1 + max |x|`` over its three points."""
    lo, hi = x.start + 1, x.stop - 1
    if hi < lo:
        raise DomainError("residual needs at least three points")
    if isinstance(q, Coefficients):
        q = q.q
    qv = q.window(lo, hi) if isinstance(q, LatticeFunction) else np.broadcast_to(q, hi - lo + 1)
    v = x.values
    left, mid, right = v[:-2], v[1:-1], v[2:]
    defect = np.abs(right - 2 * mid + left + (qv + lam) * mid)
    scale = 1.0 + np.maximum(np.maximum(np.abs(left), np.abs(mid)), np.abs(right))
    return float(np.max(defect / scale))
