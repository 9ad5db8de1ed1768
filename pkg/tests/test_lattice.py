import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dslv.errors import DomainError, IndexRangeError
from dslv.lattice import (
    Coefficients,
    GridSpec,
    LatticeFunction,
    alpha_to_h,
    casoratian,
    diff_backward,
    diff_forward,
    forward_recurrence,
    make_problem,
    recurrence_residual,
    sum_by_parts_rhs,
    sum_x_diff_y,
    telescoping_sum,
    unit_problem,
    weighted_inner_product,
)


def lf(values, start=0):
    return LatticeFunction(start, np.array(values))


# --- lattice functions and problem data ------------------------------------


def test_lattice_function_indexing():
    f = lf([10, 20, 30], start=-1)
    assert f.stop == 1
    assert f[-1] == 10 and f[1] == 30
    assert list(f.indices) == [-1, 0, 1]
    with pytest.raises(IndexRangeError):
        f[2]
    with pytest.raises(IndexRangeError):
        f.window(0, 2)


def test_lattice_function_rejects_empty_and_float_start():
    with pytest.raises(DomainError):
        LatticeFunction(0, [])
    with pytest.raises(DomainError):
        LatticeFunction(0.5, [1.0])


def test_lattice_function_is_read_only():
    f = lf([1.0, 2.0])
    with pytest.raises(ValueError):
        f.values[0] = 3.0


@pytest.mark.parametrize("a, b", [(-1, 3), (4, 3)])
def test_grid_spec_invariants(a, b):
    with pytest.raises(DomainError):
        GridSpec(a, b)


def test_coefficients_positivity():
    grid = GridSpec(1, 3)
    with pytest.raises(DomainError):
        Coefficients.on_grid(grid, p=[1.0, 1.0, 0.0, 1.0])
    with pytest.raises(DomainError):
        Coefficients.on_grid(grid, r=-1.0)
    with pytest.raises(DomainError):
        Coefficients.on_grid(grid, q=[0.0, 1.0])  # wrong length


def test_problem_requires_coefficient_coverage():
    grid = GridSpec(1, 3)
    short = Coefficients(lf([1.0, 1.0, 1.0], 1), lf([0.0] * 3, 1), lf([1.0] * 3, 1))
    from dslv.lattice import BoundaryData, ProblemSpec

    with pytest.raises(IndexRangeError):
        ProblemSpec(grid, short, BoundaryData(0.0))


def test_alpha_must_match_h():
    make_problem(1, 3, h=0.0, alpha=math.pi / 4)
    with pytest.raises(DomainError):
        make_problem(1, 3, h=0.5, alpha=math.pi / 4)


# --- differences -----------------------------------------------------------


def test_diff_forward_examples():
    assert diff_forward(lf([1, 1, 1]), 1) == 0
    assert diff_forward(lf([0, 1, 4, 9]), 2) == 5
    assert diff_forward(lf([-1, 1, 1, -1]), 0) == 2


def test_diff_backward_examples():
    assert diff_backward(lf([0, 1, 4, 9]), 3) == 5
    assert diff_backward(lf([1, 0, -1, 0]), 2) == -1


def test_diff_out_of_range():
    with pytest.raises(IndexRangeError):
        diff_forward(lf([1, 2]), 1)
    with pytest.raises(IndexRangeError):
        diff_backward(lf([1, 2]), 0)


@given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=30), st.integers(-5, 5), st.data())
def test_backward_is_shifted_forward(vals, start, data):
    f = lf(vals, start)
    n = data.draw(st.integers(start + 1, f.stop))
    assert diff_backward(f, n) == diff_forward(f, n - 1)


# --- forward recurrence ----------------------------------------------------


def test_recurrence_x_period_four():
    x = forward_recurrence(make_problem(1, 5, h=1.0), 2.0, "x", horizon=6)
    assert x.start == 0
    np.testing.assert_array_equal(x.values, [-1, 1, 1, -1, -1, 1, 1])


def test_recurrence_y():
    y = forward_recurrence(make_problem(1, 3), 2.0, "y", horizon=4)
    np.testing.assert_array_equal(y.values, [1, 0, -1, 0, 1])


def test_recurrence_linear_solution_at_repeated_root():
    x = forward_recurrence(make_problem(1, 99), 0.0, (0.0, 1.0), horizon=100)
    np.testing.assert_array_equal(x.values, np.arange(101))


def test_recurrence_general_coefficients_hand_step():
    # p = (1, 2, 3) on [0, 2], q = (0.5, -1), r = (2, 1) on [1, 2], lam = 0.25
    prob = make_problem(1, 2, p=[1.0, 2.0, 3.0], q=[0.5, -1.0], r=[2.0, 1.0], h=0.5)
    x = forward_recurrence(prob, 0.25, (-0.5, 1.0))
    # n=1: x2 = ((2 + 1 - 0.5 - 0.5) * 1 - 1 * (-0.5)) / 2 = 1.25
    # n=2: x3 = ((3 + 2 + 1 - 0.25) * 1.25 - 2 * 1) / 3 = 5.1875 / 3
    np.testing.assert_allclose(x.values, [-0.5, 1.0, 1.25, 5.1875 / 3], rtol=1e-15)


def test_recurrence_errors():
    prob = make_problem(1, 3)
    with pytest.raises(DomainError):
        forward_recurrence(prob, 1.0, "y", horizon=3)
    with pytest.raises(IndexRangeError):
        forward_recurrence(prob, 1.0, "y", horizon=6)  # coefficients stop at b
    with pytest.raises(DomainError):
        forward_recurrence(make_problem(2, 4), 1.0, "x")
    with pytest.raises(DomainError):
        forward_recurrence(prob, 1.0, "z")


def test_initializer_x_satisfies_left_condition():
    prob = make_problem(1, 4, h=0.3)
    x = forward_recurrence(prob, 1.1, "x")
    assert x[0] + 0.3 * x[1] == 0


def random_problem(rng, a, b):
    return make_problem(
        a,
        b,
        p=rng.uniform(0.5, 2.0, b - a + 2),
        q=rng.uniform(-1.0, 1.0, b - a + 1),
        r=rng.uniform(0.5, 2.0, b - a + 1),
        h=rng.uniform(-1, 1),
        k=rng.uniform(-1, 1),
    )


@pytest.mark.parametrize("seed", range(5))
def test_recurrence_residual_small(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, 2, 40)
    lam = rng.uniform(0, 4)
    x = forward_recurrence(prob, lam, (rng.normal(), rng.normal()))
    assert recurrence_residual(prob, lam, x) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.floats(-3, 3),
    st.floats(-3, 3),
    st.floats(0.1, 3.9),
)
def test_recurrence_linear_in_initial_data(seed, alpha, beta, lam):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, 1, 30)
    u = rng.normal(size=2)
    v = rng.normal(size=2)
    combo = forward_recurrence(prob, lam, tuple(alpha * u + beta * v)).values
    parts = (
        alpha * forward_recurrence(prob, lam, tuple(u)).values
        + beta * forward_recurrence(prob, lam, tuple(v)).values
    )
    scale = 1.0 + np.max(np.abs(parts)) + np.max(np.abs(combo))
    assert np.max(np.abs(combo - parts)) <= 1e-12 * scale


def test_recurrence_complex_initial_data():
    x = forward_recurrence(make_problem(1, 3), 2.0, (1.0, 1j))
    # powers of i solve x(n+1) = -x(n-1)
    np.testing.assert_allclose(x.values, [1j**n for n in range(5)], atol=1e-15)


def test_unit_problem_uses_q_from_one():
    q = np.arange(11, dtype=float)  # q(0) = 0 is never read
    prob = unit_problem(q, 10)
    assert (prob.a, prob.b) == (1, 9)
    assert prob.coeff.q[1] == 1.0 and prob.coeff.q[9] == 9.0


# --- Casoratian -------------------------------------------------------------


def test_casoratian_identical_solutions():
    y = forward_recurrence(make_problem(1, 10), 1.3, "y")
    for n in range(1, 12):
        assert casoratian(y, y, n) == 0


def test_casoratian_of_root_powers():
    y = lf([1j**n for n in range(8)])
    z = lf([(-1j) ** n for n in range(8)])
    for n in range(1, 8):
        assert casoratian(y, z, n) == pytest.approx(-2j, abs=1e-15)


def test_casoratian_both_forms_agree():
    rng = np.random.default_rng(3)
    p = lf(rng.uniform(0.5, 2, 6))
    y, z = lf(rng.normal(size=6)), lf(rng.normal(size=6))
    for n in range(1, 6):
        first = p[n - 1] * (y[n] * diff_forward(z, n - 1) - z[n] * diff_forward(y, n - 1))
        assert casoratian(y, z, n, p) == pytest.approx(first, rel=1e-13, abs=1e-14)


def test_casoratian_constant_lambda_three():
    prob = make_problem(1, 60, h=0.0)
    y = forward_recurrence(prob, 3.0, "x")
    z = forward_recurrence(prob, 3.0, "y")
    w1, w50 = casoratian(y, z, 1), casoratian(y, z, 50)
    assert w50 == pytest.approx(w1, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_casoratian_constant_general_coefficients(seed):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, 1, 40)
    lam = rng.uniform(0, 4)
    y = forward_recurrence(prob, lam, (rng.normal(), rng.normal()))
    z = forward_recurrence(prob, lam, (rng.normal(), rng.normal()))
    w = np.array([casoratian(y, z, n, prob.coeff) for n in range(1, 41)])
    assert np.max(np.abs(w - w[0])) <= 1e-10 * (1 + abs(w[0])) * max(1, np.max(np.abs(y.values * z.values)))


def test_casoratian_out_of_range():
    with pytest.raises(IndexRangeError):
        casoratian(lf([1, 2]), lf([1, 2]), 0)


# --- summation by parts and telescoping -------------------------------------


def brute_lhs(x, y, m, n):
    # independent oracle: the defining sum written out with plain lists
    xs, ys = list(x.values), list(y.values)
    return sum(xs[k - x.start] * (ys[k + 1 - y.start] - ys[k - y.start]) for k in range(m, n))


def test_sbp_small_example():
    x = lf([0, 1, 2, 3])
    assert sum_by_parts_rhs(x, x, 0, 3) == 3
    assert brute_lhs(x, x, 0, 3) == 3


def test_sbp_constant_x():
    x = lf([4, 4, 4, 4, 4])
    y = lf([1, -2, 7, 0, 3])
    assert sum_by_parts_rhs(x, y, 1, 4) == 4 * (y[4] - y[1])


def test_sbp_errors():
    x = lf([1, 2, 3])
    with pytest.raises(DomainError):
        sum_by_parts_rhs(x, x, 2, 2)
    with pytest.raises(IndexRangeError):
        sum_by_parts_rhs(x, x, 0, 3)


def test_sbp_seeded_integer_sequences():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        length = int(rng.integers(2, 21))
        x = lf([int(v) for v in rng.integers(-99, 100, length)])
        y = lf([int(v) for v in rng.integers(-99, 100, length)])
        m = int(rng.integers(0, length - 1))
        n = int(rng.integers(m + 1, length))
        assert sum_by_parts_rhs(x, y, m, n) == brute_lhs(x, y, m, n)
        assert sum_x_diff_y(x, y, m, n) == brute_lhs(x, y, m, n)


@given(
    st.lists(st.fractions(max_denominator=50), min_size=2, max_size=20),
    st.lists(st.fractions(max_denominator=50), min_size=20, max_size=20),
    st.data(),
)
def test_sbp_exact_on_rationals(xs, ys, data):
    x = LatticeFunction(0, np.array(xs, dtype=object))
    y = LatticeFunction(0, np.array(ys[: len(xs)], dtype=object))
    m = data.draw(st.integers(0, len(xs) - 2))
    n = data.draw(st.integers(m + 1, len(xs) - 1))
    assert sum_by_parts_rhs(x, y, m, n) == brute_lhs(x, y, m, n)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=20), st.data())
def test_sbp_floats_relative(xs, data):
    ys = data.draw(st.lists(st.floats(-1e3, 1e3), min_size=len(xs), max_size=len(xs)))
    x, y = lf(xs), lf(ys)
    m = data.draw(st.integers(0, len(xs) - 2))
    n = data.draw(st.integers(m + 1, len(xs) - 1))
    scale = sum(abs(a) for a in xs) * sum(abs(b) for b in ys) + 1e-300
    assert abs(sum_by_parts_rhs(x, y, m, n) - brute_lhs(x, y, m, n)) <= 1e-12 * scale


def test_telescoping_examples():
    x = lf([1, 2, 4, 8])
    assert telescoping_sum(x, 0, 3) == 7
    assert telescoping_sum(x, 2, 2) == 0
    with pytest.raises(DomainError):
        telescoping_sum(x, 3, 1)
    with pytest.raises(IndexRangeError):
        telescoping_sum(x, 0, 4)


@given(st.lists(st.integers(-10**12, 10**12), min_size=1, max_size=20), st.data())
def test_telescoping_exact_on_integers(xs, data):
    x = lf([int(v) for v in xs])
    m = data.draw(st.integers(0, len(xs) - 1))
    n = data.draw(st.integers(m, len(xs) - 1))
    assert telescoping_sum(x, m, n) == xs[n] - xs[m]


def test_exact_rational_telescope():
    x = LatticeFunction(0, np.array([Fraction(1, k) for k in range(1, 8)], dtype=object))
    assert telescoping_sum(x, 0, 6) == Fraction(1, 7) - 1


# --- boundary angle and inner product --------------------------------------


@pytest.mark.parametrize(
    "alpha, p_a, expected",
    [(math.pi / 4, 1.0, 0.0), (math.pi / 2, 1.0, -1.0), (math.pi / 4, 2.0, -0.5)],
)
def test_alpha_to_h(alpha, p_a, expected):
    assert alpha_to_h(alpha, p_a) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("alpha, p_a", [(0.0, 1.0), (math.pi, 1.0), (1e-13, 1.0), (1.0, 0.0), (-1.0, 1.0)])
def test_alpha_to_h_errors(alpha, p_a):
    with pytest.raises(DomainError):
        alpha_to_h(alpha, p_a)


def test_alpha_equivalence_with_angle_condition():
    # cos(alpha) x(a) - sin(alpha) p(a) (x(a) - x(a-1)) = 0 must hold when x(a-1) = -h x(a)
    alpha, p_a = 1.1, 1.7
    h = alpha_to_h(alpha, p_a)
    xa = 1.0
    x_left = -h * xa
    assert math.cos(alpha) * xa - math.sin(alpha) * p_a * (xa - x_left) == pytest.approx(0, abs=1e-14)


def test_weighted_inner_product():
    assert weighted_inner_product(lf([1, 1, 1]), lf([1, 1, 1])) == 3
    assert weighted_inner_product(lf([1, 1]), lf([1, -1])) == 0
    s = 1 / math.sqrt(2)
    assert weighted_inner_product(lf([s, s], 1), lf([s, -s], 1), 1.0, 1, 2) == pytest.approx(0)
    r = lf([2.0, 3.0], 1)
    assert weighted_inner_product(lf([1.0, 1.0], 1), lf([1.0, 2.0], 1), r, 1, 2) == 8.0
    with pytest.raises(IndexRangeError):
        weighted_inner_product(lf([1.0]), lf([1.0]), 1.0, 0, 1)
