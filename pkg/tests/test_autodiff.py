import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sympdefect.autodiff import (
    CustomPrimitive,
    Dual,
    NonFiniteError,
    exp,
    finite_difference_jacobian,
    jacobian,
    log,
    seeded_vector,
    sqrt,
    value_of,
)


def test_seed_and_constant():
    d = Dual.seed(2.5, 1, 3)
    assert d.value == 2.5
    assert np.array_equal(d.grad, [0.0, 1.0, 0.0])
    assert d.width == 3
    c = Dual.constant(4.0, 3)
    assert np.array_equal(c.grad, np.zeros(3))


def test_seed_index_out_of_range():
    with pytest.raises(ValueError):
        Dual.seed(1.0, 3, 3)
    with pytest.raises(ValueError):
        Dual.seed(1.0, -1, 3)


def test_arithmetic_matches_product_and_quotient_rules():
    x = Dual.seed(3.0, 0, 2)
    y = Dual.seed(0.5, 1, 2)
    prod = x * y
    assert prod.value == 1.5
    assert np.array_equal(prod.grad, [0.5, 3.0])
    quot = x / y
    assert quot.value == 6.0
    np.testing.assert_allclose(quot.grad, [2.0, -12.0], rtol=1e-15)
    mixed = 2.0 * x - y / 2.0 + 1.0
    assert mixed.value == 2.0 * 3.0 - 0.25 + 1.0
    np.testing.assert_allclose(mixed.grad, [2.0, -0.5], rtol=1e-15)


def test_power_rule_and_dual_exponent_rejection():
    x = Dual.seed(2.0, 0, 1)
    cubed = x**3
    assert cubed.value == 8.0
    assert np.array_equal(cubed.grad, [12.0])
    with pytest.raises(TypeError):
        _ = x ** Dual.seed(2.0, 0, 1)


def test_comparisons_order_by_value():
    x = Dual.seed(1.0, 0, 1)
    assert x < 2.0
    assert x <= Dual.constant(1.0, 1)
    assert x > 0.5
    assert x >= 1.0


def test_value_of_unwraps():
    assert value_of(Dual.seed(7.0, 0, 1)) == 7.0
    assert value_of(3) == 3.0


def test_elementary_functions_on_duals_and_floats():
    x = Dual.seed(4.0, 0, 1)
    s = sqrt(x)
    assert s.value == 2.0
    assert np.array_equal(s.grad, [0.25])
    l = log(x)
    np.testing.assert_allclose(l.grad, [0.25], rtol=1e-15)
    e = exp(x)
    np.testing.assert_allclose(e.grad, [math.exp(4.0)], rtol=1e-15)
    assert sqrt(9.0) == 3.0
    assert log(1.0) == 0.0
    assert exp(0.0) == 1.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10.0))
def test_chain_rule_against_closed_form(x):
    # f(x) = sqrt(x) log(x) has derivative (log(x) + 2) / (2 sqrt(x))
    d = sqrt(Dual.seed(x, 0, 1)) * log(Dual.seed(x, 0, 1))
    expected = (math.log(x) + 2.0) / (2.0 * math.sqrt(x))
    np.testing.assert_allclose(d.grad[0], expected, rtol=1e-12)


def test_array_operand_broadcasts_elementwise():
    # the generic LU elimination multiplies a dual pivot ratio into an
    # object-dtype row, so scalar-times-array must stay elementwise
    d = Dual.seed(3.0, 0, 1)
    arr = np.array([1.0, 2.0])
    for prod in (d * arr, arr * d):
        assert prod.dtype == object
        assert [e.value for e in prod] == [3.0, 6.0]
        assert [e.grad[0] for e in prod] == [1.0, 2.0]
    diff = arr - d
    assert [e.value for e in diff] == [-2.0, -1.0]
    assert [e.grad[0] for e in diff] == [-1.0, -1.0]
    quot = d / np.array([2.0, 4.0])
    np.testing.assert_allclose([e.value for e in quot], [1.5, 0.75])
    np.testing.assert_allclose([e.grad[0] for e in quot], [0.5, 0.25])


def test_seeded_vector_validation():
    seeds = seeded_vector(np.array([1.0, 2.0]))
    assert seeds[1].value == 2.0
    assert np.array_equal(seeds[1].grad, [0.0, 1.0])
    with pytest.raises(ValueError):
        seeded_vector(np.eye(2))
    with pytest.raises(NonFiniteError):
        seeded_vector(np.array([1.0, math.inf]))


def test_jacobian_of_linear_map_is_exact():
    a = np.array([[2.0, -1.0], [0.5, 3.0]])

    def fn(z):
        return [a[0, 0] * z[0] + a[0, 1] * z[1], a[1, 0] * z[0] + a[1, 1] * z[1]]

    assert np.array_equal(jacobian(fn, np.array([0.3, -0.7])), a)


def test_jacobian_of_truncated_euler_step():
    # one p-implicit Euler step for H = (q^2 + p^2)/2 at h = 0.1; the sweep
    # is independent of p, so the exact Jacobian is [[1-h^2, h], [-h, 1]]
    h = 0.1

    def step(z):
        q, p = z[0], z[1]
        pt = p - h * q
        qt = q + h * pt
        return [qt, pt]

    got = jacobian(step, np.array([0.7, -0.3]))
    assert np.array_equal(got, [[1.0 - h * h, h], [-h, 1.0]])


def test_jacobian_constant_component_gives_zero_row():
    got = jacobian(lambda z: [z[0], 5.0], np.array([1.0, 2.0]))
    assert np.array_equal(got, [[1.0, 0.0], [0.0, 0.0]])


def test_jacobian_rejects_width_mismatch():
    with pytest.raises(ValueError, match="width"):
        jacobian(lambda z: [Dual.seed(1.0, 0, 3)], np.array([1.0, 2.0]))


def test_jacobian_rejects_non_finite_output():
    with pytest.raises(NonFiniteError, match="component 0"):
        jacobian(lambda z: [z[0] * math.nan], np.array([1.0]))


def test_custom_primitive_supplies_registered_derivative():
    sine = CustomPrimitive(evaluate=math.sin, derivative=math.cos, name="sine")
    assert sine(0.0) == 0.0

    def fn(z):
        return [sine(z[0]), sine(z[0]) + z[1]]

    got = jacobian(fn, np.array([0.6, 1.0]))
    np.testing.assert_allclose(
        got, [[math.cos(0.6), 0.0], [math.cos(0.6), 1.0]], rtol=1e-15
    )


def test_finite_difference_identity():
    got = finite_difference_jacobian(lambda z: z, np.array([0.2, -1.4, 3.0]))
    np.testing.assert_allclose(got, np.eye(3), atol=1e-10)


def test_finite_difference_square_map():
    got = finite_difference_jacobian(lambda z: z * z, np.ones(3))
    np.testing.assert_allclose(got, 2.0 * np.eye(3), atol=1e-8)


def test_finite_difference_agrees_with_forward_mode():
    h = 0.1

    def step(z):
        q, p = z[0], z[1]
        pt = p - h * q
        qt = q + h * pt
        return [qt, pt]

    def step_float(z):
        return np.array(step(z), dtype=float)

    x = np.array([0.7, -0.3])
    np.testing.assert_allclose(
        finite_difference_jacobian(step_float, x), jacobian(step, x), atol=1e-8
    )


def test_finite_difference_rejects_bad_step():
    with pytest.raises(ValueError):
        finite_difference_jacobian(lambda z: z, np.ones(2), step=0.0)
