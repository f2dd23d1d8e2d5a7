from fractions import Fraction

import numpy as np
import pytest

from symcoerce.errors import BothZero, DimensionMismatch, EmptyKeepSet, IndexOutOfRange, TermAboveWeight, WeightViolation
from symcoerce.poly import (
    OperatorSystem,
    Polynomial,
    complex_rank,
    gaussian,
    homogeneous_component,
    multi_indices,
    rational_roots,
    refine_root,
    resultant,
    solve_complex,
    squarefree_multiplicity,
    sturm_real_roots,
    sylvester_matrix,
)


IRRATIONAL_SQUARES = [2, 3, 5, 6, 7, 8, 10, 11, 12, 13, 14, 15, 17, 19]


def xi(dim, k):
    return Polynomial.variable(dim, k)


def test_arithmetic_is_exact():
    x1 = xi(1, 1)
    assert (x1 + gaussian(0, 1)) * (x1 - gaussian(0, 1)) == x1 ** 2 + 1
    assert (x1 - x1).is_zero
    assert (x1 - x1).degree == -1


def test_degree_and_shape():
    x1, x2 = xi(2, 1), xi(2, 2)
    P = x1 ** 2 * x2 + x2 ** 3
    assert P.degree == 3
    assert P.is_homogeneous
    assert P.is_real
    assert not (P + x1).is_homogeneous
    assert not (P + gaussian(0, 1)).is_real
    assert (P + 1).variables() == (1, 2)
    assert (x2 + 1).variables() == (2,)


def test_mixed_dimensions_raise():
    with pytest.raises(DimensionMismatch):
        xi(2, 1) + xi(3, 1)
    with pytest.raises(IndexOutOfRange):
        xi(2, 3)


def test_l_principal_part():
    x1, x2 = xi(2, 1), xi(2, 2)
    P = x1 ** 4 + x2 ** 2 + x1 * x2 + x1
    assert P.l_principal_part((4, 2)) == x1 ** 4 + x2 ** 2
    assert P.weighted_degree((4, 2)) == 1
    with pytest.raises(TermAboveWeight):
        (x1 ** 5).l_principal_part((4, 2))


def test_differentiate():
    x1, x2 = xi(2, 1), xi(2, 2)
    P = x1 ** 3 * x2 + gaussian(0, 2) * x2
    assert P.differentiate(1) == 3 * x1 ** 2 * x2
    assert P.differentiate(2) == x1 ** 3 + gaussian(0, 2)
    assert P.partial((1, 1)) == 3 * x1 ** 2
    assert P.partial((0, 2)).is_zero


def test_restrict_coordinates():
    x1, x2, x3 = xi(3, 1), xi(3, 2), xi(3, 3)
    P = x1 * x2 + x3 ** 2 + 1
    assert P.restrict_coordinates([3]) == xi(1, 1) ** 2 + 1
    assert P.restrict_coordinates([1, 2]) == xi(2, 1) * xi(2, 2) + 1
    with pytest.raises(EmptyKeepSet):
        P.restrict_coordinates([])
    with pytest.raises(IndexOutOfRange):
        P.restrict_coordinates([4])


def test_evaluate_exact_and_numeric():
    x1, x2 = xi(2, 1), xi(2, 2)
    P = (x1 + gaussian(0, 1)) * (x2 + gaussian(0, 1))
    assert P.evaluate((1, 2)) == gaussian(1, 3)
    values = P.evaluate_numeric(np.array([[1.0, 2.0], [0.0, 0.0]]))
    assert np.allclose(values, [1 + 3j, -1])
    assert np.isclose(P.evaluate_numeric([1.0, 2.0]), 1 + 3j)


def test_operator_system_weights():
    x1, x2 = xi(2, 1), xi(2, 2)
    S = OperatorSystem.of(x1 ** 4 + x2 ** 2, weights=(4, 2))
    assert not S.is_isotropic
    assert S.principal_parts() == (x1 ** 4 + x2 ** 2,)
    with pytest.raises(WeightViolation):
        OperatorSystem.of(x1 ** 3, weights=(2, 2))
    iso = OperatorSystem.of(x1 ** 2 + x2 ** 2 + x1)
    assert iso.order == 2
    assert iso.weight_vector() == (2, 2)
    assert iso.principal_parts() == (x1 ** 2 + x2 ** 2,)


def test_sturm_isolation():
    t = xi(1, 1)
    roots = sturm_real_roots(t ** 3 - 2 * t)
    assert len(roots) == 3
    values = [float(r) for r in roots]
    assert np.allclose(values, [-np.sqrt(2), 0, np.sqrt(2)])
    assert sturm_real_roots(t ** 2 + 1) == []
    assert len(sturm_real_roots(t ** 3 - 2 * t, (Fraction(1, 2), None))) == 1


def test_resultant():
    t = xi(1, 1)
    assert resultant(t - 1, t - 2) == gaussian(-1)
    assert resultant(t ** 2 + 1, t - gaussian(0, 1)) == gaussian(0)
    with pytest.raises(BothZero):
        resultant(t - t, t - t)


def test_squarefree_and_rational_roots():
    t = xi(1, 1)
    parts = sorted(squarefree_multiplicity((t - 1) ** 2 * (t + 1)), key=lambda fk: fk[1])
    assert [k for _, k in parts] == [1, 2]
    assert parts[1][0] == t - 1
    assert rational_roots((2 * t - 1) * (t - 1)) == [Fraction(1, 2), Fraction(1)]


def test_complex_linear_algebra():
    i = gaussian(0, 1)
    assert complex_rank([[1, i], [i, -1]]) == 1
    x, certificate = solve_complex([[1, i], [0, 1]], [gaussian(1, 1), 1])
    assert certificate is None
    assert x == [gaussian(1), gaussian(1)]
    x, certificate = solve_complex([[1], [1]], [1, 2])
    assert x is None
    y1, y2 = certificate
    assert not y1 + y2
    assert y1 + 2 * y2


def test_multi_indices_graded_order():
    assert multi_indices(2, 1) == [(1, 0), (0, 1), (0, 0)]
    assert len(multi_indices(3, 2)) == 10


def test_refine_root():
    t = xi(1, 1)
    root = sturm_real_roots(t ** 2 - 2, (Fraction(0), None))[0]
    narrow = refine_root(root, Fraction(1, 1000))
    assert narrow.width <= Fraction(1, 1000)
    assert narrow.lo <= np.sqrt(2) <= narrow.hi
    with pytest.raises(ValueError):
        refine_root(root, 0)


def test_sylvester_matrix():
    rows = sylvester_matrix([1, -1], [1, -2])
    assert rows == [[gaussian(1), gaussian(-1)], [gaussian(1), gaussian(-2)]]
    assert len(sylvester_matrix([1, 0, 1], [1, 3])) == 3


def test_conjugate_and_parts():
    x1 = xi(1, 1)
    P = gaussian(2, 3) * x1 + gaussian(0, 1)
    assert P.conjugate() == gaussian(2, -3) * x1 - gaussian(0, 1)
    assert P.real_part() == 2 * x1
    assert P.imag_part() == 3 * x1 + 1
    assert P.real_part() + gaussian(0, 1) * P.imag_part() == P


def test_substitute_linear():
    x1, x2 = xi(2, 1), xi(2, 2)
    P = x1 ** 2 + x2 ** 2
    assert P.substitute_linear([(1, 1), (1, -1)]) == 2 * P
    assert (x1 * x2).substitute_linear([(1, 0)]).is_zero
    with pytest.raises(DimensionMismatch):
        P.substitute_linear([(1, 0, 0)])


def test_homogeneous_component():
    x1, x2 = xi(2, 1), xi(2, 2)
    P = x1 ** 2 + x1 * x2 + 3 * x2 + 1
    assert homogeneous_component(P, 2) == x1 ** 2 + x1 * x2
    assert homogeneous_component(P, 0) == Polynomial.constant(2)
    assert homogeneous_component(P, 5).is_zero


def random_polynomial(rng, dim, terms=4, degree=3):
    coeffs = {}
    for _ in range(terms):
        exponents = [0] * dim
        for _ in range(int(rng.integers(0, degree + 1))):
            exponents[int(rng.integers(dim))] += 1
        coeffs[tuple(exponents)] = gaussian(int(rng.integers(-5, 6)), int(rng.integers(-5, 6)))
    return Polynomial(dim, coeffs)


@pytest.mark.parametrize('seed', range(10))
def test_ring_laws(seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 4))
    P, Q, R = (random_polynomial(rng, dim) for _ in range(3))
    assert P + Q == Q + P
    assert P * Q == Q * P
    assert (P * Q) * R == P * (Q * R)
    assert P * (Q + R) == P * Q + P * R
    assert (P - Q) + Q == P
    assert P * 1 == P
    assert (P * 0).is_zero
    if not P.is_zero and not Q.is_zero:
        assert (P * Q).degree == P.degree + Q.degree
    point = tuple(int(x) for x in rng.integers(-3, 4, dim))
    assert (P * Q + R).evaluate(point) == P.evaluate(point) * Q.evaluate(point) + R.evaluate(point)


@pytest.mark.parametrize('seed', range(10))
def test_grading(seed):
    rng = np.random.default_rng(100 + seed)
    dim = int(rng.integers(1, 4))
    P, Q = random_polynomial(rng, dim, 5), random_polynomial(rng, dim, 5)
    total = Polynomial(dim)
    for k in range(max(P.degree, 0) + 1):
        component = P.homogeneous_component(k)
        assert component.is_zero or (component.is_homogeneous and component.degree == k)
        total = total + component
    assert total == P
    if not P.is_zero and not Q.is_zero:
        top = (P * Q).homogeneous_component(P.degree + Q.degree)
        assert top == P.homogeneous_component(P.degree) * Q.homogeneous_component(Q.degree)
    assert P.l_principal_part((max(P.degree, 1),) * dim) == P.homogeneous_component(max(P.degree, 1))


@pytest.mark.parametrize('seed', range(4))
def test_sturm_counts_match_sign_changes(seed):
    rng = np.random.default_rng(seed)
    t = xi(1, 1)
    grid = -8 + (np.arange(16 * 64) + 0.5) / 64
    for _ in range(50):
        roots = {Fraction(int(k), 2) for k in rng.integers(-12, 13, int(rng.integers(0, 5)))}
        p = Polynomial.constant(1, int(rng.choice([-3, -1, 2, 5])))
        for r in roots:
            p = p * (t - r)
        expected = len(roots)
        if rng.random() < 0.5:
            p = p * (t ** 2 - int(rng.choice(IRRATIONAL_SQUARES)))
            expected += 2
        if rng.random() < 0.5:
            p = p * (t ** 2 + int(rng.integers(1, 6)))
        assert len(sturm_real_roots(p)) == expected
        values = p.evaluate_numeric(grid[:, None]).real
        assert int(np.sum(np.sign(values[:-1]) != np.sign(values[1:]))) == expected
        for root in sturm_real_roots(p):
            assert root.count(root.lo, root.hi) == 1 or root.is_exact


@pytest.mark.parametrize('seed', range(4))
def test_resultant_is_product_over_roots(seed):
    rng = np.random.default_rng(seed)
    t = xi(1, 1)

    def random_roots():
        size = int(rng.integers(1, 5))
        return [Fraction(int(a), int(b)) for a, b in zip(rng.integers(-6, 7, size), rng.integers(1, 4, size))]

    for _ in range(25):
        f_roots, g_roots = random_roots(), random_roots()
        a, b = (int(rng.choice([1, 2, -3])) for _ in range(2))
        f, g = Polynomial.constant(1, a), Polynomial.constant(1, b)
        for r in f_roots:
            f = f * (t - r)
        for s in g_roots:
            g = g * (t - s)
        expected = Fraction(a) ** len(g_roots)
        for r in f_roots:
            value = Fraction(b)
            for s in g_roots:
                value *= r - s
            expected *= value
        assert resultant(f, g) == gaussian(expected)
        assert bool(resultant(f, g)) == (not set(f_roots) & set(g_roots))
