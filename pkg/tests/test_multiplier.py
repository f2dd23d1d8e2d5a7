from fractions import Fraction

import numpy as np
import pytest

from symcoerce.coercive_nd import construct_s_system, s_system_from
from symcoerce.errors import DenominatorVanishes, InvalidDelta, PreconditionViolated
from symcoerce.multiplier import (
    FAIL,
    PASS,
    RationalSymbol,
    certify_phi,
    check_mikhlin_like,
    check_p_ratio,
    phi_family,
    phi_gamma,
    symbolic_partial,
    write_report_csv,
)
from symcoerce.parser import parse_operator, parse_system
from symcoerce.poly import Polynomial
from symcoerce.specifications import GridSpec


def small_grid():
    return GridSpec(shell_points=500, seed=0)


def symbol(numerator, *denominators, dim=1):
    return RationalSymbol.of(parse_operator(numerator, dim), *(parse_operator(f, dim) for f in denominators))


def test_partial_of_resolvent():
    phi = symbol('1', 'D1 + i')
    d = symbolic_partial(phi, (1,))
    assert d.factors == ((parse_operator('D1 + i'), 2),)
    assert np.allclose(d.evaluate([[2.0]]), -1 / (2 + 1j) ** 2)


def test_partial_of_real_symbol():
    d = symbolic_partial(symbol('D1', 'D1^2 + 1'), (1,))
    x = np.array([[0.5], [3.0]])
    assert np.allclose(d.evaluate(x), (1 - x[:, 0] ** 2) / (x[:, 0] ** 2 + 1) ** 2)


def test_mixed_partial_of_product():
    phi = symbol('1', 'D1 + i', 'D2 + i', dim=2)
    d = symbolic_partial(phi, (1, 1))
    assert np.allclose(d.evaluate([[1.0, 2.0]]), 1 / ((1 + 1j) ** 2 * (2 + 1j) ** 2))


def test_partial_matches_finite_differences():
    phi = symbol('D1*D2', 'D1^2 + 1', 'D2 + i', dim=2)
    point = np.array([0.7, -1.3])
    h = 1e-5
    for alpha in [(1, 0), (0, 1)]:
        step = h * np.array(alpha, dtype=float)
        expected = (phi.evaluate([point + step]) - phi.evaluate([point - step])) / (2 * h)
        assert np.allclose(symbolic_partial(phi, alpha).evaluate([point]), expected, atol=1e-6)


def test_denominator_validation():
    with pytest.raises(DenominatorVanishes):
        symbol('1', 'D1 - 2')
    with pytest.raises(ValueError):
        RationalSymbol(Polynomial.constant(1), cutoff=0)
    symbol('1', 'D1^2 + D2^2', dim=2)


def test_resolvent_product_is_a_multiplier():
    report = check_mikhlin_like(symbol('1', 'D1 + i', 'D2 + i', dim=2), Fraction(1, 2), small_grid())
    assert report.verdict == PASS
    assert report.passed
    assert 0 < report.a_delta <= 4
    assert len(report.conditions) == 4
    assert report.witness is None


def test_missing_decay_in_one_variable():
    phi = symbol('1', 'D1 + i', dim=2)
    report = check_mikhlin_like(phi, '1/2', small_grid())
    assert report.verdict == FAIL
    assert report.witness.condition == 'decay'
    reduced = check_mikhlin_like(phi, '1/2', small_grid(), reduce_variables=True)
    assert reduced.passed
    assert reduced.coordinates == (1,)


@pytest.mark.parametrize('delta', [0, 1, '3/2', -0.5])
def test_invalid_delta(delta):
    with pytest.raises(InvalidDelta):
        check_mikhlin_like(symbol('1', 'D1 + i'), delta)


def test_multiplicativity():
    a = symbol('1', 'D1 + i', dim=2)
    b = symbol('1', 'D2 + i', dim=2)
    product = a * b
    points = np.array([[0.3, 2.0], [-5.0, 1.5]])
    assert np.allclose(product.evaluate(points), a.evaluate(points) * b.evaluate(points))
    assert check_mikhlin_like(product, Fraction(1, 2), small_grid()).passed


def test_p_ratio_of_elliptic_polynomial():
    report = check_p_ratio(parse_operator('D1^2 + D2^2 + 1'), small_grid())
    assert report.passed
    assert report.delta is None
    assert 2.3 <= report.a_delta <= 1 + np.sqrt(2) + 1e-6


def test_p_ratio_of_first_order_resolvent():
    report = check_p_ratio(parse_operator('D1 + i'), small_grid())
    assert report.passed
    assert report.a_delta == pytest.approx(np.sqrt(2))


def test_p_ratio_fails_on_real_zeros():
    report = check_p_ratio(parse_operator('D1*D2 + 1'), small_grid())
    assert report.verdict == FAIL
    assert not np.isfinite(report.a_delta)
    with pytest.raises(DenominatorVanishes):
        check_p_ratio(parse_operator('D1 - D1'))


def test_report_csv(tmp_path):
    report = check_p_ratio(parse_operator('D1 + i'), small_grid(), record=True)
    path = tmp_path / 'ratio.csv'
    write_report_csv(report, path)
    lines = path.read_text().splitlines()
    assert lines[0] == '"xi1","condition","value"'
    assert len(lines) == report.samples + 1
    with pytest.raises(ValueError):
        write_report_csv(check_p_ratio(parse_operator('D1 + i'), small_grid()), path)


def test_phi_family():
    base = parse_system('D1^2 + D2^2 + D3^2')
    phi = phi_family(base, (1, 0, 0), 1, 2)
    assert phi.dim == 3
    assert phi.cutoff > 0
    assert len(phi.factors) == 3
    S = construct_s_system(base)
    assert phi_family(s_system_from(S), (1, 0, 0), 1, 2) == phi


@pytest.mark.parametrize('alpha, j, v', [
    ((4, 0, 0), 1, 2),
    ((1, 0), 1, 2),
    ((1, 0, 0), 2, 2),
    ((1, 0, 0), 1, 1),
])
def test_phi_family_preconditions(alpha, j, v):
    with pytest.raises(PreconditionViolated):
        phi_family(parse_system('D1^2 + D2^2 + D3^2'), alpha, j, v)


def test_phi_family_needs_elliptic_base():
    with pytest.raises(PreconditionViolated):
        phi_family(parse_system('D1^2 + D2^2 - D3^2'), (1, 0, 0), 1, 2)


def test_certify_phi_over_laplacian():
    grid = GridSpec(exponents=(-2, 8), radii=(16, 64, 256, 1024), shell_points=256, seed=0)
    certificate = certify_phi(parse_system('D1^2 + D2^2 + D3^2'), (1, 0, 0), 1, 2, Fraction(1, 6), grid)
    decomposition = certificate.decomposition
    assert decomposition.reduced is None
    assert len(decomposition.pieces) == 6
    points = np.array([[3.0, 1.0, -2.0], [10.0, 0.5, 0.25]])
    assert np.allclose(decomposition.evaluate(points), decomposition.phi.evaluate(points))
    assert certificate.passed
    assert certificate.verdict == PASS


def test_phi_gamma():
    base = parse_system('D1^2 + D2^2 + D3^2')
    phi = phi_gamma(base, (2, 0, 0), cutoff=Fraction(1))
    assert len(phi.factors) == 2
    assert np.allclose(phi.evaluate([[1.0, 1.0, 1.0]]), 1 / (9 * 4))
    with pytest.raises(PreconditionViolated):
        phi_gamma(base, (1, 0))
