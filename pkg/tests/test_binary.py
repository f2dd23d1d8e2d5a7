import numpy as np
import pytest

from symcoerce.binary import factor_binary_form
from symcoerce.errors import DimensionMismatch, NotHomogeneous, ZeroForm
from symcoerce.parser import parse_operator
from symcoerce.poly import Polynomial


def test_coordinate_cross():
    H = parse_operator('D1*D2')
    factorization = factor_binary_form(H)
    assert len(factorization.real_factors) == 2
    assert all(d.multiplicity == 1 and d.is_rational for d in factorization.real_factors)
    assert factorization.elliptic_cofactor == Polynomial.constant(2)
    assert factorization.reassemble() == H
    assert {tuple(abs(x) for x in d.zero_direction) for d in factorization.real_factors} == {(0, 1), (1, 0)}


def test_elliptic_form():
    H = parse_operator('D1^2 + D2^2')
    factorization = factor_binary_form(H)
    assert factorization.is_elliptic
    assert factorization.elliptic_cofactor == H
    assert factorization.degree == 2


def test_double_direction():
    H = parse_operator('(D1 - D2)^2*(D1^2 + D2^2)')
    factorization = factor_binary_form(H)
    (d,) = factorization.real_factors
    assert d.multiplicity == 2
    assert d.factor == (1, -1)
    assert factorization.elliptic_cofactor == parse_operator('D1^2 + D2^2')
    assert factorization.reassemble() == H


def test_algebraic_directions():
    H = parse_operator('D1^2 - 2*D2^2')
    factorization = factor_binary_form(H)
    assert len(factorization.real_factors) == 2
    assert not any(d.is_rational for d in factorization.real_factors)
    assert factorization.elliptic_cofactor == Polynomial.constant(2)
    assert sorted(d.t for d in factorization.real_factors) == pytest.approx([-1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert factorization.reassemble() == H
    lo, hi = factorization.real_factors[0].enclosure()
    assert lo <= hi
    assert float(hi - lo) < 1e-15


def test_scalar_and_odd_multiplicity():
    H = parse_operator('(2 + i)*(D1 - 3*D2)^3*D1')
    factorization = factor_binary_form(H)
    assert sorted(d.multiplicity for d in factorization.real_factors) == [1, 3]
    assert factorization.reassemble() == H


def test_invalid_forms():
    with pytest.raises(ZeroForm):
        factor_binary_form(Polynomial(2))
    with pytest.raises(NotHomogeneous):
        factor_binary_form(parse_operator('D1^2 + D2'))
    with pytest.raises(DimensionMismatch):
        factor_binary_form(parse_operator('D1*D2*D3'))
