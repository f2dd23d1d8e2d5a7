from fractions import Fraction

import pytest

from symcoerce.errors import WeightViolation, ZeroPoint
from symcoerce.poly import OperatorSystem, Polynomial, gaussian
from symcoerce.subordination import alg_inequality_falsify, jacobian_rank_at, subordination_principal


x1, x2 = Polynomial.variable(2, 1), Polynomial.variable(2, 2)
i = gaussian(0, 1)


def test_principal_part_is_a_combination():
    S = OperatorSystem.of(x1 ** 2, x2 ** 2)
    outcome = subordination_principal(3 * x1 ** 2 - x2 ** 2 + x1, S)
    assert outcome.solvable
    assert outcome.status == 'Coefficients'
    assert outcome.coefficients == (gaussian(3), gaussian(-1))


def test_separating_functional():
    S = OperatorSystem.of(x1 ** 2 + x2 ** 2)
    outcome = subordination_principal(x1 * x2, S)
    assert not outcome.solvable
    assert outcome.pairing
    assert (1, 1) in outcome.functional
    # the functional annihilates every principal part
    principal = S.principal_parts()[0]
    total = sum((w * principal.coefficient(m) for m, w in outcome.functional.items()), gaussian(0))
    assert not total


def test_weights_are_enforced():
    with pytest.raises(WeightViolation):
        subordination_principal(x1 ** 3, OperatorSystem.of(x1 ** 2 + x2 ** 2))


def test_jacobian_rank():
    S = OperatorSystem.of(x1 ** 2 + i * x2 ** 2)
    assert jacobian_rank_at(S, (1, 0)) == 1
    assert jacobian_rank_at(S, (1, Fraction(1, 2))) == 2
    with pytest.raises(ZeroPoint):
        jacobian_rank_at(S, (0, 0))


def test_inequality_fails_along_a_zero_direction():
    verdict = alg_inequality_falsify(x1 ** 2, OperatorSystem.of(x2 ** 2 + 1))
    assert verdict.falsified
    assert verdict.direction == (1, 0)
    assert (verdict.q_growth, verdict.p_growth) == (2, 0)


def test_inequality_holds_for_an_elliptic_system():
    verdict = alg_inequality_falsify(x1 * x2, OperatorSystem.of(x1 ** 2 + x2 ** 2))
    assert not verdict.falsified
    assert verdict.status == 'NotFalsified'
    assert verdict.tried > 0
