import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from sympy.polys.domains import QQ_I

from .binary import BinaryFormFactorization, RealDirection, factor_binary_form
from .errors import (
    DimensionMismatch,
    MultipleRealZero,
    NotElliptic,
    NotWeaklyCoercive,
    PNotWeaklyCoercive,
    PreconditionViolated,
    ZeroPolynomial,
)
from .poly import (
    Polynomial,
    determinant,
    gaussian,
    re_im,
    solve_complex,
    sturm_real_roots,
    sylvester_matrix,
    to_complex,
)
from .util import iv_bounds, iv_hull, iv_polynomial, iv_precision


log = logging.getLogger(__name__)

ELLIPTIC = 'Elliptic'
WEAKLY_COERCIVE = 'WeaklyCoerciveNotElliptic'
NOT_WEAKLY_COERCIVE = 'NotWeaklyCoercive'

MULTIPLE_REAL_ZERO = 'MultipleRealZero'
REAL_ALPHA = 'RealAlpha'
ORDER_DROP = 'OrderDrop'

ENCLOSURE_BITS = 200
ROOT_WIDTH = Fraction(1, 2 ** 120)
MAX_DENOMINATOR = 10 ** 12


@dataclass(frozen=True)
class AlphaConstant:
    ''' The constant alpha_r of the affine factor lambda_r*xi1 + mu_r*xi2 + alpha_r. `exact` is set for rational
        directions, `enclosure` ((re_lo, re_hi), (im_lo, im_hi)) for algebraic ones. '''
    direction: RealDirection
    value: complex
    im_nonzero: bool
    exact: Optional[object] = None
    enclosure: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None


@dataclass(frozen=True)
class AffineFactor:
    lam: Fraction
    mu: Fraction
    alpha: object


    def polynomial(self) -> Polynomial:
        return Polynomial(2, {(1, 0): self.lam, (0, 1): self.mu, (0, 0): self.alpha})


    def as_tuple(self) -> Tuple[float, float, complex]:
        return float(self.lam), float(self.mu), to_complex(self.alpha)


@dataclass(frozen=True)
class NormalForm2D:
    ''' P = R * prod_k (lambda_k*xi1 + mu_k*xi2 + alpha_k) + Q with deg Q <= l - 2.
        Inexact forms carry rationalised coefficients and the size of the mismatch in degrees l and l-1. '''
    R: Polynomial
    factors: Tuple[AffineFactor, ...]
    Q: Polynomial
    residual: float = 0.0
    exact: bool = True


    def reassemble(self) -> Polynomial:
        result = self.R
        for f in self.factors:
            result = result * f.polynomial()
        return result + self.Q


@dataclass(frozen=True)
class WeakCoercivityVerdict2D:
    status: str
    order: int
    factorization: Optional[BinaryFormFactorization] = None
    reason: Optional[str] = None
    direction: Optional[RealDirection] = None
    alpha: Optional[AlphaConstant] = None
    alphas: Tuple[AlphaConstant, ...] = ()
    normal_form: Optional[NormalForm2D] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)


    @property
    def is_weakly_coercive(self) -> bool:
        return self.status != NOT_WEAKLY_COERCIVE


    @property
    def is_elliptic(self) -> bool:
        return self.status == ELLIPTIC


def _check_binary(P: Polynomial):
    if P.dim != 2:
        raise DimensionMismatch(f'Expected an operator in two variables, got dimension {P.dim}')
    if P.is_zero:
        raise ZeroPolynomial('The zero operator has no weak coercivity verdict')


def swapped(P: Polynomial) -> Polynomial:
    return Polynomial(2, {(b, a): c for (a, b), c in P.terms.items()})


def _imag_numerator(q: Polynomial, dp: Polynomial):
    ''' Im(q * conj(p')) as a rational polynomial in t; alpha is real exactly where it vanishes '''
    return (q * dp.conjugate()).imag_part().univariate()[0]


def _interval_value(p: Polynomial, t) -> Tuple:
    re = [(e, re_im(c)[0]) for e, c in p.terms.items()]
    im = [(e, re_im(c)[1]) for e, c in p.terms.items()]
    return iv_polynomial(re, [t]), iv_polynomial(im, [t])


def _algebraic_alpha(direction: RealDirection, q: Polynomial, dp: Polynomial) -> AlphaConstant:
    numerator = _imag_numerator(q, dp)
    f = direction.root.poly
    real = numerator.is_zero or numerator.rem(f).is_zero
    lo, hi = direction.enclosure(ROOT_WIDTH)
    with iv_precision(ENCLOSURE_BITS):
        t = iv_hull(lo, hi)
        qr, qi = _interval_value(q, t)
        dr, di = _interval_value(dp, t)
        scale = (dr ** 2 + di ** 2) * t
        re = -(qr * dr + qi * di) / scale
        im = -(qi * dr - qr * di) / scale
        enclosure = (iv_bounds(re), iv_bounds(im))
    value = complex(sum(enclosure[0]) / 2, sum(enclosure[1]) / 2)
    return AlphaConstant(direction, value, not real, enclosure=enclosure)


def _rational_alpha(direction: RealDirection, q: Polynomial, dp: Polynomial) -> AlphaConstant:
    t = direction.slope
    value = -q.evaluate((t,)) / dp.evaluate((t,))
    value = value * gaussian(1 / t if t else -1)
    return AlphaConstant(direction, to_complex(value), bool(value.y), exact=value)


def _axis_alpha(direction: RealDirection, lower: Polynomial, principal: Polynomial) -> AlphaConstant:
    slope = swapped(principal).chart(1).differentiate(1).evaluate((0,))
    value = lower.evaluate((0, 1)) / slope
    return AlphaConstant(direction, to_complex(value), bool(value.y), exact=value)


def alpha_constants(P: Polynomial, order: Optional[int] = None) -> List[AlphaConstant]:
    ''' alpha_r for every real direction of P^l, in direction order. Realness is decided exactly. '''
    _check_binary(P)
    l = P.degree if order is None else order
    principal = P.homogeneous_component(l)
    lower = P.homogeneous_component(l - 1)
    factorization = factor_binary_form(principal)
    for d in factorization.real_factors:
        if d.multiplicity > 1:
            raise MultipleRealZero(f'Real direction {d.describe()} of the principal part has multiplicity {d.multiplicity}')
    p = principal.chart(1)
    q = lower.chart(1)
    dp = p.differentiate(1)
    alphas = []
    for d in factorization.real_factors:
        if d.axis:
            alphas.append(_axis_alpha(d, lower, principal))
        elif d.is_rational:
            alphas.append(_rational_alpha(d, q, dp))
        else:
            alphas.append(_algebraic_alpha(d, q, dp))
    return alphas


def decide_weak_coercive_2d(P: Polynomial, order: Optional[int] = None) -> WeakCoercivityVerdict2D:
    ''' Weak coercivity of P(D) in W^l_inf(R^2), l = deg P unless `order` says otherwise '''
    _check_binary(P)
    l = P.degree if order is None else int(order)
    if l < P.degree:
        raise ValueError(f'Order {l} is below the degree {P.degree} of the operator')
    if l < 1:
        raise ValueError('Weak coercivity is decided for operators of order at least 1')
    notes = ('order one: decided by the same normal form as order l >= 2',) if l == 1 else ()
    if P.degree < l:
        if l >= 2:
            log.debug('Degree %d dropped below order %d', P.degree, l)
            return WeakCoercivityVerdict2D(NOT_WEAKLY_COERCIVE, l, reason=ORDER_DROP, notes=notes)
        return WeakCoercivityVerdict2D(WEAKLY_COERCIVE, l, notes=notes + ('only the zero-order term is estimated',))
    factorization = factor_binary_form(P.homogeneous_component(l))
    if factorization.is_elliptic:
        verdict = WeakCoercivityVerdict2D(ELLIPTIC, l, factorization, notes=notes)
        return _with_normal_form(P, verdict)
    for d in factorization.real_factors:
        if d.multiplicity > 1:
            return WeakCoercivityVerdict2D(NOT_WEAKLY_COERCIVE, l, factorization, MULTIPLE_REAL_ZERO, direction=d, notes=notes)
    alphas = tuple(alpha_constants(P, l))
    for a in alphas:
        if not a.im_nonzero:
            return WeakCoercivityVerdict2D(
                NOT_WEAKLY_COERCIVE, l, factorization, REAL_ALPHA, direction=a.direction, alpha=a, alphas=alphas, notes=notes
            )
    verdict = WeakCoercivityVerdict2D(WEAKLY_COERCIVE, l, factorization, alphas=alphas, notes=notes)
    return _with_normal_form(P, verdict)


def _with_normal_form(P: Polynomial, verdict: WeakCoercivityVerdict2D) -> WeakCoercivityVerdict2D:
    form = _normal_form(P, verdict.order, verdict.factorization)
    return WeakCoercivityVerdict2D(
        verdict.status, verdict.order, verdict.factorization, alphas=verdict.alphas, normal_form=form, notes=verdict.notes
    )


def basis(degree: int) -> List[Tuple[int, int]]:
    ''' Monomials of a binary form, xi1^degree first '''
    return [(degree - k, k) for k in range(degree + 1)] if degree >= 0 else []


def _normal_form(P: Polynomial, l: int, factorization: BinaryFormFactorization) -> NormalForm2D:
    directions = factorization.real_factors
    if all(d.is_rational for d in directions):
        return _exact_normal_form(P, l, directions)
    return _numeric_normal_form(P, l, directions)


def _exact_normal_form(P: Polynomial, l: int, directions: Sequence[RealDirection]) -> NormalForm2D:
    # c_E*T + R_1*F = P^{l-1} with F the product of the linear factors and c_E = P^l / F
    m = len(directions)
    forms = [d.linear_form() for d in directions]
    F = Polynomial.constant(2)
    for L in forms:
        F = F * L
    principal = P.homogeneous_component(l)
    cofactor = principal.exact_quotient(F)
    columns = [cofactor * Polynomial.monomial(e) for e in basis(m - 1)] + [F * Polynomial.monomial(e) for e in basis(l - m - 1)]
    rows = [[c.coefficient(e) for c in columns] for e in basis(l - 1)]
    rhs = [P.homogeneous_component(l - 1).coefficient(e) for e in basis(l - 1)]
    solution, _ = solve_complex(rows, rhs)
    if solution is None:
        raise ValueError('Principal cofactor and real factors share a zero')
    T = sum((Polynomial.monomial(e, c) for e, c in zip(basis(m - 1), solution[:m])), Polynomial.constant(2, 0))
    R1 = sum((Polynomial.monomial(e, c) for e, c in zip(basis(l - m - 1), solution[m:])), Polynomial.constant(2, 0))
    factors = []
    for r, d in enumerate(directions):
        z = d.zero_direction
        others = gaussian(1)
        for k, L in enumerate(forms):
            if k != r:
                others = others * L.evaluate(z)
        lam, mu = d.factor
        factors.append(AffineFactor(lam, mu, T.evaluate(z) / others))
    R = cofactor + R1
    product = R
    for f in factors:
        product = product * f.polynomial()
    Q = P - product
    if Q.degree > l - 2:
        raise ValueError(f'Normal form remainder has degree {Q.degree} > {l - 2}')
    return NormalForm2D(R, tuple(factors), Q)


def rationalise_complex(z: complex):
    return gaussian(Fraction(z.real).limit_denominator(MAX_DENOMINATOR), Fraction(z.imag).limit_denominator(MAX_DENOMINATOR))


def _convolution(form: np.ndarray, degree: int) -> np.ndarray:
    ''' Matrix of c -> form * c for binary forms c of the given degree '''
    matrix = np.zeros((len(form) + degree, degree + 1), dtype=complex)
    for k in range(degree + 1):
        matrix[k:k + len(form), k] = form
    return matrix


def _numeric_form(P: Polynomial, degree: int) -> np.ndarray:
    return np.array([to_complex(P.coefficient(e)) for e in basis(degree)], dtype=complex)


def _numeric_normal_form(P: Polynomial, l: int, directions: Sequence[RealDirection]) -> NormalForm2D:
    m = len(directions)
    linear = [np.array(d.factor, dtype=float).astype(complex) for d in directions]
    F = np.ones(1, dtype=complex)
    for L in linear:
        F = np.convolve(F, L)
    cofactor = np.linalg.lstsq(_convolution(F, l - m), _numeric_form(P, l), rcond=None)[0]
    blocks = [_convolution(cofactor, m - 1)]
    if l - m - 1 >= 0:
        blocks.append(_convolution(F, l - m - 1))
    system = np.hstack(blocks)
    solution = np.linalg.lstsq(system, _numeric_form(P, l - 1), rcond=None)[0]
    T, R1 = solution[:m], solution[m:]

    def value(form, z):
        d = len(form) - 1
        return sum(c * z[0] ** (d - k) * z[1] ** k for k, c in enumerate(form))

    factors = []
    for r, d in enumerate(directions):
        z = np.array(d.zero_direction, dtype=float)
        others = np.prod([value(L, z) for k, L in enumerate(linear) if k != r])
        lam, mu = d.factor
        factors.append(AffineFactor(
            Fraction(lam).limit_denominator(MAX_DENOMINATOR),
            Fraction(mu).limit_denominator(MAX_DENOMINATOR),
            rationalise_complex(complex(value(T, z) / others)),
        ))
    terms = {e: rationalise_complex(c) for e, c in zip(basis(l - m), cofactor)}
    for e, c in zip(basis(l - m - 1), R1):
        terms[e] = rationalise_complex(c)
    R = Polynomial(2, terms)
    product = R
    for f in factors:
        product = product * f.polynomial()
    difference = P - product
    mismatch = [to_complex(c) for e, c in difference.terms.items() if sum(e) >= l - 1]
    residual = max((abs(c) for c in mismatch), default=0.0)
    Q = Polynomial(2, {e: c for e, c in difference.terms.items() if sum(e) <= l - 2})
    log.debug('Numeric normal form with residual %.3g', residual)
    return NormalForm2D(R, tuple(factors), Q, float(residual), exact=False)


def normal_form_2d(P: Polynomial, order: Optional[int] = None) -> NormalForm2D:
    verdict = decide_weak_coercive_2d(P, order)
    if not verdict.is_weakly_coercive:
        raise NotWeaklyCoercive(f'Operator is not weakly coercive ({verdict.reason}); it has no normal form')
    if verdict.normal_form is None:
        raise NotWeaklyCoercive('Operator of order one without principal part has no normal form')
    return verdict.normal_form


@dataclass(frozen=True)
class ResultantVerdict:
    status: str
    resultant: Optional[object] = None
    reason: Optional[str] = None


    @property
    def applicable(self) -> bool:
        return self.status != 'NotApplicable'


def form_coefficients(H: Polynomial, degree: int) -> list:
    return [H.coefficient(e) for e in basis(degree)]


def binary_resultant(F: Polynomial, G: Polynomial, deg_f: int, deg_g: int):
    ''' Resultant of two binary forms with declared degrees; zero iff they share a nontrivial complex zero '''
    return determinant(sylvester_matrix(form_coefficients(F, deg_f), form_coefficients(G, deg_g)))


def resultant_criterion_2d(P: Polynomial) -> ResultantVerdict:
    ''' Weak coercivity from the resultant of P^l and Im P^{l-1}, valid when P^l is a complex multiple of a real form
        with only real zeros '''
    _check_binary(P)
    l = P.degree
    if l < 1:
        return ResultantVerdict('NotApplicable', reason='operator of order zero')
    c = P.homogeneous_component(l).leading_coefficient()
    principal = P.homogeneous_component(l).scale(QQ_I.one / c)
    lower = P.homogeneous_component(l - 1).scale(QQ_I.one / c)
    if not principal.is_real:
        return ResultantVerdict('NotApplicable', reason='principal part is not a complex multiple of a real form')
    p = principal.chart(1).univariate()[0]
    axis = l - p.degree()
    squarefree = p.sqf_part()
    if len(sturm_real_roots(p)) < squarefree.degree():
        return ResultantVerdict('NotApplicable', reason='principal part has non-real zeros')
    if axis > 1 or squarefree.degree() < p.degree():
        return ResultantVerdict(NOT_WEAKLY_COERCIVE, reason='principal part has a multiple real zero')
    value = binary_resultant(principal, lower.imag_part(), l, l - 1)
    status = 'WeaklyCoercive' if value else NOT_WEAKLY_COERCIVE
    return ResultantVerdict(status, value)


@dataclass(frozen=True)
class L0Membership:
    member: bool
    constant: Optional[object] = None


def l0_membership_2d(T: Polynomial, P: Polynomial) -> L0Membership:
    ''' T(D) is subordinate to a weakly coercive P(D) in the L^inf sense iff its top part is proportional to P^l '''
    verdict = decide_weak_coercive_2d(P)
    if not verdict.is_weakly_coercive:
        raise PNotWeaklyCoercive(f'P is not weakly coercive ({verdict.reason})')
    if T.dim != P.dim:
        raise DimensionMismatch(f'T has dimension {T.dim}, P has dimension {P.dim}')
    l = P.degree
    if T.degree > l:
        raise PreconditionViolated(f'deg T = {T.degree} exceeds deg P = {l}')
    if T.degree < l:
        return L0Membership(True, gaussian(0))
    principal = P.homogeneous_component(l)
    top = T.homogeneous_component(l)
    lead = next(iter(principal.terms))
    c = top.coefficient(lead) / principal.coefficient(lead)
    if top == principal.scale(c):
        return L0Membership(True, c)
    return L0Membership(False)


def elliptic_product_verdict(E: Polynomial, W: Polynomial) -> WeakCoercivityVerdict2D:
    ''' Verdict for E*W with E elliptic and W weakly coercive; the product is weakly coercive again '''
    if not decide_weak_coercive_2d(E).is_elliptic:
        raise NotElliptic('The first factor needs to be elliptic')
    if not decide_weak_coercive_2d(W).is_weakly_coercive:
        raise NotWeaklyCoercive('The second factor needs to be weakly coercive')
    return decide_weak_coercive_2d(E * W)
