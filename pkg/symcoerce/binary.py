from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from sympy import Poly
from sympy.polys.domains import QQ_I

from .errors import DimensionMismatch, NotHomogeneous, ZeroForm
from .parser import format_operator
from .poly import T, Polynomial, RootInterval, fraction_coeffs, gaussian, gcd_all, sturm_real_roots


@dataclass(frozen=True)
class RealDirection:
    ''' A real linear factor lambda*xi1 + mu*xi2 of a binary form.
        Its zero direction is (1, t) for a root t of H(1, t), rational (`slope`) or algebraic (`root`), or (0, 1) for the axis. '''
    multiplicity: int
    slope: Optional[Fraction] = None
    root: Optional[RootInterval] = None
    axis: bool = False


    @property
    def is_rational(self) -> bool:
        return self.root is None


    @property
    def t(self) -> float:
        if self.axis:
            return float('inf')
        return float(self.slope) if self.root is None else float(self.root)


    @property
    def factor(self) -> Tuple:
        ''' (lambda, mu), exact for rational directions and floats otherwise '''
        if self.axis:
            return Fraction(1), Fraction(0)
        if self.root is None:
            if self.slope == 0:
                return Fraction(0), Fraction(1)
            return Fraction(1), -1 / self.slope
        return 1.0, -1 / float(self.root)


    @property
    def zero_direction(self) -> Tuple:
        lam, mu = self.factor
        return -mu, lam


    def sort_key(self) -> float:
        lam, mu = self.factor
        return float('inf') if lam == 0 else float(mu / lam)


    def linear_form(self) -> Polynomial:
        if not self.is_rational:
            raise ValueError('Algebraic directions have no exact linear form')
        lam, mu = self.factor
        return Polynomial(2, {(1, 0): lam, (0, 1): mu})


    def enclosure(self, width=Fraction(1, 2 ** 60)) -> Tuple[Fraction, Fraction]:
        ''' Rational bounds of t '''
        if self.axis:
            raise ValueError('The axis direction has no finite t')
        if self.root is None:
            return self.slope, self.slope
        refined = self.root.refine(width)
        return refined.lo, refined.hi


    def describe(self) -> str:
        if self.axis:
            return '(1, 0)'
        if self.root is None:
            lam, mu = self.factor
            return f'({lam}, {mu})'
        defining = Polynomial.from_poly(self.root.poly, 1)
        return f'(1, -1/t), t the root of {format_operator(defining).replace("D1", "t")} in ({self.root.lo}, {self.root.hi}]'


@dataclass(frozen=True)
class BinaryFormFactorization:
    ''' H = scalar * prod L_k^m_k * prod group^m * elliptic_cofactor, with L_k the rational linear factors,
        `groups` the irreducible rational forms carrying the algebraic directions, and a cofactor whose first
        graded-lex coefficient is 1 '''
    scalar: object
    real_factors: Tuple[RealDirection, ...]
    elliptic_cofactor: Polynomial
    groups: Tuple[Tuple[Polynomial, int], ...] = ()


    @property
    def degree(self) -> int:
        return sum(d.multiplicity for d in self.real_factors) + self.elliptic_cofactor.degree


    @property
    def is_elliptic(self) -> bool:
        return not self.real_factors


    def reassemble(self) -> Polynomial:
        result = self.elliptic_cofactor.scale(self.scalar)
        for d in self.real_factors:
            if d.is_rational:
                result = result * d.linear_form() ** d.multiplicity
        for form, m in self.groups:
            result = result * form ** m
        return result


def complex_univariate(p: Polynomial) -> Poly:
    return Poly.from_dict({e: c for e, c in p.terms.items()}, T, domain=QQ_I) if not p.is_zero else Poly(0, T, domain=QQ_I)


def multiplicity(p: Poly, f: Poly) -> int:
    ''' Largest k with f^k dividing p over the Gaussian rationals '''
    f = Poly(f.as_expr(), T, domain=QQ_I)
    k = 0
    while True:
        q, r = p.div(f)
        if not r.is_zero:
            return k
        p, k = q, k + 1


def homogenise(f: Poly) -> Polynomial:
    ''' xi1^d f(xi2/xi1) for a rational polynomial f of degree d '''
    coeffs = fraction_coeffs(f)
    d = len(coeffs) - 1
    return Polynomial(2, {(k, d - k): c for k, c in enumerate(coeffs)})


def factor_binary_form(H: Polynomial) -> BinaryFormFactorization:
    if H.dim != 2:
        raise DimensionMismatch(f'Binary forms live in two variables, got dimension {H.dim}')
    if H.is_zero:
        raise ZeroForm('The zero form has no factorization')
    if not H.is_homogeneous:
        raise NotHomogeneous('Only homogeneous polynomials are binary forms')
    p = H.chart(1)
    axis = H.degree - p.degree
    g = gcd_all(p.univariate())
    directions = []
    groups = []
    divisor = Polynomial.constant(2)
    scale = gaussian(1)
    if g.degree() > 0:
        dividend = complex_univariate(p)
        for f, _ in g.factor_list()[1]:
            roots = sturm_real_roots(f) if f.degree() > 0 else []
            if not roots:
                continue
            m = multiplicity(dividend, f)
            form = homogenise(f.monic())
            divisor = divisor * form ** m
            if f.degree() == 1:
                a, b = fraction_coeffs(f)
                t = -b / a
                directions.append(RealDirection(m, slope=t))
                if t:
                    scale = scale * gaussian(-t) ** m
            else:
                groups.append((form, m))
                directions.extend(RealDirection(m, root=r) for r in roots)
    if axis:
        directions.append(RealDirection(axis, axis=True))
        divisor = divisor * Polynomial.variable(2, 1) ** axis
    quotient = H.exact_quotient(divisor)
    lead = quotient.leading_coefficient()
    cofactor = quotient.scale(QQ_I.one / lead)
    directions.sort(key=lambda d: d.sort_key())
    return BinaryFormFactorization(lead * scale, tuple(directions), cofactor, tuple(groups))
