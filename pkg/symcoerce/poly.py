from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from sympy import I, Matrix, Poly, Rational
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .errors import (
    BothZero,
    DimensionMismatch,
    EmptyKeepSet,
    IndexOutOfRange,
    TermAboveWeight,
    WeightViolation,
    ZeroPolynomial,
)


T = sympy.Symbol('t')
Scalar = Union[int, Fraction, complex, 'sympy.Expr']
MultiIndex = Tuple[int, ...]


def rational(x) -> Rational:
    if isinstance(x, Rational):
        return x
    if isinstance(x, int):
        return Rational(x)
    if isinstance(x, Fraction):
        return Rational(x.numerator, x.denominator)
    if hasattr(x, 'numerator') and hasattr(x, 'denominator'):
        return Rational(int(x.numerator), int(x.denominator))
    raise ValueError(f'Cannot read {x!r} as an exact rational')


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(int(x.p), int(x.q))
    if hasattr(x, 'numerator') and hasattr(x, 'denominator'):
        return Fraction(int(x.numerator), int(x.denominator))
    raise ValueError(f'Cannot read {x!r} as an exact rational')


def gaussian(re=0, im=0):
    ''' Gaussian rational re + i*im. Also accepts an existing Gaussian rational or an exact sympy number as `re`. '''
    if isinstance(re, QQ_I.dtype) and im == 0:
        return re
    if isinstance(re, sympy.Basic) and im == 0:
        return QQ_I.from_sympy(re)
    return QQ_I.from_sympy(rational(re) + I * rational(im))


def re_im(z) -> Tuple[Fraction, Fraction]:
    return to_fraction(z.x), to_fraction(z.y)


def to_complex(z) -> complex:
    re, im = re_im(z)
    return complex(float(re), float(im))


def to_sympy_number(z) -> sympy.Expr:
    return QQ_I.to_sympy(z)


def format_scalar(z) -> str:
    re, im = re_im(z)
    parts = []
    if re:
        parts.append(str(re))
    if im:
        parts.append(f'{im}i' if im not in (1, -1) else ('i' if im == 1 else '-i'))
    if not parts:
        return '0'
    return ' + '.join(parts).replace('+ -', '- ')


@lru_cache(maxsize=None)
def generators(dim: int) -> Tuple[sympy.Symbol, ...]:
    return sympy.symbols(f'xi1:{dim + 1}')


def graded_lex_key(exponents: MultiIndex):
    return (-sum(exponents), tuple(-e for e in exponents))


class Polynomial:
    ''' Immutable sparse polynomial in xi_1..xi_dim with Gaussian rational coefficients '''

    def __init__(self, dim: int, terms: Optional[Dict[Sequence[int], Scalar]] = None):
        if dim < 1:
            raise ValueError(f'Dimension needs to be positive, got {dim}')
        rep = {}
        for exponents, coeff in (terms or {}).items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != dim:
                raise DimensionMismatch(f'Multi-index {exponents} does not have length {dim}')
            if any(e < 0 for e in exponents):
                raise ValueError(f'Negative exponent in multi-index {exponents}')
            rep[exponents] = rep.get(exponents, QQ_I.zero) + gaussian(coeff)
        rep = {k: v for k, v in rep.items() if v}
        self._dim = dim
        if rep:
            self._poly = Poly.from_dict(rep, *generators(dim), domain=QQ_I)
        else:
            self._poly = Poly(0, *generators(dim), domain=QQ_I)


    @classmethod
    def from_poly(cls, poly: Poly, dim: Optional[int] = None) -> 'Polynomial':
        dim = len(poly.gens) if dim is None else dim
        terms = {}
        for exponents, coeff in poly.as_dict(native=False).items():
            terms[exponents] = gaussian(sympy.sympify(coeff))
        return cls(dim, terms)


    @classmethod
    def constant(cls, dim: int, value: Scalar = 1) -> 'Polynomial':
        return cls(dim, {(0,) * dim: value})


    @classmethod
    def variable(cls, dim: int, index: int) -> 'Polynomial':
        if not 1 <= index <= dim:
            raise IndexOutOfRange(f'Variable index {index} outside 1..{dim}')
        return cls(dim, {tuple(int(k == index - 1) for k in range(dim)): 1})


    @classmethod
    def monomial(cls, exponents: Sequence[int], coeff: Scalar = 1) -> 'Polynomial':
        return cls(len(exponents), {tuple(exponents): coeff})


    @property
    def dim(self) -> int:
        return self._dim


    @property
    def poly(self) -> Poly:
        return self._poly


    @cached_property
    def terms(self) -> Dict[MultiIndex, object]:
        items = self._poly.as_dict(native=True).items()
        return {k: v for k, v in sorted(items, key=lambda kv: graded_lex_key(kv[0])) if v}


    @property
    def is_zero(self) -> bool:
        return not self.terms


    @property
    def degree(self) -> int:
        ''' Total degree, -1 for the zero polynomial '''
        return max((sum(e) for e in self.terms), default=-1)


    @property
    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1


    @property
    def is_real(self) -> bool:
        return all(not c.y for c in self.terms.values())


    def coefficient(self, exponents: Sequence[int]):
        return self.terms.get(tuple(exponents), QQ_I.zero)


    def leading_coefficient(self):
        ''' Coefficient of the first term in graded-lex order '''
        for coeff in self.terms.values():
            return coeff
        return QQ_I.zero


    def variables(self) -> Tuple[int, ...]:
        ''' 1-based indices of the variables that occur '''
        return tuple(k + 1 for k in range(self.dim) if any(e[k] for e in self.terms))


    def _coerce(self, other) -> 'Polynomial':
        if isinstance(other, Polynomial):
            if other.dim != self.dim:
                raise DimensionMismatch(f'Cannot combine polynomials of dimension {self.dim} and {other.dim}')
            return other
        return Polynomial.constant(self.dim, other)


    def _wrap(self, poly: Poly) -> 'Polynomial':
        result = Polynomial.__new__(Polynomial)
        result._dim = self.dim
        result._poly = poly
        return result


    def __add__(self, other):
        return self._wrap(self._poly + self._coerce(other)._poly)


    __radd__ = __add__


    def __sub__(self, other):
        return self._wrap(self._poly - self._coerce(other)._poly)


    def __rsub__(self, other):
        return self._coerce(other) - self


    def __mul__(self, other):
        return self._wrap(self._poly * self._coerce(other)._poly)


    __rmul__ = __mul__


    def __neg__(self):
        return self._wrap(-self._poly)


    def __pow__(self, k: int):
        if k < 0:
            raise ValueError('Polynomials only have non-negative powers')
        return self._wrap(self._poly ** k)


    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            try:
                other = self._coerce(other)
            except (ValueError, TypeError):
                return NotImplemented
        return self.dim == other.dim and self.terms == other.terms


    def __hash__(self):
        return hash((self.dim, tuple((k, re_im(v)) for k, v in self.terms.items())))


    def __repr__(self):
        from .parser import format_operator
        return f'Polynomial({self.dim}, {format_operator(self)!r})'


    def scale(self, c: Scalar) -> 'Polynomial':
        return self * Polynomial.constant(self.dim, c)


    def exact_quotient(self, other: 'Polynomial') -> Optional['Polynomial']:
        ''' self / other when the division is exact, None otherwise '''
        other = self._coerce(other)
        if other.is_zero:
            raise ZeroPolynomial('Division by the zero polynomial')
        quotient, remainder = self._poly.div(other._poly)
        if not remainder.is_zero:
            return None
        return self._wrap(quotient)


    def homogeneous_component(self, k: int) -> 'Polynomial':
        return Polynomial(self.dim, {e: c for e, c in self.terms.items() if sum(e) == k})


    def weighted_degree(self, weights: Sequence[int]) -> Fraction:
        if len(weights) != self.dim:
            raise DimensionMismatch(f'Weight vector of length {len(weights)} for dimension {self.dim}')
        return max((anisotropic_degree(e, weights) for e in self.terms), default=Fraction(0))


    def l_principal_part(self, weights: Sequence[int]) -> 'Polynomial':
        check_weights(weights, self.dim)
        kept = {}
        for exponents, coeff in self.terms.items():
            degree = anisotropic_degree(exponents, weights)
            if degree > 1:
                raise TermAboveWeight(f'Term with multi-index {exponents} has |alpha:l| = {degree} > 1')
            if degree == 1:
                kept[exponents] = coeff
        return Polynomial(self.dim, kept)


    def differentiate(self, var: int, times: int = 1) -> 'Polynomial':
        if not 1 <= var <= self.dim:
            raise IndexOutOfRange(f'Variable index {var} outside 1..{self.dim}')
        if self.is_zero:
            return self
        return self._wrap(self._poly.diff((generators(self.dim)[var - 1], times)))


    def partial(self, alpha: Sequence[int]) -> 'Polynomial':
        result = self
        for var, times in enumerate(alpha, start=1):
            if times:
                result = result.differentiate(var, times)
        return result


    def restrict_coordinates(self, keep: Iterable[int]) -> 'Polynomial':
        keep = sorted(set(keep))
        if not keep:
            raise EmptyKeepSet('At least one coordinate needs to be kept')
        for k in keep:
            if not 1 <= k <= self.dim:
                raise IndexOutOfRange(f'Coordinate {k} outside 1..{self.dim}')
        dropped = [k for k in range(1, self.dim + 1) if k not in keep]
        terms = {}
        for exponents, coeff in self.terms.items():
            if any(exponents[k - 1] for k in dropped):
                continue
            terms[tuple(exponents[k - 1] for k in keep)] = coeff
        return Polynomial(len(keep), terms)


    def embed(self, dim: int, coordinates: Sequence[int]) -> 'Polynomial':
        ''' Inverse of restrict_coordinates: variable k of self becomes variable coordinates[k] of a dim-dimensional polynomial '''
        if len(coordinates) != self.dim:
            raise DimensionMismatch(f'Need {self.dim} target coordinates, got {len(coordinates)}')
        terms = {}
        for exponents, coeff in self.terms.items():
            target = [0] * dim
            for k, e in zip(coordinates, exponents):
                target[k - 1] += e
            terms[tuple(target)] = coeff
        return Polynomial(dim, terms)


    def substitute_linear(self, frame: Sequence[Sequence[Scalar]]) -> 'Polynomial':
        ''' Restriction to the span of the frame vectors: xi = sum_k s_k frame[k], as a polynomial in s '''
        for vector in frame:
            if len(vector) != self.dim:
                raise DimensionMismatch(f'Frame vector {vector} does not have length {self.dim}')
        gens = generators(self.dim)
        new_gens = generators(len(frame))
        substitution = {
            gens[k]: sum((rational(vector[k]) * s for vector, s in zip(frame, new_gens)), sympy.Integer(0))
            for k in range(self.dim)
        }
        expr = self._poly.as_expr().xreplace(substitution)
        return Polynomial.from_poly(Poly(sympy.expand(expr), *new_gens, domain=QQ_I), len(frame))


    def conjugate(self) -> 'Polynomial':
        return Polynomial(self.dim, {e: c.new(c.x, -c.y) for e, c in self.terms.items()})


    def real_part(self) -> 'Polynomial':
        return Polynomial(self.dim, {e: gaussian(re_im(c)[0]) for e, c in self.terms.items()})


    def imag_part(self) -> 'Polynomial':
        return Polynomial(self.dim, {e: gaussian(re_im(c)[1]) for e, c in self.terms.items()})


    def rational_poly(self, gens: Optional[Sequence[sympy.Symbol]] = None) -> Poly:
        ''' The polynomial over QQ; only valid for real coefficients '''
        if not self.is_real:
            raise ValueError('Polynomial has non-real coefficients')
        gens = tuple(gens) if gens is not None else generators(self.dim)
        rep = {e: QQ.convert(rational(re_im(c)[0])) for e, c in self.terms.items()}
        if not rep:
            return Poly(0, *gens, domain=QQ)
        return Poly.from_dict(rep, *gens, domain=QQ)


    def evaluate(self, point: Sequence[Scalar]):
        if len(point) != self.dim:
            raise DimensionMismatch(f'Point of length {len(point)} for a polynomial in {self.dim} variables')
        values = [gaussian(x) for x in point]
        total = QQ_I.zero
        for exponents, coeff in self.terms.items():
            term = coeff
            for x, e in zip(values, exponents):
                if e:
                    term = term * x ** e
            total = total + term
        return total


    @cached_property
    def _numeric(self) -> Tuple[np.ndarray, np.ndarray]:
        exponents = np.array(list(self.terms), dtype=float).reshape(len(self.terms), self.dim)
        coeffs = np.array([to_complex(c) for c in self.terms.values()], dtype=complex)
        return exponents, coeffs


    def evaluate_numeric(self, points, chunk: int = 4096) -> np.ndarray:
        ''' Float evaluation on a single point or an array of points (one per row) '''
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        points = np.atleast_2d(points)
        if points.shape[1] != self.dim:
            raise DimensionMismatch(f'Points of dimension {points.shape[1]} for a polynomial in {self.dim} variables')
        exponents, coeffs = self._numeric
        values = np.zeros(len(points), dtype=complex)
        if len(coeffs):
            for start in range(0, len(points), chunk):
                block = points[start:start + chunk]
                monomials = np.prod(block[:, None, :] ** exponents[None, :, :], axis=2)
                values[start:start + chunk] = monomials @ coeffs
        return values[0] if single else values


    def chart(self, first: Scalar) -> 'Polynomial':
        ''' The one-variable polynomial t -> P(first, t) of a two-variable P '''
        if self.dim != 2:
            raise DimensionMismatch(f'Charts are taken of two-variable polynomials, got dimension {self.dim}')
        x = gaussian(first)
        terms = {}
        for (a, b), coeff in self.terms.items():
            terms[(b,)] = terms.get((b,), QQ_I.zero) + coeff * x ** a
        return Polynomial(1, terms)


    def univariate(self) -> Tuple[Poly, Poly]:
        ''' Real and imaginary parts of a one-variable polynomial as rational polynomials in t '''
        if self.dim != 1:
            raise DimensionMismatch(f'Expected a univariate polynomial, got dimension {self.dim}')
        return self.real_part().rational_poly((T,)), self.imag_part().rational_poly((T,))


def anisotropic_degree(exponents: Sequence[int], weights: Sequence[int]) -> Fraction:
    return sum((Fraction(a, l) for a, l in zip(exponents, weights)), Fraction(0))


def check_weights(weights: Sequence[int], dim: int):
    if len(weights) != dim:
        raise DimensionMismatch(f'Weight vector of length {len(weights)} for dimension {dim}')
    if any(int(w) != w or w < 1 for w in weights):
        raise ValueError(f'Weights need to be positive integers, got {tuple(weights)}')


def homogeneous_component(P: Polynomial, k: int) -> Polynomial:
    return P.homogeneous_component(k)


def l_principal_part(P: Polynomial, weights: Sequence[int]) -> Polynomial:
    return P.l_principal_part(weights)


def differentiate(P: Polynomial, var: int) -> Polynomial:
    return P.differentiate(var)


def restrict_coordinates(P: Polynomial, keep: Iterable[int]) -> Polynomial:
    return P.restrict_coordinates(keep)


def evaluate(P: Polynomial, point: Sequence[Scalar]):
    return P.evaluate(point)


@dataclass(frozen=True)
class OperatorSystem:
    ''' The symbols of a system of constant-coefficient operators, with an optional anisotropic weight vector '''
    dim: int
    operators: Tuple[Polynomial, ...]
    weights: Optional[Tuple[int, ...]] = None


    def __post_init__(self):
        object.__setattr__(self, 'operators', tuple(self.operators))
        if not self.operators:
            raise ValueError('An operator system needs at least one operator')
        for P in self.operators:
            if P.dim != self.dim:
                raise DimensionMismatch(f'Operator of dimension {P.dim} in a system of dimension {self.dim}')
        if self.weights is not None:
            object.__setattr__(self, 'weights', tuple(int(w) for w in self.weights))
            check_weights(self.weights, self.dim)
            for P in self.operators:
                if P.weighted_degree(self.weights) > 1:
                    raise WeightViolation(f'Operator has a term with |alpha:l| > 1 for l = {self.weights}')


    @classmethod
    def of(cls, *operators: Polynomial, weights: Optional[Sequence[int]] = None) -> 'OperatorSystem':
        return cls(operators[0].dim, operators, None if weights is None else tuple(weights))


    def __len__(self):
        return len(self.operators)


    def __iter__(self):
        return iter(self.operators)


    def __getitem__(self, index):
        return self.operators[index]


    @property
    def order(self) -> int:
        ''' Isotropic order: the maximal total degree '''
        return max(P.degree for P in self.operators)


    @property
    def is_isotropic(self) -> bool:
        return self.weights is None or len(set(self.weights)) == 1


    def weight_vector(self) -> Tuple[int, ...]:
        if self.weights is not None:
            return self.weights
        if self.order < 1:
            raise ValueError('A system of constants has no weight vector')
        return (self.order,) * self.dim


    def principal_parts(self, weights: Optional[Sequence[int]] = None) -> Tuple[Polynomial, ...]:
        if weights is None and self.weights is None:
            return tuple(P.homogeneous_component(self.order) for P in self.operators)
        weights = self.weight_vector() if weights is None else tuple(weights)
        try:
            return tuple(P.l_principal_part(weights) for P in self.operators)
        except TermAboveWeight as exc:
            raise WeightViolation(str(exc)) from exc


    def with_operators(self, operators: Iterable[Polynomial]) -> 'OperatorSystem':
        operators = tuple(operators)
        return OperatorSystem(operators[0].dim if operators else self.dim, operators, None)


    def restrict_coordinates(self, keep: Iterable[int]) -> 'OperatorSystem':
        keep = sorted(set(keep))
        return OperatorSystem(len(keep), tuple(P.restrict_coordinates(keep) for P in self.operators))


# Univariate real algebra over the rationals


def as_rational_univariate(p) -> Poly:
    if isinstance(p, Polynomial):
        re, im = p.univariate()
        if not im.is_zero:
            raise ValueError('Univariate polynomial has non-real coefficients')
        return re
    if isinstance(p, Poly):
        if len(p.gens) != 1:
            raise ValueError('Expected a univariate polynomial')
        return Poly(p.as_expr().xreplace({p.gen: T}), T, domain=QQ)
    return Poly(p, T, domain=QQ)


def fraction_coeffs(p: Poly) -> Tuple[Fraction, ...]:
    return tuple(to_fraction(c) for c in p.all_coeffs())


def horner(coeffs: Sequence[Fraction], x: Fraction) -> Fraction:
    value = Fraction(0)
    for c in coeffs:
        value = value * x + c
    return value


def sign(x) -> int:
    return (x > 0) - (x < 0)


@lru_cache(maxsize=1024)
def _sturm_chain(coeffs: Tuple[Fraction, ...]) -> Tuple[Tuple[Fraction, ...], ...]:
    p = Poly([rational(c) for c in coeffs], T, domain=QQ)
    return tuple(fraction_coeffs(s) for s in sympy.sturm(p))


def sign_variations(chain: Sequence[Sequence[Fraction]], x: Fraction) -> int:
    signs = [s for s in (sign(horner(c, x)) for c in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def cauchy_bound(p: Poly) -> Fraction:
    coeffs = fraction_coeffs(p)
    lead = abs(coeffs[0])
    return 1 + max((abs(c) / lead for c in coeffs[1:]), default=Fraction(0))


@dataclass(frozen=True)
class RootInterval:
    ''' Exactly one real root of the squarefree `poly` lies in (lo, hi]; lo == hi means the root is lo itself '''
    poly: Poly
    lo: Fraction
    hi: Fraction


    @property
    def chain(self):
        return _sturm_chain(fraction_coeffs(self.poly))


    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi


    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2


    def count(self, a: Fraction, b: Fraction) -> int:
        return sign_variations(self.chain, a) - sign_variations(self.chain, b)


    def refine(self, width) -> 'RootInterval':
        width = Fraction(width)
        if width <= 0:
            raise ValueError('Refinement width needs to be positive')
        coeffs = fraction_coeffs(self.poly)
        lo, hi = self.lo, self.hi
        while hi - lo > width:
            mid = (lo + hi) / 2
            if horner(coeffs, mid) == 0:
                return RootInterval(self.poly, mid, mid)
            if self.count(lo, mid) == 1:
                hi = mid
            else:
                lo = mid
        return RootInterval(self.poly, lo, hi)


    def __float__(self):
        return float(self.refine(Fraction(1, 2 ** 60)).midpoint)


def sturm_real_roots(p, interval: Optional[Tuple[Optional[Fraction], Optional[Fraction]]] = None) -> List[RootInterval]:
    ''' Isolating intervals of the distinct real roots of p in the closed interval, in increasing order '''
    p = as_rational_univariate(p)
    if p.is_zero:
        raise ZeroPolynomial('Cannot isolate the roots of the zero polynomial')
    q = p.sqf_part()
    if q.degree() < 1:
        return []
    bound = cauchy_bound(q)
    lo, hi = (None, None) if interval is None else interval
    lo = -bound if lo is None else Fraction(lo)
    hi = bound if hi is None else Fraction(hi)
    if lo > hi:
        raise ValueError(f'Empty interval ({lo}, {hi})')
    coeffs = fraction_coeffs(q)
    chain = _sturm_chain(coeffs)

    def count(a, b):
        return sign_variations(chain, a) - sign_variations(chain, b)

    roots = []
    if horner(coeffs, lo) == 0:
        roots.append(RootInterval(q, lo, lo))
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        c = count(a, b)
        if c == 0:
            continue
        if c == 1:
            roots.append(RootInterval(q, b, b) if horner(coeffs, b) == 0 else RootInterval(q, a, b))
            continue
        mid = (a + b) / 2
        stack.append((mid, b))
        stack.append((a, mid))
    return sorted(roots, key=lambda r: r.hi)


def count_real_roots(p, interval=None) -> int:
    return len(sturm_real_roots(p, interval))


def refine_root(root: RootInterval, width) -> RootInterval:
    return root.refine(width)


def sylvester_matrix(f: Sequence, g: Sequence) -> List[List]:
    ''' Sylvester matrix of coefficient lists (highest degree first) with declared degrees len(f)-1 and len(g)-1 '''
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    rows = []
    for k in range(n):
        rows.append([QQ_I.zero] * k + [gaussian(c) for c in f] + [QQ_I.zero] * (size - m - 1 - k))
    for k in range(m):
        rows.append([QQ_I.zero] * k + [gaussian(c) for c in g] + [QQ_I.zero] * (size - n - 1 - k))
    return rows


def determinant(rows: List[List]):
    if not rows:
        return QQ_I.one
    return DomainMatrix(rows, (len(rows), len(rows)), QQ_I).det()


def coefficient_list(p) -> List:
    ''' Gaussian coefficients of a univariate Polynomial, highest degree first '''
    if isinstance(p, Polynomial):
        if p.dim != 1:
            raise DimensionMismatch(f'Expected a univariate polynomial, got dimension {p.dim}')
        if p.is_zero:
            return []
        return [p.coefficient((k,)) for k in range(p.degree, -1, -1)]
    p = as_rational_univariate(p)
    return [] if p.is_zero else [gaussian(rational(c)) for c in p.all_coeffs()]


def resultant(p, q):
    f, g = coefficient_list(p), coefficient_list(q)
    if not f and not g:
        raise BothZero('The resultant is undefined when both polynomials vanish')
    if not f or not g:
        return QQ_I.zero
    return determinant(sylvester_matrix(f, g))


def squarefree_multiplicity(p) -> List[Tuple[Polynomial, int]]:
    if isinstance(p, Polynomial):
        if p.is_zero:
            raise ZeroPolynomial('The zero polynomial has no square-free decomposition')
        poly = p.univariate()[0] if p.is_real else Poly(p.poly.as_expr().xreplace({generators(1)[0]: T}), T, domain=QQ_I)
    else:
        poly = as_rational_univariate(p)
        if poly.is_zero:
            raise ZeroPolynomial('The zero polynomial has no square-free decomposition')
    _, factors = poly.sqf_list()
    return [(Polynomial.from_poly(f, 1), k) for f, k in factors if f.degree() > 0]


def rational_roots(p: Poly) -> List[Fraction]:
    p = as_rational_univariate(p)
    if p.is_zero:
        raise ZeroPolynomial('The zero polynomial has every number as a root')
    _, factors = p.factor_list()
    roots = []
    for f, _ in factors:
        if f.degree() == 1:
            a, b = fraction_coeffs(f)
            roots.append(-b / a)
    return sorted(roots)


def gcd_all(polys: Iterable[Poly]) -> Poly:
    ''' gcd over QQ of rational polynomials sharing generators, ignoring zeros; zero when all vanish '''
    result = None
    for p in polys:
        if p.is_zero:
            continue
        result = p if result is None else result.gcd(p)
    return result


# Exact linear algebra over the Gaussian rationals by splitting into real and imaginary parts


def real_split(rows: Sequence[Sequence]) -> Matrix:
    ''' [[Re A, -Im A], [Im A, Re A]] for a Gaussian matrix A '''
    parts = [[re_im(gaussian(c)) for c in row] for row in rows]
    top = [[rational(re) for re, _ in row] + [-rational(im) for _, im in row] for row in parts]
    bottom = [[rational(im) for _, im in row] + [rational(re) for re, _ in row] for row in parts]
    return Matrix(top + bottom)


def complex_rank(rows: Sequence[Sequence]) -> int:
    if not rows or not rows[0]:
        return 0
    return real_split(rows).rank() // 2


def complex_nullspace(rows: Sequence[Sequence]) -> List[List]:
    ''' Basis (possibly redundant over C) of {c : A c = 0} '''
    cols = len(rows[0])
    vectors = []
    for v in real_split(rows).nullspace():
        vectors.append([gaussian(v[k], v[cols + k]) for k in range(cols)])
    return vectors


def solve_complex(rows: Sequence[Sequence], rhs: Sequence):
    ''' Solve A x = b exactly. Returns (x, None) or (None, y) where y A = 0 and y b != 0. '''
    M = real_split(rows)
    b = real_split([[c] for c in rhs])[:, 0]
    try:
        solution, params = M.gauss_jordan_solve(b)
    except ValueError:
        for y in M.T.nullspace():
            if (y.T * b)[0] != 0:
                size = len(rows)
                certificate = [gaussian(y[k], -y[size + k]) for k in range(size)]
                return None, certificate
        raise
    solution = solution.xreplace({p: 0 for p in params})
    cols = len(rows[0])
    return [gaussian(solution[k], solution[cols + k]) for k in range(cols)], None


def multi_indices(dim: int, max_degree: int) -> List[MultiIndex]:
    return sorted((e for e in product(range(max_degree + 1), repeat=dim) if sum(e) <= max_degree), key=graded_lex_key)
