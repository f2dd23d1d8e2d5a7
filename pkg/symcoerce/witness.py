import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb, factorial
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from mpmath import iv
from sympy import Poly
from sympy.polys.domains import QQ
from tqdm import tqdm

from .errors import AlphaTooHigh, AnisotropicNotSupported, DimensionMismatch, DirectionNotAZero, OrderExceedsTable
from .poly import MultiIndex, OperatorSystem, Polynomial, multi_indices, re_im, to_fraction
from .specifications import ScheduleSpec, sanitise_spec
from .util import (
    candidate_directions,
    integer_direction,
    iv_abs_upper,
    iv_fraction,
    iv_lower,
    iv_modulus,
    iv_polynomial,
    iv_precision,
    iv_upper,
    log_slope,
    write_csv,
)


log = logging.getLogger(__name__)

IV_BITS = 96
TAIL_RATIO = 1e-6
X = sympy.Symbol('x')


# The reference bump phi(x) = exp(-1/(1 - x^2)) on (-1, 1) and psi = prod phi(x_k)


@lru_cache(maxsize=None)
def bump_numerator(m: int) -> Poly:
    ''' N_m with phi^(m) = N_m * (1 - x^2)^(-2m) * phi '''
    if m == 0:
        return Poly(1, X, domain=QQ)
    previous = bump_numerator(m - 1)
    u = Poly(1 - X ** 2, X, domain=QQ)
    x = Poly(X, X, domain=QQ)
    return u ** 2 * previous.diff(X) + (x * u * (4 * (m - 1)) - x * 2) * previous


def numerator_terms(m: int) -> List[Tuple[Tuple[int], Fraction]]:
    return [((e,), to_fraction(c)) for (e,), c in bump_numerator(m).terms()]


def derivative_at_zero(m: int) -> Fraction:
    ''' phi^(m)(0) / phi(0) '''
    return to_fraction(bump_numerator(m).eval(0))


def _sampled_sup(m: int) -> float:
    x = np.linspace(0, 1, 4001)[:-1]
    u = 1 - x ** 2
    coeffs = [float(c) for c in bump_numerator(m).all_coeffs()]
    return float(np.max(np.abs(np.polyval(coeffs, x)) * u ** (-2 * m) * np.exp(-1 / u)))


@lru_cache(maxsize=None)
def derivative_sup(m: int, pieces: int) -> float:
    ''' Certified upper bound of sup |phi^(m)| over (-1, 1). Interval evaluation on `pieces` subintervals of [0, x0];
        beyond x0, where u = 1 - x^2 < u0 <= 1/(2m + 2), |phi^(m)| <= sum|c| * u0^(-2m) * exp(-1/u0). '''
    terms = numerator_terms(m)
    total = sum(abs(c) for _, c in terms)
    estimate = _sampled_sup(m)
    with iv_precision(IV_BITS):
        u0 = Fraction(1, 2 * m + 2)

        def tail(u):
            w = iv_fraction(u)
            return iv_upper(iv_fraction(total) * iv.exp(-1 / w) * (1 / w) ** (2 * m))

        while tail(u0) > TAIL_RATIO * estimate:
            u0 /= 2
        x0 = iv_upper(iv.sqrt(1 - iv_fraction(u0)))
        edges = [x0 * k / pieces for k in range(pieces)] + [x0]
        inner = 0.0
        for a, b in zip(edges, edges[1:]):
            box = iv.mpf([a, b])
            w = 1 - box ** 2
            value = iv_polynomial(terms, [box]) * (1 / w) ** (2 * m) * iv.exp(-1 / w)
            inner = max(inner, iv_abs_upper(value))
        bound = max(inner, tail(u0))
    log.debug('sup |phi^(%d)| <= %.6g (sampled %.6g, u0 = %s)', m, bound, estimate, u0)
    return bound


@dataclass(frozen=True)
class BumpProfile:
    ''' Certified sup-norm bounds of the derivatives of psi(x) = prod exp(-1/(1 - x_k^2)) up to a maximal order per coordinate '''
    dim: int
    max_order: int
    pieces: int = 400


    def __post_init__(self):
        if self.dim < 1 or self.max_order < 0 or self.pieces < 1:
            raise ValueError(f'Invalid bump profile: dim={self.dim}, max_order={self.max_order}, pieces={self.pieces}')
        for m in range(self.max_order + 1):
            at_zero = abs(float(derivative_at_zero(m))) * np.exp(-1)
            if self.axis_bound(m) < at_zero:
                raise ValueError(f'Bound {self.axis_bound(m)} of order {m} below the value {at_zero} at the origin')


    def axis_bound(self, m: int) -> float:
        return derivative_sup(m, self.pieces)


    @property
    def psi0(self) -> float:
        return float(np.exp(-self.dim))


    def bound(self, alpha: Sequence[int]) -> float:
        if len(alpha) != self.dim:
            raise DimensionMismatch(f'Multi-index {tuple(alpha)} for a bump in {self.dim} variables')
        if any(a > self.max_order for a in alpha):
            raise OrderExceedsTable(f'Derivative {tuple(alpha)} beyond the tabulated order {self.max_order}')
        with iv_precision(IV_BITS):
            value = iv.mpf(1)
            for a in alpha:
                value = value * iv.mpf(self.axis_bound(a))
            return iv_upper(value)


    def table(self) -> Dict[MultiIndex, float]:
        return {alpha: self.bound(alpha) for alpha in multi_indices(self.dim, self.max_order)}


def as_interval(x):
    if isinstance(x, (int, Fraction)):
        return iv_fraction(Fraction(x))
    if isinstance(x, float):
        return iv.mpf(x)
    return x


def iv_modulus_of(P: Polynomial, box: Sequence):
    re_terms = [(e, re_im(c)[0]) for e, c in P.terms.items()]
    im_terms = [(e, re_im(c)[1]) for e, c in P.terms.items()]
    return iv_modulus(iv_polynomial(re_terms, box), iv_polynomial(im_terms, box))


def leibniz_upper_bound(P: Polynomial, profile: BumpProfile, xi: Sequence, r) -> float:
    ''' Upper bound of sup |P(D)(psi(x/r) e^{i<x, xi>})|: sum over alpha of |P^(alpha)(xi)| / alpha! * r^-|alpha| * bound(alpha).
        `xi` and `r` may be rationals, floats or mpmath intervals. '''
    if P.dim != profile.dim:
        raise DimensionMismatch(f'Operator in {P.dim} variables against a bump in {profile.dim}')
    if P.degree > profile.max_order:
        raise OrderExceedsTable(f'Operator of degree {P.degree} beyond the tabulated order {profile.max_order}')
    if len(xi) != P.dim:
        raise DimensionMismatch(f'Frequency of length {len(xi)} for an operator in {P.dim} variables')
    if P.is_zero:
        return 0.0
    with iv_precision(IV_BITS):
        box = [as_interval(x) for x in xi]
        inverse = 1 / as_interval(r)
        total = iv.mpf(0)
        for alpha in multi_indices(P.dim, P.degree):
            derivative = P.partial(alpha)
            if derivative.is_zero:
                continue
            weight = iv.mpf(profile.bound(alpha)) * inverse ** sum(alpha)
            for a in alpha:
                weight = weight / factorial(a)
            total = total + iv_modulus_of(derivative, box) * weight
        return iv_upper(total)


def derivative_at_origin(alpha: Sequence[int], xi: Sequence, r):
    ''' |d^alpha (psi(x/r) e^{i<x, xi>})| at x = 0 as an interval; odd derivatives of psi vanish there '''
    e = iv.exp(-len(alpha))
    inverse = 1 / r
    re, im = iv.mpf(0), iv.mpf(0)
    for beta in product(*(range(a + 1) for a in alpha)):
        gamma = [a - b for a, b in zip(alpha, beta)]
        coeff = Fraction(1)
        for a, b, g in zip(alpha, beta, gamma):
            coeff *= comb(a, b) * derivative_at_zero(g)
        if not coeff:
            continue
        value = iv_fraction(coeff) * e * inverse ** sum(gamma)
        for x, b in zip(xi, beta):
            if b:
                value = value * x ** b
        quarter = sum(beta) % 4
        if quarter == 0:
            re = re + value
        elif quarter == 1:
            im = im + value
        elif quarter == 2:
            re = re - value
        else:
            im = im - value
    return iv_modulus(re, im)


# Schedules


@dataclass(frozen=True)
class RatioEvidence:
    ''' Certified bounds along xi = t * direction / |direction| with bump scale r = t^coupling:
        `lower` bounds sup |D^alpha f| from below, `upper` bounds sum_j sup |P_j(D) f| + sup |f| from above '''
    alpha: MultiIndex
    direction: Tuple[int, ...]
    schedule: Tuple[Tuple[float, float], ...]
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    ratios: Tuple[float, ...]
    exponent: float
    threshold: float
    window: int


    @property
    def falsified(self) -> bool:
        return bool(np.isfinite(self.exponent) and self.exponent > self.threshold)


    @property
    def status(self) -> str:
        return 'Falsified' if self.falsified else 'NoGrowth'


    def rows(self) -> List[Tuple[float, float, float, float]]:
        return [(t, lo, up, q) for (_, t), lo, up, q in zip(self.schedule, self.lower, self.upper, self.ratios)]


def write_evidence_csv(evidence: RatioEvidence, path: Union[str, Path]):
    write_csv(path, ['t', 'lower', 'upper', 'ratio'], evidence.rows())


def exact_zero_direction(forms: Sequence[Polynomial], direction: Sequence) -> Optional[Tuple[int, ...]]:
    ''' Primitive integer vector on the ray of `direction` when it is an exact common zero of the forms '''
    if all(isinstance(x, (int, Fraction)) for x in direction):
        candidates = [tuple(Fraction(x) for x in direction)]
    else:
        candidates = candidate_directions([float(x) for x in direction], 10 ** 6)
    for candidate in candidates:
        if not any(candidate):
            continue
        d = integer_direction(candidate)
        if all(not P.evaluate(d) for P in forms):
            return d
    return None


def _scale(k: int, coupling: Fraction):
    exponent = k * coupling
    if exponent.denominator == 1:
        return iv.mpf(2) ** int(exponent)
    return iv.exp(iv_fraction(exponent) * iv.log(2))


def falsify_weak_coercivity(
    S: OperatorSystem,
    alpha: Sequence[int],
    direction: Sequence,
    schedule: Optional[ScheduleSpec] = None,
) -> RatioEvidence:
    ''' Modulated bumps f = psi(x/r) e^{i<x, xi>} along a real principal zero: growth of |D^alpha f| against
        sum_j |P_j(D) f| + |f| means the estimate with D^alpha on the left fails '''
    schedule = sanitise_spec(schedule, ScheduleSpec)
    if not S.is_isotropic:
        raise AnisotropicNotSupported('The bump witness is implemented for isotropic systems')
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != S.dim or len(direction) != S.dim:
        raise DimensionMismatch(f'alpha and the direction need {S.dim} entries')
    if any(a < 0 for a in alpha):
        raise ValueError(f'{alpha} is not a multi-index')
    l = S.order
    if sum(alpha) > l - 1:
        raise AlphaTooHigh(f'|alpha| = {sum(alpha)} exceeds l - 1 = {l - 1}')
    d = exact_zero_direction(S.principal_parts(), direction)
    if d is None:
        raise DirectionNotAZero(f'{tuple(direction)} is not a common real zero of the principal parts')
    profile = BumpProfile(S.dim, max(l, sum(alpha)), schedule['pieces'])
    coupling = schedule['coupling']
    points, lower, upper = [], [], []
    for k in tqdm(range(1, schedule['steps'] + 1), desc='Witness schedule', leave=None, disable=not schedule['progress']):
        with iv_precision(IV_BITS):
            t = iv.mpf(2) ** k
            r = _scale(k, coupling)
            norm = iv.sqrt(sum((iv.mpf(x) ** 2 for x in d), iv.mpf(0)))
            xi = [t * x / norm for x in d]
            low = max(0.0, iv_lower(derivative_at_origin(alpha, xi, r)))
            total = iv.mpf(profile.bound((0,) * S.dim))
            for P in S.operators:
                total = total + iv.mpf(leibniz_upper_bound(P, profile, xi, r))
            up = iv_upper(total)
        points.append((2.0 ** float(k * coupling), 2.0 ** k))
        lower.append(low)
        upper.append(up)
    ratios = [lo / up for lo, up in zip(lower, upper)]
    window = min(schedule['window'], len(ratios))
    ts = [t for _, t in points]
    exponent = log_slope(ts[-window:], ratios[-window:])
    log.debug('Growth exponent %.3f for alpha=%s along %s', exponent, alpha, d)
    return RatioEvidence(alpha, d, tuple(points), tuple(lower), tuple(upper), tuple(ratios), exponent, schedule['threshold'], window)


def falsify_top_monomials(S: OperatorSystem, direction: Sequence, schedule: Optional[ScheduleSpec] = None) -> List[RatioEvidence]:
    ''' Evidence for every alpha with |alpha| = l - 1, strongest growth first '''
    l = S.order
    if l < 1:
        raise AlphaTooHigh('Order zero systems have no alpha with |alpha| = l - 1')
    evidence = [falsify_weak_coercivity(S, alpha, direction, schedule)
                for alpha in multi_indices(S.dim, l - 1) if sum(alpha) == l - 1]
    return sorted(evidence, key=lambda e: -e.exponent if np.isfinite(e.exponent) else np.inf)
