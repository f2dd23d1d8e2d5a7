import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy
from mpmath import iv
from scipy.optimize import brentq

from .errors import AnisotropicNotSupported, NotQuasiElliptic
from .poly import (
    OperatorSystem,
    Polynomial,
    anisotropic_degree,
    cauchy_bound,
    count_real_roots,
    gcd_all,
    generators,
    rational,
    rational_roots,
    re_im,
    sign,
    sturm_real_roots,
)
from .specifications import ScanSpec, SearchSpec, sanitise_spec
from .subordination import subordination_principal
from .util import (
    candidate_directions,
    canonical_sign,
    iv_polynomial,
    polish_on_sphere,
    sign_patterns,
    sphere_minima,
    sphere_points,
)


log = logging.getLogger(__name__)


QUASI_ELLIPTIC = 'QuasiElliptic'
NOT_QUASI_ELLIPTIC = 'NotQuasiElliptic'
NUMERICALLY_QUASI_ELLIPTIC = 'NumericallyQuasiElliptic'


class Exactness(str, Enum):
    EXACT = 'Exact'
    NUMERIC = 'Numeric'


def anisotropic_normalise(point: Sequence[float], weights: Sequence[int]) -> np.ndarray:
    ''' Move a point along its orbit xi_k -> s^(1/l_k) xi_k (s > 0) onto the unit sphere '''
    point = np.asarray(point, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if len(set(weights)) == 1:
        return point / np.linalg.norm(point)

    def excess(log_s):
        return np.sum(np.exp(2 * log_s / weights) * point ** 2) - 1

    lo, hi = -1.0, 1.0
    while excess(lo) > 0:
        lo *= 2
    while excess(hi) < 0:
        hi *= 2
    log_s = brentq(excess, lo, hi, xtol=1e-15)
    return np.exp(log_s / weights) * point


def sum_of_squares(forms: Sequence[Polynomial], points: np.ndarray) -> np.ndarray:
    return sum(np.abs(P.evaluate_numeric(points)) ** 2 for P in forms)


def stacked_residuals(forms: Sequence[Polynomial]):
    ''' Real and imaginary parts of all forms at one point, for least-squares polishing '''
    def residuals(point):
        values = [P.evaluate_numeric(point) for P in forms]
        return np.array([v.real for v in values] + [v.imag for v in values])
    return residuals


@dataclass(frozen=True)
class ZeroWitness:
    ''' A real zero of the principal parts on the unit sphere, with its exact rational ray when known '''
    point: Tuple[float, ...]
    residual: float
    certified: bool
    exact_point: Optional[Tuple[Fraction, ...]] = None
    log: Tuple[str, ...] = ()


    @classmethod
    def at(cls, forms: Sequence[Polynomial], point, weights: Sequence[int], certified: bool, exact_point=None, steps=()) -> 'ZeroWitness':
        unit = anisotropic_normalise(point, weights)
        if exact_point is not None:
            exact_point = tuple(Fraction(x) for x in exact_point)
        if len(set(weights)) == 1:
            flipped = canonical_sign(unit)
            if exact_point is not None and not np.array_equal(flipped, unit):
                exact_point = tuple(-x for x in exact_point)
            unit = flipped
        residual = float(sum_of_squares(forms, unit[None, :])[0])
        return cls(tuple(float(x) for x in unit), residual, certified, exact_point, tuple(steps))


@dataclass(frozen=True)
class EllipticityVerdict:
    status: str
    exactness: Exactness
    witness: Optional[ZeroWitness] = None
    minimum: Optional[float] = None
    samples: int = 0
    certificate: str = ''
    seed: Optional[int] = None


    @property
    def is_elliptic(self) -> bool:
        return self.status != NOT_QUASI_ELLIPTIC


def exact_zero(forms: Sequence[Polynomial], point: Sequence) -> bool:
    return all(not P.evaluate(point) for P in forms)


def not_elliptic(forms, weights, point, exact_point=None, certificate='', exactness=Exactness.EXACT, certified=True, steps=()):
    witness = ZeroWitness.at(forms, point, weights, certified, exact_point, steps)
    return EllipticityVerdict(NOT_QUASI_ELLIPTIC, exactness, witness, certificate=certificate)


def binary_common_zero(forms: Sequence[Polynomial], weights: Sequence[int]) -> EllipticityVerdict:
    ''' Exact two-variable test. Every real zero with xi1 != 0 lies on the orbit of a point (+-1, t), the others on (0, +-1). '''
    for first in (1, -1):
        parts = []
        for P in forms:
            parts.extend(P.chart(first).univariate())
        g = gcd_all(parts)
        if g is None:
            return not_elliptic(forms, weights, (first, 0), (first, 0), f'every chart point (xi1 = {first}) is a zero')
        if g.degree() < 1 or not sturm_real_roots(g):
            continue
        exact_roots = rational_roots(g)
        if exact_roots:
            t = exact_roots[0]
            return not_elliptic(forms, weights, (first, float(t)), (first, t), f'common rational root t = {t} of the chart xi1 = {first}')
        t = float(sturm_real_roots(g)[0])
        return not_elliptic(forms, weights, (first, t), None, f'common real root t ~ {t:.12g} of the chart xi1 = {first}')
    for second in (1, -1):
        if exact_zero(forms, (0, second)):
            return not_elliptic(forms, weights, (0, second), (0, second), 'the xi2 axis is a common zero')
    return EllipticityVerdict(QUASI_ELLIPTIC, Exactness.EXACT, certificate='no common real root on the charts or the xi2 axis')


def real_components(forms: Sequence[Polynomial]) -> List[Polynomial]:
    components = []
    for P in forms:
        components.extend(C for C in (P.real_part(), P.imag_part()) if not C.is_zero)
    return components


def elimination_certificate(forms: Sequence[Polynomial]) -> bool:
    ''' True when real and imaginary parts force every coordinate to vanish: a component that is a single pure power,
        or a sum of even pure powers of one sign, kills its variables; repeat until nothing changes. '''
    dim = forms[0].dim
    components = real_components(forms)
    forced = set()
    changed = True
    while changed:
        changed = False
        for C in components:
            live = {e: c for e, c in C.terms.items() if not any(e[k] for k in forced)}
            if not live or any(sum(1 for x in e if x) != 1 for e in live):
                continue
            signs = {sign(re_im(c)[0]) for c in live.values()}
            if len(live) == 1 or (len(signs) == 1 and all(sum(e) % 2 == 0 for e in live)):
                variables = {next(k for k, x in enumerate(e) if x) for e in live}
                if not variables <= forced:
                    forced |= variables
                    changed = True
    return len(forced) == dim


def krawczyk_certify(forms: Sequence[Polynomial], point: np.ndarray, radius: float = 1e-8) -> Optional[str]:
    ''' Interval Newton (Krawczyk) test for a zero of the square system {components, |xi|^2 - 1} near the point '''
    components = real_components(forms)
    dim = len(point)
    if len(components) + 1 != dim:
        return None
    terms = [[(e, re_im(c)[0]) for e, c in C.terms.items()] for C in components]
    gradients = [[[(e, re_im(c)[0]) for e, c in C.differentiate(k).terms.items()] for k in range(1, dim + 1)] for C in components]
    jacobian = np.array([[C.differentiate(k).evaluate_numeric(point).real for k in range(1, dim + 1)] for C in components] + [list(2 * point)])
    try:
        Y = np.linalg.inv(jacobian)
    except np.linalg.LinAlgError:
        return None
    x = [iv.mpf(float(v)) for v in point]
    X = [iv.mpf([float(v) - radius, float(v) + radius]) for v in point]
    Fx = [iv_polynomial(t, x) for t in terms] + [sum((v ** 2 for v in x), iv.mpf(0)) - 1]
    JX = [[iv_polynomial(g, X) for g in row] for row in gradients] + [[2 * v for v in X]]
    for i in range(dim):
        K = x[i] - sum((iv.mpf(float(Y[i, j])) * Fx[j] for j in range(dim)), iv.mpf(0))
        for j in range(dim):
            coeff = iv.mpf(float(i == j)) - sum((iv.mpf(float(Y[i, k])) * JX[k][j] for k in range(dim)), iv.mpf(0))
            K = K + coeff * (X[j] - x[j])
        if K not in X[i]:
            return None
    return f'Krawczyk box of radius {radius:g} around the polished point'


def sphere_common_zero(forms: Sequence[Polynomial], weights: Sequence[int], search: SearchSpec) -> EllipticityVerdict:
    dim = forms[0].dim
    if elimination_certificate(forms):
        return EllipticityVerdict(QUASI_ELLIPTIC, Exactness.EXACT, certificate='coordinate elimination')
    patterns = sign_patterns(dim)
    if patterns:
        values = sum_of_squares(forms, np.array(patterns, dtype=float))
        for p, value in zip(patterns, values):
            if value < 1e-9 and exact_zero(forms, p):
                return not_elliptic(forms, weights, p, p, f'exact zero at the integer point {p}')

    minima = sphere_minima(lambda pts: sum_of_squares(forms, pts), dim, search['samples'], search['starts'], search['seed'],
                           progress=search['progress'], desc='Ellipticity search')
    best = minima[0]
    log.debug('Smallest sphere value %.3e over %d starts', best.value, len(minima))
    if best.value >= search['tolerance']:
        return EllipticityVerdict(NUMERICALLY_QUASI_ELLIPTIC, Exactness.NUMERIC, minimum=best.value, samples=search['samples'],
                                  certificate='multi-start sphere minimum above tolerance', seed=search['seed'])

    point = polish_on_sphere(stacked_residuals(forms), best.point)
    steps = [f'sphere minimum {best.value:.3e}', f'polished residual {float(sum_of_squares(forms, point[None, :])[0]):.3e}']
    for guess in candidate_directions(point, search['max_denominator']):
        if exact_zero(forms, guess):
            return not_elliptic(forms, weights, [float(x) for x in guess], guess, f'rationalised zero {tuple(str(x) for x in guess)}',
                                steps=steps + ['exact rational check'])
    box = krawczyk_certify(forms, point)
    if box is not None:
        steps.append(box)
    return not_elliptic(forms, weights, point, None, 'numeric zero on the sphere', Exactness.NUMERIC, box is not None, steps)


def common_real_zero(forms: Sequence[Polynomial], weights: Sequence[int], search: Optional[SearchSpec] = None) -> EllipticityVerdict:
    ''' Decide whether the weighted homogeneous forms have a common real zero other than the origin '''
    search = sanitise_spec(search, SearchSpec)
    forms = tuple(forms)
    dim = forms[0].dim
    nonzero = [P for P in forms if not P.is_zero]
    axis = tuple(int(k == 0) for k in range(dim))
    if not nonzero:
        return not_elliptic(forms, weights, axis, axis, 'all principal parts vanish identically')
    if any(P.degree == 0 for P in nonzero):
        return EllipticityVerdict(QUASI_ELLIPTIC, Exactness.EXACT, certificate='a nonzero constant component')
    if dim == 1:
        return EllipticityVerdict(QUASI_ELLIPTIC, Exactness.EXACT, certificate='a nonzero form in one variable')
    if dim == 2:
        return binary_common_zero(nonzero, weights)
    return sphere_common_zero(nonzero, weights, search)


def is_quasielliptic(S: OperatorSystem, weights: Optional[Sequence[int]] = None, search: Optional[SearchSpec] = None) -> EllipticityVerdict:
    weights = S.weight_vector() if weights is None else tuple(weights)
    forms = S.principal_parts(weights)
    verdict = common_real_zero(forms, weights, search)
    log.debug('Quasiellipticity for l = %s: %s (%s)', weights, verdict.status, verdict.certificate)
    return verdict


def is_elliptic(S: OperatorSystem, search: Optional[SearchSpec] = None) -> EllipticityVerdict:
    if not S.is_isotropic:
        raise AnisotropicNotSupported('Ellipticity is the isotropic notion, use is_quasielliptic with weights')
    return is_quasielliptic(S, None, search)


def principal_type_check(S: OperatorSystem, search: Optional[SearchSpec] = None) -> EllipticityVerdict:
    ''' Common real zeros of the gradients of the principal parts '''
    if not S.is_isotropic:
        raise AnisotropicNotSupported('The gradient criterion is stated for isotropic systems')
    forms = S.principal_parts()
    gradient = [P.differentiate(k) for P in forms for k in range(1, S.dim + 1)]
    return common_real_zero(gradient, (max(S.order - 1, 1),) * S.dim, search)


@dataclass(frozen=True)
class TwoSidedEstimate:
    ''' Constants with C1 * sum_k |xi_k|^(2 l_k) <= sum_j |P_j^l(xi)|^2 <= C2 * sum_k |xi_k|^(2 l_k) '''
    lower: float
    upper: float
    exact: bool
    samples: int


def two_sided_estimate_constants(S: OperatorSystem, weights: Optional[Sequence[int]] = None, search: Optional[SearchSpec] = None) -> TwoSidedEstimate:
    search = sanitise_spec(search, SearchSpec)
    weights = S.weight_vector() if weights is None else tuple(weights)
    verdict = is_quasielliptic(S, weights, search)
    if not verdict.is_elliptic:
        raise NotQuasiElliptic(f'The system is not l-quasielliptic for l = {weights}: zero at {verdict.witness.point}')
    if verdict.exactness is Exactness.NUMERIC:
        warnings.warn('Two-sided constants rest on a numeric quasiellipticity verdict')
    forms = S.principal_parts(weights)
    dim = S.dim
    modulus = sum((P * P.conjugate() for P in forms), Polynomial(dim))
    reference = sum((Polynomial.monomial([2 * w if j == k else 0 for j in range(dim)]) for k, w in enumerate(weights)), Polynomial(dim))
    quotient = modulus.exact_quotient(reference)
    if quotient is not None and quotient.degree == 0:
        c = re_im(quotient.leading_coefficient())[0]
        return TwoSidedEstimate(c, c, True, 0)

    exponents = 2 * np.asarray(weights, dtype=float)

    def ratio(points):
        return sum_of_squares(forms, points) / np.sum(np.abs(points) ** exponents, axis=1)

    points = sphere_points(dim, search['samples'], search['seed'])
    patterns = sign_patterns(dim)
    if patterns:
        points = np.vstack([points, np.asarray(patterns, dtype=float)])
    values = ratio(points)
    starts = min(search['starts'], 16)
    low = sphere_minima(ratio, dim, search['samples'], starts, search['seed'], desc='Lower constant')[0].value
    high = -sphere_minima(lambda p: -ratio(p), dim, search['samples'], starts, search['seed'], desc='Upper constant')[0].value
    return TwoSidedEstimate(float(min(values.min(), low)), float(max(values.max(), high)), False, len(points))


@dataclass(frozen=True)
class CompactnessVerdict:
    status: str
    exact: bool
    radius: Optional[float] = None
    minima: Tuple[float, ...] = ()
    radii: Tuple[float, ...] = ()
    witnesses: Tuple[Tuple[float, ...], ...] = ()
    seed: Optional[int] = None


    @property
    def is_compact(self) -> bool:
        return self.status != 'Unbounded'


def _escape_points(G: sympy.Poly, x: sympy.Symbol, y: sympy.Symbol, count: int) -> Optional[List[Tuple[float, float]]]:
    ''' Points (x_k, y_k) with |x_k| -> infinity on the real curve G = 0, or None when the curve stays bounded in x '''
    coeffs = [sympy.Poly(c, x, domain='QQ') for c in sympy.Poly(G.as_expr(), y).all_coeffs()]
    content = gcd_all(coeffs)
    H = sympy.Poly(sympy.cancel(G.as_expr() / content.as_expr()), x, y, domain='QQ')
    if H.degree(y) < 1:
        return None
    Hy = H.diff(y)
    lead = sympy.Poly(sympy.Poly(H.as_expr(), y).LC(), x, domain='QQ')
    discriminant = lead * sympy.Poly(sympy.resultant(H.as_expr(), Hy.as_expr(), y), x, domain='QQ')
    c = cauchy_bound(discriminant) + 1 if discriminant.degree() > 0 else Fraction(1)
    for s in (1, -1):
        fibre = sympy.Poly(H.as_expr().subs(x, rational(s * c)), y, domain='QQ')
        if fibre.degree() < 1 or not count_real_roots(fibre):
            continue
        points = []
        for k in range(count):
            xk = s * c * 2 ** k
            roots = sturm_real_roots(sympy.Poly(H.as_expr().subs(x, rational(xk)), y, domain='QQ'))
            points.append((float(xk), float(roots[0])))
        return points
    return None


def _vertical_lines(G: sympy.Poly, x: sympy.Symbol, y: sympy.Symbol, count: int) -> Optional[List[Tuple[float, float]]]:
    ''' Real roots of the content of G in y give whole lines x = x0 inside the curve '''
    coeffs = [sympy.Poly(c, x, domain='QQ') for c in sympy.Poly(G.as_expr(), y).all_coeffs()]
    content = gcd_all(coeffs)
    if content.degree() < 1:
        return None
    roots = sturm_real_roots(content)
    if not roots:
        return None
    x0 = float(roots[0])
    return [(x0, float(2 ** k)) for k in range(count)]


def binary_compactness(S: OperatorSystem, count: int) -> CompactnessVerdict:
    x, y = generators(2)
    parts = []
    for P in S.operators:
        parts.extend(C.rational_poly() for C in (P.real_part(), P.imag_part()))
    G = gcd_all(parts)
    if G is None:
        return CompactnessVerdict('Unbounded', True, witnesses=tuple((float(2 ** k), 0.0) for k in range(count)))
    if G.total_degree() < 1:
        return CompactnessVerdict('Compact', True)
    G = G.sqf_part()
    swap = {x: y, y: x}
    for flip in (True, False):
        H = sympy.Poly(G.as_expr().xreplace(swap), x, y, domain='QQ') if flip else G
        for finder in (_vertical_lines, _escape_points):
            points = finder(H, x, y, count)
            if points is not None:
                if flip:
                    points = [(b, a) for a, b in points]
                return CompactnessVerdict('Unbounded', True, witnesses=tuple(points))
    return CompactnessVerdict('Compact', True)


def zero_set_compactness(S: OperatorSystem, scan: Optional[ScanSpec] = None) -> CompactnessVerdict:
    ''' Is the real zero set of the full symbols {P_j} bounded? Exact in one and two variables, a radius scan above. '''
    scan = sanitise_spec(scan, ScanSpec)
    if S.dim == 1:
        if all(P.is_zero for P in S.operators):
            return CompactnessVerdict('Unbounded', True, witnesses=tuple((float(2 ** k),) for k in range(scan['witnesses'])))
        return CompactnessVerdict('Compact', True)
    if S.dim == 2:
        return binary_compactness(S, scan['witnesses'])

    forms = S.operators
    degree = max(P.degree for P in forms)
    residuals = stacked_residuals(forms)
    radii = tuple(scan['radii'])
    minima, near = [], []
    for r in radii:
        best = sphere_minima(lambda pts: sum_of_squares(forms, pts), S.dim, scan['samples'], scan['starts'], scan['seed'],
                             radius=r, progress=scan['progress'], desc=f'Radius {r:g}')[0]
        value, point = best.value, best.point
        threshold = scan['tolerance'] * (1 + r) ** (2 * degree)
        if value < threshold:
            point = polish_on_sphere(residuals, point, r)
            value = min(value, float(sum_of_squares(forms, (r * point)[None, :])[0]))
        log.debug('Radius %g: minimum %.3e (threshold %.3e)', r, value, threshold)
        minima.append(value)
        near.append(tuple(float(v) for v in r * point) if value < threshold else None)
    count = scan['witnesses']
    tail = near[-count:]
    if len(near) >= count and all(w is not None for w in tail):
        return CompactnessVerdict('Unbounded', False, minima=tuple(minima), radii=radii, witnesses=tuple(tail), seed=scan['seed'])
    clear = len(near)
    while clear > 0 and near[clear - 1] is None:
        clear -= 1
    radius = radii[min(clear, len(radii) - 1)]
    return CompactnessVerdict('CompactNumeric', False, radius, tuple(minima), radii, seed=scan['seed'])


def zero_free_radius(S: OperatorSystem, search: Optional[SearchSpec] = None) -> Fraction:
    ''' A radius r1 >= 1 with no real zero of the full symbols on |xi| >= r1, for an elliptic system.
        Uses c = min over the sphere of |P^l| and |P - P^l| <= A |xi|^(l-1) on |xi| >= 1. '''
    search = sanitise_spec(search, SearchSpec)
    forms = S.principal_parts()
    minimum = sphere_minima(lambda pts: sum_of_squares(forms, pts), S.dim, search['samples'], search['starts'], search['seed'])[0].value
    if minimum < search['tolerance']:
        raise NotQuasiElliptic('The principal parts have a common real zero, no zero-free radius exists')
    c = np.sqrt(minimum)
    lower = 0.0
    for P, Pl in zip(S.operators, forms):
        lower = max(lower, sum(abs(complex(*map(float, re_im(v)))) for v in (P - Pl).terms.values()))
    radius = max(1.0, 2 * np.sqrt(len(forms)) * lower / c)
    return Fraction(int(np.ceil(radius)))


@dataclass(frozen=True)
class CoercivityVerdict:
    ''' L^p coercivity in W^l_p(R^n): p in (1, inf) via quasiellipticity, p = inf via principal subordination of every top monomial '''
    weights: Tuple[int, ...]
    interior: bool
    interior_exactness: Exactness
    infinity: bool
    obstructions: Tuple[Tuple[int, ...], ...]
    p_one: str = 'not covered'


def top_monomials(weights: Sequence[int]) -> List[Tuple[int, ...]]:
    return [e for e in product(*(range(w + 1) for w in weights)) if anisotropic_degree(e, weights) == 1]


def coercivity_verdict(S: OperatorSystem, weights: Optional[Sequence[int]] = None, search: Optional[SearchSpec] = None) -> CoercivityVerdict:
    weights = S.weight_vector() if weights is None else tuple(weights)
    verdict = is_quasielliptic(S, weights, search)
    obstructions = []
    for e in top_monomials(weights):
        if not subordination_principal(Polynomial.monomial(e), S, weights).solvable:
            obstructions.append(e)
    return CoercivityVerdict(weights, verdict.is_elliptic, verdict.exactness, not obstructions, tuple(obstructions))