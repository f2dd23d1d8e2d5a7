import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from sympy.polys.domains import QQ_I
from tqdm import tqdm

from .coercive_nd import SSystem
from .ellipticity import zero_free_radius
from .errors import DenominatorVanishes, DimensionMismatch, InvalidDelta, NotQuasiElliptic, PreconditionViolated
from .parser import format_operator
from .poly import MultiIndex, OperatorSystem, Polynomial, gaussian, re_im
from .specifications import GridSpec, SearchSpec, sanitise_spec
from .util import sphere_points, write_csv


log = logging.getLogger(__name__)

PASS = 'PassHeuristic'
FAIL = 'FailWitness'

Factor = Tuple[Polynomial, int]


def merge_factors(factors: Sequence[Factor]) -> Tuple[Factor, ...]:
    merged: Dict[Polynomial, int] = {}
    for f, m in factors:
        if m < 0:
            raise ValueError(f'Denominator powers are non-negative, got {m}')
        if m:
            merged[f] = merged.get(f, 0) + m
    return tuple(merged.items())


def positive_away_from_origin(f: Polynomial) -> bool:
    ''' Real with positive coefficients on even monomials only, plus a positive constant or a pure power of every variable '''
    if not f.is_real:
        return False
    coeffs = {e: re_im(c)[0] for e, c in f.terms.items()}
    if any(c <= 0 or any(x % 2 for x in e) for e, c in coeffs.items()):
        return False
    if (0,) * f.dim in coeffs:
        return True
    return all(any(e[k] and sum(e) == e[k] for e in coeffs) for k in range(f.dim))


def imaginary_offset(f: Polynomial) -> bool:
    ''' Real non-constant part and a non-real constant: Im f is a nonzero constant '''
    constant = f.coefficient((0,) * f.dim)
    return bool(re_im(constant)[1]) and all(not c.y for e, c in f.terms.items() if any(e))


@lru_cache(maxsize=256)
def vanishing_point(f: Polynomial, cutoff: Fraction, count: int = 1024, doublings: int = 12) -> Optional[Tuple[float, ...]]:
    ''' A sampled near-zero of f on |xi| >= cutoff, None when f is exactly or numerically zero-free there '''
    if f.is_zero:
        return (0.0,) * f.dim
    if f.degree == 0 or positive_away_from_origin(f) or imaginary_offset(f):
        return None
    directions = sphere_points(f.dim, count, 0)
    for k in range(doublings + 1):
        r = float(cutoff) * 2.0 ** k
        values = np.abs(f.evaluate_numeric(r * directions)) / max(r, 1.0) ** f.degree
        i = int(np.argmin(values))
        if values[i] < 1e-12:
            return tuple(float(x) for x in r * directions[i])
    return None


@dataclass(frozen=True)
class RationalSymbol:
    ''' numerator / prod f^m over a factored denominator, meaningful on |xi| >= cutoff only (the cutoff function
        equals one there and zero near the origin) '''
    numerator: Polynomial
    factors: Tuple[Factor, ...] = ()
    cutoff: Fraction = Fraction(1)


    def __post_init__(self):
        object.__setattr__(self, 'factors', merge_factors(self.factors))
        object.__setattr__(self, 'cutoff', Fraction(self.cutoff))
        if self.cutoff <= 0:
            raise ValueError(f'The cutoff radius needs to be positive, got {self.cutoff}')
        for f, _ in self.factors:
            if f.dim != self.numerator.dim:
                raise DimensionMismatch(f'Denominator factor of dimension {f.dim} over a numerator of dimension {self.numerator.dim}')
            point = vanishing_point(f, self.cutoff)
            if point is not None:
                raise DenominatorVanishes(f'{format_operator(f)} vanishes near {point} outside the cutoff radius {self.cutoff}')


    @classmethod
    def of(cls, numerator: Polynomial, *denominators: Polynomial, cutoff: Union[int, Fraction] = 1) -> 'RationalSymbol':
        return cls(numerator, tuple((f, 1) for f in denominators), cutoff)


    @property
    def dim(self) -> int:
        return self.numerator.dim


    @property
    def is_zero(self) -> bool:
        return self.numerator.is_zero


    @property
    def denominator(self) -> Polynomial:
        result = Polynomial.constant(self.dim)
        for f, m in self.factors:
            result = result * f ** m
        return result


    def variables(self) -> Tuple[int, ...]:
        found = set(self.numerator.variables())
        for f, _ in self.factors:
            found.update(f.variables())
        return tuple(sorted(found))


    def scale(self, c) -> 'RationalSymbol':
        return RationalSymbol(self.numerator.scale(c), self.factors, self.cutoff)


    def __mul__(self, other: 'RationalSymbol') -> 'RationalSymbol':
        if not isinstance(other, RationalSymbol):
            return self.scale(other)
        if other.dim != self.dim:
            raise DimensionMismatch(f'Cannot multiply symbols of dimension {self.dim} and {other.dim}')
        return RationalSymbol(self.numerator * other.numerator, self.factors + other.factors, max(self.cutoff, other.cutoff))


    def evaluate(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        values = self.numerator.evaluate_numeric(points)
        with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
            for f, m in self.factors:
                values = values / f.evaluate_numeric(points) ** m
        return values


    def active(self) -> Tuple[Tuple[int, ...], 'RationalSymbol']:
        ''' The coordinates the symbol depends on and the symbol written in them alone '''
        keep = self.variables() or (1,)
        if len(keep) == self.dim:
            return keep, self
        factors = tuple((f.restrict_coordinates(keep), m) for f, m in self.factors)
        return keep, RationalSymbol(self.numerator.restrict_coordinates(keep), factors, self.cutoff)


    def describe(self) -> str:
        if not self.factors:
            return format_operator(self.numerator)
        denominator = ' * '.join(f'({format_operator(f)})' + (f'^{m}' if m > 1 else '') for f, m in self.factors)
        return f'({format_operator(self.numerator)}) / ({denominator})'


def cancel(numerator: Polynomial, factors: Sequence[Factor]) -> Tuple[Polynomial, List[Factor]]:
    ''' Divide common denominator factors out of the numerator '''
    if numerator.is_zero:
        return numerator, []
    reduced = []
    for f, m in factors:
        while m and f.degree > 0:
            quotient = numerator.exact_quotient(f)
            if quotient is None:
                break
            numerator, m = quotient, m - 1
        if m:
            reduced.append((f, m))
    return numerator, reduced


def _quotient_rule(numerator: Polynomial, factors: Sequence[Factor], var: int) -> Tuple[Polynomial, List[Factor]]:
    dependent = [k for k, (f, _) in enumerate(factors) if var in f.variables()]
    leading = numerator.differentiate(var)
    for k in dependent:
        leading = leading * factors[k][0]
    correction = Polynomial.constant(numerator.dim, 0)
    for k in dependent:
        f, m = factors[k]
        term = f.differentiate(var).scale(m)
        for i in dependent:
            if i != k:
                term = term * factors[i][0]
        correction = correction + term
    numerator = leading - numerator * correction
    factors = [(f, m + 1) if k in dependent else (f, m) for k, (f, m) in enumerate(factors)]
    return cancel(numerator, factors)


def symbolic_partial(phi: RationalSymbol, alpha: Sequence[int]) -> RationalSymbol:
    ''' The mixed partial derivative d^alpha phi (plain partials, no factors of -i) as a reduced rational symbol '''
    if len(alpha) != phi.dim:
        raise DimensionMismatch(f'Multi-index {tuple(alpha)} for a symbol in {phi.dim} variables')
    numerator, factors = phi.numerator, list(phi.factors)
    for var, times in enumerate(alpha, start=1):
        for _ in range(times):
            numerator, factors = _quotient_rule(numerator, factors, var)
    return RationalSymbol(numerator, tuple(factors), phi.cutoff)


# Grid estimation


def axis_values(exponents: Tuple[int, int]) -> np.ndarray:
    lo, hi = exponents
    powers = 2.0 ** np.arange(lo, hi + 1)
    return np.concatenate([[0.0], powers, -powers])


def evaluation_grid(dim: int, grid: GridSpec) -> np.ndarray:
    ''' Crossed axis samples {0, +-2^k} (a seeded subset when too many) plus sphere points on every radius shell,
        deduplicated in lexicographic order '''
    values = axis_values(grid['exponents'])
    if len(values) ** dim <= grid['max_cross']:
        crossed = np.array(list(product(values, repeat=dim)))
    else:
        rng = np.random.default_rng(grid['seed'])
        crossed = values[rng.integers(0, len(values), size=(grid['max_cross'], dim))]
    shells = [r * sphere_points(dim, grid['shell_points'], grid['seed'] + k) for k, r in enumerate(grid['radii'])]
    return np.unique(np.concatenate([crossed] + shells), axis=0)


def outside_cutoff(dim: int, cutoff: Fraction, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    points = evaluation_grid(dim, grid)
    norms = np.linalg.norm(points, axis=1)
    keep = norms >= float(cutoff)
    return points[keep], norms[keep]


def condition_weight(points: np.ndarray, alpha: Sequence[int], delta: Fraction) -> np.ndarray:
    ''' prod_{alpha_j = 1} |xi_j|^(1-delta) (1 + |xi_j|^(2 delta)) * prod_{alpha_j = 0} (1 + |xi_j|)^delta '''
    d = float(delta)
    a = np.abs(points)
    weight = np.ones(len(points))
    for j, aj in enumerate(alpha):
        if aj:
            weight = weight * a[:, j] ** (1 - d) * (1 + a[:, j] ** (2 * d))
        else:
            weight = weight * (1 + a[:, j]) ** d
    return weight


@dataclass(frozen=True)
class ConditionSup:
    ''' Largest sampled value of one condition, where it was found, and the sups over the nested balls |xi| <= R '''
    condition: str
    index: MultiIndex
    value: float
    point: Tuple[float, ...]
    growth: Tuple[float, ...]


    @property
    def label(self) -> str:
        return f'{self.condition}{self.index}'


def sup_condition(condition: str, index: Sequence[int], points: np.ndarray, norms: np.ndarray, values: np.ndarray, radii) -> ConditionSup:
    values = np.where(np.isfinite(values), values, np.inf)
    if not len(values):
        return ConditionSup(condition, tuple(index), 0.0, (), tuple(0.0 for _ in radii))
    k = int(np.argmax(values))
    growth = tuple(float(np.max(values[norms <= r * (1 + 1e-12)], initial=0.0)) for r in radii)
    return ConditionSup(condition, tuple(index), float(values[k]), tuple(float(x) for x in points[k]), growth)


def keeps_growing(growth: Sequence[float], tolerance: float) -> bool:
    ''' Non-finite sups, or sups over the last nested radii that increase by more than the tolerance at every step '''
    if not all(np.isfinite(growth)):
        return True
    steps = min(3, len(growth) - 1)
    tail = growth[-(steps + 1):]
    return all(b > a * (1 + tolerance) for a, b in zip(tail, tail[1:]))


@dataclass(frozen=True)
class CertReport:
    ''' Grid evidence for a multiplier condition. PassHeuristic means every sampled sup plateaus across the nested
        radii; the sup over a grid never proves boundedness, hence the label. For ratio reports `a_delta` is the
        estimate of the constant C and `delta` is None. '''
    delta: Optional[Fraction]
    a_delta: float
    conditions: Tuple[ConditionSup, ...]
    radii: Tuple[float, ...]
    radii_growth: Tuple[float, ...]
    verdict: str
    witness: Optional[ConditionSup] = None
    label: str = 'heuristic'
    seed: Optional[int] = None
    samples: int = 0
    coordinates: Tuple[int, ...] = ()
    trace: Tuple = field(default=(), repr=False, compare=False)


    @property
    def passed(self) -> bool:
        return self.verdict == PASS


    def rows(self) -> Iterator[Tuple]:
        ''' (xi..., condition, value) triples; empty unless the check was run with record=True '''
        if not self.trace:
            return
        points, records = self.trace
        for label, values in records:
            for p, v in zip(points, values):
                yield (*(float(x) for x in p), label, float(v))


def write_report_csv(report: CertReport, path: Union[str, Path]):
    if not report.trace:
        raise ValueError('The report carries no samples; run the check with record=True')
    dim = report.trace[0].shape[1]
    write_csv(path, [f'xi{k}' for k in range(1, dim + 1)] + ['condition', 'value'], report.rows())


def _report(delta, conditions, radii, tolerance, seed, samples, coordinates, trace) -> CertReport:
    radii = tuple(radii)
    growth = tuple(max(c.growth[k] for c in conditions) for k in range(len(radii)))
    failing = [c for c in conditions if not np.isfinite(c.value) or keeps_growing(c.growth, tolerance)]
    witness = max(failing, key=lambda c: c.value) if failing else None
    verdict = FAIL if failing else PASS
    a_delta = max(c.value for c in conditions) if conditions else 0.0
    if witness is not None:
        log.debug('Condition %s keeps growing: %s', witness.label, witness.growth)
    return CertReport(delta, a_delta, tuple(conditions), radii, growth, verdict, witness, seed=seed, samples=samples,
                      coordinates=tuple(coordinates), trace=trace)


def check_mikhlin_like(
    phi: RationalSymbol,
    delta: Union[Fraction, float, str],
    grid: Optional[GridSpec] = None,
    reduce_variables: bool = False,
    record: bool = False,
) -> CertReport:
    ''' Sampled sups of prod (1+|xi_j|)^delta |phi| and of the weighted mixed derivatives d^alpha phi, alpha in {0,1}^n.
        With `reduce_variables` the symbol is checked in the coordinates it depends on. '''
    grid = sanitise_spec(grid, GridSpec)
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise InvalidDelta(f'delta needs to lie in (0, 1), got {delta}')
    coordinates = tuple(range(1, phi.dim + 1))
    if reduce_variables:
        coordinates, phi = phi.active()
    points, norms = outside_cutoff(phi.dim, phi.cutoff, grid)
    conditions = []
    records = []
    for alpha in tqdm(list(product((0, 1), repeat=phi.dim)), desc='Multiplier conditions', leave=None, disable=not grid['progress']):
        derivative = symbolic_partial(phi, alpha)
        with np.errstate(invalid='ignore', over='ignore'):
            values = np.abs(derivative.evaluate(points)) * condition_weight(points, alpha, delta)
        condition = 'derivative' if any(alpha) else 'decay'
        conditions.append(sup_condition(condition, alpha, points, norms, values, grid['radii']))
        if record:
            records.append((conditions[-1].label, values))
    trace = (points, tuple(records)) if record else ()
    return _report(delta, conditions, grid['radii'], grid['plateau_tolerance'], grid['seed'], len(points), coordinates, trace)


def check_p_ratio(P: Polynomial, grid: Optional[GridSpec] = None, cutoff: Union[int, Fraction] = 1, record: bool = False) -> CertReport:
    ''' Sampled sups of prod (1+|xi_j|)^gamma_j |d^gamma P| / |P| for every nonzero gamma in {0,1}^n.
        Zeros of P on the grid give infinite ratios and hence a FailWitness. '''
    if P.is_zero:
        raise DenominatorVanishes('The zero polynomial vanishes everywhere')
    grid = sanitise_spec(grid, GridSpec)
    points, norms = outside_cutoff(P.dim, Fraction(cutoff), grid)
    modulus = np.abs(P.evaluate_numeric(points))
    conditions = []
    records = []
    for gamma in product((0, 1), repeat=P.dim):
        if not any(gamma):
            continue
        scale = np.prod((1 + np.abs(points)) ** np.asarray(gamma, dtype=float), axis=1)
        with np.errstate(divide='ignore', invalid='ignore'):
            values = scale * np.abs(P.partial(gamma).evaluate_numeric(points)) / modulus
        conditions.append(sup_condition('ratio', gamma, points, norms, values, grid['radii']))
        if record:
            records.append((conditions[-1].label, values))
    trace = (points, tuple(records)) if record else ()
    coordinates = tuple(range(1, P.dim + 1))
    return _report(None, conditions, grid['radii'], grid['plateau_tolerance'], grid['seed'], len(points), coordinates, trace)


# Symbol families of the S-system construction


def _base_system(S: Union[OperatorSystem, SSystem]) -> OperatorSystem:
    return S.base if isinstance(S, SSystem) else S


def gram(P: OperatorSystem) -> Polynomial:
    ''' G = sum_q |P_q|^2 as a real polynomial '''
    result = Polynomial.constant(P.dim, 0)
    for Q in P.operators:
        result = result + Q * Q.conjugate()
    return result


def shell_sum(dim: int) -> Polynomial:
    ''' sum_{s >= 2} (xi_s^2 + 1) '''
    result = Polynomial.constant(dim, 0)
    for s in range(2, dim + 1):
        result = result + Polynomial.variable(dim, s) ** 2 + 1
    return result


def symbol_cutoff(P: OperatorSystem, search: Optional[SearchSpec] = None) -> Fraction:
    try:
        return zero_free_radius(P, search)
    except NotQuasiElliptic as exc:
        raise PreconditionViolated('Symbol families are built over an elliptic system') from exc


def _check_family(P: OperatorSystem, alpha: Sequence[int], j: int, v: int):
    if not P.is_isotropic:
        raise PreconditionViolated('Symbol families are built over isotropic systems')
    if len(alpha) != P.dim or any(a < 0 for a in alpha):
        raise PreconditionViolated(f'{tuple(alpha)} is not a multi-index in {P.dim} variables')
    if sum(alpha) > P.order + 1:
        raise PreconditionViolated(f'|alpha| = {sum(alpha)} exceeds l + 1 = {P.order + 1}')
    if not 1 <= j <= len(P):
        raise PreconditionViolated(f'Operator index {j} outside 1..{len(P)}')
    if not 2 <= v <= P.dim:
        raise PreconditionViolated(f'Second index {v} outside 2..{P.dim}')


def phi_family(
    S: Union[OperatorSystem, SSystem],
    alpha: Sequence[int],
    j: int,
    v: int,
    search: Optional[SearchSpec] = None,
    cutoff: Optional[Fraction] = None,
) -> RationalSymbol:
    ''' xi^alpha (xi_v - i) conj(P_j) / ((xi_1 + i) G sum_{s>=2}(xi_s^2 + 1)) over the elliptic base system P '''
    P = _base_system(S)
    _check_family(P, alpha, j, v)
    n = P.dim
    numerator = Polynomial.monomial(alpha) * (Polynomial.variable(n, v) - gaussian(0, 1)) * P.operators[j - 1].conjugate()
    denominators = (Polynomial.variable(n, 1) + gaussian(0, 1), gram(P), shell_sum(n))
    return RationalSymbol.of(numerator, *denominators, cutoff=symbol_cutoff(P, search) if cutoff is None else cutoff)


def phi_gamma(S: Union[OperatorSystem, SSystem], gamma: Sequence[int], search: Optional[SearchSpec] = None,
              cutoff: Optional[Fraction] = None) -> RationalSymbol:
    ''' xi^gamma / (G sum_{s>=2}(xi_s^2 + 1)) '''
    P = _base_system(S)
    if len(gamma) != P.dim:
        raise PreconditionViolated(f'{tuple(gamma)} is not a multi-index in {P.dim} variables')
    cutoff = symbol_cutoff(P, search) if cutoff is None else cutoff
    return RationalSymbol.of(Polynomial.monomial(gamma), gram(P), shell_sum(P.dim), cutoff=cutoff)


@dataclass(frozen=True)
class PhiDecomposition:
    ''' phi = closed_form * (reduced + sum of pieces): closed_form = xi_1 / (xi_1 + i) is the transform of a measure,
        `reduced` does not depend on xi_1, and every piece is c * xi^gamma / (G sum) with gamma_1 < 2l '''
    phi: RationalSymbol
    closed_form: RationalSymbol
    reduced: Optional[RationalSymbol]
    pieces: Tuple[Tuple[MultiIndex, RationalSymbol], ...]


    def evaluate(self, points) -> np.ndarray:
        total = sum((symbol.evaluate(points) for _, symbol in self.pieces), np.zeros(len(np.atleast_2d(points)), dtype=complex))
        if self.reduced is not None:
            total = total + self.reduced.evaluate(points)
        return self.closed_form.evaluate(points) * total


def phi_factors(
    S: Union[OperatorSystem, SSystem],
    alpha: Sequence[int],
    j: int,
    v: int,
    search: Optional[SearchSpec] = None,
) -> PhiDecomposition:
    P = _base_system(S)
    _check_family(P, alpha, j, v)
    if alpha[0] < 1:
        raise PreconditionViolated('The decomposition splits off one power of xi_1 and needs alpha_1 >= 1')
    n, l = P.dim, P.order
    cutoff = symbol_cutoff(P, search)
    phi = phi_family(P, alpha, j, v, cutoff=cutoff)
    G = gram(P)
    top = (2 * l,) + (0,) * (n - 1)
    g0 = G.coefficient(top)
    if not g0:
        raise PreconditionViolated('The base system vanishes along the xi_1 axis')
    remainder = G - Polynomial.monomial(top, g0)
    lowered = list(alpha)
    lowered[0] -= 1
    numerator = Polynomial.monomial(lowered) * (Polynomial.variable(n, v) - gaussian(0, 1)) * P.operators[j - 1].conjugate()
    reduced = Polynomial.constant(n, 0)
    rest = Polynomial.constant(n, 0)
    for gamma, c in numerator.terms.items():
        if gamma[0] == 2 * l:
            tail = Polynomial.monomial((0,) + gamma[1:], c * (QQ_I.one / g0))
            reduced = reduced + tail
            rest = rest - tail * remainder
        else:
            rest = rest + Polynomial.monomial(gamma, c)
    sigma = shell_sum(n)
    closed_form = RationalSymbol.of(Polynomial.variable(n, 1), Polynomial.variable(n, 1) + gaussian(0, 1), cutoff=cutoff)
    pieces = tuple((gamma, RationalSymbol.of(Polynomial.monomial(gamma, c), G, sigma, cutoff=cutoff)) for gamma, c in rest.terms.items())
    reduced_symbol = None if reduced.is_zero else RationalSymbol.of(reduced, sigma, cutoff=cutoff)
    log.debug('Split phi into %d pieces%s', len(pieces), '' if reduced_symbol is None else ' and a xi_1-free part')
    return PhiDecomposition(phi, closed_form, reduced_symbol, pieces)


@dataclass(frozen=True)
class PhiCertificate:
    decomposition: PhiDecomposition
    reduced: Optional[CertReport]
    pieces: Tuple[Tuple[MultiIndex, CertReport], ...]


    @property
    def passed(self) -> bool:
        reports = [r for _, r in self.pieces] + ([self.reduced] if self.reduced is not None else [])
        return all(r.passed for r in reports)


    @property
    def verdict(self) -> str:
        return PASS if self.passed else FAIL


def certify_phi(
    S: Union[OperatorSystem, SSystem],
    alpha: Sequence[int],
    j: int,
    v: int,
    delta: Union[Fraction, float, str],
    grid: Optional[GridSpec] = None,
    search: Optional[SearchSpec] = None,
) -> PhiCertificate:
    ''' Grid-check every piece of the decomposition; the closed-form factor is a known multiplier and is not sampled '''
    decomposition = phi_factors(S, alpha, j, v, search)
    reduced = None
    if decomposition.reduced is not None:
        reduced = check_mikhlin_like(decomposition.reduced, delta, grid, reduce_variables=True)
    pieces = tuple((gamma, check_mikhlin_like(symbol, delta, grid)) for gamma, symbol in decomposition.pieces)
    return PhiCertificate(decomposition, reduced, pieces)
