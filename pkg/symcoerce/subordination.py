import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix

from .errors import TermAboveWeight, WeightViolation, ZeroPoint
from .poly import MultiIndex, OperatorSystem, Polynomial, gaussian, gcd_all, rational, rational_roots, re_im, solve_complex
from .specifications import FalsifySpec, SearchSpec, sanitise_spec
from .util import candidate_directions, integer_direction, sign_patterns, sphere_minima


log = logging.getLogger(__name__)


def jacobian_rank_at(S: OperatorSystem, point: Sequence, weights: Optional[Sequence[int]] = None) -> int:
    ''' Exact rank of the real 2N x n Jacobian of (Re P_j^l, Im P_j^l) at a rational point '''
    point = tuple(Fraction(x) for x in point)
    if len(point) != S.dim:
        raise ValueError(f'Point of length {len(point)} for a system in {S.dim} variables')
    if not any(point):
        raise ZeroPoint('The Jacobian rank is taken at a nonzero point')
    rows = []
    for P in S.principal_parts(weights):
        gradient = [re_im(P.differentiate(k).evaluate(point)) for k in range(1, S.dim + 1)]
        rows.append([rational(re) for re, _ in gradient])
        rows.append([rational(im) for _, im in gradient])
    return Matrix(rows).rank()


@dataclass(frozen=True)
class Subordination:
    ''' Outcome of solving Q^l = sum_j lambda_j P_j^l. On failure `functional` maps monomials to weights w with
        sum_m w_m * coeff_m(P_j^l) = 0 for every j while `pairing` = sum_m w_m * coeff_m(Q^l) is nonzero. '''
    solvable: bool
    coefficients: Optional[Tuple] = None
    functional: Optional[Dict[MultiIndex, object]] = None
    pairing: Optional[object] = None


    @property
    def status(self) -> str:
        return 'Coefficients' if self.solvable else 'NoSolution'


def subordination_principal(Q: Polynomial, S: OperatorSystem, weights: Optional[Sequence[int]] = None) -> Subordination:
    weights = S.weight_vector() if weights is None else tuple(weights)
    principal = S.principal_parts(weights)
    try:
        target = Q.l_principal_part(weights)
    except TermAboveWeight as exc:
        raise WeightViolation(str(exc)) from exc
    monomials = sorted({e for P in (target,) + principal for e in P.terms})
    if not monomials:
        return Subordination(True, tuple(gaussian(0) for _ in principal))
    rows = [[P.coefficient(m) for P in principal] for m in monomials]
    rhs = [target.coefficient(m) for m in monomials]
    solution, certificate = solve_complex(rows, rhs)
    if solution is not None:
        return Subordination(True, tuple(solution))
    functional = {m: w for m, w in zip(monomials, certificate) if w}
    pairing = sum((w * b for w, b in zip(certificate, rhs)), gaussian(0))
    log.debug('No principal subordination: functional %s pairs to %s', functional, pairing)
    return Subordination(False, functional=functional, pairing=pairing)


@dataclass(frozen=True)
class InequalityVerdict:
    ''' Search for a ray t*d along which |Q| grows faster than sum_j |P_j| + 1 '''
    falsified: bool
    direction: Optional[Tuple[int, ...]]
    q_growth: Optional[int]
    p_growth: Optional[int]
    tried: int
    seed: int


    @property
    def status(self) -> str:
        return 'Falsified' if self.falsified else 'NotFalsified'


    @property
    def unit_direction(self) -> Optional[Tuple[float, ...]]:
        if self.direction is None:
            return None
        d = np.asarray(self.direction, dtype=float)
        return tuple(d / np.linalg.norm(d))


def ray_degree(P: Polynomial, direction: Sequence[int]) -> int:
    return P.substitute_linear([direction]).degree


def is_zero_direction(forms: Sequence[Polynomial], direction: Sequence[int]) -> bool:
    return all(not P.evaluate(direction) for P in forms)


def binary_zero_directions(forms: Sequence[Polynomial]) -> List[Tuple[int, ...]]:
    ''' Integer directions from rational common roots of the two-variable charts '''
    directions = []
    for first in (1, -1):
        parts = []
        for P in forms:
            parts.extend(P.chart(first).univariate())
        g = gcd_all(parts)
        if g is None or g.degree() < 1:
            continue
        for t in rational_roots(g):
            directions.append(integer_direction((Fraction(first), t)))
    return directions


def candidate_rays(forms: Sequence[Polynomial], budget: FalsifySpec, search: SearchSpec) -> List[Tuple[int, ...]]:
    dim = forms[0].dim
    rays = []
    if dim == 2:
        rays.extend(binary_zero_directions(forms))
    rays.extend(sign_patterns(dim))
    for u, v in combinations(range(dim), 2):
        for s in (1, -1):
            d = [0] * dim
            d[u], d[v] = 1, s
            rays.append(tuple(d))

    def objective(points):
        return sum(np.abs(P.evaluate_numeric(points)) ** 2 for P in forms)

    if dim >= 3:
        for m in sphere_minima(objective, dim, search['samples'], search['starts'], search['seed'], progress=search['progress'], desc='Zero rays'):
            if m.value < search['tolerance']:
                for guess in candidate_directions(m.point, search['max_denominator']):
                    rays.append(integer_direction(guess))
    rng = np.random.default_rng(budget['seed'])
    bound = budget['entry_bound']
    for _ in range(budget['random_directions']):
        d = tuple(int(x) for x in rng.integers(-bound, bound + 1, size=dim))
        if any(d):
            rays.append(d)
    unique = []
    for d in rays:
        d = integer_direction([Fraction(x) for x in d])
        first = next(x for x in d if x)
        d = d if first > 0 else tuple(-x for x in d)
        if d not in unique:
            unique.append(d)
    zero = [d for d in unique if is_zero_direction(forms, d)]
    return zero + [d for d in unique if d not in zero]


def alg_inequality_falsify(
    Q: Polynomial,
    S: OperatorSystem,
    budget: Optional[FalsifySpec] = None,
    search: Optional[SearchSpec] = None,
) -> InequalityVerdict:
    ''' Look for a ray along which |Q(xi)| <= C(sum_j |P_j(xi)| + 1) fails, comparing exact growth degrees in t '''
    budget = sanitise_spec(budget, FalsifySpec)
    search = sanitise_spec(search, SearchSpec)
    forms = S.principal_parts()
    rays = candidate_rays(forms, budget, search)
    for d in rays:
        q = ray_degree(Q, d)
        p = max(ray_degree(P, d) for P in S.operators)
        if q > max(0, p):
            log.debug('Inequality fails along %s: degree %d against %d', d, q, p)
            return InequalityVerdict(True, d, q, p, len(rays), budget['seed'])
    return InequalityVerdict(False, None, None, None, len(rays), budget['seed'])
