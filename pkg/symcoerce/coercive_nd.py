import logging
import warnings
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from . import coercive2d
from .coercive2d import WeakCoercivityVerdict2D, basis, decide_weak_coercive_2d
from .ellipticity import (
    NUMERICALLY_QUASI_ELLIPTIC,
    CompactnessVerdict,
    EllipticityVerdict,
    Exactness,
    is_elliptic,
    stacked_residuals,
    sum_of_squares,
    zero_set_compactness,
)
from .errors import AnisotropicNotSupported, IndexOutOfRange, NotAnSSystem, NotElliptic, PreconditionViolated
from .poly import OperatorSystem, Polynomial, complex_nullspace, complex_rank, gaussian
from .specifications import FrameSpec, ScanSpec, SearchSpec, sanitise_spec
from .subordination import Subordination, jacobian_rank_at, subordination_principal
from .util import candidate_directions, cluster_points, polish_on_sphere, sign_patterns, sphere_minima


log = logging.getLogger(__name__)

ELLIPTIC = 'Elliptic'
WEAKLY_COERCIVE = 'WeaklyCoercive'
NOT_WEAKLY_COERCIVE = 'NotWeaklyCoercive'
INCONCLUSIVE = 'Inconclusive'
UNSUPPORTED = 'Unsupported'

ALL_P = '[1, inf]'
P_INF = 'inf'

RULES = {
    'R0': 'order at most one',
    'R1': 'elliptic',
    'R2': 'two-variable normal form',
    'R3': 'de Leeuw-Mirkil',
    'R4': 'two-subspace independence',
    'R5': 'S-system',
    'R6': 'necessary conditions',
}

CITATIONS = {
    'R0': 'weak coercivity definition',
    'R1': 'ellipticity implies weak coercivity',
    'R2': 'two-variable normal form theorem',
    'R3': 'de Leeuw-Mirkil theorem',
    'R4': 'homogeneous N-system theorem',
    'R5': 'S-system theorem',
    'R6': 'properties of weakly coercive systems; restriction corollary; even-order theorem',
}


# Two-subspace independence


@dataclass(frozen=True)
class IndependenceVerdict:
    ''' Pass is evidence over the sampled frames only; Fail carries an exact dependency sum_j c_j P_j^l = 0 on span(frame) '''
    passed: bool
    trials: int
    frame: Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]] = None
    coefficients: Optional[Tuple] = None
    seed: Optional[int] = None


    @property
    def status(self) -> str:
        return 'PassProbabilistic' if self.passed else 'Fail'


def coordinate_frames(dim: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    frames = []
    for u, v in combinations(range(dim), 2):
        frames.append((tuple(int(k == u) for k in range(dim)), tuple(int(k == v) for k in range(dim))))
    return frames


def random_frames(dim: int, count: int, bound: int, seed: int) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    rng = np.random.default_rng(seed)
    frames = []
    while len(frames) < count:
        frame = rng.integers(-bound, bound + 1, size=(2, dim))
        if np.linalg.matrix_rank(frame) == 2:
            frames.append((tuple(int(x) for x in frame[0]), tuple(int(x) for x in frame[1])))
    return frames


def two_subspace_independence(S: OperatorSystem, frames: Optional[FrameSpec] = None) -> IndependenceVerdict:
    ''' Linear independence of the principal parts restricted to coordinate planes and to random rational planes '''
    frames = sanitise_spec(frames, FrameSpec)
    if not S.is_isotropic:
        raise AnisotropicNotSupported('Subspace independence is stated for isotropic systems')
    forms = S.principal_parts()
    l = S.order
    candidates = coordinate_frames(S.dim) if S.dim >= 2 else []
    if S.dim >= 2:
        candidates += random_frames(S.dim, frames['trials'], frames['entry_bound'], frames['seed'])
    for frame in tqdm(candidates, desc='Subspace frames', leave=None, disable=not frames['progress']):
        restricted = [P.substitute_linear(frame) for P in forms]
        rows = [[R.coefficient(e) for R in restricted] for e in basis(l)]
        if complex_rank(rows) < len(forms):
            coefficients = tuple(complex_nullspace(rows)[0])
            log.debug('Principal parts dependent on span%s', frame)
            return IndependenceVerdict(False, len(candidates), frame, coefficients, frames['seed'])
    return IndependenceVerdict(True, len(candidates), seed=frames['seed'])


# Coordinate restrictions


@dataclass(frozen=True)
class RestrictionOutcome:
    pair: Tuple[int, int]
    status: str
    verdict: Optional[WeakCoercivityVerdict2D] = None
    operator: Optional[Polynomial] = None


def normalised(P: Polynomial) -> Polynomial:
    return P.scale(gaussian(1) / P.leading_coefficient())


def restrict_pair(S: OperatorSystem, pair: Tuple[int, int], order: int) -> RestrictionOutcome:
    restricted = [P.restrict_coordinates(pair) for P in S.operators]
    distinct = []
    for P in restricted:
        if not P.is_zero and normalised(P) not in [normalised(Q) for Q in distinct]:
            distinct.append(P)
    if not distinct:
        verdict = WeakCoercivityVerdict2D(coercive2d.NOT_WEAKLY_COERCIVE, order, reason=coercive2d.ORDER_DROP)
        return RestrictionOutcome(pair, verdict.status, verdict)
    if len(distinct) > 1:
        return RestrictionOutcome(pair, UNSUPPORTED)
    P = distinct[0]
    verdict = decide_weak_coercive_2d(P, order)
    return RestrictionOutcome(pair, verdict.status, verdict, P)


def restriction_battery(S: OperatorSystem) -> Dict[Tuple[int, int], RestrictionOutcome]:
    ''' Weak coercivity of the restriction to every coordinate plane, decided exactly when one operator remains '''
    if S.dim < 2:
        return {}
    order = S.order
    return {pair: restrict_pair(S, pair, order) for pair in combinations(range(1, S.dim + 1), 2)}


# S-systems


def r_uv(dim: int, u: int, v: int) -> Polynomial:
    return (Polynomial.variable(dim, u) + gaussian(0, 1)) * (Polynomial.variable(dim, v) + gaussian(0, 1))


def s_pairs(dim: int) -> List[Tuple[int, int]]:
    return [(u, v) for u in range(2, dim + 1) for v in range(1, u)]


@dataclass(frozen=True)
class SSystem:
    ''' S_juv = P_j * (xi_u + i)(xi_v + i) over all j and u > v; `labels[k]` is (j, u, v) for operator k of `system` '''
    base: OperatorSystem
    system: OperatorSystem
    labels: Tuple[Tuple[int, int, int], ...]


    @property
    def pairs(self) -> List[Tuple[int, int]]:
        return s_pairs(self.system.dim)


def construct_s_system(P: OperatorSystem, search: Optional[SearchSpec] = None) -> OperatorSystem:
    ''' The non-elliptic, weakly coercive system {P_j R_uv} of order l + 2 built over an elliptic system P '''
    verdict = is_elliptic(P, search)
    if not verdict.is_elliptic:
        raise NotElliptic(f'The base system has a real principal zero at {verdict.witness.point}')
    if verdict.exactness == Exactness.NUMERIC:
        warnings.warn('Ellipticity of the base system is a numeric verdict')
    operators = [Pj * r_uv(P.dim, u, v) for Pj in P.operators for u, v in s_pairs(P.dim)]
    if not operators:
        raise PreconditionViolated('S-systems need at least two variables')
    return OperatorSystem(P.dim, tuple(operators))


def s_system_from(S: OperatorSystem) -> SSystem:
    ''' Recognise S as {P_j R_uv}: every operator a product of a base operator with R_uv, every pair present for every base operator '''
    pairs = s_pairs(S.dim)
    if not pairs or len(S) % len(pairs):
        raise NotAnSSystem(f'{len(S)} operators cannot cover the {len(pairs)} index pairs of dimension {S.dim}')
    first = r_uv(S.dim, *pairs[0])
    quotients = [P.exact_quotient(first) for P in S.operators]
    base = [Q for Q in quotients if Q is not None
            and all(any(R == Q * r_uv(S.dim, u, v) for R in S.operators) for u, v in pairs)]
    expected = Counter(Q * r_uv(S.dim, u, v) for Q in base for u, v in pairs)
    if not base or expected != Counter(S.operators):
        raise NotAnSSystem('The operators do not factor as P_j * (xi_u + i)(xi_v + i) over all pairs u > v')
    labels = []
    products = {(j, u, v): Q * r_uv(S.dim, u, v) for j, Q in enumerate(base, start=1) for u, v in pairs}
    used = set()
    for R in S.operators:
        label = next(k for k, value in products.items() if value == R and k not in used)
        used.add(label)
        labels.append(label)
    return SSystem(OperatorSystem(S.dim, tuple(base)), S, tuple(labels))


@dataclass(frozen=True)
class MinimalityVerdict:
    ''' Broken: the system without S_uv cannot estimate Q on the plane {u, v}; `subordination` is the exact certificate '''
    status: str
    drop: Optional[Tuple[int, int]] = None
    witness: Optional[Polynomial] = None
    subordination: Optional[Subordination] = None


def minimality_check(S: OperatorSystem, drop: Optional[Tuple[int, int]] = None) -> MinimalityVerdict:
    s_system = s_system_from(S)
    if len(s_system.base) != 1:
        raise PreconditionViolated('Minimality is checked for S-systems over a single operator')
    if drop is None:
        return MinimalityVerdict('Survives')
    u, v = max(drop), min(drop)
    if (u, v) not in s_system.pairs:
        raise IndexOutOfRange(f'No operator S_uv with (u, v) = ({u}, {v}) in dimension {S.dim}')
    remaining = [R for R, (_, a, b) in zip(S.operators, s_system.labels) if (a, b) != (u, v)]
    restricted = OperatorSystem(2, tuple(R.restrict_coordinates((v, u)) for R in remaining))
    weight = max(R.degree for R in restricted.operators)
    Q = Polynomial.monomial((weight, 0))
    outcome = subordination_principal(Q, restricted, (weight, weight))
    log.debug('Dropping S_%d%d: subordination of xi_%d^%d is %s', u, v, v, weight, outcome.status)
    if outcome.solvable:
        return MinimalityVerdict('Survives', (u, v), Q, outcome)
    return MinimalityVerdict('Broken', (u, v), Q, outcome)


# Necessary-condition battery


@dataclass(frozen=True)
class BatteryReport:
    compactness: Optional[CompactnessVerdict] = None
    jacobian: Tuple[Tuple[Tuple, int], ...] = ()
    restrictions: Tuple[RestrictionOutcome, ...] = ()
    clusters: int = 0
    finite_zeros: Optional[bool] = None


def principal_zero_clusters(forms: Sequence[Polynomial], search: SearchSpec) -> List[np.ndarray]:
    dim = forms[0].dim
    minima = sphere_minima(lambda pts: sum_of_squares(forms, pts), dim, search['samples'], search['starts'], search['seed'],
                           progress=search['progress'], desc='Principal zeros')
    residuals = stacked_residuals(forms)
    points = [polish_on_sphere(residuals, m.point) for m in minima if m.value < search['tolerance']]
    points = [p for p in points if sum_of_squares(forms, p[None, :])[0] < search['tolerance']]
    return cluster_points(points)


def tangent_rank(forms: Sequence[Polynomial], point: np.ndarray, tolerance: float = 1e-8) -> int:
    ''' Rank of the real Jacobian of the principal map along the sphere at a unit point '''
    rows = []
    for P in forms:
        gradient = np.array([P.differentiate(k).evaluate_numeric(point) for k in range(1, P.dim + 1)])
        rows.extend([gradient.real, gradient.imag])
    J = np.array(rows)
    projector = np.eye(len(point)) - np.outer(point, point)
    return int(np.linalg.matrix_rank(J @ projector, tol=tolerance))


def exact_principal_zeros(forms: Sequence[Polynomial], clusters: Sequence[np.ndarray], search: SearchSpec, known=()) -> List[Tuple]:
    candidates = list(known) + list(sign_patterns(forms[0].dim))
    for c in clusters:
        candidates.extend(candidate_directions(c, search['max_denominator']))
    zeros = []
    for point in candidates:
        if any(point) and all(not P.evaluate(point) for P in forms) and tuple(point) not in zeros:
            zeros.append(tuple(point))
    return zeros


# Classification


@dataclass(frozen=True)
class RuleOutcome:
    rule: str
    outcome: str
    detail: str = ''


@dataclass(frozen=True)
class WeakCoercivityVerdictND:
    status: str
    rule: Optional[str]
    p_range: str
    applied_rules: Tuple[RuleOutcome, ...]
    witness: Optional[object] = None
    ellipticity: Optional[EllipticityVerdict] = None
    battery: Optional[BatteryReport] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)
    seed: Optional[int] = None


    @property
    def is_weakly_coercive(self) -> bool:
        return self.status in (ELLIPTIC, WEAKLY_COERCIVE)


    @property
    def rule_name(self) -> str:
        return RULES.get(self.rule, '')


def classify_weak_coercivity(
    S: OperatorSystem,
    search: Optional[SearchSpec] = None,
    scan: Optional[ScanSpec] = None,
    frames: Optional[FrameSpec] = None,
) -> WeakCoercivityVerdictND:
    ''' Weak coercivity of an isotropic system from the first rule whose hypotheses hold '''
    search = sanitise_spec(search, SearchSpec)
    if not S.is_isotropic:
        raise AnisotropicNotSupported('Weak coercivity is classified for isotropic systems only')
    n, N, l = S.dim, len(S), S.order
    applied: List[RuleOutcome] = []

    def verdict(status, rule, p_range, witness=None, ellipticity=None, battery=None, notes=()):
        log.info('Rule %s (%s): %s', rule, RULES.get(rule, ''), status)
        return WeakCoercivityVerdictND(status, rule, p_range, tuple(applied), witness, ellipticity, battery, tuple(notes), search['seed'])

    if l <= 1:
        applied.append(RuleOutcome('R0', 'fired', f'order {l}'))
        return verdict(WEAKLY_COERCIVE, 'R0', ALL_P)
    applied.append(RuleOutcome('R0', 'skipped', f'order {l} >= 2'))

    elliptic = is_elliptic(S, search)
    if elliptic.is_elliptic:
        notes = ('numeric ellipticity verdict',) if elliptic.status == NUMERICALLY_QUASI_ELLIPTIC else ()
        applied.append(RuleOutcome('R1', 'fired', elliptic.certificate))
        return verdict(ELLIPTIC, 'R1', ALL_P, ellipticity=elliptic, notes=notes)
    applied.append(RuleOutcome('R1', 'skipped', f'principal zero at {elliptic.witness.point}'))

    if N == 1 and n == 2:
        decision = decide_weak_coercive_2d(S[0], l)
        applied.append(RuleOutcome('R2', 'fired', decision.status))
        status = {coercive2d.ELLIPTIC: ELLIPTIC, coercive2d.WEAKLY_COERCIVE: WEAKLY_COERCIVE}.get(decision.status, NOT_WEAKLY_COERCIVE)
        return verdict(status, 'R2', ALL_P, decision, elliptic, notes=decision.notes)
    applied.append(RuleOutcome('R2', 'skipped', 'needs a single operator in two variables'))

    if N == 1 and n >= 3:
        applied.append(RuleOutcome('R3', 'fired', 'single non-elliptic operator in three or more variables'))
        return verdict(NOT_WEAKLY_COERCIVE, 'R3', P_INF, elliptic.witness, elliptic)
    applied.append(RuleOutcome('R3', 'skipped', 'needs a single operator in three or more variables'))

    if n >= 2 * N + 1 and all(P.degree == l for P in S.operators):
        independence = two_subspace_independence(S, frames)
        if independence.passed:
            applied.append(RuleOutcome('R4', 'fired', f'independent on {independence.trials} sampled planes'))
            return verdict(NOT_WEAKLY_COERCIVE, 'R4', P_INF, elliptic.witness, elliptic,
                           notes=(f'subspace independence passed on {independence.trials} sampled planes (probabilistic)',))
        applied.append(RuleOutcome('R4', 'skipped', f'principal parts dependent on span{independence.frame}'))
    else:
        applied.append(RuleOutcome('R4', 'skipped', 'needs n >= 2N+1 and operators of equal order'))

    try:
        s_system = s_system_from(S)
    except NotAnSSystem as exc:
        applied.append(RuleOutcome('R5', 'skipped', str(exc)))
    else:
        base = is_elliptic(s_system.base, search)
        if base.is_elliptic:
            applied.append(RuleOutcome('R5', 'fired', f'S-system over {len(s_system.base)} elliptic operator(s)'))
            return verdict(WEAKLY_COERCIVE, 'R5', ALL_P, s_system, elliptic)
        applied.append(RuleOutcome('R5', 'skipped', 'S-system pattern over a non-elliptic base'))

    return _battery(S, search, scan, elliptic, applied, verdict)


def _battery(S, search, scan, elliptic, applied, verdict) -> WeakCoercivityVerdictND:
    n, N, l = S.dim, len(S), S.order
    forms = S.principal_parts()

    compactness = zero_set_compactness(S, scan)
    if not compactness.is_compact:
        applied.append(RuleOutcome('R6', 'fired', 'unbounded zero set'))
        return verdict(NOT_WEAKLY_COERCIVE, 'R6', ALL_P, compactness, elliptic, BatteryReport(compactness),
                       notes=('zero set compactness',) if compactness.exact else ('zero set compactness (numeric scan)',))

    clusters = principal_zero_clusters(forms, search) if n >= 3 else []
    known = [elliptic.witness.exact_point] if elliptic.witness is not None and elliptic.witness.exact_point is not None else []
    jacobian = []
    if n >= 2 * N + 1:
        for point in exact_principal_zeros(forms, clusters, search, known):
            rank = jacobian_rank_at(S, point)
            jacobian.append((point, rank))
            if rank == 2 * N:
                applied.append(RuleOutcome('R6', 'fired', f'Jacobian rank {rank} = 2N at {point}'))
                return verdict(NOT_WEAKLY_COERCIVE, 'R6', ALL_P, point, elliptic, BatteryReport(compactness, tuple(jacobian)),
                               notes=('full Jacobian rank at a principal zero',))

    restrictions = restriction_battery(S)
    for outcome in restrictions.values():
        if outcome.status == coercive2d.NOT_WEAKLY_COERCIVE:
            applied.append(RuleOutcome('R6', 'fired', f'restriction to coordinates {outcome.pair} is not weakly coercive'))
            report = BatteryReport(compactness, tuple(jacobian), tuple(restrictions.values()))
            return verdict(NOT_WEAKLY_COERCIVE, 'R6', P_INF, outcome, elliptic, report, notes=('coordinate restriction',))

    finite = None
    if l % 2 and n >= 2 * N + 1 and clusters:
        finite = all(tangent_rank(forms, c) == n - 1 for c in clusters)
        if finite:
            applied.append(RuleOutcome('R6', 'fired', f'odd order {l} with {len(clusters)} isolated principal zero(s)'))
            report = BatteryReport(compactness, tuple(jacobian), tuple(restrictions.values()), len(clusters), True)
            return verdict(NOT_WEAKLY_COERCIVE, 'R6', ALL_P, tuple(clusters[0]), elliptic, report,
                           notes=('even-order rule, finiteness of principal zeros judged numerically',))

    applied.append(RuleOutcome('R6', 'passed', 'no necessary condition failed'))
    report = BatteryReport(compactness, tuple(jacobian), tuple(restrictions.values()), len(clusters), finite)
    return verdict(INCONCLUSIVE, None, P_INF, None, elliptic, report,
                   notes=('no implemented theorem decides this system',))
