import csv
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd
from pathlib import Path
from typing import Callable, Iterable, List, Sequence, Tuple, Union

import numpy as np
from mpmath import iv
from scipy.optimize import least_squares, minimize
from scipy.stats import norm, qmc
from tqdm import tqdm


def normalise_rows(points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    norms[norms == 0] = 1
    return points / norms


def canonical_sign(point: np.ndarray, tolerance: float = 1e-12) -> np.ndarray:
    ''' Flip the point so that its first non-negligible coordinate is positive '''
    point = np.asarray(point, dtype=float)
    for x in point:
        if abs(x) > tolerance:
            return point if x > 0 else -point
    return point


def sphere_points(dim: int, count: int, seed: int) -> np.ndarray:
    ''' Low-discrepancy points on the unit sphere: scrambled Sobol points pushed through the normal quantile '''
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    cube = sampler.random_base2(int(np.ceil(np.log2(max(count, 2)))))[:count]
    gauss = norm.ppf(np.clip(cube, 1e-12, 1 - 1e-12))
    return normalise_rows(gauss)


def sign_patterns(dim: int, limit: int = 6) -> List[Tuple[int, ...]]:
    ''' Nonzero {-1, 0, 1} integer vectors up to sign (first nonzero entry positive), sparsest first.
        Empty above `limit` dimensions. '''
    if dim > limit:
        return []
    patterns = []
    for p in product((-1, 0, 1), repeat=dim):
        nonzero = [x for x in p if x]
        if nonzero and nonzero[0] > 0:
            patterns.append(p)
    return sorted(patterns, key=lambda p: (sum(map(abs, p)), tuple(-x for x in p)))


@dataclass(frozen=True)
class SphereMinimum:
    point: np.ndarray
    value: float


def sphere_minima(
    objective: Callable[[np.ndarray], np.ndarray],
    dim: int,
    samples: int,
    starts: int,
    seed: int,
    radius: float = 1.0,
    progress: bool = False,
    desc: str = 'Sphere search',
) -> List[SphereMinimum]:
    ''' Multi-start minimisation of a batched objective on the sphere of the given radius.
        The best sampled points seed local BFGS runs on y -> objective(radius * y / |y|). '''
    points = sphere_points(dim, samples, seed)
    values = objective(radius * points)
    order = np.argsort(values, kind='stable')[:starts]

    def on_sphere(y):
        norm_y = np.linalg.norm(y)
        if norm_y == 0:
            return np.inf
        return float(objective((radius * y / norm_y)[None, :])[0])

    minima = []
    for index in tqdm(order, desc=desc, leave=None, disable=not progress):
        result = minimize(on_sphere, points[index], method='BFGS')
        y = result.x / np.linalg.norm(result.x)
        value = float(objective((radius * y)[None, :])[0])
        if value > values[index]:
            y, value = points[index], float(values[index])
        minima.append(SphereMinimum(canonical_sign(y), value))
    minima.sort(key=lambda m: (m.value, tuple(m.point)))
    return minima


def polish_on_sphere(residuals: Callable[[np.ndarray], np.ndarray], point: np.ndarray, radius: float = 1.0) -> np.ndarray:
    ''' Least-squares polish of a near-zero on the sphere of the given radius, returned as a unit vector '''
    def augmented(y):
        return np.concatenate([residuals(radius * y), [y @ y - 1]])
    result = least_squares(augmented, point, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return canonical_sign(result.x / np.linalg.norm(result.x))


def cluster_points(points: Sequence[np.ndarray], tolerance: float = 1e-4) -> List[np.ndarray]:
    ''' Representatives of the points up to sign and distance tolerance '''
    clusters = []
    for p in points:
        p = canonical_sign(p)
        if not any(min(np.linalg.norm(p - c), np.linalg.norm(p + c)) < tolerance for c in clusters):
            clusters.append(p)
    return clusters


def rationalise(point: Sequence[float], max_denominator: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(float(x)).limit_denominator(max_denominator) for x in point)


def integer_direction(point: Sequence[Fraction]) -> Tuple[int, ...]:
    ''' Primitive integer vector on the ray of a rational point '''
    denominator = 1
    for x in point:
        denominator = denominator * x.denominator // gcd(denominator, x.denominator)
    values = [int(x * denominator) for x in point]
    common = 0
    for v in values:
        common = gcd(common, abs(v))
    return tuple(v // common for v in values) if common else tuple(values)


def candidate_directions(point: Sequence[float], max_denominator: int) -> List[Tuple[Fraction, ...]]:
    ''' Rational guesses for the exact point behind a numeric one: the point itself and the point scaled to unit max-norm '''
    point = np.asarray(point, dtype=float)
    guesses = [rationalise(point, max_denominator)]
    peak = np.max(np.abs(point))
    if peak > 0:
        guesses.append(rationalise(point / peak, max_denominator))
    unique = []
    for g in guesses:
        if g not in unique and any(g):
            unique.append(g)
    return unique


def log_slope(t: Sequence[float], values: Sequence[float]) -> float:
    ''' Least-squares slope of log(values) against log(t) '''
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = values > 0
    if mask.sum() < 2:
        return float('nan')
    return float(np.polyfit(np.log(t[mask]), np.log(values[mask]), 1)[0])


# Interval helpers on top of mpmath.iv


@contextmanager
def iv_precision(bits: int):
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def iv_fraction(q: Fraction):
    q = Fraction(q)
    return iv.mpf(q.numerator) / q.denominator


def iv_hull(lo: Fraction, hi: Fraction):
    a, b = iv_fraction(lo), iv_fraction(hi)
    return a + (b - a) * iv.mpf([0, 1])


def iv_upper(x) -> float:
    return float(np.nextafter(float(x.b), np.inf))


def iv_lower(x) -> float:
    return float(np.nextafter(float(x.a), -np.inf))


def iv_bounds(x) -> Tuple[float, float]:
    return iv_lower(x), iv_upper(x)


def iv_abs_upper(x) -> float:
    return max(abs(iv_lower(x)), abs(iv_upper(x)))


def iv_modulus(re, im):
    return iv.sqrt(re ** 2 + im ** 2)


def iv_polynomial(terms: Sequence[Tuple[Sequence[int], Fraction]], box: Sequence):
    ''' Interval value of sum c * prod box[k]^e[k] over (e, c) pairs with rational c '''
    total = iv.mpf(0)
    for exponents, coeff in terms:
        value = iv_fraction(coeff)
        for x, e in zip(box, exponents):
            if e:
                value = value * x ** e
        total = total + value
    return total


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence]):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, quoting=csv.QUOTE_NONNUMERIC)
        writer.writerow(header)
        writer.writerows(rows)
