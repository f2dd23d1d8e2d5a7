from dataclasses import dataclass
from typing import List, Sequence

from .errors import NoSuchSystem
from .poly import OperatorSystem, Polynomial, check_weights, gaussian


@dataclass(frozen=True)
class ExistenceVerdict:
    ''' Whether some N-operator system is l-quasielliptic for the weight vector l '''
    exists: bool
    weights: tuple
    operators: int
    odd: int
    reason: str


    @property
    def status(self) -> str:
        return 'Exists' if self.exists else 'NotExists'


def count_odd(weights: Sequence[int]) -> int:
    return sum(1 for w in weights if w % 2)


def exists_quasielliptic(weights: Sequence[int], N: int) -> ExistenceVerdict:
    weights = tuple(int(w) for w in weights)
    check_weights(weights, len(weights))
    if N < 1:
        raise ValueError(f'A system needs at least one operator, got N = {N}')
    n = len(weights)
    odd = count_odd(weights)
    if n <= 2 * N:
        return ExistenceVerdict(True, weights, N, odd, f'n = {n} <= 2N = {2 * N}, every coordinate can be paired')
    if odd <= 2 * N - 1:
        return ExistenceVerdict(True, weights, N, odd, f'{odd} odd <= 2N-1={2 * N - 1}')
    return ExistenceVerdict(False, weights, N, odd, f'{odd} odd > 2N-1={2 * N - 1}')


def pure_power(dim: int, coordinate: int, exponent: int, coeff=1) -> Polynomial:
    exponents = [0] * dim
    exponents[coordinate] = exponent
    return Polynomial.monomial(exponents, coeff)


def construct_quasielliptic(weights: Sequence[int], N: int) -> OperatorSystem:
    ''' An N-operator l-quasielliptic system built from pairs xi_a^l_a + i*xi_b^l_b.
        With more than 2N coordinates the last operator is i*xi_a^l_a plus the even pure powers of all remaining coordinates. '''
    verdict = exists_quasielliptic(weights, N)
    if not verdict.exists:
        raise NoSuchSystem(f'No {N}-operator l-quasielliptic system exists for l = {verdict.weights}: {verdict.reason}')
    weights = verdict.weights
    n = len(weights)
    order = sorted(range(n), key=lambda k: (weights[k] % 2 == 0, k))

    def pair(a, b):
        return pure_power(n, a, weights[a]) + pure_power(n, b, weights[b], gaussian(0, 1))

    operators: List[Polynomial] = []
    if n <= 2 * N:
        for k in range(0, n - 1, 2):
            operators.append(pair(order[k], order[k + 1]))
        if n % 2:
            operators.append(pure_power(n, order[-1], weights[order[-1]]))
    else:
        for k in range(0, 2 * N - 2, 2):
            operators.append(pair(order[k], order[k + 1]))
        rest = order[2 * N - 2:]
        last = pure_power(n, rest[0], weights[rest[0]], gaussian(0, 1))
        for k in rest[1:]:
            last = last + pure_power(n, k, weights[k])
        operators.append(last)
    while len(operators) < N:
        operators.append(operators[0])
    return OperatorSystem(n, tuple(operators), weights)
