from itertools import product

import numpy as np
import pytest

from symcoerce.ellipticity import is_quasielliptic
from symcoerce.errors import NoSuchSystem
from symcoerce.existence import construct_quasielliptic, exists_quasielliptic


def test_three_odd_weights_need_two_operators():
    verdict = exists_quasielliptic((1, 1, 1), 1)
    assert not verdict.exists
    assert verdict.status == 'NotExists'
    assert verdict.reason == '3 odd > 2N-1=1'
    assert exists_quasielliptic((1, 1, 1), 2).exists


def test_even_weights_always_work():
    verdict = exists_quasielliptic((2, 4, 2, 6), 1)
    assert verdict.exists
    assert verdict.odd == 0


def test_invalid_input():
    with pytest.raises(ValueError):
        exists_quasielliptic((1, 0), 1)
    with pytest.raises(ValueError):
        exists_quasielliptic((1, 1), 0)
    with pytest.raises(NoSuchSystem):
        construct_quasielliptic((1, 1, 2), 1)


@pytest.mark.parametrize('weights, N', [
    ((1, 1), 1),
    ((2, 2, 2), 1),
    ((3, 2, 4), 2),
    ((1, 2, 2, 4), 1),
    ((1, 1, 1, 3), 2),
])
def test_constructed_system_is_quasielliptic(weights, N):
    S = construct_quasielliptic(weights, N)
    assert len(S) == N
    assert S.weights == weights
    verdict = is_quasielliptic(S)
    assert verdict.is_elliptic


def test_parity_truth_table():
    for n in range(1, 8):
        for weights in product(range(1, 5), repeat=n):
            odd = sum(w % 2 for w in weights)
            for N in (1, 2, 3):
                verdict = exists_quasielliptic(weights, N)
                assert verdict.exists == (n <= 2 * N or odd <= 2 * N - 1), (weights, N)
                assert verdict.odd == odd


def check_construction(weights, N):
    S = construct_quasielliptic(weights, N)
    assert len(S) == N
    assert S.weights == weights
    assert is_quasielliptic(S).is_elliptic, (weights, N)


def test_every_small_case_is_constructed():
    for n in range(1, 4):
        for weights in product(range(1, 5), repeat=n):
            for N in (1, 2, 3):
                if exists_quasielliptic(weights, N).exists:
                    check_construction(weights, N)
                else:
                    with pytest.raises(NoSuchSystem):
                        construct_quasielliptic(weights, N)


@pytest.mark.parametrize('n', [4, 5, 6, 7])
def test_sampled_cases_are_constructed(n):
    rng = np.random.default_rng(n)
    checked = 0
    while checked < 15:
        weights = tuple(int(w) for w in rng.integers(1, 5, n))
        N = int(rng.integers(1, 4))
        if exists_quasielliptic(weights, N).exists:
            check_construction(weights, N)
            checked += 1
