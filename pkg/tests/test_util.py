from fractions import Fraction

import numpy as np
import pytest

from symcoerce.specifications import FrameSpec, GridSpec, ScanSpec, ScheduleSpec, SearchSpec, default_seed, sanitise_spec
from symcoerce.util import canonical_sign, integer_direction, log_slope, rationalise, sign_patterns, sphere_points


def test_sign_patterns():
    assert sign_patterns(2) == [(1, 0), (0, 1), (1, 1), (1, -1)]
    assert len(sign_patterns(3)) == 13
    assert sign_patterns(7) == []


def test_sphere_points():
    points = sphere_points(3, 100, 0)
    assert points.shape == (100, 3)
    assert np.allclose(np.linalg.norm(points, axis=1), 1)
    assert np.array_equal(points, sphere_points(3, 100, 0))


def test_directions():
    assert np.array_equal(canonical_sign([0, -2, 1]), [0, 2, -1])
    assert integer_direction((Fraction(1, 2), Fraction(-3, 4))) == (2, -3)
    assert integer_direction((Fraction(0), Fraction(0))) == (0, 0)
    assert rationalise([0.5, 1 / 3], 10) == (Fraction(1, 2), Fraction(1, 3))


def test_log_slope():
    assert log_slope([1, 2, 4, 8], [3, 6, 12, 24]) == pytest.approx(1)
    assert np.isnan(log_slope([1, 2], [0, 1]))


def test_default_seed(monkeypatch):
    monkeypatch.delenv('SYMCOERCE_SEED', raising=False)
    assert default_seed() == 0
    monkeypatch.setenv('SYMCOERCE_SEED', '17')
    assert SearchSpec()['seed'] == 17
    assert SearchSpec(seed=3)['seed'] == 3
    monkeypatch.setenv('SYMCOERCE_SEED', 'seventeen')
    with pytest.raises(ValueError):
        default_seed()


def test_spec_validation():
    with pytest.raises(ValueError):
        SearchSpec(samples=10, starts=20)
    with pytest.raises(ValueError):
        ScanSpec(radii=(4, 2))
    with pytest.raises(ValueError):
        GridSpec(radii=(16, 64))
    with pytest.raises(ValueError):
        GridSpec(exponents=(3, 1))
    with pytest.raises(ValueError):
        sanitise_spec(GridSpec(), SearchSpec)
    assert isinstance(sanitise_spec(None, FrameSpec), FrameSpec)
    assert ScheduleSpec(steps=12)['window'] == 6
    assert repr(FrameSpec(trials=3, seed=1)).startswith('FrameSpec(')
