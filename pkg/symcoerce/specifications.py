import os
from abc import ABC
from fractions import Fraction
from typing import Iterable, Optional, Union


def default_seed() -> int:
    value = os.environ.get('SYMCOERCE_SEED')
    if value is None or value.strip() == '':
        return 0
    try:
        return int(value)
    except ValueError as exc:
        raise ValueError(f'SYMCOERCE_SEED must be an integer, got {value!r}') from exc


class Spec(ABC):
    ''' Bundle of numeric knobs for one engine. Unset (None) arguments fall back to the class defaults. '''

    name = ''
    defaults = {}


    def __init__(self, seed: Optional[int] = None, progress: Optional[bool] = None):
        self.spec = dict(self.defaults)
        self.spec['seed'] = default_seed()
        self.spec['progress'] = False
        self.add('seed', seed)
        self.add('progress', progress)


    def add(self, key, value):
        if value is not None:
            self.spec[key] = value


    def __getitem__(self, key):
        return self.spec[key]


    def __repr__(self):
        args = ', '.join(f'{k}={v!r}' for k, v in self.spec.items())
        return f'{type(self).__name__}({args})'


def sanitise_spec(x: Optional[Spec], spec_type: type) -> Spec:
    if x is None:
        return spec_type()
    if not isinstance(x, spec_type):
        raise ValueError(f'Expected a {spec_type.__name__}, got {type(x).__name__}')
    return x


class SearchSpec(Spec):
    ''' Multi-start minimisation of a sum of squared moduli on the unit sphere '''

    name = 'search'
    defaults = {'samples': 4096, 'starts': 256, 'tolerance': 1e-10, 'polish_tolerance': 1e-24, 'max_denominator': 64}


    def __init__(self,
        samples: Optional[int] = None,
        starts: Optional[int] = None,
        tolerance: Optional[float] = None,
        seed: Optional[int] = None,
        progress: Optional[bool] = None,
    ):
        super().__init__(seed, progress)
        self.add('samples', samples)
        self.add('starts', starts)
        self.add('tolerance', tolerance)
        if self.spec['starts'] > self.spec['samples']:
            raise ValueError('Cannot start more local searches than there are sphere samples')


class ScanSpec(Spec):
    ''' Radius schedule for zero-set scans on growing spheres '''

    name = 'scan'
    defaults = {'radii': tuple(2.0 ** k for k in range(0, 11)), 'samples': 1024, 'starts': 32, 'tolerance': 1e-9, 'witnesses': 3}


    def __init__(self,
        radii: Optional[Iterable[float]] = None,
        samples: Optional[int] = None,
        starts: Optional[int] = None,
        tolerance: Optional[float] = None,
        seed: Optional[int] = None,
        progress: Optional[bool] = None,
    ):
        super().__init__(seed, progress)
        if radii is not None:
            radii = tuple(float(r) for r in radii)
            if any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
                raise ValueError('Scan radii need to be positive and strictly increasing')
        self.add('radii', radii)
        self.add('samples', samples)
        self.add('starts', starts)
        self.add('tolerance', tolerance)


class GridSpec(Spec):
    ''' Evaluation grid for multiplier conditions: crossed logarithmic axis samples plus random points on radius shells '''

    name = 'grid'
    defaults = {
        'exponents': (-4, 12),
        'radii': tuple(2.0 ** k for k in range(4, 13)),
        'shell_points': 10000,
        'max_cross': 50000,
        'plateau_tolerance': 1e-2,
    }


    def __init__(self,
        exponents: Optional[Iterable[int]] = None,
        radii: Optional[Iterable[float]] = None,
        shell_points: Optional[int] = None,
        max_cross: Optional[int] = None,
        plateau_tolerance: Optional[float] = None,
        seed: Optional[int] = None,
        progress: Optional[bool] = None,
    ):
        super().__init__(seed, progress)
        if exponents is not None:
            exponents = tuple(int(k) for k in exponents)
            if len(exponents) != 2 or exponents[0] > exponents[1]:
                raise ValueError('Grid exponents need to be a (low, high) pair')
        if radii is not None:
            radii = tuple(float(r) for r in radii)
            if len(radii) < 3:
                raise ValueError('At least three nested radii are needed to judge growth')
        self.add('exponents', exponents)
        self.add('radii', radii)
        self.add('shell_points', shell_points)
        self.add('max_cross', max_cross)
        self.add('plateau_tolerance', plateau_tolerance)


class ScheduleSpec(Spec):
    ''' Doubling schedule of the bump witness: t_k = 2^k and r_k = t_k^coupling '''

    name = 'schedule'
    defaults = {'steps': 10, 'coupling': Fraction(1), 'window': None, 'threshold': 0.5, 'pieces': 400}


    def __init__(self,
        steps: Optional[int] = None,
        coupling: Optional[Union[int, Fraction]] = None,
        window: Optional[int] = None,
        threshold: Optional[float] = None,
        pieces: Optional[int] = None,
    ):
        super().__init__()
        self.add('steps', steps)
        self.add('coupling', None if coupling is None else Fraction(coupling))
        self.add('window', window)
        self.add('threshold', threshold)
        self.add('pieces', pieces)
        if self.spec['steps'] < 4:
            raise ValueError('A growth exponent needs at least four doublings')
        if self.spec['window'] is None:
            self.spec['window'] = max(4, self.spec['steps'] // 2)


class FalsifySpec(Spec):
    ''' Candidate ray budget for the algebraic inequality '''

    name = 'falsify'
    defaults = {'random_directions': 64, 'entry_bound': 3}


    def __init__(self,
        random_directions: Optional[int] = None,
        entry_bound: Optional[int] = None,
        seed: Optional[int] = None,
    ):
        super().__init__(seed)
        self.add('random_directions', random_directions)
        self.add('entry_bound', entry_bound)


class FrameSpec(Spec):
    ''' Random rational 2-frames for the subspace independence test '''

    name = 'frame'
    defaults = {'trials': 64, 'entry_bound': 5}


    def __init__(self,
        trials: Optional[int] = None,
        entry_bound: Optional[int] = None,
        seed: Optional[int] = None,
        progress: Optional[bool] = None,
    ):
        super().__init__(seed, progress)
        self.add('trials', trials)
        self.add('entry_bound', entry_bound)
