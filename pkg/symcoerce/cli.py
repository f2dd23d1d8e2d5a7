''' Command-line front end: `symcoerce <command> [operators...] [options]` '''
import argparse
import dataclasses
import json
import logging
import math
import sys
import time
import warnings
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Poly
from sympy.polys.domains import QQ_I

from . import __version__
from .coercive2d import ELLIPTIC, NOT_WEAKLY_COERCIVE, decide_weak_coercive_2d, resultant_criterion_2d
from .coercive_nd import CITATIONS, INCONCLUSIVE, RULES, WEAKLY_COERCIVE, classify_weak_coercivity, construct_s_system, minimality_check
from .ellipticity import NUMERICALLY_QUASI_ELLIPTIC, is_quasielliptic
from .existence import construct_quasielliptic, exists_quasielliptic
from .multiplier import RationalSymbol, certify_phi, check_mikhlin_like, check_p_ratio, write_report_csv
from .parser import format_operator, format_system, parse_operator, parse_system
from .poly import OperatorSystem, Polynomial, format_scalar
from .specifications import FrameSpec, GridSpec, ScanSpec, ScheduleSpec, SearchSpec
from .subordination import subordination_principal
from .witness import falsify_top_monomials, falsify_weak_coercivity, write_evidence_csv


log = logging.getLogger(__name__)

SCHEMA = 'symcoerce-report/1'

EXIT_VERDICT = 0
EXIT_INCONCLUSIVE = 1
EXIT_INPUT = 2


class UsageError(ValueError):
    pass


@dataclasses.dataclass
class Outcome:
    text: str
    payload: object
    inconclusive: bool = False
    rules: Tuple = ()
    dump: Optional[Callable[[Path], None]] = None


def json_ready(obj):
    ''' Plain JSON values for verdict objects: exact numbers as strings, polynomials in canonical operator text '''
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return {'re': json_ready(obj.real), 'im': json_ready(obj.imag)}
    if isinstance(obj, QQ_I.dtype):
        return format_scalar(obj)
    if isinstance(obj, Polynomial):
        return format_operator(obj)
    if isinstance(obj, OperatorSystem):
        return {'dim': obj.dim, 'weights': json_ready(obj.weights), 'operators': [format_operator(P) for P in obj.operators]}
    if isinstance(obj, Poly):
        return str(obj.as_expr())
    if isinstance(obj, (np.integer, np.floating, np.bool_)):
        return json_ready(obj.item())
    if isinstance(obj, np.ndarray):
        return [json_ready(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(json_ready(k)) if not isinstance(k, str) else k: json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(x) for x in obj]
    if dataclasses.is_dataclass(obj):
        payload = {f.name: json_ready(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
        status = getattr(type(obj), 'status', None)
        if isinstance(status, property):
            payload['status'] = obj.status
        return payload
    return str(obj)


def numbers(text: str, exact: bool = True) -> List:
    try:
        if exact and '.' not in text and 'e' not in text.lower():
            return [Fraction(x) for x in text.split(',') if x.strip()]
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError as exc:
        raise UsageError(f'Cannot read {text!r} as a comma-separated list of numbers') from exc


def integers(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(',') if x.strip())
    except ValueError as exc:
        raise UsageError(f'Cannot read {text!r} as a comma-separated list of integers') from exc


def load_system(args) -> OperatorSystem:
    if args.file:
        text = Path(args.file).read_text(encoding='utf-8')
    elif args.operators:
        text = '\n'.join(args.operators)
    else:
        raise UsageError('No operator given: pass operators as arguments or use --file')
    return parse_system(text, args.dim)


def search_spec(args) -> SearchSpec:
    return SearchSpec(seed=args.seed, progress=not args.no_progress)


def describe_witness(point) -> str:
    return '(' + ', '.join(f'{x:.6g}' for x in point) + ')'


# Commands


def run_classify(args) -> Outcome:
    S = load_system(args)
    progress = not args.no_progress
    verdict = classify_weak_coercivity(S, search_spec(args), ScanSpec(seed=args.seed, progress=progress),
                                       FrameSpec(seed=args.seed, progress=progress))
    citation = f'rule {verdict.rule}, {verdict.rule_name}'
    if verdict.status == ELLIPTIC:
        text = f'ELLIPTIC, hence weakly coercive ({citation})'
    elif verdict.status == WEAKLY_COERCIVE:
        text = f'WEAKLY COERCIVE (not elliptic) ({citation})'
    elif verdict.status == INCONCLUSIVE:
        text = 'INCONCLUSIVE (every implemented necessary condition holds)'
    else:
        text = f'NOT weakly coercive ({citation})'
    rules = tuple({'rule': r.rule, 'name': RULES.get(r.rule, ''), 'citation': CITATIONS.get(r.rule, ''), 'outcome': r.outcome,
                   'detail': r.detail} for r in verdict.applied_rules)
    return Outcome(f'{text}\np-range: {verdict.p_range}', verdict, verdict.status == INCONCLUSIVE, rules)


def run_elliptic(args) -> Outcome:
    S = load_system(args)
    weights = integers(args.weights) if args.weights else None
    verdict = is_quasielliptic(S, weights, search_spec(args))
    label = 'ELLIPTIC' if weights is None and S.is_isotropic else f'l-QUASIELLIPTIC (l = {weights or S.weight_vector()})'
    if not verdict.is_elliptic:
        text = f'NOT {label.split(" ")[0].lower()}: real principal zero at {describe_witness(verdict.witness.point)}'
    elif verdict.status == NUMERICALLY_QUASI_ELLIPTIC:
        text = f'{label} (numeric, sphere minimum {verdict.minimum:.3e})'
    else:
        text = label
    return Outcome(text, verdict)


def single_binary(args) -> Polynomial:
    S = load_system(args)
    if len(S) != 1 or S.dim != 2:
        raise UsageError(f'Expected one operator in two variables, got {len(S)} in dimension {S.dim}')
    return S[0]


def run_coercive2d(args) -> Outcome:
    P = single_binary(args)
    verdict = decide_weak_coercive_2d(P)
    if verdict.status == ELLIPTIC:
        text = 'ELLIPTIC'
    elif verdict.status == NOT_WEAKLY_COERCIVE:
        text = f'NOT weakly coercive ({verdict.reason})'
    else:
        text = 'WEAKLY COERCIVE (not elliptic)'
    if args.normal_form and verdict.normal_form is not None:
        form = verdict.normal_form
        factors = ' * '.join(f'({format_operator(f.polynomial())})' for f in form.factors) or '1'
        text += f'\nnormal form: ({format_operator(form.R)}) * {factors} + ({format_operator(form.Q)})'
        if not form.exact:
            text += f' [numeric, residual {form.residual:.2e}]'
    return Outcome(text, verdict)


def run_resultant2d(args) -> Outcome:
    verdict = resultant_criterion_2d(single_binary(args))
    if not verdict.applicable:
        return Outcome(f'NOT APPLICABLE ({verdict.reason})', verdict, inconclusive=True)
    if verdict.status == NOT_WEAKLY_COERCIVE:
        detail = verdict.reason or 'resultant vanishes'
        return Outcome(f'NOT weakly coercive ({detail})', verdict)
    return Outcome(f'WEAKLY COERCIVE (resultant {format_scalar(verdict.resultant)})', verdict)


def weights_and_count(args) -> Tuple[Tuple[int, ...], int]:
    if not args.weights:
        raise UsageError('--weights is required')
    return integers(args.weights), args.N


def run_exists(args) -> Outcome:
    verdict = exists_quasielliptic(*weights_and_count(args))
    if verdict.exists:
        return Outcome(f'an l-quasielliptic system EXISTS ({verdict.reason})', verdict)
    return Outcome(f'NO l-quasielliptic system exists ({verdict.reason})', verdict)


def run_construct(args) -> Outcome:
    S = construct_quasielliptic(*weights_and_count(args))
    return Outcome(format_system(S).rstrip('\n'), S)


def run_subordinate(args) -> Outcome:
    if not args.Q:
        raise UsageError('--Q is required')
    S = load_system(args)
    Q = parse_operator(args.Q, S.dim)
    outcome = subordination_principal(Q, S, integers(args.weights) if args.weights else None)
    if outcome.solvable:
        coefficients = ', '.join(format_scalar(c) for c in outcome.coefficients)
        return Outcome(f'SUBORDINATE: principal part of Q = sum lambda_j P_j^l with lambda = ({coefficients})', outcome)
    return Outcome(f'NOT subordinate (separating functional pairs to {format_scalar(outcome.pairing)})', outcome)


def run_s_system(args) -> Outcome:
    S = construct_s_system(load_system(args), search_spec(args))
    return Outcome(format_system(S).rstrip('\n'), S)


def run_minimality(args) -> Outcome:
    drop = integers(args.drop) if args.drop else None
    if drop is not None and len(drop) != 2:
        raise UsageError('--drop takes a pair u,v')
    verdict = minimality_check(load_system(args), drop)
    if verdict.status == 'Broken':
        u, v = verdict.drop
        return Outcome(f'BROKEN without S_{u}{v}: {format_operator(verdict.witness)} is not subordinate on the plane ({v}, {u})', verdict)
    return Outcome('SURVIVES', verdict)


def grid_spec(args) -> GridSpec:
    return GridSpec(shell_points=args.shell_points, seed=args.seed, progress=not args.no_progress)


def describe_report(report) -> str:
    if report.passed:
        return f'PASS ({report.label}), sup estimate {report.a_delta:.6g} on {report.samples} points'
    w = report.witness
    trend = ', '.join(f'{g:.4g}' for g in w.growth)
    return f'FAIL witness for {w.label} at {describe_witness(w.point)}; sups over nested radii: {trend}'


def run_multiplier_check(args) -> Outcome:
    S = load_system(args)
    if args.phi:
        if args.j is None or args.v is None:
            raise UsageError('--phi needs --j and --v')
        certificate = certify_phi(S, integers(args.phi), args.j, args.v, args.delta, grid_spec(args), search_spec(args))
        lines = [f'{certificate.verdict} ({len(certificate.pieces)} pieces, closed-form factor xi1/(xi1 + i) not sampled)']
        if certificate.reduced is not None:
            lines.append(f'  xi1-free part: {describe_report(certificate.reduced)}')
        lines.extend(f'  piece {gamma}: {describe_report(report)}' for gamma, report in certificate.pieces)
        return Outcome('\n'.join(lines), certificate)
    record = args.dump is not None
    if args.ratio:
        report = check_p_ratio(S[0], grid_spec(args), Fraction(args.cutoff), record=record)
    else:
        denominators = [parse_operator(text, S.dim) for text in args.over]
        symbol = RationalSymbol.of(S[0], *denominators, cutoff=Fraction(args.cutoff))
        report = check_mikhlin_like(symbol, args.delta, grid_spec(args), reduce_variables=args.reduce, record=record)
    return Outcome(describe_report(report), report, dump=lambda path: write_report_csv(report, path))


def run_witness(args) -> Outcome:
    S = load_system(args)
    if not args.direction:
        raise UsageError('--direction is required')
    direction = numbers(args.direction)
    schedule = ScheduleSpec(steps=args.steps)
    if args.alpha:
        evidence = falsify_weak_coercivity(S, integers(args.alpha), direction, schedule)
    else:
        evidence = falsify_top_monomials(S, direction, schedule)[0]
    label = 'FALSIFIED' if evidence.falsified else 'NO GROWTH'
    text = f'{label}: ratio growth exponent {evidence.exponent:.3f} for alpha = {evidence.alpha} over {evidence.window} doublings'
    return Outcome(text, evidence, dump=lambda path: write_evidence_csv(evidence, path))


def run_restrict(args) -> Outcome:
    if not args.keep:
        raise UsageError('--keep is required')
    S = load_system(args).restrict_coordinates(integers(args.keep))
    return Outcome(format_system(S).rstrip('\n'), S)


COMMANDS: Dict[str, Tuple[Callable, str]] = {
    'classify': (run_classify, 'weak coercivity of an isotropic system'),
    'elliptic': (run_elliptic, 'ellipticity or l-quasiellipticity'),
    'coercive2d': (run_coercive2d, 'exact two-variable weak coercivity decision'),
    'resultant2d': (run_resultant2d, 'two-variable resultant criterion'),
    'exists': (run_exists, 'existence of an N-operator l-quasielliptic system'),
    'construct': (run_construct, 'construct an N-operator l-quasielliptic system'),
    'subordinate': (run_subordinate, 'principal subordination of Q to the system'),
    's-system': (run_s_system, 'the non-elliptic weakly coercive system over an elliptic one'),
    'minimality': (run_minimality, 'drop one operator of an S-system'),
    'multiplier-check': (run_multiplier_check, 'grid certificate for a rational multiplier'),
    'witness': (run_witness, 'bump-function falsification of an a-priori estimate'),
    'restrict': (run_restrict, 'restrict a system to coordinate subspaces'),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('operators', nargs='*', help='operators such as "(D1+i)*(D2+i)"; one argument per operator')
    common.add_argument('--file', help='system file: one operator per line, # comments, optional "weights:" header')
    common.add_argument('--dim', type=int, help='number of variables (default: highest variable index)')
    common.add_argument('--json', action='store_true', help='print the versioned JSON report')
    common.add_argument('--dump', help='side output, csv:<path>')
    common.add_argument('--seed', type=int, help='random seed (default: SYMCOERCE_SEED or 0)')
    common.add_argument('--verbose', '-v', action='count', default=0)
    common.add_argument('--no-progress', action='store_true', help='disable progress bars')

    parser = argparse.ArgumentParser(prog='symcoerce', description='Ellipticity and weak coercivity of constant-coefficient systems')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', required=True)
    parsers = {name: subparsers.add_parser(name, parents=[common], help=summary) for name, (_, summary) in COMMANDS.items()}

    parsers['elliptic'].add_argument('--weights', help='anisotropic weights l1,l2,...')
    parsers['coercive2d'].add_argument('--normal-form', action='store_true', help='print the normal form')
    for name in ('exists', 'construct'):
        parsers[name].add_argument('--weights', help='weights l1,l2,...')
        parsers[name].add_argument('--N', type=int, default=1, help='number of operators')
    parsers['subordinate'].add_argument('--Q', help='the subordinated operator')
    parsers['subordinate'].add_argument('--weights', help='anisotropic weights l1,l2,...')
    parsers['minimality'].add_argument('--drop', help='index pair u,v of the dropped operator')
    check = parsers['multiplier-check']
    check.add_argument('--delta', default='1/2', help='exponent in (0, 1)')
    check.add_argument('--over', action='append', default=[], help='denominator factor, repeatable')
    check.add_argument('--cutoff', default='1', help='radius below which the symbol is cut off')
    check.add_argument('--reduce', action='store_true', help='check in the coordinates the symbol depends on')
    check.add_argument('--ratio', action='store_true', help='ratio test of the derivatives of the operator against itself')
    check.add_argument('--phi', help='multi-index alpha of the S-system symbol family over the given elliptic system')
    check.add_argument('--j', type=int, help='operator index of the symbol family')
    check.add_argument('--v', type=int, help='second coordinate index of the symbol family')
    check.add_argument('--shell-points', type=int, help='random points per radius shell')
    witness = parsers['witness']
    witness.add_argument('--alpha', help='multi-index a1,a2,... (default: every |alpha| = l-1)')
    witness.add_argument('--direction', help='real principal zero d1,d2,...')
    witness.add_argument('--steps', type=int, help='number of doublings')
    parsers['restrict'].add_argument('--keep', help='coordinates to keep, e.g. 1,2')
    return parser


def dump_target(spec: Optional[str]) -> Optional[Path]:
    if spec is None:
        return None
    kind, _, path = spec.partition(':')
    if kind != 'csv' or not path:
        raise UsageError(f'--dump expects csv:<path>, got {spec!r}')
    return Path(path)


def report(args, outcome: Outcome, started: float) -> dict:
    try:
        echo = format_system(load_system(args)).rstrip('\n')
    except (ValueError, OSError):
        echo = None
    return {
        'schema': SCHEMA,
        'version': __version__,
        'command': args.command,
        'input': echo,
        'verdict': json_ready(outcome.payload),
        'text': outcome.text,
        'inconclusive': outcome.inconclusive,
        'rules': json_ready(outcome.rules),
        'seed': SearchSpec(seed=args.seed)['seed'],
        'timing': round(time.perf_counter() - started, 6),
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_VERDICT if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format='%(levelname)s %(name)s: %(message)s')
    started = time.perf_counter()
    run = COMMANDS[args.command][0]
    try:
        target = dump_target(args.dump)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            outcome = run(args)
        for w in caught:
            log.warning('%s', w.message)
        if target is not None:
            if outcome.dump is None:
                raise UsageError(f'{args.command} has no CSV side output')
            outcome.dump(target)
    except (ValueError, OSError) as exc:
        print(f'symcoerce {args.command}: error: {exc}', file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        print(json.dumps(report(args, outcome, started), indent=2, sort_keys=True))
    else:
        print(outcome.text)
    return EXIT_INCONCLUSIVE if outcome.inconclusive else EXIT_VERDICT


if __name__ == '__main__':
    sys.exit(main())
