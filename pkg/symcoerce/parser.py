import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .errors import ParseDiagnostic, ParseError, VariableOutOfRange
from .poly import OperatorSystem, Polynomial, gaussian, re_im


MAX_EXPONENT = 64
MAX_DEGREE = 256
MAX_DIMENSION = 64
MAX_LITERAL_DIGITS = 256

TOKEN_PATTERN = re.compile(r'''
    (?P<space>\s+)
   |(?P<number>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|\.\d+)
   |(?P<variable>(?:D|xi)\d+)
   |(?P<name>[A-Za-z_][A-Za-z_0-9]*)
   |(?P<op>[-+*/^()])
   |(?P<other>.)
''', re.VERBOSE | re.DOTALL | re.ASCII)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def locate(text: str, offset: int) -> Tuple[int, int]:
    line = text.count('\n', 0, offset) + 1
    column = offset - (text.rfind('\n', 0, offset) + 1) + 1
    return line, column


def diagnostic(text: str, offset: int, kind: str, message: str) -> ParseDiagnostic:
    offset = max(0, min(offset, len(text) - 1))
    line, column = locate(text, offset)
    return ParseDiagnostic(offset, line, column, kind, message)


def tokenize(text: str) -> List[Token]:
    tokens = []
    for match in TOKEN_PATTERN.finditer(text):
        kind = match.lastgroup
        if kind == 'space':
            continue
        token = Token(kind, match.group(), match.start())
        if kind == 'other':
            raise ParseError(diagnostic(text, token.offset, 'UnexpectedToken', f'Unexpected character {token.text!r}'))
        if kind == 'number' and ('e' in token.text or 'E' in token.text):
            raise ParseError(diagnostic(text, token.offset, 'UnexpectedToken', 'Scientific notation is not supported, write the number exactly'))
        if kind == 'name' and token.text != 'i':
            raise ParseError(diagnostic(text, token.offset, 'UnknownVariable', f'Unknown name {token.text!r}, use i, Dk or xik'))
        if kind in ('number', 'variable') and sum(c.isdigit() for c in token.text) > MAX_LITERAL_DIGITS:
            raise ParseError(diagnostic(text, token.offset, 'Overflow', f'Literal with more than {MAX_LITERAL_DIGITS} digits'))
        tokens.append(token)
    return tokens


def variable_index(token: Token) -> int:
    return int(token.text[1:] if token.text.startswith('D') else token.text[2:])


def highest_variable(tokens: List[Token]) -> int:
    return max((variable_index(t) for t in tokens if t.kind == 'variable'), default=0)


class Parser:
    ''' Recursive descent over the token list, building polynomials in a fixed dimension '''

    def __init__(self, text: str, tokens: List[Token], dim: int):
        self.text = text
        self.tokens = tokens
        self.dim = dim
        self.position = 0


    def fail(self, kind: str, message: str, token: Optional[Token] = None):
        if token is None:
            token = self.peek()
        offset = token.offset if token is not None else len(self.text) - 1
        raise ParseError(diagnostic(self.text, offset, kind, message))


    def peek(self) -> Optional[Token]:
        return self.tokens[self.position] if self.position < len(self.tokens) else None


    def accept(self, text: str) -> Optional[Token]:
        token = self.peek()
        if token is not None and token.kind == 'op' and token.text == text:
            self.position += 1
            return token
        return None


    def parse(self) -> Polynomial:
        if not self.tokens:
            self.fail('UnexpectedToken', 'Empty expression')
        result = self.expr()
        token = self.peek()
        if token is not None:
            if token.kind in ('number', 'variable', 'name') or token.text == '(':
                self.fail('UnexpectedToken', f'Unexpected {token.text!r}: multiplication needs an explicit *')
            self.fail('UnexpectedToken', f'Unexpected {token.text!r}')
        return result


    def expr(self) -> Polynomial:
        result = self.term()
        while True:
            if self.accept('+'):
                result = result + self.term()
            elif self.accept('-'):
                result = result - self.term()
            else:
                return result


    def term(self) -> Polynomial:
        result = self.factor()
        while self.accept('*'):
            result = result * self.factor()
        return result


    def factor(self) -> Polynomial:
        base = self.base()
        caret = self.accept('^')
        if caret is None:
            return base
        token = self.peek()
        if token is None or token.kind != 'number' or not token.text.isdigit():
            self.fail('NonIntegerExponent', 'Exponents need to be non-negative integer literals', token or caret)
        self.position += 1
        exponent = int(token.text)
        if exponent > MAX_EXPONENT or max(base.degree, 0) * exponent > MAX_DEGREE:
            self.fail('Overflow', f'Exponent {exponent} makes the expansion too large', token)
        return base ** exponent


    def base(self) -> Polynomial:
        token = self.peek()
        if token is None:
            self.fail('UnexpectedToken', 'Unexpected end of input')
        if self.accept('-'):
            return -self.factor()
        if self.accept('('):
            result = self.expr()
            if self.accept(')') is None:
                self.fail('UnexpectedToken', 'Missing closing parenthesis')
            return result
        if token.kind == 'name':
            self.position += 1
            return Polynomial.constant(self.dim, gaussian(0, 1))
        if token.kind == 'variable':
            self.position += 1
            index = variable_index(token)
            if index < 1:
                self.fail('UnknownVariable', 'Variable indices start at 1', token)
            if index > self.dim:
                raise VariableOutOfRange(diagnostic(self.text, token.offset, 'DimensionMismatch',
                                                    f'Variable {token.text} exceeds the declared dimension {self.dim}'))
            return Polynomial.variable(self.dim, index)
        if token.kind == 'number':
            self.position += 1
            value = Fraction(token.text)
            slash = self.accept('/')
            if slash is not None:
                denominator = self.peek()
                if denominator is None or denominator.kind != 'number' or not denominator.text.isdigit() or not token.text.isdigit():
                    self.fail('UnexpectedToken', 'A rational literal is written p/q with integer p and q', denominator or slash)
                self.position += 1
                if int(denominator.text) == 0:
                    self.fail('UnexpectedToken', 'Zero denominator', denominator)
                value = Fraction(int(token.text), int(denominator.text))
            return Polynomial.constant(self.dim, value)
        self.fail('UnexpectedToken', f'Unexpected {token.text!r}')


def parse_operator(text: str, dim: Optional[int] = None) -> Polynomial:
    ''' Parse an operator such as "(D1+i)*(D2+i)" into its symbol. Dk and xik both stand for the k-th variable. '''
    tokens = tokenize(text)
    highest = highest_variable(tokens)
    if highest > MAX_DIMENSION:
        offset = next(t.offset for t in tokens if t.kind == 'variable' and variable_index(t) == highest)
        raise ParseError(diagnostic(text, offset, 'Overflow', f'Variable index {highest} is above the supported {MAX_DIMENSION}'))
    if dim is None:
        dim = max(highest, 1)
    elif dim < 1:
        raise ValueError(f'Dimension needs to be positive, got {dim}')
    try:
        return Parser(text, tokens, dim).parse()
    except RecursionError as exc:
        raise ParseError(diagnostic(text, 0, 'Overflow', 'Expression nested too deeply')) from exc


def format_rational(r: Fraction) -> str:
    return str(r) if r.denominator == 1 else f'({r})'


def format_coefficient(re: Fraction, im: Fraction) -> str:
    if not im:
        return format_rational(re)
    imaginary = 'i' if im == 1 else f'{format_rational(im)}*i'
    if not re:
        return imaginary
    sign = '+' if im > 0 else '-'
    imaginary = 'i' if abs(im) == 1 else f'{format_rational(abs(im))}*i'
    return f'({re} {sign} {imaginary})'


def format_monomial(exponents) -> str:
    return '*'.join(f'D{k}' if e == 1 else f'D{k}^{e}' for k, e in enumerate(exponents, start=1) if e)


def format_operator(P: Polynomial) -> str:
    ''' Canonical graded-lex text, e.g. "D1*D2 + i*D1" '''
    pieces = []
    for exponents, coeff in P.terms.items():
        re, im = re_im(coeff)
        negative = (re < 0 and not im) or (not re and im < 0)
        if negative:
            re, im = -re, -im
        monomial = format_monomial(exponents)
        if not monomial:
            body = format_coefficient(re, im)
        elif re == 1 and not im:
            body = monomial
        else:
            body = f'{format_coefficient(re, im)}*{monomial}'
        if not pieces:
            pieces.append(f'-{body}' if negative else body)
        else:
            pieces.append(f'{"-" if negative else "+"} {body}')
    return ' '.join(pieces) if pieces else '0'


def parse_system(text: str, dim: Optional[int] = None) -> OperatorSystem:
    ''' One operator per line, # starts a comment, an optional "weights: l1 l2 ..." header line '''
    weights = None
    entries = []
    offset = 0
    for number, line in enumerate(text.splitlines(keepends=True), start=1):
        start = offset
        offset += len(line)
        body = line.split('#', 1)[0]
        if not body.strip():
            continue
        if body.strip().lower().startswith('weights:'):
            if weights is not None or entries:
                raise ParseError(diagnostic(text, start, 'UnexpectedToken', 'The weights header has to come first and only once'))
            try:
                weights = tuple(int(w) for w in re.split(r'[\s,]+', body.split(':', 1)[1].strip()) if w)
            except ValueError as exc:
                raise ParseError(diagnostic(text, start, 'NonIntegerExponent', 'Weights need to be positive integers')) from exc
            continue
        entries.append((number, start, body.rstrip('\r\n')))
    if not entries:
        raise ParseError(diagnostic(text, 0, 'UnexpectedToken', 'The system file contains no operator'))
    if dim is None:
        highest = 0
        for number, start, body in entries:
            try:
                highest = max(highest, highest_variable(tokenize(body)))
            except ParseError as exc:
                raise relocated(exc, text, start) from exc
        dim = max(highest, len(weights) if weights else 0, 1)
    operators = []
    for number, start, body in entries:
        try:
            operators.append(parse_operator(body, dim))
        except ParseError as exc:
            raise relocated(exc, text, start) from exc
    return OperatorSystem(dim, tuple(operators), weights)


def relocated(exc: ParseError, text: str, start: int) -> ParseError:
    d = exc.diagnostic
    moved = diagnostic(text, start + d.offset, d.kind, d.message)
    return type(exc)(moved)


def format_system(S: OperatorSystem) -> str:
    lines = []
    if S.weights is not None:
        lines.append('weights: ' + ' '.join(str(w) for w in S.weights))
    lines.extend(format_operator(P) for P in S.operators)
    return '\n'.join(lines) + '\n'
