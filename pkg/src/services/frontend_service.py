"""
Loop front end for the linear loop ANT analyzer.
Parses the loop language and JSON programs, composes sequential assignments and homogenizes affine loops.
"""

import json
import logging
import re
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from sympy import Expr, ImmutableMatrix, Poly, PolynomialError, Rational, Symbol, expand

from src.models.loop_models import Embedding, LoopClass, LoopProgram, classify
from src.util.errors import LoopSyntaxError, NonLinearTermError, UnknownVariableError
from src.util.exact_arith import qmatrix, to_rational

logger = logging.getLogger(__name__)

TOKEN_SPEC = [
    ("NUMBER", r"\d+(?:\.\d+)?"),
    ("ASSIGN", r":="),
    ("AND", r"&&"),
    ("GE", r">="),
    ("LE", r"<="),
    ("GT", r">"),
    ("LT", r"<"),
    ("IDENT", r"[A-Za-z_][A-Za-z_0-9']*"),
    ("OP", r"[-+*/^]"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("LBRACE", r"\{"),
    ("RBRACE", r"\}"),
    ("COMMA", r","),
    ("SEMI", r";"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r]+|#[^\n]*|//[^\n]*"),
    ("MISMATCH", r"."),
]
TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in TOKEN_SPEC))
KEYWORDS = {"while", "vars"}


class Token(NamedTuple):
    """A lexical token with its source position."""

    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    """
    Split loop source into tokens.

    Raises:
        LoopSyntaxError: On a character that starts no token
    """
    tokens: List[Token] = []
    line, line_start = 1, 0
    for match in TOKEN_RE.finditer(text):
        kind = match.lastgroup or "MISMATCH"
        value = match.group()
        column = match.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
            continue
        if kind == "SKIP":
            continue
        if kind == "MISMATCH":
            raise LoopSyntaxError(f"Unexpected character {value!r}", line, column)
        if kind == "IDENT" and value in KEYWORDS:
            kind = value.upper()
        tokens.append(Token(kind, value, line, column))
    tokens.append(Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


class LoopParser:
    """
    Recursive-descent parser for the loop language.

    program := ['vars' ident (',' ident)* ';'] 'while' '(' cond (('&&' | ',') cond)* ')' '{' (assign ';')* '}'
    cond    := expr ('>' | '<') expr
    assign  := ident ':=' expr | '(' ident (',' ident)* ')' ':=' '(' expr (',' expr)* ')'
    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom ['^' unary]
    atom    := number | ident | '(' expr ')'
    """

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.position = 0
        self.declared: Optional[List[str]] = None
        self.order: List[str] = []
        self.symbols: Dict[str, Symbol] = {}

    # token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.current
        self.position += 1
        return token

    def expect(self, kind: str, what: Optional[str] = None) -> Token:
        token = self.current
        if token.kind != kind:
            found = token.text or "end of input"
            raise LoopSyntaxError(f"Expected {what or kind} but found {found!r}", token.line, token.column)
        return self.advance()

    def variable(self, token: Token) -> Symbol:
        name = token.text
        if self.declared is not None and name not in self.declared:
            raise UnknownVariableError(f"Variable {name!r} is not declared (line {token.line}, column {token.column})")
        if name not in self.symbols:
            self.symbols[name] = Symbol(name)
            self.order.append(name)
        return self.symbols[name]

    # grammar

    def parse_program(self) -> Tuple[List[Tuple[Expr, Token]], List[Tuple[List[str], List[Expr], Token]]]:
        if self.current.kind == "VARS":
            self.advance()
            self.declared = []
            while True:
                token = self.expect("IDENT", "a variable name")
                self.declared.append(token.text)
                self.variable(token)
                if self.current.kind != "COMMA":
                    break
                self.advance()
            self.expect("SEMI", "';'")

        self.expect("WHILE", "'while'")
        self.expect("LPAREN", "'('")
        conditions = [self.parse_condition()]
        while self.current.kind in ("AND", "COMMA"):
            self.advance()
            conditions.append(self.parse_condition())
        self.expect("RPAREN", "')'")
        self.expect("LBRACE", "'{'")
        assignments = []
        while self.current.kind != "RBRACE":
            assignments.append(self.parse_assignment())
            self.expect("SEMI", "';'")
        self.expect("RBRACE", "'}'")
        self.expect("EOF", "end of input")
        return conditions, assignments

    def parse_condition(self) -> Tuple[Expr, Token]:
        start = self.current
        left = self.parse_expr()
        token = self.current
        if token.kind in ("GE", "LE"):
            raise LoopSyntaxError(
                f"Non-strict comparison {token.text!r} is not supported; loop guards are strict. "
                "Over the integers c*x >= d can be written c*x > d - 1",
                token.line,
                token.column,
            )
        if token.kind not in ("GT", "LT"):
            found = token.text or "end of input"
            raise LoopSyntaxError(f"Expected '>' or '<' but found {found!r}", token.line, token.column)
        self.advance()
        right = self.parse_expr()
        form = left - right if token.kind == "GT" else right - left
        return expand(form), start

    def parse_assignment(self) -> Tuple[List[str], List[Expr], Token]:
        start = self.current
        if self.current.kind == "LPAREN":
            self.advance()
            targets = [self.variable(self.expect("IDENT", "a variable name")).name]
            while self.current.kind == "COMMA":
                self.advance()
                targets.append(self.variable(self.expect("IDENT", "a variable name")).name)
            self.expect("RPAREN", "')'")
            self.expect("ASSIGN", "':='")
            self.expect("LPAREN", "'('")
            values = [self.parse_expr()]
            while self.current.kind == "COMMA":
                self.advance()
                values.append(self.parse_expr())
            self.expect("RPAREN", "')'")
            if len(values) != len(targets):
                raise LoopSyntaxError(
                    f"{len(targets)} targets but {len(values)} values in simultaneous assignment",
                    start.line,
                    start.column,
                )
            return targets, values, start
        target = self.variable(self.expect("IDENT", "a variable name")).name
        self.expect("ASSIGN", "':='")
        return [target], [self.parse_expr()], start

    def parse_expr(self) -> Expr:
        value = self.parse_term()
        while self.current.kind == "OP" and self.current.text in "+-":
            op = self.advance().text
            right = self.parse_term()
            value = value + right if op == "+" else value - right
        return value

    def parse_term(self) -> Expr:
        value = self.parse_unary()
        while self.current.kind == "OP" and self.current.text in "*/":
            token = self.advance()
            right = self.parse_unary()
            if token.text == "*":
                value = value * right
            else:
                if not right.is_Number:
                    raise NonLinearTermError(f"Division by a non-constant (line {token.line}, column {token.column})")
                if right == 0:
                    raise LoopSyntaxError("Division by zero", token.line, token.column)
                value = value / right
        return value

    def parse_unary(self) -> Expr:
        if self.current.kind == "OP" and self.current.text in "+-":
            op = self.advance().text
            operand = self.parse_unary()
            return -operand if op == "-" else operand
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.current.kind == "OP" and self.current.text == "^":
            token = self.advance()
            exponent = self.parse_unary()
            if not exponent.is_Integer or exponent < 0:
                raise LoopSyntaxError("Exponents must be non-negative integer constants", token.line, token.column)
            return base**exponent
        return base

    def parse_atom(self) -> Expr:
        token = self.current
        if token.kind == "NUMBER":
            self.advance()
            return to_rational(token.text)
        if token.kind == "IDENT":
            self.advance()
            return self.variable(token)
        if token.kind == "LPAREN":
            self.advance()
            value = self.parse_expr()
            self.expect("RPAREN", "')'")
            return value
        raise LoopSyntaxError(f"Unexpected {token.text or 'end of input'!r}", token.line, token.column)


def _affine_coefficients(
    expr: Expr, symbols: Sequence[Symbol], token: Token, what: str
) -> Tuple[List[Rational], Rational]:
    """Coefficients and constant of an affine expression; raises NonLinearTermError otherwise."""
    where = f"line {token.line}, column {token.column}"
    expr = expand(expr)
    if not symbols:
        if not expr.is_Number:
            raise NonLinearTermError(f"{what} is not affine ({where})")
        return [], Rational(expr)
    try:
        poly = Poly(expr, *symbols)
    except PolynomialError as e:
        raise NonLinearTermError(f"{what} is not affine ({where})") from e
    if poly.total_degree() > 1:
        raise NonLinearTermError(f"{what} has a term of degree {poly.total_degree()} ({where})")
    coeffs = [Rational(poly.coeff_monomial(symbol)) for symbol in symbols]
    return coeffs, Rational(poly.coeff_monomial(1))


def compose_sequential(
    assignments: Sequence[Tuple[Sequence[str], Sequence[Expr]]], var_names: Sequence[str]
) -> Tuple[ImmutableMatrix, ImmutableMatrix]:
    """
    Compose sequential assignments into one simultaneous update x := A·x + c.

    Each statement is applied to the running substitution state; a tuple statement assigns all its targets at once.

    Args:
        assignments: Ordered (targets, values) statements over symbols named like the variables
        var_names: Coordinate order of the variables

    Returns:
        Tuple (A, c)

    Raises:
        NonLinearTermError: If a composed update is not affine
    """
    symbols = [Symbol(name) for name in var_names]
    state: Dict[Symbol, Expr] = {symbol: symbol for symbol in symbols}
    for targets, values in assignments:
        substituted = [expand(value.xreplace(state)) for value in values]
        for target, value in zip(targets, substituted):
            state[Symbol(target)] = value

    rows, constants = [], []
    origin = Token("EOF", "", 1, 1)
    for symbol in symbols:
        coeffs, constant = _affine_coefficients(state[symbol], symbols, origin, f"Update of {symbol.name}")
        rows.append(coeffs)
        constants.append([constant])
    return qmatrix(rows, len(symbols)), qmatrix(constants, 1)


def build_program(
    var_names: Sequence[str],
    A: ImmutableMatrix,
    c: ImmutableMatrix,
    F: ImmutableMatrix,
    b: ImmutableMatrix,
    name: Optional[str] = None,
) -> LoopProgram:
    """Assemble a LoopProgram and derive its class tag."""
    return LoopProgram(
        var_names=tuple(var_names), A=A, c=c, F=F, b=b, class_tag=classify(c, b, F.rows), name=name
    )


def parse(text: str, name: Optional[str] = None) -> LoopProgram:
    """
    Parse loop source into a LoopProgram.

    Guard conjuncts become rows of F and entries of b as `form > constant`; variables are ordered by a `vars`
    declaration when present, otherwise by first appearance in the guard and then in the body.

    Args:
        text: Loop source
        name: Optional program identifier

    Returns:
        The parsed program

    Raises:
        LoopSyntaxError: On malformed source
        NonLinearTermError: On a non-affine guard or update
        UnknownVariableError: On an undeclared variable when a declaration is present
    """
    parser = LoopParser(text)
    conditions, assignments = parser.parse_program()
    var_names = parser.declared if parser.declared is not None else parser.order
    if not var_names:
        raise LoopSyntaxError("The loop mentions no variables", 1, 1)
    symbols = [Symbol(v) for v in var_names]

    F_rows, b_rows = [], []
    for form, token in conditions:
        coeffs, constant = _affine_coefficients(form, symbols, token, "Guard")
        F_rows.append(coeffs)
        b_rows.append([-constant])

    for targets, values, token in assignments:
        for value in values:
            _affine_coefficients(value, symbols, token, "Assignment")
    A, c = compose_sequential([(t, v) for t, v, _ in assignments], var_names)
    program = build_program(var_names, A, c, qmatrix(F_rows), qmatrix(b_rows), name)
    logger.debug(f"Parsed {program.class_tag.value} loop with n={program.n}, m={program.m}")
    return program


def _matrix_from_json(data: Any, rows: int, cols: int, what: str) -> ImmutableMatrix:
    if not isinstance(data, list) or len(data) != rows or any(not isinstance(r, list) or len(r) != cols for r in data):
        raise LoopSyntaxError(f"JSON field {what!r} must be a {rows}x{cols} array")
    return qmatrix(data, cols)


def parse_json(source: str, name: Optional[str] = None) -> LoopProgram:
    """
    Parse a JSON program {vars, A, c, F, b}; rationals may be integers or "p/q" strings, c and b default to zero.

    Raises:
        LoopSyntaxError: On malformed JSON or wrongly shaped matrices
    """
    try:
        data = json.loads(source)
    except json.JSONDecodeError as e:
        raise LoopSyntaxError(f"Invalid JSON: {e.msg}", e.lineno, e.colno) from e
    if not isinstance(data, dict):
        raise LoopSyntaxError("A JSON program must be an object")
    var_names = data.get("vars")
    if not isinstance(var_names, list) or not var_names or not all(isinstance(v, str) for v in var_names):
        raise LoopSyntaxError("JSON field 'vars' must be a non-empty list of names")
    n = len(var_names)
    F_data = data.get("F")
    if not isinstance(F_data, list) or not F_data:
        raise LoopSyntaxError("JSON field 'F' must be a non-empty array of rows")
    m = len(F_data)
    try:
        A = _matrix_from_json(data.get("A"), n, n, "A")
        F = _matrix_from_json(F_data, m, n, "F")
        c = _matrix_from_json([[v] for v in data.get("c", [0] * n)], n, 1, "c")
        b = _matrix_from_json([[v] for v in data.get("b", [0] * m)], m, 1, "b")
    except (TypeError, ValueError) as e:
        if isinstance(e, LoopSyntaxError):
            raise
        raise LoopSyntaxError(f"Invalid JSON program: {e}") from e
    return build_program(var_names, A, c, F, b, name or data.get("name"))


def load_program(source: str, name: Optional[str] = None) -> LoopProgram:
    """Parse JSON when the source is a JSON object, the loop language otherwise."""
    if source.lstrip().startswith("{"):
        return parse_json(source, name)
    return parse(source, name)


def program_to_json(p: LoopProgram) -> Dict[str, Any]:
    """JSON-ready dictionary of a program with rationals as strings."""

    def column(M: ImmutableMatrix) -> List[str]:
        return [str(v) for v in M]

    return {
        "name": p.name,
        "class": p.class_tag.value,
        "vars": list(p.var_names),
        "A": [[str(v) for v in p.A.row(i)] for i in range(p.n)],
        "c": column(p.c),
        "F": [[str(v) for v in p.F.row(i)] for i in range(p.m)],
        "b": column(p.b),
    }


def _format_affine(coeffs: Sequence[Rational], constant: Rational, names: Sequence[str]) -> str:
    terms = []
    for coeff, name in zip(coeffs, names):
        if coeff == 0:
            continue
        magnitude = abs(coeff)
        body = name if magnitude == 1 else f"{magnitude}*{name}"
        terms.append(("-" if coeff < 0 else "+", body))
    if constant != 0 or not terms:
        terms.append(("-" if constant < 0 else "+", str(abs(constant))))
    text = "".join(f" {sign} {body}" for sign, body in terms).strip()
    return text[2:] if text.startswith("+ ") else f"-{text[2:]}"


def program_to_text(p: LoopProgram) -> str:
    """Render a program in the loop language; parse(program_to_text(p)) reproduces p."""
    names = list(p.var_names)
    guards = " && ".join(
        f"{_format_affine(list(p.F.row(i)), Rational(0), names)} > {p.b[i]}" for i in range(p.m)
    )
    values = ", ".join(_format_affine(list(p.A.row(i)), p.c[i], names) for i in range(p.n))
    return f"vars {', '.join(names)};\nwhile ({guards}) {{\n  ({', '.join(names)}) := ({values});\n}}\n"


def _fresh_name(names: Sequence[str], base: str = "z_hom") -> str:
    candidate = base
    while candidate in names:
        candidate += "_"
    return candidate


def homogenize(p: LoopProgram) -> Tuple[LoopProgram, Embedding]:
    """
    Embed an affine loop into a generalized homogeneous loop of dimension n+1.

    A' = [[A, c], [0, 1]] and F' = [[F, -b], [0, 1]]; a point x of the source loop corresponds to (x, 1).

    Args:
        p: Source program

    Returns:
        Tuple (program, embedding); non-affine programs are returned unchanged
    """
    if p.class_tag != LoopClass.AFFINE:
        return p, Embedding(homogenized=False, original_dimension=p.n)
    n, m = p.n, p.m
    A_rows = [list(p.A.row(i)) + [p.c[i]] for i in range(n)] + [[0] * n + [1]]
    F_rows = [list(p.F.row(i)) + [-p.b[i]] for i in range(m)] + [[0] * n + [1]]
    constant_name = _fresh_name(p.var_names)
    homogeneous = build_program(
        list(p.var_names) + [constant_name],
        qmatrix(A_rows),
        qmatrix([[0]] * (n + 1)),
        qmatrix(F_rows),
        qmatrix([[0]] * (m + 1)),
        p.name,
    )
    logger.debug(f"Homogenized affine loop from dimension {n} to {n + 1}")
    return homogeneous, Embedding(homogenized=True, original_dimension=n, constant_name=constant_name)
