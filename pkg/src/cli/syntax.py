"""
Arbre syntaxique du langage de commandes et impression canonique

Les positions (ligne, colonne) ne participent pas à l'égalité : un programme
réimprimé puis relu donne le même arbre.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Tuple, Union

from src.order.exponents import format_power, format_rational


class Position(NamedTuple):
    line: int
    column: int

    def __str__(self) -> str:
        return f"ligne {self.line}, colonne {self.column}"


NOWHERE = Position(0, 0)


def _pos():
    return field(default=NOWHERE, compare=False, repr=False)


# Expressions

@dataclass(frozen=True)
class Number:
    value: Fraction
    pos: Position = _pos()


@dataclass(frozen=True)
class Infinity:
    pos: Position = _pos()


@dataclass(frozen=True)
class Name:
    name: str
    pos: Position = _pos()


@dataclass(frozen=True)
class Power:
    base: "Expr"
    exponent: Fraction
    pos: Position = _pos()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    pos: Position = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Position = _pos()


@dataclass(frozen=True)
class Binding:
    """x->e dans comp, interp, reindex et les éclatements"""

    name: str
    value: "Expr"
    pos: Position = _pos()


@dataclass(frozen=True)
class Interval:
    """Segment ; une borne None est infinie"""

    lower: Optional["Expr"]
    upper: Optional["Expr"]
    lower_closed: bool
    upper_closed: bool
    pos: Position = _pos()


@dataclass(frozen=True)
class Restriction:
    """x in [a, b) ou deg in [a, b) dans frag"""

    name: str
    interval: Interval
    pos: Position = _pos()


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Argument", ...]
    pos: Position = _pos()


@dataclass(frozen=True)
class BinomCall:
    exponent: Fraction
    arg: "Expr"
    pos: Position = _pos()


Expr = Union[Number, Infinity, Name, Power, Neg, BinOp, Call, BinomCall]
Argument = Union[Expr, Binding, Interval, Restriction]


# Instructions

@dataclass(frozen=True)
class GroupDecl:
    names: Tuple[str, ...]
    pos: Position = _pos()


@dataclass(frozen=True)
class VarDecl:
    names: Tuple[str, ...]
    classical: bool
    pos: Position = _pos()


@dataclass(frozen=True)
class Assign:
    name: str
    expr: Expr
    pos: Position = _pos()


@dataclass(frozen=True)
class Show:
    expr: Expr
    depth: Optional[int]
    pos: Position = _pos()


@dataclass(frozen=True)
class Coeffs:
    expr: Expr
    grade: Fraction
    pos: Position = _pos()


@dataclass(frozen=True)
class Equal:
    left: Expr
    right: Expr
    at: Expr
    pos: Position = _pos()


@dataclass(frozen=True)
class LanguageDecl:
    name: str
    members: Tuple[Tuple[str, Expr], ...]
    flags: Tuple[str, ...]
    pos: Position = _pos()


@dataclass(frozen=True)
class ClosureCheck:
    language: str
    base: Tuple[str, ...]
    depth: Optional[int]
    probe: Optional[int]
    expect: Optional[str]
    pos: Position = _pos()


Statement = Union[GroupDecl, VarDecl, Assign, Show, Coeffs, Equal, LanguageDecl, ClosureCheck]

EXPECTATIONS = ('witnessed', 'failure')


@dataclass(frozen=True)
class DslProgram:
    statements: Tuple[Statement, ...]

    def __len__(self) -> int:
        return len(self.statements)

    def __iter__(self):
        return iter(self.statements)


# Impression

_PRECEDENCE = {'+': 1, '-': 1, '*': 2}
_UNARY = 3
_POWER = 4
_ATOM = 5


def _precedence(expr: Expr) -> int:
    if isinstance(expr, BinOp):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Neg):
        return _UNARY
    if isinstance(expr, Power):
        return _POWER
    return _ATOM


def _wrapped(expr: Expr, minimum: int) -> str:
    text = format_expr(expr)
    return f"({text})" if _precedence(expr) < minimum else text


def _format_bound(bound: Optional[Expr], negative: bool) -> str:
    if bound is None:
        return "-inf" if negative else "inf"
    return format_expr(bound)


def format_argument(arg: Argument) -> str:
    if isinstance(arg, Binding):
        return f"{arg.name}->{format_expr(arg.value)}"
    if isinstance(arg, Interval):
        left = "[" if arg.lower_closed and arg.lower is not None else "("
        right = "]" if arg.upper_closed and arg.upper is not None else ")"
        return f"{left}{_format_bound(arg.lower, True)}, {_format_bound(arg.upper, False)}{right}"
    if isinstance(arg, Restriction):
        return f"{arg.name} in {format_argument(arg.interval)}"
    return format_expr(arg)


def format_expr(expr: Expr) -> str:
    """Forme canonique, relue à l'identique par le parseur"""
    if isinstance(expr, Number):
        return format_rational(expr.value)
    if isinstance(expr, Infinity):
        return "inf"
    if isinstance(expr, Name):
        return expr.name
    if isinstance(expr, Power):
        return f"{_wrapped(expr.base, _ATOM)}^{format_power(expr.exponent)}"
    if isinstance(expr, Neg):
        return f"-{_wrapped(expr.operand, _UNARY)}"
    if isinstance(expr, BinOp):
        level = _PRECEDENCE[expr.op]
        right_level = level + 1 if expr.op != '*' else _UNARY
        return f"{_wrapped(expr.left, level)} {expr.op} {_wrapped(expr.right, right_level)}"
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(format_argument(a) for a in expr.args)})"
    if isinstance(expr, BinomCall):
        return f"binom({format_rational(expr.exponent)})({format_expr(expr.arg)})"
    raise TypeError(f"Expression inconnue: {expr!r}")


def format_statement(statement: Statement) -> str:
    if isinstance(statement, GroupDecl):
        return f"group {' > '.join(statement.names)};"
    if isinstance(statement, VarDecl):
        suffix = " classical" if statement.classical else ""
        return f"var {', '.join(statement.names)}{suffix};"
    if isinstance(statement, Assign):
        return f"{statement.name} := {format_expr(statement.expr)};"
    if isinstance(statement, Show):
        depth = f" depth {statement.depth}" if statement.depth is not None else ""
        return f"show {format_expr(statement.expr)}{depth};"
    if isinstance(statement, Coeffs):
        return f"coeffs {format_expr(statement.expr)} grade {format_rational(statement.grade)};"
    if isinstance(statement, Equal):
        return f"equal {format_expr(statement.left)}, {format_expr(statement.right)} at {format_expr(statement.at)};"
    if isinstance(statement, LanguageDecl):
        members = ", ".join(f"{label}: {format_expr(e)}" for label, e in statement.members)
        return f"language {statement.name} = {{{members}}} closed {{{', '.join(statement.flags)}}};"
    if isinstance(statement, ClosureCheck):
        parts = [f"closure-check {statement.language} base {{{', '.join(statement.base)}}}"]
        if statement.depth is not None:
            parts.append(f"depth {statement.depth}")
        if statement.probe is not None:
            parts.append(f"probe {statement.probe}")
        if statement.expect is not None:
            parts.append(f"expect {statement.expect}")
        return " ".join(parts) + ";"
    raise TypeError(f"Instruction inconnue: {statement!r}")


def format_program(program: DslProgram) -> str:
    return "".join(format_statement(s) + "\n" for s in program)
