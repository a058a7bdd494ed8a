"""
Analyse du langage de commandes

Grammaire (instructions terminées par ';', commentaires '#') :

    group u > t;                      var x, y classical;
    a := expr;                        show expr depth N;
    coeffs expr grade N;              equal a, b at m;
    language F = {g: geom(x)} closed {ring, partial-truncation};
    closure-check F base {a, b} depth 2 probe 10 expect witnessed;

Expressions : rationnels 3/2, monômes t^(1/2)*u^2, + - *, fonctions
geom binom(λ) inv trunc vtrunc frag D xD blowA blowM comp interp dilate
reindex divm mulm. Les noms sont résolus à l'analyse : un nom libre lève
UnboundNameError avec sa position.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, NamedTuple, Optional, Set, Tuple

from src.cli.syntax import (
    EXPECTATIONS, Argument, Assign, BinOp, Binding, BinomCall, Call, ClosureCheck, Coeffs, DslProgram, Equal,
    Expr, GroupDecl, Infinity, Interval, LanguageDecl, Name, Neg, Number, Position, Power, Restriction, Show,
    Statement, VarDecl,
)
from src.utils.errors import DslSyntaxError, DslTypeError, UnboundNameError

FUNCTIONS = {
    'geom': ('expr',),
    'inv': ('expr',),
    'trunc': ('expr', 'expr'),
    'vtrunc': ('expr', 'class'),
    'frag': ('expr', 'pieces'),
    'D': ('expr', 'ident'),
    'xD': ('expr', 'ident'),
    'blowA': ('expr', 'fresh', 'ident', 'expr'),
    'blowM': ('expr', 'fresh', 'ident'),
    'comp': ('expr', 'binding'),
    'interp': ('expr', 'bindings'),
    'dilate': ('expr', 'ident', 'expr'),
    'reindex': ('expr', 'fresh'),
    'divm': ('expr', 'expr'),
    'mulm': ('expr', 'expr'),
}

KEYWORDS = frozenset({
    'group', 'var', 'classical', 'show', 'depth', 'coeffs', 'grade', 'equal', 'at', 'language',
    'closed', 'base', 'probe', 'expect', 'inf', 'in', 'deg', 'binom',
}) | frozenset(FUNCTIONS)

_TOKEN = re.compile(r"""
    (?P<space>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|:=|[;,()\[\]{}+\-*^>:=])
""", re.VERBOSE)


class Token(NamedTuple):
    kind: str
    text: str
    pos: Position


def tokenize(source: str) -> List[Token]:
    """
    Raises:
        DslSyntaxError: caractère inattendu
    """
    tokens: List[Token] = []
    line, line_start, index = 1, 0, 0
    while index < len(source):
        match = _TOKEN.match(source, index)
        column = index - line_start + 1
        if match is None:
            raise DslSyntaxError(f"Caractère inattendu {source[index]!r}", line, column)
        kind = match.lastgroup
        if kind == 'newline':
            line, line_start = line + 1, match.end()
        elif kind not in ('space', 'comment'):
            tokens.append(Token(kind, match.group(), Position(line, column)))
        index = match.end()
    tokens.append(Token('eof', '', Position(line, index - line_start + 1)))
    return tokens


@dataclass
class Scope:
    """Noms connus de l'analyseur"""

    generators: Tuple[str, ...] = ()
    variables: Set[str] = field(default_factory=set)
    bound: Set[str] = field(default_factory=set)
    languages: Set[str] = field(default_factory=set)

    def copy(self) -> "Scope":
        return Scope(self.generators, set(self.variables), set(self.bound), set(self.languages))

    def resolves(self, name: str) -> bool:
        return name in self.generators or name in self.variables or name in self.bound

    def update(self, other: "Scope") -> None:
        self.generators = other.generators
        self.variables, self.bound, self.languages = other.variables, other.bound, other.languages


class Parser:
    def __init__(self, source: str, scope: Scope):
        self.tokens = tokenize(source)
        self.index = 0
        self.scope = scope

    # Jetons

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        if token.kind != 'eof':
            self.index += 1
        return token

    def at(self, text: str, offset: int = 0) -> bool:
        token = self.peek(offset)
        return token.kind in ('op', 'ident') and token.text == text

    def error(self, message: str, token: Optional[Token] = None) -> DslSyntaxError:
        token = token or self.peek()
        found = "fin du texte" if token.kind == 'eof' else repr(token.text)
        return DslSyntaxError(f"{message}, trouvé {found}", *token.pos)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"'{text}' attendu")
        return self.advance()

    def identifier(self) -> Token:
        if self.peek().kind != 'ident':
            raise self.error("Identifiant attendu")
        return self.advance()

    def fresh_name(self, what: str) -> Token:
        token = self.identifier()
        if token.text in KEYWORDS:
            raise DslSyntaxError(f"Mot réservé utilisé comme {what}: {token.text}", *token.pos)
        return token

    def integer(self) -> int:
        value = self.rational()
        if value.denominator != 1 or value < 0:
            raise DslSyntaxError(f"Entier positif attendu: {value}", *self.peek(-1).pos)
        return int(value)

    def rational(self) -> Fraction:
        token = self.peek()
        if token.kind != 'number':
            raise self.error("Nombre attendu")
        self.advance()
        try:
            return Fraction(token.text)
        except ZeroDivisionError:
            raise DslSyntaxError(f"Dénominateur nul: {token.text}", *token.pos) from None

    def signed_rational(self) -> Fraction:
        if self.at('-'):
            self.advance()
            return -self.rational()
        return self.rational()

    def word(self) -> str:
        """Mot composé à tirets : partial-truncation"""
        parts = [self.identifier().text]
        while self.at('-') and self.peek(1).kind == 'ident':
            self.advance()
            parts.append(self.advance().text)
        return "-".join(parts)

    # Programme

    def program(self) -> DslProgram:
        statements: List[Statement] = []
        while self.peek().kind != 'eof':
            statements.append(self.statement())
        return DslProgram(tuple(statements))

    def statement(self) -> Statement:
        token = self.peek()
        pos = token.pos
        if token.kind != 'ident':
            raise self.error("Instruction attendue")
        if token.text == 'group':
            return self.group_decl(pos)
        if token.text == 'var':
            return self.var_decl(pos)
        if token.text == 'show':
            self.advance()
            expr = self.expr()
            depth = None
            if self.at('depth'):
                self.advance()
                depth = self.integer()
            self.expect(';')
            return Show(expr, depth, pos)
        if token.text == 'coeffs':
            self.advance()
            expr = self.expr()
            self.expect('grade')
            grade = self.rational()
            self.expect(';')
            return Coeffs(expr, grade, pos)
        if token.text == 'equal':
            self.advance()
            left = self.expr()
            self.expect(',')
            right = self.expr()
            self.expect('at')
            at = self.expr()
            self.expect(';')
            return Equal(left, right, at, pos)
        if token.text == 'language':
            return self.language_decl(pos)
        if token.text == 'closure' and self.at('-', 1) and self.at('check', 2):
            return self.closure_check(pos)
        if self.at(':=', 1):
            return self.assignment(pos)
        raise self.error("Instruction attendue")

    def _claim(self, token: Token, what: str, rebind: bool = False) -> str:
        name = token.text
        taken = (name in self.scope.generators or name in self.scope.variables or name in self.scope.languages
                 or (name in self.scope.bound and not rebind))
        if taken:
            raise DslTypeError(f"Nom déjà utilisé: {name}", *token.pos)
        if name in KEYWORDS:
            raise DslSyntaxError(f"Mot réservé utilisé comme {what}: {name}", *token.pos)
        return name

    def group_decl(self, pos: Position) -> GroupDecl:
        self.advance()
        if self.scope.generators:
            raise DslTypeError("Groupe de monômes déjà déclaré", *pos)
        names = [self._claim(self.identifier(), "générateur")]
        while self.at('>'):
            self.advance()
            token = self.identifier()
            if token.text in names:
                raise DslTypeError(f"Générateur dupliqué: {token.text}", *token.pos)
            names.append(self._claim(token, "générateur"))
        self.expect(';')
        self.scope.generators = tuple(names)
        return GroupDecl(tuple(names), pos)

    def var_decl(self, pos: Position) -> VarDecl:
        self.advance()
        names = [self._claim(self.identifier(), "variable")]
        while self.at(','):
            self.advance()
            names.append(self._claim(self.identifier(), "variable"))
        classical = False
        if self.at('classical'):
            self.advance()
            classical = True
        self.expect(';')
        self.scope.variables.update(names)
        return VarDecl(tuple(names), classical, pos)

    def assignment(self, pos: Position) -> Assign:
        name = self._claim(self.advance(), "nom", rebind=True)
        self.expect(':=')
        expr = self.expr()
        self.expect(';')
        self.scope.bound.add(name)
        return Assign(name, expr, pos)

    def language_decl(self, pos: Position) -> LanguageDecl:
        self.advance()
        name = self._claim(self.identifier(), "langage")
        self.expect('=')
        self.expect('{')
        members: List[Tuple[str, Expr]] = []
        labels: Set[str] = set()
        while not self.at('}'):
            if members:
                self.expect(',')
            label = self.fresh_name("étiquette")
            if label.text in labels:
                raise DslTypeError(f"Étiquette dupliquée: {label.text}", *label.pos)
            labels.add(label.text)
            self.expect(':')
            members.append((label.text, self.expr()))
        self.expect('}')
        self.expect('closed')
        self.expect('{')
        flags: List[str] = []
        while not self.at('}'):
            if flags:
                self.expect(',')
            flags.append(self.word())
        self.expect('}')
        self.expect(';')
        self.scope.languages.add(name)
        return LanguageDecl(name, tuple(members), tuple(flags), pos)

    def closure_check(self, pos: Position) -> ClosureCheck:
        for _ in range(3):
            self.advance()
        token = self.identifier()
        if token.text not in self.scope.languages:
            raise UnboundNameError(f"Langage inconnu: {token.text}", *token.pos)
        self.expect('base')
        self.expect('{')
        base: List[str] = []
        while not self.at('}'):
            if base:
                self.expect(',')
            item = self.identifier()
            if item.text not in self.scope.bound:
                raise UnboundNameError(f"Nom non lié: {item.text}", *item.pos)
            base.append(item.text)
        self.expect('}')
        depth = probe = expect = None
        if self.at('depth'):
            self.advance()
            depth = self.integer()
        if self.at('probe'):
            self.advance()
            probe = self.integer()
        if self.at('expect'):
            self.advance()
            word = self.identifier()
            if word.text not in EXPECTATIONS:
                raise DslSyntaxError(f"Attente inconnue: {word.text}", *word.pos)
            expect = word.text
        self.expect(';')
        return ClosureCheck(token.text, tuple(base), depth, probe, expect, pos)

    # Expressions

    def expr(self) -> Expr:
        left = self.term()
        while self.at('+') or self.at('-'):
            op = self.advance()
            left = BinOp(op.text, left, self.term(), op.pos)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.at('*'):
            op = self.advance()
            left = BinOp('*', left, self.unary(), op.pos)
        return left

    def unary(self) -> Expr:
        if self.at('-'):
            token = self.advance()
            return Neg(self.unary(), token.pos)
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if not self.at('^'):
            return base
        token = self.advance()
        if self.at('('):
            self.advance()
            exponent = self.signed_rational()
            self.expect(')')
        else:
            exponent = self.rational()
        return Power(base, exponent, token.pos)

    def primary(self) -> Expr:
        token = self.peek()
        if token.kind == 'number':
            return Number(self.rational(), token.pos)
        if self.at('('):
            self.advance()
            inner = self.expr()
            self.expect(')')
            return inner
        if token.kind != 'ident':
            raise self.error("Expression attendue")
        self.advance()
        if token.text == 'binom':
            self.expect('(')
            exponent = self.signed_rational()
            self.expect(')')
            self.expect('(')
            arg = self.expr()
            self.expect(')')
            return BinomCall(exponent, arg, token.pos)
        if token.text in FUNCTIONS:
            return self.call(token)
        if token.text in KEYWORDS:
            raise DslSyntaxError(f"Mot réservé dans une expression: {token.text}", *token.pos)
        if self.at('('):
            raise DslSyntaxError(f"Fonction inconnue: {token.text}", *token.pos)
        if not self.scope.resolves(token.text):
            raise UnboundNameError(f"Nom non lié: {token.text}", *token.pos)
        return Name(token.text, token.pos)

    def call(self, token: Token) -> Call:
        self.expect('(')
        args: List[Argument] = []
        for i, kind in enumerate(FUNCTIONS[token.text]):
            if i:
                self.expect(',')
            if kind in ('bindings', 'pieces'):
                args.append(self.argument(kind))
                while self.at(','):
                    self.advance()
                    args.append(self.argument(kind))
            else:
                args.append(self.argument(kind))
        self.expect(')')
        return Call(token.text, tuple(args), token.pos)

    def argument(self, kind: str) -> Argument:
        token = self.peek()
        if kind == 'expr':
            return self.expr()
        if kind == 'ident':
            ident = self.identifier()
            return Name(ident.text, ident.pos)
        if kind == 'class':
            if self.at('inf'):
                self.advance()
                return Infinity(token.pos)
            return Number(Fraction(self.integer()), token.pos)
        if kind in ('binding', 'bindings', 'fresh'):
            name = self.identifier()
            self.expect('->')
            if kind == 'fresh':
                target = self.fresh_name("variable")
                return Binding(name.text, Name(target.text, target.pos), name.pos)
            return Binding(name.text, self.expr(), name.pos)
        if kind == 'pieces':
            if self.at('[') or self.at('('):
                return self.interval()
            name = self.identifier()
            self.expect('in')
            return Restriction(name.text, self.interval(), name.pos)
        raise ValueError(f"Genre d'argument inconnu: {kind}")

    def interval(self) -> Interval:
        opening = self.advance()
        if opening.text not in ('[', '('):
            raise self.error("'[' ou '(' attendu", opening)
        lower: Optional[Expr] = None
        if self.at('-') and self.at('inf', 1):
            self.advance()
            self.advance()
        else:
            lower = self.expr()
        self.expect(',')
        upper: Optional[Expr] = None
        if self.at('inf'):
            self.advance()
        else:
            upper = self.expr()
        closing = self.advance()
        if closing.text not in (']', ')'):
            raise self.error("']' ou ')' attendu", closing)
        return Interval(lower, upper, lower is not None and opening.text == '[',
                        upper is not None and closing.text == ']', opening.pos)


def parse(source: str, scope: Optional[Scope] = None) -> DslProgram:
    """
    Analyse un texte complet.

    La portée fournie n'est mise à jour qu'en cas de succès.

    Raises:
        DslSyntaxError: syntaxe invalide
        UnboundNameError: nom utilisé avant d'être lié
        DslTypeError: redéclaration
    """
    working = scope.copy() if scope is not None else Scope()
    program = Parser(source, working).program()
    if scope is not None:
        scope.update(working)
    return program
