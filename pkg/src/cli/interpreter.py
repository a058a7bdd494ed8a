"""
Exécution des programmes du langage de commandes

Chaque commande (show, coeffs, equal, closure-check) produit un
enregistrement ; les déclarations et affectations n'en produisent qu'en cas
d'erreur. Une erreur ou un budget épuisé est enregistré et l'exécution
continue avec l'instruction suivante.
"""

import json
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Set, Tuple

from src.cli.syntax import (
    Assign, BinOp, BinomCall, Call, ClosureCheck, Coeffs, DslProgram, Equal, Expr, GroupDecl,
    Infinity, Interval, LanguageDecl, Name, Neg, Number, Position, Power, Restriction, Show, Statement, VarDecl,
    format_statement,
)
from src.closure.checker import ClosureReport, check_truncation_closed
from src.closure.generation import generate
from src.closure.language import LanguageF, make_Fb
from src.gps.blowups import blowup_affine, blowup_mult, compose_classical, compose_pcomp, dilate
from src.gps.expr import (
    Binomial, FiniteSeries, FragmentSpec, Geometric, GpsExpr, constant as gps_constant, derivative,
    fragment_gps, monomial_divide, monomial_multiply, power as gps_power, reindex, renorm_derivative,
    variable,
)
from src.gps.interpretation import interpret
from src.order.exponents import format_rational, rational_power
from src.order.monomials import INFINITE_CLASS, ArchClass, Monomial, MonomialGroup
from src.order.segmentation import Segment
from src.series.budget import observation
from src.series.hahn import (
    HahnSeries, Listing, SegmentSet, add, constant, eq_to_monomial, fragment, invert_unit, listing, monomial,
    mul, neg, sub, truncate, v_truncate,
)
from src.utils.errors import (
    BudgetExhaustedError, DslError, DslTypeError, HahnforgeError, NotInvertibleError, UnboundNameError,
)
from src.utils.logger import get_logger
from src.utils.settings import default_budget, get_setting

logger = get_logger(__name__)

STATUSES = ('ok', 'budget', 'error')


class OutputRecord(NamedTuple):
    """Écho de la commande, statut, lignes de texte et contenu JSON"""

    command: str
    status: str
    lines: Tuple[str, ...]
    payload: dict
    steps: int

    def to_json(self) -> dict:
        return {'command': self.command, 'status': self.status, 'result': self.payload, 'steps': self.steps}

    def render(self) -> str:
        return f"> {self.command}\n" + "".join(line + "\n" for line in self.lines)


def render_text(records: Sequence[OutputRecord]) -> str:
    return "".join(record.render() for record in records)


def render_json(records: Sequence[OutputRecord]) -> str:
    return json.dumps([r.to_json() for r in records], indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def has_errors(records: Sequence[OutputRecord]) -> bool:
    return any(r.status == 'error' for r in records)


def _kind(value) -> str:
    if isinstance(value, Fraction):
        return "scalaire"
    if isinstance(value, Monomial):
        return "monôme"
    if isinstance(value, HahnSeries):
        return "série de Hahn"
    if isinstance(value, GpsExpr):
        return "série généralisée"
    if isinstance(value, LanguageF):
        return "langage"
    return type(value).__name__


class Interpreter:
    """État d'exécution : groupe, variables déclarées, valeurs liées, langages"""

    def __init__(self, budget: Optional[int] = None, depth: Optional[int] = None):
        self.budget = budget
        self.depth = depth
        self.group: Optional[MonomialGroup] = None
        self.variables: Set[str] = set()
        self.classical: Set[str] = set()
        self.values: Dict[str, object] = {}
        self.languages: Dict[str, LanguageF] = {}

    # Exécution

    def run(self, program: DslProgram) -> List[OutputRecord]:
        records = []
        for statement in program:
            record = self.execute(statement)
            if record is not None:
                records.append(record)
        return records

    def execute(self, statement: Statement) -> Optional[OutputRecord]:
        command = format_statement(statement)
        limit = self.budget if self.budget is not None else default_budget()
        steps = 0
        try:
            with observation(limit) as budget:
                try:
                    result = self._dispatch(statement)
                finally:
                    steps = budget.steps
        except BudgetExhaustedError as e:
            logger.warning(f"Budget épuisé: {command}")
            lines = self._partial_lines(e.partial)
            lines.append(f"! budget épuisé (limite {e.limit})")
            payload = {'budget_limit': e.limit}
            if isinstance(e.partial, Listing):
                payload.update(e.partial.to_json())
            return OutputRecord(command, 'budget', tuple(lines), payload, steps)
        except DslError as e:
            return self._error(command, e, Position(e.line, e.column), steps)
        except (HahnforgeError, ValueError, ZeroDivisionError) as e:
            return self._error(command, e, statement.pos, steps)
        if result is None:
            return None
        lines, payload, status = result
        return OutputRecord(command, status, tuple(lines), payload, steps)

    @staticmethod
    def _partial_lines(partial) -> List[str]:
        if isinstance(partial, Listing):
            return [str(t) for t in partial.terms]
        return []

    @staticmethod
    def _error(command: str, error: Exception, pos: Position, steps: int) -> OutputRecord:
        name = type(error).__name__
        message = error.message if isinstance(error, DslError) else str(error)
        logger.error(f"{name} ({pos}): {message}")
        payload = {'error': name, 'message': message, 'line': pos.line, 'column': pos.column}
        return OutputRecord(command, 'error', (f"! {name}: {message} ({pos})",), payload, steps)

    def _dispatch(self, statement: Statement):
        if isinstance(statement, GroupDecl):
            self.group = MonomialGroup(statement.names)
            logger.debug(f"Groupe déclaré: {self.group}")
            return None
        if isinstance(statement, VarDecl):
            self.variables.update(statement.names)
            if statement.classical:
                self.classical.update(statement.names)
            return None
        if isinstance(statement, Assign):
            self.values[statement.name] = self.evaluate(statement.expr)
            return None
        if isinstance(statement, Show):
            return self._show(statement)
        if isinstance(statement, Coeffs):
            f = self._gps(self.evaluate(statement.expr), statement.expr)
            lines = f.grade_lines(statement.grade)
            return lines or ["0"], {'expression': f.describe(), 'grade': format_rational(statement.grade),
                                   'terms': lines}, 'ok'
        if isinstance(statement, Equal):
            left = self._hahn(self.evaluate(statement.left), statement.left)
            right = self._hahn(self.evaluate(statement.right), statement.right)
            m = self._monomial(self.evaluate(statement.at), statement.at)
            equal = eq_to_monomial(left, right, m)
            return ["true" if equal else "false"], {'equal': equal, 'threshold': str(m)}, 'ok'
        if isinstance(statement, LanguageDecl):
            self._declare_language(statement)
            return None
        if isinstance(statement, ClosureCheck):
            return self._closure_check(statement)
        raise TypeError(f"Instruction inconnue: {statement!r}")

    def _show(self, statement: Show):
        value = self.evaluate(statement.expr)
        depth = statement.depth
        if depth is None:
            depth = self.depth if self.depth is not None else int(get_setting("series.show_depth", 10))
        if isinstance(value, Fraction):
            text = format_rational(value)
            return [text], {'scalar': text}, 'ok'
        if isinstance(value, Monomial):
            return [str(value)], {'monomial': str(value),
                                  'exponents': [format_rational(e) for e in value.exponents]}, 'ok'
        if isinstance(value, HahnSeries):
            observed = listing(value, depth)
            lines = [str(t) for t in observed.terms] or ["0"]
            lines.append(f"exhausted: {'true' if observed.exhausted else 'false'}")
            return lines, observed.to_json(), 'ok'
        if isinstance(value, GpsExpr):
            lines = value.grade_lines(depth)
            return lines or ["0"], {'expression': value.describe(), 'grade': depth, 'terms': lines}, 'ok'
        raise DslTypeError(f"Valeur non affichable: {_kind(value)}", *statement.expr.pos)

    def _declare_language(self, statement: LanguageDecl) -> None:
        generators = {label: self._gps(self.evaluate(expr), expr) for label, expr in statement.members}
        flags = frozenset(statement.flags)
        if 'blowups' in flags:
            language = make_Fb(LanguageF(generators, flags - {'blowups'}, statement.name))
        else:
            language = LanguageF(generators, flags, statement.name)
        self.languages[statement.name] = language
        logger.info(f"Langage {language.name}: {len(generators)} générateurs, drapeaux {sorted(language.flags)}")

    def _closure_check(self, statement: ClosureCheck):
        group = self._require_group(statement.pos)
        if statement.language not in self.languages:
            raise UnboundNameError(f"Langage sans valeur: {statement.language}", *statement.pos)
        language = self.languages[statement.language]
        base = {name: self._hahn(self._lookup(Name(name, statement.pos)), Name(name, statement.pos))
                for name in statement.base}
        depth = statement.depth
        if depth is None:
            depth = self.depth if self.depth is not None else int(get_setting("closure.depth", 3))
        probe_depth = statement.probe if statement.probe is not None else int(get_setting("closure.probe_depth", 10))
        generated = generate(base, language, depth, group=group, probe_depth=probe_depth)
        report = check_truncation_closed(generated, probe_depth=probe_depth, budget=self.budget,
                                         job_name=f"closure_{statement.language}")
        return self._report_lines(report, len(generated), statement.expect)

    @staticmethod
    def _report_lines(report: ClosureReport, size: int, expect: Optional[str]):
        counts = {status: sum(1 for e in report.entries if e.status == status)
                  for status in ('witnessed', 'failed', 'budget')}
        lines = [f"{report.language}: {size} éléments, {len(report.entries)} paires, "
                 f"{counts['witnessed']} witnessed, {counts['failed']} failed, {counts['budget']} budget"]
        for entry in report.failures():
            lines.append(f"  {entry.element_id} {entry.expression} @ {entry.probe}: {entry.status} ({entry.reason})")
        status = 'ok'
        if expect == 'witnessed' and not report.all_witnessed:
            status = 'error'
        if expect == 'failure' and counts['failed'] == 0:
            status = 'error'
        if status == 'error':
            lines.append(f"! attente non satisfaite: expect {expect}")
        return lines, report.to_json(), status

    # Conversions

    def _require_group(self, pos: Position) -> MonomialGroup:
        if self.group is None:
            raise DslTypeError("Aucun groupe de monômes déclaré", *pos)
        return self.group

    def _hahn(self, value, node) -> HahnSeries:
        if isinstance(value, HahnSeries):
            return value
        if isinstance(value, Monomial):
            return monomial(value)
        if isinstance(value, Fraction):
            return constant(self._require_group(node.pos), value)
        raise DslTypeError(f"Série de Hahn attendue, reçu {_kind(value)}", *node.pos)

    def _gps(self, value, node) -> GpsExpr:
        if isinstance(value, GpsExpr):
            return value
        if isinstance(value, Fraction):
            return gps_constant(value)
        raise DslTypeError(f"Série généralisée attendue, reçu {_kind(value)}", *node.pos)

    def _scalar(self, value, node) -> Fraction:
        if isinstance(value, Fraction):
            return value
        raise DslTypeError(f"Scalaire attendu, reçu {_kind(value)}", *node.pos)

    def _monomial(self, value, node) -> Monomial:
        if isinstance(value, Monomial):
            return value
        if value == 1:
            return self._require_group(node.pos).identity()
        raise DslTypeError(f"Monôme attendu, reçu {_kind(value)}", *node.pos)

    def _gps_monomial(self, value, node) -> Dict[str, Fraction]:
        if isinstance(value, FiniteSeries) and len(value.points) == 1:
            (point, c), = value.points.items()
            if c == 1:
                return dict(zip(value.variables, point))
        raise DslTypeError("Monôme en les variables attendu", *node.pos)

    # Évaluation

    def evaluate(self, expr: Expr):
        if isinstance(expr, Number):
            return expr.value
        if isinstance(expr, Name):
            return self._lookup(expr)
        if isinstance(expr, Neg):
            value = self.evaluate(expr.operand)
            if isinstance(value, (Fraction, GpsExpr)):
                return -value
            if isinstance(value, Monomial):
                return monomial(value, -1)
            return neg(self._hahn(value, expr))
        if isinstance(expr, BinOp):
            return self._binop(expr, self.evaluate(expr.left), self.evaluate(expr.right))
        if isinstance(expr, Power):
            return self._power(expr)
        if isinstance(expr, BinomCall):
            return self._family(expr.arg, lambda name, classical: Binomial(expr.exponent, name, classical))
        if isinstance(expr, Call):
            return self._call(expr)
        if isinstance(expr, Infinity):
            raise DslTypeError("'inf' n'est admis que dans vtrunc et les segments", *expr.pos)
        raise TypeError(f"Expression inconnue: {expr!r}")

    def _lookup(self, node: Name):
        if node.name in self.values:
            return self.values[node.name]
        if node.name in self.variables:
            return variable(node.name, classical=node.name in self.classical)
        if self.group is not None and node.name in self.group.generator_names:
            return self.group.generator(node.name)
        raise UnboundNameError(f"Nom sans valeur: {node.name}", *node.pos)

    def _binop(self, node: BinOp, left, right):
        op = node.op
        if isinstance(left, Fraction) and isinstance(right, Fraction):
            if op == '+':
                return left + right
            return left - right if op == '-' else left * right
        if op == '*' and isinstance(left, Monomial) and isinstance(right, Monomial):
            return left * right
        if isinstance(left, GpsExpr) or isinstance(right, GpsExpr):
            a, b = self._gps(left, node.left), self._gps(right, node.right)
            if op == '+':
                return a + b
            return a - b if op == '-' else a * b
        if op == '*' and {type(left), type(right)} == {Fraction, Monomial}:
            m, c = (left, right) if isinstance(left, Monomial) else (right, left)
            return monomial(m, c)
        a, b = self._hahn(left, node.left), self._hahn(right, node.right)
        if op == '+':
            return add(a, b)
        return sub(a, b) if op == '-' else mul(a, b)

    def _power(self, node: Power):
        q = node.exponent
        base = node.base
        if isinstance(base, Name) and base.name in self.variables:
            return gps_power(base.name, q, classical=base.name in self.classical)
        value = self.evaluate(base)
        if isinstance(value, Fraction):
            return rational_power(value, q)
        if isinstance(value, Monomial):
            return value ** q
        if q.denominator != 1:
            raise DslTypeError(f"Puissance non entière d'une {_kind(value)}", *node.pos)
        if isinstance(value, GpsExpr):
            if q < 0:
                raise DslTypeError("Puissance négative d'une série généralisée", *node.pos)
            result: GpsExpr = gps_constant(1)
            for _ in range(q.numerator):
                result = result * value
            return result
        series = self._hahn(value, base)
        if q < 0:
            series = invert_unit(series)
        result_series = constant(series.group, 1)
        for _ in range(abs(q.numerator)):
            result_series = mul(result_series, series)
        return result_series

    def _family(self, arg: Expr, build):
        """geom et binom : en une variable déclarée, ou évaluées en une série infinitésimale"""
        if isinstance(arg, Name) and arg.name in self.variables:
            return build(arg.name, arg.name in self.classical)
        value = self.evaluate(arg)
        if isinstance(value, GpsExpr):
            raise DslTypeError("Variable ou série de Hahn attendue", *arg.pos)
        series = self._hahn(value, arg)
        return interpret(build('x', True), {'x': series}, group=series.group)

    def _call(self, node: Call):
        func, args = node.func, node.args
        if func == 'geom':
            return self._family(args[0], lambda name, classical: Geometric(name, classical))
        if func == 'inv':
            value = self.evaluate(args[0])
            if isinstance(value, Fraction):
                if value == 0:
                    raise NotInvertibleError("0 n'est pas inversible")
                return 1 / value
            if isinstance(value, Monomial):
                return value.inverse()
            return invert_unit(self._hahn(value, args[0]))
        if func == 'trunc':
            return truncate(self._hahn(self.evaluate(args[0]), args[0]),
                            self._monomial(self.evaluate(args[1]), args[1]))
        if func == 'vtrunc':
            series = self._hahn(self.evaluate(args[0]), args[0])
            return v_truncate(series, self._arch_class(args[1], series.group))
        if func == 'frag':
            return self._fragment(node)
        if func in ('D', 'xD'):
            f = self._gps(self.evaluate(args[0]), args[0])
            return (derivative if func == 'D' else renorm_derivative)(f, args[1].name)
        if func in ('blowA', 'blowM'):
            f = self._gps(self.evaluate(args[0]), args[0])
            binding, z1 = args[1], args[2]
            if func == 'blowM':
                return blowup_mult(f, binding.name, binding.value.name, z1.name)
            k = self._scalar(self.evaluate(args[3]), args[3])
            return blowup_affine(f, binding.name, binding.value.name, z1.name, k)
        if func == 'comp':
            f = self._gps(self.evaluate(args[0]), args[0])
            binding = args[1]
            g = self._gps(self.evaluate(binding.value), binding.value)
            if binding.name in f.classical:
                return compose_classical(f, binding.name, g)
            return compose_pcomp(f, binding.name, g)
        if func == 'interp':
            f = self._gps(self.evaluate(args[0]), args[0])
            group = self._require_group(node.pos)
            assignment = {b.name: self._hahn(self.evaluate(b.value), b.value) for b in args[1:]}
            return interpret(f, assignment, group=group)
        if func == 'dilate':
            f = self._gps(self.evaluate(args[0]), args[0])
            return dilate(f, args[1].name, self._scalar(self.evaluate(args[2]), args[2]))
        if func == 'reindex':
            f = self._gps(self.evaluate(args[0]), args[0])
            return reindex(f, {args[1].name: args[1].value.name})
        if func in ('divm', 'mulm'):
            f = self._gps(self.evaluate(args[0]), args[0])
            exponents = self._gps_monomial(self.evaluate(args[1]), args[1])
            return monomial_divide(f, exponents) if func == 'divm' else monomial_multiply(f, exponents)
        raise DslTypeError(f"Fonction inconnue: {func}", *node.pos)

    def _arch_class(self, node: Expr, group: MonomialGroup) -> ArchClass:
        if isinstance(node, Infinity):
            return INFINITE_CLASS
        index = int(node.value)
        if not 0 <= index < group.rank:
            raise DslTypeError(f"Classe archimédienne hors de [0, {group.rank}): {index}", *node.pos)
        return ArchClass(index)

    def _segment(self, interval: Interval, convert) -> Segment:
        lower = None if interval.lower is None else convert(self.evaluate(interval.lower), interval.lower)
        upper = None if interval.upper is None else convert(self.evaluate(interval.upper), interval.upper)
        return Segment(lower, upper, interval.lower_closed, interval.upper_closed)

    def _fragment(self, node: Call):
        target = self.evaluate(node.args[0])
        pieces = node.args[1:]
        if isinstance(target, GpsExpr):
            per_variable, degree = [], None
            for piece in pieces:
                if not isinstance(piece, Restriction):
                    raise DslTypeError("Restriction 'x in [a, b)' attendue", *piece.pos)
                segment = self._segment(piece.interval, self._scalar)
                if piece.name == 'deg':
                    degree = segment
                else:
                    per_variable.append((piece.name, segment))
            spec = FragmentSpec(per_variable=tuple(sorted(per_variable, key=lambda item: item[0])), degree=degree)
            return fragment_gps(target, spec)
        series = self._hahn(target, node.args[0])
        segments = []
        for piece in pieces:
            if not isinstance(piece, Interval):
                raise DslTypeError("Segment de monômes attendu", *piece.pos)
            segments.append(self._segment(piece, self._monomial))
        return fragment(series, SegmentSet(tuple(segments)))


def run(program: DslProgram, budget: Optional[int] = None, depth: Optional[int] = None) -> List[OutputRecord]:
    """Exécute un programme dans un interpréteur neuf"""
    return Interpreter(budget=budget, depth=depth).run(program)
