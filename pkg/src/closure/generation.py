"""
Génération bornée de ⟨X ∪ 𝔐 ∪ 𝕂⟩_ℱ

Chaque élément est une expression sur X, les scalaires, les générateurs de
𝔐, les opérations d'anneau et les applications de membres de ℱ à des
arguments en forme normale. Les valeurs sont dédupliquées par égalité à
seuil sur `probe_depth` termes.
"""

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as cartesian
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from src.closure.language import LanguageF
from src.gps.expr import GpsExpr
from src.gps.interpretation import interpret
from src.order.exponents import RationalLike, as_rational, format_rational
from src.order.monomials import Monomial, MonomialGroup
from src.series.budget import observation
from src.series.hahn import (
    HahnSeries, Term, add, constant, leading_term, listing, monomial, mul, probe_equal, take_terms,
    truncate,
)
from src.utils.errors import HahnforgeError, NotTruncationClosedError
from src.utils.logger import get_logger
from src.utils.settings import default_budget, get_setting

logger = get_logger(__name__)


class Element(ABC):
    """Expression d'un élément engendré ; valeur calculée une fois"""

    kind = "element"

    def __init__(self, depth: int):
        self.depth = depth
        self.element_id = ""
        self._value: Optional[HahnSeries] = None
        self._lock = threading.Lock()

    @property
    def value(self) -> HahnSeries:
        with self._lock:
            if self._value is None:
                self._value = self._compute()
            return self._value

    @abstractmethod
    def _compute(self) -> HahnSeries:
        pass

    @abstractmethod
    def describe(self) -> str:
        pass

    def children(self) -> Tuple["Element", ...]:
        return ()

    def __repr__(self) -> str:
        return f"{self.element_id or self.kind}: {self.describe()}"


class BaseRef(Element):
    kind = "base"

    def __init__(self, name: str, series: HahnSeries):
        super().__init__(0)
        self.name, self.series = name, series

    def _compute(self) -> HahnSeries:
        return self.series

    def describe(self) -> str:
        return self.name


class ScalarLeaf(Element):
    kind = "scalar"

    def __init__(self, group: MonomialGroup, c: RationalLike):
        super().__init__(0)
        self.group, self.c = group, as_rational(c)

    def _compute(self) -> HahnSeries:
        return constant(self.group, self.c)

    def describe(self) -> str:
        return format_rational(self.c)


class MonomialLeaf(Element):
    kind = "monomial"

    def __init__(self, m: Monomial):
        super().__init__(0)
        self.m = m

    def _compute(self) -> HahnSeries:
        return monomial(self.m)

    def describe(self) -> str:
        return str(self.m)


class Plus(Element):
    kind = "plus"

    def __init__(self, left: Element, right: Element):
        super().__init__(1 + max(left.depth, right.depth))
        self.left, self.right = left, right

    def _compute(self) -> HahnSeries:
        return add(self.left.value, self.right.value)

    def children(self):
        return (self.left, self.right)

    def describe(self) -> str:
        return f"({self.left.describe()} + {self.right.describe()})"


class Times(Element):
    kind = "times"

    def __init__(self, left: Element, right: Element):
        super().__init__(1 + max(left.depth, right.depth))
        self.left, self.right = left, right

    def _compute(self) -> HahnSeries:
        return mul(self.left.value, self.right.value)

    def children(self):
        return (self.left, self.right)

    def describe(self) -> str:
        return f"{self.left.describe()} * {self.right.describe()}"


class Apply(Element):
    """f(a_1, ..., a_n) pour un membre f de ℱ"""

    kind = "apply"

    def __init__(self, member_name: str, member: GpsExpr, arguments: Sequence[Element], group: MonomialGroup):
        super().__init__(1 + max((a.depth for a in arguments), default=0))
        self.member_name, self.member = member_name, member
        self.arguments = tuple(arguments)
        self.group = group

    def _compute(self) -> HahnSeries:
        assignment = dict(zip(self.member.variables, (a.value for a in self.arguments)))
        return interpret(self.member, assignment, group=self.group)

    def children(self):
        return self.arguments

    def describe(self) -> str:
        return f"{self.member_name}({', '.join(a.describe() for a in self.arguments)})"


def admissible_argument(value: HahnSeries, classical: bool) -> bool:
    """Valeur 𝔪(k + ε) avec 𝔪 < 1 et k > 0, ou infinitésimale pour une variable classique"""
    one = value.group.identity()
    with observation():
        lead = leading_term(value)
    if lead is None:
        return classical
    if classical and lead.monomial < one:
        return True
    return lead.monomial < one and lead.coeff > 0


@dataclass
class GeneratedSet:
    group: MonomialGroup
    base: Dict[str, HahnSeries]
    language: LanguageF
    depth: int
    probe_depth: int
    elements: List[Element] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def element(self, element_id: str) -> Element:
        for e in self.elements:
            if e.element_id == element_id:
                return e
        raise KeyError(element_id)

    def find(self, series: HahnSeries) -> Optional[Element]:
        """Élément égal à `series` sur probe_depth termes"""
        for e in self.elements:
            if probe_equal(e.value, series, self.probe_depth):
                return e
        return None

    def to_json(self) -> dict:
        return {
            'language': self.language.name,
            'depth': self.depth,
            'probe_depth': self.probe_depth,
            'elements': [{'element_id': e.element_id, 'expression': e.describe(), 'depth': e.depth}
                         for e in self.elements],
        }


def check_base_closed(base: Mapping[str, HahnSeries], probe_depth: int) -> None:
    """
    Chaque troncature sondée d'un élément de X revient dans X ou est finie.

    Raises:
        NotTruncationClosedError: troncature hors de X et non finie
    """
    for name, x in sorted(base.items()):
        for term in take_terms(x, probe_depth):
            piece = truncate(x, term.monomial)
            if listing(piece, probe_depth).exhausted:
                continue
            if any(probe_equal(piece, y, probe_depth) for y in base.values()):
                continue
            raise NotTruncationClosedError(f"{name} tronqué en {term.monomial} n'est pas dans X")
    logger.debug(f"Ensemble de base clos par troncature ({len(base)} éléments)")


class _Generator:
    def __init__(self, result: GeneratedSet, max_elements: int):
        self.result = result
        self.max_elements = max_elements
        self.signatures: Dict[Tuple[Term, ...], Element] = {}

    @property
    def full(self) -> bool:
        return len(self.result.elements) >= self.max_elements

    def admit(self, element: Element, level: List[Element]) -> None:
        if self.full:
            return
        try:
            with observation(default_budget()):
                signature = tuple(take_terms(element.value, self.result.probe_depth))
        except HahnforgeError as e:
            logger.debug(f"Élément écarté {element.describe()}: {e}")
            return
        if signature in self.signatures:
            return
        element.element_id = f"e{len(self.result.elements)}"
        self.signatures[signature] = element
        self.result.elements.append(element)
        level.append(element)


def generate(base: Mapping[str, HahnSeries], language: LanguageF, depth: int,
             group: Optional[MonomialGroup] = None, probe_depth: Optional[int] = None,
             max_elements: Optional[int] = None) -> GeneratedSet:
    """
    Éléments de profondeur ≤ depth, dédupliqués à seuil.

    Raises:
        NotTruncationClosedError: X n'est pas clos par troncature
    """
    probe_depth = probe_depth if probe_depth is not None else int(get_setting("closure.probe_depth", 10))
    max_elements = max_elements if max_elements is not None else int(get_setting("closure.max_elements", 40))
    if group is None:
        if not base:
            raise ValueError("Groupe de monômes requis pour un ensemble de base vide")
        group = next(iter(base.values())).group
    check_base_closed(base, probe_depth)

    result = GeneratedSet(group, dict(base), language, depth, probe_depth)
    generator = _Generator(result, max_elements)
    levels: List[List[Element]] = [[]]
    for name, series in sorted(base.items()):
        generator.admit(BaseRef(name, series), levels[0])
    for c in get_setting("closure.scalars", [1]):
        generator.admit(ScalarLeaf(group, Fraction(str(c))), levels[0])
    for m in group.generators():
        generator.admit(MonomialLeaf(m), levels[0])

    for d in range(1, depth + 1):
        known = [e for level in levels for e in level]
        newest = levels[-1]
        level: List[Element] = []
        for left in newest:
            for right in known:
                generator.admit(Plus(left, right), level)
                generator.admit(Times(left, right), level)
        for label, member in sorted(language.generators.items()):
            slots = [v in member.classical for v in member.variables]
            for arguments in cartesian(known, repeat=len(slots)):
                if not any(a in newest for a in arguments):
                    continue
                if all(admissible_argument(a.value, classical) for a, classical in zip(arguments, slots)):
                    generator.admit(Apply(label, member, arguments, group), level)
        levels.append(level)
        logger.info(f"Profondeur {d}: {len(level)} nouveaux éléments ({len(result)} au total)")
        if generator.full:
            logger.warning(f"Plafond de {max_elements} éléments atteint à la profondeur {d}")
            break
    return result
