"""
Groupes de monômes ordonnés et valuation naturelle

Un groupe de rang n est engendré par des générateurs infinitésimaux
g_0 ≺≺ g_1 ≺≺ ... listés par taille décroissante de classe : g_0 est le plus
grossier (le plus petit). Un monôme est un vecteur d'exposants rationnels.
"""

import re
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import total_ordering
from typing import Dict, Iterable, Optional, Sequence, Tuple

from src.order.exponents import RationalLike, as_rational, format_power
from src.utils.errors import GroupMismatchError

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class Ordering(IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


@dataclass(frozen=True)
class MonomialGroup:
    """Groupe multiplicatif de rang fini, ordre lexicographique"""

    generator_names: Tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.generator_names)
        object.__setattr__(self, 'generator_names', names)
        if not names:
            raise ValueError("Un groupe de monômes doit avoir au moins un générateur")
        if len(set(names)) != len(names):
            raise ValueError(f"Générateurs dupliqués: {names}")
        for name in names:
            if not _IDENTIFIER.match(name):
                raise ValueError(f"Nom de générateur invalide: {name!r}")

    @classmethod
    def of(cls, *names: str) -> "MonomialGroup":
        return cls(tuple(names))

    @property
    def rank(self) -> int:
        return len(self.generator_names)

    def index(self, name: str) -> int:
        try:
            return self.generator_names.index(name)
        except ValueError:
            raise KeyError(f"Générateur inconnu: {name}") from None

    def identity(self) -> "Monomial":
        return Monomial(self, (Fraction(0),) * self.rank)

    def generator(self, name: str, power: RationalLike = 1) -> "Monomial":
        exponents = [Fraction(0)] * self.rank
        exponents[self.index(name)] = as_rational(power)
        return Monomial(self, tuple(exponents))

    def generators(self) -> Tuple["Monomial", ...]:
        return tuple(self.generator(name) for name in self.generator_names)

    def from_exponents(self, values: Sequence[RationalLike]) -> "Monomial":
        if len(values) != self.rank:
            raise ValueError(f"Vecteur d'exposants de longueur {len(values)}, rang {self.rank}")
        return Monomial(self, tuple(as_rational(v) for v in values))

    def from_mapping(self, powers: Dict[str, RationalLike]) -> "Monomial":
        exponents = [Fraction(0)] * self.rank
        for name, value in powers.items():
            exponents[self.index(name)] += as_rational(value)
        return Monomial(self, tuple(exponents))

    def __str__(self) -> str:
        return " > ".join(self.generator_names)


@total_ordering
class ArchClass:
    """Classe archimédienne : indice du premier exposant non nul, None pour ∞"""

    __slots__ = ('index',)

    def __init__(self, index: Optional[int]):
        self.index = index

    @property
    def is_infinite(self) -> bool:
        return self.index is None

    def _rank(self) -> float:
        return float('inf') if self.index is None else self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, ArchClass) and self.index == other.index

    def __lt__(self, other: "ArchClass") -> bool:
        return self._rank() < other._rank()

    def __hash__(self) -> int:
        return hash(('ArchClass', self.index))

    def __repr__(self) -> str:
        return "ArchClass(∞)" if self.index is None else f"ArchClass({self.index})"

    def __str__(self) -> str:
        return "inf" if self.index is None else str(self.index)


INFINITE_CLASS = ArchClass(None)


class Monomial:
    """Élément d'un groupe de monômes"""

    __slots__ = ('group', 'exponents', '_hash')

    def __init__(self, group: MonomialGroup, exponents: Tuple[Fraction, ...]):
        self.group = group
        self.exponents = exponents
        self._hash = hash((group.generator_names, exponents))

    @property
    def key(self) -> Tuple[Fraction, ...]:
        """Clé de tas : une clé plus petite désigne un monôme plus grand"""
        return self.exponents

    def _check(self, other: "Monomial") -> None:
        if not isinstance(other, Monomial):
            raise TypeError(f"Monôme attendu, reçu {type(other).__name__}")
        if other.group != self.group:
            raise GroupMismatchError(f"Groupes différents: [{self.group}] / [{other.group}]")

    def is_identity(self) -> bool:
        return not any(self.exponents)

    def exponent(self, name: str) -> Fraction:
        return self.exponents[self.group.index(name)]

    def __mul__(self, other: "Monomial") -> "Monomial":
        self._check(other)
        return Monomial(self.group, tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __truediv__(self, other: "Monomial") -> "Monomial":
        self._check(other)
        return Monomial(self.group, tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, power: RationalLike) -> "Monomial":
        q = as_rational(power)
        return Monomial(self.group, tuple(a * q for a in self.exponents))

    def inverse(self) -> "Monomial":
        return Monomial(self.group, tuple(-a for a in self.exponents))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Monomial):
            return NotImplemented
        return self.group == other.group and self.exponents == other.exponents

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Monomial") -> bool:
        return cmp_monomial(self, other) is Ordering.LESS

    def __le__(self, other: "Monomial") -> bool:
        return cmp_monomial(self, other) is not Ordering.GREATER

    def __gt__(self, other: "Monomial") -> bool:
        return cmp_monomial(self, other) is Ordering.GREATER

    def __ge__(self, other: "Monomial") -> bool:
        return cmp_monomial(self, other) is not Ordering.LESS

    def arch_class(self) -> ArchClass:
        return arch_class(self)

    def __repr__(self) -> str:
        return f"Monomial({self})"

    def __str__(self) -> str:
        parts = [f"{name}^{format_power(e)}"
                 for name, e in zip(self.group.generator_names, self.exponents) if e != 0]
        return "*".join(parts) if parts else "1"


def cmp_monomial(a: Monomial, b: Monomial) -> Ordering:
    """
    Compare deux monômes.

    Le premier exposant différent décide : un exposant plus grand d'un
    générateur infinitésimal donne un monôme plus petit.
    """
    a._check(b)
    for x, y in zip(a.exponents, b.exponents):
        if x != y:
            return Ordering.LESS if x > y else Ordering.GREATER
    return Ordering.EQUAL


def arch_class(m: Monomial) -> ArchClass:
    """Valuation naturelle d'un monôme"""
    for i, e in enumerate(m.exponents):
        if e != 0:
            return ArchClass(i)
    return INFINITE_CLASS


def max_monomial(monomials: Iterable[Monomial]) -> Optional[Monomial]:
    best = None
    for m in monomials:
        if best is None or m > best:
            best = m
    return best


def min_monomial(monomials: Iterable[Monomial]) -> Optional[Monomial]:
    best = None
    for m in monomials:
        if best is None or m < best:
            best = m
    return best
