"""
Familles finies de séries généralisées : langages (clos par réindexation)
et algèbres (closes par opérations d'anneau), testées par appartenance
"""

from fractions import Fraction
from itertools import product as cartesian
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.gps.expr import GpsExpr, Product, Sum, Table, constant, embedder, reindex
from src.order.exponents import RationalLike, as_rational
from src.utils.logger import get_logger

logger = get_logger(__name__)


def _aligned_table(f: GpsExpr, variables: Sequence[str], grade: Fraction) -> Table:
    embed = embedder(f.variables, variables)
    return {embed(p): c for p, c in f.table(grade).items()}


def _proportional(table: Table, expected: Table) -> bool:
    if not table or table.keys() != expected.keys():
        return False
    point = next(iter(table))
    ratio = expected[point] / table[point]
    return all(expected[p] == ratio * c for p, c in table.items())


class GpsFamily:
    """
    Famille engendrée par des générateurs.

    language : appartenance modulo réindexation des variables
    algebra : les membres de profondeur d sont les sommes et produits de
    membres de profondeur < d (les constantes 1 et -1 sont incluses)
    """

    def __init__(self, generators: Iterable[GpsExpr], language: bool = False, algebra: bool = False,
                 grade: RationalLike = 6):
        self.generators: List[GpsExpr] = list(generators)
        self.language = language
        self.algebra = algebra
        self.grade = as_rational(grade)
        self._levels: List[List[GpsExpr]] = []
        self._signatures: Dict[Tuple, GpsExpr] = {}

    def _signature(self, f: GpsExpr) -> Tuple:
        table = f.table(self.grade)
        return (f.variables, tuple(sorted(table.items())))

    def _admit(self, f: GpsExpr, level: List[GpsExpr]) -> None:
        signature = self._signature(f)
        if signature not in self._signatures:
            self._signatures[signature] = f
            level.append(f)

    def members(self, depth: int) -> List[GpsExpr]:
        """Membres distincts (à `grade` près) de profondeur ≤ depth"""
        if not self._levels:
            base: List[GpsExpr] = []
            seeds = list(self.generators)
            if self.algebra:
                seeds += [constant(1), constant(-1)]
            for f in seeds:
                self._admit(f, base)
            self._levels.append(base)
        while len(self._levels) <= depth and self.algebra:
            known = [f for level in self._levels for f in level]
            newest = self._levels[-1]
            level: List[GpsExpr] = []
            for left in newest:
                for right in known:
                    self._admit(Sum(left, right), level)
                    self._admit(Product(left, right), level)
            logger.debug(f"Famille: niveau {len(self._levels)} avec {len(level)} nouveaux membres")
            self._levels.append(level)
        return [f for level in self._levels[:depth + 1] for f in level]

    def _renamings(self, member: GpsExpr, candidate: GpsExpr) -> Iterable[Dict[str, str]]:
        if not self.language:
            if set(member.variables) <= set(candidate.variables):
                yield {}
            return
        targets = candidate.variables
        if not member.variables:
            yield {}
            return
        for image in cartesian(targets, repeat=len(member.variables)):
            yield dict(zip(member.variables, image))

    def contains(self, candidate: GpsExpr, grade: Optional[RationalLike] = None, depth: int = 2,
                 up_to_scalar: bool = False) -> bool:
        """
        Vrai si candidate coïncide jusqu'au degré `grade` avec un membre
        (réindexé), ou avec un multiple rationnel d'un membre si up_to_scalar.
        """
        grade = self.grade if grade is None else as_rational(grade)
        variables = candidate.variables
        expected = _aligned_table(candidate, variables, grade)
        for member in self.members(depth):
            for sigma in self._renamings(member, candidate):
                image = reindex(member, sigma)
                if not set(image.variables) <= set(variables):
                    continue
                table = _aligned_table(image, variables, grade)
                if table == expected or (up_to_scalar and _proportional(table, expected)):
                    return True
        return False

    def __len__(self) -> int:
        return len(self.generators)
