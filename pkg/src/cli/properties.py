"""
Batterie de propriétés aléatoires reproductibles (option --seed)

Chaque propriété tire ses instances d'un générateur random.Random initialisé
par la graine ; deux exécutions avec la même graine sont identiques.
"""

import random
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence

from src.gps.blowups import compose_pcomp
from src.gps.expr import FiniteSeries, Geometric
from src.order.combinatorics import neumann_fibers
from src.order.monomials import INFINITE_CLASS, ArchClass, Monomial, MonomialGroup
from src.order.segmentation import Segment, is_antichain, dominates, minimal_elements, product_segmentation
from src.rps.decompositions import tc_product_decompose
from src.rps.restricted import embed
from src.series.hahn import HahnSeries, add, from_terms, listing, mul, sub, v_truncate
from src.utils.logger import get_logger
from src.utils.settings import get_setting

logger = get_logger(__name__)

GROUP = MonomialGroup.of('u', 't')
LINE = MonomialGroup.of('t')

Check = Callable[[random.Random], Optional[str]]


class PropertyResult(NamedTuple):
    name: str
    instances: int
    failures: int
    first_failure: Optional[str]

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def render(self) -> str:
        line = f"{'PASS' if self.passed else 'FAIL'} {self.name} ({self.instances} instances)"
        if self.first_failure:
            line += f": {self.first_failure}"
        return line


# Générateurs

def random_monomial(rng: random.Random, group: MonomialGroup = GROUP, spread: int = 2) -> Monomial:
    return group.from_exponents([Fraction(rng.randint(-2 * spread, 2 * spread), 2) for _ in range(group.rank)])


def random_small_monomial(rng: random.Random, group: MonomialGroup = GROUP) -> Monomial:
    """Monôme ≤ 1 : premier exposant non nul positif"""
    exponents = [Fraction(0)] * group.rank
    lead = rng.randrange(group.rank + 1)
    if lead < group.rank:
        exponents[lead] = Fraction(rng.randint(1, 4), 2)
        for i in range(lead + 1, group.rank):
            exponents[i] = Fraction(rng.randint(-4, 4), 2)
    return group.from_exponents(exponents)


def random_series(rng: random.Random, size: int = 4, small: bool = False) -> HahnSeries:
    draw = random_small_monomial if small else random_monomial
    terms = [(draw(rng), rng.choice([-3, -2, -1, 1, 2, 3])) for _ in range(rng.randint(0, size))]
    return from_terms(GROUP, terms)


def is_zero(f: HahnSeries) -> bool:
    result = listing(f, 1)
    return result.exhausted and not result.terms


def same(f: HahnSeries, g: HahnSeries) -> bool:
    return is_zero(sub(f, g))


# Propriétés

def ring_laws(rng: random.Random) -> Optional[str]:
    a, b, c = (random_series(rng) for _ in range(3))
    if not same(mul(a, b), mul(b, a)):
        return "commutativité du produit"
    if not same(mul(mul(a, b), c), mul(a, mul(b, c))):
        return "associativité du produit"
    if not same(mul(a, add(b, c)), add(mul(a, b), mul(a, c))):
        return "distributivité"
    if not same(add(a, b), add(b, a)):
        return "commutativité de la somme"
    return None


def order_compatibility(rng: random.Random) -> Optional[str]:
    a, b, c = (random_monomial(rng) for _ in range(3))
    if (a < b) + (a == b) + (a > b) != 1:
        return f"trichotomie en défaut pour {a}, {b}"
    if a < b and not a * c < b * c:
        return f"{a} < {b} mais {a * c} ≥ {b * c}"
    return None


def minimal_generators(rng: random.Random) -> Optional[str]:
    points = [(rng.randint(0, 4), rng.randint(0, 4)) for _ in range(rng.randint(1, 8))]
    minimal = minimal_elements(points)
    if not is_antichain(minimal):
        return f"{minimal} n'est pas une antichaîne"
    if not set(minimal) <= set(points):
        return f"{minimal} contient des points étrangers"
    if not all(any(dominates(p, q) for q in minimal) for p in points):
        return f"un point de {points} ne domine aucun élément de {minimal}"
    return None


def fibers_brute_force(rng: random.Random) -> Optional[str]:
    elements = sorted(rng.sample([Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3)],
                                 rng.randint(1, 3)))
    gamma = Fraction(rng.randint(0, 8), 2)
    found = neumann_fibers(elements, gamma)
    longest = int(gamma / elements[0])
    expected = [t for n in range(longest + 1) for t in product(elements, repeat=n) if sum(t) == gamma]
    if sorted(found) != sorted(expected):
        return f"fibres de {gamma} sur {elements}: {len(found)} trouvées, {len(expected)} attendues"
    return None


def product_blocks(rng: random.Random) -> Optional[str]:
    first = {LINE.generator('t', Fraction(rng.randint(-4, 6), 2)) for _ in range(rng.randint(1, 5))}
    second = {LINE.generator('t', Fraction(rng.randint(-4, 6), 2)) for _ in range(rng.randint(1, 5))}
    target = Segment.above(LINE.generator('t', Fraction(rng.randint(-2, 6), 2)))
    covered = []
    for block in product_segmentation(first, second, target):
        lowest = block.final[-1]
        if set(block.final) != {a for a in first if a >= lowest}:
            return f"bloc {block.final} non final dans S0"
        covered.extend((a, b) for a in block.final for b in block.segment)
    expected = {(a, b) for a in first for b in second if a * b in target}
    if len(covered) != len(set(covered)) or set(covered) != expected:
        return "union des blocs différente de l'ensemble des produits dans U"
    return None


def truncated_products(rng: random.Random) -> Optional[str]:
    f, g = random_series(rng), random_series(rng)
    m = random_monomial(rng)
    if not tc_product_decompose(embed(f), embed(g), m).verify():
        return f"décomposition de (f·g)‖{m} incorrecte"
    return None


def v_truncation_multiplicative(rng: random.Random) -> Optional[str]:
    f, g = random_series(rng, small=True), random_series(rng, small=True)
    v = rng.choice([ArchClass(0), ArchClass(1), INFINITE_CLASS])
    if not same(v_truncate(mul(f, g), v), mul(v_truncate(f, v), v_truncate(g, v))):
        return f"troncature de classe {v} non multiplicative"
    return None


def fibonacci_composition(rng: random.Random) -> Optional[str]:
    """1/(1 - z - z²) : coefficient de z^n égal à F(n+1)"""
    n = rng.randint(0, 20)
    composed = compose_pcomp(Geometric('x'), 'x', FiniteSeries([({'z': 1}, 1), ({'z': 2}, 1)]))
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    got = composed.coeff({'z': n})
    if got != a:
        return f"coefficient de z^{n}: {got}, attendu {a}"
    return None


PROPERTIES: Dict[str, Check] = {
    'ring-laws': ring_laws,
    'order-compatibility': order_compatibility,
    'minimal-generators': minimal_generators,
    'neumann-fibers': fibers_brute_force,
    'product-segmentation': product_blocks,
    'truncated-product': truncated_products,
    'v-truncation': v_truncation_multiplicative,
    'fibonacci-composition': fibonacci_composition,
}


def run_property(name: str, seed: int, instances: int) -> PropertyResult:
    # graine propre à chaque propriété : l'ordre d'exécution n'influe pas sur les tirages
    rng = random.Random(f"{seed}:{name}")
    check = PROPERTIES[name]
    failures, first = 0, None
    for _ in range(instances):
        problem = check(rng)
        if problem is not None:
            failures += 1
            first = first or problem
    return PropertyResult(name, instances, failures, first)


def run_properties(seed: int, instances: Optional[int] = None,
                   names: Optional[Iterable[str]] = None) -> List[PropertyResult]:
    instances = instances if instances is not None else int(get_setting("cli.property_instances", 25))
    selected: Sequence[str] = list(names) if names is not None else list(PROPERTIES)
    results = []
    for name in selected:
        result = run_property(name, seed, instances)
        (logger.info if result.passed else logger.error)(result.render())
        results.append(result)
    return results
