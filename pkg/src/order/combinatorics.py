"""
Combinatoire finie : fibres de Neumann et multi-indices
"""

from fractions import Fraction
from math import factorial
from typing import Iterable, Iterator, List, Sequence, Tuple

from src.order.exponents import RationalLike, as_rational, binomial

MultiIndex = Tuple[int, ...]


def neumann_fibers(elements: Iterable[RationalLike], gamma: RationalLike) -> List[Tuple[Fraction, ...]]:
    """
    Tous les tuples ordonnés d'éléments de S de somme exactement gamma.

    Finitude : chaque entrée est ≥ min(S) > 0, donc la longueur est bornée
    par gamma / min(S).
    """
    values = sorted(set(as_rational(e) for e in elements))
    target = as_rational(gamma)
    if any(v <= 0 for v in values):
        raise ValueError("Les éléments doivent être strictement positifs")
    if target < 0:
        return []

    fibers: List[Tuple[Fraction, ...]] = []

    def extend(prefix: List[Fraction], remaining: Fraction) -> None:
        if remaining == 0:
            fibers.append(tuple(prefix))
            return
        for v in values:
            if v > remaining:
                break
            prefix.append(v)
            extend(prefix, remaining - v)
            prefix.pop()

    extend([], target)
    return fibers


def compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    """Tuples d'entiers naturels de longueur `parts` et de somme `total`"""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in compositions(total - head, parts - 1):
            yield (head,) + tail


def multi_indices(parts: int, max_degree: int) -> List[MultiIndex]:
    """Multi-indices de degré total ≤ max_degree, par degré croissant"""
    return [idx for degree in range(max_degree + 1) for idx in compositions(degree, parts)]


def unit_index(parts: int, position: int) -> MultiIndex:
    return tuple(1 if i == position else 0 for i in range(parts))


def index_add(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def index_sub(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def index_le(a: MultiIndex, b: MultiIndex) -> bool:
    return all(x <= y for x, y in zip(a, b))


def index_splittings(index: MultiIndex) -> Iterator[Tuple[MultiIndex, MultiIndex]]:
    """Toutes les décompositions index = a + b"""
    for a in product_ranges(index):
        yield a, index_sub(index, a)


def product_ranges(bound: MultiIndex) -> Iterator[MultiIndex]:
    if not bound:
        yield ()
        return
    for head in range(bound[0] + 1):
        for tail in product_ranges(bound[1:]):
            yield (head,) + tail


def index_factorial(index: MultiIndex) -> int:
    result = 1
    for h in index:
        result *= factorial(h)
    return result


def index_binomial(top: Sequence[RationalLike], bottom: MultiIndex) -> Fraction:
    """∏ (γ_i choose m_i)"""
    result = Fraction(1)
    for g, m in zip(top, bottom):
        result *= binomial(g, m)
    return result
