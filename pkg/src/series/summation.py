"""
Sommes de familles sommables de séries de Hahn

La famille est indexée par des entrées générées paresseusement (graines puis
successeurs). Chaque entrée porte une borne supérieure du support de sa série
et de celles de tous ses descendants ; une borne None signifie que l'entrée
et ses descendants sont nuls.
"""

import heapq
from fractions import Fraction
from itertools import count
from typing import Callable, Hashable, Iterable, Iterator, List, Optional, Tuple

from src.order.monomials import Monomial, MonomialGroup
from src.series.budget import charge
from src.series.hahn import HahnSeries, RawTerm


def summable_sum(group: MonomialGroup,
                 seeds: Iterable[Hashable],
                 successors: Callable[[Hashable], Iterable[Hashable]],
                 bound: Callable[[Hashable], Optional[Monomial]],
                 series_for: Callable[[Hashable], HahnSeries]) -> HahnSeries:
    """
    Σ_e series_for(e), émise en ordre décroissant.

    Une entrée en attente est activée dès que sa borne atteint la tête active
    la plus grande ; un monôme n'est émis que lorsqu'aucune entrée en attente
    ne peut plus y contribuer.
    """
    seed_list = list(seeds)

    def factory() -> Iterator[RawTerm]:
        tick = count()
        pending: List[Tuple[tuple, int, Hashable]] = []
        active: List[Tuple[tuple, int, int, Iterator[RawTerm]]] = []
        seen = set()

        def enqueue(entry: Hashable) -> None:
            if entry in seen:
                return
            seen.add(entry)
            upper = bound(entry)
            if upper is not None:
                heapq.heappush(pending, (upper.key, next(tick), entry))

        def advance(iterator: Iterator[RawTerm]) -> None:
            item = next(iterator, None)
            if item is not None:
                heapq.heappush(active, (item[0].key, next(tick), item, iterator))

        for entry in seed_list:
            enqueue(entry)

        while pending or active:
            # activation tant qu'une borne en attente domine la tête active
            while pending and (not active or pending[0][0] <= active[0][0]):
                charge()
                _, _, entry = heapq.heappop(pending)
                advance(series_for(entry).iter_raw())
                for nxt in successors(entry):
                    enqueue(nxt)
            if not active:
                continue
            key, _, item, iterator = heapq.heappop(active)
            monomial = item[0]
            coeff = Fraction(item[1])
            advance(iterator)
            while active and active[0][0] == key:
                charge()
                _, _, other, other_iterator = heapq.heappop(active)
                coeff += other[1]
                advance(other_iterator)
            yield monomial, coeff

    return HahnSeries(group, factory)
