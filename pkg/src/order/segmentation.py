"""
Segments, segmentations et éléments minimaux (lemme de Dickson)

Les chaînes sont finies et totalement ordonnées par l'ordre naturel de Python
(rationnels, ou monômes via leur ordre). Les segmentations produites sont
canoniques : chaque bloc commence exactement à un point de coupure.
"""

from dataclasses import dataclass
from itertools import product
from typing import Any, Callable, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

from src.utils.errors import NotAnAntichainError
from src.utils.logger import get_logger

logger = get_logger(__name__)

Point = Tuple[Any, ...]


@dataclass(frozen=True)
class Segment:
    """Partie convexe d'une chaîne ; None signifie -∞ (lower) ou +∞ (upper)"""

    lower: Any = None
    upper: Any = None
    lower_closed: bool = True
    upper_closed: bool = True

    def __post_init__(self):
        if self.lower is not None and self.upper is not None:
            if self.upper < self.lower:
                raise ValueError(f"Segment vide: {self}")
            if self.upper == self.lower and not (self.lower_closed and self.upper_closed):
                raise ValueError(f"Segment vide: {self}")

    @classmethod
    def everything(cls) -> "Segment":
        return cls(None, None)

    @classmethod
    def above(cls, bound: Any, closed: bool = False) -> "Segment":
        """Segment final (bound, +∞) ou [bound, +∞)"""
        return cls(bound, None, lower_closed=closed)

    @classmethod
    def below(cls, bound: Any, closed: bool = False) -> "Segment":
        """Segment initial (-∞, bound) ou (-∞, bound]"""
        return cls(None, bound, upper_closed=closed)

    @classmethod
    def closed(cls, lower: Any, upper: Any) -> "Segment":
        return cls(lower, upper, True, True)

    def above_lower(self, x: Any) -> bool:
        if self.lower is None:
            return True
        return x >= self.lower if self.lower_closed else x > self.lower

    def beyond_upper(self, x: Any) -> bool:
        if self.upper is None:
            return False
        return x > self.upper if self.upper_closed else x >= self.upper

    def __contains__(self, x: Any) -> bool:
        return self.above_lower(x) and not self.beyond_upper(x)

    def is_final(self) -> bool:
        return self.upper is None

    def __str__(self) -> str:
        left = "(-inf" if self.lower is None else ("[" if self.lower_closed else "(") + str(self.lower)
        right = "+inf)" if self.upper is None else str(self.upper) + ("]" if self.upper_closed else ")")
        return f"{left}, {right}"


@dataclass(frozen=True)
class Segmentation:
    """Partition d'une chaîne finie en blocs convexes, en ordre croissant"""

    parts: Tuple[Tuple[Any, ...], ...]

    @property
    def carrier(self) -> Tuple[Any, ...]:
        return tuple(x for part in self.parts for x in part)

    @property
    def blocks(self) -> Tuple[Segment, ...]:
        return tuple(Segment.closed(part[0], part[-1]) for part in self.parts)

    def block_index(self, x: Any) -> int:
        for i, part in enumerate(self.parts):
            if x in part:
                return i
        raise KeyError(f"{x} hors du support de la segmentation")

    def as_sets(self) -> List[Set[Any]]:
        return [set(part) for part in self.parts]

    def __len__(self) -> int:
        return len(self.parts)


def dominates(p: Point, q: Point) -> bool:
    """p ≥ q pour l'ordre produit"""
    return all(a >= b for a, b in zip(p, q))


def minimal_elements(points: Iterable[Point]) -> List[Point]:
    """
    Générateurs minimaux de l'ensemble final engendré par `points`.

    Returns:
        Antichaîne triée ; tout point d'entrée domine l'un de ses éléments
    """
    unique = sorted(set(tuple(p) for p in points))
    return [p for p in unique
            if not any(q != p and dominates(p, q) for q in unique)]


def is_antichain(points: Sequence[Point]) -> bool:
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            if p == q or dominates(p, q) or dominates(q, p):
                return False
    return True


def segmentation_from_cuts(chain: Iterable[Any], cuts: Iterable[Any]) -> Segmentation:
    """Un nouveau bloc commence au premier élément ≥ chaque point de coupure"""
    ordered = sorted(set(chain))
    cut_list = sorted(set(cuts))
    parts: List[List[Any]] = []
    previous = None
    for x in ordered:
        starts_block = not parts or any(previous < c <= x for c in cut_list)
        if starts_block:
            parts.append([x])
        else:
            parts[-1].append(x)
        previous = x
    return Segmentation(tuple(tuple(part) for part in parts))


def basic_segmentation(chains: Sequence[Iterable[Any]], generators: Iterable[Point]) -> List[Segmentation]:
    """
    Segmentations finies adaptées à l'ensemble final U engendré par `generators`.

    Chaque pavé ∏ S_i est entièrement dans U ou entièrement dans son
    complémentaire. Les coupures de la chaîne j sont les projections π_j(M).

    Raises:
        NotAnAntichainError: si M n'est pas une antichaîne
    """
    chains = [list(chain) for chain in chains]
    points = [tuple(g) for g in generators]
    if any(len(p) != len(chains) for p in points):
        raise ValueError("Dimension des générateurs incompatible avec le nombre de chaînes")
    if not is_antichain(points):
        raise NotAnAntichainError(f"Générateurs non minimaux: {points} (normaliser via minimal_elements)")
    return [segmentation_from_cuts(chain, (p[j] for p in points))
            for j, chain in enumerate(chains)]


def common_refinement(segmentations: Sequence[Segmentation]) -> Segmentation:
    """⊗ de segmentations d'une même chaîne"""
    if not segmentations:
        raise ValueError("Aucune segmentation à raffiner")
    carrier = set(segmentations[0].carrier)
    for s in segmentations[1:]:
        if set(s.carrier) != carrier:
            raise ValueError("Segmentations de supports différents")
    starts = {part[0] for s in segmentations for part in s.parts}
    return segmentation_from_cuts(carrier, starts)


def segmentation_for_map(sets: Sequence[Iterable[Any]], phi: Callable[..., Any],
                         target: Optional[Segment]) -> List[Segmentation]:
    """
    Segmentations des S_i telles que, sur chaque pavé, l'appartenance de
    φ(p) au segment cible est constante. φ doit être croissante en chaque
    argument ; `target` None désigne le segment vide.
    """
    chains = [sorted(set(s)) for s in sets]
    if target is None:
        return [segmentation_from_cuts(chain, ()) for chain in chains]

    grid = list(product(*chains))
    reaching = [p for p in grid if target.above_lower(phi(*p))]
    overshooting = [p for p in grid if target.beyond_upper(phi(*p))]
    refinements = []
    for generators in (minimal_elements(reaching), minimal_elements(overshooting)):
        refinements.append(basic_segmentation(chains, generators))
    return [common_refinement([first, second]) for first, second in zip(*refinements)]


def segmentation_for_sum(sets: Sequence[Iterable[Any]], target: Optional[Segment]) -> List[Segmentation]:
    """Cas φ = Σ : les sommes d'un même pavé sont toutes dans U ou toutes hors de U"""
    return segmentation_for_map(sets, lambda *xs: sum(xs), target)


class ProductBlock(NamedTuple):
    """Paire (U_i, T_i) : segment final de S0 et segment de S1, ordre décroissant"""

    final: Tuple[Any, ...]
    segment: Tuple[Any, ...]

    @property
    def final_segment(self) -> Segment:
        return Segment.above(self.final[-1], closed=True)

    @property
    def block(self) -> Segment:
        return Segment.closed(self.segment[-1], self.segment[0])


def product_segmentation(first: Iterable[Any], second: Iterable[Any], target: Segment) -> List[ProductBlock]:
    """
    Décompose (S0 × S1) ∩ {(a, b) : a·b ∈ U} en union disjointe de U_i × T_i,
    les U_i étant des segments finaux de S0.
    """
    if not target.is_final():
        raise ValueError(f"Segment final attendu: {target}")
    s0 = sorted(set(first), reverse=True)
    s1 = sorted(set(second), reverse=True)
    if not s0 or not s1:
        return []

    # positions croissantes = monômes décroissants : le complémentaire est un ensemble final
    outside = [(i, j) for i, a in enumerate(s0) for j, b in enumerate(s1) if (a * b) not in target]
    seg0, seg1 = basic_segmentation([range(len(s0)), range(len(s1))], minimal_elements(outside))

    blocks = []
    for t_part in seg1.parts:
        final: List[Any] = []
        for r_part in seg0.parts:
            if (s0[r_part[0]] * s1[t_part[0]]) in target:
                final.extend(s0[i] for i in r_part)
        if final:
            blocks.append(ProductBlock(tuple(final), tuple(s1[j] for j in t_part)))
    logger.debug(f"product_segmentation: {len(blocks)} blocs pour |S0|={len(s0)}, |S1|={len(s1)}")
    return blocks
