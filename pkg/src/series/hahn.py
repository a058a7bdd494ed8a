"""
Séries de Hahn paresseuses à coefficients rationnels exacts

Une série est un flux mémoïsé de termes (monôme, coefficient) en ordre
strictement décroissant. Le flux brut peut contenir des termes fantômes de
coefficient nul : ils signalent "aucun terme à ce monôme, la suite est plus
petite" et permettent aux troncatures de s'arrêter même quand un produit
s'annule. Les observations publiques (take_terms, listing...) les filtrent.
"""

import heapq
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from src.order.exponents import RationalLike, as_rational, format_rational
from src.order.monomials import INFINITE_CLASS, ArchClass, Monomial, MonomialGroup, arch_class
from src.order.segmentation import Segment
from src.series.budget import charge, observation
from src.utils.errors import BudgetExhaustedError, GroupMismatchError, NotInvertibleError, StreamOrderError
from src.utils.logger import get_logger

logger = get_logger(__name__)

RawTerm = Tuple[Monomial, Fraction]
Scalar = Union[int, Fraction]


class Term(NamedTuple):
    """Terme non nul k·𝔪"""

    monomial: Monomial
    coeff: Fraction

    def __str__(self) -> str:
        if self.monomial.is_identity():
            return format_rational(self.coeff)
        return f"{format_rational(self.coeff)} * {self.monomial}"

    def to_json(self) -> dict:
        return {
            'exponents': [format_rational(e) for e in self.monomial.exponents],
            'coeff': format_rational(self.coeff),
        }


class HahnSeries:
    """Série de Hahn paresseuse ; le mémo est rempli sous verrou"""

    def __init__(self, group: MonomialGroup, factory: Callable[[], Iterator[RawTerm]],
                 known_finite: Optional[bool] = None):
        self.group = group
        self.known_finite = known_finite
        self._factory = factory
        self._memo: List[RawTerm] = []
        self._iterator: Optional[Iterator[RawTerm]] = None
        self._ended = False
        self._lock = threading.RLock()

    def _pull(self, index: int) -> bool:
        """Garantit que l'entrée brute `index` est calculée ; False si le flux s'arrête avant"""
        if index < len(self._memo):
            return True
        with self._lock, observation():
            while len(self._memo) <= index:
                if self._ended:
                    return False
                try:
                    if self._iterator is None:
                        # reprise après une interruption : on rejoue jusqu'au mémo
                        self._iterator = self._factory()
                        for _ in range(len(self._memo)):
                            next(self._iterator)
                            charge()
                    charge()
                    item = next(self._iterator)
                except StopIteration:
                    self._ended = True
                    self._iterator = None
                    return False
                except BaseException:
                    self._iterator = None
                    raise
                if self._memo and not item[0].key > self._memo[-1][0].key:
                    raise StreamOrderError(f"Flux non décroissant: {item[0]} après {self._memo[-1][0]}")
                self._memo.append(item)
            return True

    def raw(self, index: int) -> Optional[RawTerm]:
        """Entrée brute `index` (fantômes compris), None après la fin du flux"""
        return self._memo[index] if self._pull(index) else None

    def iter_raw(self) -> Iterator[RawTerm]:
        i = 0
        while self._pull(i):
            yield self._memo[i]
            i += 1

    def iter_terms(self) -> Iterator[Term]:
        for monomial, coeff in self.iter_raw():
            if coeff:
                yield Term(monomial, coeff)

    def is_materialized_end(self) -> bool:
        return self._ended

    # Opérateurs
    def __add__(self, other: "HahnSeries") -> "HahnSeries":
        return add(self, _lift(self.group, other))

    __radd__ = __add__

    def __sub__(self, other: "HahnSeries") -> "HahnSeries":
        return sub(self, _lift(self.group, other))

    def __rsub__(self, other) -> "HahnSeries":
        return sub(_lift(self.group, other), self)

    def __neg__(self) -> "HahnSeries":
        return neg(self)

    def __mul__(self, other) -> "HahnSeries":
        if isinstance(other, HahnSeries):
            return mul(self, other)
        if isinstance(other, Monomial):
            return monomial_shift(self, other)
        return scalar_mul(other, self)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        shown = [str(Term(m, c)) for m, c in self._memo[:4] if c]
        more = "" if self._ended else " + ..."
        return f"HahnSeries[{self.group}]({' + '.join(shown) or '...'}{more})"


def _lift(group: MonomialGroup, value) -> HahnSeries:
    if isinstance(value, HahnSeries):
        return value
    if isinstance(value, Monomial):
        return monomial(value)
    return constant(group, value)


def _same_group(*series: HahnSeries) -> MonomialGroup:
    group = series[0].group
    for s in series[1:]:
        if s.group != group:
            raise GroupMismatchError(f"Séries sur des groupes différents: [{group}] / [{s.group}]")
    return group


@dataclass(frozen=True)
class SegmentSet:
    """Union finie de segments disjoints de monômes, en ordre croissant"""

    pieces: Tuple[Segment, ...] = ()

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, 'pieces', pieces)
        for left, right in zip(pieces, pieces[1:]):
            if left.upper is None or right.lower is None:
                raise ValueError("Segments non ordonnés ou non disjoints")
            if right.lower < left.upper or (right.lower == left.upper and left.upper_closed and right.lower_closed):
                raise ValueError(f"Segments non disjoints: {left} / {right}")

    @classmethod
    def everything(cls) -> "SegmentSet":
        return cls((Segment.everything(),))

    @classmethod
    def empty(cls) -> "SegmentSet":
        return cls(())

    @classmethod
    def of(cls, *pieces: Segment) -> "SegmentSet":
        return cls(tuple(pieces))

    def __contains__(self, m: Monomial) -> bool:
        return any(m in piece for piece in self.pieces)

    def is_below(self, m: Monomial) -> bool:
        """Vrai si m et tout monôme plus petit sont sous l'union"""
        if not self.pieces:
            return True
        lowest = self.pieces[0]
        if lowest.lower is None:
            return False
        return m < lowest.lower or (m == lowest.lower and not lowest.lower_closed)


# Constructeurs

def zero(group: MonomialGroup) -> HahnSeries:
    return HahnSeries(group, lambda: iter(()), known_finite=True)


def from_terms(group: MonomialGroup, terms: Iterable[Tuple[Monomial, RationalLike]]) -> HahnSeries:
    """Série finie ; les termes de même monôme sont additionnés"""
    accumulated: Dict[Monomial, Fraction] = {}
    for m, c in terms:
        if m.group != group:
            raise GroupMismatchError(f"Monôme {m} hors du groupe [{group}]")
        accumulated[m] = accumulated.get(m, Fraction(0)) + as_rational(c)
    ordered = sorted(((m, c) for m, c in accumulated.items() if c), key=lambda t: t[0].key)
    return HahnSeries(group, lambda: iter(ordered), known_finite=True)


def constant(group: MonomialGroup, c: RationalLike) -> HahnSeries:
    return from_terms(group, [(group.identity(), c)])


def monomial(m: Monomial, c: RationalLike = 1) -> HahnSeries:
    return from_terms(m.group, [(m, c)])


def geometric_series(ratio: Monomial, coeff: RationalLike = 1) -> HahnSeries:
    """Σ_{k≥0} c·ratio^k, ratio < 1"""
    if not ratio < ratio.group.identity():
        raise ValueError(f"La raison {ratio} doit être infinitésimale")
    c = as_rational(coeff)
    if c == 0:
        return zero(ratio.group)

    def factory() -> Iterator[RawTerm]:
        current = ratio.group.identity()
        while True:
            yield current, c
            current = current * ratio

    return HahnSeries(ratio.group, factory)


# Observations

def take_terms(f: HahnSeries, n: int, budget: Optional[int] = None) -> List[Term]:
    """
    Les n premiers termes non nuls.

    Raises:
        BudgetExhaustedError: budget dépassé, `partial` contient les termes obtenus
    """
    if n < 0:
        raise ValueError("n doit être positif")
    terms: List[Term] = []
    if n == 0:
        return terms
    with observation(budget):
        try:
            for term in f.iter_terms():
                terms.append(term)
                if len(terms) >= n:
                    break
        except BudgetExhaustedError as e:
            logger.debug(f"Budget {e.limit} épuisé après {len(terms)} termes")
            raise BudgetExhaustedError(e.limit, partial=list(terms)) from None
    return terms


class Listing(NamedTuple):
    """Résultat d'une observation bornée : termes + fin de flux atteinte"""

    terms: List[Term]
    exhausted: bool

    def to_json(self) -> dict:
        return {'terms': [t.to_json() for t in self.terms], 'exhausted': self.exhausted}


def listing(f: HahnSeries, n: int, budget: Optional[int] = None) -> Listing:
    """n termes et un drapeau indiquant que la série n'en a pas d'autre"""
    terms: List[Term] = []
    with observation(budget):
        iterator = f.iter_terms()
        try:
            if n > 0:
                for term in iterator:
                    terms.append(term)
                    if len(terms) >= n:
                        break
                else:
                    return Listing(terms, True)
        except BudgetExhaustedError as e:
            raise BudgetExhaustedError(e.limit, partial=Listing(list(terms), False)) from None
        try:
            next(iterator)
            return Listing(terms, False)
        except StopIteration:
            return Listing(terms, True)
        except BudgetExhaustedError:
            return Listing(terms, False)


def leading_term(f: HahnSeries) -> Optional[Term]:
    """Premier terme non nul, None pour la série nulle"""
    with observation():
        return next(f.iter_terms(), None)


def support_above(f: HahnSeries, cutoff: Optional[Monomial]) -> List[Monomial]:
    """Support de f au-dessus de `cutoff` (tout le support si None), supposé fini"""
    source = f if cutoff is None else truncate(f, cutoff)
    with observation():
        return [t.monomial for t in source.iter_terms()]


# Opérations d'anneau

def add(f: HahnSeries, g: HahnSeries) -> HahnSeries:
    group = _same_group(f, g)

    def factory() -> Iterator[RawTerm]:
        it_f, it_g = f.iter_raw(), g.iter_raw()
        a, b = next(it_f, None), next(it_g, None)
        while a is not None or b is not None:
            if b is None or (a is not None and a[0].key < b[0].key):
                yield a
                a = next(it_f, None)
            elif a is None or b[0].key < a[0].key:
                yield b
                b = next(it_g, None)
            else:
                yield a[0], a[1] + b[1]
                a, b = next(it_f, None), next(it_g, None)

    return HahnSeries(group, factory, known_finite=bool(f.known_finite and g.known_finite) or None)


def scalar_mul(c: RationalLike, f: HahnSeries) -> HahnSeries:
    k = as_rational(c)
    if k == 0:
        return zero(f.group)
    if k == 1:
        return f

    def factory() -> Iterator[RawTerm]:
        for m, coeff in f.iter_raw():
            yield m, k * coeff

    return HahnSeries(f.group, factory, known_finite=f.known_finite)


def neg(f: HahnSeries) -> HahnSeries:
    return scalar_mul(-1, f)


def sub(f: HahnSeries, g: HahnSeries) -> HahnSeries:
    return add(f, neg(g))


def monomial_shift(f: HahnSeries, shift: Monomial) -> HahnSeries:
    """f·𝔫"""
    if shift.group != f.group:
        raise GroupMismatchError(f"Monôme {shift} hors du groupe [{f.group}]")
    if shift.is_identity():
        return f

    def factory() -> Iterator[RawTerm]:
        for m, coeff in f.iter_raw():
            yield m * shift, coeff

    return HahnSeries(f.group, factory, known_finite=f.known_finite)


def mul(f: HahnSeries, g: HahnSeries) -> HahnSeries:
    """
    Produit de Cauchy par fusion à file de priorité sur les paires d'indices.

    Si un facteur est connu fini, une ligne par terme de ce facteur est semée ;
    sinon la frontière (i+1, j), (i, j+1) est étendue avec déduplication.
    """
    group = _same_group(f, g)
    if g.known_finite and not f.known_finite:
        f, g = g, f

    def factory() -> Iterator[RawTerm]:
        first, second = f.raw(0), g.raw(0)
        if first is None or second is None:
            return
        rows = bool(f.known_finite)
        heap: List[Tuple[tuple, int, int]] = []
        seen = set()

        def push(i: int, j: int) -> None:
            a, b = f.raw(i), g.raw(j)
            if a is None or b is None or (i, j) in seen:
                return
            seen.add((i, j))
            heapq.heappush(heap, ((a[0] * b[0]).key, i, j))

        if rows:
            i = 0
            while f.raw(i) is not None:
                push(i, 0)
                i += 1
        else:
            push(0, 0)

        while heap:
            key, i, j = heapq.heappop(heap)
            batch = [(i, j)]
            while heap and heap[0][0] == key:
                _, i2, j2 = heapq.heappop(heap)
                batch.append((i2, j2))
            coeff = Fraction(0)
            for i, j in batch:
                charge()
                a, b = f.raw(i), g.raw(j)
                coeff += a[1] * b[1]
            for i, j in batch:
                seen.discard((i, j))
                if not rows:
                    push(i + 1, j)
                push(i, j + 1)
            a, b = f.raw(batch[0][0]), g.raw(batch[0][1])
            yield a[0] * b[0], coeff

    return HahnSeries(group, factory, known_finite=bool(f.known_finite and g.known_finite) or None)


# Troncatures et fragments

def truncate(f: HahnSeries, m: Monomial) -> HahnSeries:
    """f|𝔪 : termes de monôme > 𝔪"""

    def factory() -> Iterator[RawTerm]:
        for mono, coeff in f.iter_raw():
            if mono <= m:
                return
            yield mono, coeff

    return HahnSeries(f.group, factory, known_finite=True if f.known_finite else None)


def fragment(f: HahnSeries, segments: SegmentSet) -> HahnSeries:
    """f|S : termes dont le monôme est dans ∪S"""

    def factory() -> Iterator[RawTerm]:
        for mono, coeff in f.iter_raw():
            if segments.is_below(mono):
                return
            yield mono, (coeff if mono in segments else Fraction(0))

    return HahnSeries(f.group, factory, known_finite=True if f.known_finite else None)


def v_truncate(f: HahnSeries, v: ArchClass) -> HahnSeries:
    """
    Termes de classe archimédienne strictement plus fine que v ;
    pour v = ∞ seul le terme constant est conservé.
    """
    identity = f.group.identity()

    def factory() -> Iterator[RawTerm]:
        for mono, coeff in f.iter_raw():
            cls = arch_class(mono)
            if cls > v or (v == INFINITE_CLASS and mono == identity):
                yield mono, coeff
                continue
            yield mono, Fraction(0)
            # sous 1, tout monôme plus petit est au moins aussi grossier
            if mono < identity:
                return

    return HahnSeries(f.group, factory, known_finite=True if f.known_finite else None)


# Unités

class NormalForm(NamedTuple):
    """f = 𝔪·(k + ε) avec ε infinitésimal"""

    monomial: Monomial
    coeff: Fraction
    epsilon: HahnSeries


def normal_form(f: HahnSeries) -> NormalForm:
    lead = leading_term(f)
    if lead is None:
        raise NotInvertibleError("La série nulle n'a pas de forme normale")
    m0, k = lead
    inverse = m0.inverse()

    def factory() -> Iterator[RawTerm]:
        started = False
        for mono, coeff in f.iter_raw():
            if not started:
                started = mono == m0
                continue
            yield mono * inverse, coeff

    epsilon = HahnSeries(f.group, factory, known_finite=True if f.known_finite else None)
    return NormalForm(m0, k, epsilon)


def invert_unit(f: HahnSeries) -> HahnSeries:
    """
    Inverse de f = 𝔪(k + ε) : 𝔪^{-1} k^{-1} Σ_j (−ε/k)^j.

    La série g = Σ (−ε/k)^j vérifie g = 1 − (ε/k)·g ; elle est produite par un
    tas dont les lignes sont semées à chaque nouveau terme non nul de g.
    """
    m0, k, epsilon = normal_form(f)
    group = f.group
    identity = group.identity()

    def factory() -> Iterator[RawTerm]:
        emitted: List[RawTerm] = [(identity, Fraction(1))]
        yield emitted[0]
        heap: List[Tuple[tuple, int, int]] = []

        def push(i: int, j: int) -> None:
            e = epsilon.raw(i)
            if e is not None:
                heapq.heappush(heap, ((e[0] * emitted[j][0]).key, i, j))

        push(0, 0)
        while heap:
            key, i, j = heapq.heappop(heap)
            batch = [(i, j)]
            while heap and heap[0][0] == key:
                _, i2, j2 = heapq.heappop(heap)
                batch.append((i2, j2))
            coeff = Fraction(0)
            for i, j in batch:
                charge()
                coeff -= epsilon.raw(i)[1] / k * emitted[j][1]
                push(i + 1, j)
            i, j = batch[0]
            term = (epsilon.raw(i)[0] * emitted[j][0], coeff)
            emitted.append(term)
            if coeff:
                push(0, len(emitted) - 1)
            yield term

    g = HahnSeries(group, factory, known_finite=True if f.known_finite and epsilon.raw(0) is None else None)
    return monomial_shift(scalar_mul(1 / k, g), m0.inverse())


# Égalités à seuil

def eq_to_monomial(f: HahnSeries, g: HahnSeries, m: Monomial, budget: Optional[int] = None) -> bool:
    """
    Égalité des troncatures en 𝔪 : la différence tronquée n'énumère aucun terme.

    Raises:
        BudgetExhaustedError: décision impossible dans le budget
    """
    difference = truncate(sub(f, g), m)
    with observation(budget):
        return next(difference.iter_terms(), None) is None


def probe_equal(f: HahnSeries, g: HahnSeries, depth: int, threshold: Optional[Monomial] = None,
                budget: Optional[int] = None) -> bool:
    """Égalité des `depth` premiers termes (éventuellement au-dessus d'un seuil)"""
    if threshold is not None:
        f, g = truncate(f, threshold), truncate(g, threshold)
    with observation(budget):
        return take_terms(f, depth) == take_terms(g, depth)


def format_series(terms: Sequence[Term]) -> str:
    if not terms:
        return "0"
    return " + ".join(str(t) for t in terms)
