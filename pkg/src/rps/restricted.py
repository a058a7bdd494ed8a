"""
Séries restreintes (infinitésimalement convergentes) à coefficients de Hahn

f = Σ_m r_m x^m, m ∈ ℕ^x, chaque r_m étant une série de Hahn paresseuse.
Chaque série porte une borne de queue : tail(k) majore le support de tous
les r_m avec |m| ≥ k (None : ces coefficients sont nuls). La borne tail(0)
majore Supp_𝔐(f).
"""

import heapq
import threading
from fractions import Fraction
from itertools import count
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from src.order.combinatorics import (
    MultiIndex, index_add, index_binomial, index_splittings, index_sub, multi_indices, unit_index,
)
from src.order.exponents import RationalLike, as_rational, format_rational, rational_power
from src.order.monomials import ArchClass, Monomial, MonomialGroup, max_monomial
from src.series.budget import charge, observation
from src.series.hahn import (
    HahnSeries, RawTerm, add as hahn_add, constant as hahn_constant, leading_term, mul as hahn_mul,
    monomial_shift, probe_equal, scalar_mul as hahn_scalar_mul, support_above as hahn_support_above,
    truncate, v_truncate, zero as hahn_zero,
)
from src.series.summation import summable_sum
from src.utils.errors import CompositionError, GroupMismatchError, InvalidParameterError, VariableError
from src.utils.logger import get_logger

logger = get_logger(__name__)

Bound = Optional[Monomial]
IndexLike = Union[MultiIndex, Mapping[str, int]]


def series_bound(s: HahnSeries) -> Bound:
    """Majorant du support : monôme de la première entrée brute (None si nulle)"""
    first = s.raw(0)
    return None if first is None else first[0]


def _leading_monomial(s: HahnSeries) -> Bound:
    with observation():
        lead = leading_term(s)
    return None if lead is None else lead.monomial


def _max_bound(*bounds: Bound) -> Bound:
    return max_monomial(b for b in bounds if b is not None)


def _times(a: Bound, b: Bound) -> Bound:
    if a is None or b is None:
        return None
    return a * b


class Rps:
    """
    Série restreinte paresseuse.

    Les coefficients sont mémoïsés sous verrou ; `degree_bound` (si connu)
    annule tous les r_m avec |m| > degree_bound.
    """

    def __init__(self, group: MonomialGroup, variables: Sequence[str],
                 coefficient: Callable[[MultiIndex], HahnSeries],
                 tail_bound: Callable[[int], Bound],
                 degree_bound: Optional[int] = None,
                 label: str = "rps"):
        if len(set(variables)) != len(variables):
            raise VariableError(f"Variables dupliquées: {list(variables)}")
        self.group = group
        self.variables: Tuple[str, ...] = tuple(variables)
        self.degree_bound = degree_bound
        self.label = label
        self._coefficient = coefficient
        self._tail = tail_bound
        self._memo: Dict[MultiIndex, HahnSeries] = {}
        self._tails: Dict[int, Bound] = {}
        self._lock = threading.RLock()

    @property
    def arity(self) -> int:
        return len(self.variables)

    def normalize_index(self, index: IndexLike) -> MultiIndex:
        if isinstance(index, Mapping):
            unknown = set(index) - set(self.variables)
            if unknown:
                raise VariableError(f"Variables inconnues {sorted(unknown)} pour {self.label}")
            return tuple(int(index.get(v, 0)) for v in self.variables)
        index = tuple(int(i) for i in index)
        if len(index) != self.arity:
            raise VariableError(f"Multi-indice {index} de longueur {len(index)}, attendu {self.arity}")
        return index

    def coeff(self, index: IndexLike = None) -> HahnSeries:
        """r_m"""
        index = self.normalize_index(index if index is not None else (0,) * self.arity)
        if any(i < 0 for i in index):
            return hahn_zero(self.group)
        if self.degree_bound is not None and sum(index) > self.degree_bound:
            return hahn_zero(self.group)
        with self._lock:
            if index not in self._memo:
                self._memo[index] = self._coefficient(index)
            return self._memo[index]

    def tail(self, k: int) -> Bound:
        """Majorant du support des r_m avec |m| ≥ k"""
        k = max(k, 0)
        if self.degree_bound is not None and k > self.degree_bound:
            return None
        with self._lock:
            if k not in self._tails:
                self._tails[k] = self._tail(k)
            return self._tails[k]

    @property
    def support_bound(self) -> Bound:
        return self.tail(0)

    def indices(self, max_degree: int) -> List[MultiIndex]:
        if self.degree_bound is not None:
            max_degree = min(max_degree, self.degree_bound)
        return multi_indices(self.arity, max_degree) if max_degree >= 0 else []

    def __add__(self, other: "Rps") -> "Rps":
        return add(self, other)

    def __sub__(self, other: "Rps") -> "Rps":
        return sub(self, other)

    def __neg__(self) -> "Rps":
        return neg(self)

    def __mul__(self, other) -> "Rps":
        if isinstance(other, Rps):
            return mul(self, other)
        if isinstance(other, Monomial):
            return monomial_mul(self, other)
        return scalar_mul(other, self)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"Rps[{self.label}]({', '.join(self.variables)})"


# Constructeurs

def zero_rps(group: MonomialGroup, variables: Sequence[str] = ()) -> Rps:
    return Rps(group, variables, lambda index: hahn_zero(group), lambda k: None, degree_bound=0, label="0")


def embed(s: HahnSeries, variables: Sequence[str] = ()) -> Rps:
    """Série de Hahn vue comme série restreinte constante"""
    group = s.group

    def coefficient(index: MultiIndex) -> HahnSeries:
        return s if not any(index) else hahn_zero(group)

    def tail(k: int) -> Bound:
        return series_bound(s) if k == 0 else None

    return Rps(group, variables, coefficient, tail, degree_bound=0, label="const")


def projection(group: MonomialGroup, variables: Sequence[str], name: str) -> Rps:
    """La variable `name` elle-même"""
    if name not in variables:
        raise VariableError(f"Variable {name} absente de {list(variables)}")
    target = unit_index(len(variables), list(variables).index(name))
    one = group.identity()

    def coefficient(index: MultiIndex) -> HahnSeries:
        return hahn_constant(group, 1) if index == target else hahn_zero(group)

    def tail(k: int) -> Bound:
        return one if k <= 1 else None

    return Rps(group, variables, coefficient, tail, degree_bound=1, label=name)


def from_coefficients(group: MonomialGroup, variables: Sequence[str],
                      coefficients: Mapping[MultiIndex, HahnSeries]) -> Rps:
    """Série à nombre fini de coefficients non nuls"""
    table = {tuple(k): v for k, v in coefficients.items()}
    degree_bound = max((sum(k) for k in table), default=0)

    def coefficient(index: MultiIndex) -> HahnSeries:
        return table.get(index, hahn_zero(group))

    def tail(k: int) -> Bound:
        return _max_bound(*(series_bound(v) for idx, v in table.items() if sum(idx) >= k))

    return Rps(group, variables, coefficient, tail, degree_bound=degree_bound, label="finite")


def align(f: Rps, variables: Sequence[str]) -> Rps:
    """Plonge f dans un ensemble de variables plus grand"""
    variables = tuple(variables)
    if variables == f.variables:
        return f
    missing = set(f.variables) - set(variables)
    if missing:
        raise VariableError(f"Variables {sorted(missing)} absentes de {list(variables)}")
    positions = [variables.index(v) for v in f.variables]
    others = [i for i in range(len(variables)) if i not in positions]

    def coefficient(index: MultiIndex) -> HahnSeries:
        if any(index[i] for i in others):
            return hahn_zero(f.group)
        return f.coeff(tuple(index[i] for i in positions))

    return Rps(f.group, variables, coefficient, f.tail, f.degree_bound, label=f.label)


def _common(f: Rps, g: Rps) -> Tuple[Rps, Rps]:
    if f.group != g.group:
        raise GroupMismatchError(f"Séries restreintes sur des groupes différents: [{f.group}] / [{g.group}]")
    if f.variables == g.variables:
        return f, g
    variables = tuple(sorted(set(f.variables) | set(g.variables)))
    return align(f, variables), align(g, variables)


# Anneau

def add(f: Rps, g: Rps) -> Rps:
    f, g = _common(f, g)
    degree = None if f.degree_bound is None or g.degree_bound is None else max(f.degree_bound, g.degree_bound)
    return Rps(f.group, f.variables,
               lambda index: hahn_add(f.coeff(index), g.coeff(index)),
               lambda k: _max_bound(f.tail(k), g.tail(k)),
               degree, label=f"({f.label} + {g.label})")


def scalar_mul(c: RationalLike, f: Rps) -> Rps:
    k = as_rational(c)
    if k == 0:
        return zero_rps(f.group, f.variables)
    return Rps(f.group, f.variables, lambda index: hahn_scalar_mul(k, f.coeff(index)), f.tail,
               f.degree_bound, label=f"{format_rational(k)}*{f.label}")


def neg(f: Rps) -> Rps:
    return scalar_mul(-1, f)


def sub(f: Rps, g: Rps) -> Rps:
    return add(f, neg(g))


def monomial_mul(f: Rps, n: Monomial) -> Rps:
    """𝔫·f"""
    if n.is_identity():
        return f
    return Rps(f.group, f.variables, lambda index: monomial_shift(f.coeff(index), n),
               lambda k: _times(f.tail(k), n), f.degree_bound, label=f"{n}*{f.label}")


def mul(f: Rps, g: Rps) -> Rps:
    """Produit de Cauchy classique, coefficients par produits de Hahn"""
    f, g = _common(f, g)

    def coefficient(index: MultiIndex) -> HahnSeries:
        total = hahn_zero(f.group)
        for a, b in index_splittings(index):
            total = hahn_add(total, hahn_mul(f.coeff(a), g.coeff(b)))
        return total

    def tail(k: int) -> Bound:
        return _max_bound(*(_times(f.tail(i), g.tail(k - i)) for i in range(k + 1)))

    degree = None if f.degree_bound is None or g.degree_bound is None else f.degree_bound + g.degree_bound
    return Rps(f.group, f.variables, coefficient, tail, degree, label=f"({f.label} * {g.label})")


def power(f: Rps, exponent: int) -> Rps:
    result = embed(hahn_constant(f.group, 1), f.variables)
    for _ in range(exponent):
        result = mul(result, f)
    return result


def derivative(f: Rps, name: str) -> Rps:
    """∂_x f : coefficient de x^m égal à (m_x + 1) r_{m+e_x}"""
    if name not in f.variables:
        raise VariableError(f"Variable {name} absente de {f.label}")
    unit = unit_index(f.arity, f.variables.index(name))
    position = f.variables.index(name)

    def coefficient(index: MultiIndex) -> HahnSeries:
        return hahn_scalar_mul(index[position] + 1, f.coeff(index_add(index, unit)))

    degree = None if f.degree_bound is None else max(f.degree_bound - 1, 0)
    return Rps(f.group, f.variables, coefficient, lambda k: f.tail(k + 1), degree, label=f"D({f.label}, {name})")


def iterated_derivative(f: Rps, orders: MultiIndex) -> Rps:
    """∂_h f pour un multi-indice h"""
    result = f
    for name, times in zip(f.variables, orders):
        for _ in range(times):
            result = derivative(result, name)
    return result


# Troncatures

def coeff_trunc(f: Rps, m: Monomial) -> Rps:
    """f‖𝔪 : chaque coefficient tronqué en 𝔪"""

    def tail(k: int) -> Bound:
        bound = f.tail(k)
        return None if bound is None or bound <= m else bound

    return Rps(f.group, f.variables, lambda index: truncate(f.coeff(index), m), tail, f.degree_bound,
               label=f"{f.label}‖{m}")


def coeff_trunc_v(f: Rps, v: ArchClass) -> Rps:
    """f‖v : troncature archimédienne de chaque coefficient"""
    return Rps(f.group, f.variables, lambda index: v_truncate(f.coeff(index), v), f.tail, f.degree_bound,
               label=f"{f.label}‖{v}")


# Observations

def is_composable(f: Rps) -> bool:
    """Supp_𝔐(f) ≤ 1 et r_0 infinitésimal"""
    one = f.group.identity()
    bound = f.support_bound
    if bound is not None and bound > one:
        return False
    with observation():
        lead = leading_term(f.coeff())
    return lead is None or lead.monomial < one


def support_above(f: Rps, cutoff: Optional[Monomial], max_degree: int) -> List[Monomial]:
    """Monômes de Supp_𝔐(f) au-dessus de `cutoff`, indices de degré ≤ max_degree, décroissants"""
    found = set()
    for index in f.indices(max_degree):
        found.update(hahn_support_above(f.coeff(index), cutoff))
    return sorted(found, key=lambda m: m.key)


def agree(f: Rps, g: Rps, depth: int, max_degree: int, threshold: Optional[Monomial] = None) -> bool:
    """Égalité à seuil des coefficients d'indice de degré ≤ max_degree"""
    f, g = _common(f, g)
    for index in multi_indices(f.arity, max_degree):
        if not probe_equal(f.coeff(index), g.coeff(index), depth, threshold):
            return False
    return True


# Composition

def compose(f: Rps, arguments: Sequence[Rps], variables: Optional[Sequence[str]] = None) -> Rps:
    """
    f(g) = Σ_m r_m Π g_i^{m_i}.

    Chaque coefficient du résultat est une somme sommable : les facteurs
    constants des g_i sont infinitésimaux, donc au-delà de |q| facteurs la
    contribution de r_m est bornée par tail(|m|)·e^{|m|−|q|}.

    Raises:
        CompositionError: argument non composable ou arité incorrecte
    """
    if len(arguments) != f.arity:
        raise CompositionError(f"{f.label} attend {f.arity} arguments, reçu {len(arguments)}")
    if variables is None:
        variables = tuple(sorted({v for g in arguments for v in g.variables}))
    variables = tuple(variables)
    args = []
    for g in arguments:
        if g.group != f.group:
            raise GroupMismatchError(f"Argument {g.label} hors du groupe [{f.group}]")
        if not is_composable(g):
            raise CompositionError(f"Argument non composable: {g.label}")
        args.append(align(g, variables))
    logger.debug(f"Composition de {f.label} en {len(args)} argument(s) sur {list(variables)}")
    group = f.group
    constant_bound = _max_bound(*(_leading_monomial(g.coeff()) for g in args))
    powers: Dict[MultiIndex, Rps] = {(0,) * f.arity: embed(hahn_constant(group, 1), variables)}
    lock = threading.RLock()

    def power_of(m: MultiIndex) -> Rps:
        with lock:
            if m not in powers:
                i = next(pos for pos, e in enumerate(m) if e)
                powers[m] = mul(power_of(index_sub(m, unit_index(f.arity, i))), args[i])
            return powers[m]

    def coefficient(q: MultiIndex) -> HahnSeries:
        size_q = sum(q)
        seed = (0,) * f.arity

        def successors(m: MultiIndex):
            return [index_add(m, unit_index(f.arity, i)) for i in range(f.arity)]

        def bound(m: MultiIndex) -> Bound:
            size = sum(m)
            head = f.tail(size)
            if head is None:
                return None
            extra = size - size_q
            if extra <= 0:
                return head
            if constant_bound is None:
                return None
            return head * constant_bound ** extra

        def series_for(m: MultiIndex) -> HahnSeries:
            return hahn_mul(f.coeff(m), power_of(m).coeff(q))

        return summable_sum(group, [seed], successors, bound, series_for)

    degree = None
    if f.degree_bound is not None and all(g.degree_bound is not None for g in args):
        degree = f.degree_bound * max((g.degree_bound for g in args), default=0)

    def tail(k: int) -> Bound:
        return f.tail(0)

    return Rps(group, variables, coefficient, tail, degree, label=f"{f.label}∘({', '.join(g.label for g in args)})")


def taylor_shift(f: Rps, shift_names: Optional[Sequence[str]] = None) -> Rps:
    """
    f(x + z) en variables (x, z) : le coefficient de x^a z^h vaut
    Π (a_i + h_i choose h_i) r_{a+h}.
    """
    names = tuple(shift_names) if shift_names is not None else tuple(f"{v}'" for v in f.variables)
    if len(names) != f.arity or set(names) & set(f.variables):
        raise VariableError(f"Variables de décalage invalides: {list(names)}")
    n = f.arity

    def coefficient(index: MultiIndex) -> HahnSeries:
        a, h = index[:n], index[n:]
        total = index_add(a, h)
        return hahn_scalar_mul(index_binomial(total, h), f.coeff(total))

    return Rps(f.group, f.variables + names, coefficient, f.tail, f.degree_bound, label=f"shift({f.label})")


# Séries généralisées instanciées

def from_gps(f, scales: Mapping[str, RationalLike], monomials: Mapping[str, Monomial],
             group: Optional[MonomialGroup] = None) -> Rps:
    """
    f_{a𝔪} : f(𝔪(a + ε), y) = Σ_m r_m ε^m y^n avec
    r_{m,n} = Σ_γ (γ choose m) c_{γ,n} a^{γ−m} 𝔪^γ.

    Les variables de la série restreinte sont celles de f : ε_x pour une
    variable affectée, y pour une variable classique laissée libre.

    Raises:
        VariableError: variable non classique sans affectation
        InvalidParameterError: a ≤ 0 ou 𝔪 ≥ 1
    """
    assigned = [v for v in f.variables if v in monomials]
    free = [v for v in f.variables if v not in monomials]
    for v in free:
        if v not in f.classical:
            raise VariableError(f"Variable non classique {v} sans affectation")
    if group is None:
        if not monomials:
            raise InvalidParameterError("Groupe de monômes requis sans affectation")
        group = next(iter(monomials.values())).group
    one = group.identity()
    a: Dict[str, Fraction] = {}
    for v in assigned:
        a[v] = as_rational(scales.get(v, 1))
        if a[v] <= 0:
            raise InvalidParameterError(f"Échelle de {v} non positive: {format_rational(a[v])}")
        if monomials[v].group != group:
            raise GroupMismatchError(f"Monôme de {v} hors du groupe [{group}]")
        if not monomials[v] < one:
            raise InvalidParameterError(f"Le monôme de {v} doit être infinitésimal, reçu {monomials[v]}")
    positions = {v: i for i, v in enumerate(f.variables)}
    lattices = [f.lattice[v] for v in assigned]
    steps = [lat.step for lat in lattices]
    mono = [monomials[v] for v in assigned]
    natural = [lat.is_natural() for lat in lattices]
    ceiling = f.ceiling

    def point_of(gamma: Tuple[Fraction, ...], n: Dict[str, int]) -> Tuple[Fraction, ...]:
        out = [Fraction(0)] * len(f.variables)
        for v, g in zip(assigned, gamma):
            out[positions[v]] = g
        for v, e in n.items():
            out[positions[v]] = Fraction(e)
        return tuple(out)

    def value(gamma: Tuple[Fraction, ...]) -> Monomial:
        result = one
        for m, g in zip(mono, gamma):
            result = result * (m ** g)
        return result

    def coefficient(index: MultiIndex) -> HahnSeries:
        m_index = tuple(index[positions[v]] for v in assigned)
        n = {v: index[positions[v]] for v in free}
        for v, e in n.items():
            lat = f.lattice[v]
            if e < lat.floor:
                return hahn_zero(group)
        n_degree = sum((Fraction(e) for e in n.values()), Fraction(0))
        start = tuple(max(lat.floor, Fraction(mi)) if nat else lat.floor
                      for lat, mi, nat in zip(lattices, m_index, natural))

        def factory() -> Iterator[RawTerm]:
            tick = count()
            heap: List[Tuple[tuple, int, Tuple[Fraction, ...]]] = []
            seen = set()

            def push(gamma: Tuple[Fraction, ...]) -> None:
                if gamma in seen:
                    return
                seen.add(gamma)
                if ceiling is not None and sum(gamma, Fraction(0)) + n_degree > ceiling:
                    return
                heapq.heappush(heap, (value(gamma).key, next(tick), gamma))

            push(start)
            while heap:
                key, _, gamma = heapq.heappop(heap)
                batch = [gamma]
                while heap and heap[0][0] == key:
                    batch.append(heapq.heappop(heap)[2])
                coeff = Fraction(0)
                for g in batch:
                    charge()
                    c = f.coeff_at(point_of(g, n))
                    if c:
                        scale = Fraction(1)
                        for ai, gi, mi in zip(a.values(), g, m_index):
                            scale *= rational_power(ai, gi - mi)
                        coeff += index_binomial(g, m_index) * c * scale
                    for i, step in enumerate(steps):
                        push(g[:i] + (g[i] + step,) + g[i + 1:])
                yield value(batch[0]), coeff

        return HahnSeries(group, factory, known_finite=True if not assigned else None)

    floor_bound = value(tuple(lat.floor for lat in lattices))
    # y^n ne porte aucun facteur 𝔪 : |m| ne borne le support que sans variable libre
    refined = bool(assigned) and all(natural) and not free
    largest = max_monomial(mono) if mono else None

    def tail(k: int) -> Bound:
        if refined and k > 0:
            return min(floor_bound, largest ** k)
        return floor_bound

    degree = None
    if ceiling is not None and all(natural) and all(f.lattice[v].is_natural() for v in free):
        degree = int(ceiling)
    return Rps(group, f.variables, coefficient, tail, degree, label=f"{f.describe()}_a𝔪")
