"""
Décompositions constructives des ‖-troncatures

  tc_product_decompose : (f·g)‖𝔪 = Σ_j (f‖𝔫_j)((g‖𝔭_lo) − (g‖𝔭_hi))
  tc_composition_witness : témoin de f(g)‖𝔪 sur les atomes de 𝒜 et ℬ°
"""

from fractions import Fraction
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from src.order.combinatorics import MultiIndex, compositions, index_factorial
from src.order.monomials import ArchClass, Monomial, MonomialGroup, arch_class, max_monomial
from src.order.segmentation import Segment, product_segmentation
from src.rps.restricted import (
    Rps, agree, align, coeff_trunc, compose, embed, mul, sub, support_above, zero_rps,
)
from src.rps.witness import (
    Atom, Compose, MembershipOracle, MonomialScalar, Product, Step, Sum, WitnessExpr,
    difference, scaled, zero_witness,
)
from src.series.budget import observation
from src.series.hahn import constant as hahn_constant, leading_term, listing
from src.utils.errors import CompositionError, WitnessDepthError
from src.utils.logger import get_logger
from src.utils.settings import get_setting

logger = get_logger(__name__)


def _index_depth(value: Optional[int]) -> int:
    return value if value is not None else int(get_setting("rps.index_depth", 3))


# Produits

class ProductCut(NamedTuple):
    """Terme (f‖n)·((g‖p_lo) − (g‖p_hi))"""

    n: Monomial
    p_lo: Monomial
    p_hi: Monomial


def _predecessor(chain: Sequence[Monomial], x: Monomial, cutoff: Monomial) -> Monomial:
    """Élément suivant x dans la chaîne décroissante, ou la coupure"""
    position = chain.index(x)
    return chain[position + 1] if position + 1 < len(chain) else cutoff


def product_cuts(f: Rps, g: Rps, m: Monomial, max_degree: Optional[int] = None) -> List[ProductCut]:
    """
    Points de coupure de (f·g)‖𝔪 lus sur les supports de f et g au-dessus
    de 𝔪 / borne(g) et 𝔪 / borne(f), indices de degré ≤ max_degree.
    """
    max_degree = _index_depth(max_degree)
    bound_f, bound_g = f.support_bound, g.support_bound
    if bound_f is None or bound_g is None:
        return []
    cutoff_f, cutoff_g = m / bound_g, m / bound_f
    first = support_above(f, cutoff_f, max_degree)
    second = support_above(g, cutoff_g, max_degree)
    cuts = []
    for block in product_segmentation(first, second, Segment.above(m)):
        n = _predecessor(first, block.final[-1], cutoff_f)
        p_lo = _predecessor(second, block.segment[-1], cutoff_g)
        cuts.append(ProductCut(n, p_lo, block.segment[0]))
    return cuts


class ProductDecomposition(NamedTuple):
    cuts: List[ProductCut]
    assembled: Rps
    target: Rps

    def verify(self, depth: Optional[int] = None, max_degree: Optional[int] = None) -> bool:
        """Identité exacte sur les indices de degré ≤ max_degree, à `depth` termes"""
        depth = depth if depth is not None else int(get_setting("rps.probe_terms", 12))
        return agree(self.assembled, self.target, depth, _index_depth(max_degree))


def tc_product_decompose(f: Rps, g: Rps, m: Monomial, max_degree: Optional[int] = None) -> ProductDecomposition:
    f, g = _aligned_pair(f, g)
    cuts = product_cuts(f, g, m, max_degree)
    assembled = zero_rps(f.group, f.variables)
    for cut in cuts:
        window = sub(coeff_trunc(g, cut.p_lo), coeff_trunc(g, cut.p_hi))
        assembled = assembled + mul(coeff_trunc(f, cut.n), window)
    logger.debug(f"tc_product: {len(cuts)} coupures en {m}")
    return ProductDecomposition(cuts, assembled, coeff_trunc(mul(f, g), m))


def _aligned_pair(f: Rps, g: Rps) -> Tuple[Rps, Rps]:
    variables = tuple(sorted(set(f.variables) | set(g.variables)))
    return align(f, variables), align(g, variables)


class Factor(NamedTuple):
    """Facteur d'un produit : sa valeur et le témoin de ses troncatures"""

    value: Rps
    trunc: Callable[[Monomial], WitnessExpr]


def _product_bound(factors: Sequence[Factor]) -> Optional[Monomial]:
    """Majorant du support du produit, None si un facteur est nul"""
    bound = None
    for factor in factors:
        current = factor.value.support_bound
        if current is None:
            return None
        bound = current if bound is None else bound * current
    return bound


def truncated_product(factors: Sequence[Factor], m: Monomial, max_degree: Optional[int] = None) -> WitnessExpr:
    """Témoin de (F_1 ··· F_k)‖𝔪 par coupures successives F_1 · (F_2 ··· F_k)"""
    if not factors:
        raise ValueError("Produit vide")
    # support du produit entièrement sous 𝔪 : troncature nulle
    bound = _product_bound(factors)
    if bound is None or bound <= m:
        return zero_witness()
    if len(factors) == 1:
        return factors[0].trunc(m)
    first, rest = factors[0], list(factors[1:])
    rest_value = rest[0].value
    for factor in rest[1:]:
        rest_value = mul(rest_value, factor.value)
    tail = Factor(rest_value, lambda p: truncated_product(rest, p, max_degree))
    terms = []
    for cut in product_cuts(first.value, tail.value, m, max_degree):
        terms.append(Product((first.trunc(cut.n), difference(tail.trunc(cut.p_lo), tail.trunc(cut.p_hi)))))
    return Sum(tuple(terms))


# Compositions

def _same_coset(n: Monomial, m: Monomial, v: ArchClass) -> bool:
    return n == m or arch_class(n / m) > v


class CompositionWitnessBuilder:
    """
    Construit un témoin de f(g)‖𝔪 par récurrence sur les supports.

    Cas 1 (un élément de Supp(g) a une classe ≤ val 𝔪) : développement de
    Taylor fini autour de g tronqué sous sa partie grossière.
    Cas 2 : coupure de f en 𝔭 = max des 𝔪_m et récursion sur (f − f‖𝔭)/𝔭.
    """

    def __init__(self, algebra: MembershipOracle, arguments: MembershipOracle,
                 group: MonomialGroup, variables: Sequence[str],
                 max_depth: Optional[int] = None, index_depth: Optional[int] = None,
                 index_cap: Optional[int] = None, taylor_cap: Optional[int] = None):
        self.algebra = algebra
        self.arguments = arguments
        self.group = group
        self.variables = tuple(variables)
        self.max_depth = max_depth if max_depth is not None else int(get_setting("witness.max_depth", 40))
        self.index_depth = _index_depth(index_depth)
        self.index_cap = index_cap if index_cap is not None else int(get_setting("witness.index_cap", 12))
        self.taylor_cap = taylor_cap if taylor_cap is not None else int(get_setting("witness.taylor_cap", 40))
        self._powers: Dict[Tuple[Tuple[str, ...], MultiIndex], Rps] = {}

    def build(self, f: Atom, arguments: Sequence[Atom], m: Monomial) -> WitnessExpr:
        if len(arguments) != f.value.arity:
            raise CompositionError(f"{f.label} attend {f.value.arity} arguments, reçu {len(arguments)}")
        return self._compose_trunc(f, tuple(arguments), m, 0)

    # Données de support

    def _leading(self, series) -> Optional[Monomial]:
        with observation():
            lead = leading_term(series)
        return None if lead is None else lead.monomial

    def _support_top(self, f: Rps) -> Optional[Monomial]:
        best = None
        for k in range(self.index_cap + 1):
            bound = f.tail(k)
            if bound is None or (best is not None and bound <= best):
                break
            for index in compositions(k, f.arity):
                lead = self._leading(f.coeff(index))
                if lead is not None and (best is None or lead > best):
                    best = lead
        return best

    def _projection_index(self, f: Rps) -> Optional[int]:
        if f.degree_bound is None or f.degree_bound > 1:
            return None
        if self._leading(f.coeff()) is not None:
            return None
        one = self.group.identity()
        found = None
        for i in range(f.arity):
            unit = tuple(1 if j == i else 0 for j in range(f.arity))
            observed = listing(f.coeff(unit), 2)
            if not observed.terms:
                continue
            if found is not None or not observed.exhausted or observed.terms != [(one, Fraction(1))]:
                return None
            found = i
        return found

    def _power(self, arguments: Tuple[Atom, ...], index: MultiIndex) -> Rps:
        key = (tuple(a.label for a in arguments), index)
        if key not in self._powers:
            result = embed(hahn_constant(self.group, 1), self.variables)
            for atom, times in zip(arguments, index):
                for _ in range(times):
                    result = mul(result, atom.evaluate(self.group, self.variables))
            self._powers[key] = result
        return self._powers[key]

    def _has_term_at_most(self, value: Rps, x: Monomial) -> bool:
        for index in value.indices(self.index_depth):
            with observation():
                for term in value.coeff(index).iter_terms():
                    if term.monomial <= x:
                        return True
        return False

    # Récurrence

    def _compose_trunc(self, f: Atom, arguments: Tuple[Atom, ...], m: Monomial, depth: int) -> WitnessExpr:
        if depth > self.max_depth:
            raise WitnessDepthError(f"Profondeur {self.max_depth} dépassée pour {f.label} en {m}")
        value = f.value
        if value.arity == 0:
            return self.algebra.derive(f, Step('trunc', m))
        projection = self._projection_index(value)
        if projection is not None:
            return self.arguments.derive(arguments[projection], Step('trunc', m))

        one = self.group.identity()
        top = self._support_top(value)
        if top is None:
            return zero_witness()
        if top > one:
            reduced = self.algebra.derive(f, Step('monomial', top.inverse()))
            return MonomialScalar(top, self._compose_trunc(reduced, arguments, m / top, depth + 1))
        if m >= one:
            return zero_witness()

        # les termes de g sous 𝔪 ne contribuent pas au-dessus de 𝔪
        arguments = tuple(self.arguments.derive(g, Step('trunc', m)) for g in arguments)
        v = arch_class(m)
        support = set()
        for g in arguments:
            support.update(support_above(g.value, m, self.index_depth))
        coarse = [s for s in support if arch_class(s) <= v]
        if coarse:
            return self._case_coarse(f, arguments, m, max_monomial(coarse), depth)
        return self._case_fine(f, arguments, m, v, depth)

    def _case_coarse(self, f: Atom, arguments: Tuple[Atom, ...], m: Monomial,
                     cut: Monomial, depth: int) -> WitnessExpr:
        bound, current = 1, cut
        while current > m:
            bound += 1
            current = current * cut
            if bound > self.taylor_cap:
                raise WitnessDepthError(f"Ordre de Taylor > {self.taylor_cap} pour {cut} au-dessus de {m}")
        inner = tuple(self.arguments.derive(g, Step('trunc', cut)) for g in arguments)
        inner_values = [a.value for a in inner]
        logger.debug(f"Cas grossier en {m}: coupure {cut}, ordre {bound}")

        def delta(i: int) -> Factor:
            def trunc(p: Monomial, i=i) -> WitnessExpr:
                upper = self.arguments.derive(arguments[i], Step('trunc', max(m, p)))
                lower = self.arguments.derive(arguments[i], Step('trunc', max(cut, p)))
                return difference(upper, lower)
            return Factor(sub(arguments[i].value, inner[i].value), trunc)

        terms: List[WitnessExpr] = []
        variables = f.value.variables
        for size in range(bound):
            for h in compositions(size, f.value.arity):
                derived = f
                for name, times in zip(variables, h):
                    for _ in range(times):
                        derived = self.algebra.derive(derived, Step('deriv', variable=name))

                def outer_trunc(p: Monomial, derived=derived) -> WitnessExpr:
                    return self._compose_trunc(derived, inner, p, depth + 1)

                factors = [Factor(compose(derived.value, inner_values, self.variables), outer_trunc)]
                for i, times in enumerate(h):
                    factors.extend(delta(i) for _ in range(times))
                product = truncated_product(factors, m, self.index_depth)
                terms.append(scaled(Fraction(1, index_factorial(h)), product))
        return Sum(tuple(terms))

    def _coset_cut(self, coefficient, power: Rps, m: Monomial, v: ArchClass) -> Optional[Monomial]:
        """𝔪_m : premier 𝔫 de la classe de 𝔪 tel que 𝔫·g^m a un terme ≤ 𝔪, sinon premier 𝔫 sous la classe"""
        with observation():
            for term in coefficient.iter_terms():
                n = term.monomial
                if _same_coset(n, m, v):
                    if self._has_term_at_most(power, m / n):
                        return n
                elif n < m:
                    return n
        return None

    def _case_fine(self, f: Atom, arguments: Tuple[Atom, ...], m: Monomial,
                   v: ArchClass, depth: int) -> WitnessExpr:
        value = f.value
        best: Optional[Monomial] = None
        for k in range(self.index_cap + 1):
            bound = value.tail(k)
            if bound is None or (best is not None and bound <= best):
                break
            for index in compositions(k, value.arity):
                candidate = self._coset_cut(value.coeff(index), self._power(arguments, index), m, v)
                if candidate is not None and (best is None or candidate > best):
                    best = candidate
        if best is None or not _same_coset(best, m, v):
            outer = f if best is None else self.algebra.derive(f, Step('trunc', best))
            return Compose(outer, arguments)
        logger.debug(f"Cas fin en {m}: coupure de f en {best}")
        head = self.algebra.derive(f, Step('trunc', best))
        rest = self.algebra.derive(self.algebra.derive(f, Step('sub_trunc', best)), Step('monomial', best.inverse()))
        return Sum((Compose(head, arguments),
                    MonomialScalar(best, self._compose_trunc(rest, arguments, m / best, depth + 1))))


def tc_composition_witness(f: Union[Atom, Rps], arguments: Sequence[Union[Atom, Rps]], m: Monomial,
                           algebra: MembershipOracle, argument_oracle: MembershipOracle,
                           variables: Optional[Sequence[str]] = None, **options) -> WitnessExpr:
    """
    Témoin de f(g)‖𝔪 dont les feuilles sont des atomes de 𝒜 et ℬ°, des
    scalaires et des monômes.

    Raises:
        OracleRefusalError: une étape sort des clôtures déclarées
        WitnessDepthError: profondeur de récurrence dépassée
    """
    if isinstance(f, Rps):
        f = algebra.register(f.label, f)
    atoms = []
    for i, g in enumerate(arguments):
        if isinstance(g, Rps):
            g = argument_oracle.register(f"g{i}:{g.label}", g)
        atoms.append(g)
    if variables is None:
        variables = tuple(sorted({v for a in atoms for v in a.value.variables}))
    builder = CompositionWitnessBuilder(algebra, argument_oracle, f.value.group, variables, **options)
    return builder.build(f, atoms, m)


def verify_witness(witness: WitnessExpr, f: Rps, arguments: Sequence[Rps], m: Monomial,
                   variables: Sequence[str], depth: Optional[int] = None,
                   max_degree: Optional[int] = None) -> bool:
    """Évaluation du témoin comparée à compose(f, g)‖𝔪"""
    depth = depth if depth is not None else int(get_setting("rps.probe_terms", 12))
    expected = coeff_trunc(compose(f, list(arguments), variables), m)
    return agree(witness.evaluate(f.group, variables), expected, depth, _index_depth(max_degree))
