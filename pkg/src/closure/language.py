"""
Langages ℱ de séries généralisées, extension ℱ_b et instanciation ℱ_𝔐

Un langage est donné par des générateurs et des drapeaux de clôture. Les
drapeaux disent quelles étapes de dérivation l'oracle de 𝒜 accepte ; la
vérification « presque fine » les contrôle sur les générateurs jusqu'à un
degré donné.
"""

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from src.gps.blowups import (
    BlowupAffine, BlowupMult, ComposeClassical, ComposePComp, Dilation, MonomialSubstitution, blowup_affine,
)
from src.gps.classify import normal_form
from src.gps.expr import (
    FiniteSeries, FragmentSpec, GpsExpr, Reindex, derivative as gps_derivative, fragment_gps, renorm_derivative,
    variable,
)
from src.gps.families import GpsFamily
from src.order.exponents import RationalLike, as_rational
from src.order.monomials import Monomial, MonomialGroup
from src.order.segmentation import Segment
from src.rps.restricted import Rps, agree, coeff_trunc, derivative, from_gps, monomial_mul
from src.utils.errors import InvalidParameterError, NormalFormError
from src.utils.logger import get_logger
from src.utils.settings import get_setting

logger = get_logger(__name__)

CLOSURE_FLAGS = frozenset({'reindex', 'ring', 'renorm-derivative', 'partial-truncation', 'blowups'})


def _is_polynomial(f: GpsExpr) -> bool:
    """Série finie à exposants entiers positifs"""
    if f.ceiling is None:
        return False
    return all(e >= 0 and e.denominator == 1 for point in f.table(f.ceiling) for e in point)


@dataclass
class LanguageF:
    """
    Langage ℱ : générateurs nommés et drapeaux de clôture.

    Avec 'ring', les polynômes à coefficients rationnels sont membres dès
    que les projections le sont.
    """

    generators: Dict[str, GpsExpr]
    flags: FrozenSet[str] = frozenset()
    name: str = "F"
    grade: Fraction = field(default_factory=lambda: as_rational(get_setting("closure.language_grade", 6)))
    member_depth: int = field(default_factory=lambda: int(get_setting("closure.member_depth", 2)))

    def __post_init__(self):
        self.flags = frozenset(self.flags)
        unknown = self.flags - CLOSURE_FLAGS
        if unknown:
            raise InvalidParameterError(f"Drapeaux de clôture inconnus: {sorted(unknown)}")
        self._family: Optional[GpsFamily] = None

    @property
    def family(self) -> GpsFamily:
        if self._family is None:
            self._family = GpsFamily(self.generators.values(), language='reindex' in self.flags,
                                     algebra='ring' in self.flags, grade=self.grade)
        return self._family

    def has(self, flag: str) -> bool:
        return flag in self.flags

    def allowed_steps(self) -> FrozenSet[str]:
        """Étapes de dérivation des atomes de 𝒜 acceptées par l'oracle"""
        steps = {'monomial'}
        if self.has('partial-truncation'):
            steps |= {'trunc', 'sub_trunc'}
        if self.has('renorm-derivative'):
            steps.add('deriv')
        return frozenset(steps)

    def contains_projections(self) -> bool:
        if self.has('reindex'):
            return self.family.contains(variable("x"), depth=0)
        names = self._variables()
        return bool(names) and all(self.family.contains(variable(v), depth=0) for v in names)

    def _variables(self) -> List[str]:
        return sorted({v for g in self.generators.values() for v in g.variables})

    def contains(self, candidate: GpsExpr, depth: Optional[int] = None) -> bool:
        """Appartenance syntaxique, à `grade` près"""
        depth = self.member_depth if depth is None else depth
        if self.has('ring') and _is_polynomial(candidate) and self.contains_projections():
            return True
        return self.family.contains(candidate, depth=depth, up_to_scalar=self.has('ring'))

    def members(self, depth: Optional[int] = None) -> List[GpsExpr]:
        return self.family.members(self.member_depth if depth is None else depth)

    def almost_fine(self, grade: Optional[RationalLike] = None, depth: Optional[int] = None) -> "AlmostFineReport":
        """
        Propriétés (1) et (2) sur les générateurs : troncatures partielles et
        projections, dérivées renormalisées.
        """
        violations: List[str] = []
        if 'ring' not in self.flags:
            violations.append("ring: drapeau absent")
        if 'partial-truncation' not in self.flags:
            violations.append("partial-truncation: drapeau absent")
        elif not self.contains_projections():
            violations.append("partial-truncation: projections absentes")
        if 'renorm-derivative' not in self.flags:
            violations.append("renorm-derivative: drapeau absent")
        for label, f in sorted(self.generators.items()):
            for v in f.variables:
                lattice = f.lattice[v]
                if 'partial-truncation' in self.flags:
                    for j in (1, 2):
                        cut = lattice.floor + j * lattice.step
                        piece = fragment_gps(f, FragmentSpec.partial(**{v: Segment.below(cut)}))
                        if not self.contains(piece, depth):
                            violations.append(f"partial-truncation: {label}|{v}<{cut}")
                if 'renorm-derivative' in self.flags and not self.contains(renorm_derivative(f, v), depth):
                    violations.append(f"renorm-derivative: {label} en {v}")
        report = AlmostFineReport(self.name, not violations, violations)
        if violations:
            logger.warning(f"Langage {self.name} non presque fin: {violations[:3]}")
        return report


class AlmostFineReport(NamedTuple):
    language: str
    almost_fine: bool
    violations: List[str]

    def to_json(self) -> dict:
        return {'language': self.language, 'almost_fine': self.almost_fine, 'violations': list(self.violations)}


# ℱ_b

class BlowupLanguage(LanguageF):
    """ℱ_b : ℱ étendu par composition à droite avec des polynômes p-composables à coefficients positifs"""

    base: Optional[LanguageF] = None

    def contains(self, candidate: GpsExpr, depth: Optional[int] = None) -> bool:
        node = candidate
        while True:
            if isinstance(node, (BlowupAffine, BlowupMult, Dilation)):
                node = node.child
            elif isinstance(node, MonomialSubstitution):
                if any(e <= 0 for e in node.target.values()):
                    return False
                node = node.child
            elif isinstance(node, (ComposePComp, ComposeClassical)):
                if not _positive_pcomposable(node.argument):
                    return False
                node = node.child
            elif isinstance(node, Reindex) and self.has('reindex'):
                node = node.child
            else:
                return self.base.contains(node, depth)

    def members(self, depth: Optional[int] = None) -> List[GpsExpr]:
        """Membres de ℱ et leurs éclatements affines x ↦ z0(z1 + k)"""
        members = self.base.members(depth)
        out = list(members)
        for k in get_setting("closure.blowup_scales", [1]):
            for f in members:
                for v in f.variables:
                    if v in f.classical:
                        continue
                    out.append(blowup_affine(f, v, f"{v}0", f"{v}1", k))
        return out


def _positive_pcomposable(g: GpsExpr) -> bool:
    if not isinstance(g, FiniteSeries) or not _is_polynomial(g):
        return False
    if any(c <= 0 for c in g.table(g.ceiling).values()):
        return False
    try:
        return normal_form(g).is_p_composable()
    except NormalFormError:
        return False


def make_Fb(F: LanguageF) -> BlowupLanguage:
    if 'ring' not in F.flags:
        logger.warning(f"ℱ_b construit sur {F.name} qui n'est pas une algèbre")
    extended = BlowupLanguage(dict(F.generators), F.flags | {'blowups'}, f"{F.name}_b", F.grade, F.member_depth)
    extended.base = F
    return extended


# ℱ_𝔐

class FMInstance(NamedTuple):
    member: GpsExpr
    monomials: Dict[str, Monomial]
    value: Rps


def _assign(member: GpsExpr, assignment: Sequence[Monomial]) -> Optional[Dict[str, Monomial]]:
    targets = [v for v in member.variables if v not in member.classical]
    if len(targets) != len(assignment):
        return None
    return dict(zip(targets, assignment))


def make_FM(F: LanguageF, group: MonomialGroup, assignments: Iterable[Sequence[Monomial]],
            depth: Optional[int] = None, require_almost_fine: bool = False) -> List[Rps]:
    """
    Séries f(𝔪, y) pour les membres f de ℱ_b et les affectations données.

    Raises:
        InvalidParameterError: monôme d'affectation ≥ 1, ou ℱ non presque fin si exigé
    """
    return [instance.value for instance in fm_instances(F, group, assignments, depth, require_almost_fine)]


def fm_instances(F: LanguageF, group: MonomialGroup, assignments: Iterable[Sequence[Monomial]],
                 depth: Optional[int] = None, require_almost_fine: bool = False) -> List[FMInstance]:
    assignments = [tuple(a) for a in assignments]
    one = group.identity()
    for assignment in assignments:
        for m in assignment:
            if not m < one:
                raise InvalidParameterError(f"Affectation non infinitésimale: {m}")
    if require_almost_fine and not F.almost_fine().almost_fine:
        raise InvalidParameterError(f"Le langage {F.name} n'est pas presque fin")
    extended = F if isinstance(F, BlowupLanguage) else make_Fb(F)
    instances = []
    for member in extended.members(depth):
        for assignment in assignments:
            monomials = _assign(member, assignment)
            if monomials is None:
                continue
            value = from_gps(member, {v: 1 for v in monomials}, monomials, group=group)
            instances.append(FMInstance(member, monomials, value))
    logger.info(f"ℱ_𝔐: {len(instances)} séries instanciées pour {F.name}")
    return instances


def fm_truncation_closed(instance: FMInstance, threshold: Monomial,
                         depth: Optional[int] = None, max_degree: Optional[int] = None) -> bool:
    """(f_𝔪)‖𝔫 coïncide avec (f|{γ : 𝔪^γ > 𝔫})_𝔪"""
    depth = depth if depth is not None else int(get_setting("rps.probe_terms", 12))
    max_degree = max_degree if max_degree is not None else int(get_setting("rps.index_depth", 3))
    piece = fragment_gps(instance.member, FragmentSpec.monomial_threshold(instance.monomials, threshold))
    scales = {v: 1 for v in instance.monomials}
    rebuilt = from_gps(piece, scales, instance.monomials, group=threshold.group)
    return agree(coeff_trunc(instance.value, threshold), rebuilt, depth, max_degree)


def fm_derivative_closed(instance: FMInstance, name: str,
                         depth: Optional[int] = None, max_degree: Optional[int] = None) -> bool:
    """∂_ε f_𝔪 = 𝔪·(∂_x f)_𝔪"""
    depth = depth if depth is not None else int(get_setting("rps.probe_terms", 12))
    max_degree = max_degree if max_degree is not None else int(get_setting("rps.index_depth", 3))
    m = instance.monomials[name]
    scales = {v: 1 for v in instance.monomials}
    derived = from_gps(gps_derivative(instance.member, name), scales, instance.monomials, group=m.group)
    return agree(derivative(instance.value, name), monomial_mul(derived, m), depth, max_degree)
