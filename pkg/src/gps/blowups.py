"""
Éclatements, substitutions et compositions de séries généralisées

  blowup_affine   x ↦ z0(z1 + k), z1 classique
  blowup_mult     x ↦ z0·z1
  substitution    x ↦ z^γ (monôme)
  dilation        x ↦ k·x
  compose_classical  y ↦ g, y classique, g infinitésimale
  compose_pcomp   x ↦ g = z^γ(k + h) p-composable, par éclatement affine
"""

from fractions import Fraction
from math import factorial, floor as int_floor
from typing import List, Mapping, NamedTuple, Optional

from src.gps.classify import is_infinitesimal, normal_form
from src.gps.expr import (
    NATURAL, GpsExpr, Lattice, RenormDerivative, Scale, Sum, Table, accumulate, degree, embedder,
    FragmentSpec, fragment_gps, power, reindex, zero_series, _merge,
)
from src.order.exponents import RationalLike, as_rational, binomial, format_rational, rational_power
from src.order.segmentation import Segment
from src.series.budget import charge
from src.utils.errors import InvalidParameterError, NormalFormError, VariableError
from src.utils.logger import get_logger

logger = get_logger(__name__)


def _positive(k: RationalLike, what: str) -> Fraction:
    value = as_rational(k)
    if value <= 0:
        raise InvalidParameterError(f"{what} doit être strictement positif, reçu {format_rational(value)}")
    return value


def _nonnegative_floors(f: GpsExpr) -> bool:
    return all(lat.floor >= 0 for lat in f.lattice.values())


class _Substitution(GpsExpr):
    """Base : remplace la variable `name` de l'enfant, les autres sont conservées"""

    def __init__(self, child: GpsExpr, name: str, new_lattice: Mapping[str, Lattice],
                 new_classical, ceiling: Optional[Fraction]):
        others = [(v, lat) for v, lat in child.lattice.items() if v != name]
        lattice = _merge(others + list(new_lattice.items()), Lattice.plus)
        classical = set(child.classical) - {name}
        for v in new_lattice:
            clashes = v in child.lattice and v != name and v not in child.classical
            if v in new_classical and not clashes:
                classical.add(v)
            else:
                classical.discard(v)
        super().__init__(lattice, classical, ceiling, (child,))
        self.child, self.name = child, name
        rest = [v for v in child.variables if v != name]
        self._index = child.variables.index(name)
        self._embed_rest = embedder(rest, self.variables)
        self._floor_rest = sum((child.lattice[v].floor for v in rest), Fraction(0))

    def _rest(self, point):
        return self._embed_rest(point[:self._index] + point[self._index + 1:])


class BlowupAffine(_Substitution):
    """f(z0(z1 + k), y) = Σ c_{α,β} k^{α−m} (α choose m) z0^α z1^m y^β"""

    kind = "blowup-affine"

    def __init__(self, child: GpsExpr, name: str, z0: str, z1: str, k: RationalLike):
        if z0 == z1:
            raise VariableError("Les variables d'éclatement doivent être distinctes")
        self.k = _positive(k, "k")
        lat_x = child.lattice[name]
        ceiling = None
        if child.ceiling is not None and lat_x.is_natural() and _nonnegative_floors(child):
            ceiling = 2 * child.ceiling
        super().__init__(child, name, {z0: lat_x, z1: NATURAL}, (z1,), ceiling)
        self.z0, self.z1 = z0, z1
        self._pos_z0 = self.variables.index(z0)
        self._pos_z1 = self.variables.index(z1)

    def _compute_table(self, grade: Fraction) -> Table:
        table: Table = {}
        for point, c in self.child.table(grade).items():
            alpha = point[self._index]
            base = list(self._rest(point))
            base[self._pos_z0] += alpha
            room = grade - degree(point)
            for m in range(int_floor(room) + 1 if room >= 0 else 0):
                charge()
                coefficient = binomial(alpha, m)
                if coefficient == 0:
                    if alpha.denominator == 1 and m > alpha >= 0:
                        break
                    continue
                out = list(base)
                out[self._pos_z1] += m
                accumulate(table, tuple(out), c * coefficient * rational_power(self.k, alpha - m))
        return table

    def describe(self) -> str:
        return f"blowA({self.child.describe()}, {self.name}->{self.z0}, {self.z1}, {format_rational(self.k)})"


class BlowupMult(_Substitution):
    """f(z0·z1, y) : support diagonal"""

    kind = "blowup-mult"

    def __init__(self, child: GpsExpr, name: str, z0: str, z1: str):
        if z0 == z1:
            raise VariableError("Les variables d'éclatement doivent être distinctes")
        lat_x = child.lattice[name]
        ceiling = 2 * child.ceiling if child.ceiling is not None and _nonnegative_floors(child) else None
        classical = (z0, z1) if name in child.classical else ()
        super().__init__(child, name, {z0: lat_x, z1: lat_x}, classical, ceiling)
        self.z0, self.z1 = z0, z1
        self._pos = (self.variables.index(z0), self.variables.index(z1))

    def _compute_table(self, grade: Fraction) -> Table:
        table: Table = {}
        floor_x = self.child.lattice[self.name].floor
        for point, c in self.child.table(grade - floor_x).items():
            alpha = point[self._index]
            out = list(self._rest(point))
            out[self._pos[0]] += alpha
            out[self._pos[1]] += alpha
            out = tuple(out)
            if degree(out) <= grade:
                accumulate(table, out, c)
        return table

    def describe(self) -> str:
        return f"blowM({self.child.describe()}, {self.name}->{self.z0}, {self.z1})"


class MonomialSubstitution(_Substitution):
    """f(z^γ, y) pour un monôme z^γ à exposants positifs"""

    kind = "monomial-substitution"

    def __init__(self, child: GpsExpr, name: str, target: Mapping[str, RationalLike]):
        self.target = {v: as_rational(e) for v, e in sorted(target.items()) if as_rational(e) != 0}
        if not self.target or any(e < 0 for e in self.target.values()):
            raise InvalidParameterError(f"Monôme de substitution invalide: {target}")
        lat_x = child.lattice[name]
        self.total = sum(self.target.values(), Fraction(0))
        ceiling = None
        if child.ceiling is not None and _nonnegative_floors(child):
            ceiling = max(self.total, Fraction(1)) * child.ceiling
        new = {v: lat_x.scaled(e) for v, e in self.target.items()}
        super().__init__(child, name, new, (), ceiling)
        self._targets = [(self.variables.index(v), e) for v, e in self.target.items()]

    def _child_grade(self, grade: Fraction) -> Fraction:
        floor_x = self.child.lattice[self.name].floor
        if self.total >= 1:
            return grade + floor_x * (1 - self.total)
        return max(grade, grade + (1 - self.total) * (grade - self._floor_rest) / self.total)

    def _compute_table(self, grade: Fraction) -> Table:
        table: Table = {}
        for point, c in self.child.table(self._child_grade(grade)).items():
            charge()
            alpha = point[self._index]
            out = list(self._rest(point))
            for pos, e in self._targets:
                out[pos] += alpha * e
            out = tuple(out)
            if degree(out) <= grade:
                accumulate(table, out, c)
        return table

    def describe(self) -> str:
        mono = "*".join(f"{v}^({format_rational(e)})" for v, e in self.target.items())
        return f"subst({self.child.describe()}, {self.name}->{mono})"


class Dilation(GpsExpr):
    """f(k·x, y)"""

    kind = "dilation"

    def __init__(self, child: GpsExpr, name: str, k: RationalLike):
        self.k = _positive(k, "k")
        super().__init__(child.lattice, child.classical, child.ceiling, (child,))
        self.child, self.name = child, name

    def _compute_table(self, grade: Fraction) -> Table:
        if self.name not in self.variables:
            return self.child.table(grade)
        i = self.variables.index(self.name)
        return {p: c * rational_power(self.k, p[i]) for p, c in self.child.table(grade).items()}

    def describe(self) -> str:
        return f"dilate({self.child.describe()}, {self.name}, {format_rational(self.k)})"


class ComposeClassical(_Substitution):
    """Substitution naïve Σ c_{α,β} g^α y'^β, y classique"""

    kind = "compose-classical"

    def __init__(self, child: GpsExpr, name: str, argument: GpsExpr):
        if name not in child.classical:
            raise VariableError(f"{name} n'est pas classique dans {child.describe()}")
        if not is_infinitesimal(argument):
            raise NormalFormError(f"{argument.describe()} n'est pas infinitésimale")
        new = {v: Lattice(Fraction(0), lat.denominator) for v, lat in argument.lattice.items()}
        ceiling = None
        if child.ceiling is not None and argument.ceiling is not None \
                and _nonnegative_floors(child) and _nonnegative_floors(argument):
            ceiling = max(argument.ceiling, Fraction(1)) * child.ceiling
        super().__init__(child, name, new, argument.classical, ceiling)
        self.argument = argument
        self.children = (child, argument)
        self._embed_arg = embedder(argument.variables, self.variables)
        self._lowest = argument.lowest_degree()

    def _compute_table(self, grade: Fraction) -> Table:
        if self._lowest is None:
            bound = grade
        else:
            bound = max(grade, self._floor_rest + (grade - self._floor_rest) / self._lowest)
        source = self.child.table(bound)
        needed = max((int(p[self._index]) for p in source), default=0)

        reach = grade - min(self._floor_rest, Fraction(0))
        base = {self._embed_arg(p): c for p, c in self.argument.table(reach).items()}
        zero_point = tuple(Fraction(0) for _ in self.variables)
        powers: List[Table] = [{zero_point: Fraction(1)}]
        for _ in range(needed):
            nxt: Table = {}
            for p, a in powers[-1].items():
                for q, b in base.items():
                    charge()
                    point = tuple(x + y for x, y in zip(p, q))
                    if degree(point) <= grade:
                        accumulate(nxt, point, a * b)
            powers.append(nxt)

        table: Table = {}
        for point, c in source.items():
            alpha = int(point[self._index])
            rest = self._rest(point)
            for q, b in powers[alpha].items():
                charge()
                out = tuple(x + y for x, y in zip(rest, q))
                if degree(out) <= grade:
                    accumulate(table, out, c * b)
        return table

    def describe(self) -> str:
        return f"comp({self.child.describe()}, {self.name}->{self.argument.describe()})"


class ComposePComp(GpsExpr):
    """
    f(g, y) pour g = z^γ(k + h) p-composable.

    Réalisée par éclatement affine x ↦ X0(X1 + k), puis X0 ↦ z^γ, puis
    X1 ↦ h par substitution classique.
    """

    kind = "compose-pcomp"

    def __init__(self, child: GpsExpr, name: str, argument: GpsExpr):
        nf = normal_form(argument)
        if not nf.is_p_composable():
            raise NormalFormError(f"{argument.describe()} n'est pas p-composable")
        x0, x1 = f"{name}#0", f"{name}#1"
        blown = BlowupAffine(child, name, x0, x1, nf.coeff)
        gamma = {v: e for v, e in nf.exponents.items() if e != 0}
        substituted = MonomialSubstitution(blown, x0, gamma)
        self.pipeline = ComposeClassical(substituted, x1, nf.rest)
        super().__init__(self.pipeline.lattice, self.pipeline.classical, self.pipeline.ceiling, (child, argument))
        self.child, self.name, self.argument = child, name, argument
        self.normal_form = nf

    def _compute_table(self, grade: Fraction) -> Table:
        return self.pipeline.table(grade)

    def describe(self) -> str:
        return f"comp({self.child.describe()}, {self.name}->{self.argument.describe()})"


def blowup_affine(f: GpsExpr, name: str, z0: str, z1: str, k: RationalLike) -> GpsExpr:
    """
    Raises:
        InvalidParameterError: k ≤ 0
    """
    _positive(k, "k")
    if name not in f.variables:
        return f
    return BlowupAffine(f, name, z0, z1, k)


def blowup_mult(f: GpsExpr, name: str, z0: str, z1: str) -> GpsExpr:
    if name not in f.variables:
        return f
    return BlowupMult(f, name, z0, z1)


def dilate(f: GpsExpr, name: str, k: RationalLike) -> GpsExpr:
    if as_rational(k) == 1 or name not in f.variables:
        return f
    return Dilation(f, name, k)


def compose_classical(f: GpsExpr, name: str, g: GpsExpr) -> GpsExpr:
    """
    Raises:
        VariableError: y non classique
        NormalFormError: g non infinitésimale
    """
    if name not in f.variables:
        return f
    return ComposeClassical(f, name, g)


def compose_pcomp(f: GpsExpr, name: str, g: GpsExpr) -> GpsExpr:
    """
    Raises:
        NormalFormError: g non p-composable
    """
    if name not in f.variables:
        nf = normal_form(g)
        if not nf.is_p_composable():
            raise NormalFormError(f"{g.describe()} n'est pas p-composable")
        return f
    return ComposePComp(f, name, g)


# Décompositions des fragments d'éclatements

class DecompositionPiece(NamedTuple):
    power: int
    scale: Fraction
    series: GpsExpr


class BlowupDecomposition(NamedTuple):
    """Combinaison finie explicite égale à un fragment d'éclatement affine"""

    which: str
    pieces: List[DecompositionPiece]
    assembled: GpsExpr
    target: GpsExpr

    def verify(self, grade: RationalLike) -> bool:
        """Égalité exacte des tables jusqu'au degré `grade`"""
        variables = sorted(set(self.assembled.variables) | set(self.target.variables))
        left = _aligned(self.assembled, variables, grade)
        right = _aligned(self.target, variables, grade)
        return left == right


def _aligned(f: GpsExpr, variables, grade) -> Table:
    embed = embedder(f.variables, variables)
    return {embed(p): c for p, c in f.table(grade).items()}


def trunc_decompose_blowup(f: GpsExpr, name: str, z0: str, z1: str, k: RationalLike,
                           which: str, cut: RationalLike) -> BlowupDecomposition:
    """
    Décompose un fragment de f(z0(z1 + k), y).

    which = "S1" : fragment {z1 < n} = Σ_{m<n} z1^m · k^{-m}/m! · h_m(k·z0, y)
    avec h_0 = f et h_{m+1} = (x∂x − m) h_m.
    which = "S0" : fragment {z0 < α} = éclatement de fragment(f, {x < α}).

    Le morceau m porte h_m = x^m ∂x^m f = (x∂x)(x∂x − 1)···(x∂x − m + 1) f,
    soit Σ_j s(m, j) (x∂x)^j f avec s les nombres de Stirling de première
    espèce : une combinaison des (x∂x)^j f, j ≤ m. Pour m < 2, h_m = (x∂x)^m f.
    """
    k = _positive(k, "k")
    blown = blowup_affine(f, name, z0, z1, k)
    if which == "S1":
        n = int(as_rational(cut))
        target = fragment_gps(blown, FragmentSpec.partial(**{z1: Segment.below(Fraction(n))}))
        pieces: List[DecompositionPiece] = []
        h = f
        for m in range(n):
            pieces.append(DecompositionPiece(m, rational_power(k, -m) / factorial(m), h))
            h = Sum(RenormDerivative(h, name), Scale(-m, h)) if name in h.variables else zero_series(h.variables)
        assembled: GpsExpr = zero_series(blown.variables)
        for piece in pieces:
            shifted = reindex(dilate(piece.series, name, k), {name: z0})
            term = Scale(piece.scale, shifted)
            if piece.power:
                term = term * power(z1, piece.power, classical=True)
            assembled = Sum(assembled, term)
        logger.debug(f"trunc_decompose_blowup S1^{n}: {len(pieces)} morceaux")
        return BlowupDecomposition("S1", pieces, assembled, target)
    if which == "S0":
        alpha = as_rational(cut)
        target = fragment_gps(blown, FragmentSpec.partial(**{z0: Segment.below(alpha)}))
        h = fragment_gps(f, FragmentSpec.partial(**{name: Segment.below(alpha)}))
        assembled = blowup_affine(h, name, z0, z1, k)
        return BlowupDecomposition("S0", [DecompositionPiece(0, Fraction(1), h)], assembled, target)
    raise InvalidParameterError(f"Fragment inconnu: {which} (S0 ou S1 attendu)")
