"""
Séries généralisées en variables nommées : DAG d'expressions

Chaque nœud dénote Σ c_γ x^γ avec des exposants dans un réseau rationnel :
pour chaque variable v, γ_v ∈ (1/N_v)ℤ et γ_v ≥ floor_v. Le support est
énuméré par degré total croissant ; `table(w)` renvoie tous les points de
degré ≤ w avec leur coefficient exact.
"""

import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from math import floor as int_floor, lcm
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from src.order.exponents import RationalLike, as_rational, binomial, format_power, format_rational
from src.order.monomials import Monomial
from src.order.segmentation import Segment
from src.series.budget import charge, observation
from src.utils.errors import DivisibilityError, VariableError
from src.utils.settings import get_setting

Point = Tuple[Fraction, ...]
Table = Dict[Point, Fraction]

ZERO = Fraction(0)


class Lattice(NamedTuple):
    """Exposants d'une variable : (1/denominator)ℤ, bornés inférieurement par floor"""

    floor: Fraction
    denominator: int

    @property
    def step(self) -> Fraction:
        return Fraction(1, self.denominator)

    def union(self, other: "Lattice") -> "Lattice":
        return Lattice(min(self.floor, other.floor), lcm(self.denominator, other.denominator))

    def plus(self, other: "Lattice") -> "Lattice":
        return Lattice(self.floor + other.floor, lcm(self.denominator, other.denominator))

    def shifted(self, q: Fraction) -> "Lattice":
        return Lattice(self.floor + q, lcm(self.denominator, q.denominator))

    def scaled(self, c: Fraction) -> "Lattice":
        return Lattice(self.floor * c, self.denominator * c.denominator)

    def is_natural(self) -> bool:
        return self.denominator == 1 and self.floor >= 0


NATURAL = Lattice(ZERO, 1)


def degree(point: Point) -> Fraction:
    return sum(point, ZERO)


def format_gps_monomial(variables: Sequence[str], point: Point) -> str:
    parts = [f"{v}^{format_power(e)}" for v, e in zip(variables, point) if e != 0]
    return "*".join(parts) if parts else "1"


def _merge(lattices: Iterable[Tuple[str, Lattice]], combine: Callable[[Lattice, Lattice], Lattice]) -> Dict[str, Lattice]:
    merged: Dict[str, Lattice] = {}
    for name, lat in lattices:
        merged[name] = combine(merged[name], lat) if name in merged else lat
    return merged


def embedder(source: Sequence[str], target: Sequence[str]) -> Callable[[Point], Point]:
    """Plonge un point de `source` dans l'ordre de `target` (exposants additionnés)"""
    positions = [target.index(v) for v in source]
    size = len(target)

    def embed(point: Point) -> Point:
        out = [ZERO] * size
        for pos, e in zip(positions, point):
            out[pos] += e
        return tuple(out)

    return embed


def accumulate(table: Table, point: Point, coeff: Fraction) -> None:
    if coeff:
        total = table.get(point, ZERO) + coeff
        if total:
            table[point] = total
        else:
            table.pop(point, None)


class GpsExpr(ABC):
    """Nœud immuable ; la table des coefficients est mémoïsée sous verrou"""

    kind = "gps"

    def __init__(self, lattice: Mapping[str, Lattice], classical: Iterable[str] = (),
                 ceiling: Optional[Fraction] = None, children: Tuple["GpsExpr", ...] = ()):
        self.variables: Tuple[str, ...] = tuple(sorted(lattice))
        self.lattice: Dict[str, Lattice] = {v: lattice[v] for v in self.variables}
        self.classical: FrozenSet[str] = frozenset(classical) & frozenset(self.variables)
        self.ceiling = ceiling
        self.children = children
        self._table: Table = {}
        self._grade: Optional[Fraction] = None
        self._complete = False
        self._lock = threading.RLock()

    @property
    def floor_total(self) -> Fraction:
        return sum((lat.floor for lat in self.lattice.values()), ZERO)

    @property
    def classical_variables(self) -> Tuple[str, ...]:
        return tuple(v for v in self.variables if v in self.classical)

    def table(self, grade: RationalLike) -> Table:
        """Points du support de degré total ≤ grade"""
        grade = as_rational(grade)
        with self._lock, observation():
            if not self._complete and (self._grade is None or grade > self._grade):
                target = grade if self._grade is None else max(grade, self._grade + 2)
                if self.ceiling is not None and target >= self.ceiling:
                    target = self.ceiling
                    self._complete = True
                self._table = {p: c for p, c in self._compute_table(target).items() if c}
                self._grade = target
            return {p: c for p, c in self._table.items() if degree(p) <= grade}

    @abstractmethod
    def _compute_table(self, grade: Fraction) -> Table:
        """Tous les points de degré ≤ grade (exactement)"""

    def coeff_at(self, point: Point) -> Fraction:
        return self.table(degree(point)).get(tuple(point), ZERO)

    def coeff(self, gamma: Mapping[str, RationalLike]) -> Fraction:
        """Coefficient exact en x^γ ; 0 hors du réseau"""
        unknown = set(gamma) - set(self.variables)
        if any(as_rational(gamma[v]) != 0 for v in unknown):
            return ZERO
        point = tuple(as_rational(gamma.get(v, 0)) for v in self.variables)
        return self.coeff_at(point)

    def lowest_degree(self, probe: Optional[int] = None) -> Optional[Fraction]:
        """Plus petit degré total du support, None si nul jusqu'à la profondeur de sonde"""
        limit = probe if probe is not None else int(get_setting("gps.zero_probe_degree", 16))
        start = self.floor_total
        for j in range(limit + 1):
            points = self.table(start + j)
            if points:
                return min(degree(p) for p in points)
            if self._complete:
                return None
        return None

    def is_zero(self, probe: Optional[int] = None) -> bool:
        return self.lowest_degree(probe) is None

    def grade_lines(self, grade: RationalLike) -> List[str]:
        """Lignes 'coeff * x^a*y^b' triées par degré puis par exposants"""
        rows = sorted(self.table(grade).items(), key=lambda item: (degree(item[0]), tuple(-e for e in item[0])))
        lines = []
        for point, c in rows:
            mono = format_gps_monomial(self.variables, point)
            lines.append(format_rational(c) if mono == "1" else f"{format_rational(c)} * {mono}")
        return lines

    @abstractmethod
    def describe(self) -> str:
        """Forme textuelle dans la notation du langage de commandes"""

    def __str__(self) -> str:
        return self.describe()

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.describe()}>"

    def __add__(self, other) -> "GpsExpr":
        return Sum(self, _coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "GpsExpr":
        return Sum(self, Scale(-1, _coerce(other)))

    def __rsub__(self, other) -> "GpsExpr":
        return Sum(_coerce(other), Scale(-1, self))

    def __neg__(self) -> "GpsExpr":
        return Scale(-1, self)

    def __mul__(self, other) -> "GpsExpr":
        if isinstance(other, GpsExpr):
            return Product(self, other)
        return Scale(other, self)

    __rmul__ = __mul__


def _coerce(value) -> GpsExpr:
    if isinstance(value, GpsExpr):
        return value
    return constant(value)


# Primitives

class FiniteSeries(GpsExpr):
    kind = "finite"

    def __init__(self, terms: Iterable[Tuple[Mapping[str, RationalLike], RationalLike]],
                 variables: Iterable[str] = (), classical: Iterable[str] = ()):
        terms = [({v: as_rational(e) for v, e in powers.items() if as_rational(e) != 0}, as_rational(c))
                 for powers, c in terms]
        names = set(variables)
        for powers, _ in terms:
            names.update(powers)
        classical = frozenset(classical) & names
        ordered = tuple(sorted(names))
        points: Table = {}
        for powers, c in terms:
            for v in classical:
                e = powers.get(v, ZERO)
                if e.denominator != 1 or e < 0:
                    raise VariableError(f"Variable classique {v} avec exposant {format_rational(e)}")
            accumulate(points, tuple(powers.get(v, ZERO) for v in ordered), c)
        lattice = {}
        for i, v in enumerate(ordered):
            exps = [p[i] for p in points] or [ZERO]
            lattice[v] = Lattice(min(exps), lcm(*[e.denominator for e in exps]))
        ceiling = max((degree(p) for p in points), default=ZERO)
        super().__init__(lattice, classical, ceiling)
        self.points = points

    def _compute_table(self, grade: Fraction) -> Table:
        return {p: c for p, c in self.points.items() if degree(p) <= grade}

    def describe(self) -> str:
        if not self.points:
            return "0"
        rows = sorted(self.points.items(), key=lambda item: (degree(item[0]), tuple(-e for e in item[0])))
        parts = []
        for point, c in rows:
            mono = format_gps_monomial(self.variables, point)
            if mono == "1":
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{format_rational(c)}*{mono}")
        return parts[0] if len(parts) == 1 else "(" + " + ".join(parts) + ")"


def constant(c: RationalLike) -> FiniteSeries:
    return FiniteSeries([({}, c)])


def zero_series(variables: Iterable[str] = (), classical: Iterable[str] = ()) -> FiniteSeries:
    return FiniteSeries([], variables, classical)


def variable(name: str, classical: bool = False) -> FiniteSeries:
    """Projection x"""
    return FiniteSeries([({name: 1}, 1)], classical=(name,) if classical else ())


def power(name: str, exponent: RationalLike, coeff: RationalLike = 1, classical: bool = False) -> FiniteSeries:
    return FiniteSeries([({name: exponent}, coeff)], variables=(name,), classical=(name,) if classical else ())


class Geometric(GpsExpr):
    """Σ_{k≥0} x^k"""

    kind = "geometric"

    def __init__(self, name: str, classical: bool = False):
        super().__init__({name: NATURAL}, (name,) if classical else ())
        self.name = name

    def _compute_table(self, grade: Fraction) -> Table:
        if grade < 0:
            return {}
        return {(Fraction(k),): Fraction(1) for k in range(int_floor(grade) + 1)}

    def describe(self) -> str:
        return f"geom({self.name})"


class Binomial(GpsExpr):
    """(1 + x)^λ = Σ (λ choose m) x^m"""

    kind = "binomial"

    def __init__(self, exponent: RationalLike, name: str, classical: bool = False):
        self.exponent = as_rational(exponent)
        natural = self.exponent.denominator == 1 and self.exponent >= 0
        super().__init__({name: NATURAL}, (name,) if classical else (),
                         ceiling=self.exponent if natural else None)
        self.name = name

    def _compute_table(self, grade: Fraction) -> Table:
        table: Table = {}
        for m in range(int_floor(grade) + 1 if grade >= 0 else 0):
            charge()
            accumulate(table, (Fraction(m),), binomial(self.exponent, m))
        return table

    def describe(self) -> str:
        return f"binom({format_rational(self.exponent)})({self.name})"


# Anneau

def _ceiling_sum(*values: Optional[Fraction]) -> Optional[Fraction]:
    if any(v is None for v in values):
        return None
    return sum(values, ZERO)


class Sum(GpsExpr):
    kind = "sum"

    def __init__(self, left: GpsExpr, right: GpsExpr):
        # une variable absente d'un terme y figure avec l'exposant 0
        names = set(left.lattice) | set(right.lattice)
        lattice = {v: left.lattice.get(v, NATURAL).union(right.lattice.get(v, NATURAL)) for v in names}
        ceiling = None if left.ceiling is None or right.ceiling is None else max(left.ceiling, right.ceiling)
        super().__init__(lattice, left.classical | right.classical, ceiling, (left, right))
        self.left, self.right = left, right

    def _compute_table(self, grade: Fraction) -> Table:
        table: Table = {}
        for child in self.children:
            embed = embedder(child.variables, self.variables)
            for point, c in child.table(grade).items():
                accumulate(table, embed(point), c)
        return table

    def describe(self) -> str:
        return f"({self.left.describe()} + {self.right.describe()})"


class Product(GpsExpr):
    kind = "product"

    def __init__(self, left: GpsExpr, right: GpsExpr):
        lattice = _merge(list(left.lattice.items()) + list(right.lattice.items()), Lattice.plus)
        super().__init__(lattice, left.classical | right.classical,
                         _ceiling_sum(left.ceiling, right.ceiling), (left, right))
        self.left, self.right = left, right

    def _compute_table(self, grade: Fraction) -> Table:
        embed_l = embedder(self.left.variables, self.variables)
        embed_r = embedder(self.right.variables, self.variables)
        left = self.left.table(grade - self.right.floor_total)
        right = self.right.table(grade - self.left.floor_total)
        table: Table = {}
        for p, a in left.items():
            pl = embed_l(p)
            for q, b in right.items():
                charge()
                point = tuple(x + y for x, y in zip(pl, embed_r(q)))
                if degree(point) <= grade:
                    accumulate(table, point, a * b)
        return table

    def describe(self) -> str:
        return f"({self.left.describe()} * {self.right.describe()})"


class Scale(GpsExpr):
    kind = "scale"

    def __init__(self, factor: RationalLike, child: GpsExpr):
        self.factor = as_rational(factor)
        super().__init__(child.lattice, child.classical, child.ceiling, (child,))
        self.child = child

    def _compute_table(self, grade: Fraction) -> Table:
        if self.factor == 0:
            return {}
        return {p: self.factor * c for p, c in self.child.table(grade).items()}

    def describe(self) -> str:
        if self.factor == -1:
            return f"(-{self.child.describe()})"
        return f"({format_rational(self.factor)} * {self.child.describe()})"


class Reindex(GpsExpr):
    """σf : coeff(σf, β) = Σ {coeff(f, γ) : σ*(γ) = β}"""

    kind = "reindex"

    def __init__(self, child: GpsExpr, mapping: Mapping[str, str]):
        self.mapping = {v: mapping.get(v, v) for v in child.variables}
        lattice = _merge(((self.mapping[v], lat) for v, lat in child.lattice.items()), Lattice.plus)
        targets = {}
        for v in child.variables:
            targets.setdefault(self.mapping[v], []).append(v in child.classical)
        classical = [t for t, flags in targets.items() if all(flags)]
        super().__init__(lattice, classical, child.ceiling, (child,))
        self.child = child

    def _compute_table(self, grade: Fraction) -> Table:
        embed = embedder([self.mapping[v] for v in self.child.variables], self.variables)
        table: Table = {}
        for point, c in self.child.table(grade).items():
            charge()
            accumulate(table, embed(point), c)
        return table

    def describe(self) -> str:
        pairs = ", ".join(f"{v}->{t}" for v, t in sorted(self.mapping.items()) if v != t)
        return f"reindex({self.child.describe()}, {pairs})" if pairs else self.child.describe()


class Derivative(GpsExpr):
    """∂_x f"""

    kind = "derivative"

    def __init__(self, child: GpsExpr, name: str):
        if name not in child.variables:
            raise VariableError(f"Variable {name} absente de {child.describe()}")
        lattice = dict(child.lattice)
        lattice[name] = child.lattice[name].shifted(Fraction(-1))
        ceiling = None if child.ceiling is None else child.ceiling - 1
        super().__init__(lattice, child.classical, ceiling, (child,))
        self.child, self.name = child, name

    def _compute_table(self, grade: Fraction) -> Table:
        i = self.variables.index(self.name)
        table: Table = {}
        for point, c in self.child.table(grade + 1).items():
            if point[i] != 0:
                shifted = point[:i] + (point[i] - 1,) + point[i + 1:]
                accumulate(table, shifted, point[i] * c)
        return table

    def describe(self) -> str:
        return f"D({self.child.describe()}, {self.name})"


class RenormDerivative(GpsExpr):
    """x·∂_x f"""

    kind = "renorm-derivative"

    def __init__(self, child: GpsExpr, name: str):
        super().__init__(child.lattice, child.classical, child.ceiling, (child,))
        self.child, self.name = child, name

    def _compute_table(self, grade: Fraction) -> Table:
        if self.name not in self.variables:
            return {}
        i = self.variables.index(self.name)
        return {p: p[i] * c for p, c in self.child.table(grade).items() if p[i] != 0}

    def describe(self) -> str:
        return f"xD({self.child.describe()}, {self.name})"


def derivative(f: GpsExpr, name: str) -> GpsExpr:
    """∂_x f ; nul si x n'apparaît pas dans f"""
    if name not in f.variables:
        return zero_series(f.variables, f.classical)
    return Derivative(f, name)


def renorm_derivative(f: GpsExpr, name: str) -> GpsExpr:
    if name not in f.variables:
        return zero_series(f.variables, f.classical)
    return RenormDerivative(f, name)


def reindex(f: GpsExpr, mapping: Mapping[str, str]) -> GpsExpr:
    if all(mapping.get(v, v) == v for v in f.variables):
        return f
    return Reindex(f, mapping)


# Fragments

@dataclass(frozen=True)
class FragmentSpec:
    """
    Segment de l'ordre produit sur x^Λ.

    per_variable : segments d'exposants par variable (troncatures partielles) ;
    degree : segment du degré total ; monomial_cut : {γ : 𝔪^γ > 𝔫} pour des
    monômes 𝔪_v et un seuil 𝔫 ; empty : fragment vide.
    """

    per_variable: Tuple[Tuple[str, Segment], ...] = ()
    degree: Optional[Segment] = None
    monomial_cut: Optional[Tuple[Tuple[Tuple[str, Monomial], ...], Monomial]] = None
    empty: bool = False

    @classmethod
    def everything(cls) -> "FragmentSpec":
        return cls()

    @classmethod
    def nothing(cls) -> "FragmentSpec":
        return cls(empty=True)

    @classmethod
    def partial(cls, **segments: Segment) -> "FragmentSpec":
        return cls(per_variable=tuple(sorted(segments.items())))

    @classmethod
    def of_variables(cls, segments: Mapping[str, Segment]) -> "FragmentSpec":
        return cls(per_variable=tuple(sorted(segments.items())))

    @classmethod
    def degree_cut(cls, segment: Segment) -> "FragmentSpec":
        return cls(degree=segment)

    @classmethod
    def monomial_threshold(cls, monomials: Mapping[str, Monomial], threshold: Monomial) -> "FragmentSpec":
        return cls(monomial_cut=(tuple(sorted(monomials.items())), threshold))

    def is_everything(self) -> bool:
        return not (self.per_variable or self.degree or self.monomial_cut or self.empty)

    def contains(self, variables: Sequence[str], point: Point) -> bool:
        if self.empty:
            return False
        values = dict(zip(variables, point))
        for name, segment in self.per_variable:
            if values.get(name, ZERO) not in segment:
                return False
        if self.degree is not None and degree(point) not in self.degree:
            return False
        if self.monomial_cut is not None:
            monomials, threshold = self.monomial_cut
            value = threshold.group.identity()
            for name, m in monomials:
                value = value * (m ** values.get(name, ZERO))
            if not value > threshold:
                return False
        return True

    def degree_ceiling(self, variables: Sequence[str]) -> Optional[Fraction]:
        if self.empty:
            return ZERO
        if self.degree is not None and self.degree.upper is not None:
            return self.degree.upper
        bounds = dict(self.per_variable)
        if variables and all(v in bounds and bounds[v].upper is not None for v in variables):
            return sum((bounds[v].upper for v in variables), ZERO)
        return None

    def describe(self) -> str:
        if self.empty:
            return "empty"
        parts = [f"{name} in {_format_segment(seg)}" for name, seg in self.per_variable]
        if self.degree is not None:
            parts.append(f"deg in {_format_segment(self.degree)}")
        if self.monomial_cut is not None:
            monomials, threshold = self.monomial_cut
            assigned = ", ".join(f"{v}={m}" for v, m in monomials)
            parts.append(f"mono({assigned}) > {threshold}")
        return ", ".join(parts) if parts else "all"


def _format_segment(segment: Segment) -> str:
    lower = "-inf" if segment.lower is None else format_rational(segment.lower)
    upper = "inf" if segment.upper is None else format_rational(segment.upper)
    left = "[" if segment.lower is not None and segment.lower_closed else "("
    right = "]" if segment.upper is not None and segment.upper_closed else ")"
    return f"{left}{lower}, {upper}{right}"


class Fragment(GpsExpr):
    kind = "fragment"

    def __init__(self, child: GpsExpr, spec: FragmentSpec):
        bound = spec.degree_ceiling(child.variables)
        ceiling = child.ceiling if bound is None else (bound if child.ceiling is None else min(bound, child.ceiling))
        super().__init__(child.lattice, child.classical, ceiling, (child,))
        self.child, self.spec = child, spec

    def _compute_table(self, grade: Fraction) -> Table:
        if self.spec.empty:
            return {}
        return {p: c for p, c in self.child.table(grade).items() if self.spec.contains(self.variables, p)}

    def describe(self) -> str:
        return f"frag({self.child.describe()}, {self.spec.describe()})"


def fragment_gps(f: GpsExpr, spec: FragmentSpec) -> GpsExpr:
    if spec.is_everything():
        return f
    return Fragment(f, spec)


# Division et multiplication monomiales

class MonomialShift(GpsExpr):
    """f / x^α (divide) ou f · x^α"""

    kind = "monomial-shift"

    def __init__(self, child: GpsExpr, exponents: Mapping[str, RationalLike], divide: bool):
        self.exponents = {v: as_rational(e) for v, e in sorted(exponents.items()) if as_rational(e) != 0}
        self.divide = divide
        sign = -1 if divide else 1
        lattice = dict(child.lattice)
        for v, e in self.exponents.items():
            lattice[v] = lattice.get(v, NATURAL).shifted(sign * e)
        total = sum(self.exponents.values(), ZERO)
        ceiling = None if child.ceiling is None else child.ceiling + sign * total
        super().__init__(lattice, child.classical - set(self.exponents), ceiling, (child,))
        self.child = child
        self._embed = embedder(child.variables, self.variables)
        self._offset = tuple(sign * self.exponents.get(v, ZERO) for v in self.variables)
        self._total = sign * total

    def _compute_table(self, grade: Fraction) -> Table:
        table: Table = {}
        for point, c in self.child.table(grade - self._total).items():
            shifted = tuple(a + b for a, b in zip(self._embed(point), self._offset))
            if self.divide:
                raised = self._embed(point)
                if any(raised[i] < self.exponents.get(v, ZERO) for i, v in enumerate(self.variables)):
                    raise DivisibilityError(
                        f"{format_gps_monomial(self.variables, raised)} n'est pas divisible par "
                        f"{format_gps_monomial(self.variables, tuple(self.exponents.get(v, ZERO) for v in self.variables))}")
            accumulate(table, shifted, c)
        return table

    def describe(self) -> str:
        mono = "*".join(f"{v}^{format_power(e)}" for v, e in self.exponents.items()) or "1"
        op = "divm" if self.divide else "mulm"
        return f"{op}({self.child.describe()}, {mono})"


def monomial_divide(f: GpsExpr, exponents: Mapping[str, RationalLike], probe: Optional[int] = None) -> GpsExpr:
    """
    f / x^α, divisibilité vérifiée sur les degrés sondés.

    Raises:
        DivisibilityError: un point du support n'est pas divisible par x^α
    """
    node = MonomialShift(f, exponents, divide=True)
    if not node.exponents:
        return f
    floors_ok = all(f.lattice.get(v, NATURAL).floor >= e and v in f.variables or e <= 0
                    for v, e in node.exponents.items())
    if not floors_ok:
        depth = probe if probe is not None else int(get_setting("gps.divisibility_probe_degree", 8))
        node.table(node.floor_total + depth)
    return node


def monomial_multiply(f: GpsExpr, exponents: Mapping[str, RationalLike]) -> GpsExpr:
    node = MonomialShift(f, exponents, divide=False)
    return node if node.exponents else f
