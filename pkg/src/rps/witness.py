"""
Expressions témoins et oracles d'appartenance

Un témoin est un arbre sur des atomes étiquetés (A : algèbre des fonctions,
B : arguments composables, X : ensemble de base, K : scalaires, M : monômes),
des sommes, des produits et des compositions A(B, ..., B). Chaque atome garde
sa provenance : un générateur de base et la suite des étapes qui l'ont dérivé,
rejouée par l'oracle de son étiquette.
"""

from abc import ABC, abstractmethod
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from src.order.exponents import RationalLike, as_rational, format_rational
from src.order.monomials import Monomial, MonomialGroup
from src.rps.restricted import (
    Rps, add, agree, align, coeff_trunc, compose, derivative, embed, monomial_mul, mul, scalar_mul, sub, zero_rps,
)
from src.series.hahn import constant as hahn_constant
from src.utils.errors import OracleRefusalError
from src.utils.logger import get_logger
from src.utils.settings import get_setting

logger = get_logger(__name__)

STEP_KINDS = frozenset({'trunc', 'sub_trunc', 'deriv', 'monomial'})

# A : algèbre des fonctions, B : arguments composables, X : ensemble de base,
# K : scalaires, M : monômes
ATOM_TAGS = ('A', 'B', 'X', 'K', 'M')


class Step(NamedTuple):
    """Étape de dérivation d'un atome"""

    kind: str
    monomial: Optional[Monomial] = None
    variable: Optional[str] = None

    def __str__(self) -> str:
        argument = self.variable if self.variable is not None else str(self.monomial)
        return f"{self.kind}({argument})"


def apply_step(value: Rps, step: Step) -> Rps:
    if step.kind == 'trunc':
        return coeff_trunc(value, step.monomial)
    if step.kind == 'sub_trunc':
        return sub(value, coeff_trunc(value, step.monomial))
    if step.kind == 'deriv':
        return derivative(value, step.variable)
    if step.kind == 'monomial':
        return monomial_mul(value, step.monomial)
    raise ValueError(f"Étape inconnue: {step.kind}")


# Noeuds

class WitnessExpr(ABC):
    kind = "witness"

    @abstractmethod
    def evaluate(self, group: MonomialGroup, variables: Sequence[str]) -> Rps:
        """Valeur du témoin dans les variables de sortie"""

    @abstractmethod
    def children(self) -> Tuple["WitnessExpr", ...]:
        pass

    @abstractmethod
    def to_json(self) -> dict:
        pass

    def leaves(self) -> Iterator["Atom"]:
        for child in self.children():
            yield from child.leaves()

    def size(self) -> int:
        return 1 + sum(child.size() for child in self.children())


class Atom(WitnessExpr):
    kind = "atom"

    def __init__(self, tag: str, base: str, value: Rps, steps: Tuple[Step, ...] = ()):
        if tag not in ATOM_TAGS:
            raise ValueError(f"Étiquette d'atome inconnue: {tag}")
        self.tag, self.base, self.value, self.steps = tag, base, value, tuple(steps)

    @property
    def label(self) -> str:
        return self.base + "".join(f".{s}" for s in self.steps)

    def evaluate(self, group, variables) -> Rps:
        return align(self.value, variables)

    def children(self):
        return ()

    def leaves(self):
        yield self

    def to_json(self) -> dict:
        return {'kind': 'atom', 'tag': self.tag, 'base': self.base, 'steps': [str(s) for s in self.steps]}

    def __repr__(self) -> str:
        return f"Atom[{self.tag}]({self.label})"


class Sum(WitnessExpr):
    kind = "sum"

    def __init__(self, terms: Sequence[WitnessExpr]):
        self.terms = tuple(terms)

    def evaluate(self, group, variables) -> Rps:
        total = zero_rps(group, variables)
        for term in self.terms:
            total = add(total, term.evaluate(group, variables))
        return total

    def children(self):
        return self.terms

    def to_json(self) -> dict:
        return {'kind': 'sum', 'children': [t.to_json() for t in self.terms]}


class Product(WitnessExpr):
    kind = "product"

    def __init__(self, factors: Sequence[WitnessExpr]):
        self.factors = tuple(factors)

    def evaluate(self, group, variables) -> Rps:
        result = embed(hahn_constant(group, 1), variables)
        for factor in self.factors:
            result = mul(result, factor.evaluate(group, variables))
        return result

    def children(self):
        return self.factors

    def to_json(self) -> dict:
        return {'kind': 'product', 'children': [f.to_json() for f in self.factors]}


class Scalar(WitnessExpr):
    """c·(−), c ∈ 𝕂"""

    kind = "scalar"

    def __init__(self, value: RationalLike, child: WitnessExpr):
        self.value = as_rational(value)
        self.child = child

    def evaluate(self, group, variables) -> Rps:
        return scalar_mul(self.value, self.child.evaluate(group, variables))

    def children(self):
        return (self.child,)

    def to_json(self) -> dict:
        return {'kind': 'scalar', 'tag': 'K', 'value': format_rational(self.value), 'child': self.child.to_json()}


class MonomialScalar(WitnessExpr):
    """𝔪·(−), 𝔪 ∈ 𝔐"""

    kind = "monomial"

    def __init__(self, monomial: Monomial, child: WitnessExpr):
        self.monomial = monomial
        self.child = child

    def evaluate(self, group, variables) -> Rps:
        return monomial_mul(self.child.evaluate(group, variables), self.monomial)

    def children(self):
        return (self.child,)

    def to_json(self) -> dict:
        return {'kind': 'monomial', 'tag': 'M', 'monomial': str(self.monomial), 'child': self.child.to_json()}


class Compose(WitnessExpr):
    """A(B_1, ..., B_n)"""

    kind = "compose"

    def __init__(self, outer: Atom, arguments: Sequence[WitnessExpr]):
        if outer.tag != 'A':
            raise ValueError("La fonction composée doit être un atome de l'algèbre")
        self.outer = outer
        self.arguments = tuple(arguments)

    def evaluate(self, group, variables) -> Rps:
        values = [arg.evaluate(group, variables) for arg in self.arguments]
        return compose(self.outer.value, values, variables)

    def children(self):
        return (self.outer,) + self.arguments

    def to_json(self) -> dict:
        return {'kind': 'compose', 'outer': self.outer.to_json(),
                'arguments': [a.to_json() for a in self.arguments]}


def zero_witness() -> Sum:
    return Sum(())


def monomial_leaf(m: Monomial, coeff: RationalLike = 1) -> WitnessExpr:
    """c·𝔪 comme témoin constant"""
    one = embed(hahn_constant(m.group, 1))
    node: WitnessExpr = MonomialScalar(m, Atom('K', "1", one))
    c = as_rational(coeff)
    return node if c == 1 else Scalar(c, node)


# Oracles

class MembershipOracle:
    """
    Oracle d'un ensemble représenté par des générateurs nommés et les
    étapes de dérivation sous lesquelles il est clos.
    """

    def __init__(self, tag: str, generators: Optional[Mapping[str, Rps]] = None,
                 allowed: FrozenSet[str] = STEP_KINDS,
                 validator: Optional[Callable[[Atom], bool]] = None):
        unknown = set(allowed) - STEP_KINDS
        if unknown:
            raise ValueError(f"Étapes inconnues: {sorted(unknown)}")
        self.tag = tag
        self.generators: Dict[str, Rps] = dict(generators or {})
        self.allowed = frozenset(allowed)
        self.validator = validator

    def register(self, label: str, value: Rps) -> Atom:
        self.generators[label] = value
        return Atom(self.tag, label, value)

    def atom(self, label: str) -> Atom:
        if label not in self.generators:
            raise OracleRefusalError(label, 'base', f"Générateur inconnu pour l'oracle {self.tag}: {label}")
        return Atom(self.tag, label, self.generators[label])

    def derive(self, atom: Atom, step: Step) -> Atom:
        """
        Raises:
            OracleRefusalError: étape hors des propriétés de clôture de l'ensemble
        """
        if atom.tag != self.tag:
            raise OracleRefusalError(atom.label, step.kind, f"Atome {atom.tag} présenté à l'oracle {self.tag}")
        if step.kind not in self.allowed:
            raise OracleRefusalError(atom.label, step.kind)
        return Atom(self.tag, atom.base, apply_step(atom.value, step), atom.steps + (step,))

    def replay(self, atom: Atom) -> Rps:
        value = self.generators[atom.base]
        for step in atom.steps:
            value = apply_step(value, step)
        return value

    def accepts(self, atom: Atom, depth: Optional[int] = None, max_degree: Optional[int] = None) -> bool:
        """Provenance rejouée et comparée à la valeur portée par l'atome"""
        if atom.tag != self.tag or atom.base not in self.generators:
            return False
        if any(step.kind not in self.allowed for step in atom.steps):
            return False
        depth = depth if depth is not None else int(get_setting("rps.probe_terms", 12))
        max_degree = max_degree if max_degree is not None else int(get_setting("rps.index_depth", 3))
        if not agree(self.replay(atom), atom.value, depth, max_degree):
            return False
        return self.validator(atom) if self.validator is not None else True


def check_leaves(witness: WitnessExpr, oracles: Mapping[str, MembershipOracle]) -> List[Atom]:
    """Atomes refusés par l'oracle de leur étiquette (K et M toujours admis)"""
    rejected = []
    for atom in witness.leaves():
        if atom.tag in ('K', 'M'):
            continue
        oracle = oracles.get(atom.tag)
        if oracle is None or not oracle.accepts(atom):
            rejected.append(atom)
    if rejected:
        logger.warning(f"{len(rejected)} atomes refusés: {[a.label for a in rejected[:5]]}")
    return rejected


def scaled(value: RationalLike, child: WitnessExpr) -> WitnessExpr:
    value = as_rational(value)
    return child if value == 1 else Scalar(value, child)


def difference(left: WitnessExpr, right: WitnessExpr) -> WitnessExpr:
    return Sum((left, Scalar(Fraction(-1), right)))
