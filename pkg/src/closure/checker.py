"""
Vérification de la clôture par troncature d'un ensemble engendré

Pour chaque paire (élément, sonde 𝔪), on cherche un témoin évaluant à e|𝔪 :
d'abord dans X, puis en suivant la structure de l'expression de e
(sommes, produits par coupures, applications de ℱ par témoin de composition).
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from src.closure.generation import Apply, BaseRef, Element, GeneratedSet, MonomialLeaf, Plus, ScalarLeaf, Times
from src.order.monomials import Monomial
from src.rps.decompositions import CompositionWitnessBuilder, Factor, truncated_product
from src.rps.restricted import embed, from_gps
from src.rps.witness import (
    Atom, MembershipOracle, Sum, WitnessExpr, check_leaves, monomial_leaf, zero_witness,
)
from src.series.budget import observation
from src.series.hahn import (
    HahnSeries, leading_term, listing, normal_form, probe_equal, take_terms, truncate,
)
from src.utils.checkpoint import CheckpointManager, ProgressTracker
from src.utils.errors import BudgetExhaustedError, HahnforgeError, WitnessNotFoundError
from src.utils.logger import get_logger
from src.utils.settings import default_budget, get_setting

logger = get_logger(__name__)


class ClosureEntry(NamedTuple):
    element_id: str
    expression: str
    probe: str
    status: str
    probe_depth: int
    witness: Optional[dict] = None
    reason: Optional[str] = None

    def to_json(self) -> dict:
        data = {
            'element_id': self.element_id,
            'expression': self.expression,
            'probe': self.probe,
            'status': self.status,
            'probe_depth': self.probe_depth,
        }
        if self.witness is not None:
            data['witness'] = self.witness
        if self.reason is not None:
            data['reason'] = self.reason
        return data

    @classmethod
    def from_json(cls, data: dict) -> "ClosureEntry":
        return cls(data['element_id'], data['expression'], data['probe'], data['status'],
                   data['probe_depth'], data.get('witness'), data.get('reason'))


class ClosureReport(NamedTuple):
    language: str
    depth: int
    probe_depth: int
    entries: List[ClosureEntry]
    statistics: dict

    @property
    def all_witnessed(self) -> bool:
        return all(e.status == 'witnessed' for e in self.entries)

    def failures(self) -> List[ClosureEntry]:
        return [e for e in self.entries if e.status != 'witnessed']

    def to_json(self, include_witnesses: bool = True) -> dict:
        entries = []
        for entry in self.entries:
            data = entry.to_json()
            if not include_witnesses:
                data.pop('witness', None)
            entries.append(data)
        return {
            'language': self.language,
            'depth': self.depth,
            'probe_depth': self.probe_depth,
            'entries': entries,
            'statistics': dict(self.statistics),
        }


def default_probes(element: Element, probe_depth: int) -> List[Monomial]:
    """Monômes du support (à probe_depth termes) et milieux entre voisins"""
    try:
        with observation():
            support = [t.monomial for t in take_terms(element.value, probe_depth)]
    except BudgetExhaustedError as e:
        support = [t.monomial for t in (e.partial or [])]
    probes = set(support)
    for upper, lower in zip(support, support[1:]):
        probes.add((upper * lower) ** Fraction(1, 2))
    return sorted(probes, key=lambda m: m.key)


class TruncationWitnesser:
    """Construit et contrôle les témoins de troncature d'un ensemble engendré"""

    def __init__(self, generated: GeneratedSet, index_depth: Optional[int] = None):
        self.generated = generated
        self.group = generated.group
        self.language = generated.language
        self.probe_depth = generated.probe_depth
        self.index_depth = index_depth if index_depth is not None else int(get_setting("rps.index_depth", 3))
        base = {name: embed(x) for name, x in generated.base.items()}
        self.oracles: Dict[str, MembershipOracle] = {
            'A': MembershipOracle('A', allowed=self.language.allowed_steps()),
            'B': MembershipOracle('B', allowed=frozenset({'trunc'}), validator=self._valid_argument),
            'X': MembershipOracle('X', base, allowed=frozenset()),
        }
        # base B -> (argument, 𝔪, k) ; 𝔪 None pour un argument classique substitué tel quel
        self._arguments: Dict[str, Tuple[Element, Optional[Monomial], Fraction]] = {}
        self._atoms: Dict[str, Tuple[Atom, Tuple[Atom, ...]]] = {}
        # témoins des applications, partagés entre les paires et les facteurs de produits
        self._built: Dict[Tuple[str, Monomial], WitnessExpr] = {}
        self._lock = threading.RLock()

    # Atomes des applications

    def _application_atoms(self, element: Apply) -> Tuple[Atom, Tuple[Atom, ...]]:
        with self._lock:
            if element.element_id in self._atoms:
                return self._atoms[element.element_id]
            member = element.member
            scales: Dict[str, Fraction] = {}
            monomials: Dict[str, Monomial] = {}
            arguments: List[Atom] = []
            for v, argument in zip(member.variables, element.arguments):
                label = f"{element.element_id}:{v}"
                value = argument.value
                with observation():
                    lead = leading_term(value)
                if v in member.classical and (lead is None or lead.monomial < self.group.identity()):
                    self._arguments[label] = (argument, None, Fraction(0))
                    arguments.append(self.oracles['B'].register(label, embed(value)))
                    continue
                m0, k, epsilon = normal_form(value)
                scales[v], monomials[v] = k, m0
                self._arguments[label] = (argument, m0, k)
                arguments.append(self.oracles['B'].register(label, embed(epsilon)))
            instance = from_gps(member, scales, monomials, group=self.group)
            outer = self.oracles['A'].register(f"{element.element_id}:{element.member_name}", instance)
            self._atoms[element.element_id] = (outer, tuple(arguments))
            return self._atoms[element.element_id]

    def _valid_argument(self, atom: Atom) -> bool:
        """ε|𝔫 est dans ℬ° : (a|𝔫𝔪)/𝔪 − k admet lui-même un témoin"""
        argument, m0, _ = self._arguments[atom.base]
        cuts = [s.monomial for s in atom.steps if s.kind == 'trunc']
        if not cuts:
            return True
        cut = max(cuts)
        if m0 is not None:
            if cut >= self.group.identity():
                return True
            cut = cut * m0
        try:
            witness = self.witness(argument, cut)
            return probe_equal(witness.evaluate(self.group, ()).coeff(), truncate(argument.value, cut),
                               self.probe_depth)
        except BudgetExhaustedError:
            raise
        except HahnforgeError as e:
            logger.debug(f"Argument {atom.label} refusé: {e}")
            return False

    # Témoins

    def _lookup(self, target: HahnSeries) -> Optional[WitnessExpr]:
        for name, x in sorted(self.generated.base.items()):
            if probe_equal(x, target, self.probe_depth):
                return self.oracles['X'].atom(name)
        return None

    def _finite(self, target: HahnSeries) -> Optional[WitnessExpr]:
        observed = listing(target, self.probe_depth)
        if not observed.exhausted:
            return None
        return Sum(tuple(monomial_leaf(t.monomial, t.coeff) for t in observed.terms))

    def witness(self, element: Element, m: Monomial) -> WitnessExpr:
        """
        Témoin de e|𝔪.

        Raises:
            WitnessNotFoundError: troncature d'un élément de X hors de X et infinie
            OracleRefusalError: étape hors des clôtures de ℱ
            WitnessDepthError: récurrence trop profonde
        """
        if isinstance(element, BaseRef):
            target = truncate(element.value, m)
            found = self._lookup(target) or self._finite(target)
            if found is None:
                raise WitnessNotFoundError(f"{element.describe()}|{m} introuvable dans X")
            return found
        if isinstance(element, ScalarLeaf):
            return monomial_leaf(self.group.identity(), element.c) if self.group.identity() > m else zero_witness()
        if isinstance(element, MonomialLeaf):
            return monomial_leaf(element.m) if element.m > m else zero_witness()
        if isinstance(element, Plus):
            return Sum((self.witness(element.left, m), self.witness(element.right, m)))
        if isinstance(element, Times):
            factors = [Factor(embed(part.value), lambda p, part=part: self.witness(part, p))
                       for part in (element.left, element.right)]
            return truncated_product(factors, m, self.index_depth)
        if isinstance(element, Apply):
            key = (element.element_id, m)
            with self._lock:
                if key in self._built:
                    return self._built[key]
            outer, arguments = self._application_atoms(element)
            builder = CompositionWitnessBuilder(self.oracles['A'], self.oracles['B'], self.group, (),
                                                index_depth=self.index_depth)
            witness = builder.build(outer, arguments, m)
            with self._lock:
                self._built[key] = witness
            return witness
        raise WitnessNotFoundError(f"Élément de nature inconnue: {element.kind}")

    def check(self, element: Element, m: Monomial, budget: Optional[int] = None) -> ClosureEntry:
        """Statut d'une paire : witnessed, failed ou budget (jamais d'exception)"""
        common = (element.element_id, element.describe(), str(m))
        try:
            with observation(budget if budget is not None else default_budget()):
                witness = self.witness(element, m)
                value = witness.evaluate(self.group, ()).coeff()
                matches = probe_equal(value, truncate(element.value, m), self.probe_depth)
                rejected = check_leaves(witness, self.oracles)
        except BudgetExhaustedError as e:
            return ClosureEntry(*common, 'budget', self.probe_depth, reason=str(e))
        except HahnforgeError as e:
            return ClosureEntry(*common, 'failed', self.probe_depth, reason=f"{type(e).__name__}: {e}")
        if not matches:
            return ClosureEntry(*common, 'failed', self.probe_depth, witness.to_json(), "évaluation différente")
        if rejected:
            labels = ", ".join(a.label for a in rejected[:3])
            return ClosureEntry(*common, 'failed', self.probe_depth, witness.to_json(), f"atomes refusés: {labels}")
        return ClosureEntry(*common, 'witnessed', self.probe_depth, witness.to_json())


def check_truncation_closed(generated: GeneratedSet, probes: Optional[Iterable[Monomial]] = None,
                            probe_depth: Optional[int] = None, max_workers: Optional[int] = None,
                            budget: Optional[int] = None, job_name: Optional[str] = None) -> ClosureReport:
    """
    Cherche un témoin pour chaque paire (élément, sonde).

    Les paires sont traitées en parallèle ; le rapport est assemblé dans
    l'ordre des paires. Les échecs sont enregistrés, jamais levés.
    """
    if probe_depth is not None:
        generated.probe_depth = probe_depth
    max_workers = max_workers if max_workers is not None else int(get_setting("closure.max_workers", 4))
    fixed = sorted(set(probes), key=lambda m: m.key) if probes is not None else None
    pairs: List[Tuple[Element, Monomial]] = []
    for element in generated:
        for m in (fixed if fixed is not None else default_probes(element, generated.probe_depth)):
            pairs.append((element, m))

    manager = None
    if get_setting("closure.checkpoint_enabled", False):
        manager = CheckpointManager(get_setting("paths.checkpoints", "checkpoints"))
    job = job_name or f"closure_{generated.language.name}"
    tracker = ProgressTracker(job, len(pairs), int(get_setting("closure.checkpoint_interval", 50)), manager)
    witnesser = TruncationWitnesser(generated)
    logger.info(f"Vérification de {len(pairs)} paires sur {len(generated)} éléments ({max_workers} workers)")

    keys = [f"{element.element_id}@{m}" for element, m in pairs]
    pending = [(key, pair) for key, pair in zip(keys, pairs) if not tracker.is_done(key)]
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        results = pool.map(lambda item: witnesser.check(item[1][0], item[1][1], budget), pending)
        for (key, _), entry in zip(pending, results):
            tracker.update(key, entry.to_json())
    entries = [ClosureEntry.from_json(tracker.completed[key]) for key in keys]
    statistics = tracker.get_summary(include_timing=False)
    tracker.complete()
    report = ClosureReport(generated.language.name, generated.depth, generated.probe_depth, entries, statistics)
    if report.failures():
        logger.warning(f"{len(report.failures())} paires sans témoin sur {len(entries)}")
    return report
