"""
Interprétation d'une série généralisée en des séries de Hahn
"""

from typing import Dict, Mapping, Optional

from src.gps.expr import GpsExpr
from src.order.monomials import Monomial, MonomialGroup
from src.series.hahn import HahnSeries, leading_term, normal_form as hahn_normal_form
from src.series.budget import observation
from src.utils.errors import NormalFormError, VariableError
from src.utils.logger import get_logger

logger = get_logger(__name__)


def _is_infinitesimal(value: HahnSeries) -> bool:
    with observation():
        lead = leading_term(value)
    return lead is None or lead.monomial < value.group.identity()


def interpret(f: GpsExpr, assignment: Mapping[str, HahnSeries],
              group: Optional[MonomialGroup] = None) -> HahnSeries:
    """
    f(x := a) comme série de Hahn.

    Une valeur a = 𝔪(k + ε) avec 𝔪 < 1 et k > 0 passe par f_{k𝔪} évaluée en ε ;
    une variable classique peut aussi recevoir une valeur infinitésimale
    quelconque, substituée naïvement.

    Raises:
        VariableError: variable de f sans valeur
        NormalFormError: valeur hors forme normale positive
    """
    from src.rps.restricted import compose, embed, from_gps

    missing = [v for v in f.variables if v not in assignment]
    if missing:
        raise VariableError(f"Variables sans valeur: {missing}")
    if group is None:
        if not assignment:
            raise VariableError("Groupe de monômes inconnu pour une série sans variable")
        group = next(iter(assignment.values())).group

    scales: Dict[str, object] = {}
    monomials: Dict[str, Monomial] = {}
    arguments = []
    for v in f.variables:
        value = assignment[v]
        if v in f.classical and _is_infinitesimal(value):
            arguments.append(embed(value))
            continue
        try:
            m0, k, epsilon = hahn_normal_form(value)
        except ZeroDivisionError:
            raise NormalFormError(f"Valeur nulle pour la variable {v}") from None
        if not m0 < group.identity() or k <= 0:
            raise NormalFormError(f"Valeur de {v} hors forme normale positive: {m0}·({k} + ε)")
        scales[v], monomials[v] = k, m0
        # x = 𝔪(k + ε) : la variable de f_{k𝔪} reçoit ε
        arguments.append(embed(epsilon))
    restricted = from_gps(f, scales, monomials, group=group)
    logger.debug(f"Interprétation de {f.describe()} en {len(arguments)} variables")
    return compose(restricted, arguments, variables=()).coeff(())
