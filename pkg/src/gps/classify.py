"""
Prédicats de classification : non singulière, infinitésimale, normale, p-composable
"""

from fractions import Fraction
from typing import Dict, NamedTuple, Optional

from src.gps.expr import GpsExpr, Sum, constant, monomial_divide
from src.order.segmentation import minimal_elements
from src.utils.errors import NormalFormError
from src.utils.settings import get_setting


class GpsNormalForm(NamedTuple):
    """f = x^γ0·(k + h), h infinitésimale"""

    exponents: Dict[str, Fraction]
    coeff: Fraction
    rest: GpsExpr

    def is_p_composable(self) -> bool:
        nonzero = any(e != 0 for e in self.exponents.values())
        return nonzero and all(e >= 0 for e in self.exponents.values()) and self.coeff > 0


def _probe_depth(probe: Optional[int]) -> int:
    return probe if probe is not None else int(get_setting("gps.normal_form_probe_degree", 4))


def normal_form(f: GpsExpr, probe: Optional[int] = None) -> GpsNormalForm:
    """
    Forme normale lue sur le point minimal du support.

    Le support est sondé jusqu'au plus petit degré + `probe` ; il faut un
    unique point minimal pour l'ordre produit.

    Raises:
        NormalFormError: série nulle ou plusieurs points minimaux
    """
    lowest = f.lowest_degree()
    if lowest is None:
        raise NormalFormError(f"{f.describe()} est nulle jusqu'à la profondeur sondée")
    points = f.table(lowest + _probe_depth(probe))
    minimal = minimal_elements(points.keys())
    if len(minimal) != 1:
        raise NormalFormError(f"{f.describe()} n'est pas normale: {len(minimal)} points minimaux")
    gamma0 = minimal[0]
    k = points[gamma0]
    exponents = dict(zip(f.variables, gamma0))
    rest = Sum(monomial_divide(f, exponents), constant(-k))
    return GpsNormalForm(exponents, k, rest)


def is_non_singular(f: GpsExpr, probe: Optional[int] = None) -> bool:
    if all(lat.floor >= 0 for lat in f.lattice.values()):
        return True
    lowest = f.lowest_degree()
    if lowest is None:
        return True
    return all(e >= 0 for point in f.table(lowest + _probe_depth(probe)) for e in point)


def is_infinitesimal(f: GpsExpr, probe: Optional[int] = None) -> bool:
    """Non singulière et sans terme constant"""
    if not is_non_singular(f, probe):
        return False
    return f.coeff_at(tuple(Fraction(0) for _ in f.variables)) == 0


def is_normal(f: GpsExpr, probe: Optional[int] = None) -> bool:
    try:
        normal_form(f, probe)
        return True
    except NormalFormError:
        return False


def is_p_composable(f: GpsExpr, probe: Optional[int] = None) -> bool:
    try:
        return normal_form(f, probe).is_p_composable()
    except NormalFormError:
        return False
