"""
Séries généralisées en variables nommées : DAG, classification, éclatements,
compositions et interprétation
"""

from src.gps.expr import (
    GpsExpr, Lattice, FiniteSeries, Geometric, Binomial, Sum, Product, Scale,
    FragmentSpec, constant, zero_series, variable, power,
    derivative, renorm_derivative, reindex, fragment_gps, monomial_divide, monomial_multiply,
)
from src.gps.classify import (
    GpsNormalForm, normal_form, is_non_singular, is_infinitesimal, is_normal, is_p_composable,
)
from src.gps.blowups import (
    blowup_affine, blowup_mult, dilate, compose_classical, compose_pcomp,
    MonomialSubstitution, trunc_decompose_blowup, BlowupDecomposition,
)
from src.gps.families import GpsFamily
from src.gps.interpretation import interpret

__all__ = [
    'GpsExpr', 'Lattice', 'FiniteSeries', 'Geometric', 'Binomial', 'Sum', 'Product', 'Scale',
    'FragmentSpec', 'constant', 'zero_series', 'variable', 'power',
    'derivative', 'renorm_derivative', 'reindex', 'fragment_gps', 'monomial_divide', 'monomial_multiply',
    'GpsNormalForm', 'normal_form', 'is_non_singular', 'is_infinitesimal', 'is_normal', 'is_p_composable',
    'blowup_affine', 'blowup_mult', 'dilate', 'compose_classical', 'compose_pcomp',
    'MonomialSubstitution', 'trunc_decompose_blowup', 'BlowupDecomposition',
    'GpsFamily', 'interpret',
]
