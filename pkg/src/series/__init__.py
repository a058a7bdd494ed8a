"""
Séries de Hahn paresseuses, budgets d'observation et sommes sommables
"""

from src.series.budget import Budget, observation, charge
from src.series.hahn import (
    HahnSeries, Term, SegmentSet, Listing, NormalForm,
    zero, constant, monomial, from_terms, geometric_series,
    take_terms, listing, leading_term, support_above,
    add, sub, neg, scalar_mul, mul, monomial_shift,
    truncate, fragment, v_truncate, normal_form, invert_unit,
    eq_to_monomial, probe_equal, format_series,
)
from src.series.summation import summable_sum

__all__ = [
    'Budget', 'observation', 'charge',
    'HahnSeries', 'Term', 'SegmentSet', 'Listing', 'NormalForm',
    'zero', 'constant', 'monomial', 'from_terms', 'geometric_series',
    'take_terms', 'listing', 'leading_term', 'support_above',
    'add', 'sub', 'neg', 'scalar_mul', 'mul', 'monomial_shift',
    'truncate', 'fragment', 'v_truncate', 'normal_form', 'invert_unit',
    'eq_to_monomial', 'probe_equal', 'format_series',
    'summable_sum',
]
