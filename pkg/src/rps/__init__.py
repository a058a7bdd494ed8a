"""
Séries restreintes à coefficients de Hahn, témoins de troncature
"""

from src.rps.restricted import (
    Rps, zero_rps, embed, projection, from_coefficients, align,
    add, scalar_mul, neg, sub, monomial_mul, mul, power, derivative, iterated_derivative,
    coeff_trunc, coeff_trunc_v, is_composable, support_above, agree,
    compose, taylor_shift, from_gps, series_bound,
)
from src.rps.witness import (
    Step, Atom, WitnessExpr, MembershipOracle, check_leaves, monomial_leaf, zero_witness,
)
from src.rps.decompositions import (
    ProductCut, ProductDecomposition, product_cuts, tc_product_decompose,
    Factor, truncated_product, CompositionWitnessBuilder, tc_composition_witness, verify_witness,
)

__all__ = [
    'Rps', 'zero_rps', 'embed', 'projection', 'from_coefficients', 'align',
    'add', 'scalar_mul', 'neg', 'sub', 'monomial_mul', 'mul', 'power', 'derivative', 'iterated_derivative',
    'coeff_trunc', 'coeff_trunc_v', 'is_composable', 'support_above', 'agree',
    'compose', 'taylor_shift', 'from_gps', 'series_bound',
    'Step', 'Atom', 'WitnessExpr', 'MembershipOracle', 'check_leaves', 'monomial_leaf', 'zero_witness',
    'ProductCut', 'ProductDecomposition', 'product_cuts', 'tc_product_decompose',
    'Factor', 'truncated_product', 'CompositionWitnessBuilder', 'tc_composition_witness', 'verify_witness',
]
