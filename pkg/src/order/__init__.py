"""
Groupes de monômes, valuation naturelle, segmentations et combinatoire finie
"""

from src.order.exponents import as_rational, format_rational, rational_power, binomial
from src.order.monomials import (
    MonomialGroup, Monomial, ArchClass, INFINITE_CLASS, Ordering, cmp_monomial, arch_class
)
from src.order.segmentation import (
    Segment, Segmentation, ProductBlock, minimal_elements, basic_segmentation,
    segmentation_for_map, segmentation_for_sum, common_refinement, product_segmentation
)
from src.order.combinatorics import neumann_fibers, multi_indices

__all__ = [
    'as_rational', 'format_rational', 'rational_power', 'binomial',
    'MonomialGroup', 'Monomial', 'ArchClass', 'INFINITE_CLASS', 'Ordering', 'cmp_monomial', 'arch_class',
    'Segment', 'Segmentation', 'ProductBlock', 'minimal_elements', 'basic_segmentation',
    'segmentation_for_map', 'segmentation_for_sum', 'common_refinement', 'product_segmentation',
    'neumann_fibers', 'multi_indices',
]
