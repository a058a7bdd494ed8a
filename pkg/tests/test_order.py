"""Groupes de monômes, exposants, segmentations et fibres"""

from fractions import Fraction

import pytest

from src.order.combinatorics import compositions, multi_indices, neumann_fibers
from src.order.exponents import as_rational, binomial, format_power, format_rational, rational_power
from src.order.monomials import INFINITE_CLASS, ArchClass, MonomialGroup, Ordering, arch_class, cmp_monomial
from src.order.segmentation import (
    Segment, basic_segmentation, common_refinement, is_antichain, minimal_elements, product_segmentation,
    segmentation_for_sum, segmentation_from_cuts,
)
from src.utils.errors import GroupMismatchError, InexactPowerError, NotAnAntichainError

pytestmark = pytest.mark.order


def test_rational_formats():
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(-2) == "-2"
    assert format_power(2) == "2"
    assert format_power(Fraction(-1)) == "(-1)"
    assert format_power(Fraction(1, 2)) == "(1/2)"


def test_floats_are_refused():
    with pytest.raises(TypeError):
        as_rational(0.5)
    with pytest.raises(TypeError):
        as_rational(True)


def test_exact_powers():
    assert rational_power(Fraction(9, 4), Fraction(1, 2)) == Fraction(3, 2)
    assert rational_power(8, Fraction(-2, 3)) == Fraction(1, 4)
    assert rational_power(2, 3) == 8
    with pytest.raises(InexactPowerError):
        rational_power(2, Fraction(1, 2))
    with pytest.raises(InexactPowerError):
        rational_power(-4, Fraction(1, 2))


def test_generalized_binomial():
    assert binomial(Fraction(1, 2), 2) == Fraction(-1, 8)
    assert binomial(-1, 5) == -1
    assert binomial(3, 4) == 0
    assert binomial(7, -1) == 0


def test_group_validation():
    with pytest.raises(ValueError):
        MonomialGroup.of()
    with pytest.raises(ValueError):
        MonomialGroup.of('t', 't')
    with pytest.raises(ValueError):
        MonomialGroup.of('1t')


def test_infinitesimal_generators_are_small(plane):
    u, t = plane.generators()
    one = plane.identity()
    assert t < one and u < one
    # u est le plus grossier : toute puissance de t le domine
    assert u < t ** 100
    assert u ** -1 > t ** -100
    assert cmp_monomial(u * t, u * t) is Ordering.EQUAL


def test_arch_class(plane):
    u, t = plane.generators()
    assert arch_class(u * t ** -3) == ArchClass(0)
    assert arch_class(t ** Fraction(1, 2)) == ArchClass(1)
    assert arch_class(plane.identity()) == INFINITE_CLASS
    assert ArchClass(0) < ArchClass(1) < INFINITE_CLASS
    assert str(INFINITE_CLASS) == "inf"


def test_monomial_text(plane):
    u, t = plane.generators()
    assert str(u * t ** -1) == "u^1*t^(-1)"
    assert str(t ** Fraction(1, 2)) == "t^(1/2)"
    assert str(plane.identity()) == "1"


def test_groups_do_not_mix(line, plane):
    with pytest.raises(GroupMismatchError):
        line.generator('t') * plane.generator('t')


def test_segment_membership():
    half_open = Segment(1, 3, True, False)
    assert 1 in half_open and 2 in half_open
    assert 3 not in half_open
    assert Segment.above(2).is_final()
    assert 2 not in Segment.above(2)
    assert 2 in Segment.above(2, closed=True)
    with pytest.raises(ValueError):
        Segment(3, 1)


def test_segmentation_starts_at_cuts():
    seg = segmentation_from_cuts([1, 2, 3, 4, 5], [2, 4])
    assert seg.parts == ((1,), (2, 3), (4, 5))
    assert seg.block_index(3) == 1


def test_minimal_elements():
    points = [(2, 0), (1, 1), (2, 2), (0, 3), (1, 1)]
    assert minimal_elements(points) == [(0, 3), (1, 1), (2, 0)]
    assert is_antichain(minimal_elements(points))
    assert not is_antichain([(1, 1), (2, 2)])


def test_basic_segmentation_boxes_are_homogeneous():
    chains = [range(5), range(5)]
    generators = [(1, 3), (3, 1)]
    seg0, seg1 = basic_segmentation(chains, generators)
    for block0 in seg0.parts:
        for block1 in seg1.parts:
            inside = {any(a >= g[0] and b >= g[1] for g in generators) for a in block0 for b in block1}
            assert len(inside) == 1


def test_basic_segmentation_rejects_non_antichain():
    with pytest.raises(NotAnAntichainError):
        basic_segmentation([range(3), range(3)], [(1, 1), (2, 2)])


def test_common_refinement():
    a = segmentation_from_cuts(range(6), [2])
    b = segmentation_from_cuts(range(6), [4])
    assert common_refinement([a, b]).parts == ((0, 1), (2, 3), (4, 5))


def test_segmentation_for_sum():
    sets = [[0, 1, 2], [0, 1, 2]]
    target = Segment.closed(1, 2)
    seg0, seg1 = segmentation_for_sum(sets, target)
    for block0 in seg0.parts:
        for block1 in seg1.parts:
            assert len({(a + b) in target for a in block0 for b in block1}) == 1


def test_product_segmentation_covers_exactly(line):
    t = line.generator('t')
    first = [t ** -1, line.identity(), t]
    second = [line.identity(), t, t ** 2]
    target = Segment.above(t)
    blocks = product_segmentation(first, second, target)
    covered = [(a, b) for block in blocks for a in block.final for b in block.segment]
    expected = {(a, b) for a in first for b in second if a * b in target}
    assert len(covered) == len(set(covered))
    assert set(covered) == expected


def test_product_segmentation_needs_final_target(line):
    with pytest.raises(ValueError):
        product_segmentation([line.identity()], [line.identity()], Segment.closed(line.identity(), line.identity()))


def test_neumann_fibers():
    fibers = neumann_fibers([1, 2], 3)
    assert sorted(fibers) == sorted([(1, 1, 1), (1, 2), (2, 1)])
    assert neumann_fibers([1], 0) == [()]
    assert neumann_fibers([Fraction(1, 2)], Fraction(1, 3)) == []
    with pytest.raises(ValueError):
        neumann_fibers([0, 1], 2)


def test_multi_indices_by_degree():
    assert list(compositions(2, 2)) == [(2, 0), (1, 1), (0, 2)]
    assert multi_indices(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert multi_indices(0, 3) == [()]
