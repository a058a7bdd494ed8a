"""Séries de Hahn paresseuses, budgets et sommes sommables"""

from fractions import Fraction

import pytest

from src.order.monomials import INFINITE_CLASS, ArchClass
from src.order.segmentation import Segment
from src.series.budget import Budget, active_budget, charge, observation
from src.series.hahn import (
    HahnSeries, SegmentSet, Term, add, constant, eq_to_monomial, format_series, fragment, from_terms,
    geometric_series, invert_unit, leading_term, listing, monomial, mul, normal_form, probe_equal, sub,
    take_terms, truncate, v_truncate, zero,
)
from src.series.summation import summable_sum
from src.utils.errors import BudgetExhaustedError, GroupMismatchError, NotInvertibleError, StreamOrderError

pytestmark = pytest.mark.series


def powers(t, *exponents):
    return [t ** e for e in exponents]


def test_term_text(line, t):
    assert str(Term(line.identity(), Fraction(3))) == "3"
    assert str(Term(t, Fraction(-1, 2))) == "-1/2 * t^1"


def test_from_terms_merges_and_sorts(line, t):
    f = from_terms(line, [(t, 1), (line.identity(), 2), (t, 1), (t ** 2, 0)])
    assert take_terms(f, 5) == [Term(line.identity(), Fraction(2)), Term(t, Fraction(2))]
    assert listing(f, 5).exhausted


def test_truncated_geometric_series(line, t):
    """Troncature exacte : le flux s'arrête au seuil"""
    f = truncate(geometric_series(t), t ** Fraction(5, 2))
    result = listing(f, 10)
    assert [term.monomial for term in result.terms] == powers(t, 0, 1, 2)
    assert result.exhausted


def test_prefix_of_infinite_series(t):
    result = listing(geometric_series(t, 3), 4)
    assert [term.coeff for term in result.terms] == [3, 3, 3, 3]
    assert not result.exhausted


def test_ring_operations(line, t):
    one_plus = from_terms(line, [(line.identity(), 1), (t, 1)])
    one_minus = from_terms(line, [(line.identity(), 1), (t, -1)])
    product = mul(one_plus, one_minus)
    assert take_terms(product, 5) == [Term(line.identity(), Fraction(1)), Term(t ** 2, Fraction(-1))]
    assert listing(add(one_plus, one_minus), 5).terms == [Term(line.identity(), Fraction(2))]


def test_product_with_infinite_factor(line, t):
    product = mul(geometric_series(t), from_terms(line, [(line.identity(), 1), (t, -1)]))
    assert eq_to_monomial(product, constant(line, 1), t ** 6)


def test_cauchy_square_of_geometric(t):
    square = mul(geometric_series(t), geometric_series(t))
    assert [term.coeff for term in take_terms(square, 5)] == [1, 2, 3, 4, 5]


def test_operator_sugar(line, t):
    f = monomial(t) + 1
    assert take_terms(f * t, 2) == [Term(t, Fraction(1)), Term(t ** 2, Fraction(1))]
    assert take_terms(2 * f - f, 2) == take_terms(f, 2)


def test_group_mismatch(line, plane):
    with pytest.raises(GroupMismatchError):
        add(constant(line, 1), constant(plane, 1))


def test_invert_unit(line, t):
    inverse = invert_unit(from_terms(line, [(line.identity(), 2), (t, 1)]))
    assert take_terms(inverse, 3) == [
        Term(line.identity(), Fraction(1, 2)),
        Term(t, Fraction(-1, 4)),
        Term(t ** 2, Fraction(1, 8)),
    ]


def test_invert_non_unit(line, t):
    inverse = invert_unit(from_terms(line, [(t, 1), (t ** 2, 1)]))
    assert take_terms(inverse, 3) == [
        Term(t ** -1, Fraction(1)),
        Term(line.identity(), Fraction(-1)),
        Term(t, Fraction(1)),
    ]


def test_zero_is_not_invertible(line):
    with pytest.raises(NotInvertibleError):
        invert_unit(zero(line))
    with pytest.raises(NotInvertibleError):
        normal_form(zero(line))


def test_normal_form(line, t):
    nf = normal_form(from_terms(line, [(t, 3), (t ** 2, 6)]))
    assert nf.monomial == t
    assert nf.coeff == 3
    assert take_terms(nf.epsilon, 2) == [Term(t, Fraction(6))]


def test_leading_term(line, t):
    assert leading_term(zero(line)) is None
    assert leading_term(geometric_series(t, 5)) == Term(line.identity(), Fraction(5))


def test_fragment(line, t):
    f = from_terms(line, [(m, 1) for m in powers(t, 0, 1, 2, 3)])
    middle = fragment(f, SegmentSet.of(Segment.closed(t ** 2, t)))
    assert [term.monomial for term in take_terms(middle, 5)] == powers(t, 1, 2)
    assert listing(fragment(f, SegmentSet.empty()), 1).terms == []


def test_segment_set_must_be_disjoint(t):
    with pytest.raises(ValueError):
        SegmentSet.of(Segment.closed(t ** 3, t), Segment.closed(t ** 2, t ** -1))


def test_v_truncation(plane):
    u, t = plane.generators()
    one = plane.identity()
    f = from_terms(plane, [(u ** -1, 1), (one, 2), (t, 3), (u, 4)])
    assert take_terms(v_truncate(f, ArchClass(0)), 5) == [Term(one, Fraction(2)), Term(t, Fraction(3))]
    assert take_terms(v_truncate(f, INFINITE_CLASS), 5) == [Term(one, Fraction(2))]


def test_v_truncation_is_multiplicative_below_one(plane):
    u, t = plane.generators()
    one = plane.identity()
    f = from_terms(plane, [(one, 1), (t, 2), (u * t ** -1, 1)])
    g = from_terms(plane, [(one, -1), (t ** 2, 1), (u, 3)])
    v = ArchClass(0)
    left = v_truncate(mul(f, g), v)
    right = mul(v_truncate(f, v), v_truncate(g, v))
    assert listing(sub(left, right), 1).terms == []


def test_threshold_equality(line, t):
    inverse = invert_unit(from_terms(line, [(line.identity(), 1), (t, -1)]))
    short = from_terms(line, [(line.identity(), 1), (t, 1)])
    assert eq_to_monomial(inverse, short, t ** 2)
    assert not eq_to_monomial(inverse, short, t ** 3)
    assert probe_equal(inverse, geometric_series(t), 6)


def test_zero_difference_exhausts_budget(t):
    g = geometric_series(t)
    with pytest.raises(BudgetExhaustedError) as info:
        listing(sub(g, g), 1, budget=500)
    assert info.value.limit == 500
    assert info.value.partial.terms == []
    assert not info.value.partial.exhausted


def test_interrupted_stream_resumes(t):
    g = geometric_series(t)
    with pytest.raises(BudgetExhaustedError):
        take_terms(sub(g, g), 1, budget=50)
    assert [term.monomial for term in take_terms(g, 7)] == powers(t, *range(7))


def test_stream_order_is_checked(line, t):
    broken = HahnSeries(line, lambda: iter([(t, Fraction(1)), (line.identity(), Fraction(1))]))
    with pytest.raises(StreamOrderError):
        take_terms(broken, 2)


def test_geometric_ratio_must_be_infinitesimal(t):
    with pytest.raises(ValueError):
        geometric_series(t ** -1)


def test_format_series(line, t):
    assert format_series([]) == "0"
    assert format_series(take_terms(from_terms(line, [(line.identity(), 1), (t, -2)]), 2)) == "1 + -2 * t^1"


def test_budget_objects():
    with pytest.raises(ValueError):
        Budget(0)
    with observation(5) as outer:
        with observation() as inner:
            assert inner is outer
            charge(3)
        assert outer.steps == 3
        assert outer.remaining == 2
        with pytest.raises(BudgetExhaustedError):
            charge(3)
    assert active_budget() is None
    charge(10 ** 9)


def test_summable_sum(line, t):
    """Σ_k t^k comme famille sommable indexée par k"""
    total = summable_sum(
        line,
        seeds=[0],
        successors=lambda k: [k + 1],
        bound=lambda k: t ** k,
        series_for=lambda k: monomial(t ** k),
    )
    assert take_terms(total, 4) == [Term(t ** k, Fraction(1)) for k in range(4)]


def test_summable_sum_merges_overlaps(line, t):
    total = summable_sum(
        line,
        seeds=[0],
        successors=lambda k: [k + 1],
        bound=lambda k: t ** k,
        series_for=lambda k: from_terms(line, [(t ** k, 1), (t ** (k + 1), 1)]),
    )
    assert [term.coeff for term in take_terms(total, 4)] == [1, 2, 2, 2]
