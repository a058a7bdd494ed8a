"""Séries généralisées : nœuds, classification, éclatements, interprétation"""

import random
from fractions import Fraction
from math import factorial

import pytest

from src.gps.blowups import (
    blowup_affine, blowup_mult, compose_classical, compose_pcomp, dilate, trunc_decompose_blowup,
)
from src.gps.classify import is_infinitesimal, is_non_singular, is_normal, is_p_composable, normal_form
from src.gps.expr import (
    Binomial, FiniteSeries, FragmentSpec, Geometric, Scale, constant, derivative, fragment_gps, monomial_divide,
    monomial_multiply, power, reindex, renorm_derivative, variable,
)
from src.gps.families import GpsFamily
from src.gps.interpretation import interpret
from src.order.segmentation import Segment
from src.series.hahn import (
    Term, add as hahn_add, constant as hahn_constant, from_terms, monomial, mul as hahn_mul, probe_equal, take_terms,
)
from src.utils.errors import (
    DivisibilityError, InvalidParameterError, NormalFormError, VariableError,
)

pytestmark = pytest.mark.gps


def coefficients(f, name, count):
    return [f.coeff({name: n}) for n in range(count)]


def test_finite_series_text():
    f = FiniteSeries([({'x': 2}, 3), ({}, 1)])
    assert f.describe() == "(1 + 3*x^2)"
    assert f.grade_lines(5) == ["1", "3 * x^2"]
    assert constant(0).grade_lines(3) == []


def test_classical_exponents_are_checked():
    with pytest.raises(VariableError):
        FiniteSeries([({'y': Fraction(1, 2)}, 1)], classical=('y',))


def test_geometric_and_binomial():
    assert coefficients(Geometric('x'), 'x', 4) == [1, 1, 1, 1]
    assert coefficients(Binomial(Fraction(1, 2), 'x'), 'x', 4) == [1, Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16)]
    square = Binomial(2, 'x')
    assert square.ceiling == 2
    assert square.table(10) == {(Fraction(0),): 1, (Fraction(1),): 2, (Fraction(2),): 1}


def test_ring_nodes():
    x, y = variable('x'), variable('y')
    product = Geometric('x') * Geometric('y')
    assert product.variables == ('x', 'y')
    assert product.grade_lines(2) == ["1", "1 * x^1", "1 * y^1", "1 * x^2", "1 * x^1*y^1", "1 * y^2"]
    difference = (x + y) * (x + y) - x * x - 2 * x * y - y * y
    assert difference.is_zero(probe=4)


def test_sum_floor_counts_missing_variables():
    x, y = variable('x'), variable('y')
    total = x + y
    assert total.lattice['x'].floor == 0 and total.lattice['y'].floor == 0
    square = total * total
    assert square.coeff({'x': 1, 'y': 1}) == 2
    assert square.grade_lines(2) == ["1 * x^2", "2 * x^1*y^1", "1 * y^2"]
    shifted = (constant(1) + x) * Geometric('x')
    assert coefficients(shifted, 'x', 4) == [1, 2, 2, 2]


def test_derivatives():
    g = Geometric('x')
    assert coefficients(derivative(g, 'x'), 'x', 4) == [1, 2, 3, 4]
    assert coefficients(renorm_derivative(g, 'x'), 'x', 4) == [0, 1, 2, 3]
    assert derivative(g, 'y').is_zero()


def test_reindex_merges_variables():
    merged = reindex(Geometric('x') * Geometric('y'), {'y': 'x'})
    assert merged.variables == ('x',)
    assert coefficients(merged, 'x', 4) == [1, 2, 3, 4]
    g = Geometric('x')
    assert reindex(g, {'x': 'x'}) is g


def test_partial_fragment():
    g = Geometric('x')
    head = fragment_gps(g, FragmentSpec.partial(x=Segment(Fraction(0), Fraction(2), True, False)))
    assert head.grade_lines(5) == ["1", "1 * x^1"]
    assert head.ceiling == 2
    assert fragment_gps(g, FragmentSpec.everything()) is g
    assert fragment_gps(g, FragmentSpec.nothing()).is_zero()


def test_degree_fragment():
    product = Geometric('x') * Geometric('y')
    band = fragment_gps(product, FragmentSpec.degree_cut(Segment.closed(Fraction(1), Fraction(1))))
    assert band.grade_lines(4) == ["1 * x^1", "1 * y^1"]


def test_monomial_shift():
    g = Geometric('x')
    shifted = monomial_multiply(g, {'x': 2})
    assert coefficients(shifted, 'x', 4) == [0, 0, 1, 1]
    assert coefficients(monomial_divide(shifted, {'x': 2}), 'x', 3) == [1, 1, 1]
    with pytest.raises(DivisibilityError):
        monomial_divide(g, {'x': 1})


def test_dilation():
    assert coefficients(dilate(Geometric('x'), 'x', 2), 'x', 4) == [1, 2, 4, 8]
    with pytest.raises(InvalidParameterError):
        dilate(Geometric('x'), 'x', 0)


def test_normal_form():
    f = FiniteSeries([({'x': 1}, 2), ({'x': 2}, 1)])
    nf = normal_form(f)
    assert nf.exponents == {'x': 1}
    assert nf.coeff == 2
    assert nf.rest.grade_lines(3) == ["1 * x^1"]
    assert nf.is_p_composable()
    assert not normal_form(Geometric('x')).is_p_composable()


def test_classification_predicates():
    assert not is_normal(variable('x') + variable('y'))
    with pytest.raises(NormalFormError):
        normal_form(variable('x') + variable('y'))
    assert is_infinitesimal(variable('x'))
    assert not is_infinitesimal(Geometric('x'))
    assert not is_non_singular(power('x', -1))
    assert is_p_composable(variable('x') * Geometric('x'))


def test_multiplicative_blowup():
    blown = blowup_mult(Geometric('x'), 'x', 'a', 'b')
    assert blown.coeff({'a': 2, 'b': 2}) == 1
    assert blown.coeff({'a': 1, 'b': 2}) == 0


def test_affine_blowup():
    blown = blowup_affine(power('x', 2), 'x', 'a', 'b', 3)
    assert blown.coeff({'a': 2}) == 9
    assert blown.coeff({'a': 2, 'b': 1}) == 6
    assert blown.coeff({'a': 2, 'b': 2}) == 1
    assert 'b' in blown.classical
    with pytest.raises(InvalidParameterError):
        blowup_affine(Geometric('x'), 'x', 'a', 'b', -1)
    with pytest.raises(VariableError):
        blowup_affine(Geometric('x'), 'x', 'a', 'a', 1)


def test_classical_composition():
    composed = compose_classical(Geometric('y', classical=True), 'y', variable('x') * 2)
    assert coefficients(composed, 'x', 4) == [1, 2, 4, 8]
    with pytest.raises(VariableError):
        compose_classical(Geometric('y'), 'y', variable('x'))
    with pytest.raises(NormalFormError):
        compose_classical(Geometric('y', classical=True), 'y', Geometric('x'))


def test_fibonacci_composition():
    """1/(1 - z - z²) = geom(z(1 + z))"""
    composed = compose_pcomp(Geometric('x'), 'x', FiniteSeries([({'z': 1}, 1), ({'z': 2}, 1)]))
    assert coefficients(composed, 'z', 10) == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]


def test_pcomp_requires_positive_normal_form():
    with pytest.raises(NormalFormError):
        compose_pcomp(Geometric('x'), 'x', Geometric('z'))


@pytest.mark.parametrize("which, cut", [("S1", 3), ("S0", 2)])
def test_blowup_fragment_decompositions(which, cut):
    decomposition = trunc_decompose_blowup(Geometric('x'), 'x', 'a', 'b', 1, which, cut)
    assert decomposition.verify(5)


def falling_factorial_coefficients(m):
    """s(m, j) : coefficients de X(X − 1)···(X − m + 1)"""
    coefficients = [1]
    for i in range(m):
        shifted = [0] + coefficients
        coefficients = [a - i * b for a, b in zip(shifted, coefficients + [0])]
    return coefficients


def test_blowup_pieces_are_stirling_combinations():
    f = Binomial(Fraction(1, 2), 'x')
    decomposition = trunc_decompose_blowup(f, 'x', 'a', 'b', 2, "S1", 4)
    assert decomposition.verify(6)
    assert [piece.power for piece in decomposition.pieces] == [0, 1, 2, 3]
    for piece in decomposition.pieces:
        m = piece.power
        assert piece.scale == Fraction(1, 2 ** m) / factorial(m)
        expected, iterate = constant(0), f
        for s in falling_factorial_coefficients(m):
            expected = expected + Scale(s, iterate)
            iterate = renorm_derivative(iterate, 'x')
        assert piece.series.table(6) == expected.table(6)
    first = decomposition.pieces[1].series
    assert first.table(6) == renorm_derivative(f, 'x').table(6)


def test_unknown_blowup_fragment():
    with pytest.raises(InvalidParameterError):
        trunc_decompose_blowup(Geometric('x'), 'x', 'a', 'b', 1, "S2", 1)


def test_interpretation_of_square_root(line, t):
    value = monomial(t ** 2, 9)
    result = interpret(power('x', Fraction(1, 2)), {'x': value}, group=line)
    assert take_terms(result, 1) == [Term(t, Fraction(3))]


def test_interpretation_of_geometric(line, t):
    result = interpret(Geometric('x'), {'x': monomial(t)}, group=line)
    assert take_terms(result, 4) == [Term(t ** n, Fraction(1)) for n in range(4)]


def test_interpretation_needs_every_variable(line):
    with pytest.raises(VariableError):
        interpret(Geometric('x'), {}, group=line)


def test_interpretation_rejects_non_infinitesimal_values(line, t):
    with pytest.raises(NormalFormError):
        interpret(Geometric('x'), {'x': monomial(t ** -1)}, group=line)


def test_interpretation_with_classical_variable(line, t):
    """1/((1 − t²)(1 − t)) : y reçoit t sans forme normale"""
    f = Geometric('x') * Geometric('y', classical=True)
    result = interpret(f, {'x': monomial(t ** 2), 'y': monomial(t)}, group=line)
    assert take_terms(result, 6) == [Term(t ** n, Fraction(n // 2 + 1)) for n in range(6)]


# Cohérence des substitutions et de l'interprétation

def classical_outer(rng):
    return rng.choice([
        Geometric('y', classical=True),
        Binomial(rng.choice([Fraction(1, 2), -1, 3]), 'y', classical=True),
        FiniteSeries([({}, 1), ({'y': 1}, 2), ({'y': 3}, -1)], classical=('y',)),
    ])


def test_pcomp_agrees_with_classical_substitution():
    rng = random.Random(3)
    for _ in range(100):
        f = classical_outer(rng)
        a = rng.choice([Fraction(1, 2), 1, 2])
        b = rng.choice([Fraction(1, 2), 1])
        g = FiniteSeries([({'z': a}, rng.choice([1, 2, Fraction(1, 2)])), ({'z': a + b}, rng.choice([1, -1, 3]))])
        assert compose_pcomp(f, 'y', g).table(6) == compose_classical(f, 'y', g).table(6), (f, g)


def random_value(rng, t, positive=True):
    """Infinitésimal à un ou deux termes, de coefficient dominant positif si demandé"""
    a = rng.choice([Fraction(1, 2), 1])
    lead = rng.choice([1, 2, Fraction(1, 2)]) * (1 if positive else rng.choice([1, -1]))
    terms = [(t ** a, lead)]
    if rng.random() < 0.5:
        terms.append((t ** (a + rng.choice([Fraction(1, 2), 1])), rng.choice([1, -1, 3])))
    return from_terms(t.group, terms)


def test_blowup_commutes_with_evaluation(line, t):
    rng = random.Random(23)
    for _ in range(100):
        f = rng.choice([
            Geometric('x'),
            Binomial(Fraction(1, 2), 'x'),
            FiniteSeries([({}, 1), ({'x': 1}, -1), ({'x': 2}, 3)]),
        ])
        k = rng.choice([1, 2, Fraction(1, 2)])
        a, b = random_value(rng, t), random_value(rng, t, positive=False)
        blown = interpret(blowup_affine(f, 'x', 'a', 'b', k), {'a': a, 'b': b}, group=line)
        direct = interpret(f, {'x': hahn_mul(a, hahn_add(b, hahn_constant(line, k)))}, group=line)
        assert probe_equal(blown, direct, 60, threshold=t ** 3), (f, k)


def test_interpretation_is_a_ring_morphism(line, t):
    rng = random.Random(29)
    pool = [
        Geometric('x'),
        Binomial(Fraction(1, 2), 'y'),
        Binomial(-1, 'x'),
        FiniteSeries([({'x': 1, 'y': 1}, 2), ({'y': 2}, -1), ({}, 1)]),
        variable('y') + 3,
    ]
    for _ in range(100):
        f, g = rng.choice(pool), rng.choice(pool)
        values = {'x': random_value(rng, t), 'y': random_value(rng, t)}
        left, right = interpret(f, values, group=line), interpret(g, values, group=line)
        assert probe_equal(interpret(f * g, values, group=line), hahn_mul(left, right), 60, threshold=t ** 3)
        assert probe_equal(interpret(f + g, values, group=line), hahn_add(left, right), 60, threshold=t ** 3)


def test_family_membership():
    family = GpsFamily([Geometric('x')], language=True)
    assert family.contains(Geometric('y'))
    assert not family.contains(Binomial(Fraction(1, 2), 'y'))
    algebra = GpsFamily([Geometric('x')], algebra=True)
    assert algebra.contains(Geometric('x') * Geometric('x'), depth=1)
    assert algebra.contains(Geometric('x') * 3, depth=0, up_to_scalar=True)
