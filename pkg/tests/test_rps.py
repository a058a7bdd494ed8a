"""Séries restreintes, décompositions de troncature et témoins"""

import random
from fractions import Fraction

import pytest

from src.order.monomials import INFINITE_CLASS, ArchClass, MonomialGroup
from src.rps.decompositions import (
    CompositionWitnessBuilder, Factor, tc_composition_witness, tc_product_decompose, truncated_product, verify_witness,
)
from src.rps.restricted import (
    Rps, add, agree, coeff_trunc, coeff_trunc_v, compose, derivative, embed, from_coefficients, is_composable, mul,
    projection, taylor_shift,
)
from src.rps.witness import (
    Atom, Compose, MembershipOracle, Step, Sum, check_leaves, difference, monomial_leaf,
)
from src.series.hahn import (
    Term, constant, from_terms, geometric_series, monomial, probe_equal, take_terms, v_truncate,
)
from src.utils.errors import CompositionError, OracleRefusalError, VariableError, WitnessDepthError

pytestmark = pytest.mark.rps


def one_plus_x_squared(line):
    """(1 + x)² comme série restreinte en x"""
    one = embed(constant(line, 1), ('x',))
    x = projection(line, ('x',), 'x')
    return mul(add(one, x), add(one, x))


def test_embed_is_constant(line, t):
    s = from_terms(line, [(t, 2)])
    f = embed(s, ('x',))
    assert f.coeff() is s
    assert take_terms(f.coeff((1,)), 1) == []
    assert f.support_bound == t
    assert f.tail(1) is None


def test_projection(line):
    x = projection(line, ('x', 'y'), 'x')
    assert take_terms(x.coeff({'x': 1}), 2) == [Term(line.identity(), Fraction(1))]
    assert take_terms(x.coeff({'y': 1}), 1) == []
    assert x.tail(2) is None
    with pytest.raises(VariableError):
        projection(line, ('x',), 'z')


def test_index_validation(line):
    f = embed(constant(line, 1), ('x',))
    with pytest.raises(VariableError):
        f.coeff({'z': 1})
    with pytest.raises(VariableError):
        f.coeff((0, 0))


def test_cauchy_product(line):
    square = one_plus_x_squared(line)
    one = line.identity()
    assert [take_terms(square.coeff((k,)), 1) for k in range(4)] == [
        [Term(one, Fraction(1))], [Term(one, Fraction(2))], [Term(one, Fraction(1))], [],
    ]
    assert square.degree_bound == 2


def test_variables_are_merged(line):
    x = projection(line, ('x',), 'x')
    y = projection(line, ('y',), 'y')
    total = add(x, y)
    assert total.variables == ('x', 'y')
    assert take_terms(total.coeff({'y': 1}), 1) == [Term(line.identity(), Fraction(1))]


def test_derivative(line):
    derived = derivative(one_plus_x_squared(line), 'x')
    one = line.identity()
    assert take_terms(derived.coeff((0,)), 1) == [Term(one, Fraction(2))]
    assert take_terms(derived.coeff((1,)), 1) == [Term(one, Fraction(2))]
    with pytest.raises(VariableError):
        derivative(derived, 'y')


def test_taylor_shift(line):
    shifted = taylor_shift(one_plus_x_squared(line))
    assert shifted.variables == ('x', "x'")
    assert take_terms(shifted.coeff((1, 1)), 1) == [Term(line.identity(), Fraction(2))]


def test_coefficient_truncation(t):
    f = coeff_trunc(embed(geometric_series(t)), t ** 2)
    assert [term.monomial for term in take_terms(f.coeff(), 5)] == [t ** 0, t]


def test_from_coefficients(line, t):
    f = from_coefficients(line, ('x',), {(0,): monomial(t), (2,): monomial(t ** 3)})
    assert f.degree_bound == 2
    assert f.tail(0) == t
    assert f.tail(1) == t ** 3
    assert f.tail(3) is None
    assert is_composable(f)
    assert not is_composable(embed(constant(line, 1), ('x',)))


def test_composition_with_geometric_coefficients(line, t):
    """Σ_k x^k évalué en x = t"""
    f = Rps(line, ('x',), lambda index: constant(line, 1), lambda k: line.identity(), label="geom")
    composed = compose(f, [embed(monomial(t))])
    assert take_terms(composed.coeff(), 4) == [Term(t ** k, Fraction(1)) for k in range(4)]


def test_composition_checks_arguments(line, t):
    f = projection(line, ('x',), 'x')
    with pytest.raises(CompositionError):
        compose(f, [embed(constant(line, 1))])
    with pytest.raises(CompositionError):
        compose(f, [])


def test_product_decomposition(line, t):
    one_plus_t = from_terms(line, [(line.identity(), 1), (t, 1)])
    decomposition = tc_product_decompose(embed(one_plus_t), embed(one_plus_t), t)
    assert len(decomposition.cuts) == 1
    assert decomposition.cuts[0].n == t
    assert decomposition.verify()


def test_agree_detects_difference(line, t):
    f = embed(from_terms(line, [(t, 1)]), ('x',))
    g = embed(from_terms(line, [(t, 2)]), ('x',))
    assert agree(f, f, 4, 2)
    assert not agree(f, g, 4, 2)


def test_oracle_replays_steps(line, t):
    oracle = MembershipOracle('B', allowed=frozenset({'trunc'}))
    atom = oracle.register("g", embed(from_terms(line, [(t, 1), (t ** 2, 1)])))
    truncated = oracle.derive(atom, Step('trunc', t ** 2))
    assert truncated.label == "g.trunc(t^2)"
    assert oracle.accepts(truncated)
    with pytest.raises(OracleRefusalError):
        oracle.derive(atom, Step('deriv', variable='x'))


def test_unknown_atoms_are_rejected(line):
    oracle = MembershipOracle('X', {'b': embed(constant(line, 1))}, allowed=frozenset())
    stray = Atom('X', "c", embed(constant(line, 1)))
    witness = Sum((oracle.atom('b'), stray))
    assert check_leaves(witness, {'X': oracle}) == [stray]
    with pytest.raises(OracleRefusalError):
        oracle.atom('c')


def test_witness_nodes(line, t):
    with pytest.raises(ValueError):
        Atom('Z', "b", embed(constant(line, 1)))
    b = Atom('B', "b", embed(monomial(t)))
    with pytest.raises(ValueError):
        Compose(b, [])
    leaf = monomial_leaf(t, 3)
    node = difference(leaf, leaf)
    assert take_terms(node.evaluate(line, ()).coeff(), 1) == []
    assert node.to_json()['kind'] == 'sum'
    assert node.size() == 8


def test_composition_witness_for_projection(line, t):
    algebra = MembershipOracle('A')
    arguments = MembershipOracle('B', allowed=frozenset({'trunc'}))
    f = projection(line, ('x',), 'x')
    g = embed(from_terms(line, [(t, 1), (t ** 2, 1)]))
    witness = tc_composition_witness(f, [g], t ** 2, algebra, arguments)
    assert [atom.tag for atom in witness.leaves()] == ['B']
    assert verify_witness(witness, f, [g], t ** 2, ())
    assert check_leaves(witness, {'A': algebra, 'B': arguments}) == []


# Cas de la construction des témoins de composition

def geometric_rps(group):
    """Σ_k x^k"""
    return Rps(group, ('x',), lambda index: constant(group, 1), lambda k: group.identity(), label="geom")


@pytest.fixture
def reached_cases(monkeypatch):
    """Noms des cas de récurrence atteints par le constructeur de témoins"""
    reached = []
    for name in ('_case_coarse', '_case_fine'):
        original = getattr(CompositionWitnessBuilder, name)

        def spy(self, *args, original=original, name=name):
            reached.append(name)
            return original(self, *args)

        monkeypatch.setattr(CompositionWitnessBuilder, name, spy)
    return reached


def witness_holds(f, arguments, m):
    algebra, oracle = MembershipOracle('A'), MembershipOracle('B')
    witness = tc_composition_witness(f, arguments, m, algebra, oracle)
    assert verify_witness(witness, f, arguments, m, ())
    assert check_leaves(witness, {'A': algebra, 'B': oracle}) == []
    return witness


def test_coarse_case_expands_taylor_series(line, t, reached_cases):
    f, g = geometric_rps(line), embed(monomial(t))
    witness = witness_holds(f, [g], t ** 3)
    assert reached_cases[0] == '_case_coarse'
    assert '_case_fine' in reached_cases
    assert take_terms(witness.evaluate(line, ()).coeff(), 5) == [Term(t ** k, Fraction(1)) for k in range(3)]


def test_fine_case_alone(line, t, reached_cases):
    one = constant(line, 1)
    f = from_coefficients(line, ('x',), {(0,): one, (1,): one})
    witness = witness_holds(f, [embed(monomial(t))], t ** Fraction(1, 2))
    assert reached_cases == ['_case_fine']
    assert take_terms(witness.evaluate(line, ()).coeff(), 3) == [Term(line.identity(), Fraction(1))]


def test_rank_two_composition(plane):
    """f = Σ t^k x^k en x = u, tronquée en u·t"""
    u, t = plane.generator('u'), plane.generator('t')
    f = Rps(plane, ('x',), lambda index: monomial(t ** index[0]), lambda k: t ** k, label="f")
    witness = witness_holds(f, [embed(monomial(u))], u * t)
    assert take_terms(witness.evaluate(plane, ()).coeff(), 3) == [Term(plane.identity(), Fraction(1))]


def test_taylor_order_is_capped(line, t):
    f, g = geometric_rps(line), embed(monomial(t))
    with pytest.raises(WitnessDepthError):
        tc_composition_witness(f, [g], t ** 3, MembershipOracle('A'), MembershipOracle('B'), taylor_cap=2)


def random_series(rng, group, choices, count):
    picked = rng.sample(choices, count)
    return from_terms(group, [(m, rng.choice([1, 2, -1, Fraction(1, 2)])) for m in picked])


def random_polynomial(rng, group, choices):
    degree = rng.randint(1, 3)
    table = {(k,): random_series(rng, group, choices, rng.randint(1, 2)) for k in range(degree + 1)}
    return from_coefficients(group, ('x',), table)


def composition_triples(seed, count):
    rng = random.Random(seed)
    line, plane = MonomialGroup.of('t'), MonomialGroup.of('u', 't')
    t = line.generator('t')
    u, s = plane.generator('u'), plane.generator('t')
    half = Fraction(1, 2)
    triples = []
    for i in range(count):
        if i % 2 == 0:
            coefficients = [t ** 0, t ** half, t]
            f = geometric_rps(line) if rng.random() < 0.3 else random_polynomial(rng, line, coefficients)
            g = embed(random_series(rng, line, [t ** half, t, t ** Fraction(3, 2), t ** 2], rng.randint(1, 2)))
            m = t ** rng.choice([half, 1, Fraction(3, 2), 2, Fraction(5, 2)])
        else:
            f = random_polynomial(rng, plane, [s ** 0, s, s ** 2, u])
            g = embed(random_series(rng, plane, [s, s ** 2, u, u * s], rng.randint(1, 2)))
            m = rng.choice([s ** 2, u, u * s, s ** Fraction(3, 2)])
        triples.append((f, g, m))
    return triples


@pytest.mark.parametrize("f, g, m", composition_triples(11, 24))
def test_random_composition_witnesses(f, g, m):
    witness_holds(f, [g], m)


def test_product_decomposition_in_rank_two(plane):
    u, t = plane.generator('u'), plane.generator('t')
    one = plane.identity()
    f = embed(from_terms(plane, [(one, 1), (u, 1)]))
    g = embed(from_terms(plane, [(one, 1), (t, 1)]))
    decomposition = tc_product_decompose(f, g, u)
    assert decomposition.cuts
    assert decomposition.verify()
    assert [term.monomial for term in take_terms(decomposition.assembled.coeff(), 4)] == [one, t]


def test_product_decomposition_below_cut(line, t):
    decomposition = tc_product_decompose(embed(monomial(t)), embed(monomial(t)), t)
    assert decomposition.cuts == []
    assert decomposition.verify()


def test_random_product_decompositions():
    rng = random.Random(5)
    line = MonomialGroup.of('t')
    t = line.generator('t')
    exponents = [t ** Fraction(e, 2) for e in range(5)]
    for _ in range(12):
        f = from_coefficients(line, ('x',), {(0,): random_series(rng, line, exponents, rng.randint(1, 3)),
                                             (1,): random_series(rng, line, exponents, 1)})
        g = embed(random_series(rng, line, exponents, rng.randint(1, 3)), ('x',))
        m = t ** Fraction(rng.randint(1, 6), 2)
        assert tc_product_decompose(f, g, m).verify()


def test_truncated_product_skips_small_supports(line, t):
    def refuse(p):
        raise AssertionError(f"troncature demandée en {p}")

    small = Factor(embed(monomial(t ** 2)), refuse)
    assert list(truncated_product([small, small], t).leaves()) == []
    nothing = Factor(embed(from_terms(line, [])), refuse)
    assert list(truncated_product([nothing, Factor(embed(monomial(t)), refuse)], t ** 5).leaves()) == []


# Cohérence de la composition

def test_composition_commutes_with_archimedean_truncation():
    rng = random.Random(13)
    plane = MonomialGroup.of('u', 't')
    u, t = plane.generator('u'), plane.generator('t')
    classes = [ArchClass(0), ArchClass(1), INFINITE_CLASS]
    for _ in range(100):
        f = random_polynomial(rng, plane, [t ** 0, t, u, u * t, t ** 2])
        g = embed(random_series(rng, plane, [t, u, u * t, t ** 2], rng.randint(1, 2)))
        v = rng.choice(classes)
        whole = v_truncate(compose(f, [g]).coeff(), v)
        parts = compose(coeff_trunc_v(f, v), [coeff_trunc_v(g, v)]).coeff()
        assert probe_equal(whole, parts, 40), (f, g, v)


def test_composition_is_associative():
    rng = random.Random(17)
    line = MonomialGroup.of('t')
    t = line.generator('t')
    half = Fraction(1, 2)
    for _ in range(100):
        f = random_polynomial(rng, line, [t ** 0, t ** half, t])
        inner = {(0,): random_series(rng, line, [t ** half, t], 1)}
        for k in range(1, rng.randint(1, 2) + 1):
            inner[(k,)] = random_series(rng, line, [t ** 0, t ** half, t], 1)
        g = from_coefficients(line, ('y',), inner)
        h = embed(random_series(rng, line, [t ** half, t, t ** 2], rng.randint(1, 2)))
        left = compose(compose(f, [g]), [h]).coeff()
        right = compose(f, [compose(g, [h])]).coeff()
        assert probe_equal(left, right, 40, threshold=t ** 8)
