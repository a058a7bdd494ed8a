"""Langages, génération bornée et témoins de clôture par troncature"""

from fractions import Fraction

import pytest

from src.cli.commands import check_directory
from src.cli.parser import parse
from src.cli.syntax import ClosureCheck
from src.closure.checker import TruncationWitnesser, check_truncation_closed
from src.closure.generation import Times, generate
from src.closure.language import LanguageF, fm_instances, make_Fb
from src.gps.blowups import blowup_affine
from src.gps.expr import Binomial, Geometric
from src.series.hahn import from_terms, monomial
from src.utils.errors import InvalidParameterError

pytestmark = pytest.mark.closure


def test_unknown_flags_are_refused():
    with pytest.raises(InvalidParameterError):
        LanguageF({'g': Geometric('x')}, {'ring', 'magic'})


def test_allowed_steps_follow_flags():
    assert LanguageF({}).allowed_steps() == frozenset({'monomial'})
    language = LanguageF({}, {'partial-truncation', 'renorm-derivative'})
    assert language.allowed_steps() == frozenset({'monomial', 'trunc', 'sub_trunc', 'deriv'})


def test_almost_fine_lists_missing_flags():
    report = LanguageF({'g': Geometric('x')}, name="G").almost_fine()
    assert not report.almost_fine
    assert report.violations == [
        "ring: drapeau absent",
        "partial-truncation: drapeau absent",
        "renorm-derivative: drapeau absent",
    ]
    assert report.to_json()['language'] == "G"


def test_blowup_extension():
    base = LanguageF({'g': Geometric('x')}, {'ring'}, name="F")
    extended = make_Fb(base)
    assert extended.name == "F_b"
    assert extended.has('blowups')
    assert extended.base is base
    assert extended.contains(blowup_affine(Geometric('x'), 'x', 'a', 'b', 1))


def test_fm_requires_infinitesimal_assignments(line, t):
    with pytest.raises(InvalidParameterError):
        fm_instances(LanguageF({'g': Geometric('x')}), line, [(t ** -1,)])


def test_generation_deduplicates(line, t):
    language = LanguageF({'g': Geometric('x')}, name="G")
    generated = generate({'b': monomial(t)}, language, depth=1)
    # le générateur t coïncide avec b
    assert [e.describe() for e in generated][:2] == ["b", "1"]
    assert len(generated) == 7
    assert generated.element("e6").describe() == "g(b)"
    assert generated.to_json()['language'] == "G"
    with pytest.raises(KeyError):
        generated.element("e99")


def test_product_truncation_is_witnessed(line, t):
    generated = generate({'b': monomial(t)}, LanguageF({}), depth=0)
    b = generated.element("e0")
    square = Times(b, b)
    square.element_id = "sq"
    entry = TruncationWitnesser(generated).check(square, t ** 3)
    assert entry.status == 'witnessed'
    assert entry.witness is not None


def test_closure_report_on_base_elements(line, t):
    generated = generate({'b': monomial(t)}, LanguageF({}, name="vide"), depth=0)
    report = check_truncation_closed(generated, probes=[t ** 2], max_workers=1)
    assert [entry.element_id for entry in report.entries] == ["e0", "e1"]
    assert report.all_witnessed
    assert report.to_json(include_witnesses=False)['language'] == "vide"


def test_deep_probe_of_inverse_is_witnessed(line, t):
    """1/(1 + t + t²) a des termes jusqu'en t^13 : ordre de Taylor 13"""
    flags = {'ring', 'reindex', 'partial-truncation', 'renorm-derivative'}
    language = LanguageF({'i': Binomial(-1, 'x')}, flags, name="F")
    a = from_terms(line, [(t, 1), (t ** 2, 1)])
    generated = generate({'a': a}, language, depth=1)
    inverse = next(e for e in generated if e.describe() == "i(a)")
    witnesser = TruncationWitnesser(generated)
    for m in (t ** 12, t ** Fraction(25, 2), t ** 13):
        entry = witnesser.check(inverse, m)
        assert entry.status == 'witnessed', entry.reason


def test_closure_fixtures_pass(closure_dir):
    results = check_directory(str(closure_dir))
    assert [r.name for r in results] == sorted(p.name for p in closure_dir.glob("*.hf"))
    assert "rank_two.hf" in [r.name for r in results]
    assert all(r.passed for r in results), [r.render() for r in results if not r.passed]


def test_closure_fixtures_run_at_full_depth(closure_dir):
    for path in sorted(closure_dir.glob("*.hf")):
        checks = [s for s in parse(path.read_text(encoding='utf-8')) if isinstance(s, ClosureCheck)]
        assert checks, path.name
        assert all(s.depth == 3 and s.probe == 10 for s in checks), path.name
