"""Langage de commandes, sous-commandes et batterie de propriétés"""

import io
import json
import os

import pytest

import hahnforge
from src.cli.commands import check_directory, check_report, execute_source, repl, run_file, statement_complete
from src.cli.interpreter import render_text
from src.cli.parser import Scope, parse, tokenize
from src.cli.properties import PROPERTIES, run_properties
from src.cli.syntax import format_program, format_statement
from src.utils.errors import DslSyntaxError, DslTypeError, UnboundNameError
from src.utils.settings import BUDGET_ENV_VAR, get_setting

pytestmark = pytest.mark.cli


def canonical(source):
    return [format_statement(s) for s in parse(source)]


def test_tokenize_reports_position():
    with pytest.raises(DslSyntaxError) as info:
        tokenize("group t;\nshow $;")
    assert (info.value.line, info.value.column) == (2, 6)


def test_unbound_name_is_located():
    with pytest.raises(UnboundNameError) as info:
        parse("group t;\nshow x;")
    assert (info.value.line, info.value.column) == (2, 6)


def test_redeclaration_is_refused():
    with pytest.raises(DslTypeError):
        parse("group t;\nvar t;")


def test_printer_keeps_precedence():
    assert canonical("group t; show (1 - t) - (1 - t);") == ["group t;", "show 1 - t - (1 - t);"]
    assert canonical("group t; show 2 * (t + 1);")[1] == "show 2 * (t + 1);"
    assert canonical("group t; show (-t)^2; show -t^2;")[1:] == ["show (-t)^2;", "show -t^2;"]


def test_scope_is_updated_only_on_success():
    scope = Scope()
    parse("group t;", scope)
    assert scope.resolves('t')
    with pytest.raises(UnboundNameError):
        parse("a := t; show b;", scope)
    assert not scope.resolves('a')


@pytest.mark.parametrize("directory", ["corpus", "closure"])
def test_fixtures_reprint_to_themselves(directory, corpus_dir, closure_dir):
    root = corpus_dir if directory == "corpus" else closure_dir
    paths = sorted(root.glob("*.hf"))
    assert paths
    for path in paths:
        program = parse(path.read_text(encoding='utf-8'))
        assert parse(format_program(program)) == program, path.name


def test_execute_source_records():
    records = execute_source("group t;\nshow t^(1/2);\nshow 1/2 + 1/3;")
    assert [r.lines for r in records] == [("t^(1/2)",), ("5/6",)]
    assert render_text(records) == "> show t^(1/2);\nt^(1/2)\n> show 1/2 + 1/3;\n5/6\n"


def test_coeffs_of_multivariate_square():
    records = execute_source("var x, y;\ncoeffs (x + y) * (x + y) grade 2;")
    assert [r.lines for r in records] == [("1 * x^2", "2 * x^1*y^1", "1 * y^2")]


def test_syntax_error_rejects_program():
    records = execute_source("group t;\nshow t;\nshow $;")
    assert len(records) == 1
    assert records[0].command == ""
    assert records[0].lines == ("! DslSyntaxError: Caractère inattendu '$' (ligne 3, colonne 6)",)


def test_budget_record_is_not_an_error(tmp_path):
    source = tmp_path / "budget.hf"
    source.write_text("group t;\nshow inv(1 - t) - inv(1 - t) depth 1;\n", encoding='utf-8')
    output, success = run_file(str(source), budget=200)
    assert success
    assert output == "> show inv(1 - t) - inv(1 - t) depth 1;\n! budget épuisé (limite 200)\n"
    records = json.loads(run_file(str(source), budget=200, as_json=True)[0])
    assert records[0]['status'] == 'budget'
    assert records[0]['result']['budget_limit'] == 200


def test_corpus_fixtures_pass(corpus_dir):
    results = check_directory(str(corpus_dir))
    assert [r.name for r in results] == sorted(p.name for p in corpus_dir.glob("*.hf"))
    assert all(r.passed for r in results), [r.render() for r in results if not r.passed]
    report = check_report(str(corpus_dir), results)
    assert report['statistics'] == {'fixtures': len(results), 'passed': len(results), 'failed': 0}


def test_fixture_with_wrong_expectation(tmp_path):
    (tmp_path / "wrong.hf").write_text("group t;\nshow t;\n", encoding='utf-8')
    (tmp_path / "wrong.expected").write_text("> show t;\nt^2\n", encoding='utf-8')
    (tmp_path / "broken.hf").write_text("group t;\nshow inv(0);\n", encoding='utf-8')
    results = {r.name: r for r in check_directory(str(tmp_path))}
    assert not results["wrong.hf"].passed
    assert not results["broken.hf"].passed
    assert results["broken.hf"].render().startswith("FAIL broken.hf:")


def test_missing_fixture_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        check_directory(str(tmp_path / "absent"))


def test_statement_completion():
    assert statement_complete("show t;  # commentaire\n")
    assert not statement_complete("show 1 +\n")
    assert not statement_complete("show t # ;\n")


def test_repl_keeps_state_between_statements():
    stdin = io.StringIO("group t;\nshow 1 +\n t;\nshow x;\nshow t;\nshow t")
    stdout = io.StringIO()
    assert repl(stdin=stdin, stdout=stdout) == 0
    assert stdout.getvalue() == (
        "> show 1 + t;\n1\n1 * t^1\nexhausted: true\n"
        "! UnboundNameError: Nom non lié: x (ligne 1, colonne 6)\n"
        "> show t;\nt^1\n"
    )


def test_properties_hold():
    counts = get_setting("cli.ci_property_instances")
    assert set(counts) == set(PROPERTIES)
    results = [run_properties(seed=7, instances=counts[name], names=[name])[0] for name in PROPERTIES]
    assert [r.instances for r in results] == [counts[name] for name in PROPERTIES]
    assert all(r.passed for r in results), [r.render() for r in results if not r.passed]


def test_properties_are_reproducible():
    results = run_properties(seed=7, instances=3)
    assert [r.name for r in results] == list(PROPERTIES)
    assert results == run_properties(seed=7, instances=3)


def test_property_names():
    assert set(PROPERTIES) >= {'ring-laws', 'truncated-product', 'v-truncation', 'product-segmentation'}
    with pytest.raises(KeyError):
        run_properties(seed=1, instances=1, names=['absente'])


def test_main_run(corpus_dir, capsys):
    path = corpus_dir / "geometric_truncation.hf"
    assert hahnforge.main(["--no-banner", "run", str(path)]) == 0
    expected = (corpus_dir / "geometric_truncation.expected").read_text(encoding='utf-8')
    assert capsys.readouterr().out == expected


def test_main_json_and_budget(corpus_dir, capsys, monkeypatch):
    # main écrit la variable : setenv garantit sa restauration
    monkeypatch.setenv(BUDGET_ENV_VAR, "100000")
    path = corpus_dir / "geometric_truncation.hf"
    assert hahnforge.main(["--no-banner", "--json", "--budget", "50000", "run", str(path)]) == 0
    assert os.environ[BUDGET_ENV_VAR] == "50000"
    records = json.loads(capsys.readouterr().out)
    assert [r['status'] for r in records] == ['ok', 'ok']


def test_main_check_without_report(corpus_dir, capsys):
    assert hahnforge.main(["--no-banner", "check", str(corpus_dir), "--no-report"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS ") for line in lines)


def test_main_reports_fatal_errors(tmp_path):
    assert hahnforge.main(["--no-banner", "run", str(tmp_path / "absent.hf")]) == 1


def test_main_rejects_bad_budget():
    with pytest.raises(SystemExit):
        hahnforge.main(["--budget", "0", "repl"])
