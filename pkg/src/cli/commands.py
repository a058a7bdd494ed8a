"""
Sous-commandes de hahnforge : run, check et repl

run    exécute un fichier de commandes et imprime la sortie (texte ou JSON)
check  rejoue un répertoire de fixtures et compare aux sorties attendues
repl   lit les instructions au fil de l'entrée standard
"""

import sys
import time
from pathlib import Path
from typing import List, NamedTuple, Optional, TextIO, Tuple

from src.cli.interpreter import Interpreter, OutputRecord, has_errors, render_json, render_text
from src.cli.parser import Scope, parse
from src.cli.syntax import Position, format_program
from src.utils.errors import DslError
from src.utils.logger import get_logger

logger = get_logger(__name__)

FIXTURE_SUFFIX = ".hf"
EXPECTED_SUFFIX = ".expected"
PROMPT = "hf> "
CONTINUATION = "... "


def syntax_failure(error: DslError) -> OutputRecord:
    """Enregistrement d'un programme rejeté avant toute exécution"""
    name = type(error).__name__
    pos = Position(error.line, error.column)
    payload = {'error': name, 'message': error.message, 'line': error.line, 'column': error.column}
    return OutputRecord("", 'error', (f"! {name}: {error.message} ({pos})",), payload, 0)


def _render(records: List[OutputRecord], as_json: bool) -> str:
    if as_json:
        return render_json(records)
    # un programme rejeté n'a pas de commande à rappeler
    return "".join(r.render() if r.command else "".join(line + "\n" for line in r.lines) for r in records)


def execute_source(source: str, budget: Optional[int] = None,
                   depth: Optional[int] = None) -> List[OutputRecord]:
    """Analyse puis exécute un texte complet"""
    try:
        program = parse(source)
    except DslError as e:
        logger.error(f"Programme rejeté: {e}")
        return [syntax_failure(e)]
    return Interpreter(budget=budget, depth=depth).run(program)


def run_file(path: str, budget: Optional[int] = None, depth: Optional[int] = None,
             as_json: bool = False) -> Tuple[str, bool]:
    """
    Exécute un fichier de commandes.

    Returns:
        (sortie rendue, succès) ; le succès est faux dès qu'un enregistrement
        est en erreur. Un budget épuisé n'est pas un échec.
    """
    source = Path(path).read_text(encoding='utf-8')
    start_time = time.time()
    records = execute_source(source, budget, depth)
    logger.info(f"{path}: {len(records)} enregistrements en {time.time() - start_time:.2f}s")
    return _render(records, as_json), not has_errors(records)


class FixtureResult(NamedTuple):
    name: str
    passed: bool
    detail: str

    def render(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"

    def to_json(self) -> dict:
        return {'name': self.name, 'passed': self.passed, 'detail': self.detail}


def check_fixture(path: Path, budget: Optional[int] = None, depth: Optional[int] = None) -> FixtureResult:
    """
    Une fixture passe si son texte réimprimé se relit en un programme égal,
    puis si sa sortie est celle du fichier .expected voisin (ou, sans ce
    fichier, si aucune commande n'est en erreur).
    """
    name = path.name
    source = path.read_text(encoding='utf-8')
    try:
        program = parse(source)
    except DslError as e:
        return FixtureResult(name, False, f"analyse impossible: {e}")

    try:
        reparsed = parse(format_program(program))
    except DslError as e:
        return FixtureResult(name, False, f"forme canonique illisible: {e}")
    if reparsed != program:
        return FixtureResult(name, False, "forme canonique instable")

    records = Interpreter(budget=budget, depth=depth).run(program)
    expected_path = path.with_suffix(EXPECTED_SUFFIX)
    if expected_path.exists():
        expected = expected_path.read_text(encoding='utf-8')
        if render_text(records) == expected:
            return FixtureResult(name, True, f"{len(records)} sorties conformes")
        return FixtureResult(name, False, f"sortie différente de {expected_path.name}")

    failed = [r for r in records if r.status == 'error']
    if failed:
        return FixtureResult(name, False, f"{len(failed)} commandes en erreur, première: {failed[0].lines[-1]}")
    return FixtureResult(name, True, f"{len(records)} commandes sans erreur")


def check_directory(directory: str, budget: Optional[int] = None,
                    depth: Optional[int] = None) -> List[FixtureResult]:
    """Rejoue toutes les fixtures .hf du répertoire, dans l'ordre des noms"""
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"Répertoire de fixtures introuvable: {directory}")
    paths = sorted(root.rglob(f"*{FIXTURE_SUFFIX}"))
    logger.info(f"{len(paths)} fixtures dans {root}")
    results = []
    for path in paths:
        result = check_fixture(path, budget, depth)
        log = logger.info if result.passed else logger.warning
        log(result.render())
        results.append(result)
    return results


def check_report(directory: str, results: List[FixtureResult]) -> dict:
    passed = sum(1 for r in results if r.passed)
    return {
        'directory': str(directory),
        'entries': [r.to_json() for r in results],
        'statistics': {'fixtures': len(results), 'passed': passed, 'failed': len(results) - passed},
    }


def statement_complete(text: str) -> bool:
    """Le tampon se termine par ';' une fois les commentaires retirés"""
    code = "\n".join(line.split('#', 1)[0] for line in text.splitlines())
    return code.rstrip().endswith(';')


def repl(stdin: Optional[TextIO] = None, stdout: Optional[TextIO] = None,
         budget: Optional[int] = None, depth: Optional[int] = None, as_json: bool = False) -> int:
    """
    Boucle interactive : la portée et l'interpréteur persistent entre les
    instructions. Un morceau rejeté à l'analyse ne modifie pas la portée.
    """
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    interactive = stdin.isatty()
    scope = Scope()
    interpreter = Interpreter(budget=budget, depth=depth)
    buffer: List[str] = []

    def prompt() -> None:
        if interactive:
            sys.stderr.write(CONTINUATION if buffer else PROMPT)
            sys.stderr.flush()

    prompt()
    for line in stdin:
        buffer.append(line)
        chunk = "".join(buffer)
        if not statement_complete(chunk):
            prompt()
            continue
        buffer.clear()
        try:
            records = interpreter.run(parse(chunk, scope))
        except DslError as e:
            records = [syntax_failure(e)]
        stdout.write(_render(records, as_json))
        stdout.flush()
        prompt()

    if any(line.split('#', 1)[0].strip() for line in buffer):
        logger.warning("Instruction incomplète ignorée en fin d'entrée")
    return 0
