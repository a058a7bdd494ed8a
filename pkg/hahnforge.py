"""hahnforge : calcul exact sur séries de Hahn, séries généralisées et restreintes"""

import argparse
import os
import sys
import time
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()
sys.path.append(str(Path(__file__).parent))

from src.cli.commands import check_directory, check_report, repl, run_file
from src.cli.properties import run_properties
from src.persistence.report_store import ReportStore
from src.utils.logger import get_logger, set_level
from src.utils.settings import BUDGET_ENV_VAR, get_setting

logger = get_logger(__name__)


def print_banner():
    banner = """
    ================================================================
              HAHNFORGE - SÉRIES DE HAHN EXACTES
        Séries généralisées, séries restreintes, clôture
    ================================================================
    """
    # stdout est réservé aux résultats
    try:
        print(banner, file=sys.stderr)
    except UnicodeEncodeError:
        print("HAHNFORGE - SERIES DE HAHN EXACTES", file=sys.stderr)


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"entier attendu: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"entier strictement positif attendu: {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hahnforge",
        description="Séries de Hahn exactes : exécution de programmes et vérification de fixtures",
    )
    parser.add_argument("--budget", type=positive_int, default=None,
                        help=f"Budget d'étapes par commande (prioritaire sur {BUDGET_ENV_VAR})")
    parser.add_argument("--depth", type=positive_int, default=None,
                        help="Nombre de termes affichés par show (défaut: series.show_depth)")
    parser.add_argument("--json", action="store_true", help="Sortie JSON")
    parser.add_argument("--seed", type=int, default=None,
                        help="Exécute aussi la batterie de propriétés aléatoires avec cette graine")
    parser.add_argument("--quiet", action="store_true", help="N'affiche que les avertissements et erreurs")
    parser.add_argument("--no-banner", action="store_true", help="Supprime la bannière")

    commands = parser.add_subparsers(dest="command", required=True)
    run_cmd = commands.add_parser("run", help="Exécute un fichier de commandes")
    run_cmd.add_argument("file", help="Fichier .hf")
    check_cmd = commands.add_parser("check", help="Rejoue un répertoire de fixtures")
    check_cmd.add_argument("directory", help="Répertoire contenant les fixtures .hf")
    check_cmd.add_argument("--no-report", action="store_true", help="Ne sauvegarde pas le rapport JSON")
    commands.add_parser("repl", help="Boucle interactive sur l'entrée standard")
    return parser


def run_command(args) -> int:
    logger.info("=" * 80)
    logger.info(f"COMMANDE: run {args.file}")
    logger.info("=" * 80)
    output, success = run_file(args.file, args.budget, args.depth, args.json)
    sys.stdout.write(output)
    return 0 if success else 1


def check_command(args) -> int:
    logger.info("=" * 80)
    logger.info(f"COMMANDE: check {args.directory}")
    logger.info("=" * 80)
    start_time = time.time()
    results = check_directory(args.directory, args.budget, args.depth)
    for result in results:
        print(result.render())

    report = check_report(args.directory, results)
    if not args.no_report and get_setting("cli.save_reports", True):
        name = f"check_{Path(args.directory).resolve().name}"
        ReportStore().save_report(name, report, source=str(args.directory))

    stats = report['statistics']
    logger.info(f"{stats['passed']}/{stats['fixtures']} fixtures conformes en {time.time() - start_time:.2f}s")
    return 0 if stats['failed'] == 0 else 1


def property_battery(seed: int) -> int:
    logger.info("=" * 80)
    logger.info(f"PROPRIÉTÉS ALÉATOIRES (graine {seed})")
    logger.info("=" * 80)
    results = run_properties(seed)
    for result in results:
        print(result.render())
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.quiet:
        set_level("WARNING")
    if not args.no_banner and args.command != "repl":
        print_banner()

    # tous les budgets par défaut (y compris ceux des travaux de clôture) suivent --budget
    if args.budget is not None:
        os.environ[BUDGET_ENV_VAR] = str(args.budget)

    try:
        if args.command == "run":
            status = run_command(args)
        elif args.command == "check":
            status = check_command(args)
        else:
            status = repl(budget=args.budget, depth=args.depth, as_json=args.json)

        if args.seed is not None:
            status = max(status, property_battery(args.seed))
        return status

    except KeyboardInterrupt:
        logger.warning("Interrompu par l'utilisateur")
        return 1
    except Exception as e:
        logger.error(f"Erreur fatale: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
