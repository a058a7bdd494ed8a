"""
Langage de commandes : syntaxe, analyse, exécution, sous-commandes
"""

from src.cli.syntax import DslProgram, Position, format_expr, format_program, format_statement
from src.cli.parser import Scope, parse, tokenize
from src.cli.interpreter import Interpreter, OutputRecord, has_errors, render_json, render_text, run
from src.cli.commands import check_directory, check_fixture, execute_source, repl, run_file
from src.cli.properties import PROPERTIES, PropertyResult, run_properties

__all__ = [
    'DslProgram', 'Position', 'format_expr', 'format_program', 'format_statement',
    'Scope', 'parse', 'tokenize',
    'Interpreter', 'OutputRecord', 'has_errors', 'render_json', 'render_text', 'run',
    'check_directory', 'check_fixture', 'execute_source', 'repl', 'run_file',
    'PROPERTIES', 'PropertyResult', 'run_properties',
]
