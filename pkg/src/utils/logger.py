"""
Logging de hahnforge : console colorée sur stderr, fichier daté en option

stdout n'accueille que les résultats des commandes, jamais les logs.
"""

import logging
import sys
from datetime import datetime
from typing import Optional

import colorlog

from src.utils.settings import ROOT_DIR, load_config

DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DEFAULT_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

LOG_COLORS = {
    'DEBUG': 'cyan',
    'INFO': 'green',
    'WARNING': 'yellow',
    'ERROR': 'red',
    'CRITICAL': 'red,bg_white',
}

# loggers du projet touchés par set_level
PROJECT_PREFIXES = ('src', 'hahnforge', '__main__')


def _level(name: Optional[str]) -> int:
    return getattr(logging, str(name or 'INFO').upper(), logging.INFO)


class HahnLogger:
    """Logger nommé configuré depuis la section logging de config.yaml"""

    def __init__(self, name: str, config_path: Optional[str] = None):
        self.name = name
        self.settings = load_config(config_path).get('logging') or {}
        self.logger = self._build()

    def _console_handler(self) -> logging.Handler:
        handler = colorlog.StreamHandler(sys.stderr)
        handler.setFormatter(colorlog.ColoredFormatter(
            '%(log_color)s' + self.settings.get('format', DEFAULT_FORMAT),
            datefmt=self.settings.get('date_format', DEFAULT_DATE_FORMAT),
            log_colors=LOG_COLORS,
        ))
        return handler

    def _file_handler(self) -> logging.Handler:
        directory = ROOT_DIR / self.settings.get('directory', 'logs')
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.name}_{datetime.now():%Y%m%d}.log"
        handler = logging.FileHandler(path, encoding='utf-8')
        handler.setFormatter(logging.Formatter(
            self.settings.get('format', DEFAULT_FORMAT),
            datefmt=self.settings.get('date_format', DEFAULT_DATE_FORMAT),
        ))
        return handler

    def _build(self) -> logging.Logger:
        logger = logging.getLogger(self.name)
        logger.setLevel(_level(self.settings.get('level')))
        if logger.handlers:
            return logger

        if self.settings.get('console_output', True):
            logger.addHandler(self._console_handler())
        if self.settings.get('file_output', False):
            logger.addHandler(self._file_handler())
        logger.propagate = False
        return logger

    def get_logger(self) -> logging.Logger:
        return self.logger


def get_logger(name: str) -> logging.Logger:
    """
    Logger configuré pour un module

    Args:
        name: Nom du logger (généralement __name__)
    """
    return HahnLogger(name).get_logger()


def set_level(level: str) -> None:
    """Change le niveau de tous les loggers du projet (option --quiet)"""
    for name, candidate in logging.root.manager.loggerDict.items():
        if isinstance(candidate, logging.Logger) and name.startswith(PROJECT_PREFIXES):
            candidate.setLevel(_level(level))
