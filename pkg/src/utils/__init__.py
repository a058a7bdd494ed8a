"""
Utilitaires transverses de hahnforge (logging, configuration, erreurs, checkpoints)
"""

from src.utils.logger import get_logger, HahnLogger
from src.utils.settings import load_config, get_setting, default_budget
from src.utils.checkpoint import CheckpointManager, ProgressTracker

__all__ = [
    'get_logger',
    'HahnLogger',
    'load_config',
    'get_setting',
    'default_budget',
    'CheckpointManager',
    'ProgressTracker'
]
