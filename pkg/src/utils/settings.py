"""
Chargement de la configuration YAML et des surcharges d'environnement
"""

import os
import sys
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

import yaml

ROOT_DIR = Path(__file__).resolve().parent.parent.parent
DEFAULT_CONFIG_PATH = ROOT_DIR / "config" / "config.yaml"

BUDGET_ENV_VAR = "HAHNFORGE_BUDGET"
FALLBACK_BUDGET = 100_000


def resolve_config_path(config_path: Optional[str] = None) -> Path:
    """Chemin absolu du fichier de configuration"""
    if config_path is None:
        return DEFAULT_CONFIG_PATH
    path = Path(config_path)
    if not path.is_absolute() and not path.exists():
        path = ROOT_DIR / path
    return path


@lru_cache(maxsize=8)
def _read_config(path: str) -> dict:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}
    except Exception as e:
        print(f"Attention: Impossible de charger la config: {e}", file=sys.stderr)
        return {}


def load_config(config_path: Optional[str] = None) -> dict:
    """
    Charge la configuration (mise en cache par chemin).

    Args:
        config_path: Chemin du fichier YAML (défaut: config/config.yaml)

    Returns:
        Dictionnaire de configuration, vide si le fichier est illisible
    """
    return _read_config(str(resolve_config_path(config_path)))


def get_setting(key: str, default: Any = None, config_path: Optional[str] = None) -> Any:
    """Lit une clé pointée, par exemple "closure.depth" """
    node: Any = load_config(config_path)
    for part in key.split('.'):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def default_budget(config_path: Optional[str] = None) -> int:
    """
    Budget par défaut d'une observation.

    La variable d'environnement HAHNFORGE_BUDGET est prioritaire sur
    budget.default_steps.
    """
    raw = os.getenv(BUDGET_ENV_VAR)
    if raw:
        try:
            value = int(raw)
            if value > 0:
                return value
        except ValueError:
            pass
        print(f"Attention: {BUDGET_ENV_VAR}={raw!r} ignoré (entier positif attendu)", file=sys.stderr)
    return int(get_setting("budget.default_steps", FALLBACK_BUDGET, config_path))
