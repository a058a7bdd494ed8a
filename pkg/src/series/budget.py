"""
Budget de calcul des observations

Une observation (take_terms, comparaison à seuil, tables de coefficients...)
ouvre un budget ; chaque étape d'expansion de terme le débite. Les
observations imbriquées partagent le budget actif.
"""

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, Optional

from src.utils.errors import BudgetExhaustedError
from src.utils.settings import default_budget


class Budget:
    """Compteur d'étapes borné"""

    __slots__ = ('limit', 'steps')

    def __init__(self, limit: int):
        if limit <= 0:
            raise ValueError(f"Budget strictement positif attendu, reçu {limit}")
        self.limit = limit
        self.steps = 0

    def charge(self, steps: int = 1) -> None:
        self.steps += steps
        if self.steps > self.limit:
            raise BudgetExhaustedError(self.limit)

    @property
    def remaining(self) -> int:
        return max(0, self.limit - self.steps)


_ACTIVE: ContextVar[Optional[Budget]] = ContextVar('hahnforge_budget', default=None)


@contextmanager
def observation(limit: Optional[int] = None) -> Iterator[Budget]:
    """
    Ouvre une observation budgétée.

    Sans limite explicite, réutilise le budget actif s'il existe, sinon ouvre
    un budget par défaut (HAHNFORGE_BUDGET ou budget.default_steps).
    """
    current = _ACTIVE.get()
    if limit is None and current is not None:
        yield current
        return
    budget = Budget(limit if limit is not None else default_budget())
    token = _ACTIVE.set(budget)
    try:
        yield budget
    finally:
        _ACTIVE.reset(token)


def charge(steps: int = 1) -> None:
    """Débite le budget actif (sans effet hors observation)"""
    budget = _ACTIVE.get()
    if budget is not None:
        budget.charge(steps)


def active_budget() -> Optional[Budget]:
    return _ACTIVE.get()
