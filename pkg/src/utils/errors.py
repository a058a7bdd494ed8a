"""
Hiérarchie des exceptions de hahnforge
Chaque mode d'échec des opérations possède sa propre classe.
"""

from typing import Any, Optional


class HahnforgeError(Exception):
    """Classe de base de toutes les erreurs du moteur"""


class GroupMismatchError(HahnforgeError):
    """Deux objets appartiennent à des groupes de monômes différents"""


class NotAnAntichainError(HahnforgeError, ValueError):
    """Les générateurs fournis ne forment pas une antichaîne"""


class InexactPowerError(HahnforgeError, ArithmeticError):
    """Une puissance rationnelle n'a pas de valeur rationnelle exacte"""


class InvalidParameterError(HahnforgeError, ValueError):
    """Paramètre hors de son domaine (k ≤ 0, monôme non infinitésimal...)"""


class NotInvertibleError(HahnforgeError, ZeroDivisionError):
    """Inversion d'une série nulle ou d'un élément non inversible"""


class BudgetExhaustedError(HahnforgeError):
    """
    Le budget de calcul est épuisé avant la fin de l'observation.

    Distinct d'un flux terminé : `partial` contient ce qui a pu être calculé.
    """

    def __init__(self, limit: int, partial: Optional[Any] = None,
                 message: Optional[str] = None):
        self.limit = limit
        self.partial = partial
        super().__init__(message or f"Budget épuisé après {limit} étapes")


class StreamOrderError(HahnforgeError):
    """Un flux de termes n'est pas strictement décroissant"""


class VariableError(HahnforgeError):
    """Variable inconnue, dupliquée ou non classique"""


class NormalFormError(HahnforgeError):
    """Série non normale, non p-composable ou non infinitésimale"""


class DivisibilityError(HahnforgeError):
    """Division monomiale impossible"""


class CompositionError(HahnforgeError):
    """Argument non composable"""


class OracleRefusalError(HahnforgeError):
    """Un oracle d'appartenance refuse un atome de témoin"""

    def __init__(self, label: str, step: str, message: Optional[str] = None):
        self.label = label
        self.step = step
        super().__init__(message or f"Oracle: étape '{step}' refusée pour '{label}'")


class WitnessDepthError(HahnforgeError):
    """Profondeur de récursion maximale atteinte lors de la construction d'un témoin"""


class WitnessNotFoundError(HahnforgeError):
    """Aucun témoin trouvé pour une troncature"""


class NotTruncationClosedError(HahnforgeError):
    """L'ensemble de base n'est pas clos par troncature"""


class DslError(HahnforgeError):
    """Erreur du langage de commandes, localisée par ligne et colonne"""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        self.message = message
        super().__init__(f"{line}:{column}: {message}")


class DslSyntaxError(DslError):
    """Erreur de syntaxe"""


class DslTypeError(DslError):
    """Expression mal typée (série de Hahn / série généralisée / langage)"""


class UnboundNameError(DslError):
    """Nom utilisé avant d'être lié"""
