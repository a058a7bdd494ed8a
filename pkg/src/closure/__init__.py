"""
Moteur de clôture : langages ℱ, génération bornée, vérification des troncatures
"""

from src.closure.language import (
    CLOSURE_FLAGS, LanguageF, AlmostFineReport, BlowupLanguage, FMInstance,
    make_Fb, make_FM, fm_instances, fm_truncation_closed, fm_derivative_closed,
)
from src.closure.generation import (
    Element, BaseRef, ScalarLeaf, MonomialLeaf, Plus, Times, Apply, GeneratedSet,
    admissible_argument, check_base_closed, generate,
)
from src.closure.checker import (
    ClosureEntry, ClosureReport, TruncationWitnesser,
    check_truncation_closed, default_probes,
)

__all__ = [
    'CLOSURE_FLAGS', 'LanguageF', 'AlmostFineReport', 'BlowupLanguage', 'FMInstance',
    'make_Fb', 'make_FM', 'fm_instances', 'fm_truncation_closed', 'fm_derivative_closed',
    'Element', 'BaseRef', 'ScalarLeaf', 'MonomialLeaf', 'Plus', 'Times', 'Apply', 'GeneratedSet',
    'admissible_argument', 'check_base_closed', 'generate',
    'ClosureEntry', 'ClosureReport', 'TruncationWitnesser',
    'check_truncation_closed', 'default_probes',
]
