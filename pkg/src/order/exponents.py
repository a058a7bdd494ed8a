"""
Arithmétique exacte des exposants et coefficients rationnels
"""

from fractions import Fraction
from math import factorial
from typing import Union

from sympy import integer_nthroot

from src.utils.errors import InexactPowerError

RationalLike = Union[int, str, Fraction]


def as_rational(value: RationalLike) -> Fraction:
    """Conversion exacte vers Fraction (les flottants sont refusés)"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError(f"Booléen refusé comme rationnel: {value!r}")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"Valeur non rationnelle exacte: {value!r}")


as_exponent = as_rational


def format_rational(value: RationalLike) -> str:
    """Forme canonique p/q réduite (ou p)"""
    q = as_rational(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_power(value: RationalLike) -> str:
    """Exposant tel qu'écrit après '^' : entier naturel nu, sinon parenthésé"""
    q = as_rational(value)
    if q.denominator == 1 and q >= 0:
        return str(q.numerator)
    return f"({format_rational(q)})"


def rational_power(base: RationalLike, exponent: RationalLike) -> Fraction:
    """
    Puissance exacte base^exponent.

    Raises:
        InexactPowerError: si le résultat n'est pas rationnel
            (racine non exacte, base négative ou nulle hors exposant entier)
    """
    base, exponent = as_rational(base), as_rational(exponent)
    if exponent.denominator == 1:
        if base == 0 and exponent < 0:
            raise InexactPowerError("0 élevé à une puissance négative")
        return base ** exponent.numerator
    if base == 0 and exponent > 0:
        return Fraction(0)
    if base <= 0:
        raise InexactPowerError(f"{format_rational(base)}^({format_rational(exponent)}) n'est pas rationnel")
    root_num, exact_num = integer_nthroot(base.numerator, exponent.denominator)
    root_den, exact_den = integer_nthroot(base.denominator, exponent.denominator)
    if not (exact_num and exact_den):
        raise InexactPowerError(f"{format_rational(base)}^({format_rational(exponent)}) n'est pas rationnel")
    return Fraction(int(root_num), int(root_den)) ** exponent.numerator


def binomial(alpha: RationalLike, m: int) -> Fraction:
    """Coefficient binomial généralisé (alpha choose m)"""
    if m < 0:
        return Fraction(0)
    alpha = as_rational(alpha)
    result = Fraction(1)
    for j in range(m):
        result *= alpha - j
    return result / factorial(m)


def falling_factorial(alpha: RationalLike, m: int) -> Fraction:
    """alpha (alpha-1) ... (alpha-m+1)"""
    alpha = as_rational(alpha)
    result = Fraction(1)
    for j in range(m):
        result *= alpha - j
    return result
