"""Exact computations for self-similar group actions.

Nuclei and Moore diagrams, fixed-word counts, critical values, and KMS
states on the associated Toeplitz and Cuntz-Pimsner algebras.
"""
from selfsim.action import (
    GroupElement,
    Overflow,
    SelfSimError,
    Undecided,
    act_and_restrict,
    act_word,
    exact_equal,
    is_trivial,
    restrict_word,
)
from selfsim.algebra import FormalCombination, parse_combination, parse_element, term
from selfsim.counting import count_F, count_G, critical_value
from selfsim.kernels import BACKEND as KERNEL_BACKEND
from selfsim.mealy import MealyAction, basilica, grigorchuk, load_machine, odometer
from selfsim.moore import build_diagram, dot_export, nucleus
from selfsim.zd import ZdAction

__version__ = "0.1.0"

__all__ = [
    "FormalCombination",
    "GroupElement",
    "KERNEL_BACKEND",
    "MealyAction",
    "Overflow",
    "SelfSimError",
    "Undecided",
    "ZdAction",
    "act_and_restrict",
    "act_word",
    "basilica",
    "build_diagram",
    "count_F",
    "count_G",
    "critical_value",
    "dot_export",
    "exact_equal",
    "grigorchuk",
    "is_trivial",
    "load_machine",
    "nucleus",
    "odometer",
    "parse_combination",
    "parse_element",
    "restrict_word",
    "term",
]
