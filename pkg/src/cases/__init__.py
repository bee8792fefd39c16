from src.cases.permeability import PermeabilityField
from src.cases.manufactured import (
    CASE_NAMES,
    SCHEME_OF_CASE,
    ManufacturedCase,
    make_case,
    keps_case,
    consistency_check,
    compatibility_defect,
)

__all__ = [
    "PermeabilityField",
    "CASE_NAMES",
    "SCHEME_OF_CASE",
    "ManufacturedCase",
    "make_case",
    "keps_case",
    "consistency_check",
    "compatibility_defect",
]
