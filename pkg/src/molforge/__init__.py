"""Interactive evolutionary design of small drug-like molecules."""

from .chem import DEFAULT_TABLE, ElementTable, MoleculeGraph, ValidityRules, molecular_weight
from .exsmiles import ParseError, parse, serialize, to_standard_smiles

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TABLE",
    "ElementTable",
    "MoleculeGraph",
    "ValidityRules",
    "molecular_weight",
    "ParseError",
    "parse",
    "serialize",
    "to_standard_smiles",
    "__version__",
]
