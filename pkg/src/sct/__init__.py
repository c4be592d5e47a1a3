"""Size-change termination analysis with ordinal termination certificates."""

from .lang import Program, parse_program
from .ordinal import Ordinal, parse_ordinal
from .scg import Description, SizeChangeGraph, check_isct, extract_description

__version__ = "0.1.0"

__all__ = [
    "Description", "Ordinal", "Program", "SizeChangeGraph", "check_isct",
    "extract_description", "parse_ordinal", "parse_program", "__version__",
]
