"""Hybrid degenerations of rational maps: complex fibers, the Puiseux fiber,
and the harness comparing them."""

__version__ = "0.1.0"

from .puiseux import (FieldExtensionError, GaussQ, PrecisionError, PuiseuxNumber,  # noqa: F401
                      newton_puiseux_roots, parse_puiseux, truncation_terms)
from .ratmap import (COMPLEX, PUISEUX, RATIONAL, DegenerateMapError, MobiusRep,  # noqa: F401
                     ProjPoint, RationalMap)
