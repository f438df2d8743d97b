"""Two-qubit gate analysis: canonical coordinates, application budgets, synthesis."""
from .canonical import (
    CanonicalDecomposition,
    CanonicalVector,
    NonlocalContent,
    canonical_gate,
    decompose,
    nonlocal_content,
    weyl_reduce,
)
from .invariants import MakhlinInvariants, locally_equivalent, majorizes, makhlin, theorem2_check

__version__ = "0.1.0"

__all__ = [
    "CanonicalDecomposition",
    "CanonicalVector",
    "MakhlinInvariants",
    "NonlocalContent",
    "canonical_gate",
    "decompose",
    "locally_equivalent",
    "majorizes",
    "makhlin",
    "nonlocal_content",
    "theorem2_check",
    "weyl_reduce",
]
