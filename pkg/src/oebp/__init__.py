"""Open-end bin packing: greedy packers, an exact solver, lower-bound
constructions and the closed-form ratio functions they are measured against."""
from .core import (
    Bin,
    DomainError,
    Instance,
    Item,
    OEBPError,
    Packing,
    ParseError,
    StructuralError,
    Variant,
    bin_valid,
    fits,
    packing_valid,
)
from .exact import BudgetExceeded, SolveBudget, naive_optimal, optimal_packing
from .greedy import ffd, first_fit, nfd, next_fit, worst_fit

__all__ = [
    "Bin", "BudgetExceeded", "DomainError", "Instance", "Item", "OEBPError", "Packing",
    "ParseError", "SolveBudget", "StructuralError", "Variant", "bin_valid", "ffd",
    "first_fit", "fits", "naive_optimal", "next_fit", "nfd", "optimal_packing",
    "packing_valid", "worst_fit",
]
