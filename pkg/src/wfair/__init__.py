"""Weighted fair division of indivisible goods and chores, bit-exactly.

Agents carry positive entitlement weights; bundle comparisons divide by
them.  The package provides exact arithmetic over Q(sqrt5), criterion
verification with tight approximation factors, four allocation
procedures with runtime-checked guarantees, an exhaustive search oracle,
a corpus of known counterexample instances, and a JSON CLI.
"""

from .exact import (
    ONE,
    PHI,
    POS_INF,
    RATIONAL_BACKEND,
    SQRT5,
    ZERO,
    ExtendedValue,
    Value,
    is_finite,
    parse_value,
)
from .model import (
    CHORES,
    GOODS,
    Allocation,
    InputError,
    Instance,
    bundle_value,
    normalize_values,
    validate,
)
from .fairness import (
    Criterion,
    FairnessReport,
    PairDetail,
    verify,
    wefx_factor,
    xwef_factor,
)
from .algorithms import (
    ApproxTrace,
    GuaranteeViolation,
    PickTrace,
    approx_wefx,
    chore_round_robin,
    envy_cycle_weighted,
    envy_graph,
    greedy_balanced_partition,
    icyc_integer_wefx,
)
from .oracle import (
    BudgetExceededError,
    OracleResult,
    best_factor,
    exists_exact,
    weight_sweep,
)
from .corpus import CASE_IDS, GenConfig, KnownCase, case_info, get_case, random_instance

__version__ = "0.1.0"

__all__ = [
    "ONE",
    "PHI",
    "POS_INF",
    "RATIONAL_BACKEND",
    "SQRT5",
    "ZERO",
    "ExtendedValue",
    "Value",
    "is_finite",
    "parse_value",
    "CHORES",
    "GOODS",
    "Allocation",
    "InputError",
    "Instance",
    "bundle_value",
    "normalize_values",
    "validate",
    "Criterion",
    "FairnessReport",
    "PairDetail",
    "verify",
    "wefx_factor",
    "xwef_factor",
    "ApproxTrace",
    "GuaranteeViolation",
    "PickTrace",
    "approx_wefx",
    "chore_round_robin",
    "envy_cycle_weighted",
    "envy_graph",
    "greedy_balanced_partition",
    "icyc_integer_wefx",
    "BudgetExceededError",
    "OracleResult",
    "best_factor",
    "exists_exact",
    "weight_sweep",
    "CASE_IDS",
    "GenConfig",
    "KnownCase",
    "case_info",
    "get_case",
    "random_instance",
    "__version__",
]
