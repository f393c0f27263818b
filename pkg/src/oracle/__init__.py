"""
Exhaustive set-integral oracle for small discrete instances.

The property suite behind the `selftest` command lives in
src.oracle.selftest and is imported on demand.
"""

from src.oracle.generators import (
    default_label_space,
    random_grid,
    random_grid_density,
    random_grid_dglmb,
    random_instance,
)
from src.oracle.instance import (
    MAX_ORACLE_LABELS,
    MAX_ORACLE_POINTS,
    DiscreteInstance,
    LabeledSetKey,
    OracleLimitError,
    OracleNormalizationError,
    cardinality,
    enumerate_sets,
    exact_bayes,
    from_dglmb,
    key_indices,
    key_labels,
    kld,
    phd,
    set_integral,
)

__all__ = [
    "MAX_ORACLE_LABELS",
    "MAX_ORACLE_POINTS",
    "DiscreteInstance",
    "LabeledSetKey",
    "OracleLimitError",
    "OracleNormalizationError",
    "cardinality",
    "enumerate_sets",
    "exact_bayes",
    "from_dglmb",
    "key_indices",
    "key_labels",
    "kld",
    "phd",
    "set_integral",
    "default_label_space",
    "random_grid",
    "random_grid_density",
    "random_grid_dglmb",
    "random_instance",
]
