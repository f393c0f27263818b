"""
Labels, label sets, labeled states and set predicates
"""

from src.core.labels import (
    AMPLITUDE_INDEX,
    EMPTY_LABEL_SET,
    KINEMATIC_DIM,
    Label,
    LabelError,
    LabelSet,
    LabeledState,
    distinct_label_indicator,
    inclusion,
)

__all__ = [
    "AMPLITUDE_INDEX",
    "EMPTY_LABEL_SET",
    "KINEMATIC_DIM",
    "Label",
    "LabelError",
    "LabelSet",
    "LabeledState",
    "distinct_label_indicator",
    "inclusion",
]
