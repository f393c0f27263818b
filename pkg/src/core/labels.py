"""
Foundational label / state types.

A label is the (birth time, index) pair that identifies a track. Label sets
iterate in canonical order so every enumeration over them (subsets, joint
samples, CSV rows) is deterministic.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Tuple

import numpy as np

# [p_x, v_x, p_y, v_y, amplitude modulus]
KINEMATIC_DIM = 5
AMPLITUDE_INDEX = 4


class LabelError(Exception):
    """Raised when a label, label set or labeled state is malformed"""
    pass


@dataclass(frozen=True, order=True)
class Label:
    """Track label: time step of birth and index among that step's births"""

    birth_time: int
    index: int

    def __post_init__(self):
        if int(self.birth_time) != self.birth_time or self.birth_time < 0:
            raise LabelError(f"birth_time must be a non-negative integer, got {self.birth_time}")
        if int(self.index) != self.index or self.index < 0:
            raise LabelError(f"index must be a non-negative integer, got {self.index}")

    def __repr__(self) -> str:
        return f"Label({self.birth_time},{self.index})"


class LabelSet:
    """
    Finite set of labels with canonical (sorted) iteration order.

    Hashable and immutable, so it can key component maps. Label sets are
    ordered by size first, then lexicographically on their sorted labels.
    """

    __slots__ = ("_labels",)

    def __init__(self, labels: Iterable[Label] = ()):
        labels = tuple(labels)
        for label in labels:
            if not isinstance(label, Label):
                raise LabelError(f"LabelSet accepts Label values only, got {label!r}")
        object.__setattr__(self, "_labels", tuple(sorted(set(labels))))

    def __setattr__(self, name, value):
        raise AttributeError("LabelSet is immutable")

    @property
    def labels(self) -> Tuple[Label, ...]:
        return self._labels

    def __iter__(self) -> Iterator[Label]:
        return iter(self._labels)

    def __len__(self) -> int:
        return len(self._labels)

    def __contains__(self, label: object) -> bool:
        return label in self._labels

    def __getitem__(self, i: int) -> Label:
        return self._labels[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelSet):
            return NotImplemented
        return self._labels == other._labels

    def __hash__(self) -> int:
        return hash(self._labels)

    def sort_key(self) -> Tuple[int, Tuple[Label, ...]]:
        return (len(self._labels), self._labels)

    def __lt__(self, other: "LabelSet") -> bool:
        return self.sort_key() < other.sort_key()

    def __le__(self, other: "LabelSet") -> bool:
        return self.sort_key() <= other.sort_key()

    def union(self, other: Iterable[Label]) -> "LabelSet":
        return LabelSet(self._labels + tuple(other))

    def difference(self, other: Iterable[Label]) -> "LabelSet":
        excluded = set(other)
        return LabelSet(label for label in self._labels if label not in excluded)

    def issubset(self, other: Iterable[Label]) -> bool:
        return set(self._labels).issubset(set(other))

    def subsets(self) -> Iterator["LabelSet"]:
        """All subsets, by increasing size then canonical order"""
        for size in range(len(self._labels) + 1):
            for combo in combinations(self._labels, size):
                yield LabelSet(combo)

    def __repr__(self) -> str:
        inner = ", ".join(f"({l.birth_time},{l.index})" for l in self._labels)
        return f"LabelSet{{{inner}}}"


EMPTY_LABEL_SET = LabelSet()


@dataclass(frozen=True, eq=False)
class LabeledState:
    """Kinematic vector [p_x, v_x, p_y, v_y, zeta] paired with its track label"""

    kinematic: np.ndarray
    label: Label

    def __post_init__(self):
        kinematic = np.array(self.kinematic, dtype=float).reshape(-1)
        if kinematic.shape != (KINEMATIC_DIM,):
            raise LabelError(
                f"kinematic must have dimension {KINEMATIC_DIM}, got shape {kinematic.shape}"
            )
        if kinematic[AMPLITUDE_INDEX] < 0:
            raise LabelError(f"amplitude modulus must be >= 0, got {kinematic[AMPLITUDE_INDEX]}")
        kinematic.setflags(write=False)
        object.__setattr__(self, "kinematic", kinematic)
        if not isinstance(self.label, Label):
            raise LabelError(f"label must be a Label, got {self.label!r}")

    @property
    def position(self) -> np.ndarray:
        return self.kinematic[[0, 2]]

    @property
    def amplitude(self) -> float:
        return float(self.kinematic[AMPLITUDE_INDEX])


def distinct_label_indicator(states: Iterable[LabeledState]) -> int:
    """1 iff every state in the collection carries a different label"""
    states = list(states)
    return int(len(states) == len({s.label for s in states}))


def inclusion(value: Label, labels: Iterable[Label]) -> int:
    """Generalized inclusion 1_Y(x) for a single label"""
    return int(value in set(labels))
