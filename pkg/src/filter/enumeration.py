"""
Best-first enumeration of subsets of independent Bernoulli items.

Item i is in the subset with log-probability log_in[i] and out with
log_out[i]. Subsets are produced in non-increasing total log weight, so the
k heaviest hypotheses of a prediction are found without listing all 2^n.
"""

import heapq
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.labels import Label, LabelSet


def k_best_subsets(
    labels: Sequence[Label],
    log_in: Sequence[float],
    log_out: Sequence[float],
    k: Optional[int] = None,
) -> List[Tuple[float, LabelSet]]:
    """
    Up to k (all when k is None) subsets with finite log weight, heaviest first.

    Returns:
        [(log weight, label set), ...]
    """
    labels = list(labels)
    log_in = np.asarray(log_in, dtype=float)
    log_out = np.asarray(log_out, dtype=float)
    n = len(labels)
    if k is not None and k < 1:
        return []

    include = log_in >= log_out
    base = float(np.sum(np.maximum(log_in, log_out)))
    if not np.isfinite(base):
        return []

    # Cost of flipping each item away from its preferred state.
    with np.errstate(invalid="ignore"):
        deltas = np.abs(log_in - log_out)
    order = np.argsort(deltas, kind="stable")
    d = deltas[order]

    def subset_of(flips: Tuple[int, ...]) -> LabelSet:
        chosen = include.copy()
        for pos in flips:
            item = order[pos]
            chosen[item] = not chosen[item]
        return LabelSet(label for label, keep in zip(labels, chosen) if keep)

    results = [(base, subset_of(()))]
    heap: List[Tuple[float, int, Tuple[int, ...]]] = []
    if n > 0 and np.isfinite(d[0]):
        heap.append((float(d[0]), 0, (0,)))

    while heap and (k is None or len(results) < k):
        cost, last, flips = heapq.heappop(heap)
        results.append((base - cost, subset_of(flips)))
        nxt = last + 1
        if nxt < n and np.isfinite(d[nxt]):
            heapq.heappush(heap, (cost + float(d[nxt]), nxt, flips + (nxt,)))
            heapq.heappush(heap, (cost - float(d[last]) + float(d[nxt]), nxt, flips[:-1] + (nxt,)))
    return results
