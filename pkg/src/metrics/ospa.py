"""
Positional OSPA distance.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist


class OspaParams(BaseModel):
    """Cut-off c (m) and order p"""

    model_config = ConfigDict(frozen=True)

    c: float = Field(50.0, gt=0)
    p: float = Field(1.0, ge=1)


def _as_points(points) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return np.zeros((0, 2))
    return np.atleast_2d(points)


def ospa(estimates, truth, params: OspaParams = OspaParams()) -> float:
    """
    OSPA between two finite sets of 2-D positions, in [0, c].

    The optimal assignment is solved exactly on the min(d, c)^p cost matrix.
    """
    x, y = _as_points(estimates), _as_points(truth)
    m, n = x.shape[0], y.shape[0]
    if m > n:
        x, y, m, n = y, x, n, m
    if n == 0:
        return 0.0
    if m == 0:
        return float(params.c)

    cost = np.minimum(cdist(x, y), params.c) ** params.p
    rows, cols = linear_sum_assignment(cost)
    total = cost[rows, cols].sum() + params.c**params.p * (n - m)
    return float(min(params.c, (total / n) ** (1.0 / params.p)))
