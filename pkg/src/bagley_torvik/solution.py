"""Evaluated solution curves exchanged between the solvers and the CLI."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np


class Method(str, enum.Enum):
    ClosedForm = "ClosedForm"
    PodlubnySeries = "PodlubnySeries"
    AroraSeries = "AroraSeries"
    FiniteDifference = "FiniteDifference"
    AsymptoticSmallT = "AsymptoticSmallT"
    AsymptoticLargeT = "AsymptoticLargeT"


@dataclass
class SolutionSeries:
    """A solution sampled on a strictly increasing grid.

    Points where the method failed carry NaN values and are listed in
    ``failures`` as ``(t, reason)`` pairs.
    """

    method: Method
    t: np.ndarray
    y: np.ndarray
    yc: np.ndarray
    yf: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0
    failures: List[tuple] = field(default_factory=list)

    def __post_init__(self):
        self.method = Method(self.method)
        self.t = np.asarray(self.t, dtype=float)
        for name in ("y", "yc", "yf"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.t.ndim != 1 or np.any(np.diff(self.t) <= 0):
            raise ValueError("t must be strictly increasing")
        if not (self.y.shape == self.yc.shape == self.yf.shape == self.t.shape):
            raise ValueError("y, yc, yf must match t in shape")

    @property
    def points(self):
        return list(zip(self.t.tolist(), self.y.tolist(), self.yc.tolist(), self.yf.tolist()))

    def __len__(self):
        return self.t.size
