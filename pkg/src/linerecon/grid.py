from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Grid:
    """Uniform closed grid ``start, start + step, ..., end`` with ``count`` nodes."""

    start: float
    end: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 2:
            raise DataError(f"grid needs at least 2 nodes, got {self.count}")
        if not (np.isfinite(self.start) and np.isfinite(self.end)):
            raise DataError("grid bounds must be finite")
        if not self.start < self.end:
            raise DataError(f"grid start {self.start} must be below end {self.end}")
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "end", float(self.end))
        object.__setattr__(self, "count", int(self.count))

    @property
    def step(self) -> float:
        return (self.end - self.start) / (self.count - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        x = np.linspace(self.start, self.end, self.count)
        x.flags.writeable = False
        return x

    def __len__(self):
        return self.count

    def contains(self, x, rtol=1e-12):
        slack = rtol * (self.end - self.start)
        return self.start - slack <= x <= self.end + slack
