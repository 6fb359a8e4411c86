"""Shared histogram state, CDF evaluation and the estimator contract.

A histogram here is ``lower_origin`` (the lower edge of bin 1) followed by
strictly increasing upper edges ``b1 < ... < bn`` with one non-negative, possibly
fractional count per bin. Bin j catches ``(b_{j-1}, b_j]`` and its mass is spread
uniformly over that interval, so the CDF is piecewise linear.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import xlogy
from scipy.stats import entropy

from errors import DatumError, DomainError, NotWarmedUpError, RangeError

logger = logging.getLogger(__name__)

COUNT_RTOL = 1e-9
SEPARATION_RTOL = 1e-12


def min_separation(value):
    """Smallest gap allowed above ``value`` between neighbouring edges."""
    return SEPARATION_RTOL * max(1.0, abs(value))


def enforce_increasing(lower_origin, boundaries):
    """Nudges edges upward until ``lower_origin < b1 < ... < bn`` holds strictly."""
    edges = np.asarray(boundaries, dtype=float).copy()
    if edges.size and edges[0] > lower_origin and (edges.size == 1 or np.all(np.diff(edges) > 0)):
        return edges
    previous = lower_origin
    for j in range(edges.size):
        floor = previous + min_separation(previous)
        if edges[j] < floor:
            edges[j] = floor
        previous = edges[j]
    return edges


def check_datum(datum):
    try:
        value = float(datum)
    except (TypeError, ValueError):
        raise DatumError(f"datum {datum!r} is not a real number") from None
    if not math.isfinite(value):
        raise DatumError(f"datum {datum!r} is not finite")
    return value


def check_q(q):
    try:
        value = float(q)
    except (TypeError, ValueError):
        raise DomainError(f"quantile level {q!r} is not a real number") from None
    if not (0.0 < value <= 1.0):
        raise DomainError(f"quantile level must lie in (0, 1], got {q!r}")
    return value


@dataclass(frozen=True, eq=False)
class Histogram:
    lower_origin: float
    boundaries: np.ndarray
    counts: np.ndarray
    total: float = field(default=None)

    def __post_init__(self):
        boundaries = np.array(self.boundaries, dtype=float)
        counts = np.array(self.counts, dtype=float)
        boundaries.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "lower_origin", float(self.lower_origin))
        object.__setattr__(self, "boundaries", boundaries)
        object.__setattr__(self, "counts", counts)
        if self.total is None:
            object.__setattr__(self, "total", float(counts.sum()))
        else:
            object.__setattr__(self, "total", float(self.total))

    @property
    def bins(self):
        return int(self.boundaries.size)

    @cached_property
    def cumulative(self):
        return np.cumsum(self.counts)

    @cached_property
    def edges(self):
        """``lower_origin`` followed by the upper boundaries."""
        return np.concatenate(([self.lower_origin], self.boundaries))

    @property
    def widths(self):
        return np.diff(self.edges)

    def validate(self):
        """Raises DomainError if any structural invariant is broken."""
        if self.boundaries.size != self.counts.size:
            raise DomainError(
                f"{self.boundaries.size} boundaries but {self.counts.size} counts"
            )
        if self.boundaries.size and not np.all(np.diff(self.edges) > 0):
            raise DomainError("bin boundaries must be strictly increasing")
        if np.any(self.counts < 0):
            raise DomainError("bin counts must be non-negative")
        if not math.isclose(float(self.counts.sum()), self.total, rel_tol=COUNT_RTOL, abs_tol=1e-12):
            raise DomainError(f"counts sum to {self.counts.sum()!r}, total is {self.total!r}")
        return self

    def __repr__(self):
        return (
            f"Histogram(lower_origin={self.lower_origin!r}, "
            f"boundaries={self.boundaries.tolist()!r}, counts={self.counts.tolist()!r}, "
            f"total={self.total!r})"
        )


def cdf_eval(h, x):
    """Piecewise-linear CDF of ``h`` at ``x``; exactly 0 at lower_origin and 1 at bn."""
    if h.bins == 0 or h.total <= 0:
        raise NotWarmedUpError(1, "histogram is empty")
    x = float(x)
    top = float(h.boundaries[-1])
    if x < h.lower_origin:
        raise RangeError(f"x={x!r} lies below lower_origin={h.lower_origin!r}", side="below")
    if x > top:
        raise RangeError(f"x={x!r} lies above the last boundary {top!r}", side="above")
    if x == h.lower_origin:
        return 0.0
    if x == top:
        return 1.0

    j = int(np.searchsorted(h.boundaries, x, side="left"))
    lo = h.lower_origin if j == 0 else float(h.boundaries[j - 1])
    before = float(h.cumulative[j - 1]) if j else 0.0
    fraction = (x - lo) / (float(h.boundaries[j]) - lo)
    value = (before + float(h.counts[j]) * fraction) / h.total
    return min(1.0, max(0.0, value))


def quantile_from_histogram(h, q):
    """Smallest x with cdf_eval(h, x) = q, interpolating inside the crossing bin."""
    q = check_q(q)
    if h.bins == 0 or h.total <= 0:
        raise NotWarmedUpError(1, "histogram is empty")
    if q == 1.0:
        return float(h.boundaries[-1])

    target = q * h.total
    j = min(int(np.searchsorted(h.cumulative, target, side="left")), h.bins - 1)
    lo = h.lower_origin if j == 0 else float(h.boundaries[j - 1])
    hi = float(h.boundaries[j])
    count = float(h.counts[j])
    if count <= 0:
        return hi
    fraction = (target - (float(h.cumulative[j - 1]) if j else 0.0)) / count
    if fraction >= 1.0:
        return hi
    if fraction <= 0.0:
        return lo
    return lo + fraction * (hi - lo)


def _probabilities(counts):
    values = np.asarray(counts, dtype=float)
    if values.size == 0:
        raise DomainError("entropy of an empty count vector is undefined")
    if np.any(~np.isfinite(values)) or np.any(values < 0):
        raise DomainError("counts must be finite and non-negative")
    total = values.sum()
    if total <= 0:
        raise DomainError("entropy needs at least one positive count")
    return values / total


def entropy_discrete(counts):
    """Shannon entropy (nats) of the bin probabilities, with 0 ln 0 = 0."""
    return float(entropy(_probabilities(counts)))


def entropy_differential(counts, widths):
    """Entropy (nats) of the piecewise-uniform density the histogram describes."""
    p = _probabilities(counts)
    w = np.asarray(widths, dtype=float)
    if w.shape != p.shape or np.any(w <= 0):
        raise DomainError("one strictly positive width is needed per bin")
    return float(-np.sum(xlogy(p, p / w)))


class QuantileEstimator(ABC):
    """Contract shared by every streaming estimator.

    Instances are single-writer: ``observe`` calls must be serialized by the caller.
    """

    name = "estimator"

    @property
    @abstractmethod
    def warmup_size(self):
        """Observations needed before ``query`` is guaranteed to answer."""

    @property
    @abstractmethod
    def observations(self):
        ...

    @abstractmethod
    def observe(self, datum):
        """Consumes one datum and returns ``self``."""

    @abstractmethod
    def query(self, q):
        ...

    @abstractmethod
    def state_size(self):
        """Number of stored reals; bounded by a function of the budget only."""

    def observe_many(self, data):
        for datum in data:
            self.observe(datum)
        return self

    def __repr__(self):
        return f"{type(self).__name__}(observations={self.observations})"
