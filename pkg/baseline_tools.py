"""Comparison estimators: P2 markers, reservoir sampling, equispaced histogram."""

import logging
import math

import numpy as np

from errors import DomainError, NotWarmedUpError
from histogram_tools import Histogram, QuantileEstimator, check_datum, check_q, quantile_from_histogram
from oracle_tools import order_statistic_rank

logger = logging.getLogger(__name__)


class P2Estimator(QuantileEstimator):
    """Five-marker P2 tracker of a single quantile level.

    Marker heights approximate the levels 0, q/2, q, (1+q)/2 and 1. After each
    datum the three interior markers may move by one rank using the piecewise
    parabolic prediction, or linearly when the parabola would break ordering.
    """

    name = "p2"
    MARKERS = 5

    def __init__(self, q):
        self.q = check_q(q)
        self.markers = []
        self.marker_positions = [1, 2, 3, 4, 5]
        self.desired_positions = [1.0, 1.0 + 2 * self.q, 1.0 + 4 * self.q, 3.0 + 2 * self.q, 5.0]
        self.increments = [0.0, self.q / 2, self.q, (1.0 + self.q) / 2, 1.0]
        self.count = 0

    @property
    def warmup_size(self):
        return self.MARKERS

    @property
    def observations(self):
        return self.count

    def observe(self, datum):
        d = check_datum(datum)
        self.count += 1
        if self.count <= self.MARKERS:
            self.markers.append(d)
            if self.count == self.MARKERS:
                self.markers.sort()
            return self

        heights = self.markers
        if d < heights[0]:
            heights[0] = d
            cell = 0
        elif d >= heights[4]:
            heights[4] = d
            cell = 3
        else:
            cell = next(i for i in range(4) if heights[i] <= d < heights[i + 1])

        for i in range(cell + 1, self.MARKERS):
            self.marker_positions[i] += 1
        for i in range(self.MARKERS):
            self.desired_positions[i] += self.increments[i]
        self._adjust()
        return self

    def _adjust(self):
        heights, pos = self.markers, self.marker_positions
        for i in range(1, 4):
            drift = self.desired_positions[i] - pos[i]
            if (drift >= 1 and pos[i + 1] - pos[i] > 1) or (drift <= -1 and pos[i - 1] - pos[i] < -1):
                step = 1 if drift > 0 else -1
                candidate = self._parabolic(i, step)
                if not heights[i - 1] < candidate < heights[i + 1]:
                    candidate = heights[i] + step * (heights[i + step] - heights[i]) / (pos[i + step] - pos[i])
                heights[i] = candidate
                pos[i] += step

    def _parabolic(self, i, step):
        h, n = self.markers, self.marker_positions
        return h[i] + step / (n[i + 1] - n[i - 1]) * (
            (n[i] - n[i - 1] + step) * (h[i + 1] - h[i]) / (n[i + 1] - n[i])
            + (n[i + 1] - n[i] - step) * (h[i] - h[i - 1]) / (n[i] - n[i - 1])
        )

    def query(self, q=None):
        """Centre marker; P2 only tracks the level it was built for."""
        if q is not None and not math.isclose(check_q(q), self.q, rel_tol=0, abs_tol=1e-12):
            raise DomainError(f"P2 tracks q={self.q}, cannot answer q={q}")
        if self.count < self.MARKERS:
            raise NotWarmedUpError(self.MARKERS - self.count)
        return self.markers[2]

    def state_size(self):
        return 3 * self.MARKERS


class ReservoirEstimator(QuantileEstimator):
    """Uniform random sample of the stream (replacement rule of Algorithm R).

    The i-th item (i > n) replaces a uniformly chosen slot with probability n/i.
    Randomness comes from numpy's PCG64 generator seeded explicitly.
    """

    name = "reservoir"

    def __init__(self, size, seed=0):
        if int(size) < 1:
            raise DomainError(f"reservoir size must be positive, got {size!r}")
        self.size = int(size)
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.buffer = []
        self.seen = 0

    @property
    def warmup_size(self):
        return self.size

    @property
    def observations(self):
        return self.seen

    def observe(self, datum):
        d = check_datum(datum)
        self.seen += 1
        if len(self.buffer) < self.size:
            self.buffer.append(d)
            return self
        slot = int(self.rng.integers(0, self.seen))
        if slot < self.size:
            self.buffer[slot] = d
        return self

    def query(self, q):
        q = check_q(q)
        if not self.buffer:
            raise NotWarmedUpError(1, "reservoir is empty")
        ordered = sorted(self.buffer)
        return ordered[order_statistic_rank(q, len(ordered)) - 1]

    def state_size(self):
        return len(self.buffer)


class EquispacedEstimator(QuantileEstimator):
    """Fixed number of equal-width bins, rescaled to cover new extremes.

    The first n data are buffered to set the initial range
    [min(0, min data), max data]. A datum outside the range doubles the width,
    keeping range_low fixed when the datum is above and range_high fixed when it
    is below, until the datum is covered. Old counts are redistributed onto the
    new grid in proportion to bin overlap.
    """

    name = "equispaced"

    def __init__(self, bin_budget):
        if int(bin_budget) < 1:
            raise DomainError(f"bin budget must be positive, got {bin_budget!r}")
        self.bin_budget = int(bin_budget)
        self.range_low = None
        self.range_high = None
        self.counts = None
        self.total = 0.0
        self.rescales = 0
        self.warmup_buffer = []

    @property
    def warmup_size(self):
        return self.bin_budget

    @property
    def observations(self):
        if self.counts is None:
            return len(self.warmup_buffer)
        return int(round(self.total))

    @property
    def edges(self):
        return np.linspace(self.range_low, self.range_high, self.bin_budget + 1)

    def observe(self, datum):
        d = check_datum(datum)
        if self.counts is None:
            self.warmup_buffer.append(d)
            if len(self.warmup_buffer) == self.bin_budget:
                self._seed_from_buffer()
            return self
        if d > self.range_high or d < self.range_low:
            self._rescale(d)
        self._count(d)
        return self

    def _seed_from_buffer(self):
        low = min(0.0, min(self.warmup_buffer))
        high = max(self.warmup_buffer)
        if high <= low:
            high = low + 1.0
        self.range_low, self.range_high = low, high
        self.counts = np.zeros(self.bin_budget)
        for d in self.warmup_buffer:
            self._count(d)
        self.warmup_buffer = []

    def _count(self, d):
        j = int(np.searchsorted(self.edges[1:], d, side="left"))
        self.counts[min(j, self.bin_budget - 1)] += 1.0
        self.total += 1.0

    def _rescale(self, d):
        old_edges = self.edges
        low, high = self.range_low, self.range_high
        while d > high or d < low:
            span = high - low
            if d > high:
                high = low + 2.0 * span
            else:
                low = high - 2.0 * span
        cumulative = np.concatenate(([0.0], np.cumsum(self.counts)))
        self.range_low, self.range_high = low, high
        redistributed = np.diff(np.interp(self.edges, old_edges, cumulative))
        self.counts = np.clip(redistributed, 0.0, None)
        self.rescales += 1
        logger.debug("equispaced rescale #%d to [%g, %g] for datum %g", self.rescales, low, high, d)

    def histogram(self):
        if self.counts is None:
            raise NotWarmedUpError(self.bin_budget - len(self.warmup_buffer))
        return Histogram(self.range_low, self.edges[1:], self.counts, total=self.total)

    def query(self, q):
        return quantile_from_histogram(self.histogram(), q)

    def state_size(self):
        if self.counts is None:
            return len(self.warmup_buffer)
        return 2 + self.bin_budget
