"""Equiprobable histogram readjusted after every datum by inverting the updated CDF."""

import logging

import numpy as np

from errors import DomainError, NotWarmedUpError
from histogram_tools import (
    Histogram,
    QuantileEstimator,
    check_datum,
    enforce_increasing,
    quantile_from_histogram,
)

logger = logging.getLogger(__name__)


def stepped_cdf_knots(h, datum):
    """Knots of the CDF after ``datum`` arrives but before the bins move.

    The old CDF is scaled by i/(i+1) and a jump of 1/(i+1) is placed at the datum.
    The jump shows up as two knots sharing the datum's abscissa. ``h`` must
    already cover the datum.
    """
    i = h.total
    scale = i / (i + 1.0)
    jump = 1.0 / (i + 1.0)
    xs = h.edges
    levels = np.concatenate(([0.0], h.cumulative / i)) * scale

    pos = int(np.searchsorted(xs, datum, side="left"))
    before = 0.0 if pos == 0 else float(np.interp(datum, xs, levels))
    knot_x = np.concatenate((xs[:pos], [datum, datum], xs[pos:]))
    knot_y = np.concatenate((levels[:pos], [before, before + jump], levels[pos:] + jump))

    keep = np.ones(knot_x.size, dtype=bool)
    keep[1:] = (np.diff(knot_x) != 0) | (np.diff(knot_y) != 0)
    return knot_x[keep], knot_y[keep]


class InterpolatedEstimator(QuantileEstimator):
    """Keeps ``bin_budget`` equiprobable bins (each holding total/n observations).

    The first n data are buffered; sorted, they give n-1 equal bins with the
    minimum as lower origin. The next datum re-bins onto exactly n bins.
    """

    name = "interpolated"

    def __init__(self, bin_budget):
        if int(bin_budget) < 2:
            raise DomainError(f"interpolated bins need a budget of at least 2, got {bin_budget!r}")
        self.bin_budget = int(bin_budget)
        self.hist = None
        self.warmup_buffer = []

    @property
    def warmup_size(self):
        return self.bin_budget

    @property
    def observations(self):
        if self.hist is None:
            return len(self.warmup_buffer)
        return int(round(self.hist.total))

    def observe(self, datum):
        d = check_datum(datum)
        if self.hist is None:
            self.warmup_buffer.append(d)
            if len(self.warmup_buffer) == self.bin_budget:
                self._seed_from_buffer()
            return self
        self.hist = self._readjust(self.hist, d)
        return self

    def _seed_from_buffer(self):
        data = sorted(self.warmup_buffer)
        origin = data[0]
        boundaries = enforce_increasing(origin, data[1:])
        share = len(data) / boundaries.size
        self.hist = Histogram(origin, boundaries, [share] * boundaries.size, total=len(data))
        self.warmup_buffer = []
        logger.debug("interpolated warm-up complete: %s", self.hist)

    def _readjust(self, h, d):
        origin = min(h.lower_origin, d)
        boundaries = h.boundaries
        if d > boundaries[-1]:
            boundaries = boundaries.copy()
            boundaries[-1] = d
        if origin != h.lower_origin or boundaries is not h.boundaries:
            h = Histogram(origin, boundaries, h.counts, total=h.total)

        knot_x, knot_y = stepped_cdf_knots(h, d)
        n = self.bin_budget
        targets = np.arange(1, n + 1, dtype=float) / n
        new_boundaries = np.interp(targets, knot_y, knot_x)
        new_boundaries[-1] = knot_x[-1]
        new_boundaries = enforce_increasing(origin, new_boundaries)

        total = h.total + 1.0
        return Histogram(origin, new_boundaries, np.full(n, total / n), total=total)

    def query(self, q):
        if self.hist is None:
            raise NotWarmedUpError(self.bin_budget - len(self.warmup_buffer))
        return quantile_from_histogram(self.hist, q)

    def state_size(self):
        if self.hist is None:
            return len(self.warmup_buffer)
        return 1 + 2 * self.hist.bins
