"""Data-aligned maximal-entropy histogram.

Bin boundaries only ever take values seen in the stream. Each datum opens a
temporary extra bin; one neighbouring pair is then merged, choosing the pair
whose merge keeps the histogram entropy highest.
"""

import logging

import numpy as np
from scipy.special import xlogy

from errors import DomainError
from histogram_tools import (
    Histogram,
    QuantileEstimator,
    check_datum,
    min_separation,
    quantile_from_histogram,
)

logger = logging.getLogger(__name__)

CRITERIA = ("discrete", "differential")


def insert_temporary_bin(h, d):
    """Returns ``h`` with a bin ending at ``d`` added (n+1 bins), total raised by 1.

    A datum equal to an existing boundary only bumps that bin's count. A datum
    inside bin j takes the fraction of c_j lying below it, plus itself.
    """
    d = check_datum(d)
    boundaries = h.boundaries
    counts = h.counts

    if h.bins == 0:
        return Histogram(d - min_separation(d), [d], [1.0], total=h.total + 1.0)

    if d <= h.lower_origin:
        origin = d - min_separation(d)
        return Histogram(
            origin,
            np.concatenate(([d], boundaries)),
            np.concatenate(([1.0], counts)),
            total=h.total + 1.0,
        )

    if d > boundaries[-1]:
        return Histogram(
            h.lower_origin,
            np.append(boundaries, d),
            np.append(counts, 1.0),
            total=h.total + 1.0,
        )

    j = int(np.searchsorted(boundaries, d, side="left"))
    if boundaries[j] == d:
        bumped = counts.copy()
        bumped[j] += 1.0
        return Histogram(h.lower_origin, boundaries, bumped, total=h.total + 1.0)

    lo = h.lower_origin if j == 0 else float(boundaries[j - 1])
    moved = float(counts[j]) * (d - lo) / (float(boundaries[j]) - lo)
    split = counts.copy()
    split[j] -= moved
    return Histogram(
        h.lower_origin,
        np.insert(boundaries, j, d),
        np.insert(split, j, moved + 1.0),
        total=h.total + 1.0,
    )


def merge_losses(counts, widths=None, criterion="discrete"):
    """Entropy lost by merging each neighbouring pair (k, k+1), up to a positive factor.

    With raw counts a, b and s = a + b the discrete loss is
    s ln s - a ln a - b ln b; the differential form divides each count by its
    bin width inside the logarithm.
    """
    c = np.asarray(counts, dtype=float)
    a, b = c[:-1], c[1:]
    s = a + b
    if criterion == "discrete":
        return xlogy(s, s) - xlogy(a, a) - xlogy(b, b)
    if criterion == "differential":
        w = np.asarray(widths, dtype=float)
        wa, wb = w[:-1], w[1:]
        return xlogy(s, s / (wa + wb)) - xlogy(a, a / wa) - xlogy(b, b / wb)
    raise DomainError(f"unknown merge criterion {criterion!r}; expected one of {CRITERIA}")


def density_widths(h):
    """Bin widths for the differential criterion.

    The first bin only spans one minimum separation below the smallest datum,
    so it takes its neighbour's width instead.
    """
    widths = h.widths.copy()
    if widths.size > 1:
        widths[0] = max(widths[0], widths[1])
    return widths


def choose_merge(counts, widths=None, criterion="discrete"):
    """1-based k such that merging bins k and k+1 leaves the highest entropy.

    Ties go to the smallest k.
    """
    c = np.asarray(counts, dtype=float)
    if c.size < 2:
        raise DomainError("choosing a merge needs at least two bins")
    if np.any(c < 0) or not np.any(c > 0):
        raise DomainError("counts must be non-negative with at least one positive")
    if criterion == "differential":
        if widths is None or np.asarray(widths).size != c.size or np.any(np.asarray(widths) <= 0):
            raise DomainError("differential criterion needs one positive width per bin")
    return int(np.argmin(merge_losses(c, widths, criterion))) + 1


def merge_bins(h, k):
    """Merges bins k and k+1 (1-based): boundary b_k disappears, counts add up."""
    k = int(k)
    if not 1 <= k < h.bins:
        raise DomainError(f"merge index {k} out of range 1..{h.bins - 1}")
    counts = h.counts.copy()
    counts[k] += counts[k - 1]
    return Histogram(
        h.lower_origin,
        np.delete(h.boundaries, k - 1),
        np.delete(counts, k - 1),
        total=h.total,
    )


class AlignedEstimator(QuantileEstimator):
    name = "aligned"

    def __init__(self, bin_budget, criterion="discrete"):
        if int(bin_budget) < 1:
            raise DomainError(f"bin budget must be positive, got {bin_budget!r}")
        if criterion not in CRITERIA:
            raise DomainError(f"unknown merge criterion {criterion!r}; expected one of {CRITERIA}")
        self.bin_budget = int(bin_budget)
        self.criterion = criterion
        self.hist = Histogram(0.0, [], [], total=0.0)
        self.merges = 0

    @property
    def warmup_size(self):
        return self.bin_budget

    @property
    def observations(self):
        return int(round(self.hist.total))

    def observe(self, datum):
        widened = insert_temporary_bin(self.hist, datum)
        if widened.bins > self.bin_budget:
            widths = density_widths(widened) if self.criterion == "differential" else None
            k = choose_merge(widened.counts, widths, self.criterion)
            widened = merge_bins(widened, k)
            self.merges += 1
        self.hist = widened
        return self

    def query(self, q):
        return quantile_from_histogram(self.hist, q)

    def state_size(self):
        return 1 + 2 * self.hist.bins
