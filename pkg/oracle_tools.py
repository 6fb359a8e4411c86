"""Exact ground-truth quantiles and the two error metrics used to score estimators."""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sortedcontainers import SortedList

from errors import DomainError, NotWarmedUpError
from histogram_tools import check_datum, check_q

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-9


def order_statistic_rank(q, size):
    """1-based rank ceil(q * size), robust to products like 0.3 * 10 = 3.0000000000000004."""
    if size <= 0:
        raise DomainError("rank of an empty set is undefined")
    return min(size, max(1, math.ceil(q * size - RANK_TOLERANCE)))


def exact_quantile(data, q):
    """The ceil(q*|D|)-th smallest element of ``data``."""
    q = check_q(q)
    ordered = sorted(data)
    if not ordered:
        raise DomainError("exact quantile of an empty set is undefined")
    return ordered[order_statistic_rank(q, len(ordered)) - 1]


class ExactOracle:
    """Retains every observation in a sorted list; exact but O(stream length) memory."""

    name = "oracle"

    def __init__(self):
        self.retained = SortedList()

    @property
    def observations(self):
        return len(self.retained)

    def observe(self, datum):
        self.retained.add(check_datum(datum))
        return self

    def query(self, q):
        q = check_q(q)
        if not self.retained:
            raise NotWarmedUpError(1, "oracle has seen no data")
        return self.retained[order_statistic_rank(q, len(self.retained)) - 1]


@dataclass
class ErrorSummary:
    mean_relative_error: float
    max_absolute_error: float
    per_step_errors: np.ndarray = field(repr=False)
    scored_steps: int = 0
    zero_truth_excluded: int = 0
    missing_estimates: int = 0

    @property
    def mean_relative_error_pct(self):
        return 100.0 * self.mean_relative_error


def compute_errors(truth, estimate, warmup_skip=0):
    """Scores an estimate series against the truth, ignoring the first ``warmup_skip`` entries.

    Truth values of zero are left out of the relative mean and tallied;
    missing (None/NaN) estimates are left out of both metrics and tallied.
    """
    t = np.asarray(truth, dtype=float)
    e = np.asarray([np.nan if v is None else v for v in estimate], dtype=float)
    if t.shape != e.shape:
        raise DomainError(f"truth has {t.size} entries but estimate has {e.size}")
    if warmup_skip < 0:
        raise DomainError("warmup_skip must be non-negative")

    t, e = t[warmup_skip:], e[warmup_skip:]
    present = ~np.isnan(e)
    missing = int(np.count_nonzero(~present))
    absolute = np.abs(e - t)
    scored = absolute[present]
    if scored.size == 0:
        raise DomainError("no estimates left to score after the warm-up skip")

    nonzero = present & (t != 0)
    excluded = int(np.count_nonzero(present & (t == 0)))
    if excluded:
        logger.warning("%d zero-valued truth step(s) excluded from the relative error", excluded)
    relative = absolute[nonzero] / np.abs(t[nonzero])
    mean_relative = float(relative.mean()) if relative.size else math.nan

    return ErrorSummary(
        mean_relative_error=mean_relative,
        max_absolute_error=float(scored.max()),
        per_step_errors=absolute,
        scored_steps=int(scored.size),
        zero_truth_excluded=excluded,
        missing_estimates=missing,
    )
