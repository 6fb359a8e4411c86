import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

SPIKE_FACTOR = 5.0
DUPLICATE_WARN_SHARE = 0.5


@dataclass
class StreamAudit:
    length: int
    issues: list = field(default_factory=list)
    spike_positions: list = field(default_factory=list)
    non_positive: int = 0
    duplicate_share: float = 0.0

    @property
    def passed(self):
        return not self.issues

    def report(self):
        if self.passed:
            return f" ✅  AUDIT PASSED ({self.length} values, no stream hazards found)."
        return " ❌  AUDIT FAILED:\n" + "\n".join(f"- {issue}" for issue in self.issues)


def check_structure(values):
    """Checks basic structure."""
    issues = []
    if values.size == 0:
        issues.append("CRITICAL: Stream is empty (0 values).")
    elif not np.all(np.isfinite(values)):
        issues.append(f"CRITICAL: Stream has {np.count_nonzero(~np.isfinite(values))} non-finite values.")
    return issues


def check_integrity(values, audit):
    """Duplicate-heavy streams squeeze interpolated bins together."""
    issues = []
    if values.size:
        audit.duplicate_share = 1.0 - np.unique(values).size / values.size
        if audit.duplicate_share >= DUPLICATE_WARN_SHARE:
            issues.append(
                f"DUPLICATES: {audit.duplicate_share:.1%} of values repeat an earlier value."
            )
    return issues


def check_validity(values, audit):
    """Non-positive values and arrivals far above the running maximum."""
    issues = []
    audit.non_positive = int(np.count_nonzero(values <= 0))
    if audit.non_positive:
        issues.append(
            f"NON-POSITIVE VALUES: {audit.non_positive} values are <= 0; "
            "zero truth steps drop out of the relative error."
        )

    if values.size > 1:
        previous_max = np.maximum.accumulate(values)[:-1]
        jumps = np.flatnonzero((previous_max > 0) & (values[1:] > SPIKE_FACTOR * previous_max)) + 1
        audit.spike_positions = jumps.tolist()
        if jumps.size:
            shown = ", ".join(str(p) for p in jumps[:5])
            issues.append(
                f"SPIKES: {jumps.size} values exceed {SPIKE_FACTOR:g}x the running maximum "
                f"(positions {shown}{', ...' if jumps.size > 5 else ''})."
            )

    if values.size > 10:
        q1, q3 = np.percentile(values, [25, 75])
        iqr = q3 - q1
        if iqr > 0:
            outliers = int(np.count_nonzero((values > q3 + 1.5 * iqr) | (values < q1 - 1.5 * iqr)))
            if outliers:
                issues.append(f"OUTLIERS: {outliers} values fall outside 1.5*IQR.")
    return issues


def run_all_checks(values):
    """Runs all stream checks and returns a StreamAudit."""
    values = np.asarray(values, dtype=float)
    audit = StreamAudit(length=int(values.size))
    audit.issues.extend(check_structure(values))
    if audit.issues:
        return audit
    audit.issues.extend(check_integrity(values, audit))
    audit.issues.extend(check_validity(values, audit))
    for issue in audit.issues:
        logger.info("audit: %s", issue)
    return audit
