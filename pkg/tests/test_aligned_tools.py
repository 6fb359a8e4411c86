import numpy as np
import pytest

from aligned_tools import (
    AlignedEstimator,
    choose_merge,
    density_widths,
    insert_temporary_bin,
    merge_bins,
    merge_losses,
)
from errors import DatumError, DomainError
from histogram_tools import Histogram, entropy_differential, entropy_discrete
from oracle_tools import exact_quantile


@pytest.fixture
def two_bins():
    return Histogram(0.0, [2.0, 4.0], [1.0, 1.0])


def seeded(hist, budget=None):
    est = AlignedEstimator(budget or hist.bins)
    est.hist = hist
    return est


def test_insert_splits_containing_bin(two_bins):
    h = insert_temporary_bin(two_bins, 3.0)
    assert h.boundaries.tolist() == [2.0, 3.0, 4.0]
    assert h.counts.tolist() == [1.0, 1.5, 0.5]
    assert h.total == 3.0


def test_insert_above_maximum_appends(two_bins):
    h = insert_temporary_bin(two_bins, 7.0)
    assert h.boundaries.tolist() == [2.0, 4.0, 7.0]
    assert h.counts.tolist() == [1.0, 1.0, 1.0]


def test_insert_on_boundary_bumps_count(two_bins):
    h = insert_temporary_bin(two_bins, 4.0)
    assert h.boundaries.tolist() == [2.0, 4.0]
    assert h.counts.tolist() == [1.0, 2.0]


def test_insert_below_origin_prepends(two_bins):
    h = insert_temporary_bin(two_bins, -1.0)
    assert h.boundaries.tolist() == [-1.0, 2.0, 4.0]
    assert h.counts.tolist() == [1.0, 1.0, 1.0]
    assert h.lower_origin < -1.0


@pytest.mark.parametrize(
    "counts, expected",
    [([1, 1, 4], 1), ([2, 2, 2], 1), ([1, 1.5, 0.5], 2)],
)
def test_choose_merge_examples(counts, expected):
    assert choose_merge(counts) == expected


def test_choose_merge_rejects_degenerate_input():
    with pytest.raises(DomainError):
        choose_merge([3])
    with pytest.raises(DomainError):
        choose_merge([0, 0, 0])
    with pytest.raises(DomainError):
        choose_merge([1, 1], criterion="differential")


def test_merge_bins_examples():
    h = merge_bins(Histogram(0.0, [2.0, 3.0, 4.0], [1.0, 1.5, 0.5]), 2)
    assert h.boundaries.tolist() == [2.0, 4.0]
    assert h.counts.tolist() == [1.0, 2.0]

    collapsed = merge_bins(Histogram(0.0, [1.0, 2.0], [1.0, 1.0]), 1)
    assert collapsed.boundaries.tolist() == [2.0]
    assert collapsed.counts.tolist() == [2.0]


@pytest.mark.parametrize("k", [0, 3, -1])
def test_merge_bins_index_out_of_range(k):
    with pytest.raises(DomainError):
        merge_bins(Histogram(0.0, [1.0, 2.0, 3.0], [1.0, 1.0, 1.0]), k)


def test_merge_conserves_total():
    h = Histogram(0.0, [1.0, 2.0, 5.0, 6.0], [0.5, 2.25, 3.0, 1.25])
    for k in range(1, h.bins):
        assert merge_bins(h, k).counts.sum() == pytest.approx(h.total)


def test_observe_composes_insert_choose_merge(two_bins):
    est = seeded(two_bins).observe(3.0)
    assert est.hist.boundaries.tolist() == [2.0, 4.0]
    assert est.hist.counts.tolist() == [1.0, 2.0]
    assert est.merges == 1


def test_monotone_stream_keeps_every_value():
    n = 6
    est = AlignedEstimator(n).observe_many(range(1, n + 1))
    assert est.hist.boundaries.tolist() == [float(v) for v in range(1, n + 1)]
    assert est.hist.counts.tolist() == [1.0] * n
    assert est.merges == 0


def test_query_examples():
    est = seeded(Histogram(0.0, [2.0, 4.0], [1.0, 2.0]))
    assert est.query(1 / 3) == pytest.approx(2.0)
    assert est.query(1.0) == 4.0
    equal = seeded(Histogram(0.0, [1.0, 2.0, 3.0, 4.0], [2.0] * 4))
    assert equal.query(0.5) == 2.0


def test_non_finite_datum_leaves_state_unchanged(two_bins):
    est = seeded(two_bins)
    with pytest.raises(DatumError):
        est.observe(float("inf"))
    assert est.hist is two_bins


def _brute_force_best(widened, criterion):
    widths = density_widths(widened)
    scores = []
    for k in range(1, widened.bins):
        merged = merge_bins(widened, k)
        if criterion == "discrete":
            scores.append(entropy_discrete(merged.counts))
        else:
            joined = np.concatenate((widths[: k - 1], [widths[k - 1] + widths[k]], widths[k + 1 :]))
            scores.append(entropy_differential(merged.counts, joined))
    return np.array(scores)


@pytest.mark.parametrize("criterion", ["discrete", "differential"])
def test_merge_choice_matches_full_entropy_scan(criterion):
    rng = np.random.default_rng(2024)
    est = AlignedEstimator(8, criterion=criterion)
    stream = np.concatenate([rng.lognormal(1.0, 0.8, 6000), rng.integers(1, 20, 4000).astype(float)])
    rng.shuffle(stream)
    for d in stream:
        widened = insert_temporary_bin(est.hist, d)
        est.observe(d)
        if widened.bins <= est.bin_budget:
            continue
        scores = _brute_force_best(widened, criterion)
        widths = density_widths(widened) if criterion == "differential" else None
        k = choose_merge(widened.counts, widths, criterion)
        assert scores[k - 1] >= scores.max() - 1e-9
        assert est.hist.boundaries.tolist() == merge_bins(widened, k).boundaries.tolist()


def test_merge_losses_match_entropy_differences():
    counts = np.array([3.0, 1.0, 0.5, 7.0, 2.0])
    total = counts.sum()
    losses = merge_losses(counts)
    base = entropy_discrete(counts)
    for k in range(1, counts.size):
        merged = merge_bins(Histogram(0.0, np.arange(1.0, 6.0), counts), k)
        drop = base - entropy_discrete(merged.counts)
        assert losses[k - 1] / total == pytest.approx(drop, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("repeats", [1, pytest.param(11, marks=pytest.mark.slow)])
def test_conservation_and_provenance_on_fuzzed_stream(repeats):
    rng = np.random.default_rng(99)
    stream = np.concatenate([
        np.concatenate([
            rng.lognormal(3.0 + block % 3, 1.2, 5000),
            rng.integers(-50, 50, 3000).astype(float),
            rng.normal(100.0 * (block + 1), 1.0, 2000),
        ])
        for block in range(repeats)
    ])
    seen = set()
    est = AlignedEstimator(12)
    for step, d in enumerate(stream, start=1):
        est.observe(d)
        seen.add(float(d))
        h = est.hist
        assert h.total == pytest.approx(step, rel=1e-9)
        assert h.counts.sum() == pytest.approx(step, rel=1e-9)
        assert h.bins <= 12
        assert np.all(np.diff(h.edges) > 0)
        assert set(h.boundaries.tolist()) <= seen
    assert est.state_size() == 1 + 2 * 12


def build_extremes_first(rng, distinct, duplicates):
    """Every new distinct value arrives as a new minimum or maximum; repeats go anywhere after."""
    values = np.sort(rng.choice(np.arange(1, 10_000), size=distinct, replace=False)).astype(float)
    lo = hi = int(rng.integers(0, distinct))
    order = [values[lo]]
    while lo > 0 or hi < distinct - 1:
        if hi == distinct - 1 or (lo > 0 and rng.random() < 0.5):
            lo -= 1
            order.append(values[lo])
        else:
            hi += 1
            order.append(values[hi])

    stream, seen = [order[0]], [order[0]]
    fresh, repeats = order[1:], duplicates
    while fresh or repeats:
        if repeats and (not fresh or rng.random() < 0.5):
            stream.append(seen[int(rng.integers(0, len(seen)))])
            repeats -= 1
        else:
            value = fresh.pop(0)
            seen.append(value)
            stream.append(value)
    return values, stream


def test_matches_oracle_at_rank_aligned_levels():
    rng = np.random.default_rng(7)
    for trial in range(40):
        distinct = int(rng.integers(1, 30))
        values, stream = build_extremes_first(rng, distinct, duplicates=int(rng.integers(0, 60)))
        est = AlignedEstimator(distinct + int(rng.integers(0, 3))).observe_many(stream)
        assert est.merges == 0

        ordered = np.sort(stream)
        total = len(stream)
        for v in values:
            rank = int(np.searchsorted(ordered, v, side="right"))
            q = rank / total
            assert est.query(q) == pytest.approx(exact_quantile(stream, q), rel=1e-9)


def test_interior_first_arrival_splits_by_width():
    stream = [1.0, 3.0, 2.0]
    est = AlignedEstimator(3).observe_many(stream)
    assert est.merges == 0
    assert est.hist.boundaries.tolist() == [1.0, 2.0, 3.0]
    assert est.hist.counts.tolist() == pytest.approx([1.0, 1.5, 0.5])
    assert est.query(2 / 3) == pytest.approx(5 / 3)
    assert exact_quantile(stream, 2 / 3) == 2.0


def test_differential_first_bin_borrows_neighbour_width():
    h = Histogram(1.0 - 1e-12, [1.0, 2.0, 3.0, 10.0, 11.0], [1.0] * 5)
    assert density_widths(h).tolist() == pytest.approx([1.0, 1.0, 1.0, 7.0, 1.0])
    assert choose_merge(h.counts, h.widths, "differential") == 1

    est = AlignedEstimator(4, criterion="differential").observe_many([1.0, 2.0, 3.0, 10.0, 11.0])
    assert est.merges == 1
    assert est.hist.boundaries.tolist() == [1.0, 2.0, 10.0, 11.0]
    assert est.hist.lower_origin < 1.0
