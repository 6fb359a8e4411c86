import numpy as np
import pytest

from audit_tools import run_all_checks
from errors import ConfigError, IngestError
from stream_tools import (
    Segment,
    Spike,
    StreamSpec,
    dump_stream_spec,
    generate,
    ingest_file,
    preset_streams,
    read_series,
    resize_stream_spec,
)


def spec_of(*segments, spikes=(), seed=0):
    return StreamSpec(
        length=sum(s.duration for s in segments), seed=seed, segments=list(segments), spikes=list(spikes)
    )


def test_constant_segment():
    values = generate(spec_of(Segment(family="constant", duration=4, scale=5.0)))
    assert values.tolist() == [5.0, 5.0, 5.0, 5.0]


def test_same_seed_same_stream():
    spec = spec_of(
        Segment(family="lognormal", duration=500, scale=10.0, spread=0.7),
        Segment(family="uniform", duration=500, scale=3.0, spread=0.5, end_scale=6.0),
        seed=42,
    )
    first, second = generate(spec), generate(spec)
    assert first.tobytes() == second.tobytes()
    other = generate(spec.model_copy(update={"seed": 43}))
    assert not np.array_equal(first, other)


def test_spike_is_multiple_of_running_max():
    spec = spec_of(
        Segment(family="uniform", duration=200, scale=10.0, spread=0.5),
        spikes=[Spike(position=50, multiplier=10.0), Spike(position=120, multiplier=3.0)],
        seed=1,
    )
    values = generate(spec)
    assert values[50] == 10.0 * values[:50].max()
    assert values[120] == 3.0 * values[:120].max()


def test_uniform_and_lognormal_stay_positive():
    spec = spec_of(
        Segment(family="uniform", duration=1000, scale=1.0, spread=0.99),
        Segment(family="lognormal", duration=1000, scale=1.0, spread=2.0),
        seed=3,
    )
    assert np.all(generate(spec) > 0)


@pytest.mark.parametrize(
    "segment, fragment",
    [
        (dict(family="constant", duration=0, scale=1.0), "segment 2 (constant): duration"),
        (dict(family="uniform", duration=5, scale=-1.0), "segment 2 (uniform): scale"),
        (dict(family="uniform", duration=5, scale=1.0, spread=1.5), "segment 2 (uniform): uniform spread"),
        (dict(family="lognormal", duration=5, scale=1.0, spread=-0.1), "segment 2 (lognormal)"),
        (dict(family="uniform", duration=5, scale=1.0, step=0.0), "segment 2 (uniform): step"),
    ],
)
def test_bad_segment_named_in_error(segment, fragment):
    good = Segment(family="constant", duration=5, scale=1.0)
    bad = Segment(**segment)
    spec = StreamSpec(length=5 + bad.duration, segments=[good, bad])
    with pytest.raises(ConfigError) as info:
        generate(spec)
    assert fragment in str(info.value)
    assert info.value.segment == 2


def test_step_rounds_up_to_grid():
    values = generate(spec_of(Segment(family="uniform", duration=2000, scale=10.0, spread=0.9, step=0.5), seed=3))
    assert np.all(values > 0)
    assert np.all(values * 2 == np.round(values * 2))
    assert values.min() >= 1.0 and values.max() <= 19.0


def test_durations_must_sum_to_length():
    spec = StreamSpec(length=10, segments=[Segment(family="constant", duration=4, scale=1.0)])
    with pytest.raises(ConfigError, match="sum to 4"):
        generate(spec)


def test_spike_position_checked():
    spec = spec_of(Segment(family="constant", duration=10, scale=1.0), spikes=[Spike(position=0, multiplier=2.0)])
    with pytest.raises(ConfigError, match="spike 1"):
        generate(spec)


def test_presets_are_built_for_their_failure_modes():
    presets = preset_streams()
    assert set(presets) == {"spiky", "shifting", "heavy-tail-drift"}
    assert all(spec.length >= 100_000 for spec in presets.values())
    assert len(presets["spiky"].spikes) >= 3
    scales = [seg.scale for seg in presets["shifting"].segments]
    assert any(later < earlier / 4 for earlier, later in zip(scales, scales[1:]))


def test_shifting_quantile_walks_down_while_opening_loses_share():
    from oracle_tools import exact_quantile

    values = generate(preset_streams()["shifting"])
    early = exact_quantile(values[:5_000], 0.99)
    late = exact_quantile(values, 0.99)
    assert late < 0.7 * early
    assert values[2_000] == 40.0 * values[:2_000].max()
    assert late < values.max() / 50


def test_heavy_tail_drift_is_counts_under_a_fixed_ceiling():
    values = generate(preset_streams()["heavy-tail-drift"])
    assert np.all(values == np.round(values))
    assert values.min() >= 1.0
    assert values[:40_000].max() == values.max() == 72.0
    assert values[40_000:].max() <= 12.0
    assert np.unique(values[:40_000]).size == 64


def test_resized_preset_keeps_shape():
    spec = resize_stream_spec(preset_streams(seed=4)["spiky"], 12_000)
    assert spec.length == 12_000
    assert sum(seg.duration for seg in spec.segments) == 12_000
    assert len(spec.spikes) == 4
    values = generate(spec)
    assert values.size == 12_000 and np.all(values > 0)


def test_dump_round_trips_through_config(tmp_path):
    from config_tools import load_config

    spec = preset_streams(seed=9)["heavy-tail-drift"]
    path = tmp_path / "drift.cfg"
    path.write_text(dump_stream_spec(spec) + "q = 0.99\n", encoding="utf-8")
    cfg = load_config(path)
    assert cfg.source == "custom"
    assert generate(cfg.stream).tobytes() == generate(spec).tobytes()


def test_ingest_plain_lines(tmp_path):
    path = tmp_path / "series.txt"
    path.write_text("1\n2\n3\n", encoding="utf-8")
    assert read_series(path) == [1.0, 2.0, 3.0]


def test_ingest_skips_header(tmp_path):
    path = tmp_path / "series.csv"
    path.write_text("value\n1\n", encoding="utf-8")
    assert read_series(path) == [1.0]


def test_ingest_selects_column(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("index,datum,truth\n1,4.5,4.5\n2,1.5,3.0\n", encoding="utf-8")
    assert read_series(path, column="truth") == [4.5, 3.0]
    with pytest.raises(IngestError, match="column 'nope'"):
        read_series(path, column="nope")


def test_ingest_reports_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1\nx\n", encoding="utf-8")
    with pytest.raises(IngestError) as info:
        read_series(path)
    assert info.value.line == 2
    assert str(info.value).startswith(f"{path}:2:")


def test_ingest_empty_and_missing(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(IngestError, match="no data"):
        read_series(empty)
    with pytest.raises(IngestError):
        read_series(tmp_path / "missing.txt")


def test_ingest_is_lazy(tmp_path):
    path = tmp_path / "series.txt"
    path.write_text("1\n2\nboom\n", encoding="utf-8")
    values = ingest_file(path)
    assert next(values) == 1.0
    assert next(values) == 2.0
    with pytest.raises(IngestError):
        next(values)


def test_audit_flags_spikes_and_non_positive():
    values = np.concatenate([np.full(100, 2.0), [50.0], np.full(50, 3.0), [0.0, -1.0]])
    audit = run_all_checks(values)
    assert not audit.passed
    assert audit.spike_positions == [100]
    assert audit.non_positive == 2
    assert "SPIKES" in audit.report()


def test_audit_passes_clean_stream():
    rng = np.random.default_rng(0)
    audit = run_all_checks(rng.uniform(1.0, 2.0, 1000))
    assert audit.passed
    assert "AUDIT PASSED" in audit.report()
