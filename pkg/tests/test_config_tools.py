from pathlib import Path

import pytest

from aligned_tools import AlignedEstimator
from baseline_tools import EquispacedEstimator, P2Estimator, ReservoirEstimator
from config_tools import DEFAULT_ESTIMATORS, load_config, parse_config_text
from errors import ConfigError
from interpolated_tools import InterpolatedEstimator
from router_tools import router


def test_defaults():
    cfg = load_config()
    assert cfg.q == 0.95
    assert cfg.bins == [500]
    assert cfg.estimators == DEFAULT_ESTIMATORS
    assert cfg.stride == 1 and cfg.workers == 1
    assert cfg.out_trace == Path("trace.csv")


def test_file_then_flags(tmp_path, monkeypatch):
    monkeypatch.setenv("MAXENT_SEED", "11")
    monkeypatch.setenv("MAXENT_STRIDE", "4")
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# sweep\nq = 0.99\nbins = 500, 100, 12\nestimators = aligned, p-square\nstride = 2\n",
        encoding="utf-8",
    )
    cfg = load_config(path, overrides={"stride": 5, "q": None})
    assert cfg.q == 0.99
    assert cfg.bins == [500, 100, 12]
    assert cfg.estimators == ["aligned", "p2"]
    assert cfg.seed == 11
    assert cfg.stride == 5


def test_parse_blocks():
    values, segments, spikes = parse_config_text(
        "source = custom\n[segment]\nfamily = constant\nduration = 3\nscale = 2\n[spike]\nposition = 1\nmultiplier = 4\n"
    )
    assert values == {"source": "custom"}
    assert segments == [{"family": "constant", "duration": "3", "scale": "2"}]
    assert spikes == [{"position": "1", "multiplier": "4"}]


def test_custom_stream_from_file(tmp_path):
    path = tmp_path / "custom.cfg"
    path.write_text(
        "seed = 3\n[segment]\nfamily = uniform\nduration = 100\nscale = 5\nspread = 0.2\n"
        "[segment]\nfamily = constant\nduration = 50\nscale = 1\n",
        encoding="utf-8",
    )
    cfg = load_config(path)
    assert cfg.source == "custom"
    assert cfg.stream.length == 150
    assert cfg.stream.seed == 3


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("q = 1.5\n", "q must lie"),
        ("bins = 0\n", "positive"),
        ("stride = 0\n", "at least 1"),
        ("estimators = quicksort\n", "unknown estimator"),
        ("colour = blue\n", "colour"),
        ("bins = 1\nestimators = interpolated\n", "at least 2"),
        ("[window]\n", "unknown block"),
        ("q 0.5\n", "key = value"),
        ("[segment]\nfamily = gamma\nduration = 5\nscale = 1\n", "malformed stream block"),
        ("[spike]\nposition = 3\nmultiplier = 2\n", "need at least one [segment]"),
    ],
)
def test_invalid_configs(tmp_path, text, fragment):
    path = tmp_path / "bad.cfg"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        load_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_compared_excludes_oracle():
    cfg = load_config(overrides={"estimators": ["oracle", "aligned"]})
    assert cfg.compared == ["aligned"]


def test_router_aliases_and_fuzzy_match():
    assert router.resolve_estimator("Method2") == "aligned"
    assert router.resolve_estimator("interpolatd") == "interpolated"
    assert router.resolve_preset("heavy_tail_drift") == "heavy-tail-drift"
    assert router.is_preset("spikey")
    assert not router.is_preset("results/latency.csv")
    with pytest.raises(ConfigError):
        router.resolve_estimator("zzz")


def test_router_builds_each_estimator():
    built = {name: router.build_estimator(name, 10, 0.9, seed=1) for name in DEFAULT_ESTIMATORS}
    assert isinstance(built["interpolated"], InterpolatedEstimator)
    assert isinstance(built["aligned"], AlignedEstimator)
    assert isinstance(built["p2"], P2Estimator) and built["p2"].q == 0.9
    assert isinstance(built["reservoir"], ReservoirEstimator) and built["reservoir"].size == 10
    assert isinstance(built["equispaced"], EquispacedEstimator)
    with pytest.raises(ConfigError):
        router.build_estimator("oracle", 10, 0.9)
