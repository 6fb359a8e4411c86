import pytest

from config_tools import load_config


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("MAXENT_SEED", "MAXENT_STRIDE", "MAXENT_WORKERS", "MAXENT_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def make_config(tmp_path):
    """Config with outputs under tmp_path; keyword overrides win."""

    def build(**overrides):
        values = {
            "source": "spiky",
            "length": 3000,
            "bins": [20],
            "out_trace": tmp_path / "trace.csv",
            "out_summary": tmp_path / "summary.csv",
        }
        values.update(overrides)
        return load_config(overrides=values)

    return build
