"""Experiment configuration: defaults < environment < config file < command-line flags.

Config files are plain text::

    # 0.99-quantile sweep on a custom stream
    q = 0.99
    bins = 500, 100, 50, 25, 12
    estimators = aligned, p2
    source = custom
    seed = 7

    [segment]
    family = lognormal
    duration = 50000
    scale = 10
    spread = 0.5

    [spike]
    position = 20000
    multiplier = 10
"""

import logging
import os
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from errors import ConfigError
from router_tools import router
from stream_tools import StreamSpec, stream_spec_from_blocks

logger = logging.getLogger(__name__)

LIST_KEYS = {"bins", "estimators"}
BLOCK_NAMES = {"segment", "spike"}
ENV_KEYS = {"seed": "MAXENT_SEED", "stride": "MAXENT_STRIDE", "workers": "MAXENT_WORKERS"}
DEFAULT_ESTIMATORS = ["interpolated", "aligned", "p2", "reservoir", "equispaced"]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    q: float = 0.95
    bins: List[int] = [500]
    estimators: List[str] = DEFAULT_ESTIMATORS
    source: str = "spiky"
    column: Optional[str] = None
    seed: int = 0
    length: Optional[int] = None
    stride: int = 1
    workers: int = 1
    warmup_skip: Optional[int] = None
    criterion: str = "discrete"
    audit_stride: int = 10_000
    stream: Optional[StreamSpec] = None
    out_trace: Optional[Path] = Path("trace.csv")
    out_summary: Optional[Path] = Path("summary.csv")
    out_plot: Optional[Path] = None
    out_html: Optional[Path] = None
    out_pdf: Optional[Path] = None

    @field_validator("q")
    @classmethod
    def _q_in_range(cls, v):
        if not 0.0 < v <= 1.0:
            raise ValueError(f"q must lie in (0, 1], got {v}")
        return v

    @field_validator("bins")
    @classmethod
    def _bins_positive(cls, v):
        if not v:
            raise ValueError("at least one bin budget is required")
        if any(n < 1 for n in v):
            raise ValueError(f"bin budgets must be positive, got {v}")
        return v

    @field_validator("estimators")
    @classmethod
    def _known_estimators(cls, v):
        names = []
        for raw in v:
            name = router.resolve_estimator(raw)
            if name not in names:
                names.append(name)
        if not names:
            raise ValueError("at least one estimator is required")
        return names

    @field_validator("stride", "workers", "audit_stride")
    @classmethod
    def _at_least_one(cls, v):
        if v < 1:
            raise ValueError(f"must be at least 1, got {v}")
        return v

    @field_validator("criterion")
    @classmethod
    def _known_criterion(cls, v):
        if v not in ("discrete", "differential"):
            raise ValueError(f"criterion must be 'discrete' or 'differential', got {v!r}")
        return v

    @model_validator(mode="after")
    def _budgets_fit_estimators(self):
        if "interpolated" in self.estimators and min(self.bins) < 2:
            raise ValueError("the interpolated estimator needs bin budgets of at least 2")
        if self.warmup_skip is not None and self.warmup_skip < 0:
            raise ValueError("warmup_skip must be non-negative")
        if self.length is not None and self.length < 1:
            raise ValueError("length must be positive")
        return self

    @property
    def compared(self):
        """Estimators other than the oracle, which is always run as ground truth."""
        return [name for name in self.estimators if name != "oracle"]


def parse_config_text(text, origin="<config>"):
    """Splits config text into top-level keys and ``[segment]``/``[spike]`` blocks."""
    values, segments, spikes = {}, [], []
    current = values
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            block = line[1:-1].strip().lower()
            if block not in BLOCK_NAMES:
                raise ConfigError(f"{origin}:{line_no}: unknown block [{block}]")
            current = {}
            (segments if block == "segment" else spikes).append(current)
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{line_no}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_").lower()
        if current is values and key in LIST_KEYS:
            current[key] = [item.strip() for item in value.split(",") if item.strip()]
        else:
            current[key] = value
    return values, segments, spikes


def environment_defaults():
    values = {}
    for key, env in ENV_KEYS.items():
        raw = os.getenv(env)
        if raw not in (None, ""):
            values[key] = raw
    return values


def build_config(values, segments=(), spikes=()):
    values = dict(values)
    try:
        if segments:
            values["stream"] = stream_spec_from_blocks(
                values.get("length"), values.get("seed", 0), list(segments), list(spikes)
            )
            values.setdefault("source", "custom")
        elif spikes:
            raise ConfigError("[spike] blocks need at least one [segment] block")
        return ExperimentConfig(**values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(problems) from None


def load_config(path=None, overrides=None, defaults=None):
    """Layers defaults, environment, an optional config file and explicit overrides."""
    values = dict(defaults or {})
    values.update(environment_defaults())
    segments, spikes = [], []
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"{path}: {e.strerror or e}") from None
        file_values, segments, spikes = parse_config_text(text, origin=str(path))
        values.update(file_values)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    config = build_config(values, segments, spikes)
    logger.debug("resolved config: %s", config.model_dump(exclude={"stream"}))
    return config
