"""Stream sources: seeded synthetic non-stationary generators and file ingest.

Synthetic streams are a program of segments (constant, uniform or log-normal
around a scale that may drift linearly, optionally rounded up to a grid such as
whole counts) plus spikes that emit a multiple of the running maximum.
Randomness comes from numpy's PCG64 generator (``numpy.random.default_rng(seed)``),
drawn segment by segment in order, so a seed fixes the stream bit for bit.
"""

import logging
import math
from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from errors import ConfigError, IngestError

logger = logging.getLogger(__name__)

FAMILIES = ("constant", "uniform", "lognormal")


class Segment(BaseModel):
    family: Literal["constant", "uniform", "lognormal"]
    duration: int
    scale: float
    spread: float = 0.0
    end_scale: Optional[float] = None
    step: Optional[float] = None


class Spike(BaseModel):
    position: int
    multiplier: float


class StreamSpec(BaseModel):
    length: int
    seed: int = 0
    segments: List[Segment]
    spikes: List[Spike] = Field(default_factory=list)


def validate_stream_spec(spec):
    """Raises ConfigError naming the first offending segment or spike (1-based)."""
    if spec.length <= 0:
        raise ConfigError(f"stream length must be positive, got {spec.length}")
    if not spec.segments:
        raise ConfigError("stream needs at least one segment")
    for number, seg in enumerate(spec.segments, start=1):
        where = f"segment {number} ({seg.family})"
        if seg.duration <= 0:
            raise ConfigError(f"{where}: duration must be positive, got {seg.duration}", segment=number)
        if not (math.isfinite(seg.scale) and seg.scale > 0):
            raise ConfigError(f"{where}: scale must be positive, got {seg.scale}", segment=number)
        if seg.end_scale is not None and not (math.isfinite(seg.end_scale) and seg.end_scale > 0):
            raise ConfigError(f"{where}: end_scale must be positive, got {seg.end_scale}", segment=number)
        if seg.family == "uniform" and not 0 <= seg.spread < 1:
            raise ConfigError(f"{where}: uniform spread must lie in [0, 1), got {seg.spread}", segment=number)
        if seg.family == "lognormal" and not (math.isfinite(seg.spread) and seg.spread >= 0):
            raise ConfigError(f"{where}: log-normal spread must be non-negative, got {seg.spread}", segment=number)
        if seg.step is not None and not (math.isfinite(seg.step) and seg.step > 0):
            raise ConfigError(f"{where}: step must be positive, got {seg.step}", segment=number)
    durations = sum(seg.duration for seg in spec.segments)
    if durations != spec.length:
        raise ConfigError(f"segment durations sum to {durations}, stream length is {spec.length}")
    for number, spike in enumerate(spec.spikes, start=1):
        if not 1 <= spike.position < spec.length:
            raise ConfigError(f"spike {number}: position must lie in 1..{spec.length - 1}, got {spike.position}")
        if not (math.isfinite(spike.multiplier) and spike.multiplier > 0):
            raise ConfigError(f"spike {number}: multiplier must be positive, got {spike.multiplier}")
    return spec


def _segment_values(seg, rng):
    if seg.end_scale is None:
        scales = np.full(seg.duration, seg.scale)
    else:
        scales = np.linspace(seg.scale, seg.end_scale, seg.duration)
    if seg.family == "constant":
        values = scales
    elif seg.family == "uniform":
        values = scales * (1.0 - seg.spread + 2.0 * seg.spread * rng.random(seg.duration))
    else:
        values = scales * np.exp(seg.spread * rng.standard_normal(seg.duration))
    if seg.step is not None:
        # rounded up, so positive values stay positive
        values = np.ceil(values / seg.step) * seg.step
    return values


def generate(spec):
    """Materializes the stream described by ``spec`` as a float64 array."""
    validate_stream_spec(spec)
    rng = np.random.default_rng(spec.seed)
    values = np.concatenate([_segment_values(seg, rng) for seg in spec.segments])
    for spike in sorted(spec.spikes, key=lambda s: s.position):
        values[spike.position] = spike.multiplier * values[: spike.position].max()
    return values


def resize_stream_spec(spec, length):
    """Rescales durations and spike positions proportionally to a new length."""
    if length == spec.length:
        return spec
    if length < len(spec.segments):
        raise ConfigError(f"length {length} is too short for {len(spec.segments)} segments")
    ratio = length / spec.length
    durations = [max(1, int(seg.duration * ratio)) for seg in spec.segments]
    durations[-1] += length - sum(durations)
    if durations[-1] <= 0:
        raise ConfigError(f"length {length} is too short to keep every segment non-empty")
    segments = [seg.model_copy(update={"duration": d}) for seg, d in zip(spec.segments, durations)]
    spikes = [
        s.model_copy(update={"position": min(length - 1, max(1, int(s.position * ratio)))})
        for s in spec.spikes
    ]
    return spec.model_copy(update={"length": length, "segments": segments, "spikes": spikes})


def preset_streams(seed=0):
    """Fixed stream programs, each built to trigger one documented failure mode.

    spiky            falling level with isolated arrivals far above the running
                     maximum (squeezes equispaced bins).
    shifting         a short high opening, then two downward level shifts to
                     below a quarter of the previous scale. The cumulative 0.99
                     quantile walks down through the opening's values as they
                     lose share (P2 markers lag on stale values), and one early
                     arrival 40x the running maximum leaves equispaced bins
                     coarse for the rest of the run.
    heavy-tail-drift integer counts: a flat tail up to 72 laid down first, then
                     a body near 5 whose level drifts down and back up. The 0.99
                     quantile sits in the flat tail, so every bin budget places
                     it in the same spot.
    """
    return {
        "spiky": StreamSpec(
            length=120_000,
            seed=seed,
            segments=[
                Segment(family="lognormal", duration=40_000, scale=50.0, spread=0.35),
                Segment(family="lognormal", duration=40_000, scale=30.0, spread=0.35),
                Segment(family="lognormal", duration=40_000, scale=20.0, spread=0.35),
            ],
            spikes=[
                Spike(position=15_000, multiplier=20.0),
                Spike(position=45_000, multiplier=30.0),
                Spike(position=80_000, multiplier=50.0),
                Spike(position=100_000, multiplier=10.0),
            ],
        ),
        "shifting": StreamSpec(
            length=120_000,
            seed=seed,
            segments=[
                Segment(family="lognormal", duration=5_000, scale=100.0, spread=0.4),
                Segment(family="lognormal", duration=55_000, scale=20.0, spread=0.4),
                Segment(family="lognormal", duration=60_000, scale=4.0, spread=0.4),
            ],
            spikes=[Spike(position=2_000, multiplier=40.0)],
        ),
        "heavy-tail-drift": StreamSpec(
            length=100_000,
            seed=seed,
            segments=[
                Segment(family="uniform", duration=40_000, scale=40.0, spread=0.8, step=1.0),
                Segment(family="uniform", duration=30_000, scale=8.0, end_scale=4.0, spread=0.5, step=1.0),
                Segment(family="uniform", duration=30_000, scale=4.0, end_scale=8.0, spread=0.5, step=1.0),
            ],
        ),
    }


def stream_spec_from_blocks(length, seed, segments, spikes):
    """Builds a StreamSpec from parsed ``[segment]``/``[spike]`` key-value blocks."""
    try:
        built_segments = [Segment(**block) for block in segments]
        built_spikes = [Spike(**block) for block in spikes]
        if length is None:
            length = sum(seg.duration for seg in built_segments)
        spec = StreamSpec(length=int(length), seed=int(seed), segments=built_segments, spikes=built_spikes)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed stream block: {e}") from None
    return validate_stream_spec(spec)


def dump_stream_spec(spec):
    """Renders ``spec`` in the plain-text config format read by config_tools."""
    lines = [f"length = {spec.length}", f"seed = {spec.seed}"]
    for seg in spec.segments:
        lines += ["", "[segment]", f"family = {seg.family}", f"duration = {seg.duration}",
                  f"scale = {seg.scale!r}", f"spread = {seg.spread!r}"]
        if seg.end_scale is not None:
            lines.append(f"end_scale = {seg.end_scale!r}")
        if seg.step is not None:
            lines.append(f"step = {seg.step!r}")
    for spike in spec.spikes:
        lines += ["", "[spike]", f"position = {spike.position}", f"multiplier = {spike.multiplier!r}"]
    return "\n".join(lines) + "\n"


def ingest_file(path, column=None):
    """Yields one float per data line, streaming.

    A first line that is not numeric is taken as a header; ``column`` then picks
    a field by name (default: the first). Blank lines and ``#`` comments are
    skipped. Line numbers in errors are 1-based.
    """
    path = Path(path)
    try:
        handle = path.open("r", encoding="utf-8")
    except OSError as e:
        raise IngestError(e.strerror or str(e), path=path) from None

    with handle:
        field_index = 0
        first = True
        produced = 0
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cells = [cell.strip() for cell in line.split(",")]
            if first:
                first = False
                if not _is_number(cells[0]) or column is not None:
                    if column is None:
                        continue
                    if column not in cells:
                        raise IngestError(f"column {column!r} not in header {cells}", path=path, line=line_no)
                    field_index = cells.index(column)
                    continue
            if field_index >= len(cells):
                raise IngestError(f"missing field {field_index + 1}", path=path, line=line_no)
            value = _parse_value(cells[field_index], path, line_no)
            produced += 1
            yield value

        if produced == 0:
            raise IngestError("no data values found", path=path)


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _parse_value(text, path, line_no):
    try:
        value = float(text)
    except ValueError:
        raise IngestError(f"not a number: {text!r}", path=path, line=line_no) from None
    if not math.isfinite(value):
        raise IngestError(f"non-finite value: {text!r}", path=path, line=line_no)
    return value


def read_series(path, column=None):
    return list(ingest_file(path, column=column))
