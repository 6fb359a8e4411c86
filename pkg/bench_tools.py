"""Experiment harness: feeds one stream to every estimator and the oracle in lockstep.

``run_experiment`` runs every selected estimator at every bin budget;
``run_sweep`` runs the maximal-entropy estimators at every budget and the
baselines at the largest budget only, giving the shape of the bin-budget table.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import polars as pl

from audit_tools import run_all_checks
from errors import DomainError, IngestError, NotWarmedUpError
from oracle_tools import ExactOracle, compute_errors
from reporting_tools import emit_outputs
from router_tools import router
from stream_tools import generate, ingest_file, resize_stream_spec

logger = logging.getLogger(__name__)

PROPOSED = ("interpolated", "aligned")


@dataclass
class RunTrace:
    """Per evaluated step: index (1-based step number), datum, truth, one estimate per column."""

    stride: int
    index: np.ndarray
    datum: np.ndarray
    truth: np.ndarray
    estimates: dict = field(default_factory=dict)
    state_samples: dict = field(default_factory=dict)

    @property
    def columns(self):
        return list(self.estimates)

    def __len__(self):
        return int(self.index.size)

    def to_frame(self):
        """polars frame with header index,datum,truth,<estimator columns>; missing estimates are null."""
        frame = {"index": pl.Series("index", self.index, dtype=pl.Int64),
                 "datum": pl.Series("datum", self.datum, dtype=pl.Float64),
                 "truth": pl.Series("truth", self.truth, dtype=pl.Float64)}
        for column, values in self.estimates.items():
            frame[column] = pl.Series(column, values, dtype=pl.Float64).fill_nan(None)
        return pl.DataFrame(frame)


@dataclass
class RunPlan:
    name: str
    bin_budget: int
    column: str


def plan_runs(cfg, sweep=False):
    """(estimator, budget) pairs to run, with their trace column names."""
    top = max(cfg.bins)
    single_budget = len(cfg.bins) == 1
    plans = []
    for name in cfg.compared:
        budgets = cfg.bins if (not sweep or name in PROPOSED) else [top]
        for n in budgets:
            column = name if single_budget else f"{name}_{n}"
            plans.append(RunPlan(name, n, column))
    return plans


def _query_or_nan(estimator, q):
    try:
        return estimator.query(q)
    except NotWarmedUpError:
        return math.nan


class BenchSession:
    """Holds one experiment: the resolved source, estimator instances and results."""

    def __init__(self, cfg, sweep=False):
        self.cfg = cfg
        self.plans = plan_runs(cfg, sweep=sweep)
        self.series = None
        self.audit = None
        self.trace = None
        self.summaries = {}

    def load_source(self):
        """Materializes the stream from a custom spec, a file, or a preset."""
        cfg = self.cfg
        if cfg.stream is not None:
            spec = cfg.stream
            if cfg.length is not None:
                spec = resize_stream_spec(spec, cfg.length)
            self.series = generate(spec)
        elif cfg.source == "custom":
            raise IngestError("source 'custom' needs [segment] blocks in the config file")
        elif Path(cfg.source).is_file():
            values = np.fromiter(ingest_file(cfg.source, column=cfg.column), dtype=float)
            if cfg.length is not None:
                values = values[: cfg.length]
            self.series = values
        elif router.is_preset(cfg.source):
            spec = router.preset(cfg.source, seed=cfg.seed)
            if cfg.length is not None:
                spec = resize_stream_spec(spec, cfg.length)
            self.series = generate(spec)
        else:
            raise IngestError("no such file or preset stream", path=cfg.source)
        logger.info("source %s: %d values", cfg.source, self.series.size)
        return self.series

    def check_stream(self):
        self.audit = run_all_checks(self.series)
        for issue in self.audit.issues:
            logger.warning("⚠️ %s", issue)
        return self.audit

    def build_estimators(self):
        cfg = self.cfg
        return [
            router.build_estimator(p.name, p.bin_budget, cfg.q, seed=cfg.seed, criterion=cfg.criterion)
            for p in self.plans
        ]

    def _lockstep(self, estimators):
        cfg = self.cfg
        rows = self.series.size // cfg.stride
        truth = np.empty(rows)
        estimates = [np.empty(rows) for _ in estimators]
        samples = [[] for _ in estimators]
        oracle = ExactOracle()

        row = 0
        for step, d in enumerate(self.series, start=1):
            oracle.observe(d)
            for est in estimators:
                est.observe(d)
            if step % cfg.stride == 0:
                truth[row] = oracle.query(cfg.q)
                for out, est in zip(estimates, estimators):
                    out[row] = _query_or_nan(est, cfg.q)
                row += 1
            if step % cfg.audit_stride == 0:
                for sample, est in zip(samples, estimators):
                    sample.append((step, est.state_size()))
        return truth, estimates, samples

    def _advance_one(self, estimator):
        """Runs one estimator over the whole series; used by the threaded mode."""
        cfg = self.cfg
        out = np.empty(self.series.size // cfg.stride)
        sample = []
        row = 0
        for step, d in enumerate(self.series, start=1):
            estimator.observe(d)
            if step % cfg.stride == 0:
                out[row] = _query_or_nan(estimator, cfg.q)
                row += 1
            if step % cfg.audit_stride == 0:
                sample.append((step, estimator.state_size()))
        return out, sample

    def _oracle_truth(self):
        cfg = self.cfg
        oracle = ExactOracle()
        truth = np.empty(self.series.size // cfg.stride)
        row = 0
        for step, d in enumerate(self.series, start=1):
            oracle.observe(d)
            if step % cfg.stride == 0:
                truth[row] = oracle.query(cfg.q)
                row += 1
        return truth

    def _threaded(self, estimators):
        with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
            truth_job = pool.submit(self._oracle_truth)
            results = list(pool.map(self._advance_one, estimators))
            truth = truth_job.result()
        return truth, [r[0] for r in results], [r[1] for r in results]

    def warmup_skip(self, estimators):
        if self.cfg.warmup_skip is not None:
            return self.cfg.warmup_skip
        return max((est.warmup_size for est in estimators), default=0)

    def run(self):
        cfg = self.cfg
        if self.series is None:
            self.load_source()
            self.check_stream()
        if self.series.size == 0:
            raise IngestError("stream is empty", path=cfg.source)

        estimators = self.build_estimators()
        if cfg.workers > 1 and len(estimators) > 1:
            logger.debug("advancing %d estimators on %d worker threads", len(estimators), cfg.workers)
            truth, estimates, samples = self._threaded(estimators)
        else:
            truth, estimates, samples = self._lockstep(estimators)

        rows = truth.size
        index = np.arange(1, rows + 1, dtype=np.int64) * cfg.stride
        self.trace = RunTrace(
            stride=cfg.stride,
            index=index,
            datum=self.series[index - 1],
            truth=truth,
            estimates={p.column: out for p, out in zip(self.plans, estimates)},
            state_samples={p.column: s for p, s in zip(self.plans, samples)},
        )

        skip = self.warmup_skip(estimators)
        skip_rows = skip // cfg.stride
        self.summaries = {}
        for plan, out in zip(self.plans, estimates):
            try:
                summary = compute_errors(truth, out, warmup_skip=skip_rows)
            except DomainError as e:
                raise DomainError(f"{plan.column}: {e} (warm-up skip {skip} steps, {rows} rows)") from None
            self.summaries[(plan.name, plan.bin_budget)] = summary
            logger.info(
                "%s n=%d: mean relative error %.3f%%, L-inf %.4g",
                plan.name, plan.bin_budget, summary.mean_relative_error_pct, summary.max_absolute_error,
            )
        return self.trace, self.summaries

    def status(self):
        if self.trace is None:
            return "⚠️ No experiment has been run yet."
        return f"✅ {len(self.trace)} rows, {len(self.summaries)} scored estimator runs."


def run_experiment(cfg, emit=True, sweep=False):
    """Runs ``cfg``; returns (RunTrace, {(estimator, budget): ErrorSummary}).

    With ``emit`` the trace and summary files named in ``cfg`` are written.
    """
    session = BenchSession(cfg, sweep=sweep)
    trace, summaries = session.run()
    if emit:
        emit_outputs(trace, summaries, cfg)
    return trace, summaries


def run_sweep(cfg, emit=True):
    return run_experiment(cfg, emit=emit, sweep=True)
