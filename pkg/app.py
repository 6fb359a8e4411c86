"""Command-line entry point for the streaming-quantile bench.

Examples:
    python app.py run --source spiky --q 0.95 --bins 500
    python app.py sweep --source heavy-tail-drift --q 0.99
    python app.py gen shifting --out shifting.txt --seed 3
    python app.py audit --source data/latency.csv --column ms
"""

import argparse
import logging
import os
import sys

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from bench_tools import BenchSession, run_experiment, run_sweep
from config_tools import load_config
from errors import QuantileBenchError
from reporting_tools import atomic_write, summary_frame
from router_tools import router
from stream_tools import dump_stream_spec, resize_stream_spec

logger = logging.getLogger("app")
console = Console(markup=False)

SWEEP_BINS = [500, 100, 50, 25, 12]


def setup_logging(level):
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _csv_list(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def add_source_flags(parser):
    parser.add_argument("--config", help="Experiment config file (key = value lines, [segment] blocks)")
    parser.add_argument("--source", help="Preset name (spiky, shifting, heavy-tail-drift) or input file")
    parser.add_argument("--column", help="Column to read from a CSV input with a header")
    parser.add_argument("--seed", type=int, help="Seed for preset streams and the reservoir (default: 0)")
    parser.add_argument("--length", type=int, help="Resize the preset stream (or truncate the file) to this length")


def add_experiment_flags(parser):
    add_source_flags(parser)
    parser.add_argument("--q", type=float, help="Quantile level in (0, 1] (default: 0.95)")
    parser.add_argument("--bins", type=_csv_list, help="Comma-separated bin budgets, e.g. 500,100,50")
    parser.add_argument("--estimators", type=_csv_list,
                        help="Comma-separated subset of interpolated,aligned,p2,reservoir,equispaced,oracle")
    parser.add_argument("--stride", type=int, help="Evaluate every k-th step (default: 1)")
    parser.add_argument("--workers", type=int, help="Worker threads advancing estimators (default: 1)")
    parser.add_argument("--skip", dest="warmup_skip", type=int,
                        help="Steps excluded from scoring (default: largest estimator warm-up)")
    parser.add_argument("--criterion", choices=["discrete", "differential"],
                        help="Merge criterion of the data-aligned estimator")
    parser.add_argument("--audit-stride", type=int, help="State-size sampling period in steps")
    parser.add_argument("--out-trace", help="Trace CSV path (default: trace.csv)")
    parser.add_argument("--out-summary", help="Summary CSV path (default: summary.csv)")
    parser.add_argument("--out-plot", help="gnuplot data file")
    parser.add_argument("--out-html", help="Interactive HTML plot of the run")
    parser.add_argument("--out-pdf", help="PDF summary table")


OVERRIDE_KEYS = (
    "source", "column", "seed", "length", "q", "bins", "estimators", "stride", "workers",
    "warmup_skip", "criterion", "audit_stride", "out_trace", "out_summary", "out_plot", "out_html", "out_pdf",
)


def overrides_from_args(args):
    return {key: getattr(args, key, None) for key in OVERRIDE_KEYS}


def render_summary(summaries, title):
    table = Table(title=title)
    table.add_column("Estimator", style="cyan")
    table.add_column("Bins", justify="right")
    table.add_column("Mean rel. error (%)", justify="right")
    table.add_column("L-inf error", justify="right")
    for name, n, mre, linf in summary_frame(summaries).iter_rows():
        table.add_row(router.get_description(name), str(n), f"{mre:.2f}", f"{linf:.4g}")
    console.print(table)


def cmd_run(args):
    cfg = load_config(args.config, overrides_from_args(args))
    trace, summaries = run_experiment(cfg)
    console.print(f"✅ {len(trace)} trace rows over {len(trace.columns)} estimator column(s).")
    if summaries:
        render_summary(summaries, f"{cfg.q:g}-quantile on {cfg.source}")
    else:
        console.print("⚠️ Only the oracle ran; the summary is empty.")
    return 0


def cmd_sweep(args):
    cfg = load_config(args.config, overrides_from_args(args), defaults={"bins": SWEEP_BINS})
    trace, summaries = run_sweep(cfg)
    render_summary(summaries, f"Bin-budget sweep, {cfg.q:g}-quantile on {cfg.source}")
    return 0


def cmd_gen(args):
    overrides = overrides_from_args(args)
    if args.preset is not None:
        overrides["source"] = args.preset
    cfg = load_config(args.config, overrides)
    session = BenchSession(cfg)
    series = session.load_source()

    text = "".join(f"{value!r}\n" for value in series.tolist())
    if args.out is None:
        sys.stdout.write(text)
    else:
        atomic_write(args.out, lambda tmp: tmp.write_text(text, encoding="utf-8"))
        console.print(f"✅ {series.size} values written to {args.out}")
    if args.dump_spec is not None:
        spec = cfg.stream if cfg.stream is not None else router.preset(cfg.source, seed=cfg.seed)
        if cfg.length is not None:
            spec = resize_stream_spec(spec, cfg.length)
        atomic_write(args.dump_spec, lambda tmp: tmp.write_text(dump_stream_spec(spec), encoding="utf-8"))
        console.print(f"✅ stream program written to {args.dump_spec}")
    return 0


def cmd_audit(args):
    cfg = load_config(args.config, overrides_from_args(args))
    session = BenchSession(cfg)
    session.load_source()
    audit = session.check_stream()
    console.print(audit.report())
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        description="Bounded-memory streaming quantile estimation bench",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    parser.add_argument("--log-level", default=None,
                        help="Logging level (default: $MAXENT_LOG_LEVEL or INFO)")
    subparsers = parser.add_subparsers(dest="command", required=True, help="Command to run")

    run_parser = subparsers.add_parser("run", help="Run estimators and the oracle over one stream")
    add_experiment_flags(run_parser)
    run_parser.set_defaults(handler=cmd_run)

    sweep_parser = subparsers.add_parser("sweep", help="Bin-budget sweep (default budgets 500,100,50,25,12)")
    add_experiment_flags(sweep_parser)
    sweep_parser.set_defaults(handler=cmd_sweep)

    gen_parser = subparsers.add_parser("gen", help="Write a preset or custom stream to a file")
    gen_parser.add_argument("preset", nargs="?", help="Preset name (default: --source or the config)")
    add_source_flags(gen_parser)
    gen_parser.add_argument("--out", "-o", help="Output file, one value per line (default: stdout)")
    gen_parser.add_argument("--dump-spec", help="Also write the stream program in config format")
    gen_parser.set_defaults(handler=cmd_gen)

    audit_parser = subparsers.add_parser("audit", help="Report spikes, non-positive values and duplicates")
    add_source_flags(audit_parser)
    audit_parser.set_defaults(handler=cmd_audit)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    load_dotenv()
    setup_logging(args.log_level or os.getenv("MAXENT_LOG_LEVEL", "INFO"))

    try:
        return args.handler(args)
    except QuantileBenchError as e:
        console.print(f"❌ {e.category} Error: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        console.print("⚠️ Interrupted.")
        return 1
    except Exception as e:
        logger.debug("unexpected failure", exc_info=True)
        console.print(f"❌ Unexpected Error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
