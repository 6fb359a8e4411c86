"""Writes run results: trace CSV, summary CSV, gnuplot data, optional PDF table.

Every file is written to a temporary sibling first and renamed into place, so a
failed run never leaves a half-written output behind.
"""

import logging
import os
import tempfile
from datetime import datetime
from pathlib import Path

import polars as pl
from reportlab.lib import colors
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from errors import OutputError
from visualization_tools import write_trace_html

logger = logging.getLogger(__name__)

SUMMARY_SCHEMA = {
    "estimator": pl.Utf8,
    "bins": pl.Int64,
    "mean_relative_error_pct": pl.Float64,
    "linf_error": pl.Float64,
}


def atomic_write(path, writer):
    """Calls ``writer(tmp_path)`` then renames the temp file onto ``path``."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        os.close(fd)
    except OSError as e:
        raise OutputError(e.strerror or str(e), path=path) from None
    try:
        writer(Path(tmp))
        os.replace(tmp, path)
    except Exception as e:
        Path(tmp).unlink(missing_ok=True)
        if isinstance(e, OSError):
            raise OutputError(e.strerror or str(e), path=path) from None
        raise OutputError(str(e), path=path) from e
    logger.debug("wrote %s", path)
    return path


def summary_frame(summaries):
    """One row per (estimator, budget): estimator,bins,mean_relative_error_pct,linf_error."""
    rows = [
        {
            "estimator": name,
            "bins": int(n),
            "mean_relative_error_pct": s.mean_relative_error_pct,
            "linf_error": s.max_absolute_error,
        }
        for (name, n), s in summaries.items()
    ]
    return pl.DataFrame(rows, schema=SUMMARY_SCHEMA)


def write_trace(trace, path):
    frame = trace.to_frame()
    return atomic_write(path, lambda tmp: frame.write_csv(tmp))


def write_summary(summaries, path):
    frame = summary_frame(summaries)
    return atomic_write(path, lambda tmp: frame.write_csv(tmp))


def write_plot_data(trace, path):
    """Whitespace-separated columns for gnuplot; missing estimates are NaN."""
    frame = trace.to_frame().drop("datum")
    header = "# " + " ".join(frame.columns) + "\n"
    body = frame.write_csv(separator=" ", include_header=False, null_value="NaN")
    return atomic_write(path, lambda tmp: tmp.write_text(header + body, encoding="utf-8"))


def write_summary_pdf(summaries, cfg, path):
    """Bin-budget table as a one-page PDF."""
    styles = getSampleStyleSheet()
    title_style = ParagraphStyle(
        "SummaryTitle",
        parent=styles["Heading1"],
        fontSize=20,
        textColor=colors.HexColor("#1e40af"),
        spaceAfter=18,
        alignment=1,
    )

    data = [["Estimator", "Bins", "Mean relative error (%)", "L-inf error"]]
    for row in summary_frame(summaries).iter_rows():
        name, n, mre, linf = row
        data.append([name, str(n), f"{mre:.2f}", f"{linf:.4g}"])

    table = Table(data, hAlign="CENTER")
    table.setStyle(TableStyle([
        ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor("#1e40af")),
        ("TEXTCOLOR", (0, 0), (-1, 0), colors.white),
        ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
        ("ALIGN", (1, 1), (-1, -1), "RIGHT"),
        ("GRID", (0, 0), (-1, -1), 0.5, colors.grey),
        ("ROWBACKGROUNDS", (0, 1), (-1, -1), [colors.white, colors.HexColor("#eef2ff")]),
    ]))

    story = [
        Paragraph(f"{cfg.q:g}-quantile error summary", title_style),
        Paragraph(f"Source: {cfg.source} &nbsp; seed {cfg.seed} &nbsp; stride {cfg.stride}", styles["Normal"]),
        Paragraph(f"Generated: {datetime.now().strftime('%B %d, %Y at %I:%M %p')}", styles["Normal"]),
        Spacer(1, 0.3 * inch),
        table,
    ]

    def build(tmp):
        doc = SimpleDocTemplate(str(tmp), pagesize=letter,
                                leftMargin=72, rightMargin=72, topMargin=72, bottomMargin=72)
        doc.build(story)

    return atomic_write(path, build)


def emit_outputs(trace, summaries, cfg):
    """Writes every output file named in ``cfg``; returns the written paths."""
    written = []
    if cfg.out_trace is not None:
        written.append(write_trace(trace, cfg.out_trace))
    if cfg.out_summary is not None:
        written.append(write_summary(summaries, cfg.out_summary))
    if cfg.out_plot is not None:
        written.append(write_plot_data(trace, cfg.out_plot))
    if cfg.out_html is not None:
        written.append(atomic_write(cfg.out_html, lambda tmp: write_trace_html(trace, cfg.q, tmp)))
    if cfg.out_pdf is not None:
        written.append(write_summary_pdf(summaries, cfg, cfg.out_pdf))
    for path in written:
        logger.info("✅ wrote %s", path)
    return written
