import logging

import numpy as np
import plotly.graph_objects as go
from plotly.subplots import make_subplots

logger = logging.getLogger(__name__)

MAX_POINTS = 20_000
PALETTE = ["#636EFA", "#EF553B", "#00CC96", "#AB63FA", "#FFA15A", "#19D3F3", "#FF6692", "#B6E880"]


def relative_error_series(truth, estimate):
    """|estimate - truth| / |truth| per row; NaN where truth is zero or the estimate is missing."""
    t = np.asarray(truth, dtype=float)
    e = np.asarray(estimate, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(e - t) / np.abs(t)
    rel[t == 0] = np.nan
    return rel


def running_mean(values):
    """Mean of the finite values seen so far, row by row."""
    finite = np.isfinite(values)
    seen = np.cumsum(finite)
    sums = np.cumsum(np.where(finite, values, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(seen > 0, sums / seen, np.nan)


def build_trace_figure(trace, q):
    """Running estimates against the truth, plus running mean relative error per estimator."""
    step = max(1, len(trace) // MAX_POINTS)
    x = trace.index[::step]

    fig = make_subplots(
        rows=2, cols=1, shared_xaxes=True, vertical_spacing=0.08,
        subplot_titles=(f"Running {q:g}-quantile estimates", "Running mean relative error"),
        row_heights=[0.6, 0.4],
    )
    fig.add_trace(go.Scatter(
        x=x, y=trace.datum[::step], mode="markers", name="datum",
        marker=dict(color="#94a3b8", size=2), opacity=0.35,
    ), row=1, col=1)
    fig.add_trace(go.Scatter(
        x=x, y=trace.truth[::step], mode="lines", name="truth",
        line=dict(color="#e2e8f0", width=3),
    ), row=1, col=1)

    for i, (column, values) in enumerate(trace.estimates.items()):
        color = PALETTE[i % len(PALETTE)]
        fig.add_trace(go.Scatter(
            x=x, y=values[::step], mode="lines", name=column, legendgroup=column,
            line=dict(color=color, width=1.5),
        ), row=1, col=1)
        rel = running_mean(relative_error_series(trace.truth, values))
        fig.add_trace(go.Scatter(
            x=x, y=100.0 * rel[::step], mode="lines", name=f"{column} error %", legendgroup=column,
            line=dict(color=color, width=1.5), showlegend=False,
        ), row=2, col=1)

    if trace.datum.size and np.all(trace.datum > 0):
        fig.update_yaxes(type="log", row=1, col=1)
    fig.update_yaxes(title_text="%", row=2, col=1)
    fig.update_xaxes(title_text="step", row=2, col=1)
    fig.update_layout(
        height=900, template="plotly_dark",
        paper_bgcolor="#1e293b", plot_bgcolor="#0f172a",
        font=dict(color="#e2e8f0", family="Arial"),
        margin=dict(t=60, l=40, r=20, b=40),
    )
    return fig


def write_trace_html(trace, q, path):
    fig = build_trace_figure(trace, q)
    fig.write_html(str(path), include_plotlyjs=True)
    logger.debug("trace figure with %d series written to %s", len(trace.estimates), path)
    return path
