"""Deterministic SVG charts: knowledge-gain histogram and feature/aspect scatter plots."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "lvq", "svg.fonttype": "none", "font.family": "DejaVu Sans"}
_META = {"Date": None, "Creator": None}


def _svg(fig) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata=_META)
    plt.close(fig)
    return buf.getvalue()


def kg_histogram(values, bins: int = 10) -> bytes:
    """Distribution of per-video knowledge gain."""
    values = np.asarray([v for v in values if v is not None], dtype=float)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        if len(values):
            ax.hist(values, bins=bins, color="#4c72b0", edgecolor="white")
        ax.set_xlabel("knowledge gain")
        ax.set_ylabel("videos")
        ax.set_title("Knowledge gain distribution")
        fig.tight_layout()
        return _svg(fig)


def scatter(x, y, xlabel: str, ylabel: str, title: str) -> bytes:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.scatter(x, y, s=18, color="#dd8452")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.tight_layout()
        return _svg(fig)
