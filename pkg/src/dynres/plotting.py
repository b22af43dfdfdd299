"""Figures written next to the CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def loglog_slope(xs, ys):
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.log(np.asarray(xs, dtype=float))
    y = np.log(np.asarray(ys, dtype=float))
    if x.size < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def latency_plot(rows, path):
    """Median update / query latency against ``n`` on log-log axes."""
    n = [r["n"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    for key, label in (("update_ns_p50", "update"), ("query_ns_p50", "query")):
        y = [r[key] for r in rows]
        ax.loglog(n, y, "o-", label=f"{label} (slope {loglog_slope(n, y):.2f})")
    ref = np.array(n, dtype=float)
    base = rows[0]["update_ns_p50"]
    ax.loglog(ref, base * np.sqrt(ref / ref[0]), "k--", lw=0.8, label="sqrt(n) reference")
    ax.set_xlabel("n")
    ax.set_ylabel("median latency [ns]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def ratio_plot(rows, eps, path):
    """``psi / oracle`` per query with the ``1 +- eps`` band."""
    idx = [r["op_index"] for r in rows]
    ratio = [r["psi"] / r["oracle"] for r in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.axhspan(1 - eps, 1 + eps, color="0.9", label=f"1 +- {eps:g}")
    ax.plot(idx, ratio, ".", ms=4)
    ax.axhline(1.0, color="k", lw=0.6)
    ax.set_xlabel("operation index")
    ax.set_ylabel("psi / exact")
    ax.legend(fontsize=8, loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
