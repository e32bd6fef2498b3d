"""Render CCDF figures to image files alongside the delimited plot data.

Matplotlib is imported lazily with the Agg backend so library users and
headless runs never touch a display.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .degree_stats import CcdfTable
from .powerlaw import PowerLawFit

_RC = {
    "figure.figsize": (5.0, 3.6),
    "figure.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def render_ccdf_figure(
    table: CcdfTable,
    path: str | Path,
    title: str,
    fit: PowerLawFit | None = None,
) -> Path:
    """Log-log CCDF scatter, optionally with the fitted power-law tail line."""
    plt = _pyplot()
    path = Path(path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        ax.loglog(table.ks, table.ccdf, ".", ms=4, color="#2E86AB", label="observed")
        if fit is not None:
            ks = np.unique(
                np.round(np.geomspace(fit.xmin, max(table.ks.max(), fit.xmin + 1), 64))
            )
            # anchor the fitted tail at the empirical mass above xmin
            idx = min(int(np.searchsorted(table.ks, fit.xmin)), len(table.ks) - 1)
            at_xmin = table.ccdf[idx]
            ax.loglog(
                ks,
                at_xmin * fit.fitted_ccdf(ks),
                "--",
                color="#E74C3C",
                lw=1.2,
                label=f"power law (gamma={fit.gamma:.2f}, xmin={fit.xmin})",
            )
        ax.set_xlabel("link count k")
        ax.set_ylabel("P(X >= k)")
        ax.set_title(title)
        ax.legend(loc="lower left", frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
