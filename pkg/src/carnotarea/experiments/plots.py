"""Optional SVG figures drawn from a report's rows (the CSV stays the contract)."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_svg(report, path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed ids and no timestamp keep the file reproducible
    matplotlib.rcParams["svg.hashsalt"] = report.scenario_id
    fig, ax = plt.subplots(figsize=(5, 4))
    if report.fits:
        for name, fit in report.fits.items():
            x = np.array(fit.scales)
            ax.loglog(x, fit.values, "o", label=name)
            ax.loglog(x, np.exp(fit.intercept) * x ** fit.slope, "-",
                      label=f"slope {fit.slope:.3f}")
        ax.set_xlabel("scale")
        ax.set_ylabel("value")
        ax.legend()
    else:
        names = [r.estimator + (f" @{r.delta:g}" if r.delta is not None else "")
                 for r in report.rows]
        ax.barh(range(len(names)), [r.value for r in report.rows])
        ax.set_yticks(range(len(names)), names, fontsize=7)
        ax.set_xlabel("value")
    ax.set_title(f"{report.scenario_id} ({'pass' if report.passed else 'fail'})")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
