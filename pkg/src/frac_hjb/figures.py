"""Matplotlib rendering of study reports to PNG files.

Figures are a convenience layer on top of the CSV/JSON reports (which remain
the machine-readable contract): the rate plot shows measured errors against
the fitted model, the regularity plot the norm blow-up profile, the property
plot the margin of each suite row.
"""

from __future__ import annotations


import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_rate_figure", "save_regularity_figure", "save_property_figure", "save_solution_figure"]

_DPI = 150


def save_rate_figure(report: dict, path) -> None:
    eps = np.array([r["epsilon"] for r in report["rows"]])
    err = np.array([r["error"] for r in report["rows"]])
    fit = report["fit"]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(eps, err, "o-", label="measured sup error")
    if report["model"] == "eps_log":
        model = fit["C_fit"] * eps * np.abs(np.log(eps))
        label = r"$C\,\varepsilon|\log\varepsilon|$"
    else:
        q = report["q"] if report["q"] is not None else 1.0
        model = fit["C_fit"] * eps**q
        label = rf"$C\,\varepsilon^{{{q:.3g}}}$"
    ax.loglog(eps, model, "--", label=label)
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel("sup error at T")
    ax.set_title(f"vanishing-viscosity error (slope {fit['slope']:.3f})")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_regularity_figure(report: dict, path) -> None:
    ts = np.array([r["t"] for r in report["rows"]])
    norms = np.array([r["c1alpha_norm"] for r in report["rows"]])
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.4))
    axes[0].loglog(ts, norms, "o-")
    axes[0].set_xlabel("t")
    axes[0].set_ylabel(r"$C^{1,\alpha}$ norm on $(t/2, t]$")
    axes[0].set_title(f"blow-up profile (slope {report['norm_vs_t_slope']:.3f})")
    xs = [o["x0"] for o in report["oscillation"]]
    alphas = [o["fitted_alpha"] for o in report["oscillation"]]
    axes[1].bar(range(len(xs)), alphas, tick_label=[f"{x:.2f}" for x in xs])
    axes[1].set_xlabel("cylinder centre x0")
    axes[1].set_ylabel("fitted oscillation alpha")
    axes[1].set_title("diminishing oscillation")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_property_figure(report: dict, path) -> None:
    rows = report["verdict"]["rows"]
    names = [r["name"] for r in rows]

    def margin(r):
        m, th = r["measured"], r["threshold"]
        scale = max(abs(th), 1e-12)
        return (th - m) / scale if r["comparator"] == "<=" else (m - th) / scale

    margins = [margin(r) for r in rows]
    colors = ["tab:green" if r["passed"] else "tab:red" for r in rows]
    fig, ax = plt.subplots(figsize=(6.4, 0.36 * len(rows) + 1.2))
    ax.barh(range(len(rows)), margins, color=colors)
    ax.set_yticks(range(len(rows)), names, fontsize=7)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("relative margin to threshold (positive = pass)")
    ax.set_xscale("symlog", linthresh=1e-3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_solution_figure(times, fields, path) -> None:
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    grid = fields[0].grid
    x = grid.axis()
    show = np.linspace(0, len(times) - 1, min(len(times), 6)).astype(int)
    for i in show:
        ax.plot(x, fields[i].values, label=f"t = {times[i]:.3g}")
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
