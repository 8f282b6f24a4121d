"""Static figures for the CLI report paths.

All figures are written with the Agg backend and a fixed SVG hash salt
and no date metadata, so identical data give byte-identical files.
"""

from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import atomic_write_bytes  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "xtick.top": True,
    "ytick.right": True,
    "lines.linewidth": 1.0,
    "savefig.bbox": "tight",
    "svg.hashsalt": "dampedtop",
    "svg.fonttype": "path",
}


def save(fig, path) -> Path:
    path = Path(path)
    fmt = path.suffix.lstrip(".") or "svg"
    buf = io.BytesIO()
    meta = {"Date": None} if fmt in ("svg", "pdf") else {}
    fig.savefig(buf, format=fmt, metadata=meta, dpi=150)
    plt.close(fig)
    return atomic_write_bytes(path, buf.getvalue())


def bifurcation_figure(diagram, path, coord: int = 2, windows=(), title=None):
    """Scatter of one Bloch coordinate of the sampled orbits against ``r``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.0, 4.0))
        n = diagram.points.shape[1]
        rr = np.repeat(diagram.r_grid, n)
        ax.plot(rr, diagram.points[:, :, coord].ravel(), ",", color="k", alpha=0.6,
                rasterized=rr.size > 20_000)
        for w in windows:
            ax.axvspan(w.r_low, w.r_high, color="tab:orange", alpha=0.2, lw=0)
            ax.annotate(str(w.dominant_period), ((w.r_low + w.r_high) / 2, 1.0),
                        xycoords=("data", "axes fraction"), ha="center", va="bottom", fontsize=7)
        ax.set_xlabel("r")
        ax.set_ylabel("xyz"[coord])
        ax.set_xlim(diagram.r_grid[0], diagram.r_grid[-1])
        if title:
            ax.set_title(title)
        return save(fig, path)


def lyapunov_figure(r_values, spectra, path, diagram=None):
    """Exponents against ``r``; with ``diagram`` a z bifurcation panel is stacked on top."""
    r_values = np.asarray(r_values)
    ex = np.array([s.exponents for s in spectra])
    with plt.rc_context(STYLE):
        if diagram is not None:
            fig, (top, ax) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
            n = diagram.points.shape[1]
            top.plot(np.repeat(diagram.r_grid, n), diagram.points[:, :, 2].ravel(), ",", color="k",
                     rasterized=True)
            top.set_ylabel("z")
        else:
            fig, ax = plt.subplots(figsize=(7.0, 3.5))
        for j, color in enumerate(("tab:red", "tab:blue", "tab:green")):
            ax.plot(r_values, ex[:, j], color=color, label=f"$\\lambda_{j + 1}$")
        ax.axhline(0.0, color="0.5", lw=0.6)
        ax.set_xlabel("r")
        ax.set_ylabel("Lyapunov exponent")
        ax.legend(loc="lower left")
        return save(fig, path)


def attractor_figure(cloud, path):
    pts = cloud.points
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=(5.0, 5.0))
        ax = fig.add_subplot(projection="3d")
        u, v = np.mgrid[0:2 * np.pi:40j, 0:np.pi:20j]
        ax.plot_wireframe(np.cos(u) * np.sin(v), np.sin(u) * np.sin(v), np.cos(v),
                          color="0.85", lw=0.3)
        ax.scatter(pts[:, 0], pts[:, 1], pts[:, 2], s=0.3, c="k", depthshade=False,
                   rasterized=len(pts) > 20_000)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_zlabel("z")
        ax.set_box_aspect((1, 1, 1))
        ax.set_title(f"r = {cloud.r_value:g}, {len(pts)} points")
        return save(fig, path)


def correlation_figure(fit, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.8))
        le = np.log(fit.eps_values)
        lc = fit.log_counts
        ax.plot(le, lc, "o", ms=3, color="k", mfc="none")
        a, b = fit.fit_range
        xs = le[a:b]
        ax.plot(xs, fit.intercept + fit.slope * xs, color="tab:red",
                label=f"log C = {fit.intercept:.2f} + {fit.slope:.2f} log eps")
        ax.set_xlabel("log eps")
        ax.set_ylabel("log C")
        ax.legend(loc="lower right")
        return save(fig, path)


def convergence_figure(rows, path):
    n = np.array([r[0] for r in rows], dtype=float)
    err = np.array([r[1] for r in rows])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.8))
        ax.loglog(n, err, "o-", color="k", ms=3)
        ax.loglog(n, err[0] * n[0] / n, "--", color="0.5", label="1/N")
        ax.set_xlabel("N")
        ax.set_ylabel("max Bloch distance to limit map")
        ax.legend()
        return save(fig, path)


def residual_figure(r_values, alpha, beta, path, z_window=(-1.0, 1.0)):
    """Fixed-point residual against z for several damping values."""
    from .fixed_points import _limit_residual, _residual

    z = np.linspace(z_window[0], z_window[1], 4001)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.8))
        for r in r_values:
            with np.errstate(divide="ignore", invalid="ignore"):
                if r == 1.0:
                    f, den = _limit_residual(z, alpha, beta)
                    label = "r = 1 (df/dr)"
                else:
                    f, den = _residual(z, r, alpha, beta)
                    label = f"r = {r:g}"
            f = np.where(np.abs(den) < 1e-3, np.nan, f)
            ax.plot(z, f, label=label)
        ax.axhline(0.0, color="0.5", lw=0.6)
        ax.set_ylim(-1.0, 1.0)
        ax.set_xlabel("z")
        ax.set_ylabel("f(z)")
        ax.legend()
        return save(fig, path)
