"""Matplotlib renderers for the CLI report paths.

Imported lazily so the core library stays free of plotting dependencies;
every function writes one figure file next to the delimited output.
"""

from __future__ import annotations

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_sweep(rows, path: str, xlabel: str = "b") -> None:
    plt = _pyplot()
    xs = [r[0] for r in rows]
    ys = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(xs, ys, "-", lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("critical length")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_region(raster, boundary, path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ts = sorted({r[0] for r in raster})
    hs = sorted({r[1] for r in raster})
    if ts and hs:
        idx_t = {t: i for i, t in enumerate(ts)}
        idx_h = {h: i for i, h in enumerate(hs)}
        img = np.zeros((len(hs), len(ts)))
        for t, h, verdict, _ in raster:
            img[idx_h[h], idx_t[t]] = 1.0 if verdict == "EC" else 0.0
        ax.imshow(
            img,
            origin="lower",
            aspect="auto",
            extent=(ts[0], ts[-1], hs[0], hs[-1]),
            cmap="Greens",
            vmin=0.0,
            vmax=1.5,
        )
    bt = [row[0] for row in boundary if np.isfinite(row[1])]
    bh = [row[1] for row in boundary if np.isfinite(row[1])]
    if bt:
        ax.plot(bt, bh, "r-", lw=1.5, label="boundary")
        ax.legend(loc="best")
    ax.set_xlabel("T")
    ax.set_ylabel("H")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_curve(polyline, control, path: str) -> None:
    plt = _pyplot()
    poly = np.asarray(polyline, dtype=float)
    ctrl = np.asarray(control, dtype=float)
    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    if poly.shape[1] == 1:
        ax.plot(np.linspace(0, 1, len(poly)), poly[:, 0], "-", lw=1.4)
    else:
        ax.plot(ctrl[:, 0], ctrl[:, 1], "o--", color="0.6", lw=1.0, label="control polygon")
        ax.plot(poly[:, 0], poly[:, 1], "-", lw=1.6, label="curve")
        ax.legend(loc="best")
        ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
