"""Matplotlib figures for the report commands (Agg backend, files only)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import grid_rgb  # noqa: E402

# keep PNG bytes reproducible
_META = {"Software": None}


def _save(fig, path):
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)


def plot_grid(path, g, witness=None, title=None):
    fig, ax = plt.subplots(figsize=(6, 6))
    re_lo, re_hi, im_lo, im_hi = g.box
    ax.imshow(grid_rgb(g), extent=(re_lo, re_hi, im_lo, im_hi), interpolation="nearest")
    if witness is not None:
        overlay = np.zeros(witness.blocker.shape + (4,))
        overlay[witness.blocker] = (1.0, 1.0, 1.0, 0.35)
        ax.imshow(overlay, extent=(re_lo, re_hi, im_lo, im_hi), interpolation="nearest")
        for r, c in witness.separated:
            z = g.cell_center(r, c)
            ax.plot(z.real, z.imag, "wo", ms=6, mec="k")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(title or f"escape steps, a = {g.parameter}")
    _save(fig, path)


def plot_ray(path, line, title=None):
    zs = line.zs
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(zs.real, zs.imag, ".-", lw=1)
    ax1.set_xlabel("Re z")
    ax1.set_ylabel("Im z")
    ax1.set_title(title or f"ray {line.address}")
    res = np.array([p.residual for p in line.samples])
    shown = np.where(res > 0, res, np.nan)
    ax2.semilogy(line.ts, shown, "o-", ms=3)
    ax2.set_xlabel("potential t")
    ax2.set_ylabel("residual (0 not shown)")
    _save(fig, path)


def plot_partition(path, p, orbit_points=None):
    fig, ax = plt.subplots(figsize=(7, 6))
    g = p.gamma.zs
    ax.plot(g.real, g.imag, "k-", lw=2, label="gamma")
    for k, curve in sorted(p.curves.items()):
        ax.plot(curve.real, curve.imag, "-", lw=1, label=f"eta_{k}" if abs(k) <= 1 else None)
    if orbit_points is not None:
        pts = np.asarray(orbit_points, dtype=complex)
        ax.plot(pts.real, pts.imag, "r.", ms=6, label="orbit")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title(f"strip partition, a = {p.parameter}, M = {p.M:.4g}")
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)
