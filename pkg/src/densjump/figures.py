"""Render the plot-data CSVs to PNG files.

Reads back the profile and contour exports rather than taking arrays, so
a figure can be regenerated from a finished run directory without the
posterior draws.
"""
from __future__ import annotations

import csv
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import DataError

__all__ = ["render_profiles", "render_contour"]


def _read_profiles(csv_path):
    """Group profile rows by covariate, preserving file order."""
    groups: dict = {}
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = {"covariate", "u", "j_lo", "j_med", "j_hi"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise DataError(f"{csv_path}: not a profile export")
        for row in reader:
            rec = groups.setdefault(row["covariate"], ([], [], [], []))
            rec[0].append(float(row["u"]))
            rec[1].append(float(row["j_lo"]))
            rec[2].append(float(row["j_med"]))
            rec[3].append(float(row["j_hi"]))
    if not groups:
        raise DataError(f"{csv_path}: empty profile export")
    return {k: tuple(np.asarray(v) for v in rec) for k, rec in groups.items()}


def render_profiles(csv_path, png_path, dpi: int = 150) -> None:
    """One panel per covariate: posterior median jump with a 95% band."""
    groups = _read_profiles(csv_path)
    n = len(groups)
    ncols = min(n, 3)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.6 * nrows),
        sharex=True, squeeze=False,
    )
    flat = axes.ravel()
    for ax, (name, (u, lo, med, hi)) in zip(flat, groups.items()):
        ax.fill_between(u, lo, hi, color="tab:blue", alpha=0.25, linewidth=0)
        ax.plot(u, med, color="tab:blue", lw=1.5)
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_title(name, fontsize=10)
        ax.set_ylim(bottom=0.0)
    for ax in flat[n:]:
        ax.set_visible(False)
    for ax in flat[:n]:
        ax.set_xlabel("standardized value")
    flat[0].set_ylabel("jump size")
    fig.tight_layout()
    fig.savefig(png_path, dpi=dpi)
    plt.close(fig)


def _read_contour(csv_path):
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        expected = {"covariate_1", "covariate_2", "u1", "u2", "j_med", "is_zero"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise DataError(f"{csv_path}: not a contour export")
        rows = list(reader)
    if not rows:
        raise DataError(f"{csv_path}: empty contour export")
    name1 = rows[0]["covariate_1"]
    name2 = rows[0]["covariate_2"]
    u1 = np.asarray(sorted({float(r["u1"]) for r in rows}))
    u2 = np.asarray(sorted({float(r["u2"]) for r in rows}))
    if len(rows) != u1.size * u2.size:
        raise DataError(f"{csv_path}: contour rows do not form a full grid")
    med = np.empty((u1.size, u2.size))
    zero = np.empty((u1.size, u2.size), dtype=bool)
    pos1 = {v: i for i, v in enumerate(u1)}
    pos2 = {v: i for i, v in enumerate(u2)}
    for r in rows:
        a, b = pos1[float(r["u1"])], pos2[float(r["u2"])]
        med[a, b] = float(r["j_med"])
        zero[a, b] = r["is_zero"] == "1"
    return name1, name2, u1, u2, med, zero


def render_contour(csv_path, png_path, dpi: int = 150) -> None:
    """Filled contour of the median jump surface; the j = 0 region is shaded."""
    name1, name2, u1, u2, med, zero = _read_contour(csv_path)
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    # transpose: contourf expects Z[y, x] with x = first covariate
    zt = med.T
    cs = ax.contourf(u1, u2, zt, levels=12, cmap="viridis")
    fig.colorbar(cs, ax=ax, label="median jump size")
    if zero.any():
        shade = np.ma.masked_where(~zero.T, np.ones_like(zt))
        ax.contourf(u1, u2, shade, levels=[0.5, 1.5], colors="none",
                    hatches=["//"])
        ax.contour(u1, u2, zero.T.astype(float), levels=[0.5],
                   colors="white", linewidths=0.8)
    ax.set_xlabel(f"{name1} (standardized)")
    ax.set_ylabel(f"{name2} (standardized)")
    fig.tight_layout()
    fig.savefig(png_path, dpi=dpi)
    plt.close(fig)
