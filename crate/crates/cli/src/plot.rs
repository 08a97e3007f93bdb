//! Plot scripts emitted next to reconstruction outputs. The CSVs are the
//! product; the script only renders them.

pub const PLOT_FILE: &str = "plot_indicator.py";

pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Render indicator.csv (and contour.csv if present) from this directory."""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "indicator.csv"))))
nx = max(int(r["ix"]) for r in rows) + 1
ny = max(int(r["iy"]) for r in rows) + 1
field = np.full((ny, nx), np.nan)
xs = np.full(nx, np.nan)
ys = np.full(ny, np.nan)
for r in rows:
    ix, iy = int(r["ix"]), int(r["iy"])
    xs[ix], ys[iy] = float(r["x"]), float(r["y"])
    field[iy, ix] = -np.log(float(r["density_norm"]))


def fill(c):
    # lattice lines with no point inside the body: extend the uniform spacing
    known = np.flatnonzero(~np.isnan(c))
    slope, offset = np.polyfit(known, c[known], 1) if len(known) > 1 else (1.0, c[known[0]])
    return offset + slope * np.arange(len(c))


xs, ys = fill(xs), fill(ys)

fig, ax = plt.subplots(figsize=(6, 5))
mesh = ax.pcolormesh(xs, ys, field, shading="nearest", cmap="viridis")
fig.colorbar(mesh, ax=ax, label="ln(1/|g|)")
contour = os.path.join(here, "contour.csv")
if os.path.exists(contour):
    pts = np.array([[float(r["x"]), float(r["y"])] for r in csv.DictReader(open(contour))])
    if len(pts):
        pts = np.vstack([pts, pts[:1]])
        ax.plot(pts[:, 0], pts[:, 1], "r-", lw=2, label="extracted boundary")
        ax.legend(loc="upper right")
ax.set_aspect("equal")
ax.set_xlabel("x")
ax.set_ylabel("y")
out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "indicator.png")
fig.savefig(out, dpi=150, bbox_inches="tight")
print(out)
"#;
