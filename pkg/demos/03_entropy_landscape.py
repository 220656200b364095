"""The entropy landscape in both parametrizations.

Under the mean-value parametrization entropy is a smooth concave surface
over the support polygon; under the natural parametrization the same
information collapses onto ridges aligned with the normal fan, which is the
mechanism behind "degenerate" fits: far-apart natural parameters inside one
normal cone describe nearly the same concentrated distribution.
"""

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ergfan import enumeration as en
from ergfan import family as fm
from ergfan import geometry as geo
from ergfan import mle

data = Path(__file__).resolve().parent.parent / "src" / "ergfan" / "data"
m9 = en.measure_from_json((data / "g9_edges_triangles.json").read_text())
fam = fm.ExpFamily.from_measure(m9)
poly = geo.build_polytope(m9)
faces = geo.face_lattice(poly)
fan = geo.normal_fan(poly, faces)

ev0 = fm.eval_family(fam, (0.0, 0.0))
print(f"S(0,0) = {ev0.entropy:.6f} = 36 log 2 = {36 * math.log(2):.6f} (uniform)")
print(f"mean at the origin: {tuple(ev0.mean)}")

# natural-parameter grid around the origin: the maximum sits at 0
grid = fm.entropy_grid(fam, ((-6, 6), (-14, 14)), (81, 81))
i, j = np.unravel_index(np.argmax(grid.entropy), grid.entropy.shape)
print(f"grid max entropy {grid.entropy[i, j]:.6f} at theta = "
      f"({grid.theta1[i]:.2f}, {grid.theta2[j]:.2f})")

# mean-value view: entropy at every interior support point via the MLE map
print("computing V(mu) at all interior support points (Newton per point)...")
mean_pts, mean_vals = [], []
for t in faces.interior_points():
    res = mle.solve_mle(fam, np.asarray(t, dtype=float))
    mean_pts.append(t)
    mean_vals.append(res.entropy)
print(f"   {len(mean_pts)} points, V range [{min(mean_vals):.3f}, {max(mean_vals):.3f}]")

out = Path(__file__).resolve().parent / "output"
out.mkdir(exist_ok=True)
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(12, 4.6))

im = ax1.imshow(
    grid.entropy.T,
    origin="lower",
    extent=(grid.theta1[0], grid.theta1[-1], grid.theta2[0], grid.theta2[-1]),
    aspect="auto",
    cmap="magma",
)
for h in poly.hrep:
    a = np.asarray(h.a, dtype=float)
    a = 20 * a / np.linalg.norm(a)
    ax1.plot([0, a[0]], [0, a[1]], "c-", lw=1)
ax1.set(
    xlim=(grid.theta1[0], grid.theta1[-1]),
    ylim=(grid.theta2[0], grid.theta2[-1]),
    xlabel="theta1",
    ylabel="theta2",
    title="S(theta) with fan rays: ridges follow the outward normals",
)
fig.colorbar(im, ax=ax1)

mp = np.array(mean_pts, dtype=float)
sc = ax2.scatter(mp[:, 0], mp[:, 1], c=mean_vals, cmap="magma", s=16)
ring = list(poly.vertices) + [poly.vertices[0]]
ax2.plot(*zip(*ring), "r-", lw=1)
ax2.set(xlabel="edges", ylabel="triangles", title="V(mu): smooth over the support")
fig.colorbar(sc, ax=ax2)
fig.tight_layout()
fig.savefig(out / "03_entropy_landscape.png", dpi=120)
print(f"wrote {out / '03_entropy_landscape.png'}")

# the published plotting box, for comparison with the origin-centered view
pub = fm.entropy_grid(fam, ((10, 25), (-25, 10)), (64, 64))
fig2, ax = plt.subplots(figsize=(5.5, 4.4))
im = ax.imshow(
    pub.entropy.T,
    origin="lower",
    extent=(10, 25, -25, 10),
    aspect="auto",
    cmap="magma",
)
ax.set(xlabel="theta1", ylabel="theta2", title="S(theta) over the published box")
fig2.colorbar(im, ax=ax)
fig2.tight_layout()
fig2.savefig(out / "03_entropy_published_box.png", dpi=120)
print(f"wrote {out / '03_entropy_published_box.png'}")
