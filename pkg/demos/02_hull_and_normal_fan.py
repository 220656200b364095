"""Convex support, face lattice, and normal fan of the 9-node example.

Every computation here is exact: integer hulls, primitive outward normals,
and rational tight-row tests.
"""

from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ergfan import enumeration as en
from ergfan import geometry as geo

data = Path(__file__).resolve().parent.parent / "src" / "ergfan" / "data"
m9 = en.measure_from_json((data / "g9_edges_triangles.json").read_text())

poly = geo.build_polytope(m9)
faces = geo.face_lattice(poly)
fan = geo.normal_fan(poly, faces)

print("vertices (counter-clockwise):", list(poly.vertices))
print("H-representation <a, t> <= b:")
for h in poly.hrep:
    print(f"   a = {h.a!s:>9}  b = {h.b}")

boundary = faces.boundary_points()
print(f"\n{len(poly.support_points)} support points: "
      f"{len(boundary)} on the boundary, {len(faces.interior_points())} interior")

for f in faces:
    cone = fan[f.id]
    print(f"   face {f.id}: dim {f.dim}, {len(f.members):>3} members, "
          f"cone generators {cone.generators}")

# classification is exact for rational queries
for x in [(10, 0), (0, 0), (18, Fraction(21, 2)), (36, 85)]:
    f = geo.classify_point(poly, faces, x)
    where = "outside" if f is None else f"{f.id} (dim {f.dim})"
    print(f"classify {tuple(map(str, x))}: {where}")

# directions classify into the fan the same way
for d in [(0, -1), (1, 0), (-3, 1)]:
    cone = geo.classify_direction(fan, d)
    print(f"direction {d} lies in the cone of face {cone.face_id}")

# --- picture: support, hull, and fan rays ---------------------------------

out = Path(__file__).resolve().parent / "output"
out.mkdir(exist_ok=True)
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))

pts = np.array(poly.support_points)
counts = np.array([m9.count(t) for t in poly.support_points], dtype=float)
shade = np.sqrt(counts / counts.max())
ax1.scatter(pts[:, 0], pts[:, 1], c=shade, cmap="viridis", s=14)
ring = list(poly.vertices) + [poly.vertices[0]]
ax1.plot(*zip(*ring), "r-", lw=1.5)
bd = np.array(sorted(boundary))
ax1.scatter(bd[:, 0], bd[:, 1], facecolors="none", edgecolors="red", s=40, lw=0.8)
ax1.set(xlabel="edges", ylabel="triangles", title="support, hull, boundary points")

for h in poly.hrep:
    a = np.asarray(h.a, dtype=float)
    a = a / np.linalg.norm(a)
    ax2.plot([0, 2 * a[0]], [0, 2 * a[1]], "-", lw=2, label=str(h.a))
ax2.set(title="normal fan: edge-cone rays (vertex cones are the sectors)")
ax2.legend(fontsize=7)
ax2.set_aspect("equal")
fig.tight_layout()
fig.savefig(out / "02_hull_and_fan.png", dpi=120)
print(f"\nwrote {out / '02_hull_and_fan.png'}")
