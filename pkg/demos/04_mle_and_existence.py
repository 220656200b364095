"""Ordinary and extended maximum likelihood, and existence certification.

The MLE exists exactly for observations in the relative interior of the
support polygon.  Boundary observations still have a well-defined extended
MLE: the face-restricted fit, identifiable only up to shifts along the
span of the face's normal cone.
"""

import time
from pathlib import Path

import numpy as np

from ergfan import enumeration as en
from ergfan import family as fm
from ergfan import geometry as geo
from ergfan import lp
from ergfan import mle

m7 = en.enumerate_measure(7, (en.edges(), en.triangles()))
fam = fm.ExpFamily.from_measure(m7)
poly = geo.build_polytope(m7)
faces = geo.face_lattice(poly)
fan = geo.normal_fan(poly, faces)

# --- interior solve --------------------------------------------------------

x = (10.0, 4.0)
res = mle.solve_mle(fam, x)
print(f"MLE at x={x}: theta_hat = {np.round(res.theta_hat, 6)}, "
      f"residual {res.grad_norm:.2e}, {res.iterations} Newton steps")
print(f"entropy at the fit: {res.entropy:.4f}")
rep = mle.conditioning_report(fam, res.theta_hat)
print(f"Fisher eigenvalues {np.round(rep.eigenvalues, 4)}, "
      f"condition number {rep.condition_number:.1f}")

# --- boundary: the interior solver refuses, the extended MLE answers -------

x_b = (12, 0)
try:
    mle.solve_mle(fam, np.asarray(x_b, dtype=float))
except mle.SolverDivergence as exc:
    print(f"\ninterior solver at boundary x={x_b}: {exc}")
r = mle.extended_mle(fam, faces, fan, x_b)
print(f"extended MLE: face {r.face_id} (dim {r.dim}), canonical rep "
      f"{np.round(r.canonical_rep, 6)}")
print(f"non-identifiable directions lin(N_F) = {r.lin_basis}; "
      f"solution set = rep + span(lin_basis)")
print(f"face moment residual {r.residual:.2e}, Fisher rank {r.fisher_rank} "
      f"= dim(F), limiting entropy {r.entropy:.4f}")

# deep inside a normal cone the Fisher matrix degenerates: Newton-style
# optimizers lose their footing exactly where the MLE stops existing
for rho in (5, 15, 30):
    rep = mle.conditioning_report(fam, rho * np.array([0.0, -1.0]))
    print(f"conditioning at theta = (0, -{rho}): eigenvalues "
          f"{tuple(f'{v:.2e}' for v in rep.eigenvalues)}")

# --- existence: three independent exact routes -----------------------------

print("\nexistence routes on every support point:")
t0 = time.time()
verdicts = {}
for t in poly.support_points:
    v = mle.check_existence(fam, faces, t)
    verdicts[t] = v.exists
n_in = sum(verdicts.values())
print(f"   {len(verdicts)} points: {n_in} interior, "
      f"{len(verdicts) - n_in} boundary; all 3 routes unanimous "
      f"[{time.time() - t0:.1f}s]")

# route timing comparison on one interior and one boundary point
pts = tuple(poly.support_points)
B_cols = [[t[j] for t in pts] for j in range(2)] + [[1] * len(pts)]
for x_t in [(10, 4), (12, 0)]:
    t0 = time.time()
    lp.relint_feasibility(B_cols, [x_t[0], x_t[1], 1])
    t_relint = time.time() - t0
    t0 = time.time()
    mle._existence_gordan(pts, x_t)
    t_gordan = time.time() - t0
    print(f"   x={x_t}: relint LP {1e3 * t_relint:.1f} ms, "
          f"alternative route {1e3 * t_gordan:.1f} ms")

# a raw Gordan certificate, verified by substitution
g = lp.gordan_alternative([[t[0] - 0, t[1] - 0] for t in pts if t != (0, 0)])
print(f"\ntranslating by the vertex (0,0): alternative {g.alternative} "
      f"(strict separator u = {g.x_witness})")
