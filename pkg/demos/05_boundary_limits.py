"""Boundary limits along rays theta + rho*d.

Scaling any direction d to infinity drives the family to the face whose
normal cone holds d: densities converge in total variation to the
face-restricted family, means converge to the face, the Fisher matrix
degenerates to rank dim(F), and the entropy converges to the face family's
value.  Directions are classified exactly against the fan.
"""

from pathlib import Path

import numpy as np

from ergfan import enumeration as en
from ergfan import family as fm
from ergfan import geometry as geo
from ergfan import limits as lim

data = Path(__file__).resolve().parent.parent / "src" / "ergfan" / "data"
m9 = en.measure_from_json((data / "g9_edges_triangles.json").read_text())
fam = fm.ExpFamily.from_measure(m9)
poly = geo.build_polytope(m9)
faces = geo.face_lattice(poly)
fan = geo.normal_fan(poly, faces)


def show(seq, label):
    d = lim.run_ray(fam, faces, fan, seq)
    print(f"\n--- {label}: target face {d.face_id} (dim {d.dim}), "
          f"eta = {np.round(d.eta, 4)}")
    print("        rho           TV     mean gap   min Fisher eig      entropy")
    for r in d.records[::4] + [d.records[-1]]:
        print(f"   {r.rho:>8.0f}   {r.tv:.3e}   {r.mean_gap:.3e}"
              f"   {r.fisher_min_eig:.3e}   {r.entropy:>12.6f}")
    print(f"   verdicts: {d.verdicts}")
    print(f"   target entropy {d.target_entropy:.6f}, "
          f"target mean {np.round(d.target_mean, 4)}")


# the bottom-edge normal: convergence to the 21-point triangle-free family
show(lim.RaySequence.make((0.0, 0.0), (0, -1)), "d = (0,-1), edge normal")

# deep inside the empty-graph vertex cone: point mass, entropy -> 0
d_exact = geo.sample_ri_direction_exact(fan["V0"], 7)
show(lim.RaySequence.make((0.0, 0.0), d_exact), f"d = {d_exact}, vertex cone")

# increasing edge weight: the complete graph wins (vertex (36,84))
show(lim.RaySequence.make((0.0, 0.0), (1, 0)), "d = (1,0)")

# --- recession cones --------------------------------------------------------

print("\nrecession behavior of the log-likelihood at x = (0,0):")
rep = lim.recession_check(fam, faces, fan, (0, 0), rng=1)
for r in rep.recession:
    print(f"   d = {r['d']} in N_F: bounded={r['bounded']}, "
          f"tail nondecreasing={r['tail_nondecreasing']}, "
          f"final loglik {r['loglik'][-1]:.3f}")
for r in rep.non_recession:
    print(f"   d = {r['d']} outside N_F: diverged={r['diverged']}, "
          f"final loglik {r['loglik'][-1]:.3e}")

# --- Fisher and entropy limits ----------------------------------------------

seq = lim.RaySequence.make((0.4, 0.0), (0, -1))
frep = lim.fisher_limit_check(fam, faces, fan, seq)
print(f"\nFisher limit along (0,-1): entrywise gap {frep.entry_gap:.2e}, "
      f"limit rank {frep.limit_rank} = dim(F) = {frep.dim}")
erep = lim.entropy_limit_check(fam, faces, fan, seq)
print(f"entropy limit: gap {erep.entropy_gap:.2e} "
      f"(target {erep.target_entropy:.6f})")

# equivalent starting points give the same limit (non-identifiability)
for theta0 in [(0.4, 3.0), (0.4, -8.0)]:
    e = lim.entropy_limit_check(fam, faces, fan, lim.RaySequence.make(theta0, (0, -1)))
    print(f"   theta0 = {theta0}: same target entropy {e.target_entropy:.6f}")
