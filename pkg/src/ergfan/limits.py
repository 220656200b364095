"""Numerical verification harness for boundary limits of the family:
ray sequences theta + rho*d, convergence of densities and means to face
families, recession behavior of the log-likelihood, and Fisher
degeneration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .family import ExpFamily, FaceFamily, eval_family, face_family
from .geometry import (
    FaceLattice,
    NormalFan,
    classify_direction,
    cone_contains,
    sample_ri_direction_exact,
)

DEFAULT_RHOS = tuple(float(2**i) for i in range(21))
CONVERGENCE_TOL = 1e-6
LOGLIK_FLOOR = -1e3
MONOTONE_SLACK = 1e-12
# masses at rho = 2^20 carry relative roundoff of order eps * rho * <d, t>,
# about 1e-9; the relative slack absorbs it without masking real decreases
MONOTONE_REL_SLACK = 1e-8
RANK_EIG_TOL = 1e-8


class LimitsError(ValueError):
    """Invalid ray or diagnostic request."""


@dataclass(frozen=True)
class RaySequence:
    """Natural parameters theta0 + rho * d along a fixed unit direction d
    and an increasing schedule of nonnegative scale factors rho."""

    theta0: np.ndarray
    d: np.ndarray
    rhos: tuple[float, ...]
    d_exact: tuple | None = None

    @classmethod
    def make(cls, theta0, d, rhos=None, d_exact=None) -> "RaySequence":
        theta0 = np.asarray(theta0, dtype=float)
        if d_exact is None and all(float(v).is_integer() for v in d):
            d_exact = tuple(int(v) for v in d)
        dv = np.asarray(d, dtype=float)
        nrm = float(np.linalg.norm(dv))
        if nrm == 0:
            raise LimitsError(
                "d = 0 is not a valid ray direction (the scaled sequence "
                "never leaves theta0)"
            )
        rhos = tuple(float(r) for r in (DEFAULT_RHOS if rhos is None else rhos))
        if any(b <= a for a, b in zip(rhos, rhos[1:])) or any(r < 0 for r in rhos):
            raise LimitsError("rhos must be nonnegative and strictly increasing")
        return cls(theta0, dv / nrm, rhos, d_exact)


@dataclass(frozen=True)
class RayRecord:
    rho: float
    tv: float
    mean_gap: float
    loglik: float
    fisher_min_eig: float
    entropy: float
    kl: float


@dataclass
class LimitDiagnostics:
    """Per-rho convergence records of a ray run against its target face
    family, plus summary verdict flags."""

    face_id: str
    dim: int
    eta: np.ndarray
    x_ref: tuple
    records: list[RayRecord]
    target_entropy: float
    target_mean: np.ndarray
    verdicts: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["rho,tv,mean_gap,loglik,fisher_min_eig,entropy"]
        for r in self.records:
            lines.append(
                f"{r.rho!r},{r.tv!r},{r.mean_gap!r},{r.loglik!r},"
                f"{r.fisher_min_eig!r},{r.entropy!r}"
            )
        return "\n".join(lines) + "\n"


def _target_face(fam: ExpFamily, faces: FaceLattice, fan: NormalFan, seq: RaySequence,
                 tol: float):
    if seq.d_exact is not None:
        cone = classify_direction(fan, seq.d_exact, tol=0)
    else:
        cone = classify_direction(fan, seq.d, tol=tol)
    face = faces[cone.face_id]
    if face.dim == 2:
        raise LimitsError("nonzero directions always map to a proper face")
    return face


def _full_mass(fam: ExpFamily, ff: FaceFamily, probs: np.ndarray) -> np.ndarray:
    out = np.zeros(fam.n)
    for i, t in enumerate(ff.family.lattice_points):
        out[fam.index_of(t)] = probs[i]
    return out


def run_ray(
    fam: ExpFamily,
    faces: FaceLattice,
    fan: NormalFan,
    seq: RaySequence,
    x_ref=None,
    tol: float = 1e-9,
    jitter: float = 0.0,
    rng=None,
) -> LimitDiagnostics:
    """Drive theta along the ray and record, per rho, the total-variation
    distance to the target face density, the mean gap, the log-likelihood at
    a reference point, the smallest Fisher eigenvalue, the entropy, and the
    KL divergence of the running density from the target.

    The target face is the one whose normal cone's relative interior
    contains d; the target density is the face family evaluated at the
    identifiable projection of theta0.  jitter > 0 wobbles the direction
    within the cone with radius shrinking as 1/n (2-D cones only).
    """
    face = _target_face(fam, faces, fan, seq, tol)
    ff = face_family(fam, faces, face.id)
    eta = ff.project_identifiable(seq.theta0)
    target = ff.eval(eta)
    target_full = _full_mass(fam, ff, target.probs)
    if x_ref is None:
        x_ref = ff.family.lattice_points[int(np.argmax(target.probs))]
    x_ref = tuple(int(v) for v in x_ref)
    xv = np.asarray(x_ref, dtype=float)

    cone = fan[face.id]
    rng = np.random.default_rng(rng)
    member_idx = [fam.index_of(t) for t in ff.family.lattice_points]
    records: list[RayRecord] = []
    member_masses = []
    for i, rho in enumerate(seq.rhos):
        d_n = seq.d
        if jitter > 0 and cone.dim == 2:
            eps = jitter / (i + 1)
            alt = np.asarray(sample_ri_direction_exact(cone, rng), dtype=float)
            d_n = (1 - eps) * seq.d + eps * alt / np.linalg.norm(alt)
            d_n = d_n / np.linalg.norm(d_n)
        ev = eval_family(fam, seq.theta0 + rho * d_n)
        tv = 0.5 * float(np.sum(np.abs(ev.probs - target_full)))
        mean_gap = float(np.linalg.norm(ev.mean - target.mean))
        loglik = ev.log_density(xv)
        min_eig = float(np.linalg.eigvalsh(ev.fisher)[0])
        mask = target.probs > 0
        ratios = np.log(target.probs[mask]) - np.log(
            np.maximum(ev.probs[member_idx][mask], 1e-320)
        )
        kl = float(np.sum(target.probs[mask] * ratios))
        records.append(
            RayRecord(rho, tv, mean_gap, loglik, min_eig, ev.entropy, kl)
        )
        member_masses.append(ev.probs[member_idx])

    monotone = all(
        bool(np.all(b >= a - (MONOTONE_SLACK + MONOTONE_REL_SLACK * a)))
        for a, b in zip(member_masses, member_masses[1:])
    )
    last = records[-1]
    diags = LimitDiagnostics(
        face.id,
        face.dim,
        eta,
        x_ref,
        records,
        target.entropy,
        target.mean,
    )
    diags.verdicts = {
        "tv_converged": last.tv < CONVERGENCE_TOL,
        "mean_converged": last.mean_gap < CONVERGENCE_TOL,
        "kl_converged": last.kl < CONVERGENCE_TOL,
        "entropy_gap": abs(last.entropy - target.entropy),
        "member_density_monotone": monotone,
    }
    return diags


@dataclass
class RecessionReport:
    face_id: str
    dim: int
    recession: list
    non_recession: list

    @property
    def all_verified(self) -> bool:
        return all(r["bounded"] and r["tail_nondecreasing"] for r in self.recession) and all(
            r["diverged"] for r in self.non_recession
        )


def recession_check(
    fam: ExpFamily,
    faces: FaceLattice,
    fan: NormalFan,
    x,
    n_dirs: int = 3,
    rng=None,
    rhos=None,
    floor: float = LOGLIK_FLOOR,
) -> RecessionReport:
    """For the face F carrying x: the log-likelihood at x stays bounded and
    eventually nondecreasing along directions inside N_F, and falls below
    the floor along directions outside N_F."""
    from .geometry import classify_point

    xt = tuple(int(v) for v in x)
    face = classify_point(faces.polytope, faces, xt, tol=0)
    if face is None:
        raise LimitsError(f"{xt} lies outside the support polytope")
    cone = fan[face.id]
    rng = np.random.default_rng(rng)
    rhos = tuple(float(r) for r in (DEFAULT_RHOS if rhos is None else rhos))
    xv = np.asarray(xt, dtype=float)

    def loglik_path(d_unit):
        out = []
        for rho in rhos:
            ev = eval_family(fam, rho * d_unit)
            out.append(ev.log_density(xv))
        return out

    recession = []
    if not cone.is_zero:
        for _ in range(n_dirs):
            d_exact = sample_ri_direction_exact(cone, rng)
            d = np.asarray(d_exact, dtype=float)
            d = d / np.linalg.norm(d)
            path = loglik_path(d)
            tail = path[len(path) // 2 :]
            recession.append(
                {
                    "d": d_exact,
                    "loglik": path,
                    "bounded": path[-1] > floor,
                    "tail_nondecreasing": all(
                        b >= a - MONOTONE_SLACK for a, b in zip(tail, tail[1:])
                    ),
                }
            )

    non_recession = []
    tries = 0
    while len(non_recession) < n_dirs and tries < 1000:
        tries += 1
        raw = rng.integers(-50, 51, size=fam.k)
        if not np.any(raw):
            continue
        if cone_contains(cone, tuple(int(v) for v in raw)):
            continue
        d = raw.astype(float)
        d = d / np.linalg.norm(d)
        path = loglik_path(d)
        non_recession.append(
            {
                "d": tuple(int(v) for v in raw),
                "loglik": path,
                "diverged": path[-1] < floor,
            }
        )
    return RecessionReport(face.id, face.dim, recession, non_recession)


@dataclass
class FisherLimitReport:
    face_id: str
    dim: int
    entry_gap: float
    limit_rank: int
    eigenvalues: tuple
    rank_matches_dim: bool
    converged: bool


def fisher_limit_check(
    fam: ExpFamily,
    faces: FaceLattice,
    fan: NormalFan,
    seq: RaySequence,
    tol: float = 1e-9,
) -> FisherLimitReport:
    """Entrywise convergence of the Fisher matrix along the ray to the face
    family's Fisher matrix at the projected parameter, whose rank equals the
    face dimension."""
    face = _target_face(fam, faces, fan, seq, tol)
    ff = face_family(fam, faces, face.id)
    eta = ff.project_identifiable(seq.theta0)
    target = ff.eval(eta)
    ev = eval_family(fam, seq.theta0 + seq.rhos[-1] * seq.d)
    gap = float(np.max(np.abs(ev.fisher - target.fisher)))
    eigs = np.linalg.eigvalsh(target.fisher)
    rank = int(np.sum(eigs > RANK_EIG_TOL))
    return FisherLimitReport(
        face.id,
        face.dim,
        gap,
        rank,
        tuple(float(v) for v in eigs),
        rank == face.dim,
        gap < CONVERGENCE_TOL,
    )


@dataclass
class EntropyLimitReport:
    face_id: str
    dim: int
    entropy_gap: float
    target_entropy: float
    converged: bool


def entropy_limit_check(
    fam: ExpFamily,
    faces: FaceLattice,
    fan: NormalFan,
    seq: RaySequence,
    tol: float = 1e-9,
) -> EntropyLimitReport:
    """Convergence of the family entropy along the ray to the face family's
    entropy at the projected parameter."""
    face = _target_face(fam, faces, fan, seq, tol)
    ff = face_family(fam, faces, face.id)
    eta = ff.project_identifiable(seq.theta0)
    target = ff.eval(eta)
    ev = eval_family(fam, seq.theta0 + seq.rhos[-1] * seq.d)
    gap = abs(ev.entropy - target.entropy)
    return EntropyLimitReport(face.id, face.dim, gap, target.entropy, gap < CONVERGENCE_TOL)
