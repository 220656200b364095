"""Exponential-family numerics over an induced measure: log-partition,
mean map, Fisher information, entropy in both parametrizations, and
face-restricted families.

Everything is computed over the support points with shifted log-sum-exp;
support sets here are small (hundreds of points), so stability rather than
speed is the concern.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .enumeration import InducedMeasure
from .geometry import Face, FaceLattice, classify_point

ENTROPY_NEG_GUARD = 1e-8


class FamilyError(ValueError):
    """Invalid family construction or evaluation request."""


class ExpFamily:
    """Discrete linear exponential family with base measure nu given by
    point counts.  Immutable and shareable across threads."""

    def __init__(
        self,
        points: Sequence[Sequence[float]],
        counts: Sequence[int],
        g: int | None = None,
        stats: tuple | None = None,
        face_id: str | None = None,
        lattice_points: tuple | None = None,
    ):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2 or len(self.points) == 0:
            raise FamilyError("need a nonempty 2-D array of support points")
        self.counts = tuple(int(c) for c in counts)
        if len(self.counts) != len(self.points):
            raise FamilyError("counts and points length mismatch")
        if any(c <= 0 for c in self.counts):
            raise FamilyError("all support counts must be positive")
        self.log_counts = np.array([math.log(c) for c in self.counts])
        self.total = sum(self.counts)
        self.g = g
        self.stats = stats
        self.face_id = face_id
        # exact integer coordinates, present when built from a lattice measure
        self.lattice_points = lattice_points

    @property
    def k(self) -> int:
        return self.points.shape[1]

    @property
    def n(self) -> int:
        return len(self.points)

    @classmethod
    def from_measure(cls, m: InducedMeasure) -> "ExpFamily":
        items = list(m.support_items())
        pts = tuple(tuple(int(x) for x in t) for t, _ in items)
        return cls(
            [list(t) for t in pts],
            [c for _, c in items],
            g=m.g,
            stats=m.stats,
            lattice_points=pts,
        )

    def restrict(self, member_points: Sequence[tuple], face_id: str) -> "ExpFamily":
        members = set(tuple(int(x) for x in t) for t in member_points)
        if self.lattice_points is None:
            raise FamilyError("restriction requires a lattice-backed family")
        idx = [i for i, t in enumerate(self.lattice_points) if t in members]
        if not idx:
            raise FamilyError(f"face {face_id} has no support points")
        return ExpFamily(
            self.points[idx],
            [self.counts[i] for i in idx],
            g=self.g,
            stats=self.stats,
            face_id=face_id,
            lattice_points=tuple(self.lattice_points[i] for i in idx),
        )

    def index_of(self, t) -> int:
        key = tuple(int(x) for x in t)
        if self.lattice_points is None:
            raise FamilyError("lattice lookup requires a lattice-backed family")
        try:
            return self.lattice_points.index(key)
        except ValueError:
            raise FamilyError(f"{key} is not a support point") from None


@dataclass(frozen=True)
class FamilyEval:
    """One evaluation of the family at a natural parameter: log-partition,
    mean, Fisher information, entropy, and the probability mass of every
    support point."""

    theta: np.ndarray
    psi: float
    mean: np.ndarray
    fisher: np.ndarray
    entropy: float
    probs: np.ndarray

    def prob_of(self, fam: ExpFamily, t) -> float:
        return float(self.probs[fam.index_of(t)])

    def log_density(self, x) -> float:
        """log p_theta(x) = <x, theta> - psi (density w.r.t. the base
        measure, defined for any x)."""
        return float(np.dot(np.asarray(x, dtype=float), self.theta) - self.psi)


def eval_family(fam: ExpFamily, theta) -> FamilyEval:
    """Evaluate psi, the mean, the Fisher matrix, the entropy, and all point
    masses at theta, via shifted log-sum-exp."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (fam.k,):
        raise FamilyError(f"theta must have shape ({fam.k},)")
    if not np.all(np.isfinite(theta)):
        raise FamilyError("theta must be finite")
    w = fam.points @ theta + fam.log_counts
    m = float(np.max(w))
    psi = m + math.log(float(np.sum(np.exp(w - m))))
    shifted = w - psi
    probs = np.exp(shifted)
    mean = probs @ fam.points
    centered = fam.points - mean
    fisher = (centered * probs[:, None]).T @ centered
    # algebraically this is psi - <theta, mean>, but evaluated through the
    # already-shifted log masses: the literal closed form amplifies the
    # mean's roundoff by ||theta|| and loses the entropy limit at large rho
    entropy = float(-np.sum(probs * (shifted - fam.log_counts)))
    if entropy < 0:
        if entropy < -ENTROPY_NEG_GUARD:
            raise FamilyError(f"entropy {entropy} is negative beyond roundoff")
        entropy = 0.0
    return FamilyEval(theta, psi, mean, fisher, entropy, probs)


def entropy_sum(fam: ExpFamily, theta) -> float:
    """Definitional entropy -sum p log(p) nu; retained as the slow oracle
    for the closed form psi - <theta, mu>."""
    ev = eval_family(fam, theta)
    mask = ev.probs > 0
    # p_theta(t) = mass / nu(t); the sum below is -sum mass * log(p_theta)
    log_p = np.log(ev.probs[mask]) - fam.log_counts[mask]
    return float(-np.sum(ev.probs[mask] * log_p))


@dataclass(frozen=True)
class FaceFamily:
    """The family restricted to one face: its measure keeps only the face
    members, densities are invariant under shifts along lin(N_F), and only
    directions orthogonal to lin(N_F) are identifiable."""

    face_id: str
    dim: int
    family: ExpFamily
    lin_basis: tuple
    identifiable_basis: tuple

    def eval(self, theta) -> FamilyEval:
        return eval_family(self.family, theta)

    def project_identifiable(self, theta) -> np.ndarray:
        """Component of theta orthogonal to lin(N_F): the canonical
        representative of theta's congruence class."""
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for u in self.identifiable_basis:
            u = np.asarray(u, dtype=float)
            out += (theta @ u) * u
        return out


def face_family(fam: ExpFamily, faces: FaceLattice, face_id: str) -> FaceFamily:
    """Restrict the family to the members of one face."""
    face = faces[face_id]
    if not face.members:
        raise FamilyError(f"face {face_id} has no members")
    hrep = faces.polytope.hrep
    normals = tuple(hrep[i].a for i in face.active_rows)
    if face.dim == 2:
        restricted = fam
        identifiable = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    else:
        restricted = fam.restrict(face.members, face_id)
        if face.dim == 1:
            ax, ay = normals[0]
            u = np.array([-float(ay), float(ax)])
            identifiable = (u / np.linalg.norm(u),)
        else:
            identifiable = ()
    return FaceFamily(face_id, face.dim, restricted, normals, identifiable)


@dataclass(frozen=True)
class EntropyGrid:
    """Row-major grid of family evaluations over a theta box."""

    theta1: np.ndarray
    theta2: np.ndarray
    psi: np.ndarray
    mean: np.ndarray
    entropy: np.ndarray

    def to_csv(self) -> str:
        lines = ["theta1,theta2,psi,mu1,mu2,entropy"]
        n1, n2 = self.entropy.shape
        for i in range(n1):
            for j in range(n2):
                lines.append(
                    f"{self.theta1[i]!r},{self.theta2[j]!r},{self.psi[i, j]!r},"
                    f"{self.mean[i, j, 0]!r},{self.mean[i, j, 1]!r},"
                    f"{self.entropy[i, j]!r}"
                )
        return "\n".join(lines) + "\n"


def entropy_grid(fam: ExpFamily, theta_box, resolution) -> EntropyGrid:
    """Evaluate the family on an n1 x n2 grid over the closed theta box
    ((t1min, t1max), (t2min, t2max)), row-major with axis 1 outermost."""
    if fam.k != 2:
        raise FamilyError("entropy grids are 2-D")
    (a1, b1), (a2, b2) = theta_box
    n1, n2 = resolution
    if n1 < 1 or n2 < 1:
        raise FamilyError("resolution must be at least 1x1")
    if not all(math.isfinite(v) for v in (a1, b1, a2, b2)):
        raise FamilyError("theta box must be finite")
    t1 = np.linspace(a1, b1, n1)
    t2 = np.linspace(a2, b2, n2)
    psi = np.zeros((n1, n2))
    mean = np.zeros((n1, n2, 2))
    ent = np.zeros((n1, n2))
    for i, x in enumerate(t1):
        for j, y in enumerate(t2):
            ev = eval_family(fam, (x, y))
            psi[i, j] = ev.psi
            mean[i, j] = ev.mean
            ent[i, j] = ev.entropy
    return EntropyGrid(t1, t2, psi, mean, ent)


def mean_entropy(fam: ExpFamily, faces: FaceLattice, mu, tol: float = 0) -> float:
    """Entropy as a function of the mean-value parameter: the entropy of
    the (face-)family member whose mean is mu."""
    from . import mle  # local import; mle builds on this module

    face = classify_point(faces.polytope, faces, mu, tol=tol)
    if face is None:
        raise FamilyError(f"mean {tuple(mu)} lies outside the convex support")
    mu_f = np.asarray([float(v) for v in mu])
    if face.dim == 2:
        return mle.solve_mle(fam, mu_f).entropy
    if face.dim == 0:
        return 0.0
    ff = face_family(fam, faces, face.id)
    theta_f, ev = mle.solve_face_moment(ff, mu_f)
    return ev.entropy


def linear_reparam(fam: ExpFamily, L) -> ExpFamily:
    """Pushforward family over the transformed statistics L @ t, merging
    coinciding transformed points by adding their counts."""
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[1] != fam.k:
        raise FamilyError(f"L must be r x {fam.k}")
    r = L.shape[0]
    span = fam.points - fam.points[0]
    if np.linalg.matrix_rank(L @ span.T) < r:
        raise FamilyError("L is rank-deficient on the affine hull of the support")
    merged: dict[tuple, int] = {}
    for t, c in zip(fam.points, fam.counts):
        key = tuple(float(v) for v in (L @ t))
        merged[key] = merged.get(key, 0) + c
    items = sorted(merged.items())
    return ExpFamily(
        [list(t) for t, _ in items],
        [c for _, c in items],
        g=fam.g,
        stats=None,
    )


def alternating_kstar_weights(g: int, lam: float) -> np.ndarray:
    """Row vector of alternating k-star weights (-1)**(i-1) / lam**(2-i)
    over i = 2..g-1, aligned with the statistic vector
    (k_star(2), ..., k_star(g-1)); lam > 0 is a required user choice."""
    if lam <= 0:
        raise FamilyError("lam must be positive")
    return np.array([[(-1.0) ** (i - 1) / lam ** (2 - i) for i in range(2, g)]])


def uniform_mean(fam: ExpFamily) -> np.ndarray:
    """Mean at theta = 0 (the nu-weighted centroid)."""
    return eval_family(fam, np.zeros(fam.k)).mean
