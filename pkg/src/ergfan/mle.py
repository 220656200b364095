"""Maximum likelihood and extended maximum likelihood over the family:
damped Newton for interior points, face-restricted solves for boundary
points, existence certification by three independent exact routes, and
conditioning diagnostics.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import lp
from .family import ExpFamily, FaceFamily, FamilyEval, eval_family, face_family
from .geometry import (
    FaceLattice,
    GeometryError,
    SupportPolytope,
    build_polytope,
    classify_point,
    face_lattice,
)

DIVERGENCE_NORM = 1e3
MAX_HALVINGS = 30
FACE_MOMENT_TOL = 1e-9
RANK_EIG_TOL = 1e-8


class MleError(ValueError):
    """Invalid request (point outside the support polytope, bad shapes)."""


class SolverDivergence(RuntimeError):
    """The interior Newton solver hit its divergence guard; the MLE appears
    nonexistent or the problem is ill-conditioned."""


_POLY_CACHE: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _strictly_interior(fam: ExpFamily, x) -> bool | None:
    """Exact strict-interiority test of x against the family's support hull,
    when the family carries 2-D lattice points; None when unavailable.

    In double precision the Newton iterates for a boundary x stall into a
    spurious residual "convergence" once the off-face mass underflows (at
    ||theta|| far below the norm guard), so the solver re-verifies the
    interior precondition exactly instead of relying on the guard alone.
    """
    if fam.lattice_points is None or fam.k != 2:
        return None
    if fam not in _POLY_CACHE:
        try:
            _POLY_CACHE[fam] = build_polytope(fam.lattice_points)
        except GeometryError:
            _POLY_CACHE[fam] = None
    poly = _POLY_CACHE[fam]
    if poly is None:
        return None
    return poly.contains(tuple(Fraction(float(v)) for v in x), strict=True)


@dataclass(frozen=True)
class MleResult:
    theta_hat: np.ndarray
    iterations: int
    grad_norm: float
    fisher: np.ndarray
    entropy: float


def solve_mle(fam: ExpFamily, x, tol: float = 1e-10, max_iter: int = 200) -> MleResult:
    """Damped Newton for the moment equation mean(theta) = x, started at
    theta = 0, with a backtracking line search on psi(theta) - <theta, x>.

    Raises SolverDivergence when ||theta|| exceeds the guard or the
    iteration/line-search budget is exhausted, which is the expected outcome
    for x outside the relative interior of the support polytope.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (fam.k,):
        raise MleError(f"x must have shape ({fam.k},)")
    if not np.all(np.isfinite(x)):
        raise MleError("x must be finite")
    if _strictly_interior(fam, x) is False:
        raise SolverDivergence(
            "MLE appears nonexistent or ill-conditioned: x is not in the "
            "relative interior of the convex support"
        )
    theta = np.zeros(fam.k)
    ev = eval_family(fam, theta)
    obj = ev.psi - float(theta @ x)
    for it in range(1, max_iter + 1):
        grad = ev.mean - x
        gn = float(np.linalg.norm(grad))
        if gn < tol:
            return MleResult(theta, it - 1, gn, ev.fisher, ev.entropy)
        try:
            step = np.linalg.solve(ev.fisher, -grad)
        except np.linalg.LinAlgError as exc:
            raise SolverDivergence(
                "MLE appears nonexistent or ill-conditioned: singular Fisher matrix"
            ) from exc
        t = 1.0
        # near the optimum the true decrease drops below float resolution of
        # the objective while the gradient is still above tol, so accept
        # steps within roundoff slack of the current value
        slack = 1e-12 * max(1.0, abs(obj))
        for _ in range(MAX_HALVINGS + 1):
            cand = theta + t * step
            ev_c = eval_family(fam, cand)
            obj_c = ev_c.psi - float(cand @ x)
            if obj_c < obj + slack:
                break
            t *= 0.5
        else:
            raise SolverDivergence(
                "MLE appears nonexistent or ill-conditioned: line search "
                f"failed after {MAX_HALVINGS} halvings"
            )
        theta, ev, obj = cand, ev_c, obj_c
        if float(np.linalg.norm(theta)) > DIVERGENCE_NORM:
            raise SolverDivergence(
                "MLE appears nonexistent or ill-conditioned: "
                f"||theta|| > {DIVERGENCE_NORM:g}"
            )
    raise SolverDivergence(
        f"MLE appears nonexistent or ill-conditioned: no convergence in "
        f"{max_iter} iterations"
    )


def solve_face_moment(ff: FaceFamily, x) -> tuple[np.ndarray, FamilyEval]:
    """Solve the face-restricted moment equation for a 1-D (edge) face by a
    scalar Newton iteration along the identifiable direction; returns the
    canonical representative s*u and the evaluation at it."""
    if ff.dim != 1:
        raise MleError("scalar face solve applies to edge faces only")
    x = np.asarray(x, dtype=float)
    (u,) = ff.identifiable_basis
    coords = ff.family.points @ u
    target = float(x @ u)
    if not coords.min() < target < coords.max():
        raise MleError(
            f"{tuple(x)} is not in the relative interior of the face's "
            "member range; the face moment equation has no solution"
        )
    s = 0.0
    for _ in range(100):
        theta = s * u
        ev = eval_family(ff.family, theta)
        resid = float(np.linalg.norm(ev.mean - x))
        if resid < FACE_MOMENT_TOL:
            return theta, ev
        mean_c = float(coords @ ev.probs)
        var_c = float(((coords - mean_c) ** 2) @ ev.probs)
        if var_c <= 0:
            raise SolverDivergence("degenerate variance in face moment solve")
        step = (target - mean_c) / var_c
        # damp oversized steps; the scalar objective is strictly convex
        if abs(step) > 50:
            step = math.copysign(50, step)
        s += step
        if abs(s) > DIVERGENCE_NORM:
            raise SolverDivergence(
                "face moment solve diverged; target likely on the face boundary"
            )
    raise SolverDivergence("face moment solve did not converge")


@dataclass(frozen=True)
class ExtendedMleResult:
    """Extended MLE at a support point: the face carrying it, the canonical
    parameter representative orthogonal to lin(N_F), the non-identifiable
    directions, and the limiting distribution's summaries.

    The full solution set is canonical_rep + span(lin_basis); the orthogonal
    representative is a convention of this toolkit, not a canonical object
    of the theory.
    """

    face_id: str
    dim: int
    canonical_rep: np.ndarray
    lin_basis: tuple
    mean: np.ndarray
    fisher: np.ndarray
    fisher_rank: int
    entropy: float
    residual: float
    iterations: int = 0

    def to_record(self, x) -> dict:
        eigs = sorted(float(v) for v in np.linalg.eigvalsh(self.fisher))
        return {
            "x": [float(v) for v in np.asarray(x, dtype=float)],
            "exists": self.dim == 2,
            "face_id": self.face_id,
            "dim": self.dim,
            "theta_rep": [float(v) for v in self.canonical_rep],
            "lin_basis": [list(map(int, b)) for b in self.lin_basis],
            "residual": self.residual,
            "entropy": self.entropy,
            "fisher_eigenvalues": eigs,
        }


def _fisher_rank(fisher: np.ndarray, tol: float = RANK_EIG_TOL) -> int:
    return int(np.sum(np.linalg.eigvalsh(fisher) > tol))


def extended_mle(fam: ExpFamily, faces: FaceLattice, fan, x) -> ExtendedMleResult:
    """Extended maximum likelihood at a lattice point of the support
    polytope: interior points delegate to the Newton solver, edge points to
    the scalar face solve, vertices to the point mass."""
    xt = tuple(int(v) for v in x)
    face = classify_point(faces.polytope, faces, xt, tol=0)
    if face is None:
        raise MleError(f"{xt} lies outside the support polytope")
    xf = np.asarray(xt, dtype=float)
    if face.dim == 2:
        res = solve_mle(fam, xf)
        return ExtendedMleResult(
            face_id=face.id,
            dim=2,
            canonical_rep=res.theta_hat,
            lin_basis=(),
            mean=xf,
            fisher=res.fisher,
            fisher_rank=_fisher_rank(res.fisher),
            entropy=res.entropy,
            residual=res.grad_norm,
            iterations=res.iterations,
        )
    ff = face_family(fam, faces, face.id)
    if face.dim == 1:
        theta_f, ev = solve_face_moment(ff, xf)
        return ExtendedMleResult(
            face_id=face.id,
            dim=1,
            canonical_rep=theta_f,
            lin_basis=ff.lin_basis,
            mean=ev.mean,
            fisher=ev.fisher,
            fisher_rank=_fisher_rank(ev.fisher),
            entropy=ev.entropy,
            residual=float(np.linalg.norm(ev.mean - xf)),
        )
    # vertex: the limiting distribution is the point mass at x on the
    # statistic lattice (uniform over the nu(x) graphs mapping there, so its
    # graph-level entropy is log nu(x))
    ev = ff.eval(np.zeros(fam.k))
    return ExtendedMleResult(
        face_id=face.id,
        dim=0,
        canonical_rep=np.zeros(fam.k),
        lin_basis=ff.lin_basis,
        mean=ev.mean,
        fisher=ev.fisher,
        fisher_rank=_fisher_rank(ev.fisher),
        entropy=ev.entropy,
        residual=float(np.linalg.norm(ev.mean - xf)),
    )


@dataclass
class ExistenceVerdict:
    exists: bool
    face_id: str | None
    routes: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)


def _exact_vec(x) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in x)


def _existence_hrep(p: SupportPolytope, x) -> tuple[bool, dict]:
    slacks = [h.slack(x) for h in p.hrep]
    exists = all(s > 0 for s in slacks)
    return exists, {"min_slack": str(min(slacks))}


def _existence_relint_lp(points: Sequence[tuple], x) -> tuple[bool, dict]:
    """The feasibility LP over all support-point columns with the
    convex-combination normalization row appended."""
    k = len(points[0])
    B = [[Fraction(t[j]) for t in points] for j in range(k)]
    B.append([Fraction(1)] * len(points))
    rhs = list(_exact_vec(x)) + [Fraction(1)]
    v = lp.relint_feasibility(B, rhs)
    return v.inside, {"s_star": None if v.s_star is None else str(v.s_star)}


def _existence_gordan(points: Sequence[tuple], x) -> tuple[bool, dict]:
    """Existence by exact alternatives on the support translated by x.

    The MLE exists iff the translated points admit a strictly positive
    balanced combination, and by scale invariance of the cone that is one
    exact feasibility LP: sum_i y_i (t_i - x) = 0 with y >= 1.  When it is
    feasible the solution is the strict witness; when it is infeasible the
    phase-1 Farkas duals give a supporting functional at x (all translated
    points weakly on one side, strictly in aggregate), and Gordan's
    alternative on the nonzero translated points further separates hull
    vertices and exterior points (strict separator, alternative 1) from
    higher-dimensional boundary faces (balanced combination, alternative 2).
    All certificates verify by substitution.
    """
    xe = _exact_vec(x)
    k = len(xe)
    rows = [tuple(Fraction(t[j]) - xe[j] for j in range(k)) for t in points]
    nonzero = [r for r in rows if any(v != 0 for v in r)]
    if not nonzero:
        raise MleError("support has a single point; not full-dimensional")
    n = len(rows)
    a_eq = [[rows[i][j] for i in range(n)] for j in range(k)]
    b_eq = [Fraction(0)] * k
    bounds = [(Fraction(1), None)] * n
    res = lp.simplex_solve(lp.DenseLP([Fraction(0)] * n, a_eq, b_eq, bounds))
    if res.status == "optimal":
        y = res.solution
        if any(v < 1 for v in y):
            raise RuntimeError("strict-combination certificate below bounds")
        for j in range(k):
            acc = sum((rows[i][j] * y[i] for i in range(n)), Fraction(0))
            if acc != 0:
                raise RuntimeError("strict-combination certificate unbalanced")
        return True, {"strict_combination_support": n}
    if res.status != "infeasible":  # pragma: no cover
        raise RuntimeError(f"balanced feasibility LP returned {res.status}")
    u = res.duals
    dots = [sum((r[j] * u[j] for j in range(k)), Fraction(0)) for r in rows]
    if all(d >= 0 for d in dots) and sum(dots) > 0:
        u = [-v for v in u]
        dots = [-d for d in dots]
    if any(d > 0 for d in dots) or sum(dots) >= 0:
        raise RuntimeError("supporting-functional certificate failed")
    witness = {"supporting_functional": [str(v) for v in u]}
    g1 = lp.gordan_alternative(nonzero)
    if g1.alternative == 1:
        witness["separator"] = [str(v) for v in g1.x_witness]
    else:
        witness["balanced_boundary_combination"] = True
    return False, witness


def check_existence(fam_or_points, geometry, x, run_all: bool = True) -> ExistenceVerdict:
    """Certify MLE existence for observation x.

    geometry may be a FaceLattice (preferred for k = 2: enables the exact
    strict H-rep test and face identification), a SupportPolytope, or None
    (LP routes only, any k).  All executed routes must agree; disagreement
    raises, since it would mean a defect in one of them.
    """
    if isinstance(fam_or_points, ExpFamily):
        if fam_or_points.lattice_points is None:
            raise MleError("existence checks need lattice support points")
        points = fam_or_points.lattice_points
    else:
        points = tuple(tuple(int(v) for v in t) for t in fam_or_points)

    faces: FaceLattice | None = None
    poly: SupportPolytope | None = None
    if isinstance(geometry, FaceLattice):
        faces, poly = geometry, geometry.polytope
    elif isinstance(geometry, SupportPolytope):
        poly = geometry
        faces = face_lattice(poly)

    routes: dict[str, bool] = {}
    witness: dict = {}
    if poly is not None:
        ok, w = _existence_hrep(poly, x)
        routes["hrep"] = ok
        witness["hrep"] = w
    if run_all or poly is None:
        ok, w = _existence_relint_lp(points, x)
        routes["relint_lp"] = ok
        witness["relint_lp"] = w
        ok, w = _existence_gordan(points, x)
        routes["gordan"] = ok
        witness["gordan"] = w

    verdicts = set(routes.values())
    if len(verdicts) != 1:
        raise RuntimeError(f"existence routes disagree: {routes}")
    exists = verdicts.pop()

    face_id = None
    if faces is not None:
        face = classify_point(poly, faces, x, tol=0)
        face_id = None if face is None else face.id
        if face is not None and (face.dim == 2) != exists:
            raise RuntimeError(
                f"existence verdict {exists} contradicts face classification "
                f"{face.id}"
            )
    return ExistenceVerdict(exists, face_id, routes, witness)


@dataclass(frozen=True)
class ConditioningReport:
    eigenvalues: tuple[float, ...]
    condition_number: float


def conditioning_report(fam: ExpFamily, theta) -> ConditioningReport:
    """Sorted Fisher eigenvalues and their ratio; deep in a normal cone the
    small eigenvalues collapse and Newton steps become unreliable."""
    ev = eval_family(fam, theta)
    eigs = np.linalg.eigvalsh(ev.fisher)
    smallest = float(eigs[0])
    cond = math.inf if smallest <= 0 else float(eigs[-1]) / smallest
    return ConditioningReport(tuple(float(v) for v in eigs), cond)
