"""Exact polyhedral geometry of two-dimensional convex supports: hull,
H-representation, face lattice, normal cones and fan, and face-membership
classification.

All hull and face computations are exact over the integers (or rationals
for query points); floating point enters only through the optional
tolerance of classification queries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .enumeration import InducedMeasure

Vec = tuple[int, int]


class GeometryError(ValueError):
    """Invalid geometric input or query."""


class DegenerateSupportError(GeometryError):
    """Support points are collinear; the convex support must be a
    full-dimensional polytope."""


class AmbiguousLocationError(GeometryError):
    """Tolerance-based classification matched more than one face; retry with
    exact rational input (tol=0)."""


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_ccw(points: Iterable[Vec]) -> list[Vec]:
    """Strict convex hull of integer points, counter-clockwise; collinear
    non-extreme points are dropped."""
    pts = sorted(set(tuple(int(x) for x in p) for p in points))
    if len(pts) <= 2:
        return pts

    def build(seq):
        out: list[Vec] = []
        for pt in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], pt) <= 0:
                out.pop()
            out.append(pt)
        return out

    lower = build(pts)
    upper = build(reversed(pts))
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class HalfPlane:
    """One H-representation row <a, t> <= b with primitive outward normal."""

    a: Vec
    b: int

    def slack(self, x: Sequence) -> Fraction:
        return Fraction(self.b) - (self.a[0] * Fraction(x[0]) + self.a[1] * Fraction(x[1]))


@dataclass(frozen=True)
class SupportPolytope:
    """V- and H-representation of the convex support of a lattice measure.

    hrep[i] is the supporting halfplane of the edge vertices[i] ->
    vertices[i+1] (indices mod the vertex count), so rows follow the
    counter-clockwise edge order.
    """

    k: int
    support_points: tuple[Vec, ...]
    vertices: tuple[Vec, ...]
    hrep: tuple[HalfPlane, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def contains(self, x: Sequence, strict: bool = False) -> bool:
        if strict:
            return all(h.slack(x) > 0 for h in self.hrep)
        return all(h.slack(x) >= 0 for h in self.hrep)


def _extract_points(source) -> list[Vec]:
    if isinstance(source, InducedMeasure):
        pts = source.support_points()
    elif isinstance(source, Mapping):
        pts = list(source.keys())
    else:
        pts = list(source)
    return [tuple(int(x) for x in p) for p in pts]


def build_polytope(measure) -> SupportPolytope:
    """Exact convex hull and H-representation of the support of a measure
    (or of a raw collection of integer points)."""
    points = _extract_points(measure)
    if not points:
        raise GeometryError("empty support")
    k = len(points[0])
    if k != 2:
        raise GeometryError(
            f"face-lattice geometry supports k = 2 only (got k = {k}); "
            "existence tests for general k go through the LP route"
        )
    hull = convex_hull_ccw(points)
    if len(hull) < 3:
        raise DegenerateSupportError(
            "support points are collinear: the convex support must be "
            "full-dimensional"
        )
    n = len(hull)
    rows = []
    for i in range(n):
        x0, y0 = hull[i]
        x1, y1 = hull[(i + 1) % n]
        dx, dy = x1 - x0, y1 - y0
        g = gcd(abs(dx), abs(dy))
        a = (dy // g, -dx // g)
        rows.append(HalfPlane(a, a[0] * x0 + a[1] * y0))
    poly = SupportPolytope(2, tuple(sorted(set(points))), tuple(hull), tuple(rows))
    for t in poly.support_points:
        for h in poly.hrep:
            if h.slack(t) < 0:
                raise GeometryError(f"support point {t} violates H-rep row {h}")
    return poly


@dataclass(frozen=True)
class Face:
    """A face of the polytope: a vertex (dim 0), an edge (dim 1), or the
    improper face, the polytope itself (dim 2)."""

    id: str
    dim: int
    active_rows: tuple[int, ...]
    members: tuple[Vec, ...]

    @property
    def is_proper(self) -> bool:
        return self.dim < 2


class FaceLattice:
    """All faces of a 2-D support polytope, with exact member lists."""

    def __init__(self, polytope: SupportPolytope, faces: Sequence[Face]):
        self.polytope = polytope
        self.faces = tuple(faces)
        self._by_id = {f.id: f for f in self.faces}

    def __iter__(self) -> Iterator[Face]:
        return iter(self.faces)

    def __len__(self) -> int:
        return len(self.faces)

    def __getitem__(self, face_id: str) -> Face:
        return self._by_id[face_id]

    @property
    def improper(self) -> Face:
        return self._by_id["P"]

    def proper(self) -> list[Face]:
        return [f for f in self.faces if f.is_proper]

    def boundary_points(self) -> set[Vec]:
        out: set[Vec] = set()
        for f in self.proper():
            out.update(f.members)
        return out

    def interior_points(self) -> list[Vec]:
        boundary = self.boundary_points()
        return [t for t in self.polytope.support_points if t not in boundary]


def face_lattice(p: SupportPolytope) -> FaceLattice:
    """Vertices, edges, and the improper face, with members computed by
    exact tight-row tests on the support points."""
    n = p.n_vertices
    faces: list[Face] = []
    vertex_set = {v: i for i, v in enumerate(p.vertices)}
    for i, v in enumerate(p.vertices):
        members = tuple(t for t in p.support_points if t == v)
        if not members:
            raise GeometryError(
                f"vertex face at {v} has no support points; every face must "
                "carry positive measure"
            )
        faces.append(Face(f"V{i}", 0, ((i - 1) % n, i), members))
    for i, h in enumerate(p.hrep):
        members = tuple(t for t in p.support_points if h.slack(t) == 0)
        if not members:
            raise GeometryError(
                f"edge face with normal {h.a} has no support points; every "
                "face must carry positive measure"
            )
        faces.append(Face(f"E{i}", 1, (i,), members))
    faces.append(Face("P", 2, (), p.support_points))
    lattice = FaceLattice(p, faces)
    del vertex_set
    return lattice


@dataclass(frozen=True)
class NormalCone:
    """Normal cone of a face: primitive integer generators (the tight rows'
    outward normals) and a basis of its linear span."""

    face_id: str
    dim: int
    generators: tuple[Vec, ...]
    lin_basis: tuple[Vec, ...]

    @property
    def is_zero(self) -> bool:
        return not self.generators


class NormalFan:
    """The collection of normal cones of all faces; for a polytope the
    relative interiors of the cones partition the plane."""

    def __init__(self, lattice: FaceLattice, cones: Sequence[NormalCone]):
        self.lattice = lattice
        self.cones = tuple(cones)
        self._by_face = {c.face_id: c for c in self.cones}

    def __iter__(self) -> Iterator[NormalCone]:
        return iter(self.cones)

    def __getitem__(self, face_id: str) -> NormalCone:
        return self._by_face[face_id]


def normal_fan(p: SupportPolytope, faces: FaceLattice) -> NormalFan:
    """Normal cone per face: a ray per edge, a 2-D sector per vertex
    (spanned by the two incident edge normals), and {0} for the improper
    face."""
    n = p.n_vertices
    cones: list[NormalCone] = []
    for f in faces:
        if f.dim == 0:
            i = int(f.id[1:])
            a_prev = p.hrep[(i - 1) % n].a
            a_next = p.hrep[i].a
            gens = (a_prev, a_next)
            cones.append(NormalCone(f.id, 2, gens, gens))
        elif f.dim == 1:
            a = p.hrep[f.active_rows[0]].a
            cones.append(NormalCone(f.id, 1, (a,), (a,)))
        else:
            cones.append(NormalCone(f.id, 0, (), ()))
    return NormalFan(faces, cones)


def classify_point(
    p: SupportPolytope, faces: FaceLattice, x: Sequence, tol: float = 0
) -> Face | None:
    """The unique face whose relative interior contains x, or None when x is
    outside the polytope.

    tol=0 runs in exact rational arithmetic (use for lattice points and
    rational queries); tol>0 admits rounded inputs and raises
    AmbiguousLocationError when the tight-row pattern matches no face.
    """
    if tol < 0:
        raise GeometryError("tol must be >= 0")
    if tol == 0:
        slacks = [h.slack(x) for h in p.hrep]
        if any(s < 0 for s in slacks):
            return None
        tight = frozenset(i for i, s in enumerate(slacks) if s == 0)
    else:
        xf = np.asarray([float(v) for v in x])
        slacks = [float(h.b) - float(np.dot(h.a, xf)) for h in p.hrep]
        if any(s < -tol for s in slacks):
            return None
        tight = frozenset(i for i, s in enumerate(slacks) if abs(s) <= tol)
    if not tight:
        return faces.improper
    for f in faces:
        if f.is_proper and frozenset(f.active_rows) == tight:
            return f
    raise AmbiguousLocationError(
        f"tight rows {sorted(tight)} match no single face; "
        "use exact rational input with tol=0"
    )


def _exact_pair(x) -> tuple[Fraction, Fraction]:
    return Fraction(x[0]), Fraction(x[1])


def classify_direction(fan: NormalFan, d: Sequence, tol: float = 0) -> NormalCone:
    """The cone of the fan whose relative interior contains d.

    The zero direction maps to the improper face's cone {0}.  tol=0 requires
    exact (integer or rational) input; tol>0 classifies a float direction and
    raises AmbiguousLocationError on near-boundary ties.
    """
    if tol == 0:
        dx, dy = _exact_pair(d)
        if dx == 0 and dy == 0:
            return fan[fan.lattice.improper.id]
        matches = []
        for c in fan.cones:
            if c.dim == 1:
                (ax, ay), = c.generators
                if ax * dy - ay * dx == 0 and ax * dx + ay * dy > 0:
                    matches.append(c)
            elif c.dim == 2:
                (ax, ay), (bx, by) = c.generators
                alpha = dx * by - dy * bx
                beta = ax * dy - ay * dx
                if alpha > 0 and beta > 0:
                    matches.append(c)
        if len(matches) != 1:
            raise GeometryError(
                f"direction {tuple(d)} matched {len(matches)} cones; the fan "
                "should partition the plane"
            )
        return matches[0]

    dv = np.asarray([float(v) for v in d])
    nrm = float(np.linalg.norm(dv))
    if nrm == 0:
        return fan[fan.lattice.improper.id]
    dv = dv / nrm
    matches = []
    for c in fan.cones:
        if c.dim == 1:
            a = np.asarray(c.generators[0], dtype=float)
            a = a / np.linalg.norm(a)
            if abs(a[0] * dv[1] - a[1] * dv[0]) <= tol and float(a @ dv) > 0:
                matches.append(c)
        elif c.dim == 2:
            a = np.asarray(c.generators[0], dtype=float)
            b = np.asarray(c.generators[1], dtype=float)
            a = a / np.linalg.norm(a)
            b = b / np.linalg.norm(b)
            alpha = dv[0] * b[1] - dv[1] * b[0]
            beta = a[0] * dv[1] - a[1] * dv[0]
            if alpha > tol and beta > tol:
                matches.append(c)
    if len(matches) != 1:
        raise AmbiguousLocationError(
            f"direction {tuple(float(v) for v in d)} matched {len(matches)} "
            "cones within tol; use exact rational input"
        )
    return matches[0]


def cone_contains(cone: NormalCone, d: Sequence) -> bool:
    """Exact closed-cone membership test (boundary included)."""
    dx, dy = _exact_pair(d)
    if cone.dim == 0:
        return dx == 0 and dy == 0
    if dx == 0 and dy == 0:
        return True
    if cone.dim == 1:
        (ax, ay), = cone.generators
        return ax * dy - ay * dx == 0 and ax * dx + ay * dy > 0
    (ax, ay), (bx, by) = cone.generators
    denom = ax * by - ay * bx
    alpha = dx * by - dy * bx
    beta = ax * dy - ay * dx
    if denom < 0:
        alpha, beta = -alpha, -beta
    return alpha >= 0 and beta >= 0


def sample_ri_direction_exact(cone: NormalCone, rng) -> Vec:
    """Integer direction in the relative interior of the cone: a strictly
    positive random integer combination of the generators (the generator
    itself for a ray)."""
    if cone.is_zero:
        raise GeometryError("the zero cone has no interior direction")
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    if cone.dim == 1:
        return cone.generators[0]
    w = rng.integers(1, 100, size=len(cone.generators))
    dx = int(sum(int(wi) * g[0] for wi, g in zip(w, cone.generators)))
    dy = int(sum(int(wi) * g[1] for wi, g in zip(w, cone.generators)))
    return (dx, dy)


def sample_ri_direction(cone: NormalCone, rng) -> np.ndarray:
    """Unit vector in the relative interior of the cone."""
    d = np.asarray(sample_ri_direction_exact(cone, rng), dtype=float)
    return d / np.linalg.norm(d)


def polytope_to_json(p: SupportPolytope, faces: FaceLattice, fan: NormalFan) -> str:
    doc = {
        "k": p.k,
        "support_points": [list(t) for t in p.support_points],
        "vertices": [list(v) for v in p.vertices],
        "hrep": [{"a": list(h.a), "b": h.b} for h in p.hrep],
        "faces": [
            {
                "id": f.id,
                "dim": f.dim,
                "active_rows": list(f.active_rows),
                "members": [list(t) for t in f.members],
            }
            for f in faces
        ],
        "cones": [
            {
                "face_id": c.face_id,
                "generators": [list(a) for a in c.generators],
                "lin_basis": [list(a) for a in c.lin_basis],
            }
            for c in fan
        ],
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def boundary_csv(p: SupportPolytope, faces: FaceLattice) -> str:
    """Per support point: the face of its relative interior and a boundary
    flag."""
    lines = ["t1,t2,face_id,dim,boundary"]
    for t in p.support_points:
        f = classify_point(p, faces, t)
        lines.append(f"{t[0]},{t[1]},{f.id},{f.dim},{int(f.dim < 2)}")
    return "\n".join(lines) + "\n"
