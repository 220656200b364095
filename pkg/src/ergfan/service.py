"""Local read-only HTTP API over a loaded measure: support points with
boundary flags, family evaluations, extended MLEs, ray diagnostics, and
cached entropy grids.

The session is immutable after load; the grid cache is the only
synchronized structure (idempotent inserts, single-flight computation).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import family as fm
from . import geometry as geo
from . import limits as lim
from . import mle
from .enumeration import InducedMeasure

PROB_SPARSE_EPS = 1e-12


class Session:
    """A loaded measure with its derived polytope, face lattice, fan, and
    family, plus the entropy-grid cache."""

    def __init__(self, measure: InducedMeasure):
        self.measure = measure
        self.family = fm.ExpFamily.from_measure(measure)
        self.polytope = geo.build_polytope(measure)
        self.faces = geo.face_lattice(self.polytope)
        self.fan = geo.normal_fan(self.polytope, self.faces)
        self._face_of = {
            t: geo.classify_point(self.polytope, self.faces, t)
            for t in self.polytope.support_points
        }
        self._grid_lock = threading.Lock()
        self._grid_cache: dict[tuple, dict] = {}
        self.grid_computes = 0

    def face_of(self, t):
        return self._face_of[tuple(int(v) for v in t)]

    def measure_payload(self) -> dict:
        points = []
        for t, c in self.measure.support_items():
            f = self.face_of(t)
            points.append(
                {
                    "t": [int(v) for v in t],
                    "count": str(c),
                    "boundary": f.dim < 2,
                    "face_id": f.id,
                    "dim": f.dim,
                }
            )
        return {
            "g": self.measure.g,
            "stats": [
                {"kind": d.kind, "k": d.k} for d in self.measure.stats
            ],
            "total": str(self.measure.total),
            "vertices": [list(v) for v in self.polytope.vertices],
            "hrep": [{"a": list(h.a), "b": h.b} for h in self.polytope.hrep],
            "fan": [
                {"face_id": c.face_id, "generators": [list(a) for a in c.generators]}
                for c in self.fan
            ],
            "points": points,
        }

    def grid_payload(self, key: tuple) -> dict:
        """Single-flight cached grid computation keyed by (box, resolution)."""
        with self._grid_lock:
            entry = self._grid_cache.get(key)
            if entry is None:
                entry = {"event": threading.Event(), "payload": None}
                self._grid_cache[key] = entry
                owner = True
            else:
                owner = False
        if owner:
            t1min, t1max, t2min, t2max, n1, n2 = key
            grid = fm.entropy_grid(
                self.family, ((t1min, t1max), (t2min, t2max)), (n1, n2)
            )
            entry["payload"] = {
                "theta1": [float(v) for v in grid.theta1],
                "theta2": [float(v) for v in grid.theta2],
                "psi": [[float(v) for v in row] for row in grid.psi],
                "mu1": [[float(v) for v in row] for row in grid.mean[:, :, 0]],
                "mu2": [[float(v) for v in row] for row in grid.mean[:, :, 1]],
                "entropy": [[float(v) for v in row] for row in grid.entropy],
            }
            self.grid_computes += 1
            entry["event"].set()
        else:
            entry["event"].wait()
        return entry["payload"]


class EvaluateRequest(BaseModel):
    theta: list[float]


class MleRequest(BaseModel):
    x: list[float]


class RayRequest(BaseModel):
    theta0: list[float]
    d: list[float]
    rho_max_exp: int | None = None


def _eval_payload(session: Session, theta: np.ndarray) -> dict:
    ev = fm.eval_family(session.family, theta)
    probs = {}
    omitted = 0.0
    for t, p in zip(session.family.lattice_points, ev.probs):
        if p >= PROB_SPARSE_EPS:
            probs[",".join(str(int(v)) for v in t)] = float(p)
        else:
            omitted += float(p)
    return {
        "theta": [float(v) for v in theta],
        "psi": ev.psi,
        "mean": [float(v) for v in ev.mean],
        "entropy": ev.entropy,
        "fisher": [[float(v) for v in row] for row in ev.fisher],
        "probs": probs,
        "omitted_mass": omitted,
    }


def create_app(session: Session | None = None) -> FastAPI:
    app = FastAPI(title="ergfan service", docs_url=None, redoc_url=None)

    def need_session() -> Session:
        if session is None:
            raise HTTPException(status_code=404, detail="no measure loaded")
        return session

    @app.get("/api/measure")
    def get_measure():
        return JSONResponse(need_session().measure_payload())

    @app.post("/api/evaluate")
    def post_evaluate(req: EvaluateRequest):
        s = need_session()
        if len(req.theta) != s.family.k or not all(
            math.isfinite(v) for v in req.theta
        ):
            raise HTTPException(
                status_code=400,
                detail=f"theta must be {s.family.k} finite numbers",
            )
        return JSONResponse(_eval_payload(s, np.asarray(req.theta)))

    @app.post("/api/mle")
    def post_mle(req: MleRequest):
        s = need_session()
        if len(req.x) != s.family.k or not all(math.isfinite(v) for v in req.x):
            raise HTTPException(
                status_code=400, detail=f"x must be {s.family.k} finite numbers"
            )
        if all(float(v).is_integer() for v in req.x):
            x = tuple(int(v) for v in req.x)
            try:
                rec = mle.extended_mle(s.family, s.faces, s.fan, x).to_record(x)
            except mle.MleError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            return JSONResponse(rec)
        try:
            r = mle.solve_mle(s.family, np.asarray(req.x, dtype=float))
        except (mle.MleError, mle.SolverDivergence) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return JSONResponse(
            {
                "x": [float(v) for v in req.x],
                "exists": True,
                "face_id": "P",
                "dim": 2,
                "theta_rep": [float(v) for v in r.theta_hat],
                "lin_basis": [],
                "residual": r.grad_norm,
                "entropy": r.entropy,
                "fisher_eigenvalues": sorted(
                    float(v) for v in np.linalg.eigvalsh(r.fisher)
                ),
            }
        )

    @app.post("/api/ray")
    def post_ray(req: RayRequest):
        s = need_session()
        if all(v == 0 for v in req.d):
            raise HTTPException(status_code=400, detail="d must be nonzero")
        rhos = None
        if req.rho_max_exp is not None:
            if not 0 <= req.rho_max_exp <= 20:
                raise HTTPException(
                    status_code=400, detail="rho_max_exp must be in [0, 20]"
                )
            rhos = [2.0**i for i in range(req.rho_max_exp + 1)]
        try:
            seq = lim.RaySequence.make(req.theta0, req.d, rhos=rhos)
            diags = lim.run_ray(s.family, s.faces, s.fan, seq, tol=1e-9)
        except (lim.LimitsError, geo.GeometryError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return JSONResponse(
            {
                "face_id": diags.face_id,
                "dim": diags.dim,
                "eta": [float(v) for v in diags.eta],
                "x_ref": list(diags.x_ref),
                "target_entropy": diags.target_entropy,
                "target_mean": [float(v) for v in diags.target_mean],
                "records": [
                    {
                        "rho": r.rho,
                        "tv": r.tv,
                        "mean_gap": r.mean_gap,
                        "loglik": r.loglik,
                        "fisher_min_eig": r.fisher_min_eig,
                        "entropy": r.entropy,
                        "kl": r.kl,
                    }
                    for r in diags.records
                ],
                "verdicts": {
                    k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
                    for k, v in diags.verdicts.items()
                },
            }
        )

    @app.get("/api/entropy-grid")
    def get_grid(
        t1min: float,
        t1max: float,
        t2min: float,
        t2max: float,
        n1: int = 64,
        n2: int = 64,
    ):
        s = need_session()
        if not all(math.isfinite(v) for v in (t1min, t1max, t2min, t2max)):
            raise HTTPException(status_code=400, detail="box must be finite")
        if not (1 <= n1 <= 512 and 1 <= n2 <= 512):
            raise HTTPException(status_code=400, detail="resolution must be in [1, 512]")
        key = (float(t1min), float(t1max), float(t2min), float(t2max), int(n1), int(n2))
        return JSONResponse(s.grid_payload(key))

    @app.get("/")
    def index():
        return Response(
            "ergfan service: endpoints under /api "
            "(measure, evaluate, mle, ray, entropy-grid)",
            media_type="text/plain",
        )

    return app
