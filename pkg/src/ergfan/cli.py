"""Command-line front end: enumeration, geometry export, MLE batches,
entropy grids, ray diagnostics, figure-data emission, and the local HTTP
service.

Exit codes: 0 ok, 2 usage, 3 infeasible or unsupported input, 4 numerical
failure.  All outputs are deterministic given the inputs and the seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import enumeration as en
from . import family as fm
from . import geometry as geo
from . import limits as lim
from . import mle

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4

PUBLISHED_THETA_BOX = ((10.0, 25.0), (-25.0, 10.0))
ORIGIN_THETA_BOX = ((-7.5, 7.5), (-17.5, 17.5))


def _parse_stats(text: str) -> tuple[en.StatDescriptor, ...]:
    return tuple(en.StatDescriptor.parse(part) for part in text.split(","))


def _parse_floats(text: str, n: int, what: str) -> tuple[float, ...]:
    parts = text.split(",")
    if len(parts) != n:
        raise en.EnumerationError(f"{what} needs {n} comma-separated values")
    return tuple(float(v) for v in parts)


def _parse_point(text: str) -> tuple:
    vals = []
    for part in text.split(","):
        f = float(part)
        vals.append(int(f) if f.is_integer() else f)
    return tuple(vals)


def load_measure(path: str, g: int | None = None, stats: str | None = None) -> en.InducedMeasure:
    text = Path(path).read_text()
    if path.endswith(".csv"):
        if g is None or stats is None:
            raise en.EnumerationError(
                "CSV measures carry no metadata; pass --g and --stats"
            )
        return en.measure_from_csv(text, g, _parse_stats(stats))
    return en.measure_from_json(text)


def _geometry_bundle(measure: en.InducedMeasure):
    poly = geo.build_polytope(measure)
    faces = geo.face_lattice(poly)
    fan = geo.normal_fan(poly, faces)
    fam = fm.ExpFamily.from_measure(measure)
    return fam, poly, faces, fan


def cmd_enumerate(args) -> int:
    stats = _parse_stats(args.stats)
    measure = en.enumerate_measure(
        args.g, stats, workers=args.workers, cell_budget=args.cell_budget
    )
    out = Path(args.out or "measure.json")
    if args.format == "csv":
        out.write_text(en.measure_to_csv(measure))
    else:
        out.write_text(en.measure_to_json(measure))
    print(f"g={args.g} stats={','.join(d.label for d in stats)}")
    print(f"total graphs: {measure.total}")
    print(f"distinct statistic points: {measure.n_support()}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_hull(args) -> int:
    measure = load_measure(args.measure, args.g, args.stats)
    _, poly, faces, fan = _geometry_bundle(measure)
    out_dir = Path(args.out or "hull_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "polytope.json").write_text(geo.polytope_to_json(poly, faces, fan))
    (out_dir / "boundary.csv").write_text(geo.boundary_csv(poly, faces))
    n_boundary = len(faces.boundary_points())
    print(f"vertices: {list(poly.vertices)}")
    print(f"hrep rows: {[(h.a, h.b) for h in poly.hrep]}")
    print(f"boundary points: {n_boundary}, interior: {len(faces.interior_points())}")
    print(f"wrote {out_dir}/polytope.json and {out_dir}/boundary.csv")
    return EXIT_OK


def _figures_support_csv(measure: en.InducedMeasure, faces) -> str:
    max_count = max(measure.positive_counts())
    lines = ["t1,t2,count,shade,boundary"]
    for t, c in measure.support_items():
        f = geo.classify_point(faces.polytope, faces, t)
        shade = math.sqrt(c / max_count)
        lines.append(f"{t[0]},{t[1]},{c},{shade!r},{int(f.dim < 2)}")
    return "\n".join(lines) + "\n"


def _figures_quantiles_csv(measure: en.InducedMeasure, n: int = 101) -> str:
    lines = ["q,lower,midpoint"]
    for i in range(n):
        q = i / (n - 1)
        lines.append(
            f"{q!r},{en.measure_quantiles(measure, q)},"
            f"{en.measure_quantiles_midpoint(measure, q)!r}"
        )
    return "\n".join(lines) + "\n"


def _figures_mle_csv(fam, faces, fan) -> str:
    lines = ["x1,x2,exists,face_id,dim,theta1,theta2,entropy,residual"]
    for t in faces.polytope.support_points:
        r = mle.extended_mle(fam, faces, fan, t)
        lines.append(
            f"{t[0]},{t[1]},{int(r.dim == 2)},{r.face_id},{r.dim},"
            f"{r.canonical_rep[0]!r},{r.canonical_rep[1]!r},"
            f"{r.entropy!r},{r.residual!r}"
        )
    return "\n".join(lines) + "\n"


def _figures_fan_csv(poly) -> str:
    lines = ["face_id,ax,ay"]
    for i, h in enumerate(poly.hrep):
        lines.append(f"E{i},{h.a[0]},{h.a[1]}")
    return "\n".join(lines) + "\n"


def cmd_figures(args) -> int:
    measure = load_measure(args.measure, args.g, args.stats)
    fam, poly, faces, fan = _geometry_bundle(measure)
    out_dir = Path(args.out or "figures_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "support.csv").write_text(_figures_support_csv(measure, faces))
    (out_dir / "quantiles.csv").write_text(_figures_quantiles_csv(measure))
    (out_dir / "mle_scatter.csv").write_text(_figures_mle_csv(fam, faces, fan))
    res = (args.grid_res, args.grid_res)
    grid_pub = fm.entropy_grid(fam, PUBLISHED_THETA_BOX, res)
    (out_dir / "entropy_grid_published_box.csv").write_text(grid_pub.to_csv())
    grid_origin = fm.entropy_grid(fam, ORIGIN_THETA_BOX, res)
    (out_dir / "entropy_grid_origin_box.csv").write_text(grid_origin.to_csv())
    (out_dir / "fan_overlay.csv").write_text(_figures_fan_csv(poly))
    print(f"wrote 6 figure-data files to {out_dir}")
    return EXIT_OK


def cmd_mle(args) -> int:
    measure = load_measure(args.measure, args.g, args.stats)
    fam, poly, faces, fan = _geometry_bundle(measure)
    if args.all_support:
        records = [
            mle.extended_mle(fam, faces, fan, t).to_record(t)
            for t in poly.support_points
        ]
        n_interior = sum(1 for r in records if r["exists"])
        payload = json.dumps(records, indent=1, sort_keys=True)
        print(f"{len(records)} records, {n_interior} interior solves")
    else:
        x = _parse_point(args.x)
        if all(isinstance(v, int) for v in x):
            rec = mle.extended_mle(fam, faces, fan, x).to_record(x)
        else:
            r = mle.solve_mle(fam, np.asarray(x, dtype=float), tol=args.tol)
            rec = {
                "x": list(map(float, x)),
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
        payload = json.dumps(rec, indent=1, sort_keys=True)
        print(payload)
    if args.out:
        Path(args.out).write_text(payload + "\n")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_entropy_grid(args) -> int:
    measure = load_measure(args.measure, args.g, args.stats)
    fam = fm.ExpFamily.from_measure(measure)
    b = _parse_floats(args.box, 4, "--box")
    n1, n2 = (int(v) for v in _parse_floats(args.res, 2, "--res"))
    grid = fm.entropy_grid(fam, ((b[0], b[1]), (b[2], b[3])), (n1, n2))
    text = grid.to_csv()
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_ray(args) -> int:
    measure = load_measure(args.measure, args.g, args.stats)
    fam, poly, faces, fan = _geometry_bundle(measure)
    theta0 = _parse_floats(args.theta0, 2, "--theta0")
    d = _parse_point(args.d)
    if all(v == 0 for v in d):
        raise UsageError("--d must be a nonzero direction")
    rhos = None
    if args.rho_max_exp is not None:
        rhos = [2.0**i for i in range(args.rho_max_exp + 1)]
    seq = lim.RaySequence.make(theta0, d, rhos=rhos)
    diags = lim.run_ray(fam, faces, fan, seq, tol=args.tol)
    text = diags.to_csv()
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    print(f"target face: {diags.face_id} (dim {diags.dim}); verdicts: {diags.verdicts}")
    return EXIT_OK


def cmd_exists(args) -> int:
    measure = load_measure(args.measure, args.g, args.stats)
    fam, poly, faces, fan = _geometry_bundle(measure)
    x = _parse_point(args.x)
    v = mle.check_existence(fam, faces, x)
    payload = json.dumps(
        {
            "x": list(x),
            "exists": v.exists,
            "face_id": v.face_id,
            "routes": v.routes,
            "witness": v.witness,
        },
        indent=1,
        sort_keys=True,
    )
    print(payload)
    if args.out:
        Path(args.out).write_text(payload + "\n")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import Session, create_app

    measure = load_measure(args.measure, args.g, args.stats)
    app = create_app(Session(measure))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--workers", type=int, default=1, help="enumeration worker count")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled directions")
    common.add_argument("--tol", type=float, default=1e-10, help="solver tolerance override")
    common.add_argument(
        "--g", type=int, help="node count (for enumerate, or to load a CSV measure)"
    )
    common.add_argument("--stats", help="statistics, e.g. edges,triangles or k_star:2")

    parser = argparse.ArgumentParser(
        prog="ergfan",
        description="Exact exponential families over enumerated graph statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="enumerate the induced measure")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--cell-budget", type=int, default=en.DEFAULT_CELL_BUDGET)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("hull", parents=[common], help="polytope, faces, and fan export")
    p.add_argument("--measure", required=True)
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("figures", parents=[common], help="figure-data CSV bundle")
    p.add_argument("--measure", required=True)
    p.add_argument("--grid-res", type=int, default=64)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("mle", parents=[common], help="extended MLE for one x or all support points")
    p.add_argument("--measure", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--x", help="observation, e.g. 18,10")
    group.add_argument("--all-support", action="store_true")
    p.set_defaults(func=cmd_mle)

    p = sub.add_parser("entropy-grid", parents=[common], help="entropy grid CSV over a theta box")
    p.add_argument("--measure", required=True)
    p.add_argument("--box", required=True, help="t1min,t1max,t2min,t2max")
    p.add_argument("--res", required=True, help="n1,n2")
    p.set_defaults(func=cmd_entropy_grid)

    p = sub.add_parser("ray", parents=[common], help="limit diagnostics along theta0 + rho*d")
    p.add_argument("--measure", required=True)
    p.add_argument("--theta0", required=True)
    p.add_argument("--d", required=True)
    p.add_argument("--rho-max-exp", type=int, default=None, help="use rhos 2^0..2^N")
    p.set_defaults(func=cmd_ray)

    p = sub.add_parser("exists", parents=[common], help="MLE existence certification")
    p.add_argument("--measure", required=True)
    p.add_argument("--x", required=True)
    p.set_defaults(func=cmd_exists)

    p = sub.add_parser("serve", parents=[common], help="serve the measure over a local HTTP API")
    p.add_argument("--measure", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8724)
    p.set_defaults(func=cmd_serve)
    return parser


class UsageError(ValueError):
    """Bad flag combination detected after argument parsing."""


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "enumerate":
        if args.g is None:
            parser.error("enumerate requires --g")
        if args.stats is None:
            parser.error("enumerate requires --stats")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        en.EnumerationError,
        geo.GeometryError,
        fm.FamilyError,
        mle.MleError,
        lim.LimitsError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except mle.SolverDivergence as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
