"""Acceptance suite: one test per criterion, each printing a PASS line.

Reference values quoted from the published running example are marked as
such; where exact enumeration provably contradicts a published constant the
discrepancy is frozen and reported rather than silently patched (the
enumerated data passes independent combinatorial identities, and the
published median and upper quartile are reproduced exactly under the
midpoint quantile convention, so the two deviating constants are
transcription errors there, not here).
"""

import math
import os
from fractions import Fraction

import numpy as np
import pytest

from ergfan import enumeration as en
from ergfan import family as fm
from ergfan import geometry as geo
from ergfan import limits as lim
from ergfan import mle

import oracles
from conftest import RUN_G9

TOTALS = {7: 2_097_152, 8: 268_435_456, 9: 68_719_476_736}

# published census constants for the 9-node edges/triangles example
REF_MAX_COUNT = 1_876_664_161
REF_MEDIAN = 2_741_130
REF_Q1 = 545_265
REF_Q3 = 79_674_084

# exact values of this enumeration (midpoint convention for quantiles)
EXACT_MAX_COUNT = 1_876_664_160
EXACT_MEDIAN_MIDPOINT = 2_741_130.0
EXACT_Q1_MIDPOINT = 54_526.5
EXACT_Q3_MIDPOINT = 79_674_084.0
EXACT_MEDIAN_LOWER = 2_725_380

REF_VERTICES = {(0, 0), (20, 0), (27, 27), (30, 44), (32, 56), (36, 84)}
REF_HREP = [
    ((0, -1), 0),
    ((27, -7), 540),
    ((17, -3), 432),
    ((6, -1), 136),
    ((7, -1), 168),
    ((-21, 9), 0),
]
REF_V00_CONE = {(0, -1), (-21, 9)}


def report(criterion: int, text: str) -> None:
    print(f"[criterion {criterion}] PASS: {text}")


class TestCriterion1Enumeration:
    def test_totals(self, m7):
        assert m7.total == TOTALS[7]
        m8 = en.enumerate_measure(8, (en.edges(), en.triangles()))
        assert m8.total == TOTALS[8]
        report(1, f"g=7 total {m7.total}; g=8 total {m8.total} (exact)")

    def test_total_g9(self, m9):
        source = "regenerated" if RUN_G9 else "bundled enumeration output"
        assert m9.total == TOTALS[9]
        report(1, f"g=9 total {m9.total} exact ({source}; ERGFAN_RUN_G9=1 re-runs)")


class TestCriterion2Census:
    def test_point_census(self, bundle9):
        fam, poly, faces, fan = bundle9
        assert len(poly.support_points) == 444
        n_boundary = len(faces.boundary_points())
        n_interior = len(faces.interior_points())
        assert n_boundary == 29 and n_interior == 415
        report(2, "444 distinct points; 29 boundary, 415 interior")

    def test_count_statistics_exact(self, m9):
        vals = sorted(m9.positive_counts())
        assert vals[-1] == EXACT_MAX_COUNT
        assert en.measure_quantiles_midpoint(m9, 0.5) == EXACT_MEDIAN_MIDPOINT
        assert en.measure_quantiles_midpoint(m9, 0.25) == EXACT_Q1_MIDPOINT
        assert en.measure_quantiles_midpoint(m9, 0.75) == EXACT_Q3_MIDPOINT
        assert en.measure_quantiles(m9, 0.5) == EXACT_MEDIAN_LOWER
        report(
            2,
            f"max {vals[-1]}, median {EXACT_MEDIAN_MIDPOINT:.0f}, "
            f"Q3 {EXACT_Q3_MIDPOINT:.0f} (midpoint convention)",
        )

    def test_reference_discrepancies_are_exactly_the_known_ones(self, m9):
        # the enumerated histogram passes exact identities (total, binomial
        # edge marginals, triangle moments), reproduces the published median
        # and Q3 exactly under the midpoint convention, and pins two
        # transcription errors in the published constants:
        # the max is off by one, and Q1 is the midpoint value 54526.5 with
        # the decimal point dropped
        vals = sorted(m9.positive_counts())
        hist = m9.hist
        assert m9.total == 2**36
        for e in range(37):
            assert int(hist[e].sum()) == math.comb(36, e)
        tri_mass = sum(int(hist[e, t]) * t for e in range(37) for t in range(85))
        assert tri_mass == 84 * 2**33
        assert REF_MAX_COUNT == vals[-1] + 1
        assert en.measure_quantiles_midpoint(m9, 0.5) == REF_MEDIAN
        assert en.measure_quantiles_midpoint(m9, 0.75) == REF_Q3
        assert REF_Q1 == int(str(EXACT_Q1_MIDPOINT).replace(".", ""))
        report(
            2,
            "reference conflicts verified and frozen: max printed +1 "
            f"({REF_MAX_COUNT} vs exact {vals[-1]}); Q1 printed without its "
            f"decimal point ({REF_Q1} vs exact {EXACT_Q1_MIDPOINT})",
        )


class TestCriterion3HullAndFan:
    def test_vertices(self, bundle9):
        _, poly, _, _ = bundle9
        assert set(poly.vertices) == REF_VERTICES
        report(3, f"vertices {sorted(REF_VERTICES)} (exact)")

    def test_hrep_matches_reference_up_to_positive_scale(self, bundle9):
        _, poly, _, _ = bundle9
        mismatched = []
        matched = []
        for h in poly.hrep:
            scale = None
            for a_ref, b_ref in REF_HREP:
                cross = h.a[0] * a_ref[1] - h.a[1] * a_ref[0]
                dot = h.a[0] * a_ref[0] + h.a[1] * a_ref[1]
                if cross == 0 and dot > 0:
                    scale = Fraction(dot, h.a[0] ** 2 + h.a[1] ** 2)
                    if b_ref == scale * h.b:
                        matched.append((h.a, h.b))
                    else:
                        mismatched.append((h.a, h.b, b_ref, scale))
                    break
            assert scale is not None, f"row {h.a} has no reference counterpart"
        assert len(matched) == 5
        assert len(mismatched) == 1
        a, b_ours, b_ref, scale = mismatched[0]
        assert a == (17, -3) and b_ours == 378 and b_ref == 432
        report(
            3,
            "all 6 H-rep normals match the reference up to positive scaling; "
            "5 offsets agree; row (17,-3) disagrees as anticipated: "
            "tight value on the stated vertices is 378, reference prints 432",
        )

    def test_vertex_00_normal_cone(self, bundle9):
        _, poly, faces, fan = bundle9
        i = poly.vertices.index((0, 0))
        gens = fan[f"V{i}"].generators
        for g_vec in gens:
            assert any(
                g_vec[0] * r[1] - g_vec[1] * r[0] == 0
                and g_vec[0] * r[0] + g_vec[1] * r[1] > 0
                for r in REF_V00_CONE
            )
        assert len(gens) == 2
        report(3, f"vertex (0,0) cone generators {gens} match the reference rays")


class TestCriterion4FamilyNumerics:
    def test_origin_values(self, bundle9):
        fam = bundle9[0]
        ev = fm.eval_family(fam, (0.0, 0.0))
        assert abs(ev.psi - math.log(2**36)) < 1e-12
        assert abs(ev.mean[0] - 18.0) < 1e-12
        assert abs(ev.mean[1] - 10.5) < 1e-12
        report(4, "psi(0) = 36 log 2 and grad psi(0) = (18, 10.5) to 1e-12")

    def test_gradient_and_fisher_checks(self, bundle9):
        fam = bundle9[0]
        h = 1e-5
        worst_rel = 0.0
        worst_fish = 0.0
        for t1 in np.linspace(-0.6, 0.6, 5):
            for t2 in np.linspace(-0.8, 0.4, 5):
                theta = np.array([t1, t2])
                ev = fm.eval_family(fam, theta)
                fd = np.zeros(2)
                jac = np.zeros((2, 2))
                for i in range(2):
                    e = np.zeros(2)
                    e[i] = h
                    fd[i] = (
                        fm.eval_family(fam, theta + e).psi
                        - fm.eval_family(fam, theta - e).psi
                    ) / (2 * h)
                    jac[:, i] = (
                        fm.eval_family(fam, theta + e).mean
                        - fm.eval_family(fam, theta - e).mean
                    ) / (2 * h)
                worst_rel = max(
                    worst_rel,
                    float(np.linalg.norm(ev.mean - fd))
                    / max(1.0, float(np.linalg.norm(fd))),
                )
                worst_fish = max(worst_fish, float(np.max(np.abs(ev.fisher - jac))))
        assert worst_rel < 1e-6
        assert worst_fish < 1e-5
        report(
            4,
            f"gradient matches central differences (worst rel {worst_rel:.2e}); "
            f"Fisher matches mean-map differences (worst abs {worst_fish:.2e})",
        )

    def test_fisher_is_covariance(self, bundle9):
        fam = bundle9[0]
        worst = 0.0
        for theta in ((0.0, 0.0), (0.3, -0.5), (-0.4, 0.2)):
            ev = fm.eval_family(fam, theta)
            ref = oracles.mp_eval(fam.lattice_points, fam.counts, theta)
            worst = max(worst, float(np.max(np.abs(ev.fisher - np.array(ref["fisher"])))))
        assert worst < 1e-8
        report(4, f"Fisher equals the covariance of t (worst abs gap {worst:.2e})")

    def test_entropy_identity_and_bounds(self, bundle9):
        fam = bundle9[0]
        bound = 36 * math.log(2)
        worst = 0.0
        for t1 in np.linspace(-1, 1, 5):
            for t2 in np.linspace(-1, 1, 5):
                ev = fm.eval_family(fam, (t1, t2))
                worst = max(worst, abs(ev.entropy - fm.entropy_sum(fam, (t1, t2))))
                assert 0 <= ev.entropy <= bound + 1e-12
        for d in ((0, -1), (1, 0), (-0.6, 0.8)):
            theta = 50 * np.asarray(d, dtype=float)
            ev = fm.eval_family(fam, theta)
            assert 0 <= ev.entropy <= bound + 1e-12
            assert abs(float(np.sum(ev.probs)) - 1) < 1e-12
        assert worst < 1e-10
        report(
            4,
            f"entropy closed form matches definitional sum (worst {worst:.2e}); "
            "0 <= S <= 36 log 2 everywhere evaluated",
        )


class TestCriterion5MleSuite:
    def test_g7_full(self, bundle7):
        fam, poly, faces, fan = bundle7
        n_int = 0
        for t in faces.interior_points():
            res = mle.solve_mle(fam, np.asarray(t, dtype=float))
            assert res.grad_norm < 1e-10, t
            n_int += 1
        n_bnd = 0
        for t in sorted(faces.boundary_points()):
            r = mle.extended_mle(fam, faces, fan, t)
            assert r.residual < 1e-9, t
            assert r.fisher_rank == r.dim, t
            with pytest.raises(mle.SolverDivergence):
                mle.solve_mle(fam, np.asarray(t, dtype=float))
            n_bnd += 1
        report(
            5,
            f"g=7: {n_int} interior solves < 1e-10; {n_bnd} boundary face "
            "solves < 1e-9 with Fisher rank = dim(F); interior solver "
            "refuses every boundary point",
        )

    def test_g9_spot(self, bundle9):
        fam, poly, faces, fan = bundle9
        boundary = sorted(faces.boundary_points())
        interior = faces.interior_points()[:: max(1, len(faces.interior_points()) // 24)]
        for t in interior:
            res = mle.solve_mle(fam, np.asarray(t, dtype=float))
            assert res.grad_norm < 1e-10, t
        for t in boundary:
            r = mle.extended_mle(fam, faces, fan, t)
            assert r.residual < 1e-9, t
            assert r.fisher_rank == r.dim, t
            with pytest.raises(mle.SolverDivergence):
                mle.solve_mle(fam, np.asarray(t, dtype=float))
        report(
            5,
            f"g=9 spot: {len(interior)} interior points and all "
            f"{len(boundary)} boundary points verified",
        )


class TestCriterion6ExistenceTriAgreement:
    @pytest.mark.parametrize("name", ["bundle5", "bundle6", "bundle7", "bundle9"])
    def test_tri_agreement(self, name, request):
        fam, poly, faces, fan = request.getfixturevalue(name)
        n_exists = 0
        for t in poly.support_points:
            v = mle.check_existence(fam, faces, t)
            assert set(v.routes) == {"hrep", "relint_lp", "gordan"}
            assert len(set(v.routes.values())) == 1
            classified = geo.classify_point(poly, faces, t)
            assert v.exists == (classified.dim == 2), t
            n_exists += v.exists
        n = len(poly.support_points)
        if name == "bundle9":
            assert n_exists == 415 and n - n_exists == 29
        report(
            6,
            f"{name[-1] if name != 'bundle9' else 9}-node support: "
            f"{n} points, routes unanimous, {n_exists} exist",
        )


class TestCriterion7LimitTheory:
    def test_rays_into_every_face(self, bundle7):
        fam, poly, faces, fan = bundle7
        rng = np.random.default_rng(29)
        n_rays = 0
        for f in faces.proper():
            cone = fan[f.id]
            for _ in range(3):
                d_exact = geo.sample_ri_direction_exact(cone, rng)
                seq = lim.RaySequence.make((0.25, -0.1), d_exact)
                diags = lim.run_ray(fam, faces, fan, seq)
                assert diags.face_id == f.id
                assert diags.records[-1].tv < 1e-6, (f.id, d_exact)
                assert diags.records[-1].mean_gap < 1e-6, (f.id, d_exact)
                assert diags.verdicts["member_density_monotone"], (f.id, d_exact)
                frep = lim.fisher_limit_check(fam, faces, fan, seq)
                assert frep.converged and frep.rank_matches_dim, (f.id, d_exact)
                erep = lim.entropy_limit_check(fam, faces, fan, seq)
                assert erep.converged, (f.id, d_exact)
                n_rays += 1
        report(
            7,
            f"{n_rays} rays over all {len(faces.proper())} proper faces: "
            "TV, mean, Fisher, and entropy limits all < 1e-6 with "
            "rank(I_F) = dim(F) and monotone member densities",
        )

    def test_360_direction_dichotomy(self, bundle7):
        fam, poly, faces, fan = bundle7
        scale = 4096
        targets = {}
        for f in faces.proper():
            ff = fm.face_family(fam, faces, f.id)
            ev = ff.eval(ff.project_identifiable(np.zeros(2)))
            full = np.zeros(fam.n)
            for i, t in enumerate(ff.family.lattice_points):
                full[fam.index_of(t)] = ev.probs[i]
            targets[f.id] = full
        for ang in range(360):
            d = (
                round(scale * math.cos(math.radians(ang))),
                round(scale * math.sin(math.radians(ang))),
            )
            cone = geo.classify_direction(fan, d)
            ev = fm.eval_family(
                fam, 2.0**20 * np.asarray(d, dtype=float) / np.linalg.norm(d)
            )
            tvs = {
                fid: 0.5 * float(np.sum(np.abs(ev.probs - full)))
                for fid, full in targets.items()
            }
            best = min(tvs, key=tvs.get)
            assert best == cone.face_id, ang
            assert tvs[best] < 1e-6, ang
        report(
            7,
            "360 rational circle directions: limiting face equals the fan "
            "classification with TV < 1e-6 at rho = 2^20",
        )


class TestCriterion8RecessionCones:
    def test_ten_boundary_points(self, bundle7):
        fam, poly, faces, fan = bundle7
        pts = sorted(faces.boundary_points())[:10]
        assert len(pts) == 10
        for i, t in enumerate(pts):
            rep = lim.recession_check(fam, faces, fan, t, n_dirs=3, rng=100 + i)
            assert len(rep.recession) == 3 and len(rep.non_recession) == 3
            assert rep.all_verified, t
        report(
            8,
            "10 boundary points: likelihood bounded along 3 directions in "
            "N_F and below -1e3 along 3 directions outside N_F",
        )


class TestCriterion9BruteForceEquivalence:
    @pytest.mark.parametrize(
        "g,stats",
        [
            (4, (en.edges(), en.triangles(), en.k_star(2))),
            (5, (en.edges(), en.triangles())),
            (5, (en.k_star(2), en.degree_count(1))),
            (6, (en.edges(), en.triangles())),
        ],
    )
    def test_enumeration(self, g, stats):
        measure = en.enumerate_measure(g, stats)
        assert (
            dict((tuple(map(int, t)), c) for t, c in measure.support_items())
            == oracles.naive_measure(g, stats)
        )
        report(9, f"g={g} {','.join(d.label for d in stats)}: histogram equals "
                  "the from-scratch oracle exactly")

    @pytest.mark.parametrize("name", ["bundle5", "bundle6"])
    def test_classification_and_lp_verdicts(self, name, request):
        fam, poly, faces, fan = request.getfixturevalue(name)
        assert set(poly.vertices) == oracles.hull_vertices_qhull(poly.support_points)
        for t in poly.support_points:
            expected = oracles.relint_by_fractions(poly.support_points, t)
            assert (geo.classify_point(poly, faces, t).dim == 2) == expected
            v = mle.check_existence(fam, faces, t)
            assert v.exists == expected
        report(9, f"{name}: hull vertices match qhull; classification and all "
                  "LP verdicts match the rotating-line oracle exactly")

    @pytest.mark.parametrize("name", ["bundle5", "bundle6"])
    def test_extended_mle_oracle(self, name, request):
        fam, poly, faces, fan = request.getfixturevalue(name)
        for t in sorted(faces.boundary_points()):
            r = mle.extended_mle(fam, faces, fan, t)
            assert r.residual < 1e-9
            if r.dim == 1:
                ff = fm.face_family(fam, faces, r.face_id)
                (u,) = ff.identifiable_basis
                coords = [float(np.dot(p, u)) for p in ff.family.points]
                target = float(np.dot(np.asarray(t, dtype=float), u))
                if min(coords) < target < max(coords):
                    s_ref = oracles.bisect_face_moment(
                        coords, ff.family.counts, target
                    )
                    assert float(r.canonical_rep @ u) == pytest.approx(
                        s_ref, abs=1e-7
                    )
        report(9, f"{name}: extended MLEs match the bisection oracle on every "
                  "edge face")
