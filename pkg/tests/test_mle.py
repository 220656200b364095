import math
from fractions import Fraction

import numpy as np
import pytest

from ergfan import family as fm
from ergfan import geometry as geo
from ergfan import mle

import oracles


class TestSolveMle:
    def test_uniform_moment_match(self, bundle9):
        fam = bundle9[0]
        res = mle.solve_mle(fam, (18.0, 10.5))
        assert np.allclose(res.theta_hat, [0.0, 0.0], atol=1e-12)
        assert res.grad_norm < 1e-10

    def test_interior_point_residual(self, bundle9):
        fam = bundle9[0]
        res = mle.solve_mle(fam, (18.0, 10.0))
        ev = fm.eval_family(fam, res.theta_hat)
        assert np.linalg.norm(ev.mean - [18, 10]) < 1e-10
        # cross-check against a slow independent gradient-descent run
        theta = np.zeros(2)
        for _ in range(60000):
            g = fm.eval_family(fam, theta).mean - np.array([18.0, 10.0])
            theta -= 0.02 * g
            if np.linalg.norm(g) < 1e-9:
                break
        assert np.allclose(theta, res.theta_hat, atol=1e-6)

    def test_vertex_triggers_divergence_guard(self, bundle9):
        fam = bundle9[0]
        with pytest.raises(mle.SolverDivergence, match="nonexistent or ill-conditioned"):
            mle.solve_mle(fam, (0.0, 0.0))

    def test_bad_inputs(self, bundle9):
        fam = bundle9[0]
        with pytest.raises(mle.MleError):
            mle.solve_mle(fam, (1.0, 2.0, 3.0))
        with pytest.raises(mle.MleError):
            mle.solve_mle(fam, (np.nan, 0.0))

    def test_all_interior_points_converge_g7(self, bundle7):
        fam, poly, faces, fan = bundle7
        for t in faces.interior_points():
            res = mle.solve_mle(fam, np.asarray(t, dtype=float))
            assert res.grad_norm < 1e-10, t


class TestCheckExistence:
    def test_bottom_edge_point(self, bundle9):
        fam, poly, faces, fan = bundle9
        v = mle.check_existence(fam, faces, (10, 0))
        assert not v.exists
        assert v.face_id == "E0"
        assert set(v.routes) == {"hrep", "relint_lp", "gordan"}

    def test_interior_point(self, bundle9):
        fam, poly, faces, fan = bundle9
        v = mle.check_existence(fam, faces, (18, Fraction(21, 2)))
        assert v.exists and v.face_id == "P"

    def test_census_g9(self, bundle9):
        fam, poly, faces, fan = bundle9
        verdicts = [
            mle.check_existence(fam, faces, t, run_all=False).exists
            for t in poly.support_points
        ]
        assert sum(verdicts) == 415
        assert len(verdicts) - sum(verdicts) == 29

    @pytest.mark.parametrize("bundle_name", ["bundle5", "bundle6"])
    def test_tri_agreement_small(self, bundle_name, request):
        fam, poly, faces, fan = request.getfixturevalue(bundle_name)
        for t in poly.support_points:
            v = mle.check_existence(fam, faces, t)
            expected = geo.classify_point(poly, faces, t).dim == 2
            assert v.exists == expected, t
            assert set(v.routes.values()) == {expected}
            # independent rational rotating-line oracle
            assert oracles.relint_by_fractions(poly.support_points, t) == expected

    def test_lp_only_route_without_geometry(self, bundle5):
        fam, poly, faces, fan = bundle5
        for t in list(poly.support_points)[::5]:
            v = mle.check_existence(fam, None, t)
            assert v.exists == (geo.classify_point(poly, faces, t).dim == 2)
            assert "hrep" not in v.routes

    def test_rational_query_point(self, bundle5):
        fam, poly, faces, fan = bundle5
        v = mle.check_existence(fam, faces, (Fraction(9, 2), Fraction(1, 3)))
        assert v.exists == (
            geo.classify_point(poly, faces, (Fraction(9, 2), Fraction(1, 3))).dim == 2
        )


class TestExtendedMle:
    def test_vertex_point_mass(self, bundle9):
        fam, poly, faces, fan = bundle9
        r = mle.extended_mle(fam, faces, fan, (0, 0))
        assert r.dim == 0 and r.face_id == "V0"
        assert r.entropy == 0.0
        assert r.fisher_rank == 0
        assert np.allclose(r.mean, [0, 0])
        assert len(r.lin_basis) == 2

    def test_edge_point_matches_bisection_oracle(self, bundle9):
        fam, poly, faces, fan = bundle9
        r = mle.extended_mle(fam, faces, fan, (10, 0))
        assert r.dim == 1 and r.face_id == "E0"
        assert r.residual < 1e-9
        assert r.fisher_rank == 1
        assert r.lin_basis == ((0, -1),)
        ff = fm.face_family(fam, faces, "E0")
        coords = [float(t[0]) for t in ff.family.lattice_points]
        s_ref = oracles.bisect_face_moment(coords, ff.family.counts, 10.0)
        s_ours = float(r.canonical_rep @ np.array([1.0, 0.0]))
        assert s_ours == pytest.approx(s_ref, abs=1e-7)
        # canonical representative is orthogonal to lin(N_F)
        assert abs(r.canonical_rep @ np.array([0.0, -1.0])) < 1e-12

    def test_interior_delegates_to_newton(self, bundle9):
        fam, poly, faces, fan = bundle9
        r = mle.extended_mle(fam, faces, fan, (18, 10))
        direct = mle.solve_mle(fam, (18.0, 10.0))
        assert r.dim == 2 and r.face_id == "P"
        assert np.allclose(r.canonical_rep, direct.theta_hat, atol=1e-12)
        assert r.fisher_rank == 2

    def test_outside_rejected(self, bundle9):
        fam, poly, faces, fan = bundle9
        with pytest.raises(mle.MleError, match="outside"):
            mle.extended_mle(fam, faces, fan, (-3, 0))

    def test_boundary_suite_g7(self, bundle7):
        fam, poly, faces, fan = bundle7
        for t in sorted(faces.boundary_points()):
            r = mle.extended_mle(fam, faces, fan, t)
            assert r.dim < 2
            assert r.residual < 1e-9, t
            assert r.fisher_rank == r.dim, t
            with pytest.raises(mle.SolverDivergence):
                mle.solve_mle(fam, np.asarray(t, dtype=float))

    def test_likelihood_supremum_on_boundary(self, bundle7):
        # the face-family fit dominates every finite-parameter density at x
        fam, poly, faces, fan = bundle7
        rng = np.random.default_rng(5)
        for t in list(sorted(faces.boundary_points()))[::4]:
            r = mle.extended_mle(fam, faces, fan, t)
            ff = fm.face_family(fam, faces, r.face_id)
            ev_f = ff.eval(r.canonical_rep)
            log_sup = ev_f.log_density(np.asarray(t, dtype=float))
            for _ in range(100):
                theta = rng.normal(scale=rng.choice([1.0, 10.0]), size=2)
                log_p = fm.eval_family(fam, theta).log_density(
                    np.asarray(t, dtype=float)
                )
                assert log_p < log_sup + 1e-12

    def test_record_schema(self, bundle9):
        fam, poly, faces, fan = bundle9
        rec = mle.extended_mle(fam, faces, fan, (10, 0)).to_record((10, 0))
        assert set(rec) == {
            "x",
            "exists",
            "face_id",
            "dim",
            "theta_rep",
            "lin_basis",
            "residual",
            "entropy",
            "fisher_eigenvalues",
        }
        assert rec["exists"] is False and rec["dim"] == 1


class TestConditioning:
    def test_origin_is_well_conditioned(self, bundle9):
        fam = bundle9[0]
        rep = mle.conditioning_report(fam, (0.0, 0.0))
        assert rep.condition_number < 1e3
        ref = oracles.mp_eval(fam.lattice_points, fam.counts, (0.0, 0.0))
        eigs = np.linalg.eigvalsh(np.array(ref["fisher"]))
        assert rep.eigenvalues == pytest.approx(tuple(eigs), rel=1e-8)

    def test_deep_edge_normal_degenerates(self, bundle9):
        fam = bundle9[0]
        rep = mle.conditioning_report(fam, (0.0, -30.0))
        assert rep.eigenvalues[0] < 1e-6
        assert rep.eigenvalues[1] > 1e-3  # one direction survives on the edge

    def test_deep_vertex_cone_kills_both(self, bundle9):
        fam, poly, faces, fan = bundle9
        d = geo.sample_ri_direction(fan["V0"], 3)
        rep = mle.conditioning_report(fam, 30.0 * d)
        assert rep.eigenvalues[0] < 1e-6 and rep.eigenvalues[1] < 1e-6
        assert rep.condition_number > 1 or math.isinf(rep.condition_number)
