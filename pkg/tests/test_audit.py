import json
import math

import numpy as np
import pytest
import scipy.sparse as sp

from sfemdmp.assembly import assemble
from sfemdmp.audit import (
    AuditReport,
    algebraic_dwmp_oracle,
    applicable_dmp_variants,
    audit,
    check_angles,
    check_dmp,
    check_matrix_conditions,
    dwmp_holds,
)
from sfemdmp.errors import ParameterError
from sfemdmp.mesh import SurfaceMesh
from sfemdmp.problems import custom, p_laplacian, radiative_cooling
from sfemdmp.solver import picard_solve

from conftest import hexagon_fan, planar_fan


def _obtuse_fan():
    """Fan whose first element has a 120 degree angle at a boundary vertex."""
    a = np.array([1.0, 0.0])
    b = a + 0.5 * np.array([0.5, math.sqrt(3) / 2])
    ang = np.radians([120.0, 240.0])
    return planar_fan(np.vstack([a, b, np.column_stack([np.cos(ang), np.sin(ang)])]))


def _square_fan():
    """Eight right isosceles triangles; right angles sit on the axis points."""
    pts = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
    return planar_fan(pts)


class TestCheckAngles:
    def test_equilateral_mesh(self):
        report = check_angles(hexagon_fan(), "acute")
        assert report.passed and report.n_violations == 0
        assert report.worst_pair_product == pytest.approx(-2 / 3, rel=1e-12)
        assert report.sigma0_estimate == pytest.approx(2 / 3, rel=1e-12)

    def test_right_angle(self):
        mesh = _square_fan()
        acute = check_angles(mesh, "acute")
        assert not acute.passed
        assert acute.worst_pair_product == pytest.approx(0.0, abs=1e-14)
        assert check_angles(mesh, "nonobtuse").passed

    def test_obtuse_angle_fails_both_modes(self):
        mesh = _obtuse_fan()
        for mode in ("acute", "nonobtuse"):
            report = check_angles(mesh, mode)
            assert not report.passed
            assert report.worst_pair_product > 0
            assert report.sigma0_estimate < 0
        e, a, b = check_angles(mesh, "nonobtuse").violations[0]
        # the offending pair is the centre and the far vertex of the element
        nodes = {int(mesh.triangles[e][a]), int(mesh.triangles[e][b])}
        assert 0 in nodes and len(check_angles(mesh, "nonobtuse").violations) == 1

    def test_hemisphere_is_acute(self, hemispheres):
        for level in range(5):
            report = check_angles(hemispheres[level], "acute")
            assert report.passed and report.sigma0_estimate > 0

    def test_sigma0_is_tight(self, hemispheres):
        from sfemdmp.assembly import _geometry_arrays

        mesh = hemispheres[2]
        report = check_angles(mesh, "acute")
        _, _, g = _geometry_arrays(mesh.vertices[mesh.triangles])
        prod = np.einsum("eak,ebk->eab", g, g)
        interior = mesh.triangles < mesh.n_interior
        worst = max(
            prod[e, a, b]
            for e in range(mesh.n_triangles)
            for a, b in [(0, 1), (1, 2), (0, 2)]
            if interior[e, a] or interior[e, b]
        )
        assert report.sigma0_estimate == pytest.approx(-worst * mesh.h**2, rel=1e-14)

    def test_bad_mode(self):
        with pytest.raises(ParameterError):
            check_angles(hexagon_fan(), "right")


class TestMatrixConditions:
    def test_m_matrix(self):
        A_bar = sp.csr_matrix([[2.0, -1.0, 0.0], [-1.0, 2.0, 0.0], [0.0, 0.0, 1.0]])
        m = check_matrix_conditions(A_bar, 2)
        assert m.sign_passed and m.row_sum_passed and m.spd
        assert m.row_sum_min == pytest.approx(1.0)

    def test_positive_off_diagonal_is_listed(self):
        A_bar = sp.csr_matrix([[2.0, 0.3, -1.0], [0.3, 2.0, -1.0], [0.0, 0.0, 1.0]])
        m = check_matrix_conditions(A_bar, 2)
        assert not m.sign_passed
        assert m.sign_violations == [(0, 1, 0.3), (1, 0, 0.3)]
        assert m.spd

    def test_negative_row_sum_and_indefinite(self):
        A_bar = sp.csr_matrix([[1.0, -2.0], [-2.0, 1.0]])
        m = check_matrix_conditions(A_bar, 2)
        assert not m.row_sum_passed and m.row_sum_min == pytest.approx(-1.0)
        assert not m.spd

    def test_laplace_rows_sum_to_zero(self, hemispheres, semitorus_base):
        for mesh in (hemispheres[2], semitorus_base):
            u = np.random.default_rng(0).uniform(3, 17, mesh.n_vertices)
            A_bar, _ = assemble(mesh, p_laplacian(4), u)
            m = check_matrix_conditions(A_bar, mesh.n_interior)
            assert m.row_sum_passed
            assert abs(m.row_sum_min) <= 1e-10 * abs(A_bar).max()


class TestCheckDMP:
    def test_interior_below_boundary(self):
        u = np.array([0.2, 0.2, 0.2, 0.5, 0.1])
        assert check_dmp(u, u[3:], "weak-max").passed

    def test_overshoot_reports_witness(self):
        u = np.array([0.3, 1.6, 1.5, 0.5])
        check = check_dmp(u, u[2:], "weak-max")
        assert not check.passed and check.witness == 1 and check.value == 1.6

    def test_weak_bound_includes_zero(self):
        u = np.array([-0.5, -1.0, -2.0])
        assert check_dmp(u, u[1:], "weak-max").passed
        assert not check_dmp(u, u[1:], "strict-max").passed
        assert check_dmp(u, u[1:], "nonpos").passed
        assert not check_dmp(u, u[1:], "nonneg").passed

    def test_min_variants(self):
        u = np.array([1.0, 2.0, 0.5, 3.0])
        assert check_dmp(u, u[2:], "strict-min").passed
        assert check_dmp(u, u[2:], "weak-min").passed
        assert not check_dmp(np.array([0.1, 0.5, 3.0]), np.array([0.5, 3.0]), "strict-min").passed

    def test_shape_errors(self):
        with pytest.raises(ParameterError):
            check_dmp(np.zeros((2, 2)), np.zeros(1), "weak-max")
        with pytest.raises(ParameterError):
            check_dmp(np.zeros(3), np.zeros(0), "weak-max")
        with pytest.raises(ParameterError):
            check_dmp(np.zeros(3), np.zeros(1), "max")

    def test_applicable_variants(self):
        g = np.array([0.5, 1.5])
        assert applicable_dmp_variants(radiative_cooling(), np.zeros(4), g) == ["strict-max", "weak-min", "nonneg"]
        assert applicable_dmp_variants(p_laplacian(), np.zeros(4), g) == ["strict-max", "strict-min"]
        assert applicable_dmp_variants(radiative_cooling(), np.ones(4), g) == ["weak-min", "nonneg"]


class TestFullAudit:
    def test_radiative_cooling_hemisphere(self, hemispheres):
        mesh = hemispheres[2]
        u, _ = picard_solve(mesh, radiative_cooling())
        A_bar, _ = assemble(mesh, radiative_cooling(), u)
        report = audit(mesh, radiative_cooling(), u, A_bar, "acute")
        assert report.passed and report.dmp_verdict == "strict-pass"
        assert check_dmp(u, u[mesh.n_interior :], "weak-max").passed
        assert check_dmp(u, u[mesh.n_interior :], "nonneg").passed
        assert check_dmp(u, np.array([1.5]), "weak-max").passed

    def test_json_schema(self, hemispheres):
        mesh = hemispheres[1]
        u, _ = picard_solve(mesh, radiative_cooling())
        A_bar, _ = assemble(mesh, radiative_cooling(), u)
        data = json.loads(audit(mesh, radiative_cooling(), u, A_bar).to_json())
        assert {"angles", "sign_pattern", "row_sums", "spd", "dmp", "passed"} <= set(data)
        assert data["dmp"]["verdict"] in ("weak-pass", "strict-pass", "fail")

    def test_empty_report(self):
        report = AuditReport()
        assert report.passed and report.dmp_verdict == "fail"


class TestOracle:
    def test_one_by_one(self):
        holds, excess, c = dwmp_holds([[1.0]], [[-1.0]], [5.0], [0.0], strict=True)
        assert holds and c[0] == pytest.approx(5.0) and excess == pytest.approx(0.0)

    def test_detects_positive_off_diagonal(self):
        # a_12 > 0 breaks the principle: c_1 = 2 exceeds the boundary value 1
        A = np.array([[1.0, 0.5], [0.5, 1.0]])
        A_t = np.array([[-1.5], [-1.5]])
        holds, excess, _ = dwmp_holds(A, A_t, [1.0], [0.0, -1.0])
        assert not holds and excess > 0

    def test_small_runs(self):
        assert algebraic_dwmp_oracle(200, seed=1).passed
        assert algebraic_dwmp_oracle(200, seed=2, zero_row_sums=True).passed

    def test_size_guard(self):
        with pytest.raises(ParameterError):
            algebraic_dwmp_oracle(1, size_bound=13)

    def test_seeded(self):
        a = algebraic_dwmp_oracle(50, seed=7)
        b = algebraic_dwmp_oracle(50, seed=7)
        assert (a.max_excess, a.rejected) == (b.max_excess, b.rejected)
