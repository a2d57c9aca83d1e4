import numpy as np
import pytest
import scipy.linalg as sl

from symband import opbasis as ob
from symband import problems
from symband.annihilate import BoundaryFunctionals, build_standard
from symband.assemble import (
    DifferentialForm,
    Piece,
    assemble_pencil,
    assemble_piecewise,
)
from symband.bandcore import EPS, split_cholesky
from symband.errors import NotSelfAdjointError

from oracles import dirichlet_eigs, model_d, model_m_diag, model_m_off2

TABLE1 = np.array([5.138119644, 47.93204473, 195.3752259, 520.7324377])


def reversed_eigs(pencil):
    a, b = pencil.a.to_dense(), pencil.b.to_dense()
    mu = sl.eigh(b, a, eigvals_only=True)
    return np.sort(1 / mu)


class TestModel:
    @pytest.mark.parametrize("dim", [1, 3, 40, 500])
    def test_closed_forms(self, dim):
        ap = problems.model_problem(dim)
        d, m = ap.pencil.a, ap.pencil.b
        assert np.allclose(d.data[0], model_d(dim), rtol=10 * EPS, atol=0)
        assert np.allclose(m.data[0], model_m_diag(dim), rtol=10 * EPS, atol=0)
        if dim > 2:
            assert np.allclose(m.data[2, : dim - 2], model_m_off2(dim), rtol=10 * EPS, atol=0)
        assert np.all(np.abs(d.data[1:]) <= 10 * EPS * np.abs(d.data[0]).max())
        if dim > 1:
            assert np.all(np.abs(m.data[1]) <= 10 * EPS)

    def test_spot_values(self):
        ap = problems.model_problem(5)
        assert ap.pencil.a.get(0, 0) == pytest.approx(2, rel=10 * EPS)
        assert ap.pencil.b.get(0, 0) == pytest.approx(4 / 5, rel=10 * EPS)
        assert ap.pencil.b.get(0, 2) == pytest.approx(-np.sqrt(24 / 525), rel=10 * EPS)

    def test_unit_columns_are_congruent(self):
        basis = ob.legendre()
        form = DifferentialForm.single(basis, {1: ob.constant(basis)})
        plain = assemble_pencil(form, BoundaryFunctionals.dirichlet(basis), 30)
        s = np.diag(problems.weighted_jacobi_scaling(np.arange(30.0)))
        scaled = problems.model_problem(30)
        assert np.allclose(s @ plain.pencil.a.to_dense() @ s, scaled.pencil.a.to_dense(), rtol=1e-13)
        assert plain.pencil.a.get(0, 0) == pytest.approx(3.0)

    def test_diagnostics_small(self):
        ap = problems.model_problem(200)
        assert ap.diagnostics.symmetry_defect <= 1e3 * EPS
        assert ap.diagnostics.band_defect <= 1e3 * EPS
        assert ap.complete_rows == 200

    def test_banded_solve_mode(self):
        basis = ob.legendre()
        form = DifferentialForm.single(basis, {1: ob.constant(basis)})
        bc = BoundaryFunctionals.dirichlet(basis)
        a = assemble_pencil(form, bc, 60)
        b = assemble_pencil(form, bc, 60, mode="banded_solve")
        assert np.allclose(a.pencil.a.to_dense(), b.pencil.a.to_dense(), rtol=1e-12)

    def test_truncation_stability(self):
        # the top of the kept 60% only resolves to 1e-8 once dim is a few hundred
        small = reversed_eigs(problems.model_problem(800).pencil)
        big = reversed_eigs(problems.model_problem(1600).pencil)
        keep = int(0.6 * 800)
        assert np.allclose(small[:keep], big[:keep], rtol=1e-8)
        assert np.allclose(big[:20], dirichlet_eigs(20), rtol=1e-10)


class TestSelfAdjointness:
    def test_non_self_adjoint_fires(self):
        basis = ob.legendre()
        form = DifferentialForm.single(basis, {1: ob.constant(basis)}, raw_terms={1: ob.constant(basis, 0.1)})
        with pytest.raises(NotSelfAdjointError) as err:
            assemble_pencil(form, BoundaryFunctionals.dirichlet(basis), 20)
        assert max(err.value.symmetry_defect, err.value.band_defect) > 1e-3

    def test_non_self_adjoint_boundary_conditions(self):
        # u(-1) = 0 and u'(1) = u(-1)... replaced by u(1) + u'(-1) = 0, not self-adjoint for -D^2
        basis = ob.legendre()
        bc = BoundaryFunctionals.from_conditions(basis, [[(-1.0, 0, 1.0)], [(1.0, 0, 1.0), (-1.0, 1, 1.0)]])
        form = DifferentialForm.single(basis, {1: ob.constant(basis)})
        with pytest.raises(NotSelfAdjointError):
            assemble_pencil(form, bc, 40)

    def test_gram_consistency(self):
        basis = ob.legendre()
        form = DifferentialForm.single(basis, {0: ob.constant(basis)})
        bc = BoundaryFunctionals.dirichlet(basis)
        ap = assemble_pencil(form, bc, 50)
        ann = build_standard(bc, 60)
        ad = ann.a.to_dense()[:, :50]
        gram = ad.T @ ad
        assert np.allclose(ap.pencil.a.to_dense(), ap.pencil.b.to_dense(), atol=1e-14)
        assert np.allclose(ap.pencil.b.to_dense(), gram, atol=1e-14)
        rd = ann.r.to_dense()[:50, :50]
        assert np.allclose(rd.T @ rd, gram, atol=1e-13)

    def test_weight_must_be_nonnegative(self):
        basis = ob.legendre()
        form = DifferentialForm.single(basis, {1: ob.constant(basis)}, weight=ob.from_monomial(basis, [0, 1]))
        with pytest.raises(ValueError):
            assemble_pencil(form, BoundaryFunctionals.dirichlet(basis), 10)

    def test_leading_coefficient(self):
        basis = ob.legendre()
        form = DifferentialForm.single(basis, {1: ob.CoeffVec(basis, [0.0]), 0: ob.constant(basis)})
        with pytest.raises(ValueError):
            assemble_pencil(form, BoundaryFunctionals.dirichlet(basis), 10)


class TestRing:
    def test_table_one(self):
        ap = problems.ring_problem(1.0, 200)
        lam = reversed_eigs(ap.pencil)[:4]
        assert np.allclose(lam, TABLE1, rtol=1e-6)
        assert ap.diagnostics.symmetry_defect < 1e-10
        assert ap.diagnostics.bandwidth <= 6

    def test_nonuniform_symmetric(self):
        ap = problems.ring_problem(0.5, 80)
        assert ap.diagnostics.bandwidth > problems.ring_problem(1.0, 80).diagnostics.bandwidth
        split_cholesky(ap.pencil.b)


class TestPiecewise:
    def test_laplacian_variant(self):
        left = ob.on_interval(ob.legendre(), -1.0, 0.0)
        right = ob.WeightedLaguerre(0.0)
        form = DifferentialForm((Piece(left, {1: ob.constant(left)}), Piece(right, {1: ob.constant(right)})))
        ap = assemble_piecewise(form, 0.0, [[(0, -1.0, 0, 1.0)]], 80)
        assert ap.diagnostics.symmetry_defect <= 1e3 * EPS
        split_cholesky(ap.pencil.b)
        # -u'' on [-1, inf) with u(-1) = 0 has no eigenvalue below 0
        assert reversed_eigs(ap.pencil)[0] > 0

    def test_weighted_schrodinger(self):
        ap = problems.piecewise_problem(200)
        assert ap.diagnostics.symmetry_defect <= 1e3 * EPS
        assert ap.diagnostics.band_defect <= 1e3 * EPS
        split_cholesky(ap.pencil.b)
        a = ap.pencil.a.to_dense()
        assert np.array_equal(a, a.T)

    def test_self_convergence(self):
        lo = reversed_eigs(problems.piecewise_problem(400).pencil)[0]
        hi = reversed_eigs(problems.piecewise_problem(800).pencil)[0]
        assert abs(hi - lo) / abs(hi) < 1e-6

    def test_interface_continuity(self):
        ap = problems.piecewise_problem(40)
        ann = ap.annihilator
        left = ob.on_interval(ob.legendre(), -1.0, 0.0)
        right = ob.WeightedLaguerre(0.0)
        for k in (0, 7, 20):
            lo, col = ann.column(k)
            idx = np.arange(lo, lo + col.size)
            for deriv in (0, 1):
                lv = ob.boundary_row(left, 0.0, 40, deriv)
                rv = ob.boundary_row(right, 0.0, 40, deriv)
                jump = sum(v * (lv[i // 2] if i % 2 == 0 else -rv[i // 2]) for i, v in zip(idx, col))
                assert abs(jump) < 1e-10 * (1 + k) ** 3


class TestSkew:
    def test_dim_one(self):
        s, g = problems.skew_problem(1)
        assert s.to_dense().tolist() == [[0.0]]
        assert g.to_dense()[0, 0] == pytest.approx(6 / 5)

    def test_skew_and_spd(self):
        pair = problems.skew_problem(40)
        s, g = pair
        sd = s.to_dense()
        assert np.array_equal(sd, -sd.T)
        assert pair.skew_defect <= 1e3 * EPS and pair.band_defect <= 1e3 * EPS
        assert np.linalg.eigvalsh(g.to_dense()).min() > 0
        lam = sl.eig(sd, g.to_dense(), right=False)
        assert np.max(np.abs(lam.real)) <= 1e-10 * np.max(np.abs(lam))

    def test_eigenvalues_against_exact(self):
        # u' = lambda u, u(-1) = -u(1): lambda = i (2k+1) pi / 2
        s, g = problems.skew_problem(80)
        lam = sl.eig(s.to_dense(), g.to_dense(), right=False)
        im = np.sort(np.abs(lam.imag))
        exact = np.repeat((2 * np.arange(6) + 1) * np.pi / 2, 2)
        assert np.allclose(im[:12], exact, rtol=1e-10)
