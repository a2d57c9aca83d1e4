import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg

from symband import annihilate as an
from symband import opbasis as ob
from symband.bandcore import EPS
from symband.errors import InfeasibleBoundaryError, PathologicalBoundaryError


def nu_conditions(nu):
    basis = ob.StandardLegendre()
    c = nu * (nu + 1)
    return an.BoundaryFunctionals.from_conditions(
        basis, [[(1.0, 0, c), (1.0, 1, -2.0)], [(-1.0, 0, c), (-1.0, 1, 2.0)]]
    )


def legendre_robin_row(ap, bp, am, bm, m):
    """Robin functionals on P_m from numpy's Legendre series (independent oracle)."""
    c = np.zeros(m + 1)
    c[m] = 1
    d = npleg.legder(c)
    return np.array(
        [ap * npleg.legval(1, c) + bp * npleg.legval(1, d), am * npleg.legval(-1, c) + bm * npleg.legval(-1, d)]
    )


class TestStandard:
    def test_dirichlet_normalized_legendre(self):
        ann = an.build_standard(an.BoundaryFunctionals.dirichlet(ob.legendre()), 30)
        k = np.arange(30)
        assert np.allclose([ann.a.get(i + 1, i) for i in k], 0, atol=1e-15)
        assert np.allclose([ann.a.get(i + 2, i) for i in k], -np.sqrt((2 * k + 1) / (2 * k + 5)), rtol=1e-14)
        assert ann.residual() <= 1e3 * EPS
        assert ann.qr_residual() <= 10 * EPS

    def test_dirichlet_via_robin_oracle(self):
        zeta, eta = an.robin_legendre_oracle(1.0, 0.0, 1.0, 0.0, 50)
        assert np.all(zeta == 0) and np.all(eta == -1)
        for n in range(10):
            assert np.allclose(legendre_robin_row(1, 0, 1, 0, n) - legendre_robin_row(1, 0, 1, 0, n + 2), 0)

    @settings(max_examples=20, deadline=None)
    @given(
        st.floats(0.1, 5),
        st.floats(0.1, 5),
        st.floats(0.1, 5),
        st.floats(0.1, 5),
        st.booleans(),
    )
    def test_robin_matches_closed_form(self, ap, bp, am, bm, flip):
        # a+ b+ > 0 and a- b- < 0
        if flip:
            ap, bp = -ap, -bp
        bm = -bm
        bc = an.BoundaryFunctionals.robin(ob.StandardLegendre(), ap, bp, am, bm)
        ann = an.build_standard(bc, 60)
        zeta, eta = an.robin_legendre_oracle(ap, bp, am, bm, 60)
        k = np.arange(60)
        a1 = np.array([ann.a.get(i + 1, i) for i in k])
        a2 = np.array([ann.a.get(i + 2, i) for i in k])
        assert np.allclose(a1, zeta, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(zeta).max()))
        assert np.allclose(a2, eta, rtol=1e-12)
        assert ann.residual() <= 1e3 * EPS

    def test_closed_form_against_direct_solve(self):
        ap, bp, am, bm = 1.3, 0.7, 2.0, -0.4
        zeta, eta = an.robin_legendre_oracle(ap, bp, am, bm, 12)
        for n in range(12):
            m = np.array([legendre_robin_row(ap, bp, am, bm, n + 1), legendre_robin_row(ap, bp, am, bm, n + 2)]).T
            sol = np.linalg.solve(m, -legendre_robin_row(ap, bp, am, bm, n))
            assert np.allclose(sol, [zeta[n], eta[n]], rtol=1e-13)

    def test_nu_seven_fails_at_columns_five(self):
        with pytest.raises(PathologicalBoundaryError) as err:
            an.build_standard(nu_conditions(7), 20)
        assert err.value.column == 5

    def test_clamped_mixed_rank_deficient(self):
        with pytest.raises(PathologicalBoundaryError):
            an.build_standard(an.clamped_mixed_functionals(), 10)


class TestPathological:
    def test_nu_seven(self):
        bc = nu_conditions(7)
        ann = an.build_pathological(bc, 500)
        assert ann.method == "pathological" and ann.a.lower == 4
        assert ann.residual() <= 1e3 * EPS
        assert ann.qr_residual() <= 10 * EPS
        r = ann.r.to_dense()
        assert np.all(np.diag(r) > 0)

    def test_auto_falls_back_on_two_columns(self):
        ann = an.build_auto(nu_conditions(7), 40)
        assert ann.fallback_columns == (5, 6)
        assert ann.a.lower == 4
        assert ann.residual() <= 1e3 * EPS
        # untouched columns keep the standard structure
        assert ann.a.get(13, 10) == 0.0 and ann.a.get(14, 10) == 0.0

    def test_clamped_mixed(self):
        bc = an.clamped_mixed_functionals()
        ann = an.build_pathological(bc, 500)
        assert ann.shift == 2
        assert ann.residual() <= 1e3 * EPS
        assert ann.qr_residual() <= 10 * EPS
        # column k as a polynomial in the monomial basis must vanish to second order at +-1
        for k in (0, 1, 5, 40):
            lo, col = ann.column(k)
            poly = np.zeros(lo + col.size)
            for j, v in enumerate(col):
                n = lo + j
                c = np.zeros(n + 1)
                c[n] = 1.0
                if n >= 2:
                    c[n - 2] = -1.0
                poly[: n + 1] += v * c
            for x in (-1.0, 1.0):
                assert abs(npleg.legval(x, poly)) < 1e-12 * np.abs(col).sum()
                assert abs(npleg.legval(x, npleg.legder(poly))) < 1e-10 * np.abs(col).sum() * lo**2

    def test_skew_periodic(self):
        bc = an.BoundaryFunctionals.from_conditions(ob.legendre(), [[(-1.0, 0, 1.0), (1.0, 0, 1.0)]])
        with pytest.raises(PathologicalBoundaryError):
            an.build_standard(bc, 10)
        ann = an.build_pathological(bc, 12)
        k = np.arange(12)
        a2 = np.array([ann.a.get(i + 2, i) for i in k])
        assert np.allclose(a2[0::2], -np.sqrt((2 * k[0::2] + 1) / (2 * k[0::2] + 5)))
        assert np.allclose(a2[1::2], 0)
        assert np.allclose([ann.a.get(i + 1, i) for i in k], 0)
        assert np.isclose(a2[0], -np.sqrt(1 / 5)) and np.isclose(a2[2], -np.sqrt(5 / 9))

    def test_infeasible(self):
        # functionals supported on the first 11 elements: column 9 sees only
        # phi_10, whose values are not parallel to phi_9's
        def gen(n):
            out = np.zeros((2, n))
            out[:, :10] = 1.0
            out[:, 10] = [1.0, 2.0]
            return out

        with pytest.raises(InfeasibleBoundaryError) as err:
            an.build_pathological(an.BoundaryFunctionals(2, gen), 12)
        assert err.value.column == 9

    def test_dispatch(self):
        bc = an.BoundaryFunctionals.dirichlet(ob.legendre())
        assert an.build(bc, 5).method == "standard"
        with pytest.raises(ValueError):
            an.build(bc, 5, "bogus")


class TestBoundedness:
    def test_dirichlet(self):
        ann = an.build_standard(an.BoundaryFunctionals.dirichlet(ob.legendre()), 10**4)
        trend = an.boundedness_probe(ann, 10**4)
        assert trend[-1] < 3
        # sup_k 1 + sqrt((2k+1)/(2k+5)) = 2, approached from below with shrinking steps
        steps = np.diff(trend)
        assert np.all(steps >= 0) and np.all(np.diff(steps) <= 1e-15)
        assert 2 - 1e-3 < trend[-1] < 2

    def test_robin(self):
        bc = an.BoundaryFunctionals.robin(ob.legendre(), 1.0, 2.0, 1.5, -0.5)
        ann = an.build_standard(bc, 10**4)
        trend = an.boundedness_probe(ann, 10**4)
        assert np.isfinite(trend[-1]) and trend[-1] < 4
        assert trend[-1] - trend[5000] < 1e-3

    def test_first_two_unbounded(self):
        ann = an.build_standard(an.BoundaryFunctionals.dirichlet(ob.legendre()), 10**4)
        trend = an.boundedness_probe(ann, 10**4, mode="first_two")
        assert trend[-1] > 50
        assert trend[-1] > 1.3 * trend[5000]
