import warnings

import numpy as np
import pytest

from symband import problems
from symband.adaptive import (
    ChainSupportWarning,
    OperatorStream,
    apply_chain,
    deflation_check,
    growth_threshold,
    restore_band,
    sb_aed,
    sdb_aed,
)
from symband.bandcore import EPS, SymBanded
from symband.errors import SpectralDomainError, WindowCapError

from oracles import dirichlet_eigs


def dense_mathieu(alpha, q, n, count):
    return np.linalg.eigvalsh(problems.mathieu_matrix(alpha, q, n).to_dense())[:count]


class TestStream:
    def test_block_matches_section(self):
        st = problems.mathieu_stream(1.5, 3.0)
        dense = problems.mathieu_matrix(1.5, 3.0, 90).to_dense()
        assert np.array_equal(st.block(10, 70), dense[10:70, 10:70])
        assert np.array_equal(st.block(60, 64, 55, 60), dense[60:64, 55:60])
        assert st.entry(0, 4) == pytest.approx(np.sqrt(2) * 3.0)

    def test_entry_generator(self):
        st = OperatorStream(1, lambda i, j: 2.0 if i == j else -1.0)
        assert st.block(0, 3).tolist() == [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]
        assert st.entry(5, 9) == 0.0

    def test_bandwidth_enforced(self):
        st = OperatorStream(1, section=lambda n: problems.mathieu_matrix(2, 1.0, n))
        with pytest.raises(ValueError):
            st.block(0, 4)


class TestDeflationCheck:
    def test_zero_spike(self):
        rep = deflation_check(np.zeros((2, 8)), np.arange(1.0, 9.0), 8.0, EPS, 2)
        assert rep.deflated == 8

    def test_huge_first_column(self):
        spike = np.zeros((2, 8))
        spike[0, 0] = 1e3
        rep = deflation_check(spike, np.arange(1.0, 9.0), 8.0, EPS, 2)
        assert rep.deflated == 0

    def test_recursion_identity(self):
        rng = np.random.default_rng(0)
        spike = rng.standard_normal((4, 32))
        rep = deflation_check(spike, np.sort(rng.standard_normal(32)), 3.0, EPS, 4)
        direct = [np.linalg.norm(spike[:, :j]) ** 2 for j in rep.candidates]
        assert np.allclose(rep.spike_norms, direct, rtol=10 * EPS, atol=0)
        assert rep.candidates.tolist() == list(range(4, 33, 4))

    def test_generalized_side(self):
        lam = np.arange(1.0, 5.0)
        m = np.zeros((1, 4))
        n = np.zeros((1, 4))
        n[0, 2] = 1e-3
        rep = deflation_check(m, lam, 4.0, EPS, 1, n_spike=n, side="generalized")
        assert rep.deflated == 2

    def test_largest_admissible(self):
        # a large column followed by tiny ones still blocks every later j
        spike = np.zeros((1, 6))
        spike[0, 1] = 1.0
        rep = deflation_check(spike, np.arange(1.0, 7.0), 6.0, EPS, 1)
        assert rep.deflated == 1


class TestRestoreBand:
    def test_band_sized_window(self):
        rng = np.random.default_rng(1)
        r = restore_band(np.arange(3.0), rng.standard_normal((3, 3)), 3)
        assert np.allclose(r.z.T @ r.z, np.eye(3))
        assert r.coupling.shape == (3, 3)
        assert np.allclose(np.tril(r.coupling, -1), 0)

    def test_section_spectrum_preserved(self):
        rng = np.random.default_rng(2)
        l, b = 24, 3
        lam = np.sort(rng.standard_normal(l))
        spike = rng.standard_normal((b, l))
        tail = SymBanded(4 * b, b, rng.standard_normal((b + 1, 4 * b)))
        n = l + 4 * b

        def section(window, coupling):
            out = np.zeros((n, n))
            out[:l, :l] = window
            out[l:, l:] = tail.to_dense()
            out[l : l + b, : l] = coupling
            out[:l, l : l + b] = coupling.T
            return out

        before = section(np.diag(lam), spike)
        r = restore_band(lam, spike, b)
        full = np.zeros((b, l))
        full[:, l - b :] = r.coupling
        after = section(r.window, full)
        scale = np.linalg.norm(before)
        assert np.allclose(np.linalg.eigvalsh(before), np.linalg.eigvalsh(after), atol=1e2 * EPS * scale, rtol=0)
        ii, jj = np.nonzero(after)
        assert np.abs(ii - jj).max() <= b
        assert r.offband_defect <= 10 * EPS

    def test_general_window(self):
        rng = np.random.default_rng(3)
        w = rng.standard_normal((10, 10))
        w = w + w.T
        r = restore_band(w, rng.standard_normal((2, 10)), 2)
        assert np.allclose(r.z.T @ w @ r.z, r.window, atol=1e2 * EPS * np.linalg.norm(w))


class TestSBAED:
    def test_diagonal_stream(self):
        st = OperatorStream.diagonal(lambda n: (n + 1) * (n + 2))
        ch = sb_aed(st, 20)
        assert ch.values[:20].tolist() == [(n + 1) * (n + 2) for n in range(20)]
        assert ch.reports[0].deflated == ch.reports[0].window

    @pytest.mark.parametrize("alpha,q", [(2.0, 1.0), (1.5, 80.0)])
    def test_mathieu_against_dense(self, alpha, q):
        ch = sb_aed(problems.mathieu_stream(alpha, q), 200 if q == 80 else 100)
        count = ch.values.size if q != 80 else 200
        ref = dense_mathieu(alpha, q, 2000, count)
        assert np.allclose(np.sort(ch.values)[:count], ref, atol=1e-8, rtol=0)

    def test_free_mathieu(self):
        ch = sb_aed(problems.mathieu_stream(1.5, 0.0), 9)
        k = np.array([0, 1, 1, 2, 2, 3, 3, 4, 4], dtype=float)
        assert np.allclose(ch.values[:9], k**1.5, rtol=1e-15, atol=0)

    def test_growth_rule(self):
        ch = sb_aed(problems.mathieu_stream(1.5, 80.0), 300)
        for rep in ch.reports:
            grow = rep.deflated < growth_threshold(rep.window, 4)
            assert rep.doubled == grow
            assert rep.next_window == (2 * rep.window if grow else rep.window)

    def test_degrees_of_freedom(self):
        ch = sb_aed(problems.mathieu_stream(1.5, 80.0), 500)
        # window end at the moment eigenvalue n leaves, minus n
        extra = [rep.window_end - (rep.offset + rep.deflated) for rep in ch.reports if rep.deflated]
        assert max(extra) <= 200

    def test_oracle_equivalence_and_pairs(self):
        st = problems.mathieu_stream(2.0, 5.0)
        norm = problems.mathieu_matrix(2.0, 5.0, 500).norm_fro()
        ref = dense_mathieu(2.0, 5.0, 500, 50)
        vals = sb_aed(st, 50).values
        assert np.allclose(np.sort(vals)[:50], ref, atol=1e3 * np.sqrt(EPS) * norm, rtol=0)
        pairs = sb_aed(st, 50, "pairs")
        assert pairs.residuals(st, count=50).max() <= 1e3 * EPS

    def test_chain_residual_invariant(self):
        st = problems.mathieu_stream(1.5, 80.0)
        ch = sb_aed(st, 100)
        assert ch.residuals(st, count=100).max() <= np.sqrt(ch.tol)

    def test_offband_after_restore(self):
        ch = sb_aed(problems.mathieu_stream(2.0, 80.0), 100)
        assert max(rep.offband_defect for rep in ch.reports) <= 10 * EPS

    def test_descending(self):
        st = problems.mathieu_stream(2.0, 1.0)
        neg = OperatorStream(4, section=lambda n: -1.0 * problems.mathieu_matrix(2.0, 1.0, n))
        up = sb_aed(st, 30)
        down = sb_aed(neg, 30, order="descending")
        assert np.allclose(np.sort(-down.values)[:30], np.sort(up.values)[:30], atol=1e-10)

    def test_finite_stream(self):
        s = problems.mathieu_matrix(1.5, 80.0, 301)
        ch = sb_aed(OperatorStream.from_symbanded(s), 301)
        assert ch.values.size == 301
        assert np.allclose(np.sort(ch.values), np.linalg.eigvalsh(s.to_dense()), atol=1e-9)

    def test_window_cap(self):
        with pytest.raises(WindowCapError):
            sb_aed(problems.mathieu_stream(1.5, 80.0), 10, max_window=32)


class TestSDBAED:
    def test_same_stream(self):
        st = OperatorStream(2, section=lambda n: problems.model_problem(n).pencil.b)
        ch = sdb_aed(st, st, 20)
        assert np.allclose(ch.values[:20], 1.0, rtol=1e3 * EPS)

    def test_model_pencil(self):
        a, b = problems.model_streams()
        ch = sdb_aed(a, b, 50)
        lam = np.sort(ch.values)[:50]
        assert np.allclose(lam, dirichlet_eigs(50), rtol=1e-8)
        n = np.arange(50)
        assert np.all(lam > (n + 1) * (n + 2)) and np.all(lam < 2.0 * ((n + 1) * (n + 2)) ** 2)
        assert max(rep.offband_defect for rep in ch.reports) <= 10 * EPS
        assert ch.residuals(a, b, count=50).max() <= np.sqrt(ch.tol)

    def test_matches_finite_solve(self):
        from symband.eigsolve import gen_sym_band_eig

        a, b = problems.model_streams()
        ch = sdb_aed(a, b, 50)
        last = max(rep.window_end for rep in ch.reports)
        finite = gen_sym_band_eig(problems.model_problem(4 * last).pencil).values[:50]
        assert np.allclose(np.sort(ch.values)[:50], finite, rtol=1e-8)

    def test_vectors_b_orthonormal(self):
        a, b = problems.model_streams()
        ch = sdb_aed(a, b, 30)
        v = ch.eigenvectors(30)
        bm = b.section(v.shape[0]).to_dense()
        assert np.allclose(v.T @ bm @ v, np.eye(30), atol=1e-10)


@pytest.fixture(scope="module")
def chain():
    st = problems.mathieu_stream(1.5, 80.0)
    return st, sb_aed(st, 200)


class TestApplyChain:

    def test_identity(self, chain):
        st, ch = chain
        v = np.zeros(40)
        v[0] = 1.0
        out = apply_chain(ch, None, v)
        h = st.section(out.size)
        ref = h.to_sparse() @ np.pad(v, (0, out.size - v.size))
        assert np.linalg.norm(out - ref) <= 1e3 * np.sqrt(ch.tol) * h.norm_fro()

    def test_zero_function(self, chain):
        _, ch = chain
        out = apply_chain(ch, lambda lam: np.zeros_like(lam), np.ones(10))
        assert not np.any(out)

    def test_unitary_evolution(self):
        n = 1001
        s = problems.mathieu_matrix(1.5, 80.0, n)
        ch = sb_aed(OperatorStream.from_symbanded(s), n)
        freq = (np.arange(n) + 1) // 2
        u0 = np.exp(-36.0 * (freq + 1) / np.ceil(n / 2))
        u0 /= np.linalg.norm(u0)
        u = apply_chain(ch, lambda lam: np.exp(-10j * lam), u0)
        assert abs(np.linalg.norm(u) - 1) <= 1e-12

    def test_domain_error(self, chain):
        _, ch = chain
        with pytest.raises(SpectralDomainError), warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            apply_chain(ch, np.sqrt, np.eye(10)[0])

    def test_support_warning(self, chain):
        _, ch = chain
        v = np.zeros(ch.support + 50)
        v[-1] = 1.0
        with pytest.warns(ChainSupportWarning):
            apply_chain(ch, None, v)

    def test_coeffvec_roundtrip(self, chain):
        from symband import opbasis as ob

        _, ch = chain
        cv = ob.CoeffVec(ob.FourierReal(), np.eye(5)[0])
        out = apply_chain(ch, lambda lam: np.ones_like(lam), cv)
        assert isinstance(out, ob.CoeffVec)
        assert np.allclose(out.coeffs[:5], np.eye(5)[0], atol=1e-10)


class TestSDBCriteria:
    def test_split_criterion_on_model(self):
        a, b = problems.model_streams()
        ch = sdb_aed(a, b, 50, criterion="split")
        assert np.allclose(np.sort(ch.values)[:50], dirichlet_eigs(50), rtol=1e-8)
        assert max(rep.offband_defect for rep in ch.reports) <= 10 * EPS

    def test_unknown_criterion(self):
        a, b = problems.model_streams()
        with pytest.raises(ValueError):
            sdb_aed(a, b, 5, criterion="block")
