"""Banded operator blocks for orthonormal polynomial and Fourier bases.

Every operator is returned as a finite section of an infinite banded
matrix. Column n of an operator holds the coefficients, in the target
basis, of the operator applied to basis element n of the source basis.
Sections are pure functions of their arguments, so extending a section
reproduces the entries of any smaller one exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln, poch, roots_genlaguerre, roots_jacobi

from .bandcore import BandedMatrix, SymBanded
from .errors import UnsupportedOperatorError

# ---------------------------------------------------------------------------
# basis tags


@dataclass(frozen=True)
class Jacobi:
    """Orthonormal Jacobi polynomials P~_n^(alpha, beta) on [-1, 1]."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if self.alpha <= -1 or self.beta <= -1:
            raise ValueError("Jacobi parameters must exceed -1")


@dataclass(frozen=True)
class WeightedJacobi:
    """(1 - x)^alpha (1 + x)^beta P~_n^(alpha, beta): orthonormal in L^2(-1, 1)."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("weight exponents must be positive")


@dataclass(frozen=True)
class StandardLegendre:
    """Classical Legendre polynomials P_n with P_n(1) = 1 (not normalized)."""


@dataclass(frozen=True)
class WeightedLaguerre:
    """e^{-x/2} L~_n^(alpha)(x) on [0, inf), orthonormal against x^alpha."""

    alpha: float = 0.0

    def __post_init__(self):
        if self.alpha <= -1:
            raise ValueError("Laguerre parameter must exceed -1")


@dataclass(frozen=True)
class FourierReal:
    """Orthonormal real Fourier basis on [0, 2 pi).

    Ordering: 1/sqrt(2 pi), sin(t)/sqrt(pi), cos(t)/sqrt(pi), sin(2t)/sqrt(pi), ...
    """


@dataclass(frozen=True)
class ShiftedScaled:
    """sqrt(scale) * inner_n(scale * x + shift): an affinely mapped basis."""

    inner: object
    scale: float
    shift: float = 0.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("affine map needs a positive scale")
        if isinstance(self.inner, (ShiftedScaled, FourierReal)):
            raise ValueError("unsupported inner basis for an affine map")

    def to_inner(self, x):
        return self.scale * np.asarray(x, dtype=float) + self.shift

    def to_outer(self, t):
        return (np.asarray(t, dtype=float) - self.shift) / self.scale


def legendre():
    return Jacobi(0.0, 0.0)


def on_interval(inner, a, b):
    """Map a [-1, 1] basis onto [a, b]."""
    scale = 2.0 / (b - a)
    return ShiftedScaled(inner, scale, -(a + b) / (b - a))


def on_ray(inner, a):
    """Map a [0, inf) basis onto [a, inf)."""
    return ShiftedScaled(inner, 1.0, -float(a))


def _unwrap(basis):
    if isinstance(basis, ShiftedScaled):
        return basis.inner, basis.scale, basis.shift
    return basis, 1.0, 0.0


# ---------------------------------------------------------------------------
# coefficient vectors


@dataclass(frozen=True)
class CoeffVec:
    """Finite expansion sum_n coeffs[n] * p_n in the polynomial part of ``basis``.

    For weighted bases the weight is dropped (a coefficient function is a
    polynomial), so a Laguerre coefficient vector expands in L~_n and a
    mapped basis expands in the inner orthonormal polynomials of the mapped
    variable, without the sqrt(scale) normalizer.
    """

    basis: object
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return int(self.coeffs.size - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inner, scale, shift = _unwrap(self.basis)
        t = scale * x + shift
        if isinstance(inner, FourierReal):
            vals = fourier_values(self.coeffs.size, t)
        else:
            vals = _poly_values(_poly_family(inner), self.coeffs.size, t)
        return self.coeffs @ vals


def from_function(basis, func, degree):
    """Exact expansion of a polynomial ``func`` (of the physical variable).

    Uses Gauss quadrature of the polynomial family of ``basis`` with enough
    nodes to integrate degree ``2 * degree`` exactly.
    """
    inner, scale, shift = _unwrap(basis)
    fam = _poly_family(inner)
    nodes = degree + 2
    if isinstance(fam, Jacobi):
        t, w = roots_jacobi(nodes, fam.alpha, fam.beta)
    elif isinstance(fam, WeightedLaguerre):
        t, w = roots_genlaguerre(nodes, fam.alpha)
    else:
        raise UnsupportedOperatorError(f"no quadrature for {fam!r}")
    x = (t - shift) / scale
    vals = _poly_values(fam, degree + 1, t)
    c = vals @ (w * np.asarray(func(x), dtype=float))
    c[np.abs(c) < 1e-15 * max(1.0, np.abs(c).max())] = 0.0
    return CoeffVec(basis, c)


def from_monomial(basis, coeffs):
    """Expansion of sum_k coeffs[k] * x^k in the polynomial part of ``basis``."""
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
    return from_function(basis, lambda x: np.polynomial.polynomial.polyval(x, coeffs), coeffs.size - 1)


def constant(basis, value=1.0):
    return from_monomial(basis, [value])


# ---------------------------------------------------------------------------
# recurrences and norms


def _poly_family(basis):
    """The orthonormal polynomial family whose recurrence describes x * p_n."""
    if isinstance(basis, Jacobi):
        return basis
    if isinstance(basis, WeightedJacobi):
        return Jacobi(basis.alpha, basis.beta)
    if isinstance(basis, WeightedLaguerre):
        return basis
    raise UnsupportedOperatorError(f"{basis!r} has no polynomial recurrence")


def jacobi_log_norm(n, a, b):
    """log of h_n^(a,b) = int (1-x)^a (1+x)^b P_n^2."""
    n = np.asarray(n, dtype=float)
    # gamma ratios as Pochhammer symbols: differences of gammaln lose
    # digits to cancellation once n is in the thousands
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            (a + b + 1) * np.log(2.0)
            - np.log(2 * n + a + b + 1)
            + np.log(poch(n + 1, a))
            - np.log(poch(n + b + 1, a))
        )
    if np.ndim(n) == 0:
        if n == 0:
            out = (a + b + 1) * np.log(2.0) + gammaln(a + 1) + gammaln(b + 1) - gammaln(a + b + 2)
        return out
    zero = n == 0
    if np.any(zero):
        out = np.where(
            zero,
            (a + b + 1) * np.log(2.0) + gammaln(a + 1) + gammaln(b + 1) - gammaln(a + b + 2),
            out,
        )
    return out


def laguerre_log_norm(n, a):
    n = np.asarray(n, dtype=float)
    return np.log(poch(n + 1, a))


def _recurrence(fam, count):
    """(a_n, b_n) with x p_n = b_{n-1} p_{n-1} + a_n p_n + b_n p_{n+1}."""
    n = np.arange(count, dtype=float)
    if isinstance(fam, Jacobi):
        al, be = fam.alpha, fam.beta
        s = 2 * n + al + be
        with np.errstate(divide="ignore", invalid="ignore"):
            a = (be**2 - al**2) / (s * (s + 2))
        a[0] = (be - al) / (al + be + 2)
        num = (n + 1) * (n + al + 1) * (n + be + 1) * (n + al + be + 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            b = 2.0 / (s + 2) * np.sqrt(num / ((s + 1) * (s + 3)))
        if al + be + 1 == 0:
            b[0] = 2.0 * np.sqrt((al + 1) * (be + 1) / ((al + be + 2) ** 2 * (al + be + 3)))
        return a, b
    if isinstance(fam, WeightedLaguerre):
        a = 2 * n + fam.alpha + 1
        b = -np.sqrt((n + 1) * (n + fam.alpha + 1))
        return a, b
    raise UnsupportedOperatorError(f"{fam!r} has no recurrence")


def _p0(fam):
    if isinstance(fam, Jacobi):
        return float(np.exp(-0.5 * jacobi_log_norm(0, fam.alpha, fam.beta)))
    return float(np.exp(-0.5 * laguerre_log_norm(0, fam.alpha)))


def _poly_values(fam, count, t):
    """Orthonormal polynomials p_0..p_{count-1} at points t (count x len(t))."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((count, t.size))
    if count == 0:
        return out
    a, b = _recurrence(fam, count)
    out[0] = _p0(fam)
    if count > 1:
        out[1] = (t - a[0]) * out[0] / b[0]
    for k in range(1, count - 1):
        out[k + 1] = ((t - a[k]) * out[k] - b[k - 1] * out[k - 1]) / b[k]
    return out


def fourier_values(count, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.zeros((count, theta.size))
    if count:
        out[0] = 1.0 / np.sqrt(2 * np.pi)
    for i in range(1, count):
        k = (i + 1) // 2
        out[i] = (np.sin(k * theta) if i % 2 else np.cos(k * theta)) / np.sqrt(np.pi)
    return out


def fourier_freq(count):
    i = np.arange(count)
    return (i + 1) // 2


def eval_basis(basis, count, x, deriv=0):
    """Values (or derivatives) of the first ``count`` basis functions at x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if deriv > 0:
        tgt = diff_target(basis)
        d = diff_operator(basis, tgt, count + 1, count)
        return d.to_dense().T @ eval_basis(tgt, count + 1, x, deriv - 1)
    inner, scale, shift = _unwrap(basis)
    t = scale * x + shift
    fac = np.sqrt(scale)
    if isinstance(inner, FourierReal):
        return fourier_values(count, t)
    if isinstance(inner, StandardLegendre):
        return fac * np.polynomial.legendre.legvander(t, count - 1).T
    if isinstance(inner, Jacobi):
        return fac * _poly_values(inner, count, t)
    if isinstance(inner, WeightedJacobi):
        w = (1 - t) ** inner.alpha * (1 + t) ** inner.beta
        return fac * w * _poly_values(_poly_family(inner), count, t)
    if isinstance(inner, WeightedLaguerre):
        with np.errstate(over="ignore", invalid="ignore"):
            w = np.exp(-t / 2)
            vals = fac * w * _poly_values(inner, count, t)
        vals[:, np.isinf(t)] = 0.0
        return vals
    raise UnsupportedOperatorError(f"cannot evaluate {basis!r}")


# ---------------------------------------------------------------------------
# differentiation


def diff_target(basis):
    """The basis in which d/dx of ``basis`` is banded."""
    if isinstance(basis, ShiftedScaled):
        return ShiftedScaled(diff_target(basis.inner), basis.scale, basis.shift)
    if isinstance(basis, Jacobi):
        return Jacobi(basis.alpha + 1, basis.beta + 1)
    if isinstance(basis, WeightedJacobi):
        if basis.alpha == 1 and basis.beta == 1:
            return Jacobi(0.0, 0.0)
        return WeightedJacobi(basis.alpha - 1, basis.beta - 1)
    if isinstance(basis, WeightedLaguerre):
        return WeightedLaguerre(basis.alpha + 1)
    if isinstance(basis, FourierReal):
        return basis
    raise UnsupportedOperatorError(f"no differentiation rule for {basis!r}")


def diff_operator(src, dst, rows, cols=None, order=1):
    """Section of d/dx from ``src`` to ``dst`` (order-fold composition)."""
    cols = rows if cols is None else cols
    if order != 1:
        chain = [src]
        for _ in range(order):
            chain.append(diff_target(chain[-1]))
        if chain[-1] != dst:
            raise UnsupportedOperatorError(f"{order}-fold derivative of {src!r} does not land in {dst!r}")
        return compose([diff_operator(chain[k], chain[k + 1], rows + order, rows + order) for k in range(order)][::-1], rows, cols)
    if isinstance(src, ShiftedScaled):
        if not isinstance(dst, ShiftedScaled) or (dst.scale, dst.shift) != (src.scale, src.shift):
            raise UnsupportedOperatorError("mapped bases must share the affine map")
        return src.scale * diff_operator(src.inner, dst.inner, rows, cols)
    if diff_target(src) != dst:
        raise UnsupportedOperatorError(f"unsupported differentiation pair {src!r} -> {dst!r}")
    n = np.arange(cols, dtype=float)
    if isinstance(src, Jacobi):
        al, be = src.alpha, src.beta
        coef = (n + al + be + 1) / 2
        with np.errstate(invalid="ignore"):
            ratio = np.exp(0.5 * (jacobi_log_norm(np.maximum(n - 1, 0), al + 1, be + 1) - jacobi_log_norm(n, al, be)))
        vals = np.where(n >= 1, coef * ratio, 0.0)
        return BandedMatrix.from_diagonals(rows, cols, {1: vals[1:]})
    if isinstance(src, WeightedJacobi):
        al, be = src.alpha, src.beta
        ratio = np.exp(0.5 * (jacobi_log_norm(n + 1, al - 1, be - 1) - jacobi_log_norm(n, al, be)))
        vals = -2 * (n + 1) * ratio
        return BandedMatrix.from_diagonals(rows, cols, {-1: vals})
    if isinstance(src, WeightedLaguerre):
        a = src.alpha
        diag = -0.5 * np.exp(0.5 * (laguerre_log_norm(n, a + 1) - laguerre_log_norm(n, a)))
        sup = -0.5 * np.exp(0.5 * (laguerre_log_norm(np.maximum(n - 1, 0), a + 1) - laguerre_log_norm(n, a)))
        return BandedMatrix.from_diagonals(rows, cols, {0: diag, 1: sup[1:]})
    if isinstance(src, FourierReal):
        out = BandedMatrix(rows, cols, 1, 1)
        k = fourier_freq(max(rows, cols))
        for j in range(1, cols):
            if j % 2:  # sin k -> k cos k
                if j + 1 < rows:
                    out.set(j + 1, j, float(k[j]))
            else:  # cos k -> -k sin k
                if j - 1 < rows:
                    out.set(j - 1, j, -float(k[j]))
        return out
    raise UnsupportedOperatorError(f"unsupported differentiation pair {src!r} -> {dst!r}")


# ---------------------------------------------------------------------------
# conversion


def _conversion_step(src, dst, rows, cols):
    n = np.arange(cols, dtype=float)
    if isinstance(src, Jacobi) and isinstance(dst, Jacobi):
        al, be = src.alpha, src.beta
        s = 2 * n + al + be + 1
        if (dst.alpha, dst.beta) == (al + 1, be):
            # s P_n = (n+a+b+1) P_n^(a+1,b) - (n+b) P_{n-1}^(a+1,b)
            diag = (n + al + be + 1) / s
            sup = -(n + be) / s
        elif (dst.alpha, dst.beta) == (al, be + 1):
            diag = (n + al + be + 1) / s
            sup = (n + al) / s
        else:
            raise UnsupportedOperatorError(f"no single conversion step {src!r} -> {dst!r}")
        diag[0] = 1.0
        sup[0] = 0.0
        ls = jacobi_log_norm(n, al, be)
        diag = diag * np.exp(0.5 * (jacobi_log_norm(n, dst.alpha, dst.beta) - ls))
        sup = sup * np.exp(0.5 * (jacobi_log_norm(np.maximum(n - 1, 0), dst.alpha, dst.beta) - ls))
        return BandedMatrix.from_diagonals(rows, cols, {0: diag, 1: sup[1:]})
    if isinstance(src, WeightedLaguerre) and isinstance(dst, WeightedLaguerre):
        if dst.alpha != src.alpha + 1:
            raise UnsupportedOperatorError(f"no single conversion step {src!r} -> {dst!r}")
        a = src.alpha
        ls = laguerre_log_norm(n, a)
        diag = np.exp(0.5 * (laguerre_log_norm(n, a + 1) - ls))
        sup = -np.exp(0.5 * (laguerre_log_norm(np.maximum(n - 1, 0), a + 1) - ls))
        return BandedMatrix.from_diagonals(rows, cols, {0: diag, 1: sup[1:]})
    raise UnsupportedOperatorError(f"no single conversion step {src!r} -> {dst!r}")


def _ladder(src, dst):
    """Sequence of bases from src to dst along unit parameter steps."""
    if isinstance(src, Jacobi) and isinstance(dst, Jacobi):
        da, db = dst.alpha - src.alpha, dst.beta - src.beta
        if da < 0 or db < 0 or da != int(da) or db != int(db):
            raise UnsupportedOperatorError(f"unsupported conversion {src!r} -> {dst!r}")
        chain = [src]
        a, b = src.alpha, src.beta
        for _ in range(int(max(da, db))):
            if a < dst.alpha:
                a += 1
                chain.append(Jacobi(a, b))
            if b < dst.beta:
                b += 1
                chain.append(Jacobi(a, b))
        return chain
    if isinstance(src, WeightedLaguerre) and isinstance(dst, WeightedLaguerre):
        d = dst.alpha - src.alpha
        if d < 0 or d != int(d):
            raise UnsupportedOperatorError(f"unsupported conversion {src!r} -> {dst!r}")
        return [WeightedLaguerre(src.alpha + k) for k in range(int(d) + 1)]
    raise UnsupportedOperatorError(f"unsupported conversion {src!r} -> {dst!r}")


def compose(ops, rows, cols):
    """Product ops[0] @ ops[1] @ ... cut to rows x cols."""
    ops = list(ops)
    prod = reduce(lambda x, y: x @ y, [o.to_sparse() for o in ops])
    prod = sp.csr_matrix(prod)[:rows, :cols]
    return BandedMatrix.from_sparse(prod)


def conversion_operator(src, dst, rows, cols=None):
    """Section of the identity map from ``src`` coefficients to ``dst``."""
    cols = rows if cols is None else cols
    if src == dst:
        return BandedMatrix.identity(rows, cols)
    if isinstance(src, ShiftedScaled):
        if not isinstance(dst, ShiftedScaled) or (dst.scale, dst.shift) != (src.scale, src.shift):
            raise UnsupportedOperatorError("mapped bases must share the affine map")
        return conversion_operator(src.inner, dst.inner, rows, cols)
    chain = _ladder(src, dst)
    size = max(rows, cols) + len(chain)
    steps = [_conversion_step(chain[k], chain[k + 1], size, size) for k in range(len(chain) - 1)]
    if len(steps) == 1:
        out = steps[0].section(rows, cols)
        return BandedMatrix.from_sparse(out.to_sparse(), 0, steps[0].upper)
    out = compose(steps[::-1], rows, cols)
    return BandedMatrix.from_sparse(out.to_sparse(), 0, len(steps))


# ---------------------------------------------------------------------------
# Jacobi operator and multiplication


def jacobi_operator(basis, rows, cols=None):
    """Tridiagonal section of multiplication by x, symmetric by construction."""
    cols = rows if cols is None else cols
    inner, scale, shift = _unwrap(basis)
    if isinstance(inner, (FourierReal, StandardLegendre)):
        raise UnsupportedOperatorError(f"{basis!r} has no symmetric Jacobi operator")
    fam = _poly_family(inner)
    count = max(rows, cols) + 1
    a, b = _recurrence(fam, count)
    a = (a - shift) / scale
    b = b / scale
    return BandedMatrix.from_diagonals(rows, cols, {-1: b, 0: a, 1: b})


def _sym_lower(m, n):
    """SymBanded from the lower triangle of a sparse n x n matrix."""
    low = sp.tril(sp.csr_matrix(m)[:n, :n]).tocoo()
    keep = low.data != 0
    ii, jj, vv = low.row[keep], low.col[keep], low.data[keep]
    b = int((ii - jj).max()) if ii.size else 0
    out = SymBanded(n, b)
    out.data[ii - jj, jj] = vv
    return out


def multiplication_operator(f: CoeffVec, acting_on, dim) -> SymBanded:
    """Multiplication by f on the coefficients of ``acting_on``, dim x dim.

    Polynomial bases use the Clenshaw recurrence of f's family evaluated at
    the Jacobi operator of ``acting_on``; Fourier uses exact product-to-sum.
    """
    fin, fscale, fshift = _unwrap(f.basis)
    ain, ascale, ashift = _unwrap(acting_on)
    if isinstance(fin, FourierReal) or isinstance(ain, FourierReal):
        if not (isinstance(fin, FourierReal) and isinstance(ain, FourierReal)):
            raise UnsupportedOperatorError("Fourier multiplication needs Fourier coefficients")
        return _fourier_multiplication(f.coeffs, dim)
    if (fscale, fshift) != (ascale, ashift):
        raise UnsupportedOperatorError("coefficient and basis must share the affine map")
    fam = _poly_family(fin)
    m = f.degree
    size = dim + m + 2
    x = jacobi_operator(ain, size).to_sparse()
    a, b = _recurrence(fam, m + 2)
    eye = sp.identity(size, format="csr")
    c = f.coeffs
    y1 = sp.csr_matrix((size, size))
    y2 = sp.csr_matrix((size, size))
    for k in range(m, -1, -1):
        y0 = c[k] * eye
        if k < m:
            y0 = y0 + (x @ y1 - a[k] * y1) / b[k]
        if k < m - 1:
            y0 = y0 - (b[k] / b[k + 1]) * y2
        y2, y1 = y1, y0
    return _sym_lower(_p0(fam) * y1, dim)


def _fourier_complex(count):
    """Complex exponential content of the real Fourier functions.

    Returns (freq, coef) arrays of shape (count, 2): phi_i = sum coef * e^{i freq t}.
    """
    k = fourier_freq(count).astype(float)
    freq = np.stack([k, -k], axis=1)
    coef = np.zeros((count, 2), dtype=complex)
    coef[0] = [1 / np.sqrt(2 * np.pi), 0.0]
    odd = np.arange(count) % 2 == 1
    even = (np.arange(count) % 2 == 0) & (np.arange(count) > 0)
    s = 1 / np.sqrt(np.pi)
    coef[odd] = [s / 2j, -s / 2j]
    coef[even] = [s / 2, s / 2]
    return freq, coef


def _fourier_multiplication(fc, dim):
    m = fc.size
    ffreq, fcoef = _fourier_complex(m)
    # f = sum_p F_p e^{i p t}
    coeffs = {}
    for i in range(m):
        for t in range(2):
            if fcoef[i, t] != 0 and fc[i] != 0:
                p = int(ffreq[i, t])
                coeffs[p] = coeffs.get(p, 0.0) + fc[i] * fcoef[i, t]
    bfreq, bcoef = _fourier_complex(dim)
    kmax = int(fourier_freq(m)[-1]) if m else 0
    # index of the sin / cos function of frequency k
    def idx_sin(k):
        return 2 * k - 1

    def idx_cos(k):
        return 0 if k == 0 else 2 * k

    rows, cols, vals = [], [], []
    for j in range(dim):
        kj = int(bfreq[j, 0])
        for i in range(j, dim):
            ki = int(bfreq[i, 0])
            if ki - kj > kmax:
                break
            acc = 0.0
            for r in range(2):
                if bcoef[i, r] == 0:
                    continue
                for s_ in range(2):
                    if bcoef[j, s_] == 0:
                        continue
                    p = -int(bfreq[i, r]) - int(bfreq[j, s_])
                    fp = coeffs.get(p)
                    if fp is not None:
                        acc += bcoef[i, r] * fp * bcoef[j, s_]
            val = float(np.real(2 * np.pi * acc))
            if abs(val) > 1e-14 * max(1.0, np.abs(fc).max()):
                rows.append(i)
                cols.append(j)
                vals.append(val)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim))
    return _sym_lower(mat, dim)


def fourier_multiplication_bandwidth(f: CoeffVec):
    return 2 * int(fourier_freq(f.coeffs.size)[-1]) if f.coeffs.size else 0


# ---------------------------------------------------------------------------
# boundary functionals


def boundary_row(basis, point, length, deriv=0):
    """Row with entry n = (d^deriv/dx^deriv basis_n)(point)."""
    inner, scale, shift = _unwrap(basis)
    if np.isinf(point):
        if isinstance(inner, WeightedLaguerre) and point > 0:
            return np.zeros(length)
        raise UnsupportedOperatorError(f"cannot evaluate {basis!r} at {point}")
    if isinstance(inner, StandardLegendre):
        n = np.arange(length, dtype=float)
        plain = legendre() if basis is inner else ShiftedScaled(legendre(), scale, shift)
        return boundary_row(plain, point, length, deriv) * np.sqrt(2.0 / (2 * n + 1))
    if deriv == 0:
        t = scale * point + shift
        if isinstance(inner, (Jacobi, WeightedJacobi)) and abs(abs(t) - 1) < 1e-15:
            return np.sqrt(scale) * _jacobi_endpoint(inner, length, np.sign(t))
        return eval_basis(basis, length, [point])[:, 0]
    tgt = diff_target(basis)
    d = diff_operator(basis, tgt, length + 1, length).to_sparse()
    return d.T @ boundary_row(tgt, point, length + 1, deriv - 1)


def _jacobi_endpoint(inner, length, sign):
    n = np.arange(length, dtype=float)
    if isinstance(inner, WeightedJacobi):
        return np.zeros(length)
    if isinstance(inner, StandardLegendre):
        return np.ones(length) if sign > 0 else (-1.0) ** n
    al, be = inner.alpha, inner.beta
    if sign > 0:
        lv = np.log(poch(n + 1, al)) - gammaln(al + 1)
        sgn = 1.0
    else:
        lv = np.log(poch(n + 1, be)) - gammaln(be + 1)
        sgn = (-1.0) ** n
    return sgn * np.exp(lv - 0.5 * jacobi_log_norm(n, al, be))
