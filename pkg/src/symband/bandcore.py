"""Banded matrix storage and structure-preserving factorizations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _kernels as K
from .errors import (
    BandStructureError,
    BreakdownError,
    NotPositiveDefiniteError,
    SingularConversionError,
)

EPS = np.finfo(float).eps


class BandedMatrix:
    """General banded matrix in column-major LAPACK band layout.

    Entry (i, j) with -upper <= i - j <= lower lives at
    ``data[upper + i - j, j]``. Slots that fall outside the matrix are kept
    at zero.
    """

    __slots__ = ("rows", "cols", "lower", "upper", "data")

    def __init__(self, rows, cols, lower, upper, data=None):
        if rows < 0 or cols < 0 or lower < 0 or upper < 0:
            raise ValueError("dimensions and bandwidths must be non-negative")
        self.rows = int(rows)
        self.cols = int(cols)
        self.lower = int(lower)
        self.upper = int(upper)
        shape = (self.lower + self.upper + 1, self.cols)
        if data is None:
            data = np.zeros(shape)
        else:
            data = np.ascontiguousarray(data, dtype=float)
            if data.shape != shape:
                raise ValueError(f"band data has shape {data.shape}, expected {shape}")
        self.data = data

    # -- construction -----------------------------------------------------
    @classmethod
    def identity(cls, n, cols=None):
        cols = n if cols is None else cols
        out = cls(n, cols, 0, 0)
        out.data[0, : min(n, cols)] = 1.0
        return out

    @classmethod
    def from_dense(cls, a, lower=None, upper=None):
        a = np.asarray(a, dtype=float)
        rows, cols = a.shape
        ii, jj = np.nonzero(a)
        if lower is None:
            lower = int(max(0, (ii - jj).max())) if ii.size else 0
        if upper is None:
            upper = int(max(0, (jj - ii).max())) if ii.size else 0
        out = cls(rows, cols, lower, upper)
        off = ii - jj
        if ii.size and (off.max() > lower or -off.min() > upper):
            raise BandStructureError("dense matrix has entries outside the declared band")
        out.data[upper + ii - jj, jj] = a[ii, jj]
        return out

    @classmethod
    def from_diagonals(cls, rows, cols, diagonals):
        """Build from ``{offset: values}`` with offset = j - i."""
        lower = max([0] + [-k for k in diagonals])
        upper = max([0] + [k for k in diagonals])
        out = cls(rows, cols, lower, upper)
        for k, vals in diagonals.items():
            vals = np.asarray(vals, dtype=float)
            if k >= 0:
                j = np.arange(k, min(cols, rows + k))
            else:
                j = np.arange(0, min(cols, rows + k))
            out.data[upper - k, j] = vals[: j.size] if vals.ndim else vals
        return out

    @classmethod
    def from_sparse(cls, m, lower=None, upper=None):
        coo = sp.coo_matrix(m)
        keep = coo.data != 0
        ii, jj, vv = coo.row[keep], coo.col[keep], coo.data[keep]
        if lower is None:
            lower = int(max(0, (ii - jj).max())) if ii.size else 0
        if upper is None:
            upper = int(max(0, (jj - ii).max())) if ii.size else 0
        out = cls(coo.shape[0], coo.shape[1], lower, upper)
        if ii.size:
            off = ii - jj
            if off.max() > lower or -off.min() > upper:
                raise BandStructureError("sparse matrix has entries outside the declared band")
            np.add.at(out.data, (upper + ii - jj, jj), vv)
        return out

    # -- element access ---------------------------------------------------
    def _check(self, i, j):
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"index ({i}, {j}) outside {self.rows}x{self.cols}")

    def in_band(self, i, j):
        return -self.upper <= i - j <= self.lower

    def get(self, i, j):
        self._check(i, j)
        if not self.in_band(i, j):
            return 0.0
        return float(self.data[self.upper + i - j, j])

    def set(self, i, j, v):
        self._check(i, j)
        if not self.in_band(i, j):
            raise BandStructureError(
                f"entry ({i}, {j}) is outside the band (lower={self.lower}, upper={self.upper})"
            )
        self.data[self.upper + i - j, j] = v

    def diagonal(self, k=0):
        """Entries of diagonal offset k = j - i."""
        if k > self.upper or -k > self.lower:
            n = max(0, min(self.rows, self.cols - k) if k >= 0 else min(self.rows + k, self.cols))
            return np.zeros(n)
        if k >= 0:
            j = np.arange(k, min(self.cols, self.rows + k))
        else:
            j = np.arange(0, min(self.cols, self.rows + k))
        return self.data[self.upper - k, j].copy()

    # -- conversion -------------------------------------------------------
    def to_sparse(self):
        offsets = self.upper - np.arange(self.lower + self.upper + 1)
        return sp.dia_matrix((self.data, offsets), shape=(self.rows, self.cols)).tocsr()

    def to_dense(self):
        out = np.zeros((self.rows, self.cols))
        for k in range(self.lower + self.upper + 1):
            off = self.upper - k  # j - i
            if off >= 0:
                j = np.arange(off, min(self.cols, self.rows + off))
            else:
                j = np.arange(0, min(self.cols, self.rows + off))
            out[j - off, j] = self.data[k, j]
        return out

    def copy(self):
        return BandedMatrix(self.rows, self.cols, self.lower, self.upper, self.data.copy())

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def T(self):
        out = BandedMatrix(self.cols, self.rows, self.upper, self.lower)
        for k in range(self.lower + self.upper + 1):
            off = self.upper - k
            if off >= 0:
                j = np.arange(off, min(self.cols, self.rows + off))
            else:
                j = np.arange(0, min(self.cols, self.rows + off))
            i = j - off
            # in the transpose the entry moves to (j, i) with offset -off
            out.data[out.upper + off, i] = self.data[k, j]
        return out

    def section(self, rows, cols=None):
        """Leading rows x cols block (zero-padded if larger)."""
        cols = rows if cols is None else cols
        out = BandedMatrix(rows, cols, self.lower, self.upper)
        c = min(cols, self.cols)
        out.data[:, :c] = self.data[:, :c]
        # clear slots that now fall below the last row
        for k in range(self.lower + self.upper + 1):
            i = np.arange(c) + k - self.upper
            dead = i >= min(rows, self.rows)
            out.data[k, :c][dead] = 0.0
        return out

    def trimmed(self, tol=0.0):
        """Same matrix with the bandwidths shrunk to the nonzero profile."""
        return BandedMatrix.from_sparse(self._nonzero_sparse(tol))

    def _nonzero_sparse(self, tol):
        s = self.to_sparse().tocoo()
        keep = np.abs(s.data) > tol
        return sp.coo_matrix((s.data[keep], (s.row[keep], s.col[keep])), shape=s.shape)

    def norm_fro(self):
        return float(np.linalg.norm(self.data))

    def __matmul__(self, other):
        if isinstance(other, BandedMatrix):
            if self.cols != other.rows:
                raise ValueError("dimension mismatch in banded product")
            prod = self.to_sparse() @ other.to_sparse()
            return BandedMatrix.from_sparse(
                prod,
                lower=min(self.lower + other.lower, max(0, self.rows - 1)),
                upper=min(self.upper + other.upper, max(0, other.cols - 1)),
            )
        return self.to_sparse() @ np.asarray(other)

    def __add__(self, other):
        if not isinstance(other, BandedMatrix) or other.shape != self.shape:
            return NotImplemented
        return BandedMatrix.from_sparse(
            self.to_sparse() + other.to_sparse(),
            lower=max(self.lower, other.lower),
            upper=max(self.upper, other.upper),
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return BandedMatrix(self.rows, self.cols, self.lower, self.upper, scalar * self.data)

    def __mul__(self, scalar):
        return self.__rmul__(scalar)

    def __repr__(self):
        return (
            f"BandedMatrix({self.rows}x{self.cols}, lower={self.lower}, upper={self.upper})"
        )


class SymBanded:
    """Symmetric band matrix holding only its lower band.

    ``data[r, j] = A[j + r, j]`` for r = 0..b.
    """

    __slots__ = ("dim", "b", "data")

    def __init__(self, dim, b, data=None):
        self.dim = int(dim)
        self.b = int(b)
        shape = (self.b + 1, self.dim)
        if data is None:
            data = np.zeros(shape)
        else:
            data = np.ascontiguousarray(data, dtype=float)
            if data.shape != shape:
                raise ValueError(f"band data has shape {data.shape}, expected {shape}")
        self.data = data

    @classmethod
    def identity(cls, n):
        out = cls(n, 0)
        out.data[0] = 1.0
        return out

    @classmethod
    def from_dense(cls, a, b=None):
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        if b is None:
            ii, jj = np.nonzero(np.tril(a))
            b = int((ii - jj).max()) if ii.size else 0
        out = cls(n, b)
        for r in range(b + 1):
            out.data[r, : n - r] = np.diagonal(a, -r)
        return out

    @classmethod
    def from_diagonals(cls, n, diagonals):
        """``diagonals[r]`` holds A[j + r, j] for j = 0..n-r-1."""
        b = len(diagonals) - 1
        out = cls(n, b)
        for r, vals in enumerate(diagonals):
            out.data[r, : n - r] = np.asarray(vals, dtype=float)[: n - r]
        return out

    @classmethod
    def from_lower(cls, m: BandedMatrix, b=None):
        """Symmetric matrix whose lower triangle is that of ``m``."""
        b = m.lower if b is None else b
        n = m.rows
        out = cls(n, b)
        for r in range(min(b, m.lower) + 1):
            out.data[r, : n - r] = m.data[m.upper + r, : n - r]
        return out

    def get(self, i, j):
        if not (0 <= i < self.dim and 0 <= j < self.dim):
            raise IndexError(f"index ({i}, {j}) outside {self.dim}x{self.dim}")
        if i < j:
            i, j = j, i
        if i - j > self.b:
            return 0.0
        return float(self.data[i - j, j])

    def set(self, i, j, v):
        if i < j:
            i, j = j, i
        if i - j > self.b:
            raise BandStructureError(f"entry ({i}, {j}) is outside half-bandwidth {self.b}")
        self.data[i - j, j] = v

    def to_dense(self):
        n = self.dim
        out = np.zeros((n, n))
        for r in range(self.b + 1):
            j = np.arange(n - r)
            out[j + r, j] = self.data[r, : n - r]
            out[j, j + r] = self.data[r, : n - r]
        return out

    def to_banded(self):
        n, b = self.dim, self.b
        out = BandedMatrix(n, n, b, b)
        for r in range(b + 1):
            out.data[b + r, : n - r] = self.data[r, : n - r]
            out.data[b - r, r:] = self.data[r, : n - r]
        return out

    def to_sparse(self):
        return self.to_banded().to_sparse()

    def padded(self, width):
        """Lower storage with ``width + 1`` rows (extra rows zero)."""
        out = np.zeros((width + 1, self.dim))
        k = min(width, self.b) + 1
        out[:k] = self.data[:k]
        return out

    def section(self, n):
        n = min(n, self.dim)
        out = SymBanded(n, self.b, self.data[:, :n].copy())
        for r in range(1, self.b + 1):
            out.data[r, max(0, n - r):] = 0.0
        return out

    def matvec(self, x):
        return self.to_sparse() @ np.asarray(x)

    def norm_fro(self):
        off = self.data[1:]
        return float(np.sqrt(np.sum(self.data[0] ** 2) + 2.0 * np.sum(off**2)))

    def norm_inf(self):
        return float(np.abs(self.to_sparse()).sum(axis=1).max()) if self.dim else 0.0

    def copy(self):
        return SymBanded(self.dim, self.b, self.data.copy())

    def __add__(self, other):
        if not isinstance(other, SymBanded) or other.dim != self.dim:
            return NotImplemented
        b = max(self.b, other.b)
        return SymBanded(self.dim, b, self.padded(b) + other.padded(b))

    def __rmul__(self, scalar):
        return SymBanded(self.dim, self.b, scalar * self.data)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __repr__(self):
        return f"SymBanded(dim={self.dim}, b={self.b})"


@dataclass(frozen=True)
class Pencil:
    """Symmetric-definite pencil (a, b); b must be positive-definite."""

    a: SymBanded
    b: SymBanded

    def __post_init__(self):
        if self.a.dim != self.b.dim:
            raise ValueError(f"pencil dims differ: {self.a.dim} vs {self.b.dim}")

    @property
    def dim(self):
        return self.a.dim

    @property
    def bandwidth(self):
        return max(self.a.b, self.b.b)

    def section(self, n):
        return Pencil(self.a.section(n), self.b.section(n))

    def shifted(self, sigma):
        """The symmetric band a - sigma * b."""
        return self.a - sigma * self.b


# ---------------------------------------------------------------------------
# banded QR


class GivensSequence:
    """Q = G_1^T G_2^T ... G_k^T diag(signs), rotations on rows (i, i+1)."""

    def __init__(self, n, idx, c, s, signs):
        self.n = n
        self.idx = np.ascontiguousarray(idx, dtype=np.int64)
        self.c = np.ascontiguousarray(c, dtype=float)
        self.s = np.ascontiguousarray(s, dtype=float)
        self.signs = np.asarray(signs, dtype=float)

    def __len__(self):
        return int(self.idx.size)

    def _as2d(self, x):
        x = np.array(x, dtype=float, copy=True)
        return (x[:, None], True) if x.ndim == 1 else (x, False)

    def apply(self, x):
        """Q x."""
        y, flat = self._as2d(x)
        y *= self.signs[:, None]
        K.givens_apply_kernel(y, self.idx, self.c, self.s, len(self), False)
        return y[:, 0] if flat else y

    def apply_transpose(self, x):
        """Q^T x."""
        y, flat = self._as2d(x)
        K.givens_apply_kernel(y, self.idx, self.c, self.s, len(self), True)
        y *= self.signs[:, None]
        return y[:, 0] if flat else y

    def to_dense(self):
        return self.apply(np.eye(self.n))


def band_qr(m: BandedMatrix):
    """Givens QR of a banded matrix with rows >= cols.

    Returns ``(q, r)`` where ``q`` is a :class:`GivensSequence` and ``r`` is
    upper banded (rows x cols, zero below row cols) with a non-negative
    diagonal.
    """
    if m.rows < m.cols:
        raise ValueError("band_qr needs rows >= cols")
    lw, uw = m.lower, m.lower + m.upper
    w = np.zeros((uw + lw + 1, m.cols))
    w[uw - m.upper :, :] = m.data
    cap = max(1, m.cols * max(lw, 1))
    li = np.zeros(cap, dtype=np.int64)
    lc = np.zeros(cap)
    ls = np.zeros(cap)
    cnt = K.band_qr_kernel(w, m.rows, m.cols, lw, uw, li, lc, ls)
    signs = np.ones(m.rows)
    diag = w[uw, : min(m.rows, m.cols)]
    neg = diag < 0
    signs[: diag.size][neg] = -1.0
    r = BandedMatrix(m.rows, m.cols, 0, uw, w[: uw + 1].copy())
    rows_neg = np.nonzero(neg)[0]
    for k in range(uw + 1):
        t = rows_neg + k
        t = t[t < m.cols]
        r.data[uw - k, t] *= -1.0
    q = GivensSequence(m.rows, li[:cnt], lc[:cnt], ls[:cnt], signs)
    return q, r


def tri_upper_partial_inverse(c: BandedMatrix, extra_upper: int) -> BandedMatrix:
    """Upper band of width ``extra_upper`` of the inverse of upper-triangular c."""
    if c.rows != c.cols:
        raise ValueError("partial inverse needs a square matrix")
    if c.lower != 0:
        nz = c.data[c.upper + 1 :]
        if np.any(nz != 0):
            raise ValueError("matrix is not upper-triangular")
    n = c.rows
    cb = np.ascontiguousarray(c.data[: c.upper + 1])
    pb = np.zeros((extra_upper + 1, n))
    bad = K.partial_inverse_kernel(cb, n, c.upper, extra_upper, pb)
    if bad >= 0:
        raise SingularConversionError(f"zero diagonal entry at index {bad}")
    return BandedMatrix(n, n, 0, extra_upper, pb)


# ---------------------------------------------------------------------------
# LDL^T


@dataclass(frozen=True)
class LDLT:
    """Unpivoted banded factorization s - shift * t = L D L^T."""

    d: np.ndarray
    l: BandedMatrix
    inertia: tuple
    _lb: np.ndarray
    _b: int

    def solve(self, x):
        x = np.array(x, dtype=float, copy=True)
        flat = x.ndim == 1
        y = x[:, None] if flat else x
        y = np.ascontiguousarray(y)
        K.ldlt_solve_kernel(self._lb, self.d, self.d.size, self._b, y)
        return y[:, 0] if flat else y


def ldlt_banded(s: SymBanded, shift: float = 0.0, t: SymBanded | None = None) -> LDLT:
    """Factor s - shift * t (or s - shift * I when t is None) without pivoting.

    The inertia triple counts negative, zero and positive pivots, with
    |d_i| <= eps * ||s - shift t||_inf counted as zero.
    """
    if t is None:
        t = SymBanded.identity(s.dim)
    if t.dim != s.dim:
        raise ValueError("dimension mismatch")
    m = s - shift * t if shift != 0.0 else s
    n, b = m.dim, m.b
    ab = np.ascontiguousarray(m.data)
    dvals = np.zeros(n)
    lb = np.zeros((b + 1, n))
    bad = K.ldlt_kernel(ab, n, b, dvals, lb)
    if bad >= 0:
        raise BreakdownError(f"zero pivot at index {bad} (shift {shift!r})", index=bad)
    lb[0] = 1.0
    l = BandedMatrix(n, n, b, 0, lb.copy())
    tol = EPS * m.norm_inf()
    neg = int(np.sum(dvals < -tol))
    zero = int(np.sum(np.abs(dvals) <= tol))
    inertia = (neg, zero, n - neg - zero)
    return LDLT(dvals, l, inertia, lb, b)


# ---------------------------------------------------------------------------
# split Cholesky


def split_index(n: int, b: int) -> int:
    """Row where the split factor switches from upper to lower triangular."""
    return min(n, (n + b) // 2)


def split_cholesky(bmat: SymBanded) -> BandedMatrix:
    """Split Cholesky factor S with B = S^T S.

    S is upper triangular in rows [0, m) and lower triangular in rows
    [m, n) with m = ``split_index(n, b)``; it keeps the half-bandwidth b.
    """
    n, b = bmat.dim, bmat.b
    wb = bmat.data.copy()
    sd = np.zeros((2 * b + 1, n))
    m = split_index(n, b)
    bad = K.split_cholesky_kernel(wb, n, b, m, sd)
    if bad >= 0:
        raise NotPositiveDefiniteError(f"non-positive pivot at index {bad}", index=bad)
    return BandedMatrix(n, n, b, b, sd)


def gershgorin_disks(s: SymBanded):
    """List of (center, radius) for each row of the symmetric band."""
    a = abs(s.to_sparse())
    diag = s.data[0].copy()
    radii = np.asarray(a.sum(axis=1)).ravel() - np.abs(diag)
    return [(float(c), float(r)) for c, r in zip(diag, np.maximum(radii, 0.0))]
