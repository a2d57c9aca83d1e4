"""Adaptive spectral decompositions of infinite symmetric banded operators.

An operator is read lazily from an :class:`OperatorStream`. Each sweep
eigensolves a leading window, deflates the eigenpairs whose coupling to the
tail (the spike) is negligible, and folds the remaining window back into
banded form. The transformations are kept as dense blocks with offsets in a
:class:`FactorChain`, which can later apply functions of the operator.

Deflation zeroes the leading columns of the spike, so windows are sorted
ascending and the smallest eigenvalues leave first. That presumes the
spectrum is bounded below; ``order="descending"`` handles the mirror case.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sl

from .bandcore import EPS, Pencil, SymBanded
from .eigsolve import gen_sym_band_eig, sym_band_eig
from .errors import PencilConditioningError, SpectralDomainError, WindowCapError

__all__ = [
    "AssumptionWarning",
    "ChainSupportWarning",
    "DeflationReport",
    "Factor",
    "FactorChain",
    "OperatorStream",
    "RestoredBand",
    "apply_chain",
    "deflation_check",
    "growth_threshold",
    "restore_band",
    "sb_aed",
    "sdb_aed",
]

GROWTH = math.sqrt(2.0) - 1.0


class AssumptionWarning(UserWarning):
    """Deflated eigenvalues exceed a Gerschgorin lower bound of the tail."""


class ChainSupportWarning(UserWarning):
    """A vector reaches beyond the resolved part of a factor chain."""


# ---------------------------------------------------------------------------
# streams


class OperatorStream:
    """Lazily generated symmetric banded operator with half-bandwidth ``b``.

    Entries come either from ``entry(i, j)`` or, faster, from
    ``section(n) -> SymBanded`` returning the exact leading n x n section.
    Sections are cached and regrown by doubling. ``dim`` is None for an
    infinite operator.
    """

    def __init__(self, b, entry=None, *, section=None, dim=None, label=""):
        if entry is None and section is None:
            raise ValueError("a stream needs an entry generator or a section builder")
        self.b = int(b)
        self.dim = None if dim is None else int(dim)
        self.label = label
        self._entry = entry
        self._section = section
        self._cache = None

    @classmethod
    def from_symbanded(cls, s: SymBanded, label=""):
        """Finite stream over a fixed band matrix."""
        return cls(s.b, section=lambda n: s.section(n), dim=s.dim, label=label)

    @classmethod
    def diagonal(cls, fn, b=1, dim=None, label=""):
        """Diagonal operator d(n), optionally declared with a wider band."""
        return cls(b, lambda i, j: float(fn(i)) if i == j else 0.0, dim=dim, label=label)

    def _grow(self, n):
        if self.dim is not None:
            n = min(n, self.dim)
        have = 0 if self._cache is None else self._cache.dim
        if have >= n:
            return
        size = max(n, 2 * have, 64)
        if self.dim is not None:
            size = min(size, self.dim)
        if self._section is not None:
            raw = self._section(size)
            data = np.zeros((self.b + 1, size))
            k = min(raw.b, self.b) + 1
            if np.any(raw.data[k:]):
                raise ValueError(f"stream section exceeds the declared bandwidth {self.b}")
            data[:k] = raw.data[:k]
            self._cache = SymBanded(size, self.b, data)
        else:
            data = np.zeros((self.b + 1, size))
            for r in range(self.b + 1):
                for j in range(size - r):
                    data[r, j] = self._entry(j + r, j)
            self._cache = SymBanded(size, self.b, data)

    def entry(self, i, j):
        if self._entry is not None and (self._section is None):
            return float(self._entry(i, j)) if abs(i - j) <= self.b else 0.0
        self._grow(max(i, j) + 1)
        return self._cache.get(i, j)

    def section(self, n) -> SymBanded:
        self._grow(n)
        return self._cache.section(n)

    def block(self, r0, r1, c0=None, c1=None):
        """Dense block of rows [r0, r1) and columns [c0, c1) (default: square)."""
        c0, c1 = (r0, r1) if c0 is None else (c0, c1)
        out = np.zeros((max(r1 - r0, 0), max(c1 - c0, 0)))
        if out.size == 0:
            return out
        self._grow(max(r1, c1))
        data, b = self._cache.data, self.b
        for i in range(r0, r1):
            lo, hi = max(c0, i - b), min(c1, i + b + 1)
            for j in range(lo, hi):
                r, c = (i - j, j) if i >= j else (j - i, i)
                out[i - r0, j - c0] = data[r, c]
        return out

    def negated(self):
        return OperatorStream(self.b, section=lambda n: -1.0 * self.section(n), dim=self.dim, label=self.label)

    def __repr__(self):
        size = "inf" if self.dim is None else self.dim
        return f"OperatorStream(b={self.b}, dim={size}{', ' + self.label if self.label else ''})"


# ---------------------------------------------------------------------------
# deflation criterion


@dataclass
class DeflationReport:
    """Outcome of one deflation test on a window of size ``window``.

    ``candidates[i]`` is a tested deflation count, ``spike_norms[i]`` the
    accumulated squared spike norm for it and ``thresholds[i]`` the bound it
    was compared with. Sweep bookkeeping is filled in by the drivers.
    """

    window: int
    deflated: int
    candidates: np.ndarray
    spike_norms: np.ndarray
    thresholds: np.ndarray
    offset: int = 0
    doubled: bool = False
    next_window: int = 0
    window_end: int = 0
    offband_defect: float = 0.0
    assumption_ok: bool = True


def deflation_check(m_spike, lam, lam_max_global, tol, b, n_spike=None, side="standard") -> DeflationReport:
    """Largest multiple of b whose leading spike columns are negligible.

    Standard side: ||M[:, :j]||_F^2 <= tol (|lam_j| + |lam_1|)(|lam_j| + lam_max).
    Generalized side adds |lam_j|^2 ||N[:, :j]||_F^2 on the left. ``lam`` is
    sorted ascending and lam_j is its j-th entry. Squared norms accumulate
    column by column.
    """
    if side not in ("standard", "generalized"):
        raise ValueError(f"unknown side {side!r}")
    m_spike = np.atleast_2d(np.asarray(m_spike, dtype=float))
    lam = np.asarray(lam, dtype=float)
    k = lam.size
    if m_spike.shape[1] != k:
        raise ValueError("spike width must match the number of window eigenvalues")
    colm = np.sum(m_spike**2, axis=0) if m_spike.size else np.zeros(k)
    coln = None
    if side == "generalized":
        n_spike = np.atleast_2d(np.asarray(n_spike, dtype=float))
        coln = np.sum(n_spike**2, axis=0) if n_spike.size else np.zeros(k)
    cands, norms, bounds = [], [], []
    acc_m = 0.0
    acc_n = 0.0
    best = 0
    for j in range(1, k + 1):
        acc_m += colm[j - 1]
        if coln is not None:
            acc_n += coln[j - 1]
        if j % b and j != k:
            continue
        top = abs(lam[j - 1])
        lhs = acc_m + (top * top * acc_n if coln is not None else 0.0)
        rhs = tol * (top + abs(lam[0])) * (top + abs(lam_max_global))
        cands.append(j)
        norms.append(lhs)
        bounds.append(rhs)
        if lhs <= rhs:
            best = j
    return DeflationReport(k, best, np.array(cands, dtype=int), np.array(norms), np.array(bounds))


def growth_threshold(k, b):
    """Deflation count below which the next window doubles."""
    need = math.ceil(GROWTH * k)
    return b * math.ceil(need / b)


# ---------------------------------------------------------------------------
# restoring band structure after a deflation


@dataclass(frozen=True)
class RestoredBand:
    """Orthogonal Z with Z^T W Z banded and the spike folded into its last columns.

    ``coupling[t, c]`` couples tail row t to window column
    ``size - coupling.shape[1] + c``.
    """

    z: np.ndarray
    window: np.ndarray
    coupling: np.ndarray
    offband_defect: float


def _house(x):
    """v, beta with (I - beta v v^T) x = alpha e_last."""
    v = np.array(x, dtype=float, copy=True)
    alpha = np.linalg.norm(v)
    if alpha == 0.0:
        return v, 0.0
    if v[-1] > 0:
        alpha = -alpha
    v[-1] -= alpha
    vv = v @ v
    return v, (2.0 / vv if vv > 0 else 0.0)


def restore_band(window, spike, b) -> RestoredBand:
    """Fold a spike into the last b columns and reduce the window to bandwidth b.

    ``window`` is an l x l symmetric block (the undeflated eigenvalues, or any
    dense block) and ``spike`` its coupling to the next tail rows (r x l,
    r <= b). The fold is a QL factorization of spike^T. The dense window is
    then reduced from the last row upwards by Householder reflectors on
    leading index ranges, which never touch the folded spike.
    """
    w = np.array(window, dtype=float, copy=True)
    if w.ndim == 1:
        w = np.diag(w)
    l = w.shape[0]
    spike = np.atleast_2d(np.asarray(spike, dtype=float)).reshape(-1, l)
    rows = spike.shape[0]
    scale = max(np.linalg.norm(w), np.linalg.norm(spike), np.finfo(float).tiny)
    z = np.eye(l)
    defect = 0.0
    width = min(b, l)
    if rows and l:
        # spike^T = Z1 [0; L]: QR of the index-reversed problem
        q, r = np.linalg.qr(spike.T[::-1, ::-1], mode="complete")
        z = q[::-1, ::-1].copy()
        folded = spike @ z
        mask = np.zeros_like(folded, dtype=bool)
        for t in range(rows):
            mask[t, : max(l - rows + t, 0)] = True
        defect = max(defect, float(np.abs(folded[mask]).max(initial=0.0)))
        folded[mask] = 0.0
        w = z.T @ w @ z
        coupling = folded[:, l - width :]
    else:
        coupling = np.zeros((rows, width))
    for i in range(l - 1, b, -1):
        # zero row i left of column i - b; the reflector spans [0, i - b]
        m = i - b + 1
        v, beta = _house(w[i, :m])
        if beta == 0.0:
            continue
        w[:m, :] -= beta * np.outer(v, v @ w[:m, :])
        w[:, :m] -= beta * np.outer(w[:, :m] @ v, v)
        z[:, :m] -= beta * np.outer(z[:, :m] @ v, v)
        defect = max(defect, float(np.abs(w[i, : m - 1]).max(initial=0.0)))
        w[i, : m - 1] = 0.0
        w[: m - 1, i] = 0.0
    w = 0.5 * (w + w.T)
    for r in range(b + 1, l):
        idx = np.arange(l - r)
        defect = max(defect, float(np.abs(w[idx + r, idx]).max(initial=0.0)))
        w[idx + r, idx] = 0.0
        w[idx, idx + r] = 0.0
    return RestoredBand(z, w, coupling, defect / scale)


# ---------------------------------------------------------------------------
# factor chains


@dataclass(frozen=True)
class Factor:
    """Dense block acting on global indices [offset, offset + size)."""

    offset: int
    block: np.ndarray
    kind: str

    @property
    def size(self):
        return self.block.shape[0]

    @property
    def end(self):
        return self.offset + self.size


@dataclass
class FactorChain:
    """Deflated eigenvalues with the transformations that expose them.

    With X the product of the factors in order, X^T L X (or X^T A X with
    X^T B X = I) equals diag(values) on the leading indices followed by the
    frontier. Eigenvector i is X e_i.
    """

    kind: str
    bandwidth: int
    values: np.ndarray
    ranges: list
    factors: list
    frontier: dict
    reports: list
    tol: float
    sign: float = 1.0
    stream_dim: int | None = None

    @property
    def deflated(self):
        return list(zip(self.values.tolist(), self._index_ranges()))

    def _index_ranges(self):
        out = []
        for lo, hi in self.ranges:
            out.extend([(lo, hi)] * (hi - lo))
        return out

    @property
    def support(self):
        """One past the largest global index any factor touches."""
        return max([f.end for f in self.factors], default=self.values.size)

    def sorted_values(self):
        return np.sort(self.values)

    def apply_factors(self, y):
        """X y for a vector or block indexed from 0."""
        y = np.array(y, dtype=float, copy=True)
        for f in reversed(self.factors):
            if f.offset < y.shape[0]:
                hi = min(f.end, y.shape[0])
                y[f.offset : hi] = f.block[: hi - f.offset, : hi - f.offset] @ y[f.offset : hi]
        return y

    def apply_transpose(self, v):
        """X^T v."""
        y = np.array(v, dtype=float, copy=True)
        for f in self.factors:
            if f.offset < y.shape[0]:
                hi = min(f.end, y.shape[0])
                y[f.offset : hi] = f.block[: hi - f.offset, : hi - f.offset].T @ y[f.offset : hi]
        return y

    def eigenvector(self, i):
        n = max(self.support, i + 1)
        e = np.zeros(n)
        e[i] = 1.0
        return self.apply_factors(e)

    def eigenvectors(self, count=None):
        count = self.values.size if count is None else count
        n = max(self.support, count)
        return self.apply_factors(np.eye(n)[:, :count])

    def residuals(self, a: OperatorStream, b: OperatorStream | None = None, count=None):
        """||A v - lam B v|| / ((||A|| + |lam| ||B||) ||v||) on a section 2b past the support."""
        count = self.values.size if count is None else count
        v = self.eigenvectors(count)
        n = v.shape[0] + 2 * self.bandwidth
        if a.dim is not None:
            n = min(n, a.dim)
        vv = np.zeros((n, count))
        vv[: v.shape[0]] = v[:n]
        sa = a.section(n)
        av = sa.to_sparse() @ vv
        if b is None:
            bv, nb = vv, 1.0
        else:
            sb = b.section(n)
            bv, nb = sb.to_sparse() @ vv, sb.norm_fro()
        lam = self.values[:count]
        r = np.linalg.norm(av - bv * lam, axis=0)
        return r / ((sa.norm_fro() + np.abs(lam) * nb) * np.linalg.norm(vv, axis=0))


def _extend(front, cpl, base, b):
    """Overlay the frontier onto a stream block whose leading rows it replaces."""
    w = base
    s = front.shape[0]
    if s:
        w[:s, :s] = front
        if cpl is not None and cpl.size:
            rows = min(cpl.shape[0], w.shape[0] - s)
            cols = cpl.shape[1]
            w[s : s + rows, s - cols : s] = cpl[:rows]
            w[s - cols : s, s : s + rows] = cpl[:rows].T
    return w


def _tail_bound(stream, start, count):
    """Gerschgorin lower bound over stream rows [start, start + count)."""
    stop = start + count if stream.dim is None else min(start + count, stream.dim)
    if stop <= start:
        return math.inf
    blk = stream.block(start, stop, max(start - stream.b, 0), stop + stream.b if stream.dim is None else min(stop + stream.b, stream.dim))
    c0 = max(start - stream.b, 0)
    diag = np.array([blk[i, start + i - c0] for i in range(stop - start)])
    rad = np.abs(blk).sum(axis=1) - np.abs(diag)
    return float(np.min(diag - rad))


def _tolerance(tol_mode, tol):
    if tol is not None:
        return float(tol)
    if tol_mode == "values":
        return EPS
    if tol_mode == "pairs":
        return EPS * EPS
    raise ValueError(f"unknown tolerance mode {tol_mode!r}")


def _next_window(k, j, b, s, max_window, remaining):
    doubled = j < growth_threshold(k, b)
    k_next = 2 * k if doubled else k
    k_next = max(k_next, s + b)
    if remaining is not None:
        k_next = min(k_next, remaining)
    return k_next, doubled


def sb_aed(op: OperatorStream, want, tol_mode="values", *, tol=None, order="ascending", max_window=8192) -> FactorChain:
    """Adaptive eigendecomposition of a symmetric banded stream.

    Deflates until at least ``want`` eigenvalues are found (or the finite
    stream is exhausted) and returns the factor chain.
    """
    if order not in ("ascending", "descending"):
        raise ValueError(f"unknown order {order!r}")
    sign = 1.0 if order == "ascending" else -1.0
    stream = op if sign > 0 else op.negated()
    tolv = _tolerance(tol_mode, tol)
    b = max(stream.b, 1)
    dim = stream.dim
    values, ranges, factors, reports = [], [], [], []
    off = 0
    front = np.zeros((0, 0))
    cpl = None
    k = 2 * b
    warned = False
    while len(values) < want and (dim is None or off < dim):
        remaining = None if dim is None else dim - off
        if remaining is not None:
            k = min(k, remaining)
        if k > max_window:
            raise WindowCapError(f"window {k} exceeds the cap {max_window} after {len(values)} deflations")
        w = _extend(front, cpl, stream.block(off, off + k), b)
        res = sym_band_eig(SymBanded.from_dense(w, b), want_vectors=True)
        lam, q = res.values, res.vectors
        rows = b if remaining is None else min(b, remaining - k)
        cols = min(b, k)
        lb = stream.block(off + k, off + k + rows, off + k - cols, off + k)
        spike = lb @ q[k - cols :, :]
        rep = deflation_check(spike, lam, np.abs(lam).max(), tolv, b)
        rep.offset = off
        rep.window_end = off + k
        j = rep.deflated
        if j == 0:
            rep.doubled, rep.next_window = True, 2 * k
            reports.append(rep)
            if remaining is not None and k >= remaining:
                raise WindowCapError("no deflation although the window covers the whole operator")
            k = 2 * k
            continue
        values.extend(lam[:j])
        ranges.append((off, off + j))
        l = k - j
        if l > 0:
            rb = restore_band(lam[j:], spike[:, j:], b)
            q[:, j:] = q[:, j:] @ rb.z
            front, cpl = rb.window, rb.coupling
            rep.offband_defect = rb.offband_defect
        else:
            front, cpl = np.zeros((0, 0)), None
        factors.append(Factor(off, q, "orthogonal"))
        bound = _tail_bound(stream, off + k, k)
        rep.assumption_ok = bool(lam[j - 1] <= bound + tolv * abs(lam).max())
        if not rep.assumption_ok and not warned:
            warnings.warn(
                f"deflated eigenvalue {sign * lam[j - 1]:.6g} lies beyond the tail Gerschgorin bound {sign * bound:.6g}",
                AssumptionWarning,
                stacklevel=2,
            )
            warned = True
        off += j
        k, rep.doubled = _next_window(k, j, b, l, max_window, None if dim is None else dim - off)
        rep.next_window = k
        reports.append(rep)
    frontier = {"offset": off, "a": front, "coupling_a": cpl}
    return FactorChain(
        "orthogonal", b, sign * np.array(values), ranges, factors, frontier, reports, tolv, sign, dim
    )


def _embed(m, n, lam, abb, bbb, off):
    """Congruence making B the identity on window plus spike rows.

    Returns (factor block, A spike F^{-1}(M - N Lam), A spike-row block, F^{-1}).
    """
    k, rows = lam.size, abb.shape[0]
    try:
        f = np.linalg.cholesky(bbb - n @ n.T)
    except np.linalg.LinAlgError as err:
        raise PencilConditioningError(f"embedding factor is not positive-definite at offset {off}") from err
    fi = sl.solve_triangular(f, np.eye(rows), lower=True)
    mp = fi @ (m - n * lam)
    app = fi @ (abb - n @ m.T - m @ n.T + (n * lam) @ n.T) @ fi.T
    emb = np.eye(k + rows)
    emb[:k, k:] = -n.T @ fi.T
    emb[k:, k:] = fi.T
    return emb, mp, 0.5 * (app + app.T), fi


def sdb_aed(
    a: OperatorStream,
    bstream: OperatorStream,
    want,
    tol_mode="values",
    *,
    tol=None,
    order="ascending",
    criterion="embedded",
    max_window=8192,
) -> FactorChain:
    """Adaptive eigendecomposition of the pencil (A, B) with B positive-definite.

    Windows are solved by congruence (V^T A V = diag, V^T B V = I). A
    Cholesky embed then makes B the identity over the window and the spike
    rows, and the orthogonal schedule of :func:`restore_band` returns A to
    banded form.

    ``criterion="embedded"`` embeds the whole window first and tests the
    exact A spike F^{-1}(M - N Lam) with the standard criterion, so A = B
    deflates at once. ``criterion="split"`` tests ||M||^2 + |lam|^2 ||N||^2
    on the raw spikes, zeroes both and embeds only the undeflated columns.
    """
    if order not in ("ascending", "descending"):
        raise ValueError(f"unknown order {order!r}")
    if criterion not in ("embedded", "split"):
        raise ValueError(f"unknown criterion {criterion!r}")
    if a.dim != bstream.dim:
        raise ValueError("pencil streams must have the same dimension")
    sign = 1.0 if order == "ascending" else -1.0
    sa = a if sign > 0 else a.negated()
    tolv = _tolerance(tol_mode, tol)
    b = max(sa.b, bstream.b, 1)
    dim = sa.dim
    values, ranges, factors, reports = [], [], [], []
    off = 0
    fa = fb = np.zeros((0, 0))
    ca = cb = None
    k = 2 * b
    while len(values) < want and (dim is None or off < dim):
        remaining = None if dim is None else dim - off
        if remaining is not None:
            k = min(k, remaining)
        if k > max_window:
            raise WindowCapError(f"window {k} exceeds the cap {max_window} after {len(values)} deflations")
        wa = _extend(fa, ca, sa.block(off, off + k), b)
        wb = _extend(fb, cb, bstream.block(off, off + k), b)
        res = gen_sym_band_eig(Pencil(SymBanded.from_dense(wa, b), SymBanded.from_dense(wb, b)), want_vectors=True)
        lam, v = res.values, res.vectors
        rows = b if remaining is None else min(b, remaining - k)
        cols = min(b, k)
        m = sa.block(off + k, off + k + rows, off + k - cols, off + k) @ v[k - cols :, :]
        n = bstream.block(off + k, off + k + rows, off + k - cols, off + k) @ v[k - cols :, :]
        abb = sa.block(off + k, off + k + rows)
        bbb = bstream.block(off + k, off + k + rows)
        lam_max = np.abs(lam).max()
        if criterion == "embedded" and rows:
            emb, mp, app, fi = _embed(m, n, lam, abb, bbb, off)
            rep = deflation_check(mp, lam, lam_max, tolv, b)
        else:
            rep = deflation_check(m, lam, lam_max, tolv, b, n_spike=n, side="generalized")
        rep.offset = off
        rep.window_end = off + k
        j = rep.deflated
        if j == 0:
            rep.doubled, rep.next_window = True, 2 * k
            reports.append(rep)
            if remaining is not None and k >= remaining:
                raise WindowCapError("no deflation although the window covers the whole operator")
            k = 2 * k
            continue
        values.extend(lam[:j])
        ranges.append((off, off + j))
        factors.append(Factor(off, v, "congruence"))
        l = k - j
        if rows and (criterion == "embedded" or l > 0):
            if criterion == "split":
                emb, mp, app, fi = _embed(m[:, j:], n[:, j:], lam[j:], abb, bbb, off)
                factors.append(Factor(off + j, emb, "cholesky_embed"))
            else:
                factors.append(Factor(off, emb, "cholesky_embed"))
                mp = mp[:, j:]
            s = l + rows
            fa = np.zeros((s, s))
            fa[l:, l:] = app
            if l:
                rbd = restore_band(lam[j:], mp, b)
                factors.append(Factor(off + j, rbd.z, "orthogonal"))
                fa[:l, :l] = rbd.window
                width = rbd.coupling.shape[1]
                fa[l:, l - width : l] = rbd.coupling
                fa[l - width : l, l:] = rbd.coupling.T
                rep.offband_defect = rbd.offband_defect
            fb = np.eye(s)
            # the next rows couple to the spike rows through F^{-T}
            start = off + k + rows
            nxt = b if dim is None else min(b, dim - start)
            ca = sa.block(start, start + nxt, off + k, start) @ fi.T if nxt > 0 else None
            cb = bstream.block(start, start + nxt, off + k, start) @ fi.T if nxt > 0 else None
        elif l > 0:
            s = l
            fa, fb = np.diag(lam[j:]), np.eye(l)
            ca = cb = None
        else:
            s = 0
            fa = fb = np.zeros((0, 0))
            ca = cb = None
        off += j
        k, rep.doubled = _next_window(k, j, b, s, max_window, None if dim is None else dim - off)
        rep.next_window = k
        reports.append(rep)
    frontier = {"offset": off, "a": fa, "b": fb, "coupling_a": ca, "coupling_b": cb}
    return FactorChain(
        "congruence", b, sign * np.array(values), ranges, factors, frontier, reports, tolv, sign, dim
    )


def apply_chain(chain: FactorChain, f, v, *, support_tol=1e-12):
    """X f(Lambda) X^T v for the deflated part of a chain.

    ``f`` maps an eigenvalue array to values (real or complex); None means
    the identity. Complex values are applied as separate real and
    imaginary parts. ``v`` is an array or an object with ``coeffs``. For a
    congruence chain the result is f(B^{-1} A) B^{-1} v.
    """
    coeffs = getattr(v, "coeffs", v)
    x = np.asarray(coeffs, dtype=float)
    n = max(chain.support, x.size)
    y = np.zeros(n)
    y[: x.size] = x
    y = chain.apply_transpose(y)
    nd = chain.values.size
    tail = np.linalg.norm(y[nd:])
    if tail > support_tol * max(np.linalg.norm(y), np.finfo(float).tiny):
        warnings.warn(
            f"vector leaves the resolved region (tail weight {tail:.3e}); the tail action is taken as zero",
            ChainSupportWarning,
            stacklevel=2,
        )
    fv = chain.values if f is None else np.asarray(f(chain.values))
    if fv.shape != chain.values.shape:
        fv = np.broadcast_to(fv, chain.values.shape)
    if not np.all(np.isfinite(fv)):
        raise SpectralDomainError("function is not finite on the deflated spectrum")
    head = y[:nd]
    if np.iscomplexobj(fv):
        re = np.zeros(n)
        im = np.zeros(n)
        re[:nd] = fv.real * head
        im[:nd] = fv.imag * head
        out = chain.apply_factors(re) + 1j * chain.apply_factors(im)
    else:
        z = np.zeros(n)
        z[:nd] = fv * head
        out = chain.apply_factors(z)
    if chain.stream_dim is not None:
        out = out[: chain.stream_dim]
    if hasattr(v, "coeffs") and hasattr(v, "basis") and not np.iscomplexobj(out):
        return type(v)(v.basis, out)
    return out
