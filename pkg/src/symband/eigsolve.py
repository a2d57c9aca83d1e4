"""Band-preserving eigensolvers for symmetric banded matrices and pencils.

The standard problem is reduced to tridiagonal form by Givens bulge chasing
and finished with implicit-shift QL. The generalized problem is first
brought to standard form by split-Cholesky congruences that keep the
bandwidth. Transformations are logged and only replayed when vectors are
requested.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bandcore import EPS, Pencil, SymBanded, ldlt_banded, split_cholesky, split_index
from .errors import (
    BreakdownError,
    IterationLimitError,
    NotPositiveDefiniteError,
)

__all__ = [
    "GeneralizedLog",
    "RQIResult",
    "RotationLog",
    "SpectralResult",
    "Tridiagonal",
    "band_to_tridiag",
    "gen_sym_band_eig",
    "rayleigh_iterate",
    "sym_band_eig",
    "tridiag_eig",
]


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric tridiagonal matrix: diagonal ``d`` and off-diagonal ``e``."""

    d: np.ndarray
    e: np.ndarray

    @property
    def dim(self):
        return self.d.size

    def to_dense(self):
        return np.diag(self.d) + np.diag(self.e, 1) + np.diag(self.e, -1)

    def to_symbanded(self):
        return SymBanded.from_diagonals(self.dim, [self.d, self.e])


@dataclass(frozen=True)
class RotationLog:
    """Q = R_1^T R_2^T ... R_k^T for plane rotations in planes (p, p+1)."""

    n: int
    p: np.ndarray
    c: np.ndarray
    s: np.ndarray

    def __len__(self):
        return int(self.p.size)

    def apply(self, x):
        """Q x for a vector or a column block."""
        y = np.array(x, dtype=float, copy=True)
        flat = y.ndim == 1
        y = np.ascontiguousarray(y[:, None] if flat else y)
        K.replay_rotations(y, self.p, self.c, self.s, len(self))
        return y[:, 0] if flat else y

    def apply_transpose(self, x):
        """Q^T x."""
        y = np.array(x, dtype=float, copy=True)
        flat = y.ndim == 1
        y = np.ascontiguousarray(y[:, None] if flat else y)
        K.replay_rotations_transpose(y, self.p, self.c, self.s, len(self))
        return y[:, 0] if flat else y

    def to_dense(self):
        return self.apply(np.eye(self.n))


@dataclass(frozen=True)
class GeneralizedLog:
    """X = S^{-1} Q as the recorded factor sequence of the congruence reduction.

    X^T A X is the reduced standard band and X^T B X = I.
    """

    n: int
    b: int
    kind: np.ndarray
    idx: np.ndarray
    c: np.ndarray
    s: np.ndarray
    gv: np.ndarray

    def __len__(self):
        return int(self.kind.size)

    def apply(self, x):
        """X x."""
        y = np.array(x, dtype=float, copy=True)
        flat = y.ndim == 1
        y = np.ascontiguousarray(y[:, None] if flat else y)
        K.replay_sbgst(y, self.kind, self.idx, self.c, self.s, self.gv, len(self), self.b)
        return y[:, 0] if flat else y

    def to_dense(self):
        return self.apply(np.eye(self.n))


@dataclass
class SpectralResult:
    """Sorted eigenvalues, optional eigenvectors and the transform logs.

    ``vectors[:, i]`` pairs with ``values[i]``. For pencils the vectors are
    B-orthonormal.
    """

    values: np.ndarray
    vectors: np.ndarray | None = None
    log: tuple = ()
    method: str = "standard"
    info: dict = field(default_factory=dict)

    def __len__(self):
        return int(self.values.size)

    def residuals(self, a, b=None):
        """Scaled residuals ||A v - lam B v|| / ((||A|| + |lam| ||B||) ||v||)."""
        if self.vectors is None:
            raise ValueError("no vectors were computed")
        if isinstance(a, Pencil):
            a, b = a.a, a.b
        v = self.vectors
        av = a.to_sparse() @ v
        na = a.norm_fro()
        if b is None:
            bv, nb = v, 1.0
        else:
            bv, nb = b.to_sparse() @ v, b.norm_fro()
        lam = self.values[: v.shape[1]]
        r = np.linalg.norm(av - bv * lam, axis=0)
        return r / ((na + np.abs(lam) * nb) * np.linalg.norm(v, axis=0))


def band_to_tridiag(s: SymBanded, logging=True):
    """Orthogonally reduce ``s`` to tridiagonal T = Q^T S Q.

    Returns ``(t, log)`` where ``log`` replays Q. Bandwidths 0 and 1, or
    ``logging=False``, give an empty log.
    """
    n, b = s.dim, s.b
    if b <= 1:
        d = s.data[0].copy()
        e = s.data[1, : max(n - 1, 0)].copy() if b == 1 else np.zeros(max(n - 1, 0))
        empty = np.zeros(0, dtype=np.int64)
        return Tridiagonal(d, e), RotationLog(n, empty, np.zeros(0), np.zeros(0))
    ab = np.zeros((b + 2, n))
    ab[: b + 1] = s.data
    # chasing diagonal d costs about n^2 / (2d) rotations
    cap = int(n * n * np.log(b) / 2) + n * b + 16 if logging else 1
    while True:
        lp = np.zeros(cap, dtype=np.int64)
        lc = np.zeros(cap)
        ls = np.zeros(cap)
        work = ab.copy()
        cnt, bad = K.band_to_tridiag_kernel(work, n, b, lp, lc, ls, logging)
        if cnt >= 0:
            break
        cap *= 2
    if bad:
        raise RuntimeError(f"bulge chase overflowed the band storage ({bad} entries)")
    if not logging:
        cnt = 0
    t = Tridiagonal(work[0].copy(), work[1, : n - 1].copy())
    return t, RotationLog(n, lp[:cnt].copy(), lc[:cnt].copy(), ls[:cnt].copy())


def tridiag_eig(t, want_vectors=False, *, max_sweeps=None) -> SpectralResult:
    """Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.

    ``t`` is a :class:`Tridiagonal` or a ``(d, e)`` pair.
    """
    d, e = (t.d, t.e) if isinstance(t, Tridiagonal) else t
    d = np.array(d, dtype=float, copy=True)
    n = d.size
    ee = np.zeros(n)
    ee[: n - 1] = np.asarray(e, dtype=float)[: n - 1]
    zt = np.eye(n) if want_vectors else np.zeros((n, 0))
    limit = 50 * max(n, 1) if max_sweeps is None else max_sweeps
    sweeps = K.tql_kernel(d, ee, zt, want_vectors, limit)
    if sweeps < 0:
        raise IterationLimitError(f"QL did not converge within {limit} sweeps")
    order = np.argsort(d, kind="stable")
    vecs = zt[order].T.copy() if want_vectors else None
    return SpectralResult(d[order], vecs, (), "tridiagonal", {"sweeps": int(sweeps)})


def sym_band_eig(s: SymBanded, want_vectors=False) -> SpectralResult:
    """All eigenvalues (and optionally eigenvectors) of a symmetric band."""
    t, log = band_to_tridiag(s, want_vectors)
    res = tridiag_eig(t, want_vectors)
    vecs = log.apply(res.vectors) if want_vectors else None
    return SpectralResult(res.values, vecs, (log,), "standard", res.info)


def _congruence(p: Pencil, logging: bool):
    """X^T A X (banded) with X^T B X = I, plus the factor log when asked."""
    n, b = p.dim, p.bandwidth
    sfac = split_cholesky(p.b if p.b.b == b else SymBanded(n, b, p.b.padded(b)))
    m = split_index(n, b)
    ab = np.zeros((2 * b + 3, n))
    ab[: p.a.b + 1] = p.a.data
    sd = np.ascontiguousarray(sfac.data)
    cap = max(16, 4 * n * (b + 1)) if logging else 1
    while True:
        kind = np.zeros(cap, dtype=np.int64)
        idx = np.zeros(cap, dtype=np.int64)
        lc = np.zeros(cap)
        ls = np.zeros(cap)
        gv = np.zeros((n, 2 * b + 1)) if logging else np.zeros((1, 1))
        work = ab.copy()
        cnt, bad = K.sbgst_kernel(work, n, b, m, sd, kind, idx, lc, ls, gv, logging)
        if not logging or cnt <= cap:
            break
        cap = cnt + 16
    if bad:
        raise RuntimeError(f"congruence reduction left {bad} entries outside the band")
    c = SymBanded(n, b, work[: b + 1].copy())
    diag = np.abs(sd[b])
    cond = float((diag.max() / diag.min()) ** 2) if n else 1.0
    log = GeneralizedLog(n, b, kind[:cnt], idx[:cnt], lc[:cnt], ls[:cnt], gv) if logging else None
    return c, log, cond


def _positive_definite(s: SymBanded) -> bool:
    try:
        split_cholesky(s)
    except NotPositiveDefiniteError:
        return False
    return True


def _direct(p: Pencil, want_vectors: bool) -> SpectralResult:
    c, glog, cond = _congruence(p, want_vectors)
    res = sym_band_eig(c, want_vectors)
    vecs = glog.apply(res.vectors) if want_vectors else None
    logs = (glog,) + res.log if want_vectors else res.log
    info = dict(res.info, b_condition_estimate=cond)
    return SpectralResult(res.values, vecs, logs, "direct", info)


def _reverse(p: Pencil, want_vectors: bool) -> SpectralResult:
    # solve (B, A): B w = mu A w with A positive-definite, then lambda = 1 / mu
    inner = _direct(Pencil(p.b, p.a), want_vectors)
    mu = inner.values
    # mu <= 0 only happens by rounding on modes far above the resolved range
    floor = EPS * max(float(np.abs(mu).max(initial=0.0)), np.finfo(float).tiny)
    lost = mu <= floor
    safe = np.where(lost, 1.0, mu)
    lam = np.where(lost, np.inf, 1.0 / safe)
    order = np.argsort(lam, kind="stable")
    vals = lam[order]
    vecs = None
    if want_vectors:
        # W^T A W = I and W^T B W = diag(mu), so V = W mu^{-1/2} has V^T B V = I
        vecs = inner.vectors[:, order] / np.sqrt(safe[order])
    info = dict(inner.info, a_condition_estimate=inner.info.pop("b_condition_estimate"), unresolved=int(lost.sum()))
    return SpectralResult(vals, vecs, inner.log, "reverse", info)


def gen_sym_band_eig(p: Pencil, want_vectors=False, *, method="auto", count=None) -> SpectralResult:
    """Eigenvalues of the symmetric-definite banded pencil A v = lam B v.

    ``method`` is ``"direct"`` (factor B), ``"reverse"`` (factor A and invert
    the eigenvalues of (B, A); needs A positive-definite) or ``"auto"``,
    which reverses whenever A is positive-definite. Factoring the operator
    of higher order resolves the low end of the spectrum better. ``count``
    keeps only the lowest eigenpairs.
    """
    if method not in ("auto", "direct", "reverse"):
        raise ValueError(f"unknown method {method!r}")
    if not _positive_definite(p.b):
        raise NotPositiveDefiniteError("right-hand matrix of the pencil is not positive-definite")
    if method == "auto":
        method = "reverse" if _positive_definite(p.a) else "direct"
    res = _reverse(p, want_vectors) if method == "reverse" else _direct(p, want_vectors)
    if count is not None:
        res.values = res.values[:count]
        if res.vectors is not None:
            res.vectors = res.vectors[:, :count]
    return res


@dataclass(frozen=True)
class RQIResult:
    """Converged Rayleigh quotient, B-normalized vector and iteration history.

    ``history`` lists the scaled residual of each iterate, ``values`` the
    Rayleigh quotients. ``index`` is the number of eigenvalues below the
    final value, read from the inertia of A - lam B.
    """

    value: float
    vector: np.ndarray
    iterations: int
    history: tuple
    values: tuple
    index: int | None


def _index_below(p, lam):
    # count eigenvalues below lam, just under it so lam itself is excluded
    delta = np.sqrt(EPS) * (1 + abs(lam))
    for _ in range(4):
        try:
            # tiny pivots still carry a sign; the inertia triple would call them zero
            return int(np.sum(ldlt_banded(p.a, lam - delta, p.b).d < 0))
        except BreakdownError:
            delta *= 2
    raise BreakdownError(f"cannot read the inertia near {lam!r}")


def rayleigh_iterate(p: Pencil, v0, max_it=30, *, tol=None) -> RQIResult:
    """Rayleigh quotient iteration on the pencil with banded LDL^T solves."""
    v = np.asarray(v0, dtype=float)
    if v.shape != (p.dim,) or not np.any(v):
        raise ValueError("starting vector must be a nonzero vector of the pencil dimension")
    tol = EPS if tol is None else tol
    asp, bsp = p.a.to_sparse(), p.b.to_sparse()
    na, nb = p.a.norm_fro(), p.b.norm_fro()

    def quotient(x):
        bx = bsp @ x
        return float(x @ (asp @ x)) / float(x @ bx), bx

    v = v / np.sqrt(v @ (bsp @ v))
    lam, bv = quotient(v)
    history, values = [], [lam]
    for it in range(1, max_it + 1):
        res = np.linalg.norm(asp @ v - lam * bv) / ((na + abs(lam) * nb) * np.linalg.norm(v))
        history.append(float(res))
        shift = lam
        try:
            fac = ldlt_banded(p.a, shift, p.b)
        except BreakdownError:
            # exact eigenvalue shift: nudge once
            shift = lam + np.sqrt(EPS) * (1 + abs(lam))
            fac = ldlt_banded(p.a, shift, p.b)
        x = fac.solve(bv)
        if not np.all(np.isfinite(x)):
            x = ldlt_banded(p.a, lam + np.sqrt(EPS) * (1 + abs(lam)), p.b).solve(bv)
        v = x / np.sqrt(x @ (bsp @ x))
        new, bv = quotient(v)
        values.append(new)
        if abs(new - lam) <= tol * (1 + abs(lam)):
            lam = new
            res = np.linalg.norm(asp @ v - lam * bv) / ((na + abs(lam) * nb) * np.linalg.norm(v))
            history.append(float(res))
            return RQIResult(lam, v, it, tuple(history), tuple(values), _index_below(p, lam))
        lam = new
    raise IterationLimitError(f"Rayleigh iteration did not settle in {max_it} steps (last value {lam!r})")
