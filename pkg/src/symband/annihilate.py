"""Banded annihilators: recombinations of a free basis that satisfy boundary conditions.

Column k of the annihilator ``A`` combines the basis functions ``phi_k, ...,
phi_{k+w}`` so that every boundary functional vanishes on it. The standard
method solves a square system per column; the pathological method doubles the
window and takes the least-norm solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bandcore import EPS, BandedMatrix, GivensSequence, band_qr
from .errors import InfeasibleBoundaryError, PathologicalBoundaryError
from .opbasis import boundary_row

COND_LIMIT = EPS**-0.5
PINV_RCOND = EPS**0.75
INFEASIBLE_TOL = 1e-8


@dataclass(frozen=True)
class Term:
    point: float
    deriv: int
    coeff: float


class BoundaryFunctionals:
    """A finite set of linear functionals on an infinite basis.

    ``generator(length)`` returns the ``count x length`` matrix of functional
    values on the first ``length`` basis elements.
    """

    def __init__(self, count: int, generator: Callable[[int], np.ndarray], basis=None, label=""):
        self.count = int(count)
        self._gen = generator
        self.basis = basis
        self.label = label
        self._cache = np.zeros((self.count, 0))

    @classmethod
    def from_conditions(cls, basis, conditions: Sequence[Sequence[Term | tuple]], label=""):
        """Each condition is a sum of ``coeff * u^(deriv)(point)`` terms."""
        conds = [[t if isinstance(t, Term) else Term(*t) for t in c] for c in conditions]

        def gen(length):
            out = np.zeros((len(conds), length))
            for i, c in enumerate(conds):
                for t in c:
                    if t.coeff != 0.0:
                        out[i] += t.coeff * boundary_row(basis, t.point, length, t.deriv)
            return out

        return cls(len(conds), gen, basis, label)

    @classmethod
    def dirichlet(cls, basis, left=-1.0, right=1.0):
        return cls.from_conditions(basis, [[(left, 0, 1.0)], [(right, 0, 1.0)]], "dirichlet")

    @classmethod
    def robin(cls, basis, a_plus, b_plus, a_minus, b_minus, left=-1.0, right=1.0):
        """``a+ u(right) + b+ u'(right) = a- u(left) + b- u'(left) = 0``."""
        return cls.from_conditions(
            basis,
            [[(right, 0, a_plus), (right, 1, b_plus)], [(left, 0, a_minus), (left, 1, b_minus)]],
            "robin",
        )

    def rows(self, length: int) -> np.ndarray:
        if length > self._cache.shape[1]:
            grow = max(length, 2 * self._cache.shape[1])
            self._cache = np.asarray(self._gen(grow), dtype=float).reshape(self.count, grow)
        return self._cache[:, :length]

    def __repr__(self):
        return f"BoundaryFunctionals(count={self.count}, label={self.label!r})"


def clamped_mixed_functionals():
    """u(+-1) = u'(+-1) = 0 on the basis {1, x} + {P_n - P_{n-2}, n >= 2}.

    Every element with n >= 2 already vanishes at both endpoints, so the
    value rows are supported on the first two columns only.
    """

    def gen(length):
        n = np.arange(length, dtype=float)
        out = np.zeros((4, length))
        out[0, :2] = [1.0, -1.0]
        out[1, :2] = [1.0, 1.0]
        dv = np.where(n >= 2, 2 * n - 1, 0.0)
        out[2] = dv * (-1.0) ** (n + 1)
        out[3] = dv
        out[2:, 0] = 0.0
        out[2:, 1] = 1.0
        return out

    return BoundaryFunctionals(4, gen, None, "clamped-mixed")


@dataclass(frozen=True)
class Annihilator:
    a: BandedMatrix
    q: GivensSequence
    r: BandedMatrix
    method: str
    bc: BoundaryFunctionals = field(repr=False)
    shift: int = 0
    fallback_columns: tuple = ()

    @property
    def ncols(self):
        return self.a.cols

    @property
    def width(self):
        """Number of coefficients below the unit in each column."""
        return self.a.lower - self.shift

    def column(self, k):
        lo = k + self.shift
        hi = min(self.a.rows, lo + self.width + 1)
        return lo, np.array([self.a.get(i, k) for i in range(lo, hi)])

    def residual(self) -> float:
        """max over columns of |B . a_k| relative to each row's local scale."""
        bmat = self.bc.rows(self.a.rows)
        worst = 0.0
        for k in range(self.ncols):
            lo, col = self.column(k)
            window = bmat[:, lo : lo + col.size]
            scale = np.abs(window).max(axis=1)
            scale[scale == 0] = 1.0
            worst = max(worst, float(np.max(np.abs(window @ col) / scale)))
        return worst

    def qr_residual(self) -> float:
        ad = self.a.to_dense()
        rec = self.q.apply(self.r.to_dense())
        return float(np.max(np.linalg.norm(rec - ad, axis=0) / np.linalg.norm(ad, axis=0)))


def _windows(bmat, ks, lo_off, width):
    idx = ks[:, None] + lo_off + np.arange(width)[None, :]
    return np.transpose(bmat[:, idx], (1, 0, 2))


def _local_scale(bmat, k0, span):
    """Per-row max magnitude over each column window, shape (ncols, count, 1)."""
    idx = k0[:, None] + np.arange(span)[None, :]
    s = np.abs(np.transpose(bmat[:, idx], (1, 0, 2))).max(axis=2, keepdims=True)
    s[s == 0] = 1.0
    return s


def _standard_columns(bmat, count, ks, shift=0):
    """Solve the square systems; returns (coefficients, condition numbers)."""
    ks = np.asarray(ks, dtype=np.int64)
    lead = ks + shift
    scale = _local_scale(bmat, lead, count + 1)
    mats = _windows(bmat, lead, 1, count) / scale
    rhs = -bmat[:, lead].T[:, :, None] / scale
    cond = np.linalg.cond(mats)
    cond = np.where(np.isfinite(cond), cond, np.inf)
    sol = np.zeros((ks.size, count))
    ok = cond <= COND_LIMIT
    if np.any(ok):
        sol[ok] = np.linalg.solve(mats[ok], rhs[ok])[:, :, 0]
    return sol, cond


def _pathological_columns(bmat, count, ks, shift):
    ks = np.asarray(ks, dtype=np.int64)
    lead = ks + shift
    width = 2 * count
    scale = _local_scale(bmat, lead, width + 1)
    mats = _windows(bmat, lead, 1, width) / scale
    rhs = -bmat[:, lead].T[:, :, None] / scale
    pinv = np.linalg.pinv(mats, rcond=PINV_RCOND)
    sol = (pinv @ rhs)[:, :, 0]
    res = np.abs(mats @ sol[:, :, None] - rhs)[:, :, 0].max(axis=1)
    return sol, res


def _assemble(bc, ncols, sols, width, shift, method, fallback=()):
    rows = ncols + shift + width
    a = BandedMatrix(rows, ncols, shift + width, 0)
    for k in range(ncols):
        a.set(k + shift, k, 1.0)
        for j, v in enumerate(sols[k]):
            a.set(k + shift + 1 + j, k, v)
    q, r = band_qr(a)
    return Annihilator(a, q, r, method, bc, shift, tuple(fallback))


def build_standard(bc: BoundaryFunctionals, ncols: int) -> Annihilator:
    count = bc.count
    bmat = bc.rows(ncols + count + 1)
    sols, cond = _standard_columns(bmat, count, np.arange(ncols))
    bad = np.nonzero(cond > COND_LIMIT)[0]
    if bad.size:
        k = int(bad[0])
        raise PathologicalBoundaryError(
            f"standard system for column {k} has condition {cond[k]:.3g}; use the pathological method",
            column=k,
            condition=float(cond[k]),
        )
    return _assemble(bc, ncols, sols, count, 0, "standard")


def _find_shift(bmat, count):
    for s in range(2 * count + 1):
        _, res = _pathological_columns(bmat, count, [0], s)
        if res[0] <= INFEASIBLE_TOL:
            return s, float(res[0])
    return None, float(res[0])


def build_pathological(bc: BoundaryFunctionals, ncols: int) -> Annihilator:
    count = bc.count
    bmat = bc.rows(ncols + 4 * count + 2)
    shift, res0 = _find_shift(bmat, count)
    if shift is None:
        raise InfeasibleBoundaryError(f"column 0 has least-norm residual {res0:.3g}", column=0, residual=res0)
    bmat = bc.rows(ncols + shift + 2 * count + 1)
    sols, res = _pathological_columns(bmat, count, np.arange(ncols), shift)
    bad = np.nonzero(res > INFEASIBLE_TOL)[0]
    if bad.size:
        k = int(bad[0])
        raise InfeasibleBoundaryError(f"column {k} has least-norm residual {res[k]:.3g}", column=k, residual=float(res[k]))
    return _assemble(bc, ncols, sols, 2 * count, shift, "pathological")


def build_auto(bc: BoundaryFunctionals, ncols: int) -> Annihilator:
    """Standard per column, falling back to least-norm columns where it fails."""
    count = bc.count
    bmat = bc.rows(ncols + 4 * count + 2)
    sols, cond = _standard_columns(bmat, count, np.arange(ncols))
    bad = np.nonzero(cond > COND_LIMIT)[0]
    if bad.size == 0:
        return _assemble(bc, ncols, sols, count, 0, "standard")
    if bad[0] == 0:
        # a failing first column may need a leading shift; the pathological
        # builder handles that uniformly
        return build_pathological(bc, ncols)
    psol, res = _pathological_columns(bmat, count, bad, 0)
    worst = np.argmax(res)
    if res[worst] > INFEASIBLE_TOL:
        k = int(bad[worst])
        raise InfeasibleBoundaryError(f"column {k} has least-norm residual {res[worst]:.3g}", column=k, residual=float(res[worst]))
    full = np.zeros((ncols, 2 * count))
    full[:, :count] = sols
    full[bad] = psol
    return _assemble(bc, ncols, full, 2 * count, 0, "pathological", bad.tolist())


def build(bc: BoundaryFunctionals, ncols: int, method: str = "auto") -> Annihilator:
    builders = {"standard": build_standard, "pathological": build_pathological, "auto": build_auto}
    if method not in builders:
        raise ValueError(f"unknown annihilator method {method!r}")
    return builders[method](bc, ncols)


def first_two_recombination(bc: BoundaryFunctionals, ncols: int) -> np.ndarray:
    """Coefficients of phi_n + c0 phi_0 + c1 phi_1 annihilated by two functionals.

    Returns shape ``(2, ncols)``; column n corresponds to phi_{n+2}.
    """
    if bc.count != 2:
        raise ValueError("the first-two recombination needs exactly two functionals")
    bmat = bc.rows(ncols + 2)
    return np.linalg.solve(bmat[:, :2], -bmat[:, 2:])


def boundedness_probe(ann: Annihilator, up_to: int, mode: str = "contiguous") -> np.ndarray:
    """Running norm bound over the first ``up_to`` columns.

    ``contiguous`` evaluates the column/row-sum bound of ``ann``. ``first_two``
    evaluates ``1 + |c0| + |c1|`` for the non-contiguous comparison
    recombination built from the same functionals. The final entry is the
    bound; the array shows its trend.
    """
    if mode == "first_two":
        c = first_two_recombination(ann.bc, up_to)
        return np.maximum.accumulate(1.0 + np.abs(c).sum(axis=0))
    if ann.bc.count != 2 or ann.shift:
        raise ValueError("the contiguous probe applies to two-condition annihilators")
    k = np.arange(up_to)
    if up_to > ann.ncols:
        raise ValueError("annihilator has fewer columns than requested")
    a = ann.a
    a1 = np.array([a.get(i + 1, i) for i in k])
    a2 = np.array([a.get(i + 2, i) for i in k])
    a21 = np.array([a.get(i + 2, i + 1) if i + 1 < a.cols else 0.0 for i in k])
    return np.maximum.accumulate(np.maximum(1 + np.abs(a1) + np.abs(a2), np.abs(a2) + np.abs(a21) + 1))


def robin_legendre_oracle(a_plus, b_plus, a_minus, b_minus, count):
    """Closed-form zeta_n, eta_n of P_n + zeta_n P_{n+1} + eta_n P_{n+2}.

    Standard (unnormalized) Legendre polynomials. The value is NaN where the
    denominator vanishes.
    """
    n = np.arange(count, dtype=float)
    den = 2 * (a_plus * ((n + 2) ** 2 * b_minus - 2 * a_minus)) + (n + 2) ** 2 * b_plus * (
        (n + 1) * (n + 3) * b_minus - 2 * a_minus
    )
    zeta_num = 2 * (2 * n + 3) * (a_plus * b_minus + b_plus * a_minus)
    eta_num = 2 * a_plus * ((n + 1) ** 2 * b_minus - 2 * a_minus) + (n + 1) ** 2 * b_plus * (n * (n + 2) * b_minus - 2 * a_minus)
    with np.errstate(divide="ignore", invalid="ignore"):
        zeta = np.where(den != 0, -zeta_num / den, np.nan)
        eta = np.where(den != 0, -eta_num / den, np.nan)
    return zeta, eta
