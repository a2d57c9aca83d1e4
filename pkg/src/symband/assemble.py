"""Symmetric banded pencils from differential forms and annihilators.

For a form ``sum_i (-D)^i p_i D^i`` and an annihilator ``A`` the left matrix is
``A^T C^{-1} L A`` where ``L`` maps the orthonormal basis to a high Jacobi
basis and ``C`` is the matching conversion. Only the lower triangle of the
product is exact with a banded partial inverse of ``C``; the upper triangle
is filled by reflection and the computed upper entries serve as a
self-adjointness check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve_triangular

from . import opbasis as ob
from .annihilate import Annihilator, BoundaryFunctionals
from .annihilate import build as build_annihilator
from .bandcore import BandedMatrix, Pencil, SymBanded, tri_upper_partial_inverse
from .errors import NotSelfAdjointError, NotSkewAdjointError

SELF_ADJOINT_TOL = 1e-8


@dataclass(frozen=True)
class Piece:
    """One subdomain: its orthonormal basis, left coefficients and right side.

    ``terms[i]`` is ``p_i`` in ``(-D)^i (p_i D^i)``. The right side is either
    multiplication by ``weight`` or, when ``rhs_terms`` is given, another
    form of the same shape. ``raw_terms[k]`` adds ``q_k D^k`` to the left
    side as written; it is there to probe the self-adjointness diagnostics.
    """

    basis: object
    terms: Mapping[int, ob.CoeffVec]
    weight: ob.CoeffVec | None = None
    rhs_terms: Mapping[int, ob.CoeffVec] | None = None
    raw_terms: Mapping[int, ob.CoeffVec] | None = None


@dataclass(frozen=True)
class DifferentialForm:
    pieces: tuple

    @classmethod
    def single(cls, basis, terms, weight=None, rhs_terms=None, raw_terms=None):
        rhs = None if rhs_terms is None else dict(rhs_terms)
        raw = None if raw_terms is None else dict(raw_terms)
        return cls((Piece(basis, dict(terms), weight, rhs, raw),))

    @property
    def order(self):
        return 2 * max(max(p.terms) for p in self.pieces)

    def validate(self):
        n = self.order // 2
        for k, p in enumerate(self.pieces):
            if n not in p.terms or not np.any(p.terms[n].coeffs):
                raise ValueError(f"piece {k}: leading coefficient p_{n} is zero")
            if p.weight is not None and p.rhs_terms is None:
                x = _sample_grid(p.basis)
                if np.any(p.weight(x) < -1e-14 * max(1.0, np.abs(p.weight(x)).max())):
                    raise ValueError(f"piece {k}: weight is negative on its domain")


def _sample_grid(basis, count=100):
    inner, scale, shift = ob._unwrap(basis)
    if isinstance(inner, ob.FourierReal):
        return np.linspace(0, 2 * np.pi, count, endpoint=False)
    if isinstance(inner, ob.WeightedLaguerre):
        t = np.linspace(0, 50, count)
    else:
        t = np.linspace(-1, 1, count)
    return (t - shift) / scale


@dataclass(frozen=True)
class Diagnostics:
    symmetry_defect: float
    band_defect: float
    rhs_symmetry_defect: float = 0.0
    rhs_band_defect: float = 0.0
    bandwidth: int = 0

    def as_dict(self):
        return {
            "symmetry_defect": self.symmetry_defect,
            "band_defect": self.band_defect,
            "rhs_symmetry_defect": self.rhs_symmetry_defect,
            "rhs_band_defect": self.rhs_band_defect,
            "bandwidth": self.bandwidth,
        }


@dataclass(frozen=True)
class AssembledPencil:
    pencil: Pencil
    annihilator: Annihilator | None
    bases: tuple
    diagnostics: Diagnostics
    complete_rows: int = field(default=0)


# ---------------------------------------------------------------------------
# operator blocks


def _chain(basis, steps):
    out = [basis]
    for _ in range(steps):
        out.append(ob.diff_target(out[-1]))
    return out


def _form_operator(basis, terms, size, raw=None):
    """(L, C, chain) for one piece: L maps basis -> chain[-1], C converts."""
    n = max(terms)
    chain = _chain(basis, 2 * n)
    d = [ob.diff_operator(chain[k], chain[k + 1], size, size).to_sparse().tocsr() for k in range(2 * n)]
    total = sp.csr_matrix((size, size))
    for i, p in terms.items():
        if not np.any(p.coeffs):
            continue
        op = sp.identity(size, format="csr")
        for k in range(i):
            op = d[k] @ op
        op = ob.multiplication_operator(p, chain[i], size).to_sparse().tocsr() @ op
        for k in range(i, 2 * i):
            op = -(d[k] @ op)
        if 2 * i < 2 * n:
            op = ob.conversion_operator(chain[2 * i], chain[2 * n], size, size).to_sparse().tocsr() @ op
        total = total + op
    for k, q in (raw or {}).items():
        if k > 2 * n:
            raise ValueError("raw term order exceeds the form order")
        op = sp.identity(size, format="csr")
        for j in range(k):
            op = d[j] @ op
        op = ob.multiplication_operator(q, chain[k], size).to_sparse().tocsr() @ op
        if k < 2 * n:
            op = ob.conversion_operator(chain[k], chain[2 * n], size, size).to_sparse().tocsr() @ op
        total = total + op
    conv = ob.conversion_operator(chain[0], chain[2 * n], size, size).to_sparse().tocsr()
    return total.tocsr(), conv, (chain[0], chain[-1])


def _interleave(blocks):
    """Global operator on {phi_0^0, phi_0^1, ..., phi_1^0, ...} from per-piece blocks."""
    npc = len(blocks)
    if npc == 1:
        return blocks[0].tocsr()
    size = blocks[0].shape[0]
    rows, cols, vals = [], [], []
    for p, b in enumerate(blocks):
        c = b.tocoo()
        rows.append(c.row * npc + p)
        cols.append(c.col * npc + p)
        vals.append(c.data)
    g = npc * size
    return sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(g, g)).tocsr()


def _lower_bw(m):
    c = m.tocoo()
    keep = c.data != 0
    if not np.any(keep):
        return 0
    return int(max(0, np.max(c.row[keep] - c.col[keep])))


def _coeff_bw(p, basis):
    if isinstance(ob._unwrap(basis)[0], ob.FourierReal):
        return ob.fourier_multiplication_bandwidth(p)
    return p.degree


def _guard(pieces, count, order):
    widest = 0
    for pc in pieces:
        for group in (pc.terms, pc.rhs_terms or {}):
            for p in group.values():
                widest = max(widest, _coeff_bw(p, pc.basis))
        if pc.weight is not None:
            widest = max(widest, _coeff_bw(pc.weight, pc.basis))
    npc = len(pieces)
    return 3 * (4 * count + npc * (widest + 2 * order + 2)) + 16


# ---------------------------------------------------------------------------
# products


def _galerkin(a_sp, lb, conv, dim, mode="partial_inverse"):
    """The dim x dim section of A^T C^{-1} L A (lower part exact) and its bandwidth.

    Returns ``(full, b, extra, norm)``: the sparse section, which also holds
    exact upper entries ``extra`` diagonals beyond the band, its bandwidth,
    and the Frobenius norm used to make the diagnostics relative.
    """
    la = _lower_bw(a_sp)
    ll = _lower_bw(lb)
    b_max = la + ll
    extra = b_max + 2
    x = lb @ a_sp
    if mode == "banded_solve":
        y = spsolve_triangular(conv.tocsr(), x.toarray(), lower=False)
        full = a_sp.T @ sp.csr_matrix(y)
    elif mode == "partial_inverse":
        cb = BandedMatrix.from_sparse(conv, 0, None)
        width = ll + la + b_max + extra + 2
        p = tri_upper_partial_inverse(cb, width).to_sparse().tocsr()
        full = a_sp.T @ (p @ x)
    else:
        raise ValueError(f"unknown assembly mode {mode!r}")
    full = sp.csr_matrix(full)
    full.eliminate_zeros()
    # scale from a slightly wider section so tiny leading sections are judged fairly
    wide = full[: dim + b_max + 2, : dim + b_max + 2]
    norm = sp.linalg.norm(sp.tril(wide, 0)) * np.sqrt(2.0)
    full = full[:dim, :dim]
    return full, _lower_bw(full), extra, norm


def _defects(full, b, extra, norm, skew=False):
    """(symmetry or skew defect on the band, largest entry above the band), relative."""
    scale = max(norm, np.finfo(float).tiny)
    sign = -1.0 if skew else 1.0
    sym = 0.0
    for k in range(0 if skew else 1, b + 1):
        up, lo = full.diagonal(k), full.diagonal(-k)
        if up.size:
            sym = max(sym, float(np.abs(up - sign * lo).max()))
    band = 0.0
    for k in range(b + 1, b + extra + 1):
        up = full.diagonal(k)
        if up.size:
            band = max(band, float(np.abs(up).max()))
    return sym / scale, band / scale


def _sym_from_lower(full, b):
    low = sp.tril(full, 0).tocsr()
    return SymBanded.from_lower(BandedMatrix.from_sparse(low, b, 0), b)


# ---------------------------------------------------------------------------
# drivers


def _annihilator_sparse(bc, ncols, method, size):
    if bc is None or bc.count == 0:
        return None, sp.identity(size, format="csr")[:, :ncols]
    ann = build_annihilator(bc, ncols, method)
    a = ann.a.to_sparse().tocsr()
    if a.shape[0] > size:
        raise AssertionError("operator sections too small for the annihilator")
    a = sp.vstack([a, sp.csr_matrix((size - a.shape[0], ncols))]).tocsr()
    return ann, a


def _column_scale(scaling, ncols):
    if scaling is None:
        return None
    n = np.arange(ncols, dtype=float)
    s = scaling(n) if callable(scaling) else np.asarray(scaling, dtype=float)[:ncols]
    if s.size != ncols or np.any(s == 0):
        raise ValueError("column scaling must provide nonzero factors for every column")
    return sp.diags(s)


def _assemble(form, bc, dim, method, mode, tol, scaling=None):
    form.validate()
    count = 0 if bc is None else bc.count
    guard = _guard(form.pieces, count, form.order)
    ncols = dim + guard
    npc = len(form.pieces)
    size_piece = -(-(ncols + 4 * count + 2) // npc) + 1
    size = npc * size_piece
    ann, a_sp = _annihilator_sparse(bc, ncols, method, size)
    scale = _column_scale(scaling, ncols)
    if scale is not None:
        a_sp = (a_sp @ scale).tocsr()

    lefts, convs, bases = [], [], []
    for pc in form.pieces:
        l, c, pair = _form_operator(pc.basis, pc.terms, size_piece, pc.raw_terms)
        lefts.append(l)
        convs.append(c)
        bases.append(pair)
    full_l, b_l, extra_l, norm_l = _galerkin(a_sp, _interleave(lefts), _interleave(convs), dim, mode)
    sym_l, band_l = _defects(full_l, b_l, extra_l, norm_l)

    if all(pc.rhs_terms is not None for pc in form.pieces):
        rights, rconvs = [], []
        for pc in form.pieces:
            r, c, _ = _form_operator(pc.basis, pc.rhs_terms, size_piece)
            rights.append(r)
            rconvs.append(c)
        full_r, b_r, extra_r, norm_r = _galerkin(a_sp, _interleave(rights), _interleave(rconvs), dim, mode)
        sym_r, band_r = _defects(full_r, b_r, extra_r, norm_r)
    else:
        mults = []
        for pc in form.pieces:
            w = pc.weight if pc.weight is not None else _unit(pc.basis)
            mults.append(ob.multiplication_operator(w, pc.basis, size_piece).to_sparse().tocsr())
        full_r = sp.csr_matrix(a_sp.T @ _interleave(mults) @ a_sp)[:dim, :dim]
        full_r.eliminate_zeros()
        b_r = _lower_bw(full_r)
        sym_r, band_r = 0.0, 0.0

    b = max(b_l, b_r)
    diag = Diagnostics(sym_l, band_l, sym_r, band_r, b)
    worst = max(sym_l, band_l, sym_r, band_r)
    if worst > tol:
        raise NotSelfAdjointError(
            f"assembled pencil is not self-adjoint: symmetry defect {max(sym_l, sym_r):.3g}, "
            f"band defect {max(band_l, band_r):.3g}",
            symmetry_defect=max(sym_l, sym_r),
            band_defect=max(band_l, band_r),
        )
    pencil = Pencil(_sym_from_lower(full_l, b), _sym_from_lower(full_r, b))
    return AssembledPencil(pencil, ann, tuple(bases), diag, dim)


def _unit(basis):
    if isinstance(ob._unwrap(basis)[0], ob.FourierReal):
        return ob.CoeffVec(basis, [np.sqrt(2 * np.pi)])
    return ob.constant(basis)


def assemble_pencil(
    form: DifferentialForm,
    bc: BoundaryFunctionals | None,
    dim: int,
    *,
    method: str = "auto",
    mode: str = "partial_inverse",
    tol: float = SELF_ADJOINT_TOL,
    scaling=None,
) -> AssembledPencil:
    """Symmetric-definite banded pencil of the form with the given boundary conditions.

    ``scaling`` rescales the annihilator columns (a congruence of the
    pencil): an array, or a callable of the column index array. The default
    keeps the unit lower-triangular recombination.
    """
    if len(form.pieces) != 1:
        raise ValueError("use assemble_piecewise for multi-piece forms")
    return _assemble(form, bc, dim, method, mode, tol, scaling)


def piecewise_functionals(bases: Sequence, conditions, label="piecewise"):
    """Functionals on the interleaved basis; terms are (piece, point, deriv, coeff)."""
    npc = len(bases)

    def gen(length):
        per = -(-length // npc)
        out = np.zeros((len(conditions), npc * per))
        for i, cond in enumerate(conditions):
            for piece, point, deriv, coeff in cond:
                out[i, piece::npc] += coeff * ob.boundary_row(bases[piece], point, per, deriv)
        return out[:, :length]

    return BoundaryFunctionals(len(conditions), gen, tuple(bases), label)


def continuity_conditions(interface, orders=(0, 1)):
    """u^(k)(interface-) - u^(k)(interface+) = 0 for each order k (left piece 0, right 1)."""
    return [[(0, interface, k, 1.0), (1, interface, k, -1.0)] for k in orders]


def assemble_piecewise(
    form: DifferentialForm,
    interface: float,
    outer_conditions,
    dim: int,
    *,
    extra_orders: Sequence[int] = (1,),
    method: str = "pathological",
    mode: str = "partial_inverse",
    tol: float = SELF_ADJOINT_TOL,
) -> AssembledPencil:
    """Two-piece pencil on the interleaved basis with continuity at ``interface``.

    ``outer_conditions`` use (piece, point, deriv, coeff) terms. Continuity
    of the value and of each order in ``extra_orders`` is added. The
    least-norm annihilator is the default: square solves on interface rows
    give columns that grow algebraically and make the right side indefinite
    in floating point.
    """
    if len(form.pieces) != 2:
        raise ValueError("assemble_piecewise needs exactly two pieces")
    bases = [pc.basis for pc in form.pieces]
    cont = continuity_conditions(interface, (0, *extra_orders))
    raw = piecewise_functionals(bases, list(outer_conditions) + cont)
    ncont = len(cont)
    nouter = raw.count - ncont

    def gen(length):
        rows = raw.rows(length).copy()
        head = rows[nouter:, : min(length, 4)]
        scale = np.abs(head).max(axis=1)
        scale[scale == 0] = 1.0
        rows[nouter:] /= scale[:, None]
        return rows

    bc = BoundaryFunctionals(raw.count, gen, tuple(bases), "piecewise")
    return _assemble(form, bc, dim, method, mode, tol)


@dataclass(frozen=True)
class SkewPair:
    """Skew differentiation matrix and its symmetric positive-definite conversion."""

    s: BandedMatrix
    g: SymBanded
    annihilator: Annihilator | None
    skew_defect: float
    band_defect: float

    def __iter__(self):
        yield self.s
        yield self.g


def assemble_skew(basis, bc: BoundaryFunctionals, dim: int, *, method="auto", tol=SELF_ADJOINT_TOL) -> SkewPair:
    """Banded skew matrix of d/dx and Gram matrix A^T A on the recombined basis."""
    count = bc.count
    ncols = dim + 3 * (4 * count + 4) + 16
    size = ncols + 4 * count + 2
    ann, a_sp = _annihilator_sparse(bc, ncols, method, size)
    tgt = ob.diff_target(basis)
    d = ob.diff_operator(basis, tgt, size, size).to_sparse().tocsr()
    c = ob.conversion_operator(basis, tgt, size, size).to_sparse().tocsr()
    full, b, extra, norm = _galerkin(a_sp, d, c, dim)
    skew, band = _defects(full, b, extra, norm, skew=True)
    if max(skew, band) > tol:
        raise NotSkewAdjointError(f"differentiation matrix is not skew: defect {max(skew, band):.3g}", max(skew, band))
    low = sp.tril(full, -1).tocsr()
    s = BandedMatrix.from_sparse(low - low.T, b, b)
    g = sp.csr_matrix(a_sp.T @ a_sp)[:dim, :dim]
    gb = _lower_bw(g)
    return SkewPair(s, SymBanded.from_lower(BandedMatrix.from_sparse(sp.tril(g).tocsr(), gb, 0), gb), ann, skew, band)
