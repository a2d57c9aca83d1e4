"""Ready-made problems used by the demos, the CLI and the tests."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as poly

from . import opbasis as ob
from .annihilate import BoundaryFunctionals
from .assemble import DifferentialForm, Piece, assemble_pencil, assemble_piecewise, assemble_skew
from .bandcore import SymBanded


def weighted_jacobi_scaling(n):
    """Column scale turning P~_n - c P~_{n+2} into (1 - x^2) P~_n^(1,1)."""
    return np.sqrt((n + 1) * (n + 2) / ((2 * n + 1) * (2 * n + 3)))


def model_problem(dim, *, method="auto"):
    """-u'' = lambda u with u(+-1) = 0 on normalized Legendre."""
    basis = ob.legendre()
    form = DifferentialForm.single(basis, {1: ob.constant(basis)})
    bc = BoundaryFunctionals.dirichlet(basis)
    return assemble_pencil(form, bc, dim, method=method, scaling=weighted_jacobi_scaling)


def ring_problem(r, dim, *, method="auto"):
    """Sixth-order vibration of a nonuniform ring on [0, 1], u = u' = u''' = 0 at both ends."""
    if r <= 0:
        raise ValueError("thickness parameter must be positive")
    basis = ob.on_interval(ob.legendre(), 0.0, 1.0)
    f = np.array([1.0, 4 * (r - 1), -4 * (r - 1)])
    phi = poly.polypow(f, 3)
    pi2, pi4, pi6 = np.pi**2, np.pi**4, np.pi**6
    cv = lambda c: ob.from_monomial(basis, c)
    terms = {3: cv(phi), 2: cv(-2 * pi2 * phi), 1: cv(poly.polyadd(pi4 * phi, pi2 * poly.polyder(phi, 2)))}
    rhs = {1: cv(pi4 * f), 0: cv(pi6 * f)}
    conds = [[(x, k, 1.0)] for x in (0.0, 1.0) for k in (0, 1, 3)]
    bc = BoundaryFunctionals.from_conditions(basis, conds, "ring")
    form = DifferentialForm.single(basis, terms, rhs_terms=rhs)
    return assemble_pencil(form, bc, dim, method=method)


def anharmonic_problem(omega, dim, *, half_width=10.0, method="auto"):
    """-u'' + (omega x^2 + x^4) u = lambda u on [-L, L] with Dirichlet ends."""
    basis = ob.on_interval(ob.legendre(), -half_width, half_width)
    form = DifferentialForm.single(basis, {1: ob.constant(basis), 0: ob.from_monomial(basis, [0, 0, omega, 0, 1])})
    bc = BoundaryFunctionals.dirichlet(basis, -half_width, half_width)
    return assemble_pencil(form, bc, dim, method=method)


def piecewise_problem(dim, *, method="pathological"):
    """[-u'' + V u] = lambda (1 + |x|) u on [-1, inf), V = -1 left of 0 and x^2 right of it."""
    left = ob.on_interval(ob.legendre(), -1.0, 0.0)
    right = ob.WeightedLaguerre(0.0)
    pl = Piece(left, {1: ob.constant(left), 0: ob.constant(left, -1.0)}, weight=ob.from_monomial(left, [1, -1]))
    pr = Piece(right, {1: ob.constant(right), 0: ob.from_monomial(right, [0, 0, 1])}, weight=ob.from_monomial(right, [1, 1]))
    return assemble_piecewise(DifferentialForm((pl, pr)), 0.0, [[(0, -1.0, 0, 1.0)]], dim, method=method)


def skew_problem(dim, *, method="pathological"):
    """d/dx with u(-1) + u(1) = 0 on normalized Legendre."""
    basis = ob.legendre()
    bc = BoundaryFunctionals.from_conditions(basis, [[(-1.0, 0, 1.0), (1.0, 0, 1.0)]], "antiperiodic")
    return assemble_skew(basis, bc, dim, method=method)


def mathieu_matrix(alpha, q, dim):
    """(-D^2)^(alpha/2) + 2 q cos(2 theta) in the real Fourier basis, dim x dim."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    freq = ob.fourier_freq(dim).astype(float)
    cos2 = ob.CoeffVec(ob.FourierReal(), np.array([0, 0, 0, 0, 2 * q * np.sqrt(np.pi)]))
    base = ob.multiplication_operator(cos2, ob.FourierReal(), dim)
    out = SymBanded(dim, max(base.b, 0))
    out.data[: base.b + 1] = base.data
    out.data[0] += np.abs(freq) ** alpha
    return out


def mathieu_stream(alpha, q, dim=None):
    """The fractional Mathieu operator as a lazily grown stream (b = 4)."""
    from .adaptive import OperatorStream

    return OperatorStream(4, section=lambda n: mathieu_matrix(alpha, q, n), dim=dim, label=f"mathieu(alpha={alpha}, q={q})")


def model_streams():
    """(D, M) of the model problem as a pair of streams sharing one assembly."""
    from .adaptive import OperatorStream

    cache = {}

    def pencil(n):
        if cache.get("dim", 0) < n:
            cache["dim"] = n
            cache["pencil"] = model_problem(n).pencil
        return cache["pencil"].section(n)

    return (
        OperatorStream(2, section=lambda n: pencil(n).a, label="model D"),
        OperatorStream(2, section=lambda n: pencil(n).b, label="model M"),
    )
