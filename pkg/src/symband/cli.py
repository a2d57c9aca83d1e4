"""Command-line front end: spec-driven solves, the demo applications and diagnostics."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg as sl
from scipy.special import gamma

from . import opbasis as ob
from . import problems
from .adaptive import OperatorStream, apply_chain, sb_aed, sdb_aed
from .bandcore import EPS, gershgorin_disks
from .eigsolve import gen_sym_band_eig, rayleigh_iterate
from .errors import SpecValidationError, SymbandError
from .spec import load_spec, spec_digest

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
PRECISION_NOTE = (
    "Arithmetic is IEEE double throughout; extended-precision runs are not supported, "
    "so ring eigenvalues are trusted to about 1e-6 relative rather than to 30 digits."
)


class UsageError(SpecValidationError):
    """A flag value is out of range."""


def fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.16e}"


def write_csv(out, header, rows, digest, dim, tol):
    """Header row, provenance comment row, then one line per record."""
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    buf.write(f"# spec_sha256={digest} dim={dim} tol={fmt(float(tol))}\n")
    for r in rows:
        w.writerow([fmt(x) for x in r])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def parse_floats(text, name):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as err:
        raise UsageError(f"{name}: expected a comma-separated list of numbers") from err


# ---------------------------------------------------------------------------
# solve / inspect


def _spec_streams(spec):
    cache = {}

    def pencil(n):
        if cache.get("dim", 0) < n:
            cache["dim"] = n
            cache["pencil"] = spec.assemble(n).pencil
        return cache["pencil"].section(n)

    b = spec.assemble(64).pencil
    return (
        OperatorStream(b.a.b, section=lambda n: pencil(n).a, label="A"),
        OperatorStream(b.b.b, section=lambda n: pencil(n).b, label="B"),
    )


def cmd_solve(args):
    spec = load_spec(args.spec)
    dim = args.dim or spec.options["dim"]
    count = min(args.count, dim)
    pairs = args.pairs
    if args.solver == "adaptive":
        a, b = _spec_streams(spec)
        chain = sdb_aed(a, b, count, "pairs" if pairs else "values")
        order = np.argsort(chain.values)[:count]
        lam = chain.values[order]
        res = chain.residuals(a, b, count=chain.values.size)[order] if pairs else None
        tol = chain.tol
    else:
        ap = spec.assemble(dim)
        out = gen_sym_band_eig(ap.pencil, want_vectors=pairs, method=args.method, count=count)
        lam = out.values[:count]
        res = out.residuals(ap.pencil) if pairs else None
        tol = spec.options["tol"]
    header = ["index", "eigenvalue"] + (["residual"] if pairs else [])
    rows = [[i, lam[i]] + ([res[i]] if pairs else []) for i in range(lam.size)]
    write_csv(args.out, header, rows, spec.digest, dim, tol)


def cmd_inspect(args):
    spec = load_spec(args.spec)
    dim = args.dim or spec.options["dim"]
    ap = spec.assemble(dim)
    rows = [("lower_bandwidth_a", ap.pencil.a.b), ("lower_bandwidth_b", ap.pencil.b.b)]
    for k, v in ap.diagnostics.as_dict().items():
        rows.append((k, v))
    for name, m in (("a", ap.pencil.a), ("b", ap.pencil.b)):
        disks = np.array(gershgorin_disks(m))
        rows += [
            (f"gershgorin_lower_{name}", float((disks[:, 0] - disks[:, 1]).min())),
            (f"gershgorin_upper_{name}", float((disks[:, 0] + disks[:, 1]).max())),
            (f"gershgorin_max_radius_{name}", float(disks[:, 1].max())),
        ]
    rows.append(("complete_rows", ap.complete_rows))
    if ap.annihilator is not None:
        rows.append(("annihilator_width", ap.annihilator.width))
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    buf.write(f"# spec_sha256={spec.digest} dim={dim} tol={fmt(float(spec.options['tol']))}\n")
    for k, v in rows:
        w.writerow([k, fmt(v)])
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


# ---------------------------------------------------------------------------
# demos


def wkb_series(n, omega, terms=3):
    """Reversed WKB partial sum for the real-line quartic oscillator, squared."""
    g = gamma(0.75)
    m = np.asarray(n, dtype=float) + 0.5
    lead = (3 * g * m * np.sqrt(np.pi) / gamma(0.25)) ** (2 / 3)
    f = [
        omega * g**4 / np.pi**2,
        -(6 ** (1 / 3)) * omega**2 * (np.pi**4 - 4 * g**8) / (48 * np.pi**3 * g ** (4 / 3)),
        36 ** (1 / 3) * g ** (4 / 3) * ((3 * np.pi**4 - 4 * g**8) * omega**3 + 12 * np.pi**4) / (216 * np.pi**4),
    ]
    root = lead + sum(f[k] / (m * np.pi) ** (2 * k / 3) for k in range(terms))
    return root**2


def anharmonic_table(omega, half_width, dim, keep_fraction):
    ap = problems.anharmonic_problem(omega, dim, half_width=half_width)
    lam = gen_sym_band_eig(ap.pencil).values
    keep = max(1, int(keep_fraction * dim))
    n = np.arange(keep)
    return {
        "n": n,
        "eigenvalue": lam[:keep],
        "wkb": wkb_series(n, omega),
        "squarewell": (np.pi * n / (2 * half_width)) ** 2,
        "harmonic": np.sqrt(omega) * (2 * n + 1),
    }


def cmd_demo_anharmonic(args):
    if not 0 < args.keep_fraction <= 1:
        raise UsageError("--keep-fraction: must lie in (0, 1]")
    if args.omega < 0 or args.halfwidth <= 0:
        raise UsageError("--omega must be nonnegative and --halfwidth positive")
    t = anharmonic_table(args.omega, args.halfwidth, args.dim, args.keep_fraction)
    cols = ["n", "eigenvalue", "wkb", "squarewell", "harmonic"]
    rows = [[int(t["n"][i])] + [t[c][i] for c in cols[1:]] for i in range(t["n"].size)]
    params = {"cmd": "demo-anharmonic", "omega": args.omega, "halfwidth": args.halfwidth, "keep": args.keep_fraction}
    write_csv(args.out, cols, rows, spec_digest(params), args.dim, EPS)


def ring_homotopy(r_grid, dim, count=10, tol=1e-13):
    """Track the lowest ``count`` ring eigenvalues down a descending r grid.

    Each step warm-starts Rayleigh iteration from Ritz vectors of the
    previous eigenvectors. A failed step is retried once through the
    midpoint.
    """
    r_grid = [float(r) for r in r_grid]
    if any(r <= 0 for r in r_grid):
        raise UsageError("--r-grid: thickness values must be positive")
    if any(b >= a for a, b in zip(r_grid, r_grid[1:])):
        raise UsageError("--r-grid: values must be strictly descending")
    first = gen_sym_band_eig(problems.ring_problem(r_grid[0], dim).pencil, want_vectors=True, count=count)
    vecs = [first.vectors[:, i] for i in range(count)]
    table = [first.values[:count].copy()]

    def step(r, start):
        p = problems.ring_problem(r, dim).pencil
        # Rayleigh-Ritz on the previous vectors orders the warm starts
        v = np.column_stack(start)
        _, y = sl.eigh(v.T @ (p.a.to_sparse() @ v), v.T @ (p.b.to_sparse() @ v))
        out = [rayleigh_iterate(p, x, tol=tol) for x in (v @ y).T]
        vals = np.array([x.value for x in out])
        # a jump to another branch shows up as a repeated or reordered value
        if np.any(np.diff(vals) <= 1e-8 * np.abs(vals[1:])):
            raise SymbandError(f"Rayleigh iteration at r = {r} lost track of a branch")
        return out

    prev = r_grid[0]
    for r in r_grid[1:]:
        try:
            got = step(r, vecs)
        except SymbandError:
            mid = step(0.5 * (prev + r), vecs)
            got = step(r, [x.vector for x in mid])
        vecs = [x.vector for x in got]
        table.append(np.array([x.value for x in got]))
        prev = r
    return np.array(r_grid), np.array(table)


def cmd_demo_rings(args):
    r_grid = parse_floats(args.r_grid, "--r-grid")
    if not r_grid:
        raise UsageError("--r-grid: empty")
    r, lam = ring_homotopy(r_grid, args.dim, args.count)
    header = ["r"] + [f"lambda_{i}" for i in range(lam.shape[1])]
    rows = [[r[i], *lam[i]] for i in range(r.size)]
    params = {"cmd": "demo-rings", "r": r_grid, "count": args.count}
    write_csv(args.out, header, rows, spec_digest(params), args.dim, EPS)


def fractional_initial(kind, n, seed=0):
    freq = ob.fourier_freq(n)
    if kind == "cos20":
        if n < 41:
            raise UsageError("--init cos20 needs --n of at least 41")
        u = np.zeros(n)
        u[40] = 1.0  # cos(20 theta) / sqrt(pi)
    elif kind == "analytic-decay":
        u = np.exp(-36.0 * (freq + 1) / np.ceil(n / 2))
    elif kind == "random-seeded":
        u = np.random.default_rng(seed).standard_normal(n)
    else:
        raise UsageError(f"--init: unknown initial data {kind!r}")
    return u / np.linalg.norm(u)


def fractional_evolution(alpha, q, n, t_grid, init="analytic-decay", seed=0, theta_count=64, jobs=1):
    """Evolve exp(-i t H) u0 through an adaptive chain; returns theta, |u|^2 samples and norm errors."""
    if not 0 < alpha <= 2:
        raise UsageError("--alpha: must lie in (0, 2]")
    if n < 1 or n % 2 == 0:
        raise UsageError("--n: Fourier truncation must be odd")
    h = problems.mathieu_matrix(alpha, q, n)
    chain = sb_aed(OperatorStream.from_symbanded(h), n, "pairs")
    u0 = fractional_initial(init, n, seed)
    theta = np.linspace(0.0, 2 * np.pi, theta_count, endpoint=False)
    basis = ob.fourier_values(n, theta)

    def one(t):
        u = apply_chain(chain, lambda lam: np.exp(-1j * t * lam), u0)
        return np.abs(u @ basis) ** 2, abs(np.linalg.norm(u) - 1.0)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            out = list(ex.map(one, t_grid))
    else:
        out = [one(t) for t in t_grid]
    dens = np.array([o[0] for o in out]).reshape(len(t_grid), theta_count)
    return theta, dens, np.array([o[1] for o in out]), chain.tol


def cmd_demo_fractional(args):
    t_grid = parse_floats(args.t_grid, "--t-grid") if args.t_grid else list(np.linspace(0.0, 10.0, 101))
    theta, dens, err, tol = fractional_evolution(
        args.alpha, args.q, args.n, t_grid, args.init, args.seed, args.theta_count, args.jobs
    )
    header = ["t"] + [f"theta_{i}" for i in range(theta.size)] + ["norm_error"]
    rows = [[t_grid[k], *dens[k], err[k]] for k in range(len(t_grid))]
    params = {"cmd": "demo-fractional", "alpha": args.alpha, "q": args.q, "init": args.init, "seed": args.seed, "t": t_grid}
    write_csv(args.out, header, rows, spec_digest(params), args.n, tol)
    print(f"max norm error {err.max():.3e}", file=sys.stderr)


def piecewise_table(dim, count=10, points=(5.0, 10.0, 20.0)):
    """Lowest eigenvalues and right-piece eigenfunction samples of the weighted Schrodinger problem."""
    ap = problems.piecewise_problem(dim)
    res = gen_sym_band_eig(ap.pencil, want_vectors=True, count=count)
    ann = ap.annihilator.a.to_dense()[:, :dim]
    coeffs = ann @ res.vectors
    right = coeffs[1::2]
    vals = ob.eval_basis(ap.bases[1][0], right.shape[0], np.asarray(points)).T @ right
    # fix the sign so the first sample is nonnegative
    vals *= np.where(vals[0] < 0, -1.0, 1.0)
    return res.values[:count], vals.T


def cmd_demo_piecewise(args):
    lam, tails = piecewise_table(args.dim, args.count)
    header = ["n", "eigenvalue", "u_at_5", "u_at_10", "u_at_20"]
    rows = [[i, lam[i], *tails[i]] for i in range(lam.size)]
    write_csv(args.out, header, rows, spec_digest({"cmd": "demo-piecewise", "count": args.count}), args.dim, EPS)


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="symband", description="Banded spectral discretizations and eigensolvers.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser(
        "solve",
        help="assemble a JSON problem spec and compute its lowest eigenvalues",
        description="CSV columns: index (0-based), eigenvalue, and with --pairs the scaled residual "
        "||Av - lam Bv|| / ((||A|| + |lam| ||B||) ||v||). " + PRECISION_NOTE,
    )
    s.add_argument("spec")
    s.add_argument("--dim", type=int)
    s.add_argument("--count", type=int, default=10)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--values", dest="pairs", action="store_false", help="eigenvalues only (default)")
    g.add_argument("--pairs", dest="pairs", action="store_true", help="eigenpairs, adds a residual column")
    s.add_argument("--solver", choices=["finite", "adaptive"], default="finite")
    s.add_argument("--method", choices=["auto", "direct", "reverse"], default="auto")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve, pairs=False)

    s = sub.add_parser("inspect", help="print pencil diagnostics as key,value CSV")
    s.add_argument("spec")
    s.add_argument("--dim", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_inspect)

    s = sub.add_parser(
        "demo-anharmonic",
        help="quartic oscillator on a finite interval against its asymptotic laws",
        description="CSV columns: n, eigenvalue, wkb (3-term reversed WKB), squarewell (pi n / 2L)^2, "
        "harmonic sqrt(omega)(2n+1).",
    )
    s.add_argument("--omega", type=float, default=25.0)
    s.add_argument("--halfwidth", type=float, default=10.0)
    s.add_argument("--dim", type=int, default=2000)
    s.add_argument("--keep-fraction", type=float, default=0.6)
    s.add_argument("--out")
    s.set_defaults(func=cmd_demo_anharmonic)

    s = sub.add_parser(
        "demo-rings",
        help="ring eigenvalues along a descending thickness grid by warm-started Rayleigh iteration",
        description="CSV columns: r, lambda_0 .. lambda_{count-1}. " + PRECISION_NOTE,
    )
    s.add_argument("--r-grid", default="1.0,0.9,0.8,0.7,0.6,0.5,0.4,0.3,0.2,0.1")
    s.add_argument("--dim", type=int, default=200)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--out")
    s.set_defaults(func=cmd_demo_rings)

    s = sub.add_parser(
        "demo-fractional",
        help="unitary evolution under the fractional Mathieu operator",
        description="CSV columns: t, |u(theta_i, t)|^2 on a uniform theta grid, norm_error = | ||u(t)|| - 1 |.",
    )
    s.add_argument("--alpha", type=float, default=1.5)
    s.add_argument("--q", type=float, default=80.0)
    s.add_argument("--n", type=int, default=1001)
    s.add_argument("--t-grid", help="comma-separated times (default 101 points on [0, 10])")
    s.add_argument("--init", choices=["cos20", "analytic-decay", "random-seeded"], default="analytic-decay")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--theta-count", type=int, default=64)
    s.add_argument("--jobs", type=int, default=1, help="threads for independent time points")
    s.add_argument("--out")
    s.set_defaults(func=cmd_demo_fractional)

    s = sub.add_parser(
        "demo-piecewise",
        help="weighted Schrodinger problem on [-1, inf) with a junction at 0",
        description="CSV columns: n, eigenvalue, eigenfunction samples at x = 5, 10, 20.",
    )
    s.add_argument("--dim", type=int, default=400)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--out")
    s.set_defaults(func=cmd_demo_piecewise)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (SpecValidationError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SymbandError, np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as err:
        print(f"error: {type(err).__module__}.{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
