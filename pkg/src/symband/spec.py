"""JSON problem specifications: loading, validation and assembly."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import jsonschema

from . import opbasis as ob
from .annihilate import BoundaryFunctionals
from .assemble import DifferentialForm, Piece, assemble_pencil, assemble_piecewise
from .errors import SpecValidationError

SCHEMA_NAME = "problem_spec.v1.json"
DEFAULT_OPTIONS = {"dim": 200, "method": "auto", "precision": "double", "tol": 1e-8, "mode": "partial_inverse"}


def load_schema():
    text = resources.files("symband").joinpath("schema", SCHEMA_NAME).read_text(encoding="utf-8")
    return json.loads(text)


def _field(path):
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


@dataclass(frozen=True)
class ProblemSpec:
    """A validated problem description plus its canonical hash."""

    raw: dict
    digest: str

    @property
    def options(self):
        return {**DEFAULT_OPTIONS, **self.raw.get("options", {})}

    @property
    def label(self):
        return self.raw.get("label", "")

    def bases(self):
        return [_basis(p) for p in self.raw["pieces"]]

    def form(self):
        pieces = []
        for p, basis in zip(self.raw["pieces"], self.bases()):
            weight = _coeffs(basis, p["weight"]) if "weight" in p else None
            rhs = None
            if "rhs_terms" in p:
                rhs = {t["order"]: _coeffs(basis, t) for t in p["rhs_terms"]}
            elif weight is None:
                weight = ob.constant(basis)
            pieces.append(Piece(basis, {t["order"]: _coeffs(basis, t) for t in p["terms"]}, weight, rhs))
        return DifferentialForm(tuple(pieces))

    def assemble(self, dim=None):
        opts = self.options
        dim = opts["dim"] if dim is None else dim
        form = self.form()
        kw = {"mode": opts["mode"], "tol": opts["tol"]}
        if len(form.pieces) == 1:
            terms = [[(t["point"], _deriv(t), t.get("weight", 1.0)) for t in f] for f in self.raw["boundary"]]
            bc = BoundaryFunctionals.from_conditions(form.pieces[0].basis, terms, self.label)
            return assemble_pencil(form, bc, dim, method=opts["method"], **kw)
        iface = self.raw["interface"]
        outer = [[(t.get("piece", 0), t["point"], _deriv(t), t.get("weight", 1.0)) for t in f] for f in self.raw["boundary"]]
        orders = [k for k in iface.get("orders", [0, 1]) if k != 0]
        method = self.raw.get("options", {}).get("method", "pathological")
        return assemble_piecewise(form, iface["point"], outer, dim, extra_orders=orders, method=method, **kw)


def _deriv(term):
    return term.get("order", 1) if term["kind"] == "deriv" else 0


def _basis(piece):
    lo, hi = piece["interval"]
    if piece["basis"] == "legendre":
        return ob.on_interval(ob.legendre(), lo, hi)
    return ob.WeightedLaguerre(0.0) if lo == 0 else ob.on_ray(ob.WeightedLaguerre(0.0), lo)


def _coeffs(basis, entry):
    if entry.get("representation", "basis") == "monomial":
        return ob.from_monomial(basis, entry["coefficients"])
    return ob.CoeffVec(basis, entry["coefficients"])


def _semantic(spec):
    n = spec["order"]
    npieces = len(spec["pieces"])
    for k, p in enumerate(spec["pieces"]):
        lo, hi = p["interval"]
        where = f"pieces[{k}]"
        if lo == "inf":
            raise SpecValidationError(f"{where}.interval: left endpoint must be finite")
        if p["basis"] == "legendre" and (hi == "inf" or hi <= lo):
            raise SpecValidationError(f"{where}.interval: legendre needs a finite interval with a < b")
        if p["basis"] == "laguerre" and hi != "inf":
            raise SpecValidationError(f"{where}.interval: laguerre needs a right endpoint of \"inf\"")
        for key in ("terms", "rhs_terms"):
            orders = [t["order"] for t in p.get(key, [])]
            if len(set(orders)) != len(orders):
                raise SpecValidationError(f"{where}.{key}: repeated order")
            if any(o > n for o in orders):
                raise SpecValidationError(f"{where}.{key}: order exceeds the declared order {n}")
        lead = [t for t in p["terms"] if t["order"] == n]
        if not lead or not any(lead[0]["coefficients"]):
            raise SpecValidationError(f"{where}.terms: missing p_{n}, the leading coefficient for order {n}")
        if "weight" in p and "rhs_terms" in p:
            raise SpecValidationError(f"{where}: give either weight or rhs_terms, not both")
    if npieces == 2 and "interface" not in spec:
        raise SpecValidationError("interface: required when there are two pieces")
    if npieces == 1 and "interface" in spec:
        raise SpecValidationError("interface: only allowed with two pieces")
    for i, f in enumerate(spec["boundary"]):
        for j, t in enumerate(f):
            where = f"boundary[{i}][{j}]"
            if t["kind"] == "eval" and "order" in t:
                raise SpecValidationError(f"{where}.order: only deriv terms take an order")
            if t.get("piece", 0) >= npieces:
                raise SpecValidationError(f"{where}.piece: no piece {t['piece']}")
    if spec.get("options", {}).get("method") == "standard" and npieces == 2:
        raise SpecValidationError("options.method: two-piece problems need pathological or auto")


def parse_spec(text: str) -> ProblemSpec:
    """Validate JSON text; errors name the line or the offending field."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecValidationError(f"invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}") from err
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        e = jsonschema.exceptions.best_match(errors)
        raise SpecValidationError(f"{_field(e.absolute_path)}: {e.message}")
    _semantic(raw)
    return ProblemSpec(raw, spec_digest(raw))


def load_spec(path) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def spec_digest(obj) -> str:
    """SHA-256 of the canonical JSON form (sorted keys, no whitespace)."""
    canon = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
