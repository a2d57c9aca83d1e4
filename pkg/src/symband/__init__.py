"""Symmetric banded spectral discretizations and banded eigensolvers."""

from .adaptive import FactorChain, OperatorStream, apply_chain, sb_aed, sdb_aed
from .assemble import DifferentialForm, Piece, assemble_pencil, assemble_piecewise, assemble_skew
from .bandcore import BandedMatrix, Pencil, SymBanded
from .eigsolve import gen_sym_band_eig, rayleigh_iterate, sym_band_eig
from .spec import ProblemSpec, load_spec, parse_spec

__all__ = [
    "BandedMatrix",
    "DifferentialForm",
    "FactorChain",
    "OperatorStream",
    "Pencil",
    "Piece",
    "ProblemSpec",
    "SymBanded",
    "apply_chain",
    "assemble_pencil",
    "assemble_piecewise",
    "assemble_skew",
    "gen_sym_band_eig",
    "load_spec",
    "parse_spec",
    "rayleigh_iterate",
    "sb_aed",
    "sdb_aed",
    "sym_band_eig",
]
__version__ = "0.1.0"
