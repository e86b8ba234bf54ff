"""Symmetry analysis workbench for the barotropic potential vorticity equation."""
from .expr import Expr, equal_expr, diff, evaluate, simplify, subs
from .parser import parse, ParseError

__version__ = "0.1.0"

__all__ = ["Expr", "ParseError", "diff", "equal_expr", "evaluate", "parse", "simplify", "subs"]
