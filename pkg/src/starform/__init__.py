"""Exact deformation quantization on the cotangent bundle of a flat torus."""
from .scalars import (FormalSeries, GaussianRational, TauScalar, TruncationContext, evaluate_numeric,
                      series_invert, series_mul)
from .symbols import MatrixSymbol, Symbol, render
from .starprod import StarProductSpec, make_spec, star, star_kappa, star_magnetic, star_standard
from .cover import build_torus_cover, monopole_bundle
from .explog import bch_compose, bch_series, star_exp, star_log
from .cech import cech_class_reduce, dirac_check, picard_action, relative_class

__version__ = "0.1.0"

__all__ = [
    "FormalSeries", "GaussianRational", "TauScalar", "TruncationContext", "evaluate_numeric",
    "series_invert", "series_mul", "MatrixSymbol", "Symbol", "render", "StarProductSpec", "make_spec",
    "star", "star_kappa", "star_magnetic", "star_standard", "build_torus_cover", "monopole_bundle",
    "bch_compose", "bch_series", "star_exp", "star_log", "cech_class_reduce", "dirac_check",
    "picard_action", "relative_class",
]
