"""Bright colorings of fixed-point-free multivalued maps."""

__version__ = "0.1.0"

from .colorer import (Coloring, ColoringFailed, bound, color_multimap, color_single_valued,
                      greedy_conflict_coloring, inflate_color, product_coloring,
                      split_argmax_coloring, stratified_coloring)
from .discrete import (FiniteMultiMap, LoopError, discrete_color_multi, discrete_color_single,
                       doubling_min_colors)
from .exprdsl import Interval, eval_interval, eval_point, parse_expr, to_source, tokenize
from .geometry import (Cell, DomainComplex, FiniteSet, boxset_separation, build_complex,
                       hausdorff_distance, refine_cell)
from .multimap import (CounterexampleReport, FpfCertificate, Inconclusive, MultiMapSpec,
                       certify_fixed_point_free, enclose, evaluate)
from .strata import AMBIGUOUS, Certified, argmax_multiplicity, classify
from .verifier import VerificationReport, verify_coloring

__all__ = [
    "Coloring", "ColoringFailed", "bound", "color_multimap", "color_single_valued",
    "greedy_conflict_coloring", "inflate_color", "product_coloring", "split_argmax_coloring",
    "stratified_coloring", "FiniteMultiMap", "LoopError", "discrete_color_multi",
    "discrete_color_single", "doubling_min_colors", "Interval", "eval_interval", "eval_point",
    "parse_expr", "to_source", "tokenize", "Cell", "DomainComplex", "FiniteSet",
    "boxset_separation", "build_complex", "hausdorff_distance", "refine_cell",
    "CounterexampleReport", "FpfCertificate", "Inconclusive", "MultiMapSpec",
    "certify_fixed_point_free", "enclose", "evaluate", "AMBIGUOUS", "Certified",
    "argmax_multiplicity", "classify", "VerificationReport", "verify_coloring",
]
