"""Structure-preserving interpolatory model reduction (DROP) for systems
``H(s, p) = C(s, p) K(s, p)^{-1} B(s, p)``."""

from .benchmarks import delay_system, demo_system, heat_fading_memory
from .drop import (ReducedSystem, SvdReport, choose_order, drop_reduce, minimal_realization,
                   stacked_svd)
from .expr import CoeffExpr, eval_coeff, parse_coeff, print_coeff
from .io import load_system, read_matrix, save_system, write_matrix
from .projection import (ProjectionPair, build_V, build_VW, build_W, orthonormalize,
                         projection_pair, realify)
from .sampling import (SamplePoint, SampleSet, log_freq_grid, make_samples, random_param_grid,
                       random_tangent_dirs)
from .system import StructuredSystem, StructuredTerm, assemble, transfer, transfer_sweep

__all__ = [
    "CoeffExpr", "parse_coeff", "eval_coeff", "print_coeff",
    "StructuredSystem", "StructuredTerm", "assemble", "transfer", "transfer_sweep",
    "SamplePoint", "SampleSet", "log_freq_grid", "random_param_grid", "random_tangent_dirs",
    "make_samples",
    "ProjectionPair", "build_V", "build_W", "build_VW", "realify", "orthonormalize",
    "projection_pair",
    "SvdReport", "ReducedSystem", "stacked_svd", "choose_order", "drop_reduce",
    "minimal_realization",
    "demo_system", "delay_system", "heat_fading_memory",
    "read_matrix", "write_matrix", "load_system", "save_system",
]
