"""Projected Jacobi detection for large quasi-symmetric MIMO systems."""

__version__ = "0.1.0"

from .channel import ChannelConfig, ChannelRealization, ElaaGeometry, compute_weights, generate_iid, generate_ind
from .detectors import (
    DetectorConfig,
    DetectorOutput,
    PrecomputedSystem,
    SolverConfig,
    build_system,
    detect_jacobi,
    detect_mf,
    detect_mfb,
    detect_mld,
    detect_pj,
    detect_rzf,
    jacobi_step,
)
from .estimators import (
    MatchedFilterDetector,
    MLDetector,
    ProjectedJacobiDetector,
    RZFDetector,
)
from .modem import Constellation, SymbolVector, count_symbol_errors, draw_symbols, make_qam, slice_symbols
from .numerics import SeededRng

__all__ = [
    "__version__",
    "ChannelConfig", "ChannelRealization", "ElaaGeometry", "compute_weights", "generate_iid", "generate_ind",
    "DetectorConfig", "DetectorOutput", "PrecomputedSystem", "SolverConfig", "build_system",
    "detect_jacobi", "detect_mf", "detect_mfb", "detect_mld", "detect_pj", "detect_rzf", "jacobi_step",
    "MatchedFilterDetector", "MLDetector", "ProjectedJacobiDetector", "RZFDetector",
    "Constellation", "SymbolVector", "count_symbol_errors", "draw_symbols", "make_qam", "slice_symbols",
    "SeededRng",
]
