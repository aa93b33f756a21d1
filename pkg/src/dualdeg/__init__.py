"""Exact degree measures of partial Boolean functions, dual witnesses, hardness
amplification for gapped compositions, and exhaustive certificate checking."""
from .boolfn import Convention, GapParams, PartialBoolFn, Value, gen_named
from .config import RunConfig, load_config
from .degree import (DegreeResult, Measure, approx_degree, decompose_dual, degree,
                     dual_witness, onesided_degree, query_bounds, threshold_degree)
from .polylib import CubeFn, MultilinearPoly, UnivariatePoly, pure_high_degree
from .verify import DualKind, WitnessReport, certify_amplification, verify_dual

__all__ = [
    "Convention", "CubeFn", "DegreeResult", "DualKind", "GapParams", "Measure",
    "MultilinearPoly", "PartialBoolFn", "RunConfig", "UnivariatePoly", "Value", "WitnessReport",
    "approx_degree", "certify_amplification", "decompose_dual", "degree", "dual_witness",
    "gen_named", "load_config", "onesided_degree", "pure_high_degree", "query_bounds",
    "threshold_degree", "verify_dual",
]
